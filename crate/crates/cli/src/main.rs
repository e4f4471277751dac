use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gkp_bell::nogo::verify_nogo;
use gkp_bell_cli::config::SweepFunctional;
use gkp_bell_cli::oracle_check::{oracle_csv, run_oracle_check, OracleCheckConfig};
use gkp_bell_cli::report::{emit_critical_report, write_output};
use gkp_bell_cli::sweep::run_critical;
use gkp_bell_cli::{emit_report, run_sweep, CliError, CliResult, Format, SweepConfig};

#[derive(Parser)]
#[command(name = "gkp-bell", version, about = "Bell tests with finite-energy GKP qubits under binned homodyne detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a functional on an (r_db, eta, n_th) grid.
    Sweep(Common),
    /// Smallest squeezing with a violation, per channel in the config.
    CriticalSqueezing(Common),
    /// Local-polytope distance on a grid (forces functional = distance).
    Distance(Common),
    /// Exhaustive CHSH check over Clifford-rotated Pauli settings.
    VerifyNogo(Common),
    /// Compare the series overlaps with the Fock-space oracle.
    OracleCheck(Common),
}

fn load(common: &Common) -> CliResult<(SweepConfig, Option<PathBuf>)> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let cfg = SweepConfig::load(path)?;
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

fn destination(common: &Common, cfg: Option<&SweepConfig>) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.and_then(|c| c.output.clone()))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sweep(common) => sweep(common, None),
        Command::Distance(common) => sweep(common, Some(SweepFunctional::Distance)),
        Command::CriticalSqueezing(common) => {
            let (cfg, base) = load(&common)?;
            let results = run_critical(&cfg, base.as_deref(), common.workers)?;
            let report = emit_critical_report(&results, &cfg)?;
            write_output(report.render(common.format), destination(&common, Some(&cfg)).as_deref())
        }
        Command::VerifyNogo(common) => {
            let report = verify_nogo();
            let text = match common.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
                Format::Csv => format!(
                    "group_order,clifford_pairs,pauli_choices_per_pair,combinations,global_max,pairs_attaining_max\n{},{},{},{},{},{}\n",
                    report.group_order,
                    report.clifford_pairs,
                    report.pauli_choices_per_pair,
                    report.combinations,
                    report.global_max,
                    report.pairs_attaining_max
                ),
            };
            write_output(&text, destination(&common, None).as_deref())?;
            if report.global_max != 2 {
                return Err(CliError::Numerical(format!("CHSH maximum {} over Pauli settings", report.global_max)));
            }
            Ok(())
        }
        Command::OracleCheck(common) => {
            let cfg = match &common.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| CliError::Io { path: p.clone(), source: e })?;
                    serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?
                }
                None => OracleCheckConfig::default(),
            };
            let rows = run_oracle_check(&cfg, common.workers)?;
            let text = match common.format {
                Format::Csv => oracle_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
            };
            write_output(&text, destination(&common, None).as_deref())?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                return Err(CliError::Numerical(format!("{failed} oracle comparisons out of tolerance")));
            }
            Ok(())
        }
    }
}

fn sweep(common: Common, force: Option<SweepFunctional>) -> CliResult<()> {
    let (mut cfg, base) = load(&common)?;
    if let Some(f) = force {
        cfg.functional = f;
        cfg.validate()?;
    }
    let rows = run_sweep(&cfg, base.as_deref(), common.workers)?;
    let report = emit_report(&rows, &cfg)?;
    write_output(report.render(common.format), destination(&common, Some(&cfg)).as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gkp-bell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
