//! Measurement statistics of finite-energy GKP-encoded states under binned
//! homodyne detection, with multipartite Bell functionals, local-polytope
//! distances and an exact CHSH enumeration for Pauli settings.
//!
//! The main pipeline is
//!
//! 1. [`gkp`]: the lattice model of the encoded Pauli operators,
//! 2. [`overlap`]: single-mode overlaps `t[k][o]` as error-function series,
//! 3. [`logical`]: Pauli-string coefficients of the logical resource,
//! 4. [`behavior`]: the full table `p(o|x)`,
//! 5. [`bell`] and [`polytope`]: witnesses evaluated on that table.
//!
//! [`oracle`] rebuilds the same single-mode probabilities from Fock-space
//! wavefunctions without touching the lattice sums, and [`nogo`] checks the
//! bipartite Pauli bound in integer arithmetic.

pub mod behavior;
pub mod bell;
pub mod error;
pub mod gkp;
pub mod logical;
pub mod lp;
pub mod nogo;
pub mod numeric;
pub mod oracle;
pub mod overlap;
pub mod polytope;

pub use behavior::{assemble_behavior, Behavior, SettingScheme};
pub use bell::{BellResult, Functional};
pub use error::{Error, Result};
pub use gkp::{FiniteEnergyParams, LatticeSite, PauliIndex};
pub use logical::LogicalState;
pub use overlap::{MeasurementSetting, NoiseChannel, OverlapTable};
pub use polytope::DistanceResult;

/// Default truncation tolerance for lattice and error-function series.
pub const DEFAULT_TOL: f64 = 1e-12;
