use gkp_bell::bell::{cabello_value, mabk_value};
use gkp_bell::logical::{ghz_coefficients, w_coefficients};
use gkp_bell::polytope::polytope_distance;
use gkp_bell::{assemble_behavior, Behavior, Error, FiniteEnergyParams, NoiseChannel, SettingScheme, DEFAULT_TOL};

fn ghz3(r_db: f64, eta: f64, n_th: f64) -> Behavior {
    let params = FiniteEnergyParams::from_db(r_db).unwrap();
    let channel = NoiseChannel::new(eta, n_th).unwrap();
    let state = ghz_coefficients(3).unwrap();
    assemble_behavior(&state, &SettingScheme::mabk(3).unwrap(), &params, &channel, DEFAULT_TOL).unwrap()
}

#[test]
fn ghz3_high_squeezing_is_nonlocal() {
    let b = ghz3(20.0, 1.0, 0.0);
    let s = mabk_value(&b).unwrap();
    assert!((s.value - 4.0).abs() < 1e-3, "{}", s.value);
    assert!(s.violated);
    let d = polytope_distance(&b).unwrap();
    assert!(d.distance > 0.1, "{}", d.distance);
}

#[test]
fn ghz3_low_squeezing_is_not_violating() {
    let s = mabk_value(&ghz3(2.0, 1.0, 0.0)).unwrap();
    assert!(s.value < 2.0 && !s.violated, "{}", s.value);
}

#[test]
fn loss_and_noise_lower_the_mabk_value() {
    let mut last = f64::INFINITY;
    for (eta, n_th) in [(1.0, 0.0), (0.95, 0.0), (0.9, 0.0), (0.9, 0.2), (0.8, 0.4)] {
        let v = mabk_value(&ghz3(12.0, eta, n_th)).unwrap().value;
        assert!(v < last + 1e-12, "eta {eta} n_th {n_th}: {v} after {last}");
        last = v;
    }
}

#[test]
fn ghz_behavior_is_party_symmetric_and_round_trips() {
    let b = ghz3(8.0, 0.9, 0.05);
    for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let q = b.permute_parties(&perm).unwrap();
        let dev = b.table().iter().zip(q.table()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-14, "{perm:?}: {dev}");
    }
    let back = Behavior::from_json(&b.to_json().unwrap()).unwrap();
    assert_eq!(back.table(), b.table());
}

#[test]
fn w3_cabello_violation_at_high_squeezing() {
    let params = FiniteEnergyParams::from_db(15.0).unwrap();
    let channel = NoiseChannel::new(1.0, 0.0).unwrap();
    let scheme = SettingScheme::cabello(3).unwrap();
    let b = assemble_behavior(&w_coefficients(3).unwrap(), &scheme, &params, &channel, DEFAULT_TOL).unwrap();
    let c = cabello_value(&b, scheme.kind()).unwrap();
    assert!(c.violated && c.value > 0.2, "{}", c.value);
}

#[test]
fn invalid_channel_is_a_domain_error() {
    assert!(matches!(NoiseChannel::new(0.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(NoiseChannel::new(0.9, -0.1), Err(Error::Domain(_))));
}
