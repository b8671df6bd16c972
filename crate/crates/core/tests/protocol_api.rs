use ionqec_core::circuit::DurationTable;
use ionqec_core::estimator::{count_failures, enumerate_paths, log_grid, loglog_fit, pseudo_threshold, BackendKind};
use ionqec_core::noise::{CrosstalkMode, NoiseParams};
use ionqec_core::steane::{Protocol, Target};

fn noiseless() -> NoiseParams {
    NoiseParams {
        p_1q: 0.0,
        p_ms: 0.0,
        p_sp: 0.0,
        p_m: 0.0,
        p_sg: 0.0,
        t1: f64::INFINITY,
        t2: f64::INFINITY,
        ..NoiseParams::default()
    }
}

#[test]
fn noiseless_protocol_never_fails_on_either_backend() {
    let p = Protocol::new(noiseless(), DurationTable::default()).unwrap();
    for target in Target::BOTH {
        assert_eq!(count_failures(&p, target, BackendKind::Tableau, 5, 0, 300).unwrap(), 0);
        assert_eq!(count_failures(&p, target, BackendKind::Dense, 5, 0, 20).unwrap(), 0);
    }
}

#[test]
fn trial_streams_are_counter_based() {
    let p = Protocol::new(NoiseParams { p_ms: 2e-2, ..NoiseParams::default() }, DurationTable::default()).unwrap();
    let whole = count_failures(&p, Target::Zero, BackendKind::Tableau, 9, 0, 2000).unwrap();
    let split = count_failures(&p, Target::Zero, BackendKind::Tableau, 9, 0, 1200).unwrap()
        + count_failures(&p, Target::Zero, BackendKind::Tableau, 9, 1200, 800).unwrap();
    assert_eq!(whole, split);
    assert!(whole > 0);
}

#[test]
fn path_weights_are_conserved() {
    let params = NoiseParams::crosstalk_only(1e-2, CrosstalkMode::EntanglingCoherent);
    let p = Protocol::new(params, DurationTable::default()).unwrap();
    for target in Target::BOTH {
        let e = enumerate_paths(&p, target, 1e-15).unwrap();
        assert!((e.total_weight() - 1.0).abs() < 1e-9, "{}", e.total_weight());
        assert!(e.p_logical > 0.0 && e.p_logical < 1.0);
    }
}

#[test]
fn threshold_and_slope_on_synthetic_curve() {
    // p_log = 20 p² crosses the diagonal at p = 0.05.
    let pts: Vec<(f64, f64)> = log_grid(1e-3, 1e-1, 8).into_iter().map(|p| (p, 20.0 * p * p)).collect();
    let t = pseudo_threshold(&pts).unwrap();
    assert!((t - 0.05).abs() / 0.05 < 1e-9, "{t}");
    let (slope, _, _) = loglog_fit(&pts).unwrap();
    assert!((slope - 2.0).abs() < 1e-12);
}
