use ringsqueeze::protocols::{run_protocol, sweep_protocols, target_state};
use ringsqueeze::{Error, Execution, ModeLabel, Order, ProtocolKind, ProtocolSpec};

fn fidelity_at(kind: ProtocolKind, xi: f64, duration: f64) -> f64 {
    run_protocol(&ProtocolSpec::new(kind, xi).with_duration(duration)).unwrap().metrics.fidelity
}

#[test]
fn fidelity_grows_with_duration() {
    for kind in [ProtocolKind::OneTwoMode, ProtocolKind::FourMode] {
        let f: Vec<f64> = [4.0, 8.0, 16.0].iter().map(|d| fidelity_at(kind, 0.3, *d)).collect();
        assert!(f[0] <= f[1] && f[1] <= f[2], "{kind:?}: {f:?}");
    }
}

#[test]
fn larger_squeezing_is_harder() {
    for kind in [ProtocolKind::OneTwoMode, ProtocolKind::FourMode] {
        let f: Vec<f64> = [0.1, 0.3, 0.6].iter().map(|xi| fidelity_at(kind, *xi, 6.0)).collect();
        assert!(f[0] > f[1] && f[1] > f[2], "{kind:?}: {f:?}");
    }
}

#[test]
fn step_order_does_not_matter() {
    let base = ProtocolSpec::new(ProtocolKind::FourMode, 0.3);
    let a = run_protocol(&base).unwrap();
    let b = run_protocol(&base.clone().with_order(vec![2, 1, 4, 3])).unwrap();
    let d = (a.metrics.fidelity - b.metrics.fidelity).abs();
    assert!(d < 1e-6, "fidelity difference {d:e}");
}

#[test]
fn analysis_frame_returns_to_vacuum() {
    for (kind, xi) in [(ProtocolKind::OneTwoMode, 0.5493), (ProtocolKind::FourMode, 0.3)] {
        let r = run_protocol(&ProtocolSpec::new(kind, xi)).unwrap();
        assert!(r.metrics.frame_vacuum_fidelity >= 0.99, "{kind:?}: {}", r.metrics.frame_vacuum_fidelity);
    }
}

#[test]
fn one_two_mode_end_to_end() {
    let spec = ProtocolSpec::new(ProtocolKind::OneTwoMode, 0.5 * 3f64.ln()).with_duration(12.0);
    let r = run_protocol(&spec).unwrap();
    assert!(r.metrics.fidelity >= 0.99);
    assert!(r.metrics.cavity_deviation < 1e-2);
    assert_eq!(r.steps.len(), 2);
    for s in &r.steps {
        assert!(s.state.validate().is_ok());
        assert!(s.spectral_abscissa >= -1e-12, "a decoupled mode keeps the full drift marginal");
        assert!(s.decoupling.pass);
    }
    assert_eq!(r.series.len(), 1 + 2 * spec.samples_per_step);
    assert!(r.series.windows(2).all(|w| w[1].time > w[0].time));
    assert!((r.series.last().unwrap().time - 24.0).abs() < 1e-9);
}

#[test]
fn four_mode_leaves_c0_squeezed() {
    let r = run_protocol(&ProtocolSpec::new(ProtocolKind::FourMode, 0.3)).unwrap();
    let c0 = r.final_state.partial(&[ModeLabel::collective(1, Order::Zero)]).unwrap();
    let c = c0.covariance();
    assert!((c[(0, 0)] - 0.5).abs() > 1e-3 || (c[(1, 1)] - 0.5).abs() > 1e-3);
    let t = target_state(&r.spec).unwrap();
    assert!((t.purity().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn vacuum_target_for_zero_squeezing() {
    let r = run_protocol(&ProtocolSpec::new(ProtocolKind::FourMode, 0.0)).unwrap();
    assert!((r.metrics.fidelity - 1.0).abs() < 1e-6);
    assert!(r.metrics.log_negativity.abs() < 1e-9);
}

#[test]
fn sweeps_match_sequential_runs() {
    let specs: Vec<ProtocolSpec> = [0.1, 0.2, 0.4, 2.0]
        .iter()
        .map(|xi| ProtocolSpec::new(ProtocolKind::OneTwoMode, *xi).with_duration(5.0))
        .collect();
    let par = sweep_protocols(&specs, Execution::Parallel);
    let seq = sweep_protocols(&specs, Execution::Sequential);
    for (p, s) in par.iter().zip(&seq) {
        match (p, s) {
            (Ok(p), Ok(s)) => assert_eq!(p.metrics, s.metrics),
            (Err(Error::Stability(_)), Err(Error::Stability(_))) => {}
            other => panic!("mismatch: {other:?}"),
        }
    }
    assert!(matches!(par[3], Err(Error::Stability(_))));
}
