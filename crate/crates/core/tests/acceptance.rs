//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ringsqueeze::fock::{self, FockBasis, FockDensity, FockOptions};
use ringsqueeze::hamiltonian::effective_operator;
use ringsqueeze::modes::{chain_overlap, orthogonality_deficit, EnsembleGeometry};
use ringsqueeze::protocols::{
    run_protocol, stability_sweep, verify_step_decoupling,
};
use ringsqueeze::squeezers::{
    conjugate_hamiltonian, ensemble_mixer, factorized_four_mode, four_mode_frame, four_mode_labels,
    four_mode_squeezer, from_generator, golden_mixer, one_two_mode_frame, single_mode_squeezer, two_mode_squeezer,
};
use ringsqueeze::{
    Direction, EnsembleDrive, Error, Execution, GaussianState, LaserConfig, LindbladSpec, ModeLabel, ModeRegistry,
    OperatorExpr, Order, ProtocolKind, ProtocolSpec, QuadraticHamiltonian,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(n: u8, o: Order) -> ModeLabel {
    ModeLabel::collective(n, o)
}

fn symplectic_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let r1 = ModeRegistry::canonical(1);
    let r2 = ModeRegistry::canonical(2);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let xi: f64 = rng.random_range(-1.0..1.0);
        let lambda: f64 = rng.random_range(0.2..3.0);
        let theta: f64 = rng.random_range(0.0..0.5);
        let mut transforms = vec![
            single_mode_squeezer(&r1, c(1, Order::Zero), xi).unwrap(),
            two_mode_squeezer(&r1, c(1, Order::Plus2), c(1, Order::Minus2), xi).unwrap(),
            one_two_mode_frame(&r1, 1, xi).unwrap(),
            four_mode_squeezer(&r2, four_mode_labels(), xi).unwrap(),
            ensemble_mixer(&r2, four_mode_labels(), lambda).unwrap(),
            golden_mixer(&r2).unwrap(),
            factorized_four_mode(&r2, xi).unwrap(),
            four_mode_frame(&r2, xi).unwrap(),
        ];
        let n = r2.dim();
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let h = QuadraticHamiltonian::new(r2.clone(), &m + m.transpose()).unwrap();
        transforms.push(from_generator(&h, theta));
        let drive = EnsembleDrive::real(rng.random_range(0.5..2.0), rng.random_range(0.0..0.5));
        let laser = LaserConfig::new(Direction::Clockwise, vec![drive, drive.with_phase(rng.random_range(0.0..PI))]);
        let hl = QuadraticHamiltonian::from_expr(&effective_operator(&laser), &r2).unwrap();
        transforms.push(from_generator(&hl, theta));
        for s in &transforms {
            worst = worst.max(s.symplectic_residual());
        }
    }
    check(worst <= 1e-12, format!("max residual {worst:.2e} over 100 draws"))
}

/// Largest squeezing-type coefficient anywhere in `h`: pair terms between
/// distinct modes and single-mode `a^2` terms.
fn squeezing_residual(h: &QuadraticHamiltonian) -> f64 {
    let labels = h.registry().labels().to_vec();
    let m = h.matrix();
    let mut worst = 0.0_f64;
    for (i, a) in labels.iter().enumerate() {
        let (d0, d1, off) = (m[(2 * i, 2 * i)], m[(2 * i + 1, 2 * i + 1)], m[(2 * i, 2 * i + 1)]);
        worst = worst.max((0.5 * (d0 - d1)).abs()).max(off.abs());
        for b in &labels[i + 1..] {
            worst = worst.max(h.pair_couplings(*a, *b).unwrap().1.norm());
        }
    }
    worst
}

fn mixer_conjugation() -> Outcome {
    let reg = ModeRegistry::canonical(1);
    let pairs: [(f64, f64); 5] = [(2.0, 1.0), (2.0, 0.5), (1.0, 0.3), (3.0, 2.0), (1.5, 1.2)];
    let (mut sq, mut coef) = (0.0_f64, 0.0_f64);
    for (bu, bs) in pairs {
        let xi = 0.5 * ((bu + bs) / (bu - bs)).ln();
        let frame = one_two_mode_frame(&reg, 1, xi).unwrap();
        let g = f64::sqrt(bu * bu - bs * bs);
        for (dir, links) in [
            (Direction::Clockwise, [(ModeLabel::CavityPlus, c(1, Order::Zero)), (ModeLabel::CavityMinus, c(1, Order::Plus2))]),
            (
                Direction::Anticlockwise,
                [(ModeLabel::CavityMinus, c(1, Order::Zero)), (ModeLabel::CavityPlus, c(1, Order::Minus2))],
            ),
        ] {
            let laser = LaserConfig::new(dir, vec![EnsembleDrive::real(bu, bs)]);
            let h = QuadraticHamiltonian::from_expr(&effective_operator(&laser), &reg).unwrap();
            let ht = conjugate_hamiltonian(&h, &frame).unwrap();
            sq = sq.max(squeezing_residual(&ht));
            for (a, m) in links {
                coef = coef.max((ht.pair_couplings(a, m).unwrap().0.norm() - g).abs());
            }
            // the remaining collective mode is untouched
            let idle = if dir == Direction::Clockwise { c(1, Order::Minus2) } else { c(1, Order::Plus2) };
            for cav in [ModeLabel::CavityPlus, ModeLabel::CavityMinus] {
                coef = coef.max(ht.pair_couplings(cav, idle).unwrap().0.norm());
            }
        }
    }
    check(
        sq <= 1e-10 && coef <= 1e-10,
        format!("squeezing residual {sq:.2e}, coefficient error {coef:.2e}"),
    )
}

fn golden_identity() -> Outcome {
    let reg = ModeRegistry::canonical(2);
    let t = golden_mixer(&reg).unwrap();
    let mut worst = 0.0_f64;
    for xi in [0.1, 0.3, 0.6] {
        let s4 = four_mode_squeezer(&reg, four_mode_labels(), xi).unwrap();
        let lhs = t.compose(&s4).unwrap().compose(&t.inverse()).unwrap();
        let rhs = factorized_four_mode(&reg, xi).unwrap();
        worst = worst.max((lhs.matrix() - rhs.matrix()).abs().max());
    }
    check(worst <= 1e-10, format!("max elementwise difference {worst:.2e}"))
}

fn step_addressing() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for xi in [0.1, 0.3, 0.6] {
        let spec = ProtocolSpec::new(ProtocolKind::FourMode, xi);
        for k in 1..=4 {
            let r = verify_step_decoupling(&spec, k).map_err(|e| e.to_string())?;
            let intended: Vec<String> =
                r.couplings.iter().filter(|c| c.intended).map(|c| format!("{}-{}", c.mode, c.cavity)).collect();
            ok &= r.pass && intended.len() == 1;
            if xi == 0.3 {
                lines.push(format!(
                    "step {k}: {} (spurious {:.1e}, coef err {:.1e})",
                    intended.join(","),
                    r.max_spurious,
                    r.coefficient_error
                ));
            }
        }
    }
    check(ok, lines.join("; "))
}

fn max_cov_diff(a: &GaussianState, b: &GaussianState) -> f64 {
    (a.covariance() - b.covariance()).abs().max()
}

fn oracle_equivalence() -> Outcome {
    let c0 = c(1, Order::Zero);
    let labels = vec![ModeLabel::CavityPlus, c0];
    let reg = ModeRegistry::new(labels.clone()).unwrap();
    let kappa = 1.0;
    let opts = FockOptions::default();
    let mut worst = 0.0_f64;
    let mut top = 0.0_f64;

    // mixer g (a+^dag C0 + h.c.), g = 2 kappa, C0 initially squeezed
    let mixer = OperatorExpr::new().mixer(Complex64::new(2.0, 0.0), ModeLabel::CavityPlus, c0);
    let basis = FockBasis::new(labels.clone(), vec![16, 20]).unwrap();
    let mut ket = vec![Complex64::new(0.0, 0.0); basis.size()];
    let sq = fock::squeezed_vacuum_ket(20, 0.3);
    for (n, a) in sq.iter().enumerate() {
        ket[basis.index_of(&[0, n]).unwrap()] = *a;
    }
    let rho0 = FockDensity::pure(basis, &ket).unwrap();
    let g0 = GaussianState::vacuum(reg.clone()).apply(&single_mode_squeezer(&reg, c0, 0.3).unwrap()).unwrap();
    let h = QuadraticHamiltonian::from_expr(&mixer, &reg).unwrap();
    let dd = LindbladSpec::cavity(h, kappa).unwrap().drift_diffusion();
    for t in [0.5, 1.0, 2.0] {
        let out = fock::evolve_fock(&rho0, &mixer, &[ModeLabel::CavityPlus], kappa, t, &opts)
            .map_err(|e| format!("mixer t={t}: {e}"))?;
        top = top.max(out.max_top_population);
        let cf = fock::covariance_from_density(&out.state).unwrap();
        worst = worst.max(max_cov_diff(&cf, &dd.evolve(&g0, t).unwrap()));
    }

    // squeezer-mixer 2 (a+^dag C0 + h.c.) + 1 (a+^dag C0^dag + h.c.) from vacuum
    let laser = LaserConfig::new(Direction::Clockwise, vec![EnsembleDrive::real(2.0, 1.0)]);
    let full = effective_operator(&laser);
    let sm = OperatorExpr::new()
        .mixer(Complex64::new(2.0, 0.0), ModeLabel::CavityPlus, c0)
        .pair(Complex64::new(1.0, 0.0), ModeLabel::CavityPlus, c0);
    let h = QuadraticHamiltonian::from_expr(&full, &ModeRegistry::canonical(1)).unwrap().restrict(&labels).unwrap();
    let h_direct = QuadraticHamiltonian::from_expr(&sm, &reg).unwrap();
    worst = worst.max((h.matrix() - h_direct.matrix()).abs().max());
    let dd = LindbladSpec::cavity(h, kappa).unwrap().drift_diffusion();
    let basis = FockBasis::new(labels.clone(), vec![24, 30]).unwrap();
    let rho0 = FockDensity::vacuum(basis);
    let g0 = GaussianState::vacuum(reg.clone());
    for t in [0.5, 1.0, 2.0] {
        let out = fock::evolve_fock(&rho0, &sm, &[ModeLabel::CavityPlus], kappa, t, &opts)
            .map_err(|e| format!("squeezer-mixer t={t}: {e}"))?;
        top = top.max(out.max_top_population);
        let cf = fock::covariance_from_density(&out.state).unwrap();
        worst = worst.max(max_cov_diff(&cf, &dd.evolve(&g0, t).unwrap()));
    }
    check(worst <= 1e-3, format!("max covariance difference {worst:.2e}, top-level population {top:.1e}"))
}

fn one_two_mode_protocol() -> Outcome {
    let xi = 0.5 * 3f64.ln();
    let spec = ProtocolSpec::new(ProtocolKind::OneTwoMode, xi).with_duration(12.0);
    let r = run_protocol(&spec).map_err(|e| e.to_string())?;
    let m = &r.metrics;
    let var_err = (m.var_x_c0k - 1.0 / 6.0).abs() / (1.0 / 6.0);
    check(
        m.fidelity >= 0.99 && var_err <= 0.05 && m.frame_vacuum_fidelity >= 0.99,
        format!(
            "fidelity {:.6}, Var(x_C0k) {:.6} ({:.2}% off), frame vacuum fidelity {:.6}",
            m.fidelity,
            m.var_x_c0k,
            100.0 * var_err,
            m.frame_vacuum_fidelity
        ),
    )
}

fn four_mode_protocol() -> Outcome {
    let spec = ProtocolSpec::new(ProtocolKind::FourMode, 0.3).with_duration(10.0);
    let r = run_protocol(&spec).map_err(|e| e.to_string())?;
    let m = &r.metrics;
    let ln_err = (m.log_negativity - m.target_log_negativity).abs() / m.target_log_negativity;
    check(
        m.fidelity >= 0.99 && ln_err <= 0.05 && m.purity >= 0.98,
        format!(
            "fidelity {:.6}, log-negativity {:.5} vs {:.5} ({:.2}% off), purity {:.6}",
            m.fidelity,
            m.log_negativity,
            m.target_log_negativity,
            100.0 * ln_err,
            m.purity
        ),
    )
}

fn stability_boundary() -> Outcome {
    let ratios: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let pts = stability_sweep(2.0, &ratios, 1.0, Execution::Parallel).map_err(|e| e.to_string())?;
    let inside = pts[..9].iter().all(|p| p.spectral_abscissa < 0.0);
    let edge = pts[9].spectral_abscissa;
    check(
        inside && edge >= -1e-6,
        format!(
            "abscissa at 0.9: {:.3e}, at 1.0: {:.3e}",
            pts[8].spectral_abscissa, edge
        ),
    )
}

fn orthogonality_regime() -> Outcome {
    let mut ok = true;
    let mut worst_ratio = 0.0_f64;
    for kl in [2.0 * PI, 20.0 * PI, 200.0 * PI] {
        let v = chain_overlap(Order::Plus2, Order::Zero, kl).norm();
        let bound = 2.0 / (2.0 * kl);
        ok &= v <= bound;
        worst_ratio = worst_ratio.max(v / bound);
        let g = EnsembleGeometry::from_length(20_000, kl).unwrap();
        ok &= orthogonality_deficit(&g) <= 2.0 * bound;
    }
    let mut prev = 0.0;
    let mut deficits = Vec::new();
    for kl in [1.0, 1e-1, 1e-2, 1e-3, 1e-4] {
        let d = orthogonality_deficit(&EnsembleGeometry::from_length(100, kl).unwrap());
        ok &= d >= prev;
        prev = d;
        deficits.push(d);
    }
    ok &= 1.0 - prev < 1e-6;
    check(
        ok,
        format!("max |overlap|/bound {worst_ratio:.3}, deficit at kL=1e-4: {:.9}", deficits[4]),
    )
}

fn decoupled_mode_detection() -> Outcome {
    let xi = 0.5 * 3f64.ln();
    let reg = ModeRegistry::canonical(1);
    let laser = LaserConfig::new(Direction::Clockwise, vec![EnsembleDrive::real(2.0, 1.0)]);
    let h = QuadraticHamiltonian::from_expr(&effective_operator(&laser), &reg).unwrap();
    let ht = conjugate_hamiltonian(&h, &one_two_mode_frame(&reg, 1, xi).unwrap()).unwrap();
    let spec = LindbladSpec::cavity(ht, 1.0).unwrap();
    let named = match spec.drift_diffusion().steady_state() {
        Err(Error::NotHurwitz { modes, re, .. }) => {
            if modes != vec![c(1, Order::Minus2)] {
                return Err(format!("NotHurwitz named {modes:?}"));
            }
            format!("NotHurwitz at re={re:.1e} naming {}", modes[0])
        }
        other => return Err(format!("expected NotHurwitz, got {other:?}")),
    };
    let coupled = spec
        .restrict(&[ModeLabel::CavityPlus, ModeLabel::CavityMinus, c(1, Order::Zero), c(1, Order::Plus2)])
        .unwrap()
        .drift_diffusion();
    let ss = coupled.steady_state().map_err(|e| e.to_string())?;
    let dev = (ss.covariance() - DMatrix::identity(8, 8) * 0.5).abs().max();
    let res = coupled.residual(&ss);
    check(
        dev <= 1e-10 && res <= 1e-10,
        format!("{named}; coupled steady state off vacuum by {dev:.1e}, residual {res:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("symplectic suite", symplectic_suite, Duration::from_secs(1)),
        ("mixer conjugation", mixer_conjugation, Duration::from_secs(1)),
        ("golden-mixer identity", golden_identity, Duration::from_secs(1)),
        ("four-mode step addressing", step_addressing, Duration::from_secs(1)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(120)),
        ("one/two-mode protocol", one_two_mode_protocol, Duration::from_secs(10)),
        ("four-mode protocol", four_mode_protocol, Duration::from_secs(30)),
        ("stability boundary", stability_boundary, Duration::from_secs(1)),
        ("orthogonality regime", orthogonality_regime, Duration::from_secs(1)),
        ("decoupled-mode detection", decoupled_mode_detection, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= *budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.3} s / {} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
