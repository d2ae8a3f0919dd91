//! Gaussian machinery against the truncated-Fock integrator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use ringsqueeze::fock::{self, FockBasis, FockDensity, FockOperator, FockOptions};
use ringsqueeze::hamiltonian::effective_operator;
use ringsqueeze::protocols::fidelity;
use ringsqueeze::squeezers::{from_generator, pair_squeezing_generator, single_mode_squeezer, two_mode_squeezer};
use ringsqueeze::{
    Direction, EnsembleDrive, Execution, GaussianState, LaserConfig, LindbladSpec, ModeLabel, ModeRegistry, Order,
    QuadraticHamiltonian,
};

const AP: ModeLabel = ModeLabel::CavityPlus;
const AM: ModeLabel = ModeLabel::CavityMinus;
const C0: ModeLabel = ModeLabel::collective(1, Order::Zero);
const C2: ModeLabel = ModeLabel::collective(1, Order::Plus2);
const CM2: ModeLabel = ModeLabel::collective(1, Order::Minus2);

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn squeezed_vacuum_matches_phase_space() {
    let reg = ModeRegistry::new(vec![C0]).unwrap();
    let basis = FockBasis::uniform(vec![C0], 30).unwrap();
    for xi in [0.1, 0.5, -0.4] {
        let rho = FockDensity::pure(basis.clone(), &fock::squeezed_vacuum_ket(30, xi)).unwrap();
        let g = GaussianState::vacuum(reg.clone()).apply(&single_mode_squeezer(&reg, C0, xi).unwrap()).unwrap();
        let f = fock::covariance_from_density(&rho).unwrap();
        assert!(max_diff(f.covariance(), g.covariance()) < 1e-6, "xi={xi}");
    }
}

#[test]
fn two_mode_squeezed_sign_convention() {
    let reg = ModeRegistry::new(vec![C2, CM2]).unwrap();
    let basis = FockBasis::uniform(vec![C2, CM2], 24).unwrap();
    let xi = 0.5;
    let ket = fock::two_mode_squeezed_ket(&basis, xi).unwrap();
    let rho = FockDensity::pure(basis, &ket).unwrap();
    let f = fock::covariance_from_density(&rho).unwrap();
    let g = GaussianState::vacuum(reg.clone()).apply(&two_mode_squeezer(&reg, C2, CM2, xi).unwrap()).unwrap();
    assert!(max_diff(f.covariance(), g.covariance()) < 1e-6);
    // x_A + x_B is the squeezed combination
    let c = f.covariance();
    let v = 0.5 * (c[(0, 0)] + c[(2, 2)] + 2.0 * c[(0, 2)]);
    assert!((v - (-2.0 * xi).exp() / 2.0).abs() < 1e-6);
}

#[test]
fn unitary_pair_generator_matches_closed_form() {
    let labels = vec![C2, CM2];
    let reg = ModeRegistry::new(labels.clone()).unwrap();
    let gen = pair_squeezing_generator(&[(C2, CM2)]);
    let xi = 0.3;
    let basis = FockBasis::uniform(labels, 18).unwrap();
    let opts = FockOptions { exec: Execution::Sequential, ..FockOptions::default() };
    let out = fock::evolve_fock(&FockDensity::vacuum(basis.clone()), &gen, &[], 0.0, xi, &opts).unwrap();
    let direct = FockDensity::pure(basis, &fock::two_mode_squeezed_ket(out.state.basis(), xi).unwrap()).unwrap();
    assert!((fock::fock_overlap(&out.state, &direct).unwrap() - 1.0).abs() < 1e-8);
    let h = QuadraticHamiltonian::from_expr(&gen, &reg).unwrap();
    let via_generator = GaussianState::vacuum(reg.clone()).apply(&from_generator(&h, xi)).unwrap();
    let closed = GaussianState::vacuum(reg.clone()).apply(&two_mode_squeezer(&reg, C2, CM2, xi).unwrap()).unwrap();
    let f = fock::covariance_from_density(&out.state).unwrap();
    assert!(max_diff(f.covariance(), via_generator.covariance()) < 1e-7);
    assert!(max_diff(closed.covariance(), via_generator.covariance()) < 1e-13);
    assert!((out.state.purity() - 1.0).abs() < 1e-9);
}

#[test]
fn fidelity_matches_fock_overlap() {
    let basis = FockBasis::uniform(vec![C0], 30).unwrap();
    let reg = ModeRegistry::new(vec![C0]).unwrap();
    let vac = FockDensity::vacuum(basis.clone());
    let sq = FockDensity::pure(basis, &fock::squeezed_vacuum_ket(30, 0.5)).unwrap();
    let oracle = fock::fock_overlap(&sq, &vac).unwrap();
    let gv = GaussianState::vacuum(reg.clone());
    let gs = gv.apply(&single_mode_squeezer(&reg, C0, 0.5).unwrap()).unwrap();
    assert!((fidelity(&gs, &gv).unwrap() - oracle).abs() < 1e-10);
    assert!((oracle - 0.886_818_883_970_074).abs() < 1e-9);

    let reg2 = ModeRegistry::new(vec![C2, CM2]).unwrap();
    let basis2 = FockBasis::uniform(vec![C2, CM2], 24).unwrap();
    let tm = FockDensity::pure(basis2.clone(), &fock::two_mode_squeezed_ket(&basis2, 0.5).unwrap()).unwrap();
    let oracle = fock::fock_overlap(&tm, &FockDensity::vacuum(basis2)).unwrap();
    let gv = GaussianState::vacuum(reg2.clone());
    let gt = gv.apply(&two_mode_squeezer(&reg2, C2, CM2, 0.5).unwrap()).unwrap();
    assert!((fidelity(&gt, &gv).unwrap() - oracle).abs() < 1e-10);
    assert!((oracle - 0.786_447_732_965_927).abs() < 1e-9);
}

/// `H = r^T H_q r / 2` rebuilt from truncated quadrature matrices.
fn quadrature_form(h: &QuadraticHamiltonian, basis: &FockBasis) -> DMatrix<Complex64> {
    let n = basis.size();
    let mut r = Vec::new();
    for label in h.registry().labels() {
        let ann = FockOperator::from_expr(basis, &ladder_only(*label)).unwrap().to_dense();
        // ann holds a + a^dag; recover a from the strictly upper triangle
        let a = DMatrix::from_fn(n, n, |i, j| if j > i { ann[(i, j)] } else { Complex64::new(0.0, 0.0) });
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let x = (&a + a.adjoint()) * s;
        let p = (&a - a.adjoint()) * (Complex64::new(0.0, -1.0) * s);
        r.push(x);
        r.push(p);
    }
    let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..r.len() {
        for l in 0..r.len() {
            let c = h.matrix()[(k, l)];
            if c != 0.0 {
                out += &r[k] * &r[l] * Complex64::new(0.5 * c, 0.0);
            }
        }
    }
    out
}

/// Operator expression whose Fock matrix is `a + a^dag` of one mode.
fn ladder_only(mode: ModeLabel) -> ringsqueeze::OperatorExpr {
    let mut e = ringsqueeze::OperatorExpr::new();
    e.push(Complex64::new(1.0, 0.0), vec![ringsqueeze::Ladder::annihilate(mode)]);
    e
}

#[test]
fn effective_hamiltonian_matrix_elements() {
    let laser = LaserConfig::new(
        Direction::Clockwise,
        vec![EnsembleDrive { beta_u: 1.3, beta_s: 0.4, phi_u: 0.7, phi_s: -0.2 }],
    );
    let expr = effective_operator(&laser);
    let full = QuadraticHamiltonian::from_expr(&expr, &ModeRegistry::canonical(1)).unwrap();
    for modes in [vec![AP, C0], vec![AM, C2, CM2]] {
        let basis = FockBasis::uniform(modes.clone(), 6).unwrap();
        let sub: Vec<ModeLabel> = modes.clone();
        let h = full.restrict(&sub).unwrap();
        // drop terms touching modes outside the basis
        let local = ringsqueeze::OperatorExpr::new();
        let local = expr.terms().iter().fold(local, |mut e, t| {
            if t.ops.iter().all(|l| modes.contains(&l.mode)) {
                e.push(t.coeff, t.ops.clone());
            }
            e
        });
        let direct = FockOperator::from_expr(&basis, &local).unwrap().to_dense();
        let via_q = quadrature_form(&h, &basis);
        let diff = (&direct - &via_q).map(|z| z.norm()).max();
        assert!(diff < 1e-12, "{modes:?}: {diff}");
        assert!(direct.nrows() == basis.size());
    }
}

#[test]
fn thermal_decay_matches_closed_form() {
    let reg = ModeRegistry::new(vec![AP]).unwrap();
    let basis = FockBasis::uniform(vec![AP], 30).unwrap();
    let rho = FockDensity::thermal(basis, &[0.5]).unwrap();
    let spec = LindbladSpec::new(QuadraticHamiltonian::zero(reg.clone()), vec![AP], 1.0).unwrap();
    let dd = spec.drift_diffusion();
    let g0 = GaussianState::from_covariance(reg, DMatrix::identity(2, 2)).unwrap();
    let opts = FockOptions { truncation_threshold: 1e-6, ..FockOptions::default() };
    for t in [0.5, 1.0, 2.0] {
        let out = fock::evolve_fock(&rho, &ringsqueeze::OperatorExpr::new(), &[AP], 1.0, t, &opts).unwrap();
        let f = fock::covariance_from_density(&out.state).unwrap();
        let g = dd.evolve(&g0, t).unwrap();
        assert!(max_diff(f.covariance(), g.covariance()) < 1e-6);
        assert!((g.covariance()[(0, 0)] - (0.5 + 0.5 * (-t as f64).exp())).abs() < 1e-12);
        assert!((out.state.trace() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn three_mode_step_subsystem() {
    // clockwise single-ensemble drive seen by a-: a-^dag (bu C2 + bs C-2^dag) + h.c.
    let laser = LaserConfig::new(Direction::Clockwise, vec![EnsembleDrive::real(1.0, 0.5)]);
    let expr = effective_operator(&laser);
    let modes = vec![AM, C2, CM2];
    let local = expr.terms().iter().fold(ringsqueeze::OperatorExpr::new(), |mut e, t| {
        if t.ops.iter().all(|l| modes.contains(&l.mode)) {
            e.push(t.coeff, t.ops.clone());
        }
        e
    });
    let reg = ModeRegistry::new(modes.clone()).unwrap();
    let h = QuadraticHamiltonian::from_expr(&local, &reg).unwrap();
    let dd = LindbladSpec::cavity(h, 1.0).unwrap().drift_diffusion();
    let basis = FockBasis::new(modes, vec![10, 10, 10]).unwrap();
    let t = 0.5;
    let out = fock::evolve_fock(&FockDensity::vacuum(basis), &local, &[AM], 1.0, t, &FockOptions::default()).unwrap();
    let f = fock::covariance_from_density(&out.state).unwrap();
    let g = dd.evolve(&GaussianState::vacuum(reg), t).unwrap();
    assert!(max_diff(f.covariance(), g.covariance()) < 1e-3);
    assert!(out.state.is_positive_within(1e-9));
    assert!(out.state.hermiticity_error() < 1e-12);
}

#[test]
fn sequential_and_parallel_rhs_agree() {
    let basis = FockBasis::uniform(vec![AP, C0], 8).unwrap();
    let expr = ringsqueeze::OperatorExpr::new()
        .mixer(Complex64::new(1.0, 0.2), AP, C0)
        .pair(Complex64::new(0.3, 0.0), AP, C0);
    let rho = FockDensity::vacuum(basis);
    let run = |exec| {
        let o = FockOptions { exec, truncation_threshold: 1.0, ..FockOptions::default() };
        fock::evolve_fock(&rho, &expr, &[AP], 1.0, 0.7, &o).unwrap().state
    };
    let a = run(Execution::Sequential);
    let b = run(Execution::Parallel);
    assert!((fock::fock_overlap(&a, &a).unwrap() - fock::fock_overlap(&a, &b).unwrap()).abs() < 1e-15);
}
