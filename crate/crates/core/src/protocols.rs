//! Preparation sequences, their target states and the figures of merit used
//! to judge them.
//!
//! Two sequences are provided. The single-ensemble one drives clockwise then
//! anticlockwise with the same couplings and prepares a single-mode squeezed
//! `C0k` together with a two-mode squeezed `(C2k, C-2k)` pair. The
//! two-ensemble one runs four steps, each leaving exactly one mode of the
//! golden-mixer frame coupled to a cavity mode, and prepares the four-mode
//! squeezed state of the `+-2k` modes.
//!
//! Durations are given in units of `1/kappa` and `beta_ref` in units of
//! `kappa`. Dynamics always run in the laboratory frame; the squeezing frames
//! only enter the analysis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gaussian::{GaussianState, ModeLabel, ModeRegistry, Order, SymplecticTransform};
use crate::hamiltonian::{effective_operator, Direction, EnsembleDrive, LaserConfig, QuadraticHamiltonian};
use crate::lindblad::{Eigenvalue, LindbladSpec};
use crate::linalg;
use crate::squeezers::{self, four_mode_labels};
use crate::GOLDEN;

/// Absolute tolerance (in units of `kappa`) for couplings that must vanish.
pub const DECOUPLING_TOL: f64 = 1e-10;
/// Step-end convergence flag threshold on `max |d sigma / dt|`, in units of `kappa`.
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    OneTwoMode,
    FourMode,
}

impl ProtocolKind {
    pub fn steps(self) -> usize {
        match self {
            ProtocolKind::OneTwoMode => 2,
            ProtocolKind::FourMode => 4,
        }
    }

    pub fn ensembles(self) -> u8 {
        match self {
            ProtocolKind::OneTwoMode => 1,
            ProtocolKind::FourMode => 2,
        }
    }

    pub fn registry(self) -> ModeRegistry {
        ModeRegistry::canonical(self.ensembles())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub xi: f64,
    /// Reference coupling in units of `kappa`.
    pub beta_ref: f64,
    /// Per-step durations in units of `1/kappa`; a single entry applies to
    /// every step.
    pub durations: Vec<f64>,
    pub kappa: f64,
    /// Largest accepted collective ratio `beta_s / beta_u` in any step.
    pub max_ratio: f64,
    /// 1-based execution order of the steps.
    pub step_order: Vec<usize>,
    /// Time-series samples recorded per step.
    pub samples_per_step: usize,
}

impl ProtocolSpec {
    pub fn new(kind: ProtocolKind, xi: f64) -> Self {
        ProtocolSpec {
            kind,
            xi,
            beta_ref: 2.0,
            durations: vec![10.0],
            kappa: 1.0,
            max_ratio: 0.95,
            step_order: (1..=kind.steps()).collect(),
            samples_per_step: 20,
        }
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.durations = vec![duration];
        self
    }

    pub fn with_beta_ref(mut self, beta_ref: f64) -> Self {
        self.beta_ref = beta_ref;
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.step_order = order;
        self
    }

    pub fn registry(&self) -> ModeRegistry {
        self.kind.registry()
    }

    /// Duration of step `step` (1-based) in units of `1/kappa`.
    pub fn duration(&self, step: usize) -> f64 {
        if self.durations.len() == 1 {
            self.durations[0]
        } else {
            self.durations[step - 1]
        }
    }

    /// Every violation found, so callers can report them together.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.kind.steps();
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            out.push(format!("xi must be finite and non-negative, got {}", self.xi));
        }
        if !(self.beta_ref > 0.0 && self.beta_ref.is_finite()) {
            out.push(format!("beta_ref must be positive, got {}", self.beta_ref));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            out.push(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.max_ratio > 0.0 && self.max_ratio < 1.0) {
            out.push(format!("max_ratio must lie in (0, 1), got {}", self.max_ratio));
        }
        if self.durations.len() != 1 && self.durations.len() != n {
            out.push(format!("expected 1 or {n} durations, got {}", self.durations.len()));
        }
        if let Some(d) = self.durations.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            out.push(format!("durations must be positive, got {d}"));
        }
        let mut sorted = self.step_order.clone();
        sorted.sort_unstable();
        if sorted != (1..=n).collect::<Vec<_>>() {
            out.push(format!("step_order must be a permutation of 1..={n}, got {:?}", self.step_order));
        }
        if self.samples_per_step == 0 {
            out.push("samples_per_step must be at least 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

/// Couplings of one step together with the relations that fixed them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedStep {
    pub step: usize,
    pub direction: Direction,
    pub laser: LaserConfig,
    /// Collective `beta_s / beta_u` that sets the squeezing in this step.
    pub ratio: f64,
    /// `(beta_u, beta_s)` pair entering the frame coupling coefficient.
    pub pair: (f64, f64),
    /// Identifier of the parameter relation used.
    pub source: &'static str,
}

/// A protocol step ready to run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolStep {
    pub direction: Direction,
    pub laser: LaserConfig,
    /// In units of `1/kappa`.
    pub duration: f64,
}

fn check_step(spec: &ProtocolSpec, step: usize) -> Result<()> {
    spec.validate()?;
    if step == 0 || step > spec.kind.steps() {
        return Err(Error::InvalidParameter(format!(
            "step {step} out of range 1..={}",
            spec.kind.steps()
        )));
    }
    Ok(())
}

/// Couplings for step `step` (1-based), in absolute units.
pub fn resolve_step(spec: &ProtocolSpec, step: usize) -> Result<ResolvedStep> {
    check_step(spec, step)?;
    let b = spec.beta_ref * spec.kappa;
    let l = GOLDEN;
    let pi = std::f64::consts::PI;
    let resolved = match spec.kind {
        ProtocolKind::OneTwoMode => {
            let r = spec.xi.tanh();
            let direction = if step == 1 { Direction::Clockwise } else { Direction::Anticlockwise };
            ResolvedStep {
                step,
                direction,
                laser: LaserConfig::new(direction, vec![EnsembleDrive::real(b, b * r)]),
                ratio: r,
                pair: (b, b * r),
                source: "one-two-mode-ratio",
            }
        }
        ProtocolKind::FourMode => {
            // ensemble 1 drive, ensemble 2 drive, ratio, (beta_u, beta_s)
            let (e1, e2, r, direction, source) = match step {
                1 => {
                    let r = (l * spec.xi).tanh();
                    let (bu1, bs2) = (b, b * r);
                    let e1 = EnsembleDrive::real(bu1, l * bs2);
                    let e2 = EnsembleDrive::real(l * bu1, bs2);
                    (e1, e2, r, Direction::Clockwise, "four-mode-step1")
                }
                2 => {
                    let r = (l * spec.xi).tanh();
                    let (bu2, bs1) = (b, b * r);
                    let e1 = EnsembleDrive::real(l * bu2, bs1);
                    let e2 = EnsembleDrive::real(bu2, l * bs1);
                    (e1, e2, r, Direction::Anticlockwise, "four-mode-step2")
                }
                3 => {
                    let r = (spec.xi / l).tanh();
                    let (bu2, bs1) = (b, b * r);
                    let e1 = EnsembleDrive::real(l * bu2, bs1);
                    let e2 = EnsembleDrive::real(bu2, l * bs1).with_phase(pi);
                    (e1, e2, r, Direction::Clockwise, "four-mode-step3")
                }
                _ => {
                    let r = (spec.xi / l).tanh();
                    let (bu1, bs2) = (b, b * r);
                    let e1 = EnsembleDrive::real(bu1, l * bs2).with_phase(pi);
                    let e2 = EnsembleDrive::real(l * bu1, bs2);
                    (e1, e2, r, Direction::Anticlockwise, "four-mode-step4")
                }
            };
            ResolvedStep {
                step,
                direction,
                laser: LaserConfig::new(direction, vec![e1, e2]),
                ratio: r,
                pair: (b, b * r),
                source,
            }
        }
    };
    if resolved.ratio > spec.max_ratio {
        return Err(Error::Stability(format!(
            "step {step}: beta_s/beta_u = {:.6} exceeds the stability margin {}",
            resolved.ratio, spec.max_ratio
        )));
    }
    Ok(resolved)
}

pub fn resolve_step_parameters(spec: &ProtocolSpec, step: usize) -> Result<LaserConfig> {
    resolve_step(spec, step).map(|r| r.laser)
}

/// Squeezing parameter implied by a resolved laser configuration, computed
/// from the step's own relation.
pub fn xi_from_laser(kind: ProtocolKind, step: usize, laser: &LaserConfig) -> Result<f64> {
    let atanh = |u: f64, s: f64| 0.5 * ((u + s) / (u - s)).ln();
    let e = &laser.ensembles;
    let need = kind.ensembles() as usize;
    if e.len() != need {
        return Err(Error::DimensionMismatch { expected: need, found: e.len() });
    }
    Ok(match (kind, step) {
        (ProtocolKind::OneTwoMode, 1 | 2) => atanh(e[0].beta_u, e[0].beta_s),
        (ProtocolKind::FourMode, 1) => atanh(e[0].beta_u, e[1].beta_s) / GOLDEN,
        (ProtocolKind::FourMode, 2) => atanh(e[1].beta_u, e[0].beta_s) / GOLDEN,
        (ProtocolKind::FourMode, 3) => atanh(e[1].beta_u, e[0].beta_s) * GOLDEN,
        (ProtocolKind::FourMode, 4) => atanh(e[0].beta_u, e[1].beta_s) * GOLDEN,
        _ => return Err(Error::InvalidParameter(format!("step {step} out of range"))),
    })
}

/// Steps in execution order.
pub fn protocol_steps(spec: &ProtocolSpec) -> Result<Vec<ProtocolStep>> {
    spec.validate()?;
    spec.step_order
        .iter()
        .map(|&k| {
            let r = resolve_step(spec, k)?;
            Ok(ProtocolStep { direction: r.direction, laser: r.laser, duration: spec.duration(k) })
        })
        .collect()
}

/// Analysis frame `U`: the target state is `U|0>`, and conjugating a step
/// Hamiltonian by `U` exposes its mixer structure.
pub fn analysis_frame(spec: &ProtocolSpec) -> Result<SymplecticTransform> {
    let reg = spec.registry();
    match spec.kind {
        ProtocolKind::OneTwoMode => squeezers::one_two_mode_frame(&reg, 1, spec.xi),
        ProtocolKind::FourMode => squeezers::four_mode_frame(&reg, spec.xi),
    }
}

pub fn target_state(spec: &ProtocolSpec) -> Result<GaussianState> {
    spec.validate()?;
    let reg = spec.registry();
    let vac = GaussianState::vacuum(reg.clone());
    let s = match spec.kind {
        ProtocolKind::OneTwoMode => squeezers::one_two_mode_frame(&reg, 1, spec.xi)?,
        ProtocolKind::FourMode => squeezers::four_mode_squeezer(&reg, four_mode_labels(), spec.xi)?,
    };
    vac.apply(&s)
}

/// Modes on which preparation is judged. The four-mode sequence leaves the
/// `C0k` sector in a driven stationary state, so only the `+-2k` modes count.
pub fn scored_modes(kind: ProtocolKind) -> Vec<ModeLabel> {
    match kind {
        ProtocolKind::OneTwoMode => kind.registry().labels().to_vec(),
        ProtocolKind::FourMode => {
            let mut m = four_mode_labels().to_vec();
            m.sort();
            m
        }
    }
}

/// Modes the analysis frame should return to vacuum.
pub fn frame_modes(kind: ProtocolKind) -> Vec<ModeLabel> {
    let mut m = scored_modes(kind);
    if kind == ProtocolKind::FourMode {
        m.extend([ModeLabel::CavityPlus, ModeLabel::CavityMinus]);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    pub cavity: ModeLabel,
    pub mode: ModeLabel,
    /// `|g|` of `g a^dag C`.
    pub mixer: f64,
    /// `|h|` of `h a^dag C^dag`.
    pub squeeze: f64,
    pub intended: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingReport {
    pub step: usize,
    pub couplings: Vec<Coupling>,
    pub expected_coefficient: f64,
    pub coefficient_error: f64,
    /// Largest coupling of any non-intended mode to either cavity mode.
    pub max_spurious: f64,
    /// Largest squeezing term left on an intended pair.
    pub max_squeezing: f64,
    pub pass: bool,
}

/// `(mode, cavity)` pairs meant to stay coupled in the frame, and the modes
/// whose cavity couplings are inspected.
fn addressed(kind: ProtocolKind, step: usize) -> (Vec<(ModeLabel, ModeLabel)>, Vec<ModeLabel>) {
    use ModeLabel::{CavityMinus as Am, CavityPlus as Ap};
    let c = |n, o| ModeLabel::collective(n, o);
    match kind {
        ProtocolKind::OneTwoMode => {
            let checked = vec![c(1, Order::Zero), c(1, Order::Plus2), c(1, Order::Minus2)];
            let pairs = if step == 1 {
                vec![(c(1, Order::Zero), Ap), (c(1, Order::Plus2), Am)]
            } else {
                vec![(c(1, Order::Zero), Am), (c(1, Order::Minus2), Ap)]
            };
            (pairs, checked)
        }
        ProtocolKind::FourMode => {
            let [p1, m1, p2, m2] = four_mode_labels();
            let pair = match step {
                1 => (p1, Am),
                2 => (m2, Ap),
                3 => (p2, Am),
                _ => (m1, Ap),
            };
            (vec![pair], vec![p1, m1, p2, m2])
        }
    }
}

/// Conjugates the step Hamiltonian into the analysis frame and checks that
/// only the intended modes couple to the cavity, with the predicted
/// strength.
pub fn verify_step_decoupling(spec: &ProtocolSpec, step: usize) -> Result<DecouplingReport> {
    let r = resolve_step(spec, step)?;
    let reg = spec.registry();
    let h = QuadraticHamiltonian::from_expr(&effective_operator(&r.laser), &reg)?;
    let frame = analysis_frame(spec)?;
    let ht = squeezers::conjugate_hamiltonian(&h, &frame)?;
    let (bu, bs) = r.pair;
    let base = (bu * bu - bs * bs).sqrt();
    let expected = match spec.kind {
        ProtocolKind::OneTwoMode => base,
        ProtocolKind::FourMode => (1.0 + GOLDEN * GOLDEN).sqrt() * base,
    };
    let (pairs, checked) = addressed(spec.kind, step);
    let mut couplings = Vec::new();
    let (mut coef_err, mut spurious, mut squeezing) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &mode in &checked {
        for cavity in [ModeLabel::CavityPlus, ModeLabel::CavityMinus] {
            let (g, hh) = ht.pair_couplings(cavity, mode)?;
            let intended = pairs.contains(&(mode, cavity));
            if intended {
                coef_err = coef_err.max((g.norm() - expected).abs());
                squeezing = squeezing.max(hh.norm());
            } else {
                spurious = spurious.max(g.norm().max(hh.norm()));
            }
            couplings.push(Coupling { cavity, mode, mixer: g.norm(), squeeze: hh.norm(), intended });
        }
    }
    let tol = DECOUPLING_TOL * spec.kappa.max(1.0);
    Ok(DecouplingReport {
        step,
        couplings,
        expected_coefficient: expected,
        coefficient_error: coef_err,
        max_spurious: spurious,
        max_squeezing: squeezing,
        pass: coef_err <= tol && spurious <= tol && squeezing <= tol,
    })
}

/// `Tr(rho_1 rho_2)` for Gaussian states one of which is pure, which is then
/// the squared overlap:
/// `exp(-d^T (s1 + s2)^{-1} d / 2) / sqrt(det(s1 + s2))`.
pub fn fidelity(state: &GaussianState, target: &GaussianState) -> Result<f64> {
    if state.registry() != target.registry() {
        return Err(Error::DimensionMismatch { expected: target.registry().dim(), found: state.registry().dim() });
    }
    let pure = |s: &GaussianState| s.purity().map(|p| (p - 1.0).abs() < 1e-9).unwrap_or(false);
    if !pure(target) && !pure(state) {
        return Err(Error::InvalidParameter("fidelity needs at least one pure state".into()));
    }
    let sum = state.covariance() + target.covariance();
    let ld = linalg::log_det_spd(&sum).ok_or_else(|| Error::NonPhysical("covariance sum not positive".into()))?;
    let d = state.mean() - target.mean();
    let quad = if d.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        let chol = sum.clone().cholesky().ok_or_else(|| Error::NonPhysical("covariance sum not positive".into()))?;
        d.dot(&chol.solve(&d))
    };
    Ok((-0.5 * ld - 0.5 * quad).exp().min(1.0))
}

/// Logarithmic negativity between `part_a` and the remaining modes.
pub fn log_negativity(state: &GaussianState, part_a: &[ModeLabel]) -> Result<f64> {
    if part_a.is_empty() {
        return Err(Error::EmptySelection);
    }
    let reg = state.registry();
    let mut flip = DMatrix::identity(reg.dim(), reg.dim());
    let mut in_a = vec![false; reg.len()];
    for m in part_a {
        in_a[reg.index(*m)?] = true;
    }
    for (i, a) in in_a.iter().enumerate() {
        if !a {
            flip[(2 * i + 1, 2 * i + 1)] = -1.0;
        }
    }
    let pt = &flip * state.covariance() * &flip;
    Ok(linalg::symplectic_eigenvalues(&pt)
        .into_iter()
        .map(|nu| (-(2.0 * nu).log2()).max(0.0))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

/// Linear combination `sum_i w_i q_i` of quadratures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination(pub Vec<(ModeLabel, Quadrature, f64)>);

impl Combination {
    pub fn x(mode: ModeLabel) -> Self {
        Combination(vec![(mode, Quadrature::X, 1.0)])
    }

    pub fn p(mode: ModeLabel) -> Self {
        Combination(vec![(mode, Quadrature::P, 1.0)])
    }

    /// `(q_a + sign q_b) / sqrt 2`.
    pub fn epr(a: ModeLabel, b: ModeLabel, q: Quadrature, sign: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Combination(vec![(a, q, s), (b, q, sign * s)])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, _, w)| w * w).sum::<f64>().sqrt()
    }
}

/// `v^T sigma v` for each combination.
pub fn quadrature_variances(state: &GaussianState, combos: &[Combination]) -> Result<Vec<f64>> {
    let reg = state.registry();
    combos
        .iter()
        .map(|c| {
            if (c.norm() - 1.0).abs() > 1e-9 {
                log::warn!("quadrature combination has norm {}", c.norm());
            }
            let mut v = nalgebra::DVector::zeros(reg.dim());
            for &(mode, q, w) in &c.0 {
                let i = reg.index(mode)?;
                v[2 * i + usize::from(q == Quadrature::P)] += w;
            }
            Ok(v.dot(&(state.covariance() * &v)))
        })
        .collect()
}

/// Variances reported for the first ensemble: `x` and `p` of `C0k(1)` and
/// the squeezed EPR combinations `(p_A - p_B)/sqrt 2`, `(x_A + x_B)/sqrt 2`
/// of `A = C2k(1)`, `B = C-2k(1)`.
pub fn standard_combinations() -> [Combination; 4] {
    let c0 = ModeLabel::collective(1, Order::Zero);
    let a = ModeLabel::collective(1, Order::Plus2);
    let b = ModeLabel::collective(1, Order::Minus2);
    [
        Combination::x(c0),
        Combination::p(c0),
        Combination::epr(a, b, Quadrature::P, -1.0),
        Combination::epr(a, b, Quadrature::X, 1.0),
    ]
}

/// Bipartition used for the entanglement figure: `C2k|C-2k` for one
/// ensemble, ensemble 1 versus ensemble 2 for the four-mode state.
pub fn entanglement_partition(kind: ProtocolKind) -> Vec<ModeLabel> {
    match kind {
        ProtocolKind::OneTwoMode => vec![ModeLabel::collective(1, Order::Plus2)],
        ProtocolKind::FourMode => vec![ModeLabel::collective(1, Order::Plus2), ModeLabel::collective(1, Order::Minus2)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub time: f64,
    pub var_x_c0k: f64,
    pub var_p_c0k: f64,
    pub var_epr_minus: f64,
    pub var_epr_plus: f64,
    pub fidelity: f64,
    pub purity: f64,
    pub photons_plus: f64,
    pub photons_minus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub resolved: ResolvedStep,
    pub duration: f64,
    pub spectrum: Vec<Eigenvalue>,
    pub spectral_abscissa: f64,
    pub decoupling: DecouplingReport,
    /// `max |d sigma / dt|` at the end of the step.
    pub residual: f64,
    pub converged: bool,
    pub fidelity: f64,
    #[serde(skip)]
    pub state: GaussianState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Fidelity of the scored modes to the target (probability convention).
    pub fidelity: f64,
    /// Purity of the scored modes.
    pub purity: f64,
    /// Fidelity of the frame modes to vacuum after undoing the analysis frame.
    pub frame_vacuum_fidelity: f64,
    pub log_negativity: f64,
    pub target_log_negativity: f64,
    pub var_x_c0k: f64,
    pub var_p_c0k: f64,
    pub var_epr_minus: f64,
    pub var_epr_plus: f64,
    pub photons_plus: f64,
    pub photons_minus: f64,
    /// Largest deviation of the cavity covariance block from vacuum.
    pub cavity_deviation: f64,
    pub all_converged: bool,
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub spec: ProtocolSpec,
    pub steps: Vec<StepRecord>,
    pub final_state: GaussianState,
    pub target: GaussianState,
    pub metrics: Metrics,
    pub series: Vec<Sample>,
}

fn scored_fidelity(state: &GaussianState, target: &GaussianState, modes: &[ModeLabel]) -> Result<f64> {
    fidelity(&state.partial(modes)?, &target.partial(modes)?)
}

fn sample(time: f64, state: &GaussianState, target: &GaussianState, kind: ProtocolKind) -> Result<Sample> {
    let v = quadrature_variances(state, &standard_combinations())?;
    let modes = scored_modes(kind);
    Ok(Sample {
        time,
        var_x_c0k: v[0],
        var_p_c0k: v[1],
        var_epr_minus: v[2],
        var_epr_plus: v[3],
        fidelity: scored_fidelity(state, target, &modes)?,
        purity: state.partial(&modes)?.purity()?,
        photons_plus: state.photon_number(ModeLabel::CavityPlus)?,
        photons_minus: state.photon_number(ModeLabel::CavityMinus)?,
    })
}

/// Runs the sequence from global vacuum in the laboratory frame.
pub fn run_protocol(spec: &ProtocolSpec) -> Result<ProtocolResult> {
    spec.validate()?;
    let reg = spec.registry();
    let kappa = spec.kappa;
    let target = target_state(spec)?;
    let mut state = GaussianState::vacuum(reg.clone());
    let mut time = 0.0;
    let mut series = vec![sample(0.0, &state, &target, spec.kind)?];
    let mut steps = Vec::with_capacity(spec.step_order.len());
    let scored = scored_modes(spec.kind);

    for &k in &spec.step_order {
        let resolved = resolve_step(spec, k)?;
        let h = QuadraticHamiltonian::from_expr(&effective_operator(&resolved.laser), &reg)?;
        let dd = LindbladSpec::cavity(h, kappa)?.drift_diffusion();
        let duration = spec.duration(k);
        let n = spec.samples_per_step;
        let dt = duration / kappa / n as f64;
        for _ in 0..n {
            state = dd.evolve_unchecked(&state, dt)?;
            state.validate()?;
            time += dt;
            series.push(sample(time * kappa, &state, &target, spec.kind)?);
        }
        let residual = dd.residual(&state);
        let spectrum = dd.spectrum();
        steps.push(StepRecord {
            spectral_abscissa: spectrum[0].re,
            spectrum,
            decoupling: verify_step_decoupling(spec, k)?,
            converged: residual <= CONVERGENCE_TOL * kappa,
            residual,
            fidelity: scored_fidelity(&state, &target, &scored)?,
            duration,
            resolved,
            state: state.clone(),
        });
    }

    let metrics = metrics(spec, &state, &target, &steps)?;
    Ok(ProtocolResult { spec: spec.clone(), steps, final_state: state, target, metrics, series })
}

fn metrics(spec: &ProtocolSpec, state: &GaussianState, target: &GaussianState, steps: &[StepRecord]) -> Result<Metrics> {
    let scored = scored_modes(spec.kind);
    let reduced = state.partial(&scored)?;
    let reduced_target = target.partial(&scored)?;
    let frame = analysis_frame(spec)?;
    let back = state.apply(&frame.inverse())?;
    let fm = frame_modes(spec.kind);
    let back = back.partial(&fm)?;
    let vac = GaussianState::vacuum(back.registry().clone());
    let part = entanglement_partition(spec.kind);
    let v = quadrature_variances(state, &standard_combinations())?;
    let cav = state.partial(&[ModeLabel::CavityPlus, ModeLabel::CavityMinus])?;
    let cavity_deviation = linalg::max_abs(&(cav.covariance() - DMatrix::identity(4, 4) * 0.5));
    Ok(Metrics {
        fidelity: fidelity(&reduced, &reduced_target)?,
        purity: reduced.purity()?,
        frame_vacuum_fidelity: fidelity(&back, &vac)?,
        log_negativity: log_negativity(&reduced, &part)?,
        target_log_negativity: log_negativity(&reduced_target, &part)?,
        var_x_c0k: v[0],
        var_p_c0k: v[1],
        var_epr_minus: v[2],
        var_epr_plus: v[3],
        photons_plus: state.photon_number(ModeLabel::CavityPlus)?,
        photons_minus: state.photon_number(ModeLabel::CavityMinus)?,
        cavity_deviation,
        all_converged: steps.iter().all(|s| s.converged),
    })
}

/// Runs independent specs, keeping input order.
pub fn sweep_protocols(specs: &[ProtocolSpec], exec: Execution) -> Vec<Result<ProtocolResult>> {
    exec::map(specs, exec, run_protocol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub ratio: f64,
    pub spectral_abscissa: f64,
    pub hurwitz: bool,
}

/// Spectral abscissa of the clockwise `(a+, C0k)` subsystem for
/// `beta_s = ratio * beta_u`.
pub fn stability_point(beta_u: f64, ratio: f64, kappa: f64) -> Result<StabilityPoint> {
    let laser = LaserConfig::new(Direction::Clockwise, vec![EnsembleDrive::real(beta_u, ratio * beta_u)]);
    let c0 = ModeLabel::collective(1, Order::Zero);
    let reg = ModeRegistry::new(vec![ModeLabel::CavityPlus, c0])?;
    let full = QuadraticHamiltonian::from_expr(&effective_operator(&laser), &ModeRegistry::canonical(1))?;
    let h = full.restrict(reg.labels())?;
    let dd = LindbladSpec::cavity(h, kappa)?.drift_diffusion();
    let a = dd.spectral_abscissa();
    Ok(StabilityPoint { ratio, spectral_abscissa: a, hurwitz: a < -crate::lindblad::HURWITZ_TOL * kappa })
}

pub fn stability_sweep(beta_u: f64, ratios: &[f64], kappa: f64, exec: Execution) -> Result<Vec<StabilityPoint>> {
    exec::map(ratios, exec, |r| stability_point(beta_u, *r, kappa)).into_iter().collect()
}
