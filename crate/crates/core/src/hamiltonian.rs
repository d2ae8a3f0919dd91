//! Effective cavity/ensemble Hamiltonians and the physical-parameter map
//! that produces their coupling strengths.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{ModeLabel, ModeRegistry, Order};
use crate::linalg;
use crate::operator::{Ladder, OperatorExpr};

/// Real symmetric form `H_q` with `H = r^T H_q r / 2` (constant dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    registry: ModeRegistry,
    matrix: DMatrix<f64>,
}

fn ladder_vector(dim: usize, index: usize, dagger: bool) -> Vec<Complex64> {
    let mut u = vec![Complex64::new(0.0, 0.0); dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    u[2 * index] = Complex64::new(s, 0.0);
    u[2 * index + 1] = Complex64::new(0.0, if dagger { -s } else { s });
    u
}

impl QuadraticHamiltonian {
    pub fn zero(registry: ModeRegistry) -> Self {
        let n = registry.dim();
        QuadraticHamiltonian { registry, matrix: DMatrix::zeros(n, n) }
    }

    pub fn new(registry: ModeRegistry, matrix: DMatrix<f64>) -> Result<Self> {
        let n = registry.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(QuadraticHamiltonian { registry, matrix: linalg::symmetrize(&matrix) })
    }

    /// Converts `sum_t (c_t O_t + h.c.)` with bilinear `O_t` using
    /// `a = (x + i p) / sqrt(2)`. A term `c (u.r)(v.r) + h.c.` contributes
    /// `2 Re(M + M^T)` with `M = c u v^T`.
    pub fn from_expr(expr: &OperatorExpr, registry: &ModeRegistry) -> Result<Self> {
        let n = registry.dim();
        let mut hq = DMatrix::<f64>::zeros(n, n);
        for term in expr.terms() {
            let [l1, l2] = term.ops.as_slice() else {
                return Err(Error::NotQuadratic);
            };
            let u = ladder_vector(n, registry.index(l1.mode)?, l1.dagger);
            let v = ladder_vector(n, registry.index(l2.mode)?, l2.dagger);
            for a in 0..n {
                if u[a].norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..n {
                    if v[b].norm_sqr() == 0.0 {
                        continue;
                    }
                    let m = 2.0 * (term.coeff * u[a] * v[b]).re;
                    hq[(a, b)] += m;
                    hq[(b, a)] += m;
                }
            }
        }
        Ok(QuadraticHamiltonian { registry: registry.clone(), matrix: hq })
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Coefficients `(g, h)` of `g a_i^dag a_j + h a_i^dag a_j^dag + h.c.`
    /// for two distinct modes.
    pub fn pair_couplings(&self, a: ModeLabel, b: ModeLabel) -> Result<(Complex64, Complex64)> {
        let i = self.registry.index(a)?;
        let j = self.registry.index(b)?;
        if i == j {
            return Err(Error::DuplicateMode(a));
        }
        let blk = |r: usize, c: usize| self.matrix[(2 * i + r, 2 * j + c)];
        let g = Complex64::new(0.5 * (blk(0, 0) + blk(1, 1)), 0.5 * (blk(1, 0) - blk(0, 1)));
        let h = Complex64::new(0.5 * (blk(0, 0) - blk(1, 1)), 0.5 * (blk(0, 1) + blk(1, 0)));
        Ok((g, h))
    }

    /// Restriction to a subset of modes; couplings to the dropped modes are
    /// discarded.
    pub fn restrict(&self, modes: &[ModeLabel]) -> Result<QuadraticHamiltonian> {
        let (registry, idx) = self.registry.subset(modes)?;
        let q = crate::gaussian::quadrature_indices(&idx);
        Ok(QuadraticHamiltonian {
            registry,
            matrix: self.matrix.select_rows(&q).select_columns(&q),
        })
    }

    /// Same operator written over a registry listing the same labels in
    /// another order.
    pub fn reorder(&self, registry: &ModeRegistry) -> Result<QuadraticHamiltonian> {
        if registry.len() != self.registry.len() {
            return Err(Error::DimensionMismatch { expected: self.registry.len(), found: registry.len() });
        }
        let idx: Vec<usize> =
            registry.labels().iter().map(|l| self.registry.index(*l)).collect::<Result<_>>()?;
        let q = crate::gaussian::quadrature_indices(&idx);
        Ok(QuadraticHamiltonian {
            registry: registry.clone(),
            matrix: self.matrix.select_rows(&q).select_columns(&q),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Clockwise,
    Anticlockwise,
}

/// Effective drive of one ensemble: coupling strengths (rad/s) and phases.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleDrive {
    pub beta_u: f64,
    pub beta_s: f64,
    pub phi_u: f64,
    pub phi_s: f64,
}

impl EnsembleDrive {
    pub fn real(beta_u: f64, beta_s: f64) -> Self {
        EnsembleDrive { beta_u, beta_s, phi_u: 0.0, phi_s: 0.0 }
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phi_u = phi;
        self.phi_s = phi;
        self
    }

    pub fn is_driven(&self) -> bool {
        self.beta_u != 0.0 || self.beta_s != 0.0
    }

    /// `r = (beta_s / beta_u) e^{-i (phi_s - phi_u)}`.
    pub fn ratio(&self) -> Complex64 {
        Complex64::from_polar(self.beta_s / self.beta_u, -(self.phi_s - self.phi_u))
    }
}

/// Drive direction plus per-ensemble couplings; `ensembles[n - 1]` drives
/// ensemble `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserConfig {
    pub direction: Direction,
    pub ensembles: Vec<EnsembleDrive>,
}

impl LaserConfig {
    pub fn new(direction: Direction, ensembles: Vec<EnsembleDrive>) -> Self {
        LaserConfig { direction, ensembles }
    }

    /// Per-ensemble rule `beta_u >= beta_s >= 0` (with equality only for the
    /// marginal case).
    pub fn validate(&self) -> Result<()> {
        for (n, e) in self.ensembles.iter().enumerate() {
            let vals = [e.beta_u, e.beta_s, e.phi_u, e.phi_s];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("laser configuration"));
            }
            if e.beta_u < 0.0 || e.beta_s < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "ensemble {}: coupling strengths must be non-negative",
                    n + 1
                )));
            }
            if e.beta_s > e.beta_u {
                return Err(Error::Stability(format!(
                    "ensemble {}: beta_s = {} exceeds beta_u = {}",
                    n + 1,
                    e.beta_s,
                    e.beta_u
                )));
            }
        }
        Ok(())
    }

    /// Same drive with the propagation direction reversed.
    pub fn reversed(&self) -> Self {
        let direction = match self.direction {
            Direction::Clockwise => Direction::Anticlockwise,
            Direction::Anticlockwise => Direction::Clockwise,
        };
        LaserConfig { direction, ensembles: self.ensembles.clone() }
    }
}

/// Ladder-operator form of the effective Hamiltonian, without validation.
///
/// Clockwise drive, per ensemble `n`:
/// `b_u e^{-i phi_u} (C0 + r C0^dag) a+^dag + b_u e^{-i phi_u} (C2 + r C-2^dag) a-^dag + h.c.`;
/// the anticlockwise form follows by `a+ <-> a-`, `k -> -k`.
pub fn effective_operator(config: &LaserConfig) -> OperatorExpr {
    let mut expr = OperatorExpr::new();
    for (i, e) in config.ensembles.iter().enumerate() {
        let n = (i + 1) as u8;
        let cu = Complex64::from_polar(e.beta_u, -e.phi_u);
        let cs = Complex64::from_polar(e.beta_s, -e.phi_s);
        let c0 = ModeLabel::collective(n, Order::Zero);
        let c2 = ModeLabel::collective(n, Order::Plus2);
        let cm2 = ModeLabel::collective(n, Order::Minus2);
        let (co, counter, fwd, bwd) = match config.direction {
            Direction::Clockwise => (ModeLabel::CavityPlus, ModeLabel::CavityMinus, c2, cm2),
            Direction::Anticlockwise => (ModeLabel::CavityMinus, ModeLabel::CavityPlus, cm2, c2),
        };
        expr.push(cu, vec![Ladder::create(co), Ladder::annihilate(c0)]);
        expr.push(cs, vec![Ladder::create(co), Ladder::create(c0)]);
        expr.push(cu, vec![Ladder::create(counter), Ladder::annihilate(fwd)]);
        expr.push(cs, vec![Ladder::create(counter), Ladder::create(bwd)]);
    }
    expr
}

/// Quadratic form of the effective Hamiltonian over `registry`.
pub fn effective_hamiltonian(config: &LaserConfig, registry: &ModeRegistry) -> Result<QuadraticHamiltonian> {
    config.validate()?;
    QuadraticHamiltonian::from_expr(&effective_operator(config), registry)
}

/// Atomic and optical parameters of one ensemble (rad/s, rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleCoupling {
    pub rabi_u: f64,
    pub rabi_s: f64,
    pub phi_u: f64,
    pub phi_s: f64,
    pub g_u: f64,
    pub g_s: f64,
    pub delta_u: f64,
    pub delta_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub atoms: u64,
    pub ensembles: Vec<EnsembleCoupling>,
    pub omega_c: f64,
    pub omega_1: f64,
    pub omega_lu: f64,
    pub omega_ls: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl PhysicalParams {
    /// Cavity detuning from the Raman resonance, `omega_c - (omega_Ls - omega_1)`.
    pub fn cavity_detuning(&self) -> f64 {
        self.omega_c - (self.omega_ls - self.omega_1)
    }

    /// Lists every violated precondition; `factor` is the required ratio of
    /// detunings to Rabi frequencies, couplings and linewidth.
    pub fn violations(&self, factor: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.atoms == 0 {
            out.push("atom number must be at least 1".to_string());
        }
        if !(self.kappa > 0.0) {
            out.push("kappa must be positive".to_string());
        }
        for (i, e) in self.ensembles.iter().enumerate() {
            let n = i + 1;
            for (name, delta, rabi, g) in [("u", e.delta_u, e.rabi_u, e.g_u), ("s", e.delta_s, e.rabi_s, e.g_s)] {
                let scale = rabi.abs().max(g.abs()).max(self.gamma.abs());
                if delta.abs() < factor * scale {
                    out.push(format!(
                        "ensemble {n}: |delta_{name}| = {:.3e} is not {factor}x larger than max(rabi, g, gamma) = {scale:.3e}",
                        delta.abs()
                    ));
                }
            }
        }
        out
    }

    pub fn to_laser_config(&self, direction: Direction) -> Result<LaserConfig> {
        let betas = coupling_strengths(self)?;
        let ensembles = betas
            .iter()
            .zip(&self.ensembles)
            .map(|(&(bu, bs), e)| EnsembleDrive { beta_u: bu, beta_s: bs, phi_u: e.phi_u, phi_s: e.phi_s })
            .collect();
        Ok(LaserConfig::new(direction, ensembles))
    }
}

/// `beta_u = sqrt(N) Omega_u g_u / (2 Delta_u)`, likewise for `s`, per ensemble.
pub fn coupling_strengths(params: &PhysicalParams) -> Result<Vec<(f64, f64)>> {
    let root_n = (params.atoms as f64).sqrt();
    params
        .ensembles
        .iter()
        .map(|e| {
            if e.delta_u == 0.0 || e.delta_s == 0.0 {
                return Err(Error::ZeroDetuning);
            }
            Ok((
                root_n * e.rabi_u * e.g_u / (2.0 * e.delta_u),
                root_n * e.rabi_s * e.g_s / (2.0 * e.delta_s),
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    /// `g_u^2 / Delta_u - g_s^2 / Delta_s` per ensemble.
    pub light_shift_balance: Vec<f64>,
    /// `delta_c + N g_u^2 / Delta_u` per ensemble.
    pub cavity_shift: Vec<f64>,
    /// `omega_Ls - omega_Lu - 2 omega_1`.
    pub raman: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residuals of the three frequency conditions that remove the Stark-shift
/// terms. `tolerance` defaults to `1e-6 kappa` when `None`.
pub fn check_resonance_conditions(params: &PhysicalParams, tolerance: Option<f64>) -> ResonanceReport {
    let tol = tolerance.unwrap_or(1e-6 * params.kappa);
    let n = params.atoms as f64;
    let dc = params.cavity_detuning();
    let light_shift_balance: Vec<f64> = params
        .ensembles
        .iter()
        .map(|e| e.g_u * e.g_u / e.delta_u - e.g_s * e.g_s / e.delta_s)
        .collect();
    let cavity_shift: Vec<f64> = params.ensembles.iter().map(|e| dc + n * e.g_u * e.g_u / e.delta_u).collect();
    let raman = params.omega_ls - params.omega_lu - 2.0 * params.omega_1;
    let pass = light_shift_balance
        .iter()
        .chain(&cavity_shift)
        .chain(std::iter::once(&raman))
        .all(|r| r.is_finite() && r.abs() <= tol);
    ResonanceReport { light_shift_balance, cavity_shift, raman, tolerance: tol, pass }
}

/// Off-resonant scattering rate `(1/4) (gamma / 2 pi) (Omega / Delta)^2`, in Hz.
pub fn spontaneous_rate_estimate(gamma: f64, rabi: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let r = rabi / delta;
    Ok(0.25 * (gamma / (2.0 * std::f64::consts::PI)) * r * r)
}
