//! Covariance dynamics of the cavity-damped master equation.
//!
//! With `H = r^T H_q r / 2` and energy decay `kappa` on every damped mode,
//! second moments obey `sigma' = A sigma + sigma A^T + D` where
//! `A = Omega H_q - (kappa/2) P` and `D = (kappa/2) P`, `P` projecting onto
//! the damped quadratures.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeLabel, ModeRegistry};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg;

/// Relative width (in units of kappa) of the marginal band around zero real part.
pub const HURWITZ_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub hamiltonian: QuadraticHamiltonian,
    pub damped: Vec<ModeLabel>,
    pub kappa: f64,
}

impl LindbladSpec {
    pub fn new(hamiltonian: QuadraticHamiltonian, damped: Vec<ModeLabel>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        for m in &damped {
            hamiltonian.registry().index(*m)?;
        }
        Ok(LindbladSpec { hamiltonian, damped, kappa })
    }

    /// Both cavity modes damped at `kappa`.
    pub fn cavity(hamiltonian: QuadraticHamiltonian, kappa: f64) -> Result<Self> {
        let damped = [ModeLabel::CavityPlus, ModeLabel::CavityMinus]
            .into_iter()
            .filter(|m| hamiltonian.registry().contains(*m))
            .collect();
        Self::new(hamiltonian, damped, kappa)
    }

    pub fn registry(&self) -> &ModeRegistry {
        self.hamiltonian.registry()
    }

    /// Sub-system on `modes`; damping on dropped modes disappears with them.
    pub fn restrict(&self, modes: &[ModeLabel]) -> Result<LindbladSpec> {
        let hamiltonian = self.hamiltonian.restrict(modes)?;
        let damped = self.damped.iter().copied().filter(|m| hamiltonian.registry().contains(*m)).collect();
        Ok(LindbladSpec { hamiltonian, damped, kappa: self.kappa })
    }

    pub fn drift_diffusion(&self) -> DriftDiffusion {
        let reg = self.registry().clone();
        let n = reg.dim();
        let omega = linalg::symplectic_form(reg.len());
        let mut a = &omega * self.hamiltonian.matrix();
        let mut d = DMatrix::zeros(n, n);
        for m in &self.damped {
            let i = reg.index(*m).expect("damped modes validated on construction");
            for q in [2 * i, 2 * i + 1] {
                a[(q, q)] -= 0.5 * self.kappa;
                d[(q, q)] = 0.5 * self.kappa;
            }
        }
        DriftDiffusion { registry: reg, kappa: self.kappa, drift: a, diffusion: d }
    }
}

#[derive(Debug, Clone)]
pub struct DriftDiffusion {
    pub registry: ModeRegistry,
    pub kappa: f64,
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex<f64>> for Eigenvalue {
    fn from(c: Complex<f64>) -> Self {
        Eigenvalue { re: c.re, im: c.im }
    }
}

impl DriftDiffusion {
    /// Eigenvalues of the drift, real part descending.
    pub fn spectrum(&self) -> Vec<Eigenvalue> {
        let mut ev: Vec<Eigenvalue> = linalg::eigenvalues(&self.drift).into_iter().map(Eigenvalue::from).collect();
        ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        ev
    }

    /// Largest real part of the drift spectrum.
    pub fn spectral_abscissa(&self) -> f64 {
        self.spectrum().first().map(|e| e.re).unwrap_or(f64::NEG_INFINITY)
    }

    /// `Ok(())` when every eigenvalue has real part below `-1e-12 kappa`;
    /// otherwise the marginal eigenvalue and the modes carrying it.
    pub fn check_hurwitz(&self) -> Result<()> {
        let top = self.spectrum()[0];
        if top.re < -HURWITZ_TOL * self.kappa {
            return Ok(());
        }
        let v = linalg::near_null_vector(&self.drift, Complex::new(top.re, top.im));
        let mut weights: Vec<(f64, ModeLabel)> = self
            .registry
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (v[2 * i].norm_sqr() + v[2 * i + 1].norm_sqr(), *l))
            .collect();
        weights.sort_by(|a, b| b.0.total_cmp(&a.0));
        let modes = weights.into_iter().filter(|(w, _)| *w > 0.05).map(|(_, l)| l).collect();
        Err(Error::NotHurwitz { re: top.re, im: top.im, modes })
    }

    /// Exact propagation over `t >= 0`.
    pub fn evolve(&self, state: &GaussianState, t: f64) -> Result<GaussianState> {
        self.evolve_unchecked(state, t).and_then(|s| {
            s.validate()?;
            Ok(s)
        })
    }

    pub(crate) fn evolve_unchecked(&self, state: &GaussianState, t: f64) -> Result<GaussianState> {
        if !t.is_finite() {
            return Err(Error::NonFinite("duration"));
        }
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative duration {t}")));
        }
        if state.registry() != &self.registry {
            return Err(Error::DimensionMismatch { expected: self.registry.dim(), found: state.registry().dim() });
        }
        if state.covariance().iter().any(|v| !v.is_finite())
            || self.drift.iter().chain(self.diffusion.iter()).any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("state or generator"));
        }
        let (f, q) = linalg::lti_propagator(&self.drift, &self.diffusion, t);
        let cov = linalg::symmetrize(&(&f * state.covariance() * f.transpose() + q));
        Ok(GaussianState::from_parts_unchecked(self.registry.clone(), cov))
    }

    /// Unique solution of `A sigma + sigma A^T + D = 0`.
    pub fn steady_state(&self) -> Result<GaussianState> {
        self.check_hurwitz()?;
        let cov = linalg::lyapunov(&self.drift, &self.diffusion)
            .ok_or_else(|| Error::NonPhysical("singular Lyapunov system".into()))?;
        let state = GaussianState::from_parts_unchecked(self.registry.clone(), cov);
        state.validate()?;
        Ok(state)
    }

    /// `A sigma + sigma A^T + D`.
    pub fn time_derivative(&self, state: &GaussianState) -> DMatrix<f64> {
        let c = state.covariance();
        &self.drift * c + c * self.drift.transpose() + &self.diffusion
    }

    /// `max |A sigma + sigma A^T + D|`.
    pub fn residual(&self, state: &GaussianState) -> f64 {
        linalg::max_abs(&self.time_derivative(state))
    }

    /// `ln(1/tol) / |spectral abscissa|`.
    pub fn convergence_time(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        self.check_hurwitz()?;
        Ok((1.0 / tol).ln() / self.spectral_abscissa().abs())
    }

    /// Fixed-step RK4 integration of the covariance equation, kept only to
    /// cross-check [`evolve`](Self::evolve).
    pub fn evolve_rk4(&self, state: &GaussianState, t: f64, steps: usize) -> GaussianState {
        let f = |c: &DMatrix<f64>| &self.drift * c + c * self.drift.transpose() + &self.diffusion;
        let h = t / steps as f64;
        let mut c = state.covariance().clone();
        for _ in 0..steps {
            let k1 = f(&c);
            let k2 = f(&(&c + &k1 * (0.5 * h)));
            let k3 = f(&(&c + &k2 * (0.5 * h)));
            let k4 = f(&(&c + &k3 * h));
            c += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        GaussianState::from_parts_unchecked(self.registry.clone(), linalg::symmetrize(&c))
    }
}
