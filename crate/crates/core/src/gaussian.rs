//! Phase-space representation of multi-mode bosonic states.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Spatial order `m` of a collective mode `C_{mk}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Zero,
    Plus2,
    Minus2,
}

impl Order {
    pub const ALL: [Order; 3] = [Order::Zero, Order::Plus2, Order::Minus2];

    pub fn value(self) -> i32 {
        match self {
            Order::Zero => 0,
            Order::Plus2 => 2,
            Order::Minus2 => -2,
        }
    }

    /// `k -> -k`.
    pub fn reversed(self) -> Order {
        match self {
            Order::Zero => Order::Zero,
            Order::Plus2 => Order::Minus2,
            Order::Minus2 => Order::Plus2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModeLabel {
    /// Clockwise cavity mode `a_+`.
    CavityPlus,
    /// Anticlockwise cavity mode `a_-`.
    CavityMinus,
    /// Collective mode `C_{mk}^{(n)}` of ensemble `n` (1-based).
    Collective { ensemble: u8, order: Order },
}

impl ModeLabel {
    pub const fn collective(ensemble: u8, order: Order) -> Self {
        ModeLabel::Collective { ensemble, order }
    }

    pub fn is_cavity(&self) -> bool {
        matches!(self, ModeLabel::CavityPlus | ModeLabel::CavityMinus)
    }

    /// Image under reversing the drive direction: `a_+ <-> a_-`, `k -> -k`.
    pub fn mirrored(self) -> Self {
        match self {
            ModeLabel::CavityPlus => ModeLabel::CavityMinus,
            ModeLabel::CavityMinus => ModeLabel::CavityPlus,
            ModeLabel::Collective { ensemble, order } => ModeLabel::Collective {
                ensemble,
                order: order.reversed(),
            },
        }
    }

    fn canonical_rank(&self) -> (u8, u8) {
        match self {
            ModeLabel::CavityPlus => (0, 0),
            ModeLabel::CavityMinus => (0, 1),
            ModeLabel::Collective { ensemble, order } => {
                let o = match order {
                    Order::Zero => 0,
                    Order::Plus2 => 1,
                    Order::Minus2 => 2,
                };
                (*ensemble, o)
            }
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::CavityPlus => write!(f, "a+"),
            ModeLabel::CavityMinus => write!(f, "a-"),
            ModeLabel::Collective { ensemble, order } => {
                write!(f, "C{}k({})", order.value(), ensemble)
            }
        }
    }
}

impl std::str::FromStr for ModeLabel {
    type Err = Error;

    /// Parses the `Display` form, e.g. `a+`, `C0k(1)`, `C-2k(2)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised mode label `{s}`"));
        match s.trim() {
            "a+" => return Ok(ModeLabel::CavityPlus),
            "a-" => return Ok(ModeLabel::CavityMinus),
            _ => {}
        }
        let rest = s.trim().strip_prefix('C').ok_or_else(bad)?;
        let (order, rest) = rest.split_once("k(").ok_or_else(bad)?;
        let ensemble: u8 = rest.strip_suffix(')').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let order = match order {
            "0" => Order::Zero,
            "2" | "+2" => Order::Plus2,
            "-2" => Order::Minus2,
            _ => return Err(bad()),
        };
        if ensemble == 0 {
            return Err(bad());
        }
        Ok(ModeLabel::Collective { ensemble, order })
    }
}

impl From<ModeLabel> for String {
    fn from(l: ModeLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for ModeLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Ordered set of modes; mode `i` owns quadratures `(2i, 2i + 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRegistry {
    labels: Vec<ModeLabel>,
}

impl ModeRegistry {
    pub fn new(labels: Vec<ModeLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySelection);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateMode(*l));
            }
        }
        Ok(ModeRegistry { labels })
    }

    /// `[a+, a-, C0k(1), C2k(1), C-2k(1), C0k(2), ...]` for the given number
    /// of ensembles.
    pub fn canonical(ensembles: u8) -> Self {
        let mut labels = vec![ModeLabel::CavityPlus, ModeLabel::CavityMinus];
        for n in 1..=ensembles {
            for order in Order::ALL {
                labels.push(ModeLabel::collective(n, order));
            }
        }
        ModeRegistry { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        2 * self.labels.len()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn index(&self, label: ModeLabel) -> Result<usize> {
        self.labels.iter().position(|l| *l == label).ok_or(Error::UnknownMode(label))
    }

    pub fn contains(&self, label: ModeLabel) -> bool {
        self.labels.contains(&label)
    }

    /// Sub-registry keeping the registry's own ordering.
    pub fn subset(&self, modes: &[ModeLabel]) -> Result<(ModeRegistry, Vec<usize>)> {
        if modes.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut idx = Vec::with_capacity(modes.len());
        for m in modes {
            let i = self.index(*m)?;
            if idx.contains(&i) {
                return Err(Error::DuplicateMode(*m));
            }
            idx.push(i);
        }
        idx.sort_unstable();
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        Ok((ModeRegistry { labels }, idx))
    }

    /// Whether labels follow the canonical ordering.
    pub fn is_canonical_order(&self) -> bool {
        self.labels.windows(2).all(|w| w[0].canonical_rank() < w[1].canonical_rank())
    }
}

/// Quadrature row/column indices of the given modes.
pub(crate) fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect()
}

pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    linalg::symplectic_form(m)
}

/// Gaussian state; `covariance` uses the symmetrised convention
/// with vacuum `I / 2`.
#[derive(Debug, Clone)]
pub struct GaussianState {
    registry: ModeRegistry,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

pub const PHYSICALITY_TOL: f64 = 1e-9;

impl GaussianState {
    pub fn vacuum(registry: ModeRegistry) -> Self {
        let n = registry.dim();
        GaussianState {
            registry,
            mean: DVector::zeros(n),
            covariance: DMatrix::identity(n, n) * 0.5,
        }
    }

    /// Builds a state from an explicit covariance, checking symmetry and
    /// physicality.
    pub fn from_covariance(registry: ModeRegistry, covariance: DMatrix<f64>) -> Result<Self> {
        let n = registry.dim();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: covariance.nrows() });
        }
        let state = GaussianState { registry, mean: DVector::zeros(n), covariance };
        state.validate()?;
        Ok(state)
    }

    /// Same as [`from_covariance`](Self::from_covariance) without the physicality check.
    pub(crate) fn from_parts_unchecked(registry: ModeRegistry, covariance: DMatrix<f64>) -> Self {
        let n = registry.dim();
        GaussianState { registry, mean: DVector::zeros(n), covariance }
    }

    pub(crate) fn from_moments_unchecked(registry: ModeRegistry, mean: Vec<f64>, covariance: DMatrix<f64>) -> Self {
        GaussianState { registry, mean: DVector::from_vec(mean), covariance }
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn mode_count(&self) -> usize {
        self.registry.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.covariance;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance"));
        }
        let scale = linalg::max_abs(c).max(1.0);
        let asym = linalg::max_abs(&(c - c.transpose()));
        if asym > 1e-12 * scale {
            return Err(Error::NonPhysical(format!("covariance asymmetric by {asym:.3e}")));
        }
        let nu_min = self.symplectic_eigenvalues()[0];
        if nu_min < 0.5 - PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!(
                "smallest symplectic eigenvalue {nu_min:.12} below 1/2"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, s: &SymplecticTransform) -> Result<GaussianState> {
        if s.registry != self.registry {
            return Err(Error::DimensionMismatch {
                expected: self.registry.dim(),
                found: s.matrix.nrows(),
            });
        }
        let cov = linalg::symmetrize(&(&s.matrix * &self.covariance * s.matrix.transpose()));
        Ok(GaussianState {
            registry: self.registry.clone(),
            mean: &s.matrix * &self.mean,
            covariance: cov,
        })
    }

    /// Reduced state on a subset of modes (kept in registry order).
    pub fn partial(&self, modes: &[ModeLabel]) -> Result<GaussianState> {
        let (registry, idx) = self.registry.subset(modes)?;
        let q = quadrature_indices(&idx);
        let cov = self.covariance.select_rows(&q).select_columns(&q);
        let mean = self.mean.select_rows(&q);
        Ok(GaussianState { registry, mean, covariance: cov })
    }

    /// `1 / (2^M sqrt(det sigma))`.
    pub fn purity(&self) -> Result<f64> {
        let m = self.mode_count() as f64;
        let ld = linalg::log_det_spd(&self.covariance)
            .ok_or_else(|| Error::NonPhysical("covariance is not positive definite".into()))?;
        let nu_min = self.symplectic_eigenvalues()[0];
        if nu_min < 0.5 - PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!("symplectic eigenvalue {nu_min} below 1/2")));
        }
        Ok((-m * std::f64::consts::LN_2 - 0.5 * ld).exp())
    }

    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        linalg::symplectic_eigenvalues(&self.covariance)
    }

    /// `<a^dag a>` of one mode.
    pub fn photon_number(&self, mode: ModeLabel) -> Result<f64> {
        let i = self.registry.index(mode)?;
        let c = &self.covariance;
        Ok(0.5 * (c[(2 * i, 2 * i)] + c[(2 * i + 1, 2 * i + 1)]) - 0.5)
    }

    /// Re-expresses the state over a registry that contains the same labels
    /// in a different order.
    pub fn reorder(&self, registry: &ModeRegistry) -> Result<GaussianState> {
        if registry.len() != self.registry.len() {
            return Err(Error::DimensionMismatch { expected: self.registry.len(), found: registry.len() });
        }
        let idx: Vec<usize> =
            registry.labels().iter().map(|l| self.registry.index(*l)).collect::<Result<_>>()?;
        let q = quadrature_indices(&idx);
        Ok(GaussianState {
            registry: registry.clone(),
            mean: self.mean.select_rows(&q),
            covariance: self.covariance.select_rows(&q).select_columns(&q),
        })
    }
}

/// Linear phase-space map `r -> S r` over a registry.
#[derive(Debug, Clone)]
pub struct SymplecticTransform {
    registry: ModeRegistry,
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn identity(registry: ModeRegistry) -> Self {
        let n = registry.dim();
        SymplecticTransform { registry, matrix: DMatrix::identity(n, n) }
    }

    /// Wraps a matrix, rejecting it if `S Omega S^T != Omega` beyond `1e-12`
    /// (relative to the largest entry of `S S^T`).
    pub fn new(registry: ModeRegistry, matrix: DMatrix<f64>) -> Result<Self> {
        let n = registry.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let t = SymplecticTransform { registry, matrix };
        let scale = linalg::max_abs(&(&t.matrix * t.matrix.transpose())).max(1.0);
        let r = t.symplectic_residual();
        if r > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!("matrix is not symplectic (residual {r:.3e})")));
        }
        Ok(t)
    }

    pub(crate) fn from_matrix_unchecked(registry: ModeRegistry, matrix: DMatrix<f64>) -> Self {
        SymplecticTransform { registry, matrix }
    }

    /// Embeds a `2k x 2k` block acting on `modes` (in the given order),
    /// identity elsewhere.
    pub fn embed(registry: &ModeRegistry, modes: &[ModeLabel], block: &DMatrix<f64>) -> Result<Self> {
        let k = modes.len();
        if block.nrows() != 2 * k || block.ncols() != 2 * k {
            return Err(Error::DimensionMismatch { expected: 2 * k, found: block.nrows() });
        }
        let mut idx = Vec::with_capacity(k);
        for m in modes {
            let i = registry.index(*m)?;
            if idx.contains(&i) {
                return Err(Error::DuplicateMode(*m));
            }
            idx.push(i);
        }
        let q = quadrature_indices(&idx);
        let n = registry.dim();
        let mut matrix = DMatrix::identity(n, n);
        for (bi, &gi) in q.iter().enumerate() {
            for (bj, &gj) in q.iter().enumerate() {
                matrix[(gi, gj)] = block[(bi, bj)];
            }
        }
        Ok(SymplecticTransform { registry: registry.clone(), matrix })
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `self * other`: the image of `U_self U_other`.
    pub fn compose(&self, other: &SymplecticTransform) -> Result<SymplecticTransform> {
        if self.registry != other.registry {
            return Err(Error::DimensionMismatch { expected: self.registry.dim(), found: other.registry.dim() });
        }
        Ok(SymplecticTransform { registry: self.registry.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// `S^{-1} = -Omega S^T Omega`.
    pub fn inverse(&self) -> SymplecticTransform {
        let omega = linalg::symplectic_form(self.registry.len());
        SymplecticTransform {
            registry: self.registry.clone(),
            matrix: -(&omega * self.matrix.transpose() * &omega),
        }
    }

    /// `max |S Omega S^T - Omega|`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = linalg::symplectic_form(self.registry.len());
        linalg::max_abs(&(&self.matrix * &omega * self.matrix.transpose() - &omega))
    }
}
