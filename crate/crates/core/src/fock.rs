//! Brute-force truncated-Fock integrator for at most three modes.
//!
//! This is the independent reference for the Gaussian machinery: it builds
//! the master equation from ladder operators in a truncated number basis and
//! integrates it with an adaptive Dormand-Prince 5(4) scheme. Nothing here
//! touches the quadrature representation except
//! [`covariance_from_density`], which measures moments.
//!
//! Basis ordering is mode-major with occupations ascending: the index of
//! `|n_0, n_1, ...>` is `sum_i n_i * stride_i` with the last mode fastest.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gaussian::{GaussianState, ModeLabel, ModeRegistry};
use crate::operator::{Ladder, OperatorExpr};

pub const MAX_MODES: usize = 3;
pub const MAX_CUTOFF: usize = 30;
pub const DEFAULT_CUTOFF: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    labels: Vec<ModeLabel>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl FockBasis {
    /// `cutoffs[i]` is the number of levels kept for mode `i` (occupations
    /// `0..cutoffs[i]`).
    pub fn new(labels: Vec<ModeLabel>, cutoffs: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySelection);
        }
        if labels.len() > MAX_MODES {
            return Err(Error::InvalidParameter(format!(
                "the Fock oracle handles at most {MAX_MODES} modes, got {}",
                labels.len()
            )));
        }
        if cutoffs.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: cutoffs.len() });
        }
        if let Some(c) = cutoffs.iter().find(|c| **c < 2 || **c > MAX_CUTOFF) {
            return Err(Error::InvalidParameter(format!("cutoff {c} outside 2..={MAX_CUTOFF}")));
        }
        ModeRegistry::new(labels.clone())?;
        let mut strides = vec![1; cutoffs.len()];
        for i in (0..cutoffs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cutoffs[i + 1];
        }
        let size = cutoffs.iter().product();
        Ok(FockBasis { labels, dims: cutoffs, strides, size })
    }

    pub fn uniform(labels: Vec<ModeLabel>, cutoff: usize) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![cutoff; n])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.dims
    }

    fn mode_index(&self, label: ModeLabel) -> Result<usize> {
        self.labels.iter().position(|l| *l == label).ok_or(Error::UnknownMode(label))
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.dims[mode]
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: occupations.len() });
        }
        let mut idx = 0;
        for (i, &n) in occupations.iter().enumerate() {
            if n >= self.dims[i] {
                return Err(Error::InvalidParameter(format!("occupation {n} exceeds cutoff")));
            }
            idx += n * self.strides[i];
        }
        Ok(idx)
    }

    /// Applies a ladder product (rightmost factor first) to `|index>`.
    fn apply(&self, ops: &[(usize, bool)], index: usize) -> Option<(usize, f64)> {
        let mut idx = index;
        let mut amp = 1.0;
        for &(mode, dagger) in ops.iter().rev() {
            let n = self.occupation(idx, mode);
            if dagger {
                if n + 1 >= self.dims[mode] {
                    return None;
                }
                amp *= ((n + 1) as f64).sqrt();
                idx += self.strides[mode];
            } else {
                if n == 0 {
                    return None;
                }
                amp *= (n as f64).sqrt();
                idx -= self.strides[mode];
            }
        }
        Some((idx, amp))
    }

    fn resolve(&self, ops: &[Ladder]) -> Result<Vec<(usize, bool)>> {
        ops.iter().map(|l| Ok((self.mode_index(l.mode)?, l.dagger))).collect()
    }
}

/// Sparse Hermitian operator in CSR layout.
#[derive(Debug, Clone)]
pub struct FockOperator {
    size: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl FockOperator {
    /// Matrix of `sum_t (c_t O_t + h.c.)` in the truncated basis.
    pub fn from_expr(basis: &FockBasis, expr: &OperatorExpr) -> Result<Self> {
        let n = basis.size();
        let mut rows: Vec<std::collections::BTreeMap<usize, Complex64>> = vec![Default::default(); n];
        for term in expr.terms() {
            let ops = basis.resolve(&term.ops)?;
            for i in 0..n {
                if let Some((j, amp)) = basis.apply(&ops, i) {
                    *rows[j].entry(i).or_insert(ZERO) += term.coeff * amp;
                    *rows[i].entry(j).or_insert(ZERO) += term.coeff.conj() * amp;
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in rows {
            for (c, v) in r {
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(FockOperator { size: n, row_ptr, cols, vals })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.size, self.size, ZERO);
        for r in 0..self.size {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Dense density matrix, row-major.
#[derive(Debug, Clone)]
pub struct FockDensity {
    basis: FockBasis,
    data: Vec<Complex64>,
}

impl FockDensity {
    pub fn vacuum(basis: FockBasis) -> Self {
        let n = basis.size();
        let mut data = vec![ZERO; n * n];
        data[0] = Complex64::new(1.0, 0.0);
        FockDensity { basis, data }
    }

    pub fn number_state(basis: FockBasis, occupations: &[usize]) -> Result<Self> {
        let n = basis.size();
        let i = basis.index_of(occupations)?;
        let mut data = vec![ZERO; n * n];
        data[i * n + i] = Complex64::new(1.0, 0.0);
        Ok(FockDensity { basis, data })
    }

    /// `|psi><psi|` for a normalised ket.
    pub fn pure(basis: FockBasis, ket: &[Complex64]) -> Result<Self> {
        let n = basis.size();
        if ket.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: ket.len() });
        }
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = ket[i] * ket[j].conj();
            }
        }
        Ok(FockDensity { basis, data })
    }

    /// Product of thermal states with the given mean occupations.
    pub fn thermal(basis: FockBasis, nbar: &[f64]) -> Result<Self> {
        if nbar.len() != basis.dims.len() {
            return Err(Error::DimensionMismatch { expected: basis.dims.len(), found: nbar.len() });
        }
        let n = basis.size();
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            let p: f64 = nbar
                .iter()
                .enumerate()
                .map(|(m, &nb)| {
                    let k = basis.occupation(i, m) as i32;
                    (nb / (1.0 + nb)).powi(k) / (1.0 + nb)
                })
                .product();
            data[i * n + i] = Complex64::new(p, 0.0);
        }
        Ok(FockDensity { basis, data })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.basis.size() + j]
    }

    pub fn trace(&self) -> f64 {
        let n = self.basis.size();
        (0..n).map(|i| self.data[i * n + i].re).sum()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        // rho Hermitian: Tr rho^2 = sum |rho_ij|^2
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.basis.size();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Total population of basis states with any mode at its top level.
    pub fn top_level_population(&self) -> f64 {
        let n = self.basis.size();
        (0..n)
            .filter(|&i| (0..self.basis.dims.len()).any(|m| self.basis.occupation(i, m) + 1 == self.basis.dims[m]))
            .map(|i| self.data[i * n + i].re)
            .sum()
    }

    /// `Tr(rho O)` for a ladder product `O`.
    pub fn expect(&self, ops: &[Ladder]) -> Result<Complex64> {
        let ops = self.basis.resolve(ops)?;
        let n = self.basis.size();
        let mut acc = ZERO;
        for i in 0..n {
            if let Some((j, amp)) = self.basis.apply(&ops, i) {
                acc += self.data[i * n + j] * amp;
            }
        }
        Ok(acc)
    }

    /// Whether `rho + floor * I` admits a Cholesky factorisation, i.e. no
    /// eigenvalue lies below `-floor`.
    pub fn is_positive_within(&self, floor: f64) -> bool {
        let n = self.basis.size();
        let m = DMatrix::from_row_slice(n, n, &self.data);
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0) + DMatrix::identity(n, n) * Complex64::new(floor, 0.0);
        h.cholesky().is_some()
    }
}

/// Single-mode squeezed vacuum `S0(xi)|0>` with `x` squeezed for `xi > 0`:
/// amplitudes `(-tanh xi)^k sqrt((2k)!) / (2^k k! sqrt(cosh xi))` on `|2k>`.
pub fn squeezed_vacuum_ket(levels: usize, xi: f64) -> Vec<Complex64> {
    let t = -xi.tanh();
    let mut ket = vec![ZERO; levels];
    let mut amp = 1.0 / xi.cosh().sqrt();
    let mut k = 0;
    while 2 * k < levels {
        ket[2 * k] = Complex64::new(amp, 0.0);
        // ratio between successive even amplitudes
        let kk = (k + 1) as f64;
        amp *= t * ((2.0 * kk - 1.0) * (2.0 * kk)).sqrt() / (2.0 * kk);
        k += 1;
    }
    ket
}

/// Two-mode squeezed vacuum `exp[xi (A B - A^dag B^dag)]|00>` =
/// `sech xi sum_n (-tanh xi)^n |n, n>` on a two-mode basis.
pub fn two_mode_squeezed_ket(basis: &FockBasis, xi: f64) -> Result<Vec<Complex64>> {
    if basis.dims.len() != 2 {
        return Err(Error::BasisMismatch);
    }
    let mut ket = vec![ZERO; basis.size()];
    let levels = basis.dims[0].min(basis.dims[1]);
    for n in 0..levels {
        let i = basis.index_of(&[n, n])?;
        ket[i] = Complex64::new((-xi.tanh()).powi(n as i32) / xi.cosh(), 0.0);
    }
    Ok(ket)
}

/// `Tr(rho psi)`; equals `<psi|rho|psi>` when `psi` is pure.
pub fn fock_overlap(rho: &FockDensity, psi: &FockDensity) -> Result<f64> {
    if rho.basis != psi.basis {
        return Err(Error::BasisMismatch);
    }
    let n = rho.basis.size();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho.data[i * n + j] * psi.data[j * n + i];
        }
    }
    Ok(acc.re)
}

/// Mean and symmetrised covariance of the quadratures
/// `x = (a + a^dag)/sqrt 2`, `p = -i (a - a^dag)/sqrt 2`.
pub fn covariance_from_density(rho: &FockDensity) -> Result<GaussianState> {
    let labels = rho.basis.labels.clone();
    let m = labels.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // quadrature k as a combination of (a_i, a_i^dag)
    let quad = |k: usize| -> [(Ladder, Complex64); 2] {
        let mode = labels[k / 2];
        if k.is_multiple_of(2) {
            [(Ladder::annihilate(mode), Complex64::new(s, 0.0)), (Ladder::create(mode), Complex64::new(s, 0.0))]
        } else {
            [(Ladder::annihilate(mode), Complex64::new(0.0, -s)), (Ladder::create(mode), Complex64::new(0.0, s))]
        }
    };
    let mut mean = vec![0.0; 2 * m];
    for (k, mk) in mean.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (l, c) in quad(k) {
            acc += c * rho.expect(&[l])?;
        }
        *mk = acc.re;
    }
    let mut cov = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..2 * m {
        for l in k..2 * m {
            let mut acc = ZERO;
            for (lk, ck) in quad(k) {
                for (ll, cl) in quad(l) {
                    acc += ck * cl * rho.expect(&[lk, ll])?;
                }
            }
            let v = acc.re - mean[k] * mean[l];
            cov[(k, l)] = v;
            cov[(l, k)] = v;
        }
    }
    let registry = ModeRegistry::new(labels)?;
    Ok(GaussianState::from_moments_unchecked(registry, mean, cov))
}

#[derive(Debug, Clone, Copy)]
pub struct FockOptions {
    pub atol: f64,
    pub rtol: f64,
    pub truncation_threshold: f64,
    pub max_steps: usize,
    pub exec: Execution,
}

impl Default for FockOptions {
    fn default() -> Self {
        FockOptions {
            atol: 1e-10,
            rtol: 1e-10,
            truncation_threshold: 1e-8,
            max_steps: 200_000,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FockEvolution {
    pub state: FockDensity,
    /// Largest top-level population seen at any accepted step.
    pub max_top_population: f64,
    pub steps: usize,
    pub rejected: usize,
}

/// Liouvillian `rho -> -i[H, rho] + sum_c (kappa/2)(2 a rho a^dag - a^dag a rho - rho a^dag a)`.
pub struct Liouvillian {
    basis: FockBasis,
    h: FockOperator,
    /// Per damped mode: basis mode index.
    damped: Vec<usize>,
    kappa: f64,
    exec: Execution,
}

impl Liouvillian {
    pub fn new(basis: &FockBasis, h: &OperatorExpr, damped: &[ModeLabel], kappa: f64, exec: Execution) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be non-negative, got {kappa}")));
        }
        let damped = damped.iter().map(|m| basis.mode_index(*m)).collect::<Result<_>>()?;
        Ok(Liouvillian { basis: basis.clone(), h: FockOperator::from_expr(basis, h)?, damped, kappa, exec })
    }

    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.basis.size();
        let h = &self.h;
        // scratch = H rho
        exec::for_each_row(scratch, n, self.exec, |r, row| {
            row.iter_mut().for_each(|z| *z = ZERO);
            for k in h.row_ptr[r]..h.row_ptr[r + 1] {
                let v = h.vals[k];
                let src = &rho[h.cols[k] * n..(h.cols[k] + 1) * n];
                for (d, s) in row.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        });
        let x: &[Complex64] = scratch;
        let basis = &self.basis;
        let half_kappa = 0.5 * self.kappa;
        let damped = &self.damped;
        exec::for_each_row(out, n, self.exec, |r, row| {
            for (s, d) in row.iter_mut().enumerate() {
                // -i (H rho - rho H), rho H = (H rho)^dag
                let comm = x[r * n + s] - x[s * n + r].conj();
                *d = Complex64::new(comm.im, -comm.re);
            }
            for &m in damped {
                let st = basis.strides[m];
                let top = basis.dims[m];
                let nr = basis.occupation(r, m);
                for (s, d) in row.iter_mut().enumerate() {
                    let ns = basis.occupation(s, m);
                    let mut v = -((nr + ns) as f64) * rho[r * n + s];
                    if nr + 1 < top && ns + 1 < top {
                        let c = 2.0 * (((nr + 1) * (ns + 1)) as f64).sqrt();
                        v += c * rho[(r + st) * n + s + st];
                    }
                    *d += half_kappa * v;
                }
            }
        });
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the master equation for a time `t` from `rho0`.
pub fn evolve_fock(
    rho0: &FockDensity,
    h: &OperatorExpr,
    damped: &[ModeLabel],
    kappa: f64,
    t: f64,
    opts: &FockOptions,
) -> Result<FockEvolution> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("duration must be finite and non-negative, got {t}")));
    }
    let lv = Liouvillian::new(&rho0.basis, h, damped, kappa, opts.exec)?;
    let len = rho0.data.len();
    let n = rho0.basis.size();
    let mut y = rho0.data.clone();
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![ZERO; len]).collect();
    let mut scratch = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];
    let mut y_new = vec![ZERO; len];

    let mut top = rho0.top_level_population();
    let mut time = 0.0;
    let mut steps = 0;
    let mut rejected = 0;
    let mut h_step = if t > 0.0 { (t / 100.0).min(1e-3 / (1.0 + kappa)) } else { 0.0 };
    lv.apply(&y, &mut k[0], &mut scratch);

    while time < t {
        if steps + rejected > opts.max_steps {
            return Err(Error::InvalidParameter("Fock integration exceeded the step budget".into()));
        }
        let hs = h_step.min(t - time);
        for stage in 1..7 {
            for (idx, tv) in tmp.iter_mut().enumerate() {
                let mut acc = y[idx];
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += kj[idx] * (hs * a);
                    }
                }
                *tv = acc;
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            lv.apply(&tmp, &mut tail[0], &mut scratch);
            let _ = C[stage];
        }
        // stage 6 input is the 5th-order solution (FSAL)
        y_new.copy_from_slice(&tmp);
        let mut err = 0.0_f64;
        for idx in 0..len {
            let mut e = ZERO;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[idx] * E[j];
                }
            }
            let scale = opts.atol + opts.rtol * y[idx].norm().max(y_new[idx].norm());
            err = err.max((e * hs).norm() / scale);
        }
        if err <= 1.0 {
            time += hs;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            steps += 1;
            let pop: f64 = (0..n)
                .filter(|&i| {
                    (0..rho0.basis.dims.len()).any(|m| rho0.basis.occupation(i, m) + 1 == rho0.basis.dims[m])
                })
                .map(|i| y[i * n + i].re)
                .sum();
            top = top.max(pop);
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h_step = hs * factor;
    }

    let state = FockDensity { basis: rho0.basis.clone(), data: y };
    if top > opts.truncation_threshold {
        return Err(Error::Truncation { population: top, threshold: opts.truncation_threshold });
    }
    Ok(FockEvolution { state, max_top_population: top, steps, rejected })
}
