//! Symplectic images of the squeezing and mixing unitaries, and Hamiltonian
//! conjugation.
//!
//! All squeezing parameters are real. Conventions:
//!
//! * `S0(xi) = exp[-(xi/2)(C^dag^2 - C^2)]`, giving `x -> e^{-xi} x`,
//!   `p -> e^{xi} p`;
//! * `S2(xi) = exp[xi (A B - A^dag B^dag)]`, giving
//!   `A -> A cosh xi - B^dag sinh xi`, so `x_A + x_B` and `p_A - p_B` are
//!   squeezed;
//! * the four-mode squeezer is `exp{-xi (G - G^dag)}` with
//!   `G = C2(1)^dag C-2(1)^dag + C-2(1)^dag C2(2)^dag + C2(2)^dag C-2(2)^dag`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{ModeLabel, ModeRegistry, Order, SymplecticTransform};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg;
use crate::operator::OperatorExpr;
use crate::GOLDEN;

pub fn single_mode_squeezer(registry: &ModeRegistry, mode: ModeLabel, xi: f64) -> Result<SymplecticTransform> {
    let block = DMatrix::from_row_slice(2, 2, &[(-xi).exp(), 0.0, 0.0, xi.exp()]);
    SymplecticTransform::embed(registry, &[mode], &block)
}

pub fn two_mode_squeezer(
    registry: &ModeRegistry,
    a: ModeLabel,
    b: ModeLabel,
    xi: f64,
) -> Result<SymplecticTransform> {
    if a == b {
        return Err(Error::DuplicateMode(a));
    }
    let (c, s) = (xi.cosh(), xi.sinh());
    #[rustfmt::skip]
    let block = DMatrix::from_row_slice(4, 4, &[
        c,   0.0, -s,  0.0,
        0.0, c,   0.0, s,
        -s,  0.0, c,   0.0,
        0.0, s,   0.0, c,
    ]);
    SymplecticTransform::embed(registry, &[a, b], &block)
}

/// `exp(theta Omega H_q)`: Heisenberg image of `exp(-i theta H)`.
pub fn from_generator(h: &QuadraticHamiltonian, theta: f64) -> SymplecticTransform {
    let omega = linalg::symplectic_form(h.registry().len());
    let m = linalg::expm(&(&omega * h.matrix() * theta));
    SymplecticTransform::from_matrix_unchecked(h.registry().clone(), m)
}

/// Hermitian generator `i (G^dag - G)` of `exp[xi (G^dag - G)]` for
/// `G = sum a^dag b^dag` over the given pairs.
pub fn pair_squeezing_generator(pairs: &[(ModeLabel, ModeLabel)]) -> OperatorExpr {
    pairs
        .iter()
        .fold(OperatorExpr::new(), |e, &(a, b)| e.pair(Complex64::new(0.0, -1.0), a, b))
}

/// Standard ordering of the four squeezed modes:
/// `[C2k(1), C-2k(1), C2k(2), C-2k(2)]`.
pub fn four_mode_labels() -> [ModeLabel; 4] {
    [
        ModeLabel::collective(1, Order::Plus2),
        ModeLabel::collective(1, Order::Minus2),
        ModeLabel::collective(2, Order::Plus2),
        ModeLabel::collective(2, Order::Minus2),
    ]
}

/// Four-mode squeezer acting on `modes = [P1, M1, P2, M2]`, coupling the
/// pairs `(P1, M1)`, `(M1, P2)` and `(P2, M2)`.
pub fn four_mode_squeezer(registry: &ModeRegistry, modes: [ModeLabel; 4], xi: f64) -> Result<SymplecticTransform> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::DuplicateMode(*m));
        }
        registry.index(*m)?;
    }
    let [p1, m1, p2, m2] = modes;
    let local = ModeRegistry::new(modes.to_vec())?;
    let gen = pair_squeezing_generator(&[(p1, m1), (m1, p2), (p2, m2)]);
    let h = QuadraticHamiltonian::from_expr(&gen, &local)?;
    let s = from_generator(&h, xi);
    SymplecticTransform::embed(registry, &modes, s.matrix())
}

/// Image of the passive golden-ratio mixer `T` with `T C T^dag = L C`, where
/// `L` maps `(P1, P2, M1, M2)` to
/// `d+1 = (P1 + l P2)/n`, `d+2 = (l P1 - P2)/n`,
/// `d-1 = (l M2 - M1)/n`, `d-2 = (M2 + l M1)/n`, `n = sqrt(1 + l^2)`.
///
/// Since `T^dag C T = L^T C`, the phase-space matrix is `L^T` on both
/// quadratures.
pub fn ensemble_mixer(registry: &ModeRegistry, modes: [ModeLabel; 4], lambda: f64) -> Result<SymplecticTransform> {
    let [p1, m1, p2, m2] = modes;
    let n = (1.0 + lambda * lambda).sqrt();
    // rows d+1, d+2, d-1, d-2; columns P1, P2, M1, M2
    #[rustfmt::skip]
    let l = DMatrix::from_row_slice(4, 4, &[
        1.0,    lambda, 0.0,    0.0,
        lambda, -1.0,   0.0,    0.0,
        0.0,    0.0,    -1.0,   lambda,
        0.0,    0.0,    lambda, 1.0,
    ]) / n;
    let lt = l.transpose();
    let mut block = DMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            block[(2 * i, 2 * j)] = lt[(i, j)];
            block[(2 * i + 1, 2 * j + 1)] = lt[(i, j)];
        }
    }
    SymplecticTransform::embed(registry, &[p1, p2, m1, m2], &block)
}

/// Golden-ratio mixer over the standard four-mode labels.
pub fn golden_mixer(registry: &ModeRegistry) -> Result<SymplecticTransform> {
    ensemble_mixer(registry, four_mode_labels(), GOLDEN)
}

/// Phase-space form of `U^dag H U`, where `s` is the image of `U`:
/// `H_q -> S^T H_q S`.
pub fn conjugate_hamiltonian(h: &QuadraticHamiltonian, s: &SymplecticTransform) -> Result<QuadraticHamiltonian> {
    if h.registry() != s.registry() {
        return Err(Error::DimensionMismatch { expected: h.registry().dim(), found: s.registry().dim() });
    }
    let m = s.matrix().transpose() * h.matrix() * s.matrix();
    QuadraticHamiltonian::new(h.registry().clone(), m)
}

/// Frame used to analyse the single-ensemble protocol:
/// `S0(xi)` on `C0k(n)` times `S2(xi)` on `(C2k(n), C-2k(n))`.
pub fn one_two_mode_frame(registry: &ModeRegistry, ensemble: u8, xi: f64) -> Result<SymplecticTransform> {
    let s0 = single_mode_squeezer(registry, ModeLabel::collective(ensemble, Order::Zero), xi)?;
    let s2 = two_mode_squeezer(
        registry,
        ModeLabel::collective(ensemble, Order::Plus2),
        ModeLabel::collective(ensemble, Order::Minus2),
        xi,
    )?;
    s0.compose(&s2)
}

/// The pair of two-mode squeezers that the mixer turns the four-mode
/// squeezer into: `S2(l xi)` on `(C2k(1), C-2k(2))` times `S2(-xi/l)` on
/// `(C2k(2), C-2k(1))`.
pub fn factorized_four_mode(registry: &ModeRegistry, xi: f64) -> Result<SymplecticTransform> {
    let [p1, m1, p2, m2] = four_mode_labels();
    let a = two_mode_squeezer(registry, p1, m2, GOLDEN * xi)?;
    let b = two_mode_squeezer(registry, p2, m1, -xi / GOLDEN)?;
    a.compose(&b)
}

/// Frame used to analyse the four-mode protocol:
/// `U = T^dag S2(l xi) S2(-xi/l)`, so that the target state is `U |0>`
/// mapped back by `T`.
pub fn four_mode_frame(registry: &ModeRegistry, xi: f64) -> Result<SymplecticTransform> {
    let t = golden_mixer(registry)?;
    t.inverse().compose(&factorized_four_mode(registry, xi)?)
}
