//! Symbolic sums of ladder-operator products.

use num_complex::Complex64;

use crate::gaussian::ModeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: ModeLabel,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: ModeLabel) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: ModeLabel) -> Self {
        Ladder { mode, dagger: false }
    }

    pub fn adjoint(self) -> Self {
        Ladder { mode: self.mode, dagger: !self.dagger }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    /// Operator product, leftmost factor first.
    pub ops: Vec<Ladder>,
}

impl Term {
    pub fn adjoint(&self) -> Term {
        Term {
            coeff: self.coeff.conj(),
            ops: self.ops.iter().rev().map(|l| l.adjoint()).collect(),
        }
    }
}

/// Hermitian operator `sum_t (c_t O_t + h.c.)`.
///
/// Only the non-conjugated half is stored; every consumer adds the Hermitian
/// conjugate of each term.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorExpr {
    terms: Vec<Term>,
}

impl OperatorExpr {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c * ops + h.c.`; zero coefficients are dropped.
    pub fn push(&mut self, coeff: Complex64, ops: Vec<Ladder>) -> &mut Self {
        if coeff != Complex64::new(0.0, 0.0) {
            self.terms.push(Term { coeff, ops });
        }
        self
    }

    /// `c a^dag b + h.c.`
    pub fn mixer(mut self, coeff: Complex64, a: ModeLabel, b: ModeLabel) -> Self {
        self.push(coeff, vec![Ladder::create(a), Ladder::annihilate(b)]);
        self
    }

    /// `c a^dag b^dag + h.c.`
    pub fn pair(mut self, coeff: Complex64, a: ModeLabel, b: ModeLabel) -> Self {
        self.push(coeff, vec![Ladder::create(a), Ladder::create(b)]);
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scaled(&self, s: f64) -> Self {
        OperatorExpr {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coeff: t.coeff * s, ops: t.ops.clone() })
                .collect(),
        }
    }

    pub fn modes(&self) -> Vec<ModeLabel> {
        let mut out: Vec<ModeLabel> = Vec::new();
        for l in self.terms.iter().flat_map(|t| t.ops.iter()) {
            if !out.contains(&l.mode) {
                out.push(l.mode);
            }
        }
        out
    }

    /// Relabels every ladder operator through `f`.
    pub fn map_modes(&self, f: impl Fn(ModeLabel) -> ModeLabel) -> Self {
        OperatorExpr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    ops: t.ops.iter().map(|l| Ladder { mode: f(l.mode), dagger: l.dagger }).collect(),
                })
                .collect(),
        }
    }
}
