//! Overlaps of the position-dependent collective modes of a uniform atom
//! chain, and how far they are from being orthogonal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Order;

/// Default deficit above which the orthogonal-mode model is flagged.
pub const DEFICIT_WARNING: f64 = 0.05;

/// Uniform chain `x_j = (j - 1) d`, `j = 1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleGeometry {
    pub atoms: usize,
    pub spacing: f64,
    pub wavenumber: f64,
}

impl EnsembleGeometry {
    pub fn new(atoms: usize, spacing: f64, wavenumber: f64) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidParameter("atom number must be at least 1".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(Error::InvalidParameter(format!("wave number must be positive, got {wavenumber}")));
        }
        Ok(EnsembleGeometry { atoms, spacing, wavenumber })
    }

    /// Chain of `atoms` sites with total dimensionless length `kL`.
    pub fn from_length(atoms: usize, k_length: f64) -> Result<Self> {
        Self::new(atoms, k_length / atoms as f64, 1.0)
    }

    pub fn length(&self) -> f64 {
        self.atoms as f64 * self.spacing
    }

    pub fn k_length(&self) -> f64 {
        self.wavenumber * self.length()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.atoms).map(move |j| j as f64 * self.spacing)
    }
}

/// `[C_m, C_m'^dag] = (1/N) sum_j exp(i (m - m') k x_j)` for every pair of
/// the given orders.
pub fn overlap_matrix(geometry: &EnsembleGeometry, orders: &[Order]) -> Vec<Vec<Complex64>> {
    let n = geometry.atoms as f64;
    orders
        .iter()
        .map(|m| {
            orders
                .iter()
                .map(|mp| {
                    let dm = (m.value() - mp.value()) as f64;
                    if dm == 0.0 {
                        return Complex64::new(1.0, 0.0);
                    }
                    let sum: Complex64 = geometry
                        .positions()
                        .map(|x| Complex64::from_polar(1.0, dm * geometry.wavenumber * x))
                        .sum();
                    sum / n
                })
                .collect()
        })
        .collect()
}

/// Continuum limit of the overlap for a chain of length `kL`:
/// `(e^{i dm kL} - 1) / (i dm kL)`, and 1 on the diagonal.
pub fn chain_overlap(m: Order, mp: Order, k_length: f64) -> Complex64 {
    let dm = (m.value() - mp.value()) as f64;
    if dm == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let theta = dm * k_length;
    (Complex64::from_polar(1.0, theta) - 1.0) / Complex64::new(0.0, theta)
}

/// Largest off-diagonal overlap magnitude among the orders `0, +2, -2`.
pub fn orthogonality_deficit(geometry: &EnsembleGeometry) -> f64 {
    let m = overlap_matrix(geometry, &Order::ALL);
    let mut worst = 0.0_f64;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                worst = worst.max(v.norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn diagonal_is_one() {
        let g = EnsembleGeometry::new(17, 0.3, 1.0).unwrap();
        let m = overlap_matrix(&g, &Order::ALL);
        for (i, row) in m.iter().enumerate() {
            assert_eq!(row[i], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn two_atom_sums() {
        // 2kd = pi/2: (1 + i)/2
        let g = EnsembleGeometry::new(2, PI / 4.0, 1.0).unwrap();
        let m = overlap_matrix(&g, &[Order::Plus2, Order::Zero]);
        assert!((m[0][1] - Complex64::new(0.5, 0.5)).norm() < 1e-15);
        // 2kd = pi: the two phases cancel
        let g = EnsembleGeometry::new(2, PI / 2.0, 1.0).unwrap();
        let m = overlap_matrix(&g, &[Order::Plus2, Order::Zero]);
        assert!(m[0][1].norm() < 1e-15);
    }

    #[test]
    fn chain_overlap_values() {
        assert_eq!(chain_overlap(Order::Plus2, Order::Plus2, 3.0), Complex64::new(1.0, 0.0));
        assert!(chain_overlap(Order::Plus2, Order::Zero, PI).norm() < 1e-15);
        let v = chain_overlap(Order::Plus2, Order::Zero, PI / 2.0);
        assert!((v - Complex64::new(0.0, 2.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn long_chain_is_orthogonal() {
        let g = EnsembleGeometry::from_length(10_000, 200.0 * PI).unwrap();
        assert!(orthogonality_deficit(&g) <= 0.0032);
        // geometric series: |entry| <= 2 / (N |1 - e^{i dm k d}|)
        let g = EnsembleGeometry::from_length(1000, 200.0 * PI + 1.0).unwrap();
        let m = overlap_matrix(&g, &[Order::Plus2, Order::Zero]);
        let kd = g.spacing;
        let bound = 2.0 / (1000.0 * (Complex64::from_polar(1.0, 2.0 * kd) - 1.0).norm());
        assert!(m[0][1].norm() <= bound + 1e-12);
    }

    #[test]
    fn small_sample_and_single_atom() {
        assert!((orthogonality_deficit(&EnsembleGeometry::new(1, 1.0, 1.0).unwrap()) - 1.0).abs() < 1e-15);
        let g = EnsembleGeometry::from_length(100, 1e-4).unwrap();
        assert!(orthogonality_deficit(&g) > 0.999);
    }

    #[test]
    fn invalid_geometry() {
        assert!(EnsembleGeometry::new(0, 1.0, 1.0).is_err());
        assert!(EnsembleGeometry::new(3, 0.0, 1.0).is_err());
        assert!(EnsembleGeometry::new(3, 1.0, -1.0).is_err());
    }
}
