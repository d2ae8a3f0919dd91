//! Dense linear-algebra helpers shared by the Gaussian modules.

use nalgebra::{Complex, DMatrix, DVector};

/// Canonical symplectic form for `m` modes, 2x2 blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega[(2 * i, 2 * i + 1)] = 1.0;
        omega[(2 * i + 1, 2 * i)] = -1.0;
    }
    omega
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.exp()
}

/// Solves `A X + X A^T + D = 0` by vectorisation. Sizes here stay below
/// 16x16, so the dense Kronecker system is cheap.
pub fn lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, d.iter().map(|v| -v));
    let lu = k.clone().lu();
    let mut x = lu.solve(&rhs)?;
    // one round of iterative refinement
    let r = &rhs - &k * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let sol = DMatrix::from_column_slice(n, n, x.as_slice());
    Some(symmetrize(&sol))
}

/// Transition matrix and accumulated noise of `sigma' = A sigma + sigma A^T + D`
/// over a time `t`: `sigma(t) = F sigma(0) F^T + Q`.
///
/// Uses the block exponential of `[[A, D], [0, -A^T]]` on sub-intervals short
/// enough that the growing `-A^T` block stays well conditioned.
pub fn lti_propagator(a: &DMatrix<f64>, d: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if t == 0.0 {
        return (DMatrix::identity(n, n), DMatrix::zeros(n, n));
    }
    let norm = a.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
    let chunks = ((norm * t).ceil() as usize).max(1);
    let h = t / chunks as f64;

    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    block.view_mut((0, n), (n, n)).copy_from(&(d * h));
    block.view_mut((n, n), (n, n)).copy_from(&(-a.transpose() * h));
    let e = expm(&block);
    let f_h = e.view((0, 0), (n, n)).into_owned();
    let g_h = e.view((0, n), (n, n)).into_owned();
    let q_h = symmetrize(&(g_h * f_h.transpose()));

    let mut f = DMatrix::identity(n, n);
    let mut q = DMatrix::zeros(n, n);
    for _ in 0..chunks {
        q = symmetrize(&(&f_h * &q * f_h.transpose() + &q_h));
        f = &f_h * f;
    }
    (f, q)
}

pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    a.complex_eigenvalues().iter().copied().collect()
}

/// Unit vector spanning (approximately) the kernel of `A - mu I`.
pub fn near_null_vector(a: &DMatrix<f64>, mu: Complex<f64>) -> DVector<Complex<f64>> {
    let n = a.nrows();
    let mut m = a.map(|v| Complex::new(v, 0.0));
    for i in 0..n {
        m[(i, i)] -= mu;
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    v_t.row(imin).transpose().map(|c| c.conj())
}

/// Symplectic eigenvalues of a covariance matrix, ascending.
///
/// For positive-definite input the symmetric route `eig(-(L Omega L)^2)` with
/// `L = sigma^(1/2)` is used; otherwise the moduli of the eigenvalues of
/// `Omega sigma` are paired up.
pub fn symplectic_eigenvalues(sigma: &DMatrix<f64>) -> Vec<f64> {
    let n = sigma.nrows();
    let m = n / 2;
    let omega = symplectic_form(m);
    let eig = symmetrize(sigma).symmetric_eigen();
    let mut nus: Vec<f64> = if eig.eigenvalues.iter().all(|v| *v > 0.0) {
        let sqrt_vals = eig.eigenvalues.map(f64::sqrt);
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&sqrt_vals)
            * eig.eigenvectors.transpose();
        let k = &root * &omega * &root;
        let kk = symmetrize(&(&k * k.transpose()));
        let mut sq: Vec<f64> = kk.symmetric_eigen().eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        sq.sort_by(|a, b| a.total_cmp(b));
        sq.chunks(2).map(|c| 0.5 * (c[0] + c[c.len() - 1])).collect()
    } else {
        let mut mods: Vec<f64> = eigenvalues(&(&omega * sigma)).iter().map(|c| c.norm()).collect();
        mods.sort_by(|a, b| a.total_cmp(b));
        mods.chunks(2).map(|c| 0.5 * (c[0] + c[c.len() - 1])).collect()
    };
    nus.sort_by(|a, b| a.total_cmp(b));
    nus
}

/// Natural log of the determinant of a symmetric positive-definite matrix.
pub fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = symmetrize(m).cholesky()?;
    Some(2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}
