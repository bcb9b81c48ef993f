//! Scalar kernels and small Hermitian linear algebra.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::grid::GridRational;

/// Below this `|a|·Δ` the difference quotient switches to its Taylor series.
pub const TAYLOR_THRESHOLD: f64 = 1e-8;

/// `Σ conj(a_i)·b_i`.
#[inline]
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (y / 2.0).sin();
    // cos y − 1 = −2 sin²(y/2)
    let re = x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin;
    let im = x.exp() * y.sin();
    C64::new(re, im)
}

/// `(e^z − 1)/z`, continuous through `z = 0`.
pub fn exp_difference_quotient(z: C64) -> C64 {
    if z.norm() < TAYLOR_THRESHOLD {
        // 1 + z/2 + z²/6 + z³/24
        C64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        expm1(z) / z
    }
}

/// `∫_{lo}^{hi} e^{aβ + b} dβ` in closed form.
pub fn exp_linear_integral(a: C64, b: C64, lo: GridRational, hi: GridRational) -> C64 {
    assert!(lo < hi, "exp_linear_integral needs lo < hi");
    exp_linear_integral_f64(a, b, lo.to_f64(), (hi - lo).to_f64())
}

/// Same integral parametrized by the left end and the width.
pub fn exp_linear_integral_f64(a: C64, b: C64, lo: f64, width: f64) -> C64 {
    (a * lo + b).exp() * width * exp_difference_quotient(a * width)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = hermitian_part(m);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalue-clipped pseudo-inverse of a Hermitian PSD matrix.
#[derive(Clone, Debug)]
pub struct PseudoInverse {
    pub matrix: DMatrix<C64>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues `≤ clip` are treated as zero.
    pub clip: f64,
    pub retained: usize,
    /// `λ_max / λ_min` over the retained eigenvalues.
    pub condition: f64,
}

pub fn hermitian_pseudo_inverse(m: &DMatrix<C64>, clip: f64) -> PseudoInverse {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut inv = DMatrix::<C64>::zeros(n, n);
    let mut retained = 0;
    let mut lmax = 0.0f64;
    let mut lmin = f64::INFINITY;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > clip {
            retained += 1;
            lmax = lmax.max(lambda);
            lmin = lmin.min(lambda);
            let u = eig.eigenvectors.column(k);
            inv += (u * u.adjoint()) * C64::new(1.0 / lambda, 0.0);
        }
    }
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let condition = if retained == 0 { f64::INFINITY } else { lmax / lmin };
    PseudoInverse { matrix: inv, eigenvalues, clip, retained, condition }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn exp_linear_integral_examples() {
        let g = Grid::default();
        let z = C64::new(0.0, 0.0);
        let v = exp_linear_integral(z, z, g.zero(), g.one());
        assert!((v - 1.0).norm() < 1e-15);
        let v = exp_linear_integral(C64::new(1.0, 0.0), z, g.zero(), g.one());
        assert!((v.re - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        // series oracle (e^a − 1)/a = 1 + a/2 + …
        let a = C64::new(1e-14, 0.0);
        let v = exp_linear_integral(a, z, g.zero(), g.one());
        assert!((v - (1.0 + 0.5e-14)).norm() < 1e-12);
    }

    #[test]
    fn quotient_continuous_across_threshold() {
        for scale in [0.5e-8, 0.99e-8, 1.01e-8, 2e-8, 1e-6, 1e-3] {
            for phase in [0.0, 0.7, 1.6, 3.0] {
                let z = C64::from_polar(scale, phase);
                let series = C64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
                let q = exp_difference_quotient(z);
                assert!((q - series).norm() < 1e-15, "z = {z}: {q} vs {series}");
            }
        }
    }

    #[test]
    fn expm1_matches_exp_for_large_arguments() {
        let z = C64::new(0.3, -2.1);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn pseudo_inverse_of_rank_deficient() {
        let one = C64::new(1.0, 0.0);
        let m = DMatrix::from_element(2, 2, one);
        let p = hermitian_pseudo_inverse(&m, 1e-10);
        assert_eq!(p.retained, 1);
        let back = &p.matrix * &m * &p.matrix;
        assert!((back - &p.matrix).norm() < 1e-12);
    }
}
