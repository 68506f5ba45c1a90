//! Eigendecomposition of the Gram matrix H^H H. Every analytical MSE formula
//! and closed-form trajectory is evaluated in this eigenbasis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mimo::ChannelMatrix;

/// Threshold below which small negative eigenvalues from the solver are
/// clamped to zero; the Gram matrix is positive semidefinite.
const NEGATIVE_CLAMP: f64 = 1e-12;

/// Unitary eigenbasis U and descending eigenvalues of H^H H.
#[derive(Debug, Clone)]
pub struct GramEigenSystem {
    basis: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
}

impl GramEigenSystem {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The n x n unitary matrix U with eigenvectors as columns.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    /// Eigenvalues sorted descending, lambda_1 >= ... >= lambda_n >= 0.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// U^H v, coordinates of v in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.basis.adjoint() * v
    }

    /// U v~, back to the standard basis.
    pub fn from_eigenbasis(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.basis * v
    }

    /// U diag(d) U^H for a real diagonal; used by dense-matrix oracles.
    pub fn dense_function(&self, diag: &[f64]) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        &self.basis * d * self.basis.adjoint()
    }
}

/// Decomposes H^H H = U diag(lambda) U^H with eigenvalues sorted descending.
pub fn gram_eigensystem(h: &ChannelMatrix) -> Result<GramEigenSystem> {
    let gram = h.gram();
    let n = gram.nrows();
    let eig = gram
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::EigenFailure)?;

    // Stable descending sort, ties broken by original index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut basis = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
        let mut lambda = eig.eigenvalues[src];
        if lambda < 0.0 {
            if lambda < -NEGATIVE_CLAMP {
                return Err(Error::EigenFailure);
            }
            lambda = 0.0;
        }
        eigenvalues.push(lambda);
    }
    Ok(GramEigenSystem { basis, eigenvalues })
}

/// Smallest decay rate lambda_n + eta of the residual dynamics; strictly
/// positive for eta > 0, which is the stability certificate.
pub fn stability_margin(eig: &GramEigenSystem, eta: f64) -> f64 {
    eig.lambda_min() + eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo::{rng_stream, sample_channel, SystemConfig};

    fn random_channel(n: usize, m: usize, seed: u64) -> ChannelMatrix {
        let cfg = SystemConfig::new(n, m, 1.0, seed).unwrap();
        sample_channel(&cfg, &mut rng_stream(seed, 0))
    }

    #[test]
    fn identity_gram() {
        let h = ChannelMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let eig = gram_eigensystem(&h).unwrap();
        for &l in eig.eigenvalues() {
            assert!((l - 1.0).abs() < 1e-12);
        }
        let uhu = eig.basis().adjoint() * eig.basis();
        assert!((uhu - DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn diagonal_gram() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(2.0, 0.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        let h = ChannelMatrix::new(m).unwrap();
        let eig = gram_eigensystem(&h).unwrap();
        assert!((eig.eigenvalues()[0] - 4.0).abs() < 1e-12);
        assert!((eig.eigenvalues()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_on_random_channels() {
        for seed in 0..10u64 {
            let h = random_channel(8, 8, seed + 100);
            let eig = gram_eigensystem(&h).unwrap();
            let n = eig.n();

            let uhu = eig.basis().adjoint() * eig.basis();
            assert!((uhu - DMatrix::<Complex64>::identity(n, n)).norm() < 1e-10);

            // sorted descending, nonnegative
            for w in eig.eigenvalues().windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(eig.lambda_min() >= 0.0);

            // reconstruction
            let gram = h.gram();
            let rebuilt = eig.dense_function(eig.eigenvalues());
            assert!((&rebuilt - &gram).norm() / gram.norm() < 1e-10);

            // trace identity
            let trace: f64 = gram.diagonal().iter().map(|z| z.re).sum();
            let sum: f64 = eig.eigenvalues().iter().sum();
            assert!((trace - sum).abs() / trace < 1e-10);
        }
    }

    #[test]
    fn stability_margin_cases() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(2.0, 0.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        let h = ChannelMatrix::new(m).unwrap();
        let eig = gram_eigensystem(&h).unwrap();
        assert!((stability_margin(&eig, 0.5) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn stability_margin_eta_floor_for_rank_deficient() {
        // 1x2 channel: Gram is 2x2 rank one, lambda_2 = 0.
        let mut m = DMatrix::zeros(1, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(0, 1)] = Complex64::new(2.0, 0.0);
        let h = ChannelMatrix::new(m).unwrap();
        let eig = gram_eigensystem(&h).unwrap();
        assert!(eig.lambda_min().abs() < 1e-12);
        assert!((stability_margin(&eig, 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn stability_margin_positive_sweep() {
        for seed in 0..100u64 {
            let h = random_channel(4, 4, seed + 500);
            let eig = gram_eigensystem(&h).unwrap();
            assert!(stability_margin(&eig, 1.0) > 0.0);
        }
    }
}
