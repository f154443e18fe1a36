//! The 3×3 relaxation (Kossakowski) matrix of the Markovian dissipator.
//!
//! Two parametrizations are provided:
//!
//! * [`relaxation_matrix`] gives the textbook Bloch parametrization
//!   a₁₁ = a₂₂ = 1/(2T₁), a₃₃ = 1/T₂ − 1/(2T₁), a₁₂ = a₂₁* = i·s_eq/(√2·T₁).
//!   Its 2×2 block stops being positive semidefinite once |s_eq| > 1/√2.
//! * [`generator_matrix`] is the coefficient set actually fed to the master
//!   equation in [`crate::dynamics::lindblad_rhs`]. It shares the diagonal
//!   but uses a₁₂ = −i·s_eq/(2T₁), with the dissipator written in the
//!   normalized Pauli basis σ_k/√2. With this choice the master equation
//!   reproduces the Bloch equations term by term, and the matrix is positive
//!   semidefinite for every |s_eq| ≤ 1.

use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;

/// Hermiticity slack used by [`psd_check`].
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxationError {
    #[error("relaxation matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationMatrix {
    pub a: [[Complex64; 3]; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

impl RelaxationMatrix {
    pub fn zero() -> Self {
        RelaxationMatrix {
            a: [[Complex64::new(0.0, 0.0); 3]; 3],
        }
    }

    /// Largest |a_kl − a_lk*|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                worst = worst.max((self.a[k][l] - self.a[l][k].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order. The matrix must be Hermitian.
    pub fn eigenvalues(&self) -> Result<[f64; 3], RelaxationError> {
        let h = self.hermiticity_error();
        if !(h <= HERMITIAN_TOL) {
            return Err(RelaxationError::NotHermitian(h));
        }
        let m = Matrix3::from_fn(|i, j| self.a[i][j]);
        let eig = m.symmetric_eigenvalues();
        let mut out = [eig[0], eig[1], eig[2]];
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

fn diagonal(p: &SystemParams) -> (f64, f64) {
    let a11 = 0.5 / p.t1;
    let a33 = 1.0 / p.t2 - 0.5 / p.t1;
    (a11, a33)
}

fn assemble(a11: f64, a33: f64, a12: Complex64) -> RelaxationMatrix {
    let mut m = RelaxationMatrix::zero();
    m.a[0][0] = Complex64::new(a11, 0.0);
    m.a[1][1] = Complex64::new(a11, 0.0);
    m.a[2][2] = Complex64::new(a33, 0.0);
    m.a[0][1] = a12;
    m.a[1][0] = a12.conj();
    m
}

/// Textbook Bloch parametrization of the relaxation matrix.
pub fn relaxation_matrix(p: &SystemParams) -> RelaxationMatrix {
    let (a11, a33) = diagonal(p);
    let a12 = Complex64::new(0.0, p.s_eq / (std::f64::consts::SQRT_2 * p.t1));
    assemble(a11, a33, a12)
}

/// Coefficients of the normalized-basis dissipator that generates the Bloch
/// equations exactly.
pub fn generator_matrix(p: &SystemParams) -> RelaxationMatrix {
    let (a11, a33) = diagonal(p);
    let a12 = Complex64::new(0.0, -p.s_eq / (2.0 * p.t1));
    assemble(a11, a33, a12)
}

/// Smallest eigenvalue and positivity verdict (λ_min ≥ −tol).
pub fn psd_check(a: &RelaxationMatrix, tol: f64) -> Result<PsdReport, RelaxationError> {
    let eig = a.eigenvalues()?;
    let min_eigenvalue = eig[0];
    Ok(PsdReport {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(t1: f64, t2: f64, s_eq: f64) -> SystemParams {
        SystemParams::resonant(1e3, 1.0, t1, t2, s_eq).unwrap()
    }

    /// Closed-form spectrum: the 2×2 block [[a, ib],[−ib, a]] has a ± b,
    /// and a₃₃ is decoupled.
    fn block_oracle(a11: f64, b: f64, a33: f64) -> [f64; 3] {
        let mut e = [a11 - b.abs(), a11 + b.abs(), a33];
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn entries_single_timescale() {
        let a = relaxation_matrix(&params(20e-3, 20e-3, 0.5));
        assert!((a.a[0][0].re - 25.0).abs() < 1e-12);
        assert!((a.a[1][1].re - 25.0).abs() < 1e-12);
        assert!((a.a[2][2].re - 25.0).abs() < 1e-12);
        assert!((a.a[0][1].im - 17.677_669_529_663_69).abs() < 1e-9);
        assert_eq!(a.a[0][1].re, 0.0);
        assert_eq!(a.a[1][0], a.a[0][1].conj());
        for (k, l) in [(0, 2), (2, 0), (1, 2), (2, 1)] {
            assert_eq!(a.a[k][l], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_seq_is_diagonal() {
        let t = 40e-3;
        let a = relaxation_matrix(&params(t, t, 0.0));
        assert_eq!(a.a[0][1], Complex64::new(0.0, 0.0));
        for k in 0..3 {
            assert!((a.a[k][k].re - 0.5 / t).abs() < 1e-12);
        }
    }

    #[test]
    fn a33_for_pure_water() {
        let a = relaxation_matrix(&params(3.6, 2.5, 1.0));
        assert!((a.a[2][2].re - (0.4 - 1.0 / 7.2)).abs() < 1e-15);
        assert!((a.a[2][2].re - 0.2611).abs() < 1e-4);
    }

    #[test]
    fn psd_examples() {
        let a = relaxation_matrix(&params(20e-3, 20e-3, 0.5));
        let r = psd_check(&a, 1e-12).unwrap();
        let oracle = block_oracle(25.0, 0.5 / (std::f64::consts::SQRT_2 * 20e-3), 25.0);
        assert!(r.is_psd);
        assert!((r.min_eigenvalue - oracle[0]).abs() < 1e-10);
        let eig = a.eigenvalues().unwrap();
        for (x, y) in eig.iter().zip(oracle) {
            assert!((x - y).abs() < 1e-10);
        }

        let t = 20e-3;
        let r = psd_check(&relaxation_matrix(&params(t, t, 0.9)), 1e-12).unwrap();
        assert!(!r.is_psd);
        let expected = (0.5 - 0.9 / std::f64::consts::SQRT_2) / t;
        assert!((r.min_eigenvalue - expected).abs() < 1e-10);

        let r = psd_check(&RelaxationMatrix::zero(), 1e-12).unwrap();
        assert!(r.is_psd);
        assert_eq!(r.min_eigenvalue, 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut a = RelaxationMatrix::zero();
        a.a[0][1] = Complex64::new(1.0, 0.0);
        assert!(matches!(psd_check(&a, 1e-12), Err(RelaxationError::NotHermitian(_))));
    }

    #[test]
    fn generator_matrix_shares_diagonal() {
        let p = params(30e-3, 20e-3, 0.8);
        let lit = relaxation_matrix(&p);
        let gen = generator_matrix(&p);
        for k in 0..3 {
            assert_eq!(lit.a[k][k], gen.a[k][k]);
        }
        assert!((gen.a[0][1] - Complex64::new(0.0, -0.8 / 60e-3)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn hermitian_and_psd_inside_region(
            t1 in 1e-3..10.0f64,
            ratio in 0.01..2.0f64,
            s_eq in -std::f64::consts::FRAC_1_SQRT_2..=std::f64::consts::FRAC_1_SQRT_2,
        ) {
            let p = params(t1, ratio * t1, s_eq);
            let a = relaxation_matrix(&p);
            prop_assert!(a.hermiticity_error() <= 1e-15);
            let tol = 1e-12 * (1.0 / p.t2 + 1.0 / p.t1);
            prop_assert!(psd_check(&a, tol).unwrap().is_psd);
        }

        #[test]
        fn generator_psd_on_whole_ball(
            t1 in 1e-3..10.0f64,
            ratio in 0.01..2.0f64,
            s_eq in -1.0..=1.0f64,
        ) {
            let p = params(t1, ratio * t1, s_eq);
            let tol = 1e-12 * (1.0 / p.t2 + 1.0 / p.t1);
            prop_assert!(psd_check(&generator_matrix(&p), tol).unwrap().is_psd);
        }
    }
}
