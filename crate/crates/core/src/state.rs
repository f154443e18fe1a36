//! Bloch vectors, rotating-frame vectors and 2×2 density matrices.

use num_complex::Complex64;
use thiserror::Error;

/// Slack on the unit-ball bound |s| ≤ 1.
pub const BLOCH_TOL: f64 = 1e-9;
/// Slack on Hermiticity, unit trace and eigenvalue positivity of ρ.
pub const DENSITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("vector norm {0} exceeds the unit Bloch ball")]
    OutsideBlochBall(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

/// Lab-frame Bloch vector s_i = ⟨σ_i⟩.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl BlochState {
    pub const fn new(s1: f64, s2: f64, s3: f64) -> Self {
        BlochState { s1, s2, s3 }
    }

    /// Checked constructor enforcing |s| ≤ 1 + [`BLOCH_TOL`].
    pub fn checked(s1: f64, s2: f64, s3: f64) -> Result<Self, StateError> {
        let s = BlochState { s1, s2, s3 };
        let n = s.norm();
        if n.is_finite() && n <= 1.0 + BLOCH_TOL {
            Ok(s)
        } else {
            Err(StateError::OutsideBlochBall(n))
        }
    }

    pub fn norm(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    /// Length of the transverse component √(s₁² + s₂²).
    pub fn transverse(&self) -> f64 {
        self.s1.hypot(self.s2)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }
}

impl From<[f64; 3]> for BlochState {
    fn from(a: [f64; 3]) -> Self {
        BlochState::new(a[0], a[1], a[2])
    }
}

impl From<BlochState> for [f64; 3] {
    fn from(s: BlochState) -> Self {
        s.to_array()
    }
}

/// Bloch vector μ = (u, v, w) in the frame rotating at the drive frequency.
/// `u` is the dispersive and `v` the absorptive transverse component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotatingState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl RotatingState {
    pub const fn new(u: f64, v: f64, w: f64) -> Self {
        RotatingState { u, v, w }
    }

    pub fn checked(u: f64, v: f64, w: f64) -> Result<Self, StateError> {
        let m = RotatingState { u, v, w };
        let n = m.norm();
        if n.is_finite() && n <= 1.0 + BLOCH_TOL {
            Ok(m)
        } else {
            Err(StateError::OutsideBlochBall(n))
        }
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    /// Transverse magnitude √(u² + v²).
    pub fn transverse(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }
}

impl From<[f64; 3]> for RotatingState {
    fn from(a: [f64; 3]) -> Self {
        RotatingState::new(a[0], a[1], a[2])
    }
}

impl From<RotatingState> for [f64; 3] {
    fn from(m: RotatingState) -> Self {
        m.to_array()
    }
}

/// 2×2 complex density matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    /// Wraps raw entries without validation.
    pub const fn from_entries(m: [[Complex64; 2]; 2]) -> Self {
        DensityMatrix { m }
    }

    /// Validated constructor: Hermitian, unit trace and positive within
    /// [`DENSITY_TOL`].
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self, StateError> {
        let rho = DensityMatrix { m };
        rho.check()?;
        Ok(rho)
    }

    pub fn check(&self) -> Result<(), StateError> {
        let h = self.hermiticity_error();
        if !(h <= DENSITY_TOL) {
            return Err(StateError::InvalidDensity(format!("not Hermitian (deviation {h:e})")));
        }
        let tr = self.trace();
        if !((tr - 1.0).norm() <= DENSITY_TOL) {
            return Err(StateError::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -DENSITY_TOL {
            return Err(StateError::InvalidDensity(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Largest entry of |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.m;
        let d0 = m[0][0].im.abs() * 2.0;
        let d1 = m[1][1].im.abs() * 2.0;
        let off = (m[0][1] - m[1][0].conj()).norm();
        d0.max(d1).max(off)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        0.5 * (a + d) - (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt()
    }

    /// Packs the entries as [re00, im00, re01, im01, re10, im10, re11, im11].
    pub fn to_array(self) -> [f64; 8] {
        let m = &self.m;
        [
            m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re, m[1][1].im,
        ]
    }
}

impl From<[f64; 8]> for DensityMatrix {
    fn from(a: [f64; 8]) -> Self {
        DensityMatrix {
            m: [
                [Complex64::new(a[0], a[1]), Complex64::new(a[2], a[3])],
                [Complex64::new(a[4], a[5]), Complex64::new(a[6], a[7])],
            ],
        }
    }
}

impl From<DensityMatrix> for [f64; 8] {
    fn from(r: DensityMatrix) -> Self {
        r.to_array()
    }
}

/// ρ = (1 + s·σ)/2.
pub fn bloch_to_density(s: &BlochState) -> DensityMatrix {
    let half = 0.5;
    DensityMatrix {
        m: [
            [
                Complex64::new(half * (1.0 + s.s3), 0.0),
                Complex64::new(half * s.s1, -half * s.s2),
            ],
            [
                Complex64::new(half * s.s1, half * s.s2),
                Complex64::new(half * (1.0 - s.s3), 0.0),
            ],
        ],
    }
}

/// s_i = Tr(ρ σ_i) after validating ρ.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochState, StateError> {
    rho.check()?;
    Ok(bloch_components(rho))
}

/// s_i = Tr(ρ σ_i) with no validation; usable on generator outputs dρ/dt.
pub fn bloch_components(rho: &DensityMatrix) -> BlochState {
    let m = &rho.m;
    BlochState {
        s1: (m[0][1] + m[1][0]).re,
        s2: (m[1][0] - m[0][1]).im,
        s3: (m[0][0] - m[1][1]).re,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn excited_state() {
        let rho = bloch_to_density(&BlochState::new(0.0, 0.0, 1.0));
        assert_eq!(rho.m, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
    }

    #[test]
    fn maximally_mixed() {
        let rho = bloch_to_density(&BlochState::default());
        assert_eq!(rho.m, [[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]]);
    }

    #[test]
    fn sigma1_eigenstate() {
        let rho = bloch_to_density(&BlochState::new(1.0, 0.0, 0.0));
        assert_eq!(rho.m[0][1], c(0.5, 0.0));
        assert_eq!(rho.m[1][0], c(0.5, 0.0));
        assert!(rho.min_eigenvalue().abs() < 1e-15);
    }

    #[test]
    fn invalid_densities_rejected() {
        let non_herm = [[c(0.5, 0.0), c(0.1, 0.0)], [c(0.2, 0.0), c(0.5, 0.0)]];
        assert!(matches!(
            DensityMatrix::new(non_herm),
            Err(StateError::InvalidDensity(_))
        ));
        let bad_trace = [[c(0.6, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.6, 0.0)]];
        assert!(density_to_bloch(&DensityMatrix::from_entries(bad_trace)).is_err());
        let negative = [[c(1.2, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.2, 0.0)]];
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn checked_vectors() {
        assert!(BlochState::checked(1.0, 0.0, 0.0).is_ok());
        assert!(BlochState::checked(1.0, 0.1, 0.0).is_err());
        assert!(RotatingState::checked(0.0, 0.0, 1.0 + 1e-10).is_ok());
        assert!(RotatingState::checked(0.0, f64::NAN, 0.0).is_err());
    }

    fn ball_point() -> impl Strategy<Value = BlochState> {
        (0.0..=1.0f64, -1.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, z, phi)| {
            let rho = (1.0 - z * z).sqrt();
            BlochState::new(r * rho * phi.cos(), r * rho * phi.sin(), r * z)
        })
    }

    proptest! {
        #[test]
        fn round_trip_on_unit_ball(s in ball_point()) {
            let rho = bloch_to_density(&s);
            prop_assert!(rho.hermiticity_error() <= 1e-15);
            prop_assert!((rho.trace() - 1.0).norm() <= 1e-15);
            let back = density_to_bloch(&rho).unwrap();
            prop_assert!((back.s1 - s.s1).abs() <= 1e-14);
            prop_assert!((back.s2 - s.s2).abs() <= 1e-14);
            prop_assert!((back.s3 - s.s3).abs() <= 1e-14);
            let again = bloch_to_density(&back);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((again.m[i][j] - rho.m[i][j]).norm() <= 1e-14);
                }
            }
        }
    }
}
