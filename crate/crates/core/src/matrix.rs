//! 2×2 complex unitaries applied by a single QPU stage.

use std::fmt;
use std::ops::Mul;

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

/// Row-major 2×2 complex matrix `[m00, m01, m10, m11]` in double precision.
///
/// Frontend math stays in `f64`; values are truncated to single precision only
/// when a matrix is written into a configuration record.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateMatrix(pub [Complex64; 4]);

impl GateMatrix {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        GateMatrix([m00, m01, m10, m11])
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        GateMatrix([o, z, z, o])
    }

    pub fn pauli_x() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        GateMatrix([z, o, o, z])
    }

    /// Diagonal matrix `diag(a, b)`.
    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        GateMatrix([a, z, z, b])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row * 2 + col]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let [a, b, c, d] = self.0;
        GateMatrix([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    /// Largest elementwise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `M·M† = I` elementwise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (*self * self.dagger()).max_abs_diff(&GateMatrix::identity()) <= tol
    }

    pub fn approx_eq(&self, other: &GateMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Entries rounded to IEEE-754 single precision (round-to-nearest).
    pub fn to_f32(&self) -> [Complex32; 4] {
        self.0.map(|c| Complex32::new(c.re as f32, c.im as f32))
    }

    /// Widens single-precision entries back to `f64` without rounding.
    pub fn from_f32(m: [Complex32; 4]) -> Self {
        GateMatrix(m.map(|c| Complex64::new(c.re as f64, c.im as f64)))
    }

    /// Same matrix after a round trip through single precision.
    pub fn quantized(&self) -> Self {
        GateMatrix::from_f32(self.to_f32())
    }
}

impl Mul for GateMatrix {
    type Output = GateMatrix;

    fn mul(self, rhs: GateMatrix) -> GateMatrix {
        let a = &self.0;
        let b = &rhs.0;
        GateMatrix([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }
}

impl fmt::Debug for GateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}
