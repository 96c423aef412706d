use std::fmt::Debug;
use std::iter::Sum;

use nalgebra::ComplexField;
use num_complex::Complex64;

/// Sample type of a discrete sequence: `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Default + Debug + Sum + Send + Sync
{
    fn from_complex(z: Complex64) -> Self;
    fn to_complex(self) -> Complex64;

    fn from_f64(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Scalar for f64 {
    /// Drops the imaginary part, which is round-off for real inputs.
    fn from_complex(z: Complex64) -> Self {
        z.re
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn from_complex(z: Complex64) -> Self {
        z
    }

    fn to_complex(self) -> Complex64 {
        self
    }
}
