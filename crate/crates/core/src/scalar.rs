//! Scalar abstraction so the numerical core runs at `f64` (default) or `f32`.

use rand::distr::uniform::SampleUniform;

/// Floating-point scalar usable throughout the library.
///
/// `nalgebra::RealField` supplies the transcendental functions and the
/// linear-algebra bounds; the two conversion methods cover literals and
/// interop with `f64`-only routines (normal CDF, CSV output).
pub trait Scalar: nalgebra::RealField + Copy + SampleUniform {
    /// Lossy conversion from an `f64` literal or intermediate.
    fn of(x: f64) -> Self;

    /// Widen (or pass through) to `f64`.
    fn to_f64(self) -> f64;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Scalar for f64 {
    fn of(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}
