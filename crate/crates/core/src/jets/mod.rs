//! Truncated power series in one and two complex variables.
//!
//! A jet of order `N` stores the coefficients of all monomials of (total)
//! degree at most `N`. Every operation returns a jet whose coefficients do not
//! depend on the discarded terms of its inputs.

mod bi;
mod conj;
mod poly;
mod uni;

pub use bi::BiJet;
pub use conj::{solve_meromorphic_conjugacy, solve_power_conjugacy};
pub use poly::Poly2;
pub use uni::UniJet;

pub use num_complex::Complex64;

/// Short alias used throughout the crate.
pub type Cx = Complex64;

/// Constant terms smaller than this are treated as zero where a series must vanish at 0.
pub const VANISH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("inner series has nonzero constant term {0}")]
    NonzeroConstantTerm(Cx),
    #[error("series is not invertible: linear coefficient vanishes")]
    NotInvertible,
    #[error("series has zero constant term")]
    ZeroConstantTerm,
    #[error("leading coefficient A0 is zero")]
    ZeroLeadingCoefficient,
    #[error("meromorphic conjugacy is undefined for p = 0")]
    UndefinedForPZero,
    #[error("series is not divisible by the requested power")]
    NotDivisible,
}

/// Rounds components that are negligible against the modulus to exact zero.
pub fn snap(z: Cx) -> Cx {
    let r = z.norm();
    let re = if z.re.abs() <= 1e-15 * r { 0.0 } else { z.re };
    let im = if z.im.abs() <= 1e-15 * r { 0.0 } else { z.im };
    Cx::new(re, im)
}

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}
