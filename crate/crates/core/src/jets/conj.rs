use super::{Cx, JetError, UniJet, VANISH_TOL};

/// Solves `A0 ρ(x)^k = x^k A(x)` for `ρ = x + O(x^2)`.
///
/// The result is `x (A(x)/A0)^{1/k}` with the branch fixed by `ρ'(0) = 1`,
/// of order `A.order() + 1`.
pub fn solve_power_conjugacy(a: &UniJet, k: u32) -> Result<UniJet, JetError> {
    if a.coeff(0).norm() <= VANISH_TOL {
        return Err(JetError::ZeroLeadingCoefficient);
    }
    assert!(k >= 1, "k must be positive");
    let unit = a.normalized()?;
    let root = unit.powc(Cx::new(1.0 / k as f64, 0.0))?;
    Ok(root.shift_up(1))
}

/// Solves `-A0 / (p ζ^p) = ∫ J_{p-1}A(x) / x^{p+1} dx` for `ζ = x + O(x^2)`.
///
/// The primitive is `Σ_{j<p} A_j x^{j-p} / (j-p)`, so
/// `ζ = x (Σ_{j<p} p/(p-j) · A_j/A0 · x^j)^{-1/p}`. The result has order `A.order() + 1`.
pub fn solve_meromorphic_conjugacy(a: &UniJet, p: u32) -> Result<UniJet, JetError> {
    if p == 0 {
        return Err(JetError::UndefinedForPZero);
    }
    let a0 = a.coeff(0);
    if a0.norm() <= VANISH_TOL {
        return Err(JetError::ZeroLeadingCoefficient);
    }
    let n = a.order();
    let sum: Vec<Cx> = (0..p as usize)
        .map(|j| a.coeff(j) / a0 * (p as f64 / (p as usize - j) as f64))
        .collect();
    let s = UniJet::new(&sum, n);
    let root = s.powc(Cx::new(-1.0 / p as f64, 0.0))?;
    Ok(root.shift_up(1))
}
