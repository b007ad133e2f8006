//! Aggregate interference as a sum of independent, non-identical
//! exponential variables.
//!
//! The density of `I = Σ μ_i ω_i` (with `ω_i` i.i.d. unit exponentials) is a
//! signed mixture of Erlang densities, one per distinct mean and power:
//!
//! ```text
//! f_I(y) = Σ_i Σ_{j=1..τ_i} χ[i][j] · μ_⟨i⟩^{−j} / (j−1)! · y^{j−1} · e^{−y/μ_⟨i⟩}
//! ```
//!
//! The coefficients `χ` are the partial-fraction weights of the Laplace
//! transform `Π_l (1 + μ_l s)^{−τ_l}` in the basis `(1 + μ_i s)^{−j}`.

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Default relative tolerance for treating two means as equal.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-9;

/// Coefficients larger than this are refused as numerically meaningless.
pub const MAX_COEFFICIENT: f64 = 1e12;

/// Characteristic decomposition of a diagonal mean matrix.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CharDecomp {
    distinct_means: Vec<f64>,
    multiplicities: Vec<usize>,
    coefficients: Vec<Vec<f64>>,
    source_means: Vec<f64>,
}

impl CharDecomp {
    /// Decomposition with the default merge tolerance.
    pub fn new(means: &[f64]) -> Result<Self> {
        characteristic_decomposition(means, DEFAULT_MERGE_TOLERANCE)
    }

    /// Distinct means, strictly decreasing.
    pub fn distinct_means(&self) -> &[f64] {
        &self.distinct_means
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// `coefficients()[i][j-1]` is `χ_{i,j}`.
    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    /// The means as supplied, unsorted.
    pub fn source_means(&self) -> &[f64] {
        &self.source_means
    }

    /// Number of distinct means.
    pub fn distinct_count(&self) -> usize {
        self.distinct_means.len()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities.iter().copied().max().unwrap_or(0)
    }

    /// `Σ_i Σ_j χ[i][j]`, which is 1 for a proper decomposition.
    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.iter().flatten().sum()
    }

    /// Iterates `(μ_⟨i⟩, j, χ_{i,j})` over every term, `j` starting at 1.
    pub fn terms(&self) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        self.distinct_means
            .iter()
            .zip(&self.coefficients)
            .flat_map(|(&mu, row)| row.iter().enumerate().map(move |(j, &c)| (mu, j + 1, c)))
    }

    /// `E[I]`, the sum of the source means.
    pub fn total_mean(&self) -> f64 {
        self.source_means.iter().sum()
    }
}

/// Groups `means` into distinct values and computes the characteristic
/// coefficients.
///
/// Means within `merge_tolerance` (relative) of a group's largest member
/// join that group; the group is represented by the average of its
/// members.
pub fn characteristic_decomposition(means: &[f64], merge_tolerance: f64) -> Result<CharDecomp> {
    if means.is_empty() {
        return Err(Error::Domain("characteristic decomposition of an empty mean vector".into()));
    }
    if !(merge_tolerance > 0.0 && merge_tolerance <= 1e-3) {
        return Err(Error::Domain(format!(
            "merge_tolerance must lie in (0, 1e-3], got {merge_tolerance}"
        )));
    }
    if let Some(bad) = means.iter().find(|&&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::Domain(format!("means must be positive and finite, got {bad}")));
    }

    let mut sorted = means.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut groups: Vec<Vec<f64>> = Vec::new();
    for m in sorted {
        match groups.last_mut() {
            Some(g) if (g[0] - m) <= merge_tolerance * g[0] => g.push(m),
            _ => groups.push(vec![m]),
        }
    }
    let distinct_means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let multiplicities: Vec<usize> = groups.iter().map(Vec::len).collect();

    let coefficients: Vec<Vec<f64>> = (0..distinct_means.len())
        .map(|i| residue_coefficients(i, &distinct_means, &multiplicities))
        .collect();

    if let Some(big) = coefficients.iter().flatten().find(|c| !c.is_finite() || c.abs() > MAX_COEFFICIENT) {
        return Err(Error::Conditioning(format!(
            "characteristic coefficient {big:e} exceeds {MAX_COEFFICIENT:e}; \
             nearly equal means should be merged with a wider merge_tolerance"
        )));
    }

    let decomp = CharDecomp {
        distinct_means,
        multiplicities,
        coefficients,
        source_means: means.to_vec(),
    };
    // The coefficients always sum to one; allow the roundoff their size implies.
    let sum = decomp.coefficient_sum();
    let magnitude: f64 = decomp.coefficients.iter().flatten().map(|c| c.abs()).sum();
    if (sum - 1.0).abs() > 1e-9_f64.max(1e3 * f64::EPSILON * magnitude) {
        return Err(Error::Conditioning(format!(
            "characteristic coefficients sum to {sum}, not 1"
        )));
    }
    Ok(decomp)
}

// Partial-fraction coefficients for the pole at −1/μ_i.
//
// With x = 1 + μ_i s, every other factor becomes
// (1 + μ_l s)^{−τ_l} = (μ_i / (μ_i − μ_l + μ_l x))^{τ_l}, so χ_{i,j} is the
// coefficient of x^{τ_i − j} in the Taylor series of the product of those
// factors at x = 0.
fn residue_coefficients(i: usize, means: &[f64], mult: &[usize]) -> Vec<f64> {
    let order = mult[i];
    let mu_i = means[i];
    let mut series = vec![0.0; order];
    series[0] = 1.0;
    for (l, (&mu_l, &tau_l)) in means.iter().zip(mult).enumerate() {
        if l == i {
            continue;
        }
        let d = mu_i - mu_l;
        let ratio = mu_l / d;
        // (μ_i/d)^{τ_l} (1 + ratio·x)^{−τ_l} = (μ_i/d)^{τ_l} Σ_n C(τ_l+n−1, n) (−ratio)^n x^n
        let lead = (mu_i / d).powi(tau_l as i32);
        let mut factor = vec![0.0; order];
        let mut binom = 1.0;
        let mut pow = 1.0;
        for (n, slot) in factor.iter_mut().enumerate() {
            if n > 0 {
                binom *= (tau_l + n - 1) as f64 / n as f64;
                pow *= -ratio;
            }
            *slot = lead * binom * pow;
        }
        series = truncated_product(&series, &factor);
    }
    // χ_{i,j} for j = 1..=τ_i is the coefficient of x^{τ_i − j}.
    (1..=order).map(|j| series[order - j]).collect()
}

fn truncated_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|k| (0..=k).map(|m| a[m] * b[k - m]).sum())
        .collect()
}

/// Density of the aggregate interference at `y ≥ 0`.
///
/// Tiny negative excursions from cancellation between signed terms are
/// clamped to zero.
pub fn mixture_pdf(decomp: &CharDecomp, y: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (mu, j, chi) in decomp.terms() {
        if chi == 0.0 {
            continue;
        }
        let term = if y == 0.0 {
            if j == 1 {
                1.0 / mu
            } else {
                0.0
            }
        } else {
            let jf = j as f64;
            (-jf * mu.ln() - ln_gamma(jf) + (jf - 1.0) * y.ln() - y / mu).exp()
        };
        sum += chi * term;
    }
    sum.max(0.0)
}

/// Distribution function of the aggregate interference, clamped to `[0, 1]`.
pub fn mixture_cdf(decomp: &CharDecomp, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y.is_infinite() {
        return 1.0;
    }
    let mut sum = 0.0;
    for (mu, j, chi) in decomp.terms() {
        sum += chi * erlang_cdf(j, y / mu);
    }
    sum.clamp(0.0, 1.0)
}

/// `P(j, x)`: CDF of the unit-scale Erlang(j) distribution.
pub(crate) fn erlang_cdf(j: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < j as f64 {
        // Lower series avoids cancellation in 1 − e^{−x} Σ x^k/k!.
        let mut term = 1.0 / j as f64;
        let mut sum = term;
        for n in 1..10_000 {
            term *= x / (j + n) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (j as f64 * x.ln() - x - ln_gamma(j as f64)).exp() * sum
    } else {
        let mut term = 1.0;
        let mut tail = 1.0;
        for k in 1..j {
            term *= x / k as f64;
            tail += term;
        }
        1.0 - (-x).exp() * tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_exponential() {
        let d = CharDecomp::new(&[2.5]).unwrap();
        assert_eq!(d.distinct_means(), &[2.5]);
        assert_eq!(d.multiplicities(), &[1]);
        assert_eq!(d.coefficients(), &[vec![1.0]]);
        for &y in &[0.0, 0.1, 1.0, 7.3] {
            let exact = (-y / 2.5f64).exp() / 2.5;
            assert!((mixture_pdf(&d, y) - exact).abs() <= 1e-14 * exact.max(1e-300));
        }
    }

    #[test]
    fn iid_pair_keeps_only_top_power() {
        let d = CharDecomp::new(&[1.5, 1.5]).unwrap();
        assert_eq!(d.multiplicities(), &[2]);
        assert_eq!(d.coefficients(), &[vec![0.0, 1.0]]);
        assert_eq!(mixture_pdf(&d, 0.0), 0.0);
    }

    #[test]
    fn distinct_pair() {
        let d = CharDecomp::new(&[1.0, 2.0]).unwrap();
        assert_eq!(d.distinct_means(), &[2.0, 1.0]);
        let c = d.coefficients();
        assert!((c[0][0] - 2.0).abs() < 1e-15);
        assert!((c[1][0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn repeated_with_distinct_matches_convolution() {
        // Exp(2) + Exp(2) + Exp(1): density by direct convolution of the
        // Erlang(2, 2) and Exp(1) densities,
        // f(y) = ∫_0^y (t/4) e^{−t/2} e^{−(y−t)} dt
        //      = e^{−y}/4 · ∫_0^y t e^{t/2} dt
        //      = e^{−y}/4 · [4 + e^{y/2}(2y − 4)]
        let d = CharDecomp::new(&[2.0, 1.0, 2.0]).unwrap();
        assert_eq!(d.multiplicities(), &[2, 1]);
        for &y in &[0.0, 0.3, 1.0, 2.0, 5.0, 12.0] {
            let exact = f64::exp(-y) / 4.0 * (4.0 + (y / 2.0f64).exp() * (2.0 * y - 4.0));
            let got = mixture_pdf(&d, y);
            assert!((got - exact).abs() < 1e-13, "y={y}: {got} vs {exact}");
        }
    }

    #[test]
    fn near_equal_means_merge_or_fail() {
        let merged = CharDecomp::new(&[1.0, 1.0 + 1e-12]).unwrap();
        assert_eq!(merged.multiplicities(), &[2]);
        let r = characteristic_decomposition(&[1.0, 1.0 + 1e-7, 1.0 + 2e-7], 1e-9);
        assert!(matches!(r, Err(Error::Conditioning(_))));
    }

    #[test]
    fn bad_inputs() {
        assert!(CharDecomp::new(&[]).is_err());
        assert!(CharDecomp::new(&[1.0, 0.0]).is_err());
        assert!(CharDecomp::new(&[1.0, -2.0]).is_err());
        assert!(characteristic_decomposition(&[1.0], 0.0).is_err());
        assert!(characteristic_decomposition(&[1.0], 1e-2).is_err());
    }

    #[test]
    fn cdf_limits() {
        let d = CharDecomp::new(&[0.6, 0.4, 0.4]).unwrap();
        assert_eq!(mixture_cdf(&d, 0.0), 0.0);
        assert!((mixture_cdf(&d, 1e4) - 1.0).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..200 {
            let v = mixture_cdf(&d, k as f64 * 0.05);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn erlang_cdf_branches_agree() {
        for j in 1..6 {
            let x = j as f64;
            let below = erlang_cdf(j, x * (1.0 - 1e-12));
            let at = erlang_cdf(j, x);
            assert!((below - at).abs() < 1e-11);
        }
    }
}
