//! Closed-form query budgets, error exponents and stage-one parameter choices.
//!
//! All quantities are real-valued; callers round up when they allocate queries.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetReport<T> {
    pub alpha_c: T,
    /// Exponent rate of oracle weighted majority voting.
    pub gamma_oracle: T,
    /// Exponent rate of plain majority voting over randomly assigned workers.
    pub gamma_mv: T,
    /// Rate under a wrong type match (weights inverted between two clusters).
    pub gamma_u: T,
    /// Rate under correct clustering and type matching.
    pub gamma_m: T,
    pub l_oracle: T,
    pub l_mv: T,
    pub l_type: T,
    pub l_alg1: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOneRecommendation<T> {
    pub zeta: T,
    pub r: usize,
    pub l: usize,
    pub n_min: usize,
    /// Same-type answer agreement probability.
    pub agree_same: T,
    /// Different-type answer agreement probability.
    pub agree_diff: T,
}

/// Upper bounds on the three failure events of the clustering pipeline.
/// Values are not clipped to 1; use [`ErrorBounds::clipped`] for probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds<T> {
    pub clustering: T,
    pub small_type: T,
    pub type_match: T,
}

impl<T: Scalar> ErrorBounds<T> {
    pub fn clipped(&self) -> Self {
        ErrorBounds {
            clustering: self.clustering.min(T::one()),
            small_type: self.small_type.min(T::one()),
            type_match: self.type_match.min(T::one()),
        }
    }
}

fn check_alpha<T: Scalar>(alpha_c: T) -> Result<()> {
    if alpha_c > T::zero() && alpha_c < T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("alpha_c = {alpha_c} outside (0, 1)")))
    }
}

/// `(2p-1, 2q-1, d)` in the scalar type.
fn biases<T: Scalar>(params: &ModelParams<T>) -> (T, T, T) {
    let two = T::lit(2.0);
    (
        two * params.p() - T::one(),
        two * params.q() - T::one(),
        T::from_count(params.d()),
    )
}

pub fn gamma_u<T: Scalar>(params: &ModelParams<T>) -> T {
    let (a, b, d) = biases(params);
    let two = T::lit(2.0);
    let num = two * a * b + (d - two) * b * b;
    num * num / (two * (a * a + (d - T::one()) * b * b))
}

pub fn gamma_m<T: Scalar>(params: &ModelParams<T>) -> T {
    let (a, b, d) = biases(params);
    (a * a + (d - T::one()) * b * b) / T::lit(2.0)
}

/// Probability that two same-type workers give the same answer to a random task.
pub fn agreement_same_type<T: Scalar>(params: &ModelParams<T>) -> T {
    let (p, q) = (params.p(), params.q());
    let d = T::from_count(params.d());
    let one = T::one();
    let sq = |x: T| x * x + (one - x) * (one - x);
    sq(p) / d + (d - one) * sq(q) / d
}

/// Probability that two workers of different types give the same answer.
pub fn agreement_diff_type<T: Scalar>(params: &ModelParams<T>) -> T {
    let (p, q) = (params.p(), params.q());
    let d = T::from_count(params.d());
    let one = T::one();
    let two = T::lit(2.0);
    two * (p * q + (one - p) * (one - q)) / d + (d - two) * (q * q + (one - q) * (one - q)) / d
}

pub fn budget_report<T: Scalar>(params: &ModelParams<T>, alpha_c: T) -> Result<BudgetReport<T>> {
    check_alpha(alpha_c)?;
    let (a, b, d) = biases(params);
    let one = T::one();
    let two = T::lit(2.0);
    let gap = params.p() - params.q();
    let gap2_half = gap * gap / two;
    let ln_inv = (one / alpha_c).ln();
    let ln_6d3 = ((T::lit(6.0) * d + T::lit(3.0)) / alpha_c).ln();
    let ln_6d = (T::lit(6.0) * d / alpha_c).ln();

    let energy = a * a + (d - one) * b * b;
    let bias_sum = a + (d - one) * b;
    let gamma_u = gamma_u(params);

    let l_type_a = two * d / (gap2_half + b * b / two) * ln_6d3;
    let l_type_b = two * d / gap2_half * ln_6d;

    Ok(BudgetReport {
        alpha_c,
        gamma_oracle: (energy / d).sqrt(),
        gamma_mv: bias_sum / d,
        gamma_u,
        gamma_m: energy / two,
        l_oracle: two * d / energy * ln_inv,
        l_mv: two * d * d / (bias_sum * bias_sum) * ln_inv,
        l_type: l_type_a.min(l_type_b),
        l_alg1: two * d / (gap2_half + gamma_u) * ln_6d3,
    })
}

fn ceil_count<T: Scalar>(x: T) -> usize {
    x.ceil().to_usize().unwrap_or(usize::MAX).max(1)
}

/// Agreement threshold, stage-one task count `r`, per-cluster queries `l` and
/// minimum worker count for a target error fraction `alpha_c` with `n` workers.
pub fn stage1_recommendation<T: Scalar>(
    params: &ModelParams<T>,
    alpha_c: T,
    n: usize,
) -> Result<StageOneRecommendation<T>> {
    if n < 2 {
        return Err(Error::InvalidDimension("need n >= 2".into()));
    }
    let report = budget_report(params, alpha_c)?;
    let two = T::lit(2.0);
    let d = T::from_count(params.d());
    let nn = T::from_count(n);
    let gap = params.p() - params.q();
    let gap4 = gap * gap * gap * gap;

    let same = agreement_same_type(params);
    let diff = agreement_diff_type(params);
    let r = d * d / (two * gap4) * (T::lit(3.0) * nn * (nn - T::one()) / (two * alpha_c)).ln();
    let l = report.l_alg1 / (two * d);
    let n_min = (T::lit(8.0) * d * (T::lit(3.0) * d / alpha_c).ln()).max(report.l_alg1);

    Ok(StageOneRecommendation {
        zeta: (same + diff) / two,
        r: ceil_count(r),
        l: ceil_count(l),
        n_min: ceil_count(n_min),
        agree_same: same,
        agree_diff: diff,
    })
}

/// `C(n,2) exp(-2(p-q)^4 r / d^2)`, `d exp(-(1 - ld/n)^2 n / (2d))` (1 when
/// `ld >= n`) and `2d exp(-(p-q)^2 l / 2)`.
pub fn theoretical_error_bounds<T: Scalar>(
    params: &ModelParams<T>,
    r: usize,
    l: usize,
    n: usize,
) -> Result<ErrorBounds<T>> {
    if r == 0 || l == 0 || n == 0 {
        return Err(Error::InvalidDimension("r, l and n must be positive".into()));
    }
    let two = T::lit(2.0);
    let one = T::one();
    let d = T::from_count(params.d());
    let (rr, ll, nn) = (T::from_count(r), T::from_count(l), T::from_count(n));
    let gap = params.p() - params.q();
    let gap2 = gap * gap;

    let pairs = nn * (nn - one) / two;
    let clustering = pairs * (-two * gap2 * gap2 * rr / (d * d)).exp();
    let small_type = if l * params.d() >= n {
        one
    } else {
        let slack = one - ll * d / nn;
        d * (-slack * slack * nn / (two * d)).exp()
    };
    let type_match = two * d * (-gap2 * ll / two).exp();
    Ok(ErrorBounds { clustering, small_type, type_match })
}

/// Whether `m >= c n^3` holds with `c = 1`. Advisory only.
pub fn asymptotic_regime(m: usize, n: usize) -> bool {
    (m as f64) >= (n as f64).powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(d: usize, p: f64, q: f64) -> ModelParams<f64> {
        ModelParams::new(d, p, q).unwrap()
    }

    #[test]
    fn report_spot_values() {
        let r = budget_report(&params(3, 0.9, 0.6), 0.1).unwrap();
        // (2*0.8*0.2 + 0.2^2)^2 / (2 (0.8^2 + 2*0.2^2)) = 0.1296 / 1.44
        assert_relative_eq!(r.gamma_u, 0.09, max_relative = 1e-12);
        assert_relative_eq!(r.l_oracle, 6.0 / 0.72 * 10f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(r.l_mv, 18.0 / 1.44 * 10f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(r.l_oracle, 19.188, epsilon = 1e-3);
        assert_relative_eq!(r.l_mv, 28.782, epsilon = 1e-3);
        assert_relative_eq!(r.gamma_m, 0.36, max_relative = 1e-12);
        assert_relative_eq!(r.gamma_oracle, (0.24f64).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.gamma_mv, 1.2 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.l_alg1, 6.0 / 0.135 * 210f64.ln(), max_relative = 1e-12);
        assert!(r.l_oracle < r.l_mv);
    }

    #[test]
    fn report_in_f32() {
        let p = ModelParams::<f32>::new(3, 0.9, 0.6).unwrap();
        let r = budget_report(&p, 0.1).unwrap();
        assert_relative_eq!(r.gamma_u, 0.09, max_relative = 1e-5);
        assert_relative_eq!(r.l_oracle, 19.188, epsilon = 1e-2);
    }

    #[test]
    fn gamma_u_vanishes_at_half() {
        for d in [2, 3, 5, 10] {
            assert_eq!(gamma_u(&params(d, 0.9, 0.5)), 0.0);
            assert!(gamma_u(&params(d, 0.9, 0.55)) > 0.0);
        }
    }

    #[test]
    fn alpha_range() {
        let p = params(3, 0.9, 0.6);
        assert!(budget_report(&p, 0.0).is_err());
        assert!(budget_report(&p, 1.0).is_err());
        assert!(stage1_recommendation(&p, 0.1, 1).is_err());
    }

    #[test]
    fn zeta_midpoint() {
        let s = stage1_recommendation(&params(3, 0.9, 0.5), 0.1, 30).unwrap();
        assert_relative_eq!(s.zeta, 0.5 + 0.16 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(s.zeta, 0.553_333, epsilon = 1e-6);

        let s = stage1_recommendation(&params(3, 0.9, 0.6), 0.1, 30).unwrap();
        assert_relative_eq!(s.agree_same, 0.62, max_relative = 1e-12);
        assert_relative_eq!(s.agree_diff, 0.56, max_relative = 1e-12);
        assert_relative_eq!(s.zeta, 0.59, max_relative = 1e-12);
    }

    #[test]
    fn recommendation_values() {
        let p = params(3, 0.9, 0.6);
        let s = stage1_recommendation(&p, 0.1, 238).unwrap();
        let rep = budget_report(&p, 0.1).unwrap();
        let r = 9.0 / (2.0 * 0.3f64.powi(4)) * (3.0 * 238.0 * 237.0 / 0.2f64).ln();
        assert_eq!(s.r, r.ceil() as usize);
        assert_eq!(s.l, (rep.l_alg1 / 6.0).ceil() as usize);
        assert_eq!(s.n_min, rep.l_alg1.max(24.0 * 90f64.ln()).ceil() as usize);
        assert_eq!(s.l, 40);
        assert_eq!(s.n_min, 238);
    }

    #[test]
    fn recommendation_shrinks_with_alpha() {
        let p = params(3, 0.9, 0.6);
        let mut prev = stage1_recommendation(&p, 0.01, 50).unwrap();
        for alpha in [0.05, 0.1, 0.3, 0.6, 0.9, 0.99] {
            let s = stage1_recommendation(&p, alpha, 50).unwrap();
            assert!(s.r <= prev.r && s.l <= prev.l);
            prev = s;
        }
    }

    #[test]
    fn error_bound_values() {
        let p = params(3, 0.9, 0.6);
        let b = theoretical_error_bounds(&p, 10, 100, 1000).unwrap();
        assert_relative_eq!(b.type_match, 6.0 * (-4.5f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(b.type_match, 0.0666, epsilon = 1e-4);

        // n = 2: one pair; pick r so that 2 (p-q)^4 r / d^2 = ln 2
        let gap4 = 0.3f64.powi(4);
        let r_exact = 2f64.ln() * 9.0 / (2.0 * gap4);
        let b = theoretical_error_bounds(&p, r_exact.round() as usize, 1, 2).unwrap();
        let expected = (-2.0 * gap4 * r_exact.round() / 9.0).exp();
        assert_relative_eq!(b.clustering, expected, max_relative = 1e-12);
        assert_relative_eq!(b.clustering, 0.5, epsilon = 1e-3);

        let far = theoretical_error_bounds(&p, 1_000_000, 1, 10).unwrap();
        assert_eq!(far.clustering, 0.0);

        let vacuous = theoretical_error_bounds(&p, 10, 10, 20).unwrap();
        assert_eq!(vacuous.small_type, 1.0);
        let small = theoretical_error_bounds(&p, 10, 10, 300).unwrap();
        assert_relative_eq!(small.small_type, 3.0 * (-0.81f64 * 50.0).exp(), max_relative = 1e-12);
        assert!(theoretical_error_bounds(&p, 0, 1, 1).is_err());
    }

    #[test]
    fn oracle_never_worse_than_mv_on_grid() {
        for &p in &[0.7, 0.8, 0.9, 1.0] {
            for &q in &[0.5, 0.55, 0.6, 0.7] {
                if q >= p {
                    continue;
                }
                for &d in &[2, 3, 5, 10] {
                    for &a in &[0.01, 0.1] {
                        let r = budget_report(&params(d, p, q), a).unwrap();
                        assert!(r.l_oracle <= r.l_mv * (1.0 + 1e-12), "p={p} q={q} d={d}");
                        assert!(r.l_oracle.is_finite() && r.l_oracle > 0.0);
                        assert!(r.l_alg1.is_finite() && r.l_type.is_finite());
                    }
                }
            }
        }
    }

    #[test]
    fn alg1_scaling() {
        // q = 1/2: L_alg1 / (d ln(d/alpha)) bounded; q > 1/2: L_alg1 / ln(d/alpha) bounded
        let a = 0.1;
        let ratios_half: Vec<f64> = [2usize, 4, 8, 16, 32, 64, 128]
            .iter()
            .map(|&d| budget_report(&params(d, 0.9, 0.5), a).unwrap().l_alg1 / (d as f64 * (d as f64 / a).ln()))
            .collect();
        let ratios_pos: Vec<f64> = [2usize, 4, 8, 16, 32, 64, 128]
            .iter()
            .map(|&d| budget_report(&params(d, 0.9, 0.7), a).unwrap().l_alg1 / (d as f64 / a).ln())
            .collect();
        for w in ratios_half.windows(2).chain(ratios_pos.windows(2)) {
            assert!(w[1] <= w[0] * 1.5, "{:?}", w);
        }
        assert!(ratios_pos.last().unwrap() < &100.0);
    }
}
