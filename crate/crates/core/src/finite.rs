//! Exact finite-n quantities: moments of the scaled maximal gap W_(n)/n,
//! the continuous and discrete finite argmax probabilities, and the
//! expected total draw count n·H_n.
//!
//! The continuous integrals substitute x = e^{-t} and run over [0, 1] on
//! the shared quadrature; the discrete probability is an exact series with
//! a geometric tail envelope.

use crate::quadrature::{integrate, QuadratureSpec};
use crate::{Error, Result};

/// Validated (n, m, k) triple: n coupon types, gap offset m (the gap
/// W_{n-m} or D_{n-m}), moment order k.
#[derive(Debug, Clone, Copy)]
pub struct FiniteModelParams {
    pub n: u32,
    pub m: u32,
    pub k: u32,
}

impl FiniteModelParams {
    pub fn new(n: u32, m: u32, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range("n must be positive".into()));
        }
        if m == 0 || m > n {
            return Err(Error::Range(format!(
                "offset m must satisfy 1 <= m <= n, got m={m}, n={n}"
            )));
        }
        if k == 0 {
            return Err(Error::Range("moment order k must be positive".into()));
        }
        Ok(Self { n, m, k })
    }
}

/// 1 - Π_{j=1}^{n} (1 - x^j), computed without cancellation: for small x by
/// the complement recurrence r += (1-r)·x^j, for large x via the product of
/// stable factors (bounded away from 1 by the j = 1 factor).
fn one_minus_gap_product(x: f64, n: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        let mut r = 0.0f64;
        let mut xj = 1.0f64;
        for _ in 1..=n {
            xj *= x;
            r += (1.0 - r) * xj;
            if xj < 1e-18 * r {
                break;
            }
        }
        r
    } else {
        let ln_x = f64::ln_1p(x - 1.0);
        let mut product = 1.0f64;
        for j in 1..=n {
            let factor = -f64::exp_m1(j as f64 * ln_x);
            product *= factor;
            if product < 1e-320 {
                return 1.0;
            }
            if j as f64 * ln_x < -45.0 {
                break;
            }
        }
        1.0 - product
    }
}

/// E((W_(n)/n)^k) = ∫₀^∞ k t^{k-1} (1 - Π_{j=1}^n (1 - e^{-jt})) dt,
/// mapped to [0, 1] by x = e^{-t}.
pub fn finite_max_moment(n: u32, k: u32, spec: &QuadratureSpec) -> Result<f64> {
    if n == 0 || n > 10_000 {
        return Err(Error::Range(format!("n must lie in 1..=10^4, got {n}")));
    }
    if k == 0 || k > 8 {
        return Err(Error::Range(format!("moment order must lie in 1..=8, got {k}")));
    }
    let kf = k as f64;
    let integrand = move |x: f64| -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let t = -x.ln();
        kf * t.powi(k as i32 - 1) * one_minus_gap_product(x, n) / x
    };
    Ok(integrate(integrand, 0.0, 1.0, spec)?.value)
}

/// P(W_{n-m} = W_(n)) = ∫₀^∞ m e^{-my} Π_{j=1, j≠m}^{n} (1 - e^{-jy}) dy;
/// the j = m factor of the full product cancels the (1 - e^{-my})^{-1}
/// pole, so the integrand is evaluated with that factor skipped. In
/// x = e^{-y} coordinates: ∫₀¹ m x^{m-1} Π_{j≠m} (1 - x^j) dx.
pub fn finite_argmax_continuous(m: u32, n: u32, spec: &QuadratureSpec) -> Result<f64> {
    let params = FiniteModelParams::new(n, m, 1)?;
    if n > 10_000 {
        return Err(Error::Range(format!("n must lie in 1..=10^4, got {n}")));
    }
    let (m, n) = (params.m, params.n);
    let integrand = move |x: f64| -> f64 {
        if x <= 0.0 {
            return if m == 1 { 1.0 } else { 0.0 };
        }
        let ln_x = if x > 0.5 { f64::ln_1p(x - 1.0) } else { x.ln() };
        let mut product = (m as f64) * x.powi(m as i32 - 1);
        for j in 1..=n {
            if j == m {
                continue;
            }
            product *= -f64::exp_m1(j as f64 * ln_x);
            if product == 0.0 {
                return 0.0;
            }
            if j as f64 * ln_x < -45.0 {
                break;
            }
        }
        product
    };
    Ok(integrate(integrand, 0.0, 1.0, spec)?.value)
}

/// Strict-maximum probability p'_{m,n} for the discrete model:
/// Σ_{j≥1} (1-m/n)^{j-1} (m/n) Π_{i=1, i≠m}^{n} (1 - (1-i/n)^{j-1}),
/// truncated once the geometric envelope (1-m/n)^J of the remaining tail
/// falls below tail_tol.
pub fn discrete_argmax_probability(m: u32, n: u32, tail_tol: f64) -> Result<f64> {
    let params = FiniteModelParams::new(n, m, 1)?;
    if !(tail_tol > 0.0 && tail_tol <= 1e-8) {
        return Err(Error::InvalidConfig(format!(
            "tail_tol must lie in (0, 1e-8], got {tail_tol:e}"
        )));
    }
    let (m, n) = (params.m, params.n);
    if n == 1 {
        return Ok(1.0);
    }
    if m == n {
        // D_0 ≡ 1 can never strictly exceed every later gap.
        return Ok(0.0);
    }

    // ln(1 - i/n) for i = 1..n; the i = n factor is 1 for j >= 2.
    let ln_q: Vec<f64> = (1..=n)
        .map(|i| f64::ln_1p(-(i as f64) / n as f64))
        .collect();
    let ln_ratio = ln_q[m as usize - 1];

    let mut sum = 0.0f64;
    let mut j = 1u64;
    loop {
        // Geometric envelope of everything not yet added:
        // Σ_{i>=j} (1-m/n)^{i-1} (m/n) = (1-m/n)^{j-1}.
        let envelope = (((j - 1) as f64) * ln_ratio).exp();
        if envelope < tail_tol {
            return Ok(sum);
        }
        let jm1 = (j - 1) as f64;
        // Products are accumulated in log space; factors with exponent
        // below -45 are 1 to machine precision and are skipped.
        let mut ln_term = jm1 * ln_ratio + (m as f64 / n as f64).ln();
        let mut zero_factor = false;
        for (idx, &lq) in ln_q.iter().enumerate() {
            let i = idx as u32 + 1;
            if i == m {
                continue;
            }
            let exponent = jm1 * lq;
            if exponent < -45.0 {
                break; // factor is 1 - e^{exponent} = 1; later i even closer
            }
            let factor = -f64::exp_m1(exponent);
            if factor <= 0.0 {
                zero_factor = true;
                break;
            }
            ln_term += factor.ln();
        }
        if !zero_factor && ln_term > -700.0 {
            sum += ln_term.exp();
        }
        j += 1;
    }
}

/// Expected number of draws n·H_n, with the harmonic sum accumulated from
/// its smallest terms.
pub fn expected_total_draws(n: u32) -> f64 {
    assert!(n >= 1, "expected_total_draws requires n >= 1");
    let h: f64 = (1..=n).rev().map(|i| 1.0 / i as f64).sum();
    n as f64 * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxprob::argmax_probability;
    use crate::moments::moment_series;

    #[test]
    fn max_moment_small_cases() {
        let spec = QuadratureSpec::default();
        // Single Exp(1) variable.
        let v = finite_max_moment(1, 1, &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        // Inclusion-exclusion: 1 + 1/2 - 1/3 = 7/6.
        let v = finite_max_moment(2, 1, &spec).unwrap();
        assert!((v - 7.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn max_moment_approaches_limit() {
        let spec = QuadratureSpec::default();
        let v = finite_max_moment(100, 1, &spec).unwrap();
        let limit = moment_series(1).unwrap();
        // Scaled form of the O(1) error bound at k = 1.
        assert!((100.0 * v - 100.0 * limit).abs() <= 1.0, "{v} vs {limit}");
    }

    #[test]
    fn max_moment_error_bounded_and_shrinking() {
        let spec = QuadratureSpec::default();
        for k in 1..=2u32 {
            let limit = moment_series(k).unwrap();
            let mut prev = f64::INFINITY;
            for &n in &[50u32, 100, 200] {
                let v = finite_max_moment(n, k, &spec).unwrap();
                let scaled = (n as f64).powi(k as i32) * (v - limit).abs();
                assert!(scaled <= 1.0, "n={n} k={k}: scaled deviation {scaled}");
                // Non-increasing up to quadrature-level noise.
                assert!(
                    scaled <= prev + 1e-6 * (n as f64).powi(k as i32),
                    "n={n} k={k}"
                );
                prev = scaled;
            }
        }
    }

    #[test]
    fn argmax_continuous_small_cases() {
        let spec = QuadratureSpec::default();
        let v = finite_argmax_continuous(1, 1, &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // P(Exp(1) beats Exp(2)) = 2/3 by the competing-exponentials ratio.
        let v = finite_argmax_continuous(1, 2, &spec).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn argmax_continuous_approaches_infinite_model() {
        let spec = QuadratureSpec::default();
        let finite = finite_argmax_continuous(1, 100, &spec).unwrap();
        let infinite = argmax_probability(1, &spec).unwrap();
        // Distribution-function comparison bound: |difference| ≤ 2/(n+1).
        assert!(
            (finite - infinite).abs() <= 2.0 / 101.0,
            "{finite} vs {infinite}"
        );
    }

    #[test]
    fn argmax_continuous_normalizes() {
        let spec = QuadratureSpec::default();
        for &n in &[2u32, 5, 20] {
            let total: f64 = (1..=n)
                .map(|m| finite_argmax_continuous(m, n, &spec).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-8, "n={n}: total {total}");
        }
    }

    #[test]
    fn discrete_argmax_small_cases() {
        assert!((discrete_argmax_probability(1, 2, 1e-12).unwrap() - 0.5).abs() < 1e-10);
        // D_0 ≡ 1 can never strictly exceed D_1 >= 1.
        assert_eq!(discrete_argmax_probability(2, 2, 1e-12).unwrap(), 0.0);
        assert_eq!(discrete_argmax_probability(1, 1, 1e-12).unwrap(), 1.0);
        assert!(discrete_argmax_probability(3, 2, 1e-12).is_err());
        assert!(discrete_argmax_probability(1, 2, 1e-3).is_err());
    }

    #[test]
    fn discrete_argmax_approaches_continuous() {
        let spec = QuadratureSpec::default();
        let discrete = discrete_argmax_probability(1, 200, 1e-9).unwrap();
        let infinite = argmax_probability(1, &spec).unwrap();
        assert!(
            (discrete - infinite).abs() < 0.02,
            "{discrete} vs {infinite}"
        );
    }

    #[test]
    fn discrete_argmax_subnormalized() {
        for &n in &[2u32, 5, 20] {
            let total: f64 = (1..=n)
                .map(|m| discrete_argmax_probability(m, n, 1e-10).unwrap())
                .sum();
            assert!(total <= 1.0 + 1e-9, "n={n}: total {total}");
            // Ties leak mass, so strictly below 1 for n >= 2.
            assert!(total < 1.0, "n={n}: total {total}");
        }
    }

    #[test]
    fn total_draws() {
        assert_eq!(expected_total_draws(1), 1.0);
        assert!((expected_total_draws(2) - 3.0).abs() < 1e-14);
        assert!((expected_total_draws(10) - 29.289682539682538).abs() < 1e-10);
    }

    #[test]
    fn params_validation() {
        assert!(FiniteModelParams::new(0, 1, 1).is_err());
        assert!(FiniteModelParams::new(5, 0, 1).is_err());
        assert!(FiniteModelParams::new(5, 6, 1).is_err());
        assert!(FiniteModelParams::new(5, 5, 0).is_err());
        assert!(FiniteModelParams::new(5, 5, 1).is_ok());
        assert!(matches!(
            finite_max_moment(0, 1, &QuadratureSpec::default()),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            finite_max_moment(10, 9, &QuadratureSpec::default()),
            Err(Error::Range(_))
        ));
    }
}
