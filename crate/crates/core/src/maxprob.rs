//! Argmax probabilities of the infinite model: p_m = P(X_m = M) as the
//! integral ∫₀¹ m x^{m-1} f(x)/(1-x^m) dx with f Euler's function, the
//! π√(2m)·e^{-π√(2/3)√m} asymptotic main term, and the Hardy–Ramanujan
//! comparison integral.
//!
//! The integrand vanishes double-exponentially toward x = 1: integration
//! stops at 1 - 1e-3, where the envelope exponent is already below -1600,
//! so the discarded tail is under 1e-300 and the removable x → 1 point is
//! never evaluated.

use crate::partition::{euler_function, euler_function_ln, PentagonalSeriesConfig};
use crate::quadrature::{integrate_with_breakpoints, QuadratureSpec};
use crate::{Error, Result};

/// Upper integration limit; the (HR) envelope bounds the discarded tail by
/// exp(-π²/(6·10⁻³) + π²/12) < e^-1600 per unit length.
const CUTOFF: f64 = 1.0 - 1e-3;

/// Largest m served by the integral-based operations.
pub const MAX_ARGMAX_INDEX: u32 = 10_000;

/// Pentagonal series / log-product switch point for the integrand's f(x).
/// Below it the alternating series is cheap and accurate; above it only the
/// cancellation-free log form retains relative accuracy in binary64.
const SERIES_SWITCH: f64 = 0.9;

/// One row of the argmax table: quadrature value, asymptotic main term, and
/// the Hardy–Ramanujan comparison integral.
#[derive(Debug, Clone, Copy)]
pub struct ArgmaxRow {
    pub m: u32,
    pub exact: f64,
    pub asymptotic: f64,
    pub hr_integral: f64,
}

/// Location estimate of the integrand-factor maximum in y = 1-x coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PeakEstimate {
    pub m: u32,
    pub y0: f64,
    pub b_eff: f64,
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m > MAX_ARGMAX_INDEX {
        return Err(Error::Range(format!(
            "m must lie in 1..={MAX_ARGMAX_INDEX}, got {m}"
        )));
    }
    Ok(())
}

/// Euler's function for the integrand: pentagonal series away from 1,
/// exp of the log-space product close to 1.
fn euler_for_integrand(x: f64, cfg: &PentagonalSeriesConfig) -> f64 {
    let value = if x <= SERIES_SWITCH {
        euler_function(x, cfg)
    } else {
        euler_function_ln(x).map(f64::exp)
    };
    value.unwrap_or(f64::NAN)
}

/// m x^{m-1} f(x) / (1 - x^m) on [0, CUTOFF].
fn argmax_integrand(m: u32, x: f64, cfg: &PentagonalSeriesConfig) -> f64 {
    if x <= 0.0 {
        return if m == 1 { 1.0 } else { 0.0 };
    }
    let mf = m as f64;
    let xm1 = x.powi(m as i32 - 1);
    let one_minus_xm = -f64::exp_m1(mf * f64::ln_1p(x - 1.0));
    mf * xm1 * euler_for_integrand(x, cfg) / one_minus_xm
}

/// P(X_m = M) by adaptive quadrature of the exact integral.
pub fn argmax_probability(m: u32, spec: &QuadratureSpec) -> Result<f64> {
    check_m(m)?;
    let cfg = PentagonalSeriesConfig::default();
    let scale = argmax_asymptotic(m);
    // The default absolute tolerance would swamp the value for large m
    // (p_400 ≈ 5e-21); tie it to the known magnitude so the relative
    // criterion governs.
    let effective = QuadratureSpec {
        abs_tol: (spec.abs_tol * scale.min(1.0)).max(f64::MIN_POSITIVE),
        ..*spec
    };
    let hints = subdivision_hints(m);
    let result = integrate_with_breakpoints(
        |x| argmax_integrand(m, x, &cfg),
        0.0,
        CUTOFF,
        &hints,
        &effective,
    )?;
    Ok(result.value)
}

/// Main term π√(2m)·e^{-π√(2/3)·√m} of the m → ∞ law.
pub fn argmax_asymptotic(m: u32) -> f64 {
    assert!(m >= 1, "argmax_asymptotic requires m >= 1");
    let pi = std::f64::consts::PI;
    let mf = m as f64;
    pi * (2.0 * mf).sqrt() * (-pi * (2.0f64 / 3.0).sqrt() * mf.sqrt()).exp()
}

/// The comparison integral with f replaced by its Hardy–Ramanujan envelope.
pub fn hr_integral(m: u32, spec: &QuadratureSpec) -> Result<f64> {
    check_m(m)?;
    let pi = std::f64::consts::PI;
    let scale = argmax_asymptotic(m);
    let effective = QuadratureSpec {
        abs_tol: (spec.abs_tol * scale.min(1.0)).max(f64::MIN_POSITIVE),
        ..*spec
    };
    let hints = subdivision_hints(m);
    let integrand = move |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let mf = m as f64;
        let y = 1.0 - x;
        let exponent = -pi * pi / (6.0 * y) + pi * pi / 12.0;
        if exponent < -745.0 {
            return 0.0;
        }
        let one_minus_xm = -f64::exp_m1(mf * f64::ln_1p(-y));
        mf * x.powi(m as i32 - 1) / one_minus_xm * (2.0 * pi / y).sqrt() * exponent.exp()
    };
    let result = integrate_with_breakpoints(integrand, 0.0, CUTOFF, &hints, &effective)?;
    Ok(result.value)
}

/// Closed form of the m = 1 comparison integral:
/// 4√3·e^{π²/12}·(1 − Φ(π√3/3)).
pub fn hr_integral_m1_closed() -> f64 {
    let pi = std::f64::consts::PI;
    4.0 * 3.0f64.sqrt()
        * (pi * pi / 12.0).exp()
        * crate::quadrature::normal_cdf_complement(pi * 3.0f64.sqrt() / 3.0)
}

/// Maximum location of J_m(y) = (1-y)^{m-1} y^{-1/2} e^{-b/y} with
/// b = π²/6, used to seed adaptive refinement near the integrand peak.
pub fn peak_location(m: u32) -> Result<PeakEstimate> {
    if m < 2 {
        return Err(Error::Range(format!(
            "peak_location requires m >= 2 (the 2m-3 denominator), got {m}"
        )));
    }
    let b = std::f64::consts::PI.powi(2) / 6.0;
    let mf = m as f64;
    let y0 = (-0.5 - b + (4.0 * b * mf + b * b - 5.0 * b + 0.25).sqrt()) / (2.0 * mf - 3.0);
    Ok(PeakEstimate { m, y0, b_eff: b })
}

fn subdivision_hints(m: u32) -> Vec<f64> {
    match peak_location(m) {
        Ok(peak) if peak.y0 > 1.0 - CUTOFF => vec![1.0 - peak.y0],
        _ => Vec::new(),
    }
}

/// Assemble the three columns for each requested m, in input order.
pub fn table1(rows: &[u32], spec: &QuadratureSpec) -> Result<Vec<ArgmaxRow>> {
    rows.iter()
        .map(|&m| {
            Ok(ArgmaxRow {
                m,
                exact: argmax_probability(m, spec)?,
                asymptotic: argmax_asymptotic(m),
                hr_integral: hr_integral(m, spec)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// printed value with its half-unit-in-last-place tolerance
    fn assert_printed(value: f64, printed: f64, ulp: f64, what: &str) {
        assert!(
            (value - printed).abs() <= 0.5001 * ulp,
            "{what}: computed {value:e}, printed {printed:e}"
        );
    }

    #[test]
    fn argmax_probability_table_rows() {
        let spec = QuadratureSpec::default();
        assert_printed(argmax_probability(1, &spec).unwrap(), 0.516, 1e-3, "p_1");
        assert_printed(argmax_probability(10, &spec).unwrap(), 4.41e-3, 1e-5, "p_10");
        assert_printed(argmax_probability(100, &spec).unwrap(), 3.24e-10, 1e-12, "p_100");
    }

    #[test]
    fn asymptotic_table_rows() {
        assert_printed(argmax_asymptotic(1), 0.342, 1e-3, "asym_1");
        assert_printed(argmax_asymptotic(50), 4.17e-7, 1e-9, "asym_50");
        assert_printed(argmax_asymptotic(100), 3.22e-10, 1e-12, "asym_100");
    }

    #[test]
    fn hr_integral_table_rows() {
        let spec = QuadratureSpec::default();
        assert_printed(hr_integral(1, &spec).unwrap(), 0.550, 1e-3, "hr_1");
        assert_printed(hr_integral(5, &spec).unwrap(), 3.68e-2, 1e-4, "hr_5");
        assert_printed(hr_integral(100, &spec).unwrap(), 3.27e-10, 1e-12, "hr_100");
    }

    #[test]
    fn hr_closed_form_matches_quadrature() {
        let spec = QuadratureSpec::default();
        let closed = hr_integral_m1_closed();
        let direct = hr_integral(1, &spec).unwrap();
        assert!((closed - direct).abs() < 1e-8, "{closed} vs {direct}");
        // Components, frozen from the quadrature oracle.
        let pi = std::f64::consts::PI;
        assert!(((pi * pi / 12.0).exp() - 2.276108151625734).abs() < 1e-12);
        assert!(
            (crate::quadrature::normal_cdf_complement(pi * 3.0f64.sqrt() / 3.0)
                - 0.034854310219210294)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn peak_location_formula_and_oracle() {
        let peak = peak_location(100).unwrap();
        assert!((peak.y0 - 0.1187977).abs() < 1e-6);
        let sqrt_bm = (peak.b_eff / 100.0).sqrt();
        assert!((sqrt_bm - 0.1282550).abs() < 1e-6);
        // |y0 - sqrt(b/m)| should be O(1/m) scale at m = 100.
        assert!((peak.y0 - sqrt_bm).abs() < 2.0 / 100.0);

        // Oracle: golden-section maximization of J_m on (0, 1).
        let b = peak.b_eff;
        let j_m = |y: f64| -> f64 { 99.0 * f64::ln_1p(-y) - 0.5 * y.ln() - b / y };
        let (mut lo, mut hi) = (1e-4, 0.999);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let c = lo + phi * (hi - lo);
            if j_m(a) > j_m(c) {
                hi = c;
            } else {
                lo = a;
            }
        }
        let numeric = 0.5 * (lo + hi);
        assert!((peak.y0 - numeric).abs() < 1e-7, "{} vs {numeric}", peak.y0);

        let far = peak_location(10_000).unwrap();
        assert!((far.y0 - (far.b_eff / 1e4).sqrt()).abs() < 1e-3);
        assert!(peak_location(1).is_err());
    }

    #[test]
    fn peak_tracks_sqrt_bm_with_one_over_m_error() {
        // m·|y0 - sqrt(b/m)| stays bounded over m in [10, 10^4]; the first
        // correction term is (b + 1/2)/2 ≈ 1.07.
        for &m in &[10u32, 32, 100, 316, 1000, 3162, 10_000] {
            let peak = peak_location(m).unwrap();
            let drift = m as f64 * (peak.y0 - (peak.b_eff / m as f64).sqrt()).abs();
            assert!(drift < 2.0, "m={m}: scaled drift {drift}");
        }
    }

    #[test]
    fn table_assembly() {
        let spec = QuadratureSpec::default();
        assert!(table1(&[], &spec).unwrap().is_empty());
        let rows = table1(&[1], &spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_printed(rows[0].exact, 0.516, 1e-3, "table p_1");
    }

    #[test]
    fn argmax_strictly_decreasing() {
        let spec = QuadratureSpec::default();
        let mut prev = f64::INFINITY;
        for m in 1..=50u32 {
            let p = argmax_probability(m, &spec).unwrap();
            assert!(p < prev, "p_m not decreasing at m = {m}");
            prev = p;
        }
    }

    #[test]
    fn sandwich_and_ratio_on_printed_rows() {
        let spec = QuadratureSpec::default();
        for &m in &[1u32, 2, 3, 4, 5, 10, 50, 100] {
            let exact = argmax_probability(m, &spec).unwrap();
            let asym = argmax_asymptotic(m);
            let hr = hr_integral(m, &spec).unwrap();
            assert!(hr > exact && exact > asym, "sandwich fails at m = {m}");
        }
        let ratio_100 = argmax_probability(100, &spec).unwrap() / argmax_asymptotic(100);
        assert!((0.99..1.02).contains(&ratio_100), "ratio at 100: {ratio_100}");
        let ratio_400 = argmax_probability(400, &spec).unwrap() / argmax_asymptotic(400);
        assert!(
            (ratio_400 - 1.0).abs() < (ratio_100 - 1.0).abs(),
            "ratio does not tighten: {ratio_100} -> {ratio_400}"
        );
    }

    #[test]
    fn out_of_range_rejected() {
        let spec = QuadratureSpec::default();
        assert!(matches!(argmax_probability(0, &spec), Err(Error::Range(_))));
        assert!(matches!(
            argmax_probability(10_001, &spec),
            Err(Error::Range(_))
        ));
        assert!(matches!(hr_integral(0, &spec), Err(Error::Range(_))));
    }
}
