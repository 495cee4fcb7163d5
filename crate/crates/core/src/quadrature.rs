//! Globally adaptive one-dimensional quadrature on a 7-point Gauss /
//! 15-point Kronrod embedded pair, plus the complementary normal
//! distribution function.
//!
//! Subdivision is driven by a worst-first queue: the panel with the largest
//! local error estimate is bisected until the summed estimates meet the
//! requested tolerance. Node placement is fixed and the queue order is a
//! total order, so results are deterministic for a given integrand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

// 15-point Kronrod abscissae (positive half), 7-point Gauss weights, and
// 15-point Kronrod weights; the classical QUADPACK constants.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 10_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.abs_tol.is_finite() || self.abs_tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be positive, got {:e}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must lie in (0, 1e-6], got {:e}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 || self.max_subdivisions > 1_000_000 {
            return Err(Error::InvalidConfig(format!(
                "max_subdivisions must lie in 1..=10^6, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}

/// Value, attained error estimate, and work count of an integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: u32,
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.lo == other.lo
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Worst error first; ties broken by position for determinism.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// One G7/K15 evaluation over [lo, hi]. Returns the Kronrod value and a
/// rescaled error estimate; errors out on non-finite integrand values.
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let check = |x: f64, v: f64| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!(
                "integrand returned a non-finite value at x = {x}"
            )))
        }
    };

    let f_center = check(center, f(center))?;
    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    let mut res_abs = kronrod.abs();
    let mut values = [0.0f64; 15];
    values[7] = f_center;

    for i in 0..7 {
        let dx = half * XGK[i];
        let v_lo = check(center - dx, f(center - dx))?;
        let v_hi = check(center + dx, f(center + dx))?;
        values[i] = v_lo;
        values[14 - i] = v_hi;
        kronrod += WGK[i] * (v_lo + v_hi);
        res_abs += WGK[i] * (v_lo.abs() + v_hi.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (v_lo + v_hi);
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for i in 0..7 {
        res_asc += WGK[i] * ((values[i] - mean).abs() + (values[14 - i] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK error rescaling.
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0f64.min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Ok(Panel {
        lo,
        hi,
        value,
        error: err,
    })
}

/// Adaptive integral of `f` over [lo, hi].
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    integrate_with_breakpoints(f, lo, hi, &[], spec)
}

/// Adaptive integral with initial subdivision points (for integrands whose
/// interior peak location is known, e.g. from the J_m maximum estimate).
/// Breakpoints outside (lo, hi) are ignored.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!(
            "integration bounds must be finite with lo < hi, got [{lo}, {hi}]"
        )));
    }

    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges.insert(0, lo);
    edges.push(hi);

    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    for pair in edges.windows(2) {
        let panel = kronrod_panel(&f, pair[0], pair[1])?;
        total_value += panel.value;
        total_error += panel.error;
        heap.push(panel);
    }

    let mut subdivisions = 0u32;
    loop {
        let tolerance = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if total_error <= tolerance {
            return Ok(QuadratureResult {
                value: total_value,
                error_estimate: total_error,
                subdivisions_used: subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Convergence {
                reason: format!(
                    "quadrature exhausted {} subdivisions on [{lo}, {hi}]",
                    spec.max_subdivisions
                ),
                partial: total_value,
                error_estimate: total_error,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // Panel too narrow to split; tolerance is unreachable.
            return Err(Error::Convergence {
                reason: format!(
                    "panel [{:e}, {:e}] cannot be bisected further",
                    worst.lo, worst.hi
                ),
                partial: total_value,
                error_estimate: total_error,
            });
        }
        let left = kronrod_panel(&f, worst.lo, mid)?;
        let right = kronrod_panel(&f, mid, worst.hi)?;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// 1 − Φ(z), the upper tail of the standard normal distribution. Relative
/// error stays below 1e-12 for |z| ≤ 8 and the tail remains accurate (not
/// flushed) far beyond.
pub fn normal_cdf_complement(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::pq_polynomials;
    use crate::zeta::{hurwitz_zeta, ZetaEvalConfig};

    #[test]
    fn polynomial_exactness() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| x * x, 0.0, 1.0, &spec).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.subdivisions_used, 0); // K15 is exact for degree <= 22
        let r = integrate(|x| x.powi(10), 0.0, 1.0, &spec).unwrap();
        assert!((r.value - 1.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn p1_times_zeta_integral() {
        // ∫_0^1 p_1(x) ζ(2, x+1) dx = ζ'(0) + 1; oracle below is a central
        // finite difference of the continuation at s = 0.
        let spec = QuadratureSpec::default();
        let cfg = ZetaEvalConfig::default();
        let pairs = pq_polynomials(1);
        let p1: Vec<f64> = pairs[0].0.coefficients_f64();
        let r = integrate(
            |x| {
                let p = p1.iter().rev().fold(0.0, |acc, c| acc * x + c);
                p * hurwitz_zeta(2.0, x + 1.0, &cfg).unwrap()
            },
            0.0,
            1.0,
            &spec,
        )
        .unwrap();
        let h = 1e-5;
        let oracle = (hurwitz_zeta(h, 1.0, &cfg).unwrap() - hurwitz_zeta(-h, 1.0, &cfg).unwrap())
            / (2.0 * h)
            + 1.0;
        assert!((r.value - oracle).abs() < 1e-7, "{} vs {oracle}", r.value);
        assert!((r.value - 0.0810614667953273).abs() < 1e-9);
    }

    #[test]
    fn essential_singularity_at_endpoint() {
        // ∫_0^1 e^{-1/(1-x)}/sqrt(1-x) dx with the integrand defined as 0 at
        // x = 1; reference value from a 10^6-panel composite Simpson rule.
        let f = |x: f64| {
            let y = 1.0 - x;
            if y <= 0.0 {
                0.0
            } else {
                (-1.0 / y).exp() / y.sqrt()
            }
        };
        let n = 1_000_000usize;
        let h = 1.0 / n as f64;
        let mut simpson = crate::kahan::KahanSum::new();
        for i in 0..n {
            let a = i as f64 * h;
            simpson.add(h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)));
        }
        let oracle = simpson.value();
        let spec = QuadratureSpec::default();
        let r = integrate(f, 0.0, 1.0, &spec).unwrap();
        assert!((r.value - oracle).abs() < 1e-10, "{} vs {oracle}", r.value);
    }

    #[test]
    fn linearity_on_fixed_functions() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (3.0 * x).sin();
        let g = |x: f64| (-x).exp();
        let (alpha, beta) = (2.5, -1.25);
        let lhs = integrate(|x| alpha * f(x) + beta * g(x), 0.0, 2.0, &spec)
            .unwrap()
            .value;
        let rhs = alpha * integrate(f, 0.0, 2.0, &spec).unwrap().value
            + beta * integrate(g, 0.0, 2.0, &spec).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-11);
    }

    #[test]
    fn interval_additivity_on_argmax_integrand() {
        // The m = 3 argmax integrand: 3x² f(x)/(1-x³) on [0, 1-1e-3].
        let cfg = crate::partition::PentagonalSeriesConfig::default();
        let f = move |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            3.0 * x * x * crate::partition::euler_function(x, &cfg).unwrap() / (1.0 - x.powi(3))
        };
        let spec = QuadratureSpec::default();
        let (a, b, c) = (0.0, 0.5, 1.0 - 1e-3);
        let whole = integrate(f, a, c, &spec).unwrap();
        let left = integrate(f, a, b, &spec).unwrap();
        let right = integrate(f, b, c, &spec).unwrap();
        let tol = whole.error_estimate + left.error_estimate + right.error_estimate + 1e-12;
        assert!(
            (whole.value - (left.value + right.value)).abs() <= tol,
            "{} vs {}",
            whole.value,
            left.value + right.value
        );
    }

    #[test]
    fn rejects_non_finite_integrand() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, &spec);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn reports_exhausted_subdivisions_with_partial() {
        let spec = QuadratureSpec {
            max_subdivisions: 3,
            rel_tol: 1e-12,
            abs_tol: 1e-300,
        };
        // Sharp peak the budget cannot resolve.
        let r = integrate(|x| 1.0 / ((x - 0.37).powi(2) + 1e-12), 0.0, 1.0, &spec);
        match r {
            Err(Error::Convergence { partial, error_estimate, .. }) => {
                assert!(partial.is_finite());
                assert!(error_estimate > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn breakpoints_are_honored() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| if x < 0.5 { x } else { 1.0 - x };
        let direct = integrate_with_breakpoints(f, 0.0, 1.0, &[0.5], &spec).unwrap();
        assert!((direct.value - 0.25).abs() < 1e-13);
        // Out-of-range breakpoints are ignored.
        let r = integrate_with_breakpoints(|x| x, 0.0, 1.0, &[-1.0, 2.0], &spec).unwrap();
        assert!((r.value - 0.5).abs() < 1e-13);
    }

    #[test]
    fn invalid_inputs() {
        let spec = QuadratureSpec::default();
        assert!(matches!(integrate(|x| x, 1.0, 0.0, &spec), Err(Error::Domain(_))));
        assert!(matches!(
            integrate(|x| x, 0.0, f64::INFINITY, &spec),
            Err(Error::Domain(_))
        ));
        let bad = QuadratureSpec {
            rel_tol: 0.5,
            ..QuadratureSpec::default()
        };
        assert!(matches!(integrate(|x| x, 0.0, 1.0, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn normal_tail_at_zero_and_symmetry() {
        assert_eq!(normal_cdf_complement(0.0), 0.5);
        for i in 0..100 {
            let z = -4.0 + 8.0 * i as f64 / 99.0;
            let lhs = normal_cdf_complement(-z);
            let rhs = 1.0 - normal_cdf_complement(z);
            assert!((lhs - rhs).abs() < 1e-14, "z = {z}");
        }
    }

    #[test]
    fn normal_tail_against_quadrature_oracle() {
        // Oracle: integrate the standard normal density from z to 40.
        let spec = QuadratureSpec {
            abs_tol: 1e-16,
            rel_tol: 1e-6,
            max_subdivisions: 100_000,
        };
        let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for &z in &[
            std::f64::consts::PI * 3.0f64.sqrt() / 3.0,
            0.5,
            1.0,
            2.0,
            5.0,
        ] {
            let oracle = integrate(density, z, 40.0, &spec).unwrap().value;
            let v = normal_cdf_complement(z);
            assert!(
                ((v - oracle) / oracle).abs() < 1e-12,
                "z = {z}: {v} vs {oracle}"
            );
        }
        // Frozen from the quadrature oracle at z = π√3/3.
        let z = std::f64::consts::PI * 3.0f64.sqrt() / 3.0;
        assert!((normal_cdf_complement(z) - 0.034854310219210294).abs() < 1e-12);
    }
}
