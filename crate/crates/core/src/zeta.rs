//! Riemann and Hurwitz zeta evaluation.
//!
//! The workhorse is a shift-then-correct analytic continuation: sum the
//! leading terms of the defining series directly, then correct the shifted
//! remainder ζ(s, a+N) with the q_j(1) expansion
//!
//! ```text
//! ζ(s, A) = A^{1-s}/(s-1) + A^{-s}/2 + Σ_{j=1}^{k+1} s(s+1)…(s+j-1) q_j(1) A^{-s-j} + R_k,
//! R_k    = s(s+1)…(s+k+2) ∫_0^1 p_{k+2}(x) ζ(s+k+3, x+A) dx,
//! ```
//!
//! dropping R_k only after certifying it below tolerance. Closed forms are
//! provided for even arguments (via Bernoulli numbers), negative integers
//! (polynomial in a), and odd arguments at a ∈ {p/2, p/3, p/4, p/6} (via the
//! K_m(q) coefficients). ζ'(-k) comes from the differentiated expansion plus
//! a quadrature over p_{k+1}(x) ζ(2, x+1).

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num::integer::gcd;
use num::traits::{One, Zero};

use crate::exact::{
    bernoulli_exact, factorial_big, integer, p_polynomial, pi_rational, qj_at_one, rational,
    rational_to_f64, sqrt3_rational, ExactRational,
};
use crate::kahan::KahanSum;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::{Error, Result};

/// Fraction p/q with q ∈ {2, 3, 4, 6}, 0 < p < q, gcd(p, q) = 1; the
/// arguments at which odd Hurwitz values have closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecialPoint {
    p: u32,
    q: u32,
}

impl SpecialPoint {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if !matches!(q, 2 | 3 | 4 | 6) {
            return Err(Error::Domain(format!(
                "special point denominator must be 2, 3, 4 or 6, got {q}"
            )));
        }
        if p == 0 || p >= q {
            return Err(Error::Domain(format!(
                "special point numerator must satisfy 0 < p < q, got {p}/{q}"
            )));
        }
        if gcd(p, q) != 1 {
            return Err(Error::Domain(format!("special point {p}/{q} is not reduced")));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for SpecialPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for SpecialPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| Error::Domain(format!("expected a literal fraction p/q, got {s:?}")))?;
        let p: u32 = p
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("invalid fraction numerator in {s:?}")))?;
        let q: u32 = q
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("invalid fraction denominator in {s:?}")))?;
        SpecialPoint::new(p, q)
    }
}

/// Truncation control for the shift-then-correct continuation.
#[derive(Debug, Clone, Copy)]
pub struct ZetaEvalConfig {
    /// Requested relative accuracy, in (0, 1e-6].
    pub rel_tol: f64,
    /// Leading series terms summed directly before the tail correction.
    pub direct_terms: u32,
    /// The k of the correction expansion; at most 12.
    pub correction_order: u32,
}

impl Default for ZetaEvalConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            direct_terms: 32,
            correction_order: 8,
        }
    }
}

impl ZetaEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must lie in (0, 1e-6], got {:e}",
                self.rel_tol
            )));
        }
        if self.direct_terms < 8 {
            return Err(Error::InvalidConfig(format!(
                "direct_terms must be at least 8, got {}",
                self.direct_terms
            )));
        }
        if self.correction_order == 0 || self.correction_order > 12 {
            return Err(Error::InvalidConfig(format!(
                "correction_order must lie in 1..=12, got {}",
                self.correction_order
            )));
        }
        Ok(())
    }
}

const MAX_CORRECTION_ORDER: usize = 12;

/// q_j(1) as f64 for j = 1..=MAX_CORRECTION_ORDER+1, index j.
fn qj1_f64() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_CORRECTION_ORDER + 2];
        for (j, slot) in t.iter_mut().enumerate().skip(1) {
            *slot = rational_to_f64(&qj_at_one(j as u32));
        }
        t
    })
}

/// Upper bound of |p_j| on [0,1] (sum of |coefficients|), index j.
fn p_bound_f64() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_CORRECTION_ORDER + 3];
        for (j, slot) in t.iter_mut().enumerate().skip(1) {
            *slot = p_polynomial(j as u32).abs_coeff_sum_f64();
        }
        t
    })
}

/// Coefficient c with ζ(2j) = c·π^{2j}: c = (-1)^{j+1} 2^{2j-1} B_{2j} / (2j)!.
pub fn zeta_even_pi_coefficient(two_j: u32) -> Result<ExactRational> {
    if two_j < 2 || two_j > 64 || two_j % 2 != 0 {
        return Err(Error::Range(format!(
            "zeta_even argument must be an even integer in [2, 64], got {two_j}"
        )));
    }
    let j = two_j / 2;
    let sign = if j % 2 == 0 { -1 } else { 1 };
    let two_pow = ExactRational::from_integer(num::BigInt::from(2u8).pow(two_j - 1));
    let b = bernoulli_exact(two_j)?;
    Ok(integer(sign) * two_pow * b / ExactRational::from_integer(factorial_big(two_j)))
}

/// ζ(2j) by the Bernoulli closed form, relative error below 1e-14.
pub fn zeta_even(two_j: u32) -> Result<f64> {
    let coeff = zeta_even_pi_coefficient(two_j)?;
    Ok(rational_to_f64(&coeff) * std::f64::consts::PI.powi(two_j as i32))
}

/// Hurwitz zeta ζ(s, a) for real s ≠ 1, a > 0 (analytic continuation for
/// s ≤ 1). Errors if the configured correction order cannot certify the
/// requested tolerance.
pub fn hurwitz_zeta(s: f64, a: f64, cfg: &ZetaEvalConfig) -> Result<f64> {
    cfg.validate()?;
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Domain(format!("hurwitz_zeta requires a > 0, got {a}")));
    }
    if !s.is_finite() {
        return Err(Error::Domain(format!("hurwitz_zeta requires finite s, got {s}")));
    }
    if (s - 1.0).abs() < 1e-6 {
        return Err(Error::Domain(format!(
            "hurwitz_zeta is poled at s = 1; refusing |s - 1| < 1e-6 (s = {s})"
        )));
    }

    // For s < 0 the direct terms grow like (n+a)^|s| and only feed
    // cancellation noise (the correction formula is the accurate path, and
    // is exact at negative integers), so the direct stage is kept short.
    let n = if s < 0.0 { cfg.direct_terms.min(8) } else { cfg.direct_terms };
    let k = cfg.correction_order as usize;
    let qj1 = qj1_f64();
    let p_bound = p_bound_f64();

    let mut direct = KahanSum::new();
    let mut term_scale = 0.0f64;
    for i in 0..n {
        let term = (i as f64 + a).powf(-s);
        term_scale = term_scale.max(term.abs());
        direct.add(term);
    }

    let big_a = a + n as f64;
    let a_pow_neg_s = big_a.powf(-s);
    let pole_term = big_a.powf(1.0 - s) / (s - 1.0);
    term_scale = term_scale.max(pole_term.abs()).max(direct.value().abs());
    let mut value = direct.value() + pole_term + 0.5 * a_pow_neg_s;

    let mut pochhammer = s;
    let mut a_pow = a_pow_neg_s;
    let inv_a = 1.0 / big_a;
    for j in 1..=k + 1 {
        a_pow *= inv_a;
        value += pochhammer * qj1[j] * a_pow;
        pochhammer *= s + j as f64;
    }
    // pochhammer is now s(s+1)…(s+k+1); one more factor closes the remainder
    // prefactor s(s+1)…(s+k+2).
    pochhammer *= s + k as f64 + 2.0;

    let t = s + k as f64 + 3.0;
    let remainder_bound = if pochhammer == 0.0 {
        0.0
    } else if t > 1.0 {
        // ζ(t, x+A) ≤ ζ(t, A) ≤ A^-t + A^(1-t)/(t-1) for x ≥ 0.
        pochhammer.abs() * p_bound[k + 2] * (big_a.powf(-t) + big_a.powf(1.0 - t) / (t - 1.0))
    } else {
        return Err(Error::Convergence {
            reason: format!(
                "correction order {k} cannot bound the continuation remainder at s = {s} \
                 (needs s + correction_order + 3 > 1)"
            ),
            partial: value,
            error_estimate: f64::INFINITY,
        });
    };

    // Near the trivial zeros the value itself cancels to the rounding noise
    // of the summed terms; a certified remainder below that noise floor is
    // as good as zero.
    let noise_floor = f64::EPSILON * term_scale;
    if remainder_bound > (cfg.rel_tol * value.abs()).max(noise_floor) && remainder_bound > 1e-300 {
        return Err(Error::Convergence {
            reason: format!(
                "continuation remainder {remainder_bound:e} exceeds rel_tol {:e} at (s, a) = ({s}, {a})",
                cfg.rel_tol
            ),
            partial: value,
            error_estimate: remainder_bound,
        });
    }
    Ok(value)
}

/// ζ(-k, a) by the closed polynomial formula of the continuation at s = -k:
/// -a^{k+1}/(k+1) + a^k/2 + Σ_{j=1}^{k} (-1)^j q_j(1) k!/(k-j)! a^{k-j}.
pub fn hurwitz_zeta_neg(k: u32, a: f64) -> Result<f64> {
    if k > 30 {
        return Err(Error::Range(format!(
            "hurwitz_zeta_neg supports k <= 30, got {k}"
        )));
    }
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Domain(format!("hurwitz_zeta_neg requires a > 0, got {a}")));
    }
    let kf = k as f64;
    let mut value = -a.powi(k as i32 + 1) / (kf + 1.0) + 0.5 * a.powi(k as i32);
    let mut falling = 1.0; // k!/(k-j)! built incrementally
    for j in 1..=k {
        falling *= (k - j + 1) as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * rational_to_f64(&qj_at_one(j)) * falling * a.powi((k - j) as i32);
    }
    Ok(value)
}

/// Exact coefficient c with K_m(q) = c·π^{2m+1}; the bracket is evaluated in
/// exact rationals (it cancels catastrophically in floating point).
pub fn km_pi_coefficient(m: u32, q: u32) -> Result<ExactRational> {
    if m == 0 || m > 16 {
        return Err(Error::Range(format!("K_m(q) supports 1 <= m <= 16, got m = {m}")));
    }
    if !matches!(q, 3 | 4 | 6) {
        return Err(Error::Range(format!("K_m(q) supports q in {{3, 4, 6}}, got q = {q}")));
    }
    let two_m = 2 * m;
    let fact_2m = ExactRational::from_integer(factorial_big(two_m));
    let mut bracket = rational(q as i64, 2);
    for j in 0..=m {
        let b = bernoulli_exact(2 * j)?;
        let q_pow = ExactRational::from_integer(num::BigInt::from(q).pow(2 * j));
        let denom = ExactRational::from_integer(
            factorial_big(two_m - 2 * j + 1) * factorial_big(2 * j),
        );
        bracket -= b * &fact_2m * q_pow / denom;
    }
    let sign = if m % 2 == 0 { 1 } else { -1 };
    let two_pow = ExactRational::from_integer(num::BigInt::from(2u8).pow(two_m + 1));
    Ok(bracket * integer(sign) * two_pow / (integer(2) * fact_2m))
}

/// K_m(q) of the odd special values, with the inner bracket exact and a
/// single float conversion at the end.
pub fn km_coefficient(m: u32, q: u32) -> Result<f64> {
    let coeff = km_pi_coefficient(m, q)?;
    Ok(rational_to_f64(&coeff) * std::f64::consts::PI.powi(2 * m as i32 + 1))
}

/// Decomposition ζ(2m+1, p/q) = zeta_mult·ζ(2m+1) + (pi + sqrt3_pi·√3)·π^{2m+1},
/// all three coefficients exact rationals.
#[derive(Debug, Clone)]
pub struct SpecialOddParts {
    pub zeta_mult: ExactRational,
    pub pi: ExactRational,
    pub sqrt3_pi: ExactRational,
}

/// Closed-form decomposition of ζ(2m+1, p/q) over {ζ(2m+1), π^{2m+1}, √3·π^{2m+1}}.
pub fn special_odd_parts(m: u32, point: SpecialPoint) -> Result<SpecialOddParts> {
    if m == 0 || m > 16 {
        return Err(Error::Range(format!(
            "special odd values support 1 <= m <= 16, got m = {m}"
        )));
    }
    let s = 2 * m + 1;
    let pow = |base: u32| ExactRational::from_integer(num::BigInt::from(base).pow(s));
    let zero = ExactRational::zero();
    // The valid numerators are 1 and q-1; the K-part enters with + for p = 1.
    let sign = if point.p == 1 { integer(1) } else { integer(-1) };
    let parts = match point.q {
        2 => SpecialOddParts {
            zeta_mult: pow(2) - ExactRational::one(),
            pi: zero.clone(),
            sqrt3_pi: zero,
        },
        3 => SpecialOddParts {
            zeta_mult: (pow(3) - ExactRational::one()) / integer(2),
            pi: zero,
            sqrt3_pi: sign * km_pi_coefficient(m, 3)? / integer(3),
        },
        4 => SpecialOddParts {
            zeta_mult: ExactRational::from_integer(num::BigInt::from(2u8).pow(2 * m))
                * (pow(2) - ExactRational::one()),
            pi: sign * km_pi_coefficient(m, 4)? / integer(2),
            sqrt3_pi: zero,
        },
        6 => SpecialOddParts {
            zeta_mult: (pow(2) - ExactRational::one()) * (pow(3) - ExactRational::one())
                / integer(2),
            pi: zero,
            sqrt3_pi: sign * (km_pi_coefficient(m, 6)? - km_pi_coefficient(m, 3)?) / integer(3),
        },
        _ => unreachable!("SpecialPoint enforces q in {{2,3,4,6}}"),
    };
    Ok(parts)
}

/// ζ(2m+1, p/q) by the closed form. The rational-π part is combined in
/// exact arithmetic before a single rounding; the ζ(2m+1) part enters as
/// zeta_mult·(ζ(s)−1) + zeta_mult to dodge the large cancellation between
/// the two addends at q ∈ {4, 6}.
pub fn hurwitz_special_odd(m: u32, point: SpecialPoint) -> Result<f64> {
    let parts = special_odd_parts(m, point)?;
    let s = (2 * m + 1) as f64;
    // ζ(s) - 1 = ζ(s, 2).
    let zeta_minus_one = hurwitz_zeta(s, 2.0, &ZetaEvalConfig::default())?;
    let pi_pow = pi_rational().pow(2 * m as i32 + 1);
    let exact = &parts.zeta_mult
        + (&parts.pi + &parts.sqrt3_pi * sqrt3_rational()) * pi_pow;
    Ok(rational_to_f64(&parts.zeta_mult) * zeta_minus_one + rational_to_f64(&exact))
}

/// ζ(k, 1/2) = (2^k − 1)ζ(k), valid for every integer k ≥ 2; serves the
/// even case at the half-integer point.
pub fn hurwitz_half(k: u32, cfg: &ZetaEvalConfig) -> Result<f64> {
    if k < 2 {
        return Err(Error::Range(format!("hurwitz_half requires k >= 2, got {k}")));
    }
    let mult = (2.0f64).powi(k as i32) - 1.0;
    // (2^k - 1)(ζ(k) - 1) + (2^k - 1): both addends positive, no cancellation.
    Ok(mult * hurwitz_zeta(k as f64, 2.0, cfg)? + mult)
}

/// ζ(s) for integer s ≥ 2: even via the Bernoulli closed form, odd via the
/// continuation at a = 1.
pub fn zeta_integer(s: u32, cfg: &ZetaEvalConfig) -> Result<f64> {
    if s < 2 {
        return Err(Error::Range(format!("zeta_integer requires s >= 2, got {s}")));
    }
    if s % 2 == 0 && s <= 64 {
        zeta_even(s)
    } else {
        hurwitz_zeta(s as f64, 1.0, cfg)
    }
}

/// ζ'(-k) for 0 ≤ k ≤ 10 by the differentiated continuation:
/// -1/(k+1)² + Σ_{j=1}^{k} (-1)^{j+1} k!/(k-j)! q_j(1) [H_k - H_{k-j}]
/// + (-1)^k k! ∫_0^1 p_{k+1}(x) ζ(2, x+1) dx.
pub fn zeta_derivative_neg(k: u32, quad: &QuadratureSpec) -> Result<f64> {
    if k > 10 {
        return Err(Error::Range(format!(
            "zeta_derivative_neg supports k <= 10, got {k}"
        )));
    }
    let harmonic = |n: u32| -> f64 { (1..=n).rev().map(|i| 1.0 / i as f64).sum() };
    let h_k = harmonic(k);

    let mut value = -1.0 / ((k + 1) as f64 * (k + 1) as f64);
    let mut falling = 1.0;
    for j in 1..=k {
        falling *= (k - j + 1) as f64;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        value += sign * falling * rational_to_f64(&qj_at_one(j)) * (h_k - harmonic(k - j));
    }

    let coeffs = p_polynomial(k + 1).coefficients_f64();
    let cfg = ZetaEvalConfig::default();
    let integrand = move |x: f64| -> f64 {
        let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        match hurwitz_zeta(2.0, x + 1.0, &cfg) {
            Ok(z) => p * z,
            Err(_) => f64::NAN,
        }
    };
    let integral = integrate(integrand, 0.0, 1.0, quad)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let k_factorial: f64 = (1..=k).map(|i| i as f64).product::<f64>().max(1.0);
    Ok(value + sign * k_factorial * integral.value)
}
