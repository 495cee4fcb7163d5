//! Exact rational arithmetic: Bernoulli numbers, binomials, and the
//! polynomial pair (p_j, q_j) defined by p_1(x) = (x - x^2)/2,
//! q_j = ∫_0^x p_j, p_{j+1}(x) = q_j(x) - x·q_j(1).
//!
//! Everything here is exact; floating point enters only through the
//! explicit conversion helpers.

use std::sync::{Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Arbitrary-precision signed rational, always stored in lowest terms with a
/// positive denominator (enforced by the underlying representation).
pub type ExactRational = BigRational;

/// Largest Bernoulli index served by [`bernoulli_exact`].
pub const MAX_BERNOULLI_INDEX: u32 = 64;

/// `n/d` as an [`ExactRational`]. Panics if `d == 0`.
pub fn rational(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `n` as an [`ExactRational`].
pub fn integer(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact `n!` as a [`BigInt`].
pub fn factorial_big(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n as u64 {
        acc *= i;
    }
    acc
}

/// Exact binomial coefficient `C(n, k)` as a [`BigInt`] (0 when `k > n`).
pub fn binomial_big(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k as u64 {
        num *= n as u64 - i;
        den *= i + 1;
    }
    num / den
}

/// Conversion of an arbitrary-size rational to the nearest `f64`. The
/// generic `to_f64` of the underlying representation converts numerator and
/// denominator separately and breaks down once either exceeds the f64
/// range, which the coefficients produced here routinely do.
pub fn rational_to_f64(r: &ExactRational) -> f64 {
    big_ratio_to_f64(r.numer(), r.denom())
}

/// num/den rounded to f64, for arbitrary magnitudes; den must be positive.
/// Does not require the fraction to be reduced.
pub fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = num.is_negative();
    let num = num.abs();

    // Scale the quotient to 63-64 significant bits, keep a sticky bit for
    // the discarded remainder, and let the u128 -> f64 conversion perform
    // the final rounding.
    let shift: i64 = 63 - (num.bits() as i64 - den.bits() as i64);
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num << shift as u64, den.clone())
    } else {
        (num, den << (-shift) as u64)
    };
    let rem = &scaled_num % &scaled_den;
    let mut q = (scaled_num / scaled_den)
        .to_u128()
        .expect("scaled quotient fits in 128 bits");
    if !rem.is_zero() {
        q |= 1;
    }
    let value = scale_by_pow2(q as f64, -shift);
    if negative {
        -value
    } else {
        value
    }
}

/// `x * 2^e` with the exponent applied in steps that stay inside the normal
/// range, so subnormal intermediates cannot eat mantissa bits.
fn scale_by_pow2(x: f64, e: i64) -> f64 {
    let mut value = x;
    let mut e = e;
    while e > 900 {
        value *= (2.0_f64).powi(900);
        e -= 900;
    }
    while e < -900 {
        value *= (2.0_f64).powi(-900);
        e += 900;
    }
    value * (2.0_f64).powi(e as i32)
}

/// Polynomial with exact rational coefficients; index i holds the
/// coefficient of x^i. Trailing zero coefficients are trimmed, so the zero
/// polynomial has an empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolynomial {
    coefficients: Vec<ExactRational>,
}

impl RationalPolynomial {
    pub fn new(mut coefficients: Vec<ExactRational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[ExactRational] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    /// Exact evaluation by Horner's rule.
    pub fn eval(&self, x: &ExactRational) -> ExactRational {
        let mut acc = ExactRational::zero();
        for c in self.coefficients.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluation with each coefficient rounded to `f64` first.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    /// Coefficients rounded to `f64`, lowest power first.
    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(rational_to_f64).collect()
    }

    /// Sum of |coefficients| as `f64`; bounds |p(x)| on [0, 1].
    pub fn abs_coeff_sum_f64(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| rational_to_f64(c).abs())
            .sum()
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> RationalPolynomial {
        let mut out = Vec::with_capacity(self.coefficients.len() + 1);
        out.push(ExactRational::zero());
        for (i, c) in self.coefficients.iter().enumerate() {
            out.push(c / integer(i as i64 + 1));
        }
        RationalPolynomial::new(out)
    }
}

fn bernoulli_table() -> &'static Vec<ExactRational> {
    static TABLE: OnceLock<Vec<ExactRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Σ_{j=0}^{n} C(n+1, j) B_j = 0, B_0 = 1. Built once for the whole
        // supported range; every later call is a table lookup.
        let n_max = MAX_BERNOULLI_INDEX as usize;
        let mut table: Vec<ExactRational> = Vec::with_capacity(n_max + 1);
        table.push(ExactRational::one());
        for n in 1..=n_max {
            let mut sum = ExactRational::zero();
            for (j, b) in table.iter().enumerate() {
                sum += ExactRational::from_integer(binomial_big(n as u32 + 1, j as u32)) * b;
            }
            let div = integer(-(n as i64 + 1));
            table.push(sum / div);
        }
        table
    })
}

/// The n-th Bernoulli number, exactly. Supported for `n <= 64`; repeated
/// calls hit a process-lifetime table.
pub fn bernoulli_exact(n: u32) -> Result<ExactRational> {
    if n > MAX_BERNOULLI_INDEX {
        return Err(Error::Range(format!(
            "bernoulli index {n} exceeds the supported maximum {MAX_BERNOULLI_INDEX}"
        )));
    }
    Ok(bernoulli_table()[n as usize].clone())
}

struct PolyTable {
    // pairs[j-1] = (p_j, q_j)
    pairs: Vec<(RationalPolynomial, RationalPolynomial)>,
}

impl PolyTable {
    fn extend_to(&mut self, j_max: usize) {
        if self.pairs.is_empty() {
            let half = rational(1, 2);
            let p1 = RationalPolynomial::new(vec![ExactRational::zero(), half.clone(), -half]);
            let q1 = p1.antiderivative();
            self.pairs.push((p1, q1));
        }
        while self.pairs.len() < j_max {
            let (_, q_prev) = self.pairs.last().unwrap();
            let q_at_one = q_prev.eval(&ExactRational::one());
            let mut coeffs = q_prev.coefficients().to_vec();
            if coeffs.len() < 2 {
                coeffs.resize(2, ExactRational::zero());
            }
            coeffs[1] -= &q_at_one;
            let p_next = RationalPolynomial::new(coeffs);
            let q_next = p_next.antiderivative();
            self.pairs.push((p_next, q_next));
        }
    }
}

fn poly_table() -> &'static Mutex<PolyTable> {
    static TABLE: OnceLock<Mutex<PolyTable>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(PolyTable { pairs: Vec::new() }))
}

/// The pairs `(p_j, q_j)` for `j = 1..=j_max`. Exact, memoized; growth of
/// the shared table is serialized behind a lock.
pub fn pq_polynomials(j_max: u32) -> Vec<(RationalPolynomial, RationalPolynomial)> {
    assert!(j_max >= 1, "pq_polynomials requires j_max >= 1");
    let mut table = poly_table().lock().unwrap();
    table.extend_to(j_max as usize);
    table.pairs[..j_max as usize].to_vec()
}

/// `p_j` alone (used by the zeta continuation remainder term).
pub fn p_polynomial(j: u32) -> RationalPolynomial {
    assert!(j >= 1);
    let mut table = poly_table().lock().unwrap();
    table.extend_to(j as usize);
    table.pairs[j as usize - 1].0.clone()
}

/// `q_j(1)`, exactly. Satisfies `B_{j+1} = (-1)^{j+1} q_j(1) (j+1)!`.
pub fn qj_at_one(j: u32) -> ExactRational {
    assert!(j >= 1, "qj_at_one requires j >= 1");
    let mut table = poly_table().lock().unwrap();
    table.extend_to(j as usize);
    table.pairs[j as usize - 1].1.eval(&ExactRational::one())
}

const CONST_DIGITS: u32 = 80;

/// π as a rational accurate to better than 10^-80, via Machin's formula
/// π = 16·arctan(1/5) − 4·arctan(1/239) with exact partial sums.
pub fn pi_rational() -> &'static ExactRational {
    static PI: OnceLock<ExactRational> = OnceLock::new();
    PI.get_or_init(|| {
        fn arctan_inv(x: i64, digits: u32) -> ExactRational {
            // |tail| < x^-(2i+1), stop once below 10^-(digits+5)
            let bound = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits + 5));
            let x2 = integer(x * x);
            let mut power = rational(1, x);
            let mut sum = power.clone();
            let mut i: i64 = 1;
            loop {
                power /= &x2;
                if power.abs() < bound {
                    break;
                }
                let term = &power / integer(2 * i + 1);
                if i % 2 == 1 {
                    sum -= term;
                } else {
                    sum += term;
                }
                i += 1;
            }
            sum
        }
        arctan_inv(5, CONST_DIGITS) * integer(16) - arctan_inv(239, CONST_DIGITS) * integer(4)
    })
}

/// √3 as a rational accurate to better than 10^-80 (integer square root of
/// 3·10^160 over 10^80).
pub fn sqrt3_rational() -> &'static ExactRational {
    static SQRT3: OnceLock<ExactRational> = OnceLock::new();
    SQRT3.get_or_init(|| {
        let scale = BigInt::from(10u32).pow(CONST_DIGITS);
        let target = BigInt::from(3) * &scale * &scale;
        let root = target.sqrt();
        BigRational::new(root, scale)
    })
}

/// Decimal digits of the fixed-point constants below.
pub const FIXED_POINT_DIGITS: u32 = 80;

fn to_fixed_point(r: &ExactRational) -> BigInt {
    let scale = BigInt::from(10u32).pow(FIXED_POINT_DIGITS);
    (r.numer() * scale + r.denom() / 2) / r.denom()
}

/// round(π^i · 10^80) for i = 0..=17, as plain integers; lets the moment
/// evaluators accumulate exactly over a single power-of-ten denominator
/// instead of reducing huge rationals term by term.
pub fn pi_fixed_powers() -> &'static Vec<BigInt> {
    static POWERS: OnceLock<Vec<BigInt>> = OnceLock::new();
    POWERS.get_or_init(|| {
        let pi = pi_rational();
        let mut power = ExactRational::one();
        (0..=17)
            .map(|_| {
                let fixed = to_fixed_point(&power);
                power *= pi;
                fixed
            })
            .collect()
    })
}

/// round(√3 · 10^80).
pub fn sqrt3_fixed() -> &'static BigInt {
    static FIXED: OnceLock<BigInt> = OnceLock::new();
    FIXED.get_or_init(|| to_fixed_point(sqrt3_rational()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_base_cases() {
        assert_eq!(bernoulli_exact(0).unwrap(), integer(1));
        assert_eq!(bernoulli_exact(1).unwrap(), rational(-1, 2));
        assert_eq!(bernoulli_exact(2).unwrap(), rational(1, 6));
    }

    #[test]
    fn bernoulli_twelve() {
        // Frozen from an independent run of the recurrence (exact arithmetic).
        assert_eq!(bernoulli_exact(12).unwrap(), rational(-691, 2730));
    }

    #[test]
    fn bernoulli_odd_vanish() {
        for n in (3..=21).step_by(2) {
            assert!(bernoulli_exact(n).unwrap().is_zero(), "B_{n} != 0");
        }
    }

    #[test]
    fn bernoulli_out_of_range() {
        assert!(matches!(bernoulli_exact(65), Err(Error::Range(_))));
        assert!(bernoulli_exact(64).is_ok());
    }

    #[test]
    fn p1_q1_coefficients() {
        let pairs = pq_polynomials(1);
        let (p1, q1) = &pairs[0];
        assert_eq!(
            p1.coefficients(),
            &[integer(0), rational(1, 2), rational(-1, 2)]
        );
        assert_eq!(
            q1.coefficients(),
            &[integer(0), integer(0), rational(1, 4), rational(-1, 6)]
        );
        assert_eq!(qj_at_one(1), rational(1, 12));
    }

    #[test]
    fn qj_at_one_values() {
        assert_eq!(qj_at_one(2), integer(0));
        // Frozen from the exact recursion; equals B_4/4! and B_6/6! up to
        // the (-1)^{j+1} sign of the Bernoulli link.
        assert_eq!(qj_at_one(3), rational(-1, 720));
        assert_eq!(qj_at_one(5), rational(1, 30240));
    }

    #[test]
    fn bernoulli_qj_factorial_identity() {
        for n in 2..=20u32 {
            let lhs = bernoulli_exact(n).unwrap();
            let sign = if n % 2 == 0 { 1 } else { -1 };
            let rhs = integer(sign)
                * qj_at_one(n - 1)
                * ExactRational::from_integer(factorial_big(n));
            assert_eq!(lhs, rhs, "B_n = (-1)^n q_(n-1)(1) n! fails at n={n}");
        }
    }

    #[test]
    fn pj_degree_and_roots() {
        let pairs = pq_polynomials(12);
        let one = ExactRational::one();
        let zero = ExactRational::zero();
        for (idx, (p, q)) in pairs.iter().enumerate() {
            let j = idx + 1;
            assert_eq!(p.degree(), Some(j + 1), "deg p_{j}");
            assert_eq!(q.degree(), Some(j + 2), "deg q_{j}");
            assert!(p.eval(&zero).is_zero(), "p_{j}(0)");
            assert!(p.eval(&one).is_zero(), "p_{j}(1)");
            assert!(q.eval(&zero).is_zero(), "q_{j}(0)");
        }
    }

    #[test]
    fn rational_to_f64_roundtrips() {
        assert_eq!(rational_to_f64(&rational(1, 3)), 1.0 / 3.0);
        assert_eq!(rational_to_f64(&rational(-7, 2)), -3.5);
        assert_eq!(rational_to_f64(&integer(0)), 0.0);
        // Values far outside the f64 exponent range of numerator/denominator
        // individually must still convert.
        let big = BigInt::from(10u32).pow(400);
        let r = BigRational::new(&big + BigInt::one(), big.clone());
        assert_eq!(rational_to_f64(&r), 1.0);
        let tiny = BigRational::new(BigInt::from(3), big.clone());
        assert_eq!(rational_to_f64(&tiny), 0.0);
        let huge = BigRational::new(big, BigInt::from(3));
        assert_eq!(rational_to_f64(&huge), f64::INFINITY);
    }

    #[test]
    fn pi_and_sqrt3_constants() {
        let pi = rational_to_f64(pi_rational());
        assert_eq!(pi, std::f64::consts::PI);
        let s3 = rational_to_f64(sqrt3_rational());
        assert_eq!(s3, 3.0_f64.sqrt());
        // 80-digit accuracy: (sqrt3)^2 within 10^-79 of 3.
        let sq = sqrt3_rational() * sqrt3_rational() - integer(3);
        let bound = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(79));
        assert!(sq.abs() < bound);
    }

    #[test]
    fn reduced_form_invariant() {
        // gcd(|num|, den) = 1 and den > 0 after arithmetic.
        let a = rational(6, 4) + rational(1, 6);
        assert_eq!(a, rational(5, 3));
        assert_eq!(a.denom(), &BigInt::from(3));
        let b = rational(1, 3) - rational(1, 3);
        assert!(b.is_zero());
        assert_eq!(b.denom(), &BigInt::from(1));
    }
}
