//! Euler's function f(x) = Π_{j≥1}(1 − x^j), the pentagonal-number series,
//! the integer partition function p(m), and the Hardy–Ramanujan growth
//! estimates for both.

use std::sync::{Mutex, OnceLock};

use num::bigint::BigUint;
use num::traits::{One, Zero};

use crate::kahan::KahanSum;
use crate::{Error, Result};

/// Truncation control for the pentagonal series.
#[derive(Debug, Clone, Copy)]
pub struct PentagonalSeriesConfig {
    /// Stop once the next term pair falls below `term_tol * max(1, |partial|)`.
    pub term_tol: f64,
    /// Hard cap on the number of term pairs.
    pub max_terms: u32,
}

impl Default for PentagonalSeriesConfig {
    fn default() -> Self {
        Self {
            term_tol: 1e-15,
            max_terms: 8192,
        }
    }
}

impl PentagonalSeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.term_tol > 0.0 && self.term_tol <= 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "term_tol must lie in (0, 1e-12], got {:e}",
                self.term_tol
            )));
        }
        if self.max_terms < 64 {
            return Err(Error::InvalidConfig(format!(
                "max_terms must be at least 64, got {}",
                self.max_terms
            )));
        }
        Ok(())
    }
}

/// Generalized pentagonal exponents (m(3m-1)/2, m(3m+1)/2) for m = 1, 2, ….
#[inline]
fn pentagonal_pair(m: u64) -> (u64, u64) {
    (m * (3 * m - 1) / 2, m * (3 * m + 1) / 2)
}

/// Euler's function by the pentagonal series
/// f(x) = 1 + Σ_m (−1)^m (x^{m(3m−1)/2} + x^{m(3m+1)/2}).
///
/// The series alternates with decreasing term pairs, so the truncation
/// error is bounded by the first omitted pair.
pub fn euler_function(x: f64, cfg: &PentagonalSeriesConfig) -> Result<f64> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "euler_function requires x in [0, 1), got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let mut sum = KahanSum::new();
    sum.add(1.0);
    for m in 1..=cfg.max_terms as u64 {
        let (g1, g2) = pentagonal_pair(m);
        let term = pow_u64(x, g1) + pow_u64(x, g2);
        if m % 2 == 1 {
            sum.add(-term);
        } else {
            sum.add(term);
        }
        if term < cfg.term_tol * sum.value().abs().max(1.0) {
            return Ok(sum.value());
        }
    }
    Err(Error::Convergence {
        reason: format!(
            "pentagonal series did not settle within {} term pairs at x = {x}",
            cfg.max_terms
        ),
        partial: sum.value(),
        error_estimate: cfg.term_tol,
    })
}

#[inline]
fn pow_u64(x: f64, mut e: u64) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// ln f(x) via the Lambert-type rearrangement
/// ln f(x) = −Σ_{k≥1} x^k / (k (1 − x^k)),
/// which is cancellation-free and therefore keeps full relative accuracy
/// arbitrarily close to 1 (where the alternating pentagonal series drowns in
/// rounding noise). Used by integrands that need relative accuracy near 1.
/// Term count grows like 1/(1−x); inputs past the iteration cap (x within
/// ~5e-6 of 1) report a convergence error.
pub fn euler_function_ln(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "euler_function_ln requires x in [0, 1), got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_x = if x > 0.5 { f64::ln_1p(x - 1.0) } else { x.ln() };
    let mut sum = 0.0f64;
    let mut k = 1u64;
    // While x^k > 1/2, 1 - x^k cancels; expm1 keeps it exact. Afterwards a
    // running power with direct subtraction is cheaper and just as accurate.
    let mut xk = loop {
        let kl = k as f64 * ln_x;
        let xk = kl.exp();
        if xk <= 0.5 {
            break xk;
        }
        sum += xk / (k as f64 * -f64::exp_m1(kl));
        k += 1;
    };
    const MAX_ITERATIONS: u64 = 10_000_000;
    loop {
        let term = xk / (k as f64 * (1.0 - xk));
        sum += term;
        if term < 1e-17 * sum {
            return Ok(-sum);
        }
        if k >= MAX_ITERATIONS {
            return Err(Error::Convergence {
                reason: format!("euler_function_ln did not settle within {MAX_ITERATIONS} terms at x = {x}"),
                partial: -sum,
                error_estimate: term * 2.0 / (1.0 - x),
            });
        }
        xk *= x;
        k += 1;
    }
}

/// The Hardy–Ramanujan x → 1 estimate √(2π/(1−x))·e^{−π²/(6(1−x)) + π²/12}.
/// Returns exact 0 once the exponent passes the binary64 underflow boundary.
pub fn euler_function_asymptotic(x: f64) -> f64 {
    assert!(
        x > 0.0 && x < 1.0,
        "euler_function_asymptotic requires 0 < x < 1, got {x}"
    );
    let y = 1.0 - x;
    let pi = std::f64::consts::PI;
    let exponent = -pi * pi / (6.0 * y) + pi * pi / 12.0;
    if exponent < -745.0 {
        return 0.0;
    }
    (2.0 * pi / y).sqrt() * exponent.exp()
}

const MAX_PARTITION_INDEX: u32 = 100_000;

fn partition_table() -> &'static Mutex<Vec<BigUint>> {
    static TABLE: OnceLock<Mutex<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![BigUint::one()]))
}

/// Exact p(m) by the pentagonal recurrence
/// p(m) = Σ_{k≥1} (−1)^{k+1} [p(m − k(3k−1)/2) + p(m − k(3k+1)/2)],
/// memoized for the process lifetime.
pub fn partition_count(m: u32) -> Result<BigUint> {
    if m > MAX_PARTITION_INDEX {
        return Err(Error::Range(format!(
            "partition_count supports m <= {MAX_PARTITION_INDEX}, got {m}"
        )));
    }
    let mut table = partition_table().lock().unwrap();
    while table.len() <= m as usize {
        let i = table.len() as u64;
        let mut positive = BigUint::zero();
        let mut negative = BigUint::zero();
        let mut k = 1u64;
        loop {
            let (g1, g2) = pentagonal_pair(k);
            if g1 > i {
                break;
            }
            let acc = if k % 2 == 1 { &mut positive } else { &mut negative };
            *acc += &table[(i - g1) as usize];
            if g2 <= i {
                *acc += &table[(i - g2) as usize];
            }
            k += 1;
        }
        // p(i) = positive - negative; always non-negative.
        table.push(positive - negative);
    }
    Ok(table[m as usize].clone())
}

/// Hardy–Ramanujan main term e^{π√(2m/3)} / (4m√3).
pub fn partition_asymptotic(m: u32) -> f64 {
    assert!(m >= 1, "partition_asymptotic requires m >= 1");
    let pi = std::f64::consts::PI;
    let exponent = pi * (2.0f64 / 3.0).sqrt() * (m as f64).sqrt();
    exponent.exp() / (4.0 * m as f64 * 3.0f64.sqrt())
}
