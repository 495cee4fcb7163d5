//! Seeded Monte Carlo for both coupon-collector models.
//!
//! Every trial runs on its own deterministic substream, derived from the
//! run seed and the trial index by a 64-bit avalanche mix, so the summary
//! is a pure function of (seed, trials) no matter how trials are scheduled;
//! aggregation is performed in trial-index order.

use std::collections::BTreeMap;

use crate::finite::{discrete_argmax_probability, finite_argmax_continuous, finite_max_moment};
use crate::moments::moment_series;
use crate::quadrature::QuadratureSpec;
use crate::{Error, Result};

/// Hard cap on trials × n per run.
pub const DRAW_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Discrete,
    Continuous,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Discrete => write!(f, "discrete"),
            Model::Continuous => write!(f, "continuous"),
        }
    }
}

/// Simulation request.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub model: Model,
    pub n: u32,
    pub trials: u32,
    pub seed: u64,
    /// Highest moment order tracked (of (max/n)^k).
    pub k_max: u32,
    /// Highest argmax offset compared against theory; `None` means n.
    pub m_max: Option<u32>,
}

impl SimConfig {
    pub fn new(model: Model, n: u32, trials: u32, seed: u64) -> Self {
        Self {
            model,
            n,
            trials,
            seed,
            k_max: 4,
            m_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.k_max > 8 {
            return Err(Error::InvalidConfig(format!(
                "k_max must be at most 8, got {}",
                self.k_max
            )));
        }
        if let Some(m_max) = self.m_max {
            if m_max > self.n {
                return Err(Error::InvalidConfig(format!(
                    "m_max must be at most n, got m_max={m_max}, n={}",
                    self.n
                )));
            }
        }
        if self.trials as u64 * self.n as u64 > DRAW_BUDGET {
            return Err(Error::Budget(format!(
                "trials × n = {} exceeds the draw budget {DRAW_BUDGET}",
                self.trials as u64 * self.n as u64
            )));
        }
        Ok(())
    }

    fn m_max_effective(&self) -> u32 {
        self.m_max.unwrap_or(self.n).min(self.n)
    }
}

/// Empirical moment of (max/n)^k with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentStat {
    pub k: u32,
    pub mean: f64,
    pub std_err: f64,
}

/// Aggregated simulation output; a pure function of the config.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub model: Model,
    pub n: u32,
    pub trials: u32,
    pub seed: u64,
    pub moments: Vec<MomentStat>,
    /// Relative frequency of "gap n-m is the strict maximum", keyed by m.
    pub argmax_freq: BTreeMap<u32, f64>,
    /// Relative frequency of "gap n-m attains the maximum" (ties included);
    /// only distinct from the strict map in the discrete model.
    pub weak_argmax_freq: BTreeMap<u32, f64>,
    /// Fraction of trials whose maximum was attained by several gaps.
    pub tie_rate: f64,
}

/// SplitMix64: the avalanche finalizer doubles as the per-trial stream.
#[derive(Debug, Clone, Copy)]
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn substream(seed: u64, trial: u64) -> Self {
        let state = mix64(seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        Self { state }
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    fn next_unit_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct TrialOutcome {
    scaled_max: f64,
    /// Strict-argmax offset m = n - argmax_j, or None on a tie.
    strict_m: Option<u32>,
    /// All offsets attaining the maximum.
    weak_m: Vec<u32>,
}

fn run_trial(config: &SimConfig, trial: u64) -> TrialOutcome {
    let mut rng = SplitMix64::substream(config.seed, trial);
    let n = config.n;
    let nf = n as f64;
    let mut best = f64::NEG_INFINITY;
    let mut best_count = 0u32;
    let mut best_j = 0u32;
    let mut weak = Vec::new();
    for j in 0..n {
        let gap = match config.model {
            Model::Continuous => {
                // W_j ~ Exp((n-j)/n) by inverse transform.
                let u = rng.next_unit_open();
                -u.ln() * nf / (n - j) as f64
            }
            Model::Discrete => {
                // D_j ~ G((n-j)/n): ceil(ln U / ln(1 - p)); the j = 0 gap
                // has p = 1 and is deterministically 1.
                if j == 0 {
                    1.0
                } else {
                    let u = rng.next_unit_open();
                    let d = (u.ln() / f64::ln_1p(-((n - j) as f64) / nf)).ceil();
                    d.max(1.0)
                }
            }
        };
        if gap > best {
            best = gap;
            best_count = 1;
            best_j = j;
            weak.clear();
            weak.push(n - j);
        } else if gap == best {
            best_count += 1;
            weak.push(n - j);
        }
    }
    TrialOutcome {
        scaled_max: best / nf,
        strict_m: (best_count == 1).then_some(n - best_j),
        weak_m: weak,
    }
}

/// Run the configured experiment. Deterministic: identical configs give
/// bit-identical summaries.
pub fn simulate(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let trials = config.trials as u64;
    let k_max = config.k_max as usize;

    let mut moment_sums = vec![0.0f64; k_max];
    let mut moment_sq_sums = vec![0.0f64; k_max];
    let mut strict_counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut weak_counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut ties = 0u64;

    for trial in 0..trials {
        let outcome = run_trial(config, trial);
        let mut power = 1.0f64;
        for k in 0..k_max {
            power *= outcome.scaled_max;
            moment_sums[k] += power;
            moment_sq_sums[k] += power * power;
        }
        match outcome.strict_m {
            Some(m) => *strict_counts.entry(m).or_insert(0) += 1,
            None => ties += 1,
        }
        for m in outcome.weak_m {
            *weak_counts.entry(m).or_insert(0) += 1;
        }
    }

    let t = trials as f64;
    let moments = (0..k_max)
        .map(|k| {
            let mean = moment_sums[k] / t;
            let variance = (moment_sq_sums[k] / t - mean * mean).max(0.0);
            let std_err = if trials > 1 {
                (variance / (t - 1.0)).sqrt()
            } else {
                f64::INFINITY
            };
            MomentStat {
                k: k as u32 + 1,
                mean,
                std_err,
            }
        })
        .collect();

    let to_freq = |counts: BTreeMap<u32, u64>| -> BTreeMap<u32, f64> {
        counts.into_iter().map(|(m, c)| (m, c as f64 / t)).collect()
    };

    Ok(SimSummary {
        model: config.model,
        n: config.n,
        trials: config.trials,
        seed: config.seed,
        moments,
        argmax_freq: to_freq(strict_counts),
        weak_argmax_freq: to_freq(weak_counts),
        tie_rate: ties as f64 / t,
    })
}

/// One theory-vs-empirical row of the comparison report.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub quantity: String,
    pub empirical: f64,
    pub theoretical: f64,
    pub std_err: f64,
    pub z_score: f64,
    pub flagged: bool,
}

/// z-scores of the empirical moments and argmax frequencies against the
/// finite-model (and limiting-model) values; |z| > 4 rows are flagged.
#[derive(Debug, Clone, Default)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn flagged(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.flagged)
    }
}

fn comparison_row(
    quantity: String,
    empirical: f64,
    theoretical: f64,
    std_err: f64,
) -> ComparisonRow {
    let z_score = if std_err > 0.0 {
        (empirical - theoretical) / std_err
    } else if empirical == theoretical {
        0.0
    } else {
        f64::INFINITY
    };
    ComparisonRow {
        quantity,
        empirical,
        theoretical,
        std_err,
        z_score,
        flagged: z_score.abs() > 4.0,
    }
}

/// Compare a summary with the analytic predictions for the same config.
pub fn compare_with_theory(summary: &SimSummary, config: &SimConfig) -> Result<ComparisonReport> {
    config.validate()?;
    if summary.model != config.model
        || summary.n != config.n
        || summary.trials != config.trials
        || summary.seed != config.seed
    {
        return Err(Error::InvalidConfig(
            "summary was produced under a different configuration".into(),
        ));
    }

    let quad = QuadratureSpec::default();
    let mut report = ComparisonReport::default();

    for stat in &summary.moments {
        // Limiting model, both models (the scaled moments converge to E(M^k)).
        let limit = moment_series(stat.k)?;
        report.rows.push(comparison_row(
            format!("moment k={} vs E(M^k)", stat.k),
            stat.mean,
            limit,
            stat.std_err,
        ));
        if summary.model == Model::Continuous {
            let exact = finite_max_moment(summary.n, stat.k, &quad)?;
            report.rows.push(comparison_row(
                format!("moment k={} vs finite", stat.k),
                stat.mean,
                exact,
                stat.std_err,
            ));
        }
    }

    let t = summary.trials as f64;
    for m in 1..=config.m_max_effective() {
        let theoretical = match summary.model {
            Model::Continuous => finite_argmax_continuous(m, summary.n, &quad)?,
            Model::Discrete => discrete_argmax_probability(m, summary.n, 1e-9)?,
        };
        let empirical = summary.argmax_freq.get(&m).copied().unwrap_or(0.0);
        // Null standard error of a binomial proportion.
        let std_err = (theoretical * (1.0 - theoretical) / t).sqrt();
        report.rows.push(comparison_row(
            format!("argmax m={m}"),
            empirical,
            theoretical,
            std_err,
        ));
    }
    Ok(report)
}
