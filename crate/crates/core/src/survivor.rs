//! The constructive survivor engine: remove the dyadic covers `A_j` of the
//! forbidden sets one term at a time, certify the measure of what remains
//! after every step, and read off a multiplier `θ` from the survivor.
//! Also houses the nested-interval construction for sequences whose ratio
//! exceeds 4.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{self, DyadicError, DyadicSet, ForbiddenCover, UNIT};
use crate::lll::{self, ConclusionReport, ConditionalReport, HypothesisReport, LllError, LllParams};
use crate::rational::{self, Rational};
use crate::sequences::{self, LacunarySequence, SequenceError};
use crate::theta_oracle::{self, OracleError, TermDistance};

pub const DEFAULT_MAX_INTERVALS: usize = 1 << 22;
pub const DEFAULT_MAX_TERM: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurvivorError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
    #[error(transparent)]
    Lll(#[from] LllError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("doubling span {span} exceeds the parameter M = {m}")]
    ParamsTooWeak { span: usize, m: u64 },
    #[error("truncation {n} is longer than the sequence ({len} terms)")]
    TruncationTooLong { n: usize, len: usize },
    #[error("term {term} exceeds the configured cap {cap}")]
    TermCapExceeded { term: u64, cap: u64 },
    #[error("survivor grew to {runs} intervals, above the cap {cap}")]
    CapacityExceeded { runs: usize, cap: usize },
    #[error("survivor set became empty at step {0}")]
    EmptySurvivor(usize),
    #[error("measure fell below the product bound at step {step}\n{diagnostic}")]
    BoundViolated { step: usize, diagnostic: String },
    #[error("certificate check failed: {0}")]
    CertificateFailed(String),
    #[error("consecutive ratio is not above 4 at index {0}")]
    RatioNotAboveFour(usize),
    #[error("epsilon must satisfy 0 < epsilon < 1/4")]
    EpsilonOutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurvivorConfig {
    pub max_intervals: usize,
    pub max_term: u64,
    /// Number of contiguous panes processed in parallel per step.
    pub panes: usize,
}

impl Default for SurvivorConfig {
    fn default() -> Self {
        SurvivorConfig {
            max_intervals: DEFAULT_MAX_INTERVALS,
            max_term: DEFAULT_MAX_TERM,
            panes: 1,
        }
    }
}

/// One removal step. Measures are fixed-point numerators over `2^62`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    /// 1-based.
    pub index: usize,
    pub term: u64,
    pub level: u32,
    pub measure_before: u64,
    pub measure_after: u64,
    /// `P(A_i ∩ B_i)` with `B_i = ⋂_{j < i-h} A_j^c`.
    pub window_joint: u64,
    /// `P(B_i)`.
    pub window_prior: u64,
    pub runs: usize,
}

impl StepRecord {
    /// `P(A_i | survivor before step i)`.
    pub fn step_ratio(&self) -> Rational {
        Rational::new(
            BigInt::from(self.measure_before - self.measure_after),
            BigInt::from(self.measure_before),
        )
    }

    /// `P(A_i | B_i)`.
    pub fn window_ratio(&self) -> Rational {
        Rational::new(BigInt::from(self.window_joint), BigInt::from(self.window_prior))
    }

    pub fn measure_after(&self) -> Rational {
        dyadic::fixed_to_rational(self.measure_after)
    }
}

#[derive(Debug, Clone)]
pub struct SurvivorState {
    pub seq: LacunarySequence,
    pub params: LllParams,
    pub processed: usize,
    pub survivor: DyadicSet,
    pub history: Vec<StepRecord>,
}

fn covers_fixed(units: u64, bound: &Rational) -> bool {
    BigInt::from(units) * bound.denom() >= bound.numer() << dyadic::MAX_LEVEL as usize
}

fn diagnostic_dump(history: &[StepRecord], bound: &Rational) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bound = {}", rational::format(bound));
    for rec in history.iter().rev().take(8) {
        let _ = writeln!(
            out,
            "step {} n={} level={} measure={} ratio={} window_ratio={}",
            rec.index,
            rec.term,
            rec.level,
            rational::format(&rec.measure_after()),
            rational::format(&rec.step_ratio()),
            rational::format(&rec.window_ratio()),
        );
    }
    out
}

/// Removes the covers of the first `n` terms from `[0, 1)`.
///
/// After every step the exact survivor measure is compared with `(1-x)^i`;
/// falling below it aborts the run with a diagnostic dump.
pub fn run(
    seq: &LacunarySequence,
    params: &LllParams,
    n: usize,
    config: &SurvivorConfig,
) -> Result<SurvivorState, SurvivorError> {
    if n > seq.len() {
        return Err(SurvivorError::TruncationTooLong { n, len: seq.len() });
    }
    if seq.doubling_span() as u64 > params.m {
        return Err(SurvivorError::ParamsTooWeak {
            span: seq.doubling_span(),
            m: params.m,
        });
    }
    let terms = &seq.terms()[..n];
    if let Some(&term) = terms.iter().find(|&&t| t > config.max_term) {
        return Err(SurvivorError::TermCapExceeded {
            term,
            cap: config.max_term,
        });
    }
    let delta = &params.delta;
    let h = params.h as usize;
    let keep = Rational::one() - &params.x;
    let mut bound = Rational::one();
    let mut survivor = DyadicSet::full();
    let mut lagged = DyadicSet::full();
    let mut history = Vec::with_capacity(n);

    for (idx, &term) in terms.iter().enumerate() {
        let i = idx + 1;
        let cover = ForbiddenCover::new(term, delta)?;
        let before = survivor.measure_fixed();
        let (next, _) = survivor.subtract_cover(&cover, config.panes);
        let (window_joint, window_prior) = if i <= h + 1 {
            (DyadicSet::full().intersect_cover_measure(&cover), UNIT)
        } else {
            (lagged.intersect_cover_measure(&cover), lagged.measure_fixed())
        };
        survivor = next;
        bound *= &keep;
        history.push(StepRecord {
            index: i,
            term,
            level: cover.level(),
            measure_before: before,
            measure_after: survivor.measure_fixed(),
            window_joint,
            window_prior,
            runs: survivor.run_count(),
        });
        if survivor.run_count() > config.max_intervals {
            return Err(SurvivorError::CapacityExceeded {
                runs: survivor.run_count(),
                cap: config.max_intervals,
            });
        }
        if survivor.is_empty() {
            return Err(SurvivorError::EmptySurvivor(i));
        }
        if !covers_fixed(survivor.measure_fixed(), &bound) {
            return Err(SurvivorError::BoundViolated {
                step: i,
                diagnostic: diagnostic_dump(&history, &bound),
            });
        }
        // The next step conditions on ⋂_{j <= i-h} A_j^c.
        if i > h {
            let lag_cover = ForbiddenCover::new(terms[i - h - 1], delta)?;
            lagged = lagged.subtract_cover(&lag_cover, config.panes).0;
        }
    }

    Ok(SurvivorState {
        seq: seq.clone(),
        params: params.clone(),
        processed: n,
        survivor,
        history,
    })
}

impl SurvivorState {
    pub fn measure(&self) -> Rational {
        self.survivor.measure()
    }

    /// `(1-x)^n` for the processed prefix.
    pub fn bound(&self) -> Rational {
        lll::conclusion_bound(self.processed as u64, &self.params.x)
    }

    pub fn window_ratios(&self) -> Vec<Rational> {
        self.history.iter().map(StepRecord::window_ratio).collect()
    }

    pub fn step_ratios(&self) -> Vec<Rational> {
        self.history.iter().map(StepRecord::step_ratio).collect()
    }

    /// Every windowed conditional probability against `x (1-x)^h`.
    pub fn verify_hypothesis(&self) -> HypothesisReport {
        lll::verify_one_sided_hypothesis(&self.window_ratios(), self.params.h, &self.params.x)
    }

    pub fn verify_conditionals(&self) -> Vec<ConditionalReport> {
        self.history
            .iter()
            .map(|rec| {
                lll::verify_conditional_inequality(
                    &self.seq,
                    &self.params,
                    rec.index,
                    &dyadic::fixed_to_rational(rec.window_joint),
                    &dyadic::fixed_to_rational(rec.window_prior),
                )
            })
            .collect()
    }

    pub fn verify_conclusion(&self) -> ConclusionReport {
        let weights = vec![self.params.x.clone(); self.history.len()];
        lll::verify_conclusion(&self.step_ratios(), &weights)
    }

    /// Every recorded bound at every prefix, re-evaluated from the history.
    pub fn prefix_bounds_hold(&self) -> bool {
        let keep = Rational::one() - &self.params.x;
        let mut bound = Rational::one();
        self.history.iter().all(|rec| {
            bound *= &keep;
            covers_fixed(rec.measure_after, &bound)
        })
    }
}

/// A multiplier `θ` with the exact value `min_j ‖n_j θ‖` over a truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaCertificate {
    pub theta: Rational,
    pub terms: Vec<u64>,
    /// `None` when there are no terms (the minimum over nothing).
    pub value: Option<Rational>,
    pub witnesses: Vec<TermDistance>,
    /// The lower bound the construction guarantees for `value`.
    pub delta: Rational,
    pub measure: Option<Rational>,
    pub bound: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub theta: String,
    pub n: usize,
    /// `"inf"` for an empty truncation.
    pub value: String,
    pub delta: String,
    pub measure: Option<String>,
    pub bound: Option<String>,
}

impl ThetaCertificate {
    /// Evaluates `θ` on `terms` and checks the value reaches `guarantee`.
    pub fn from_theta(theta: Rational, terms: &[u64], guarantee: Rational) -> Result<Self, SurvivorError> {
        let (value, witnesses) = if terms.is_empty() {
            (None, Vec::new())
        } else {
            let profile = theta_oracle::min_dist(&theta, terms)?;
            (Some(profile.min_value), profile.per_term)
        };
        if let Some(v) = &value {
            if v < &guarantee {
                return Err(SurvivorError::CertificateFailed(format!(
                    "value {} is below the guarantee {}",
                    rational::format(v),
                    rational::format(&guarantee)
                )));
            }
        }
        Ok(ThetaCertificate {
            theta,
            terms: terms.to_vec(),
            value,
            witnesses,
            delta: guarantee,
            measure: None,
            bound: None,
        })
    }

    pub fn n(&self) -> usize {
        self.terms.len()
    }

    /// Recomputes every witness with [`theta_oracle::dist_to_int`] and checks
    /// agreement and the guarantee.
    pub fn reverify(&self) -> bool {
        if self.witnesses.len() != self.terms.len() {
            return false;
        }
        let witnesses_agree = self.terms.iter().zip(&self.witnesses).all(|(&n, w)| {
            let d = theta_oracle::dist_to_int(&self.theta, n);
            let via_nearest = (&self.theta * BigInt::from(n) - Rational::from_integer(w.nearest.clone())).abs();
            w.term == n && w.distance == d && via_nearest == d
        });
        let min = self.witnesses.iter().map(|w| &w.distance).min();
        let value_agrees = match (&self.value, min) {
            (None, None) => true,
            (Some(v), Some(m)) => v == m && v >= &self.delta,
            _ => false,
        };
        witnesses_agree && value_agrees
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            theta: rational::format(&self.theta),
            n: self.n(),
            value: self.value.as_ref().map_or_else(|| "inf".to_string(), rational::format),
            delta: rational::format(&self.delta),
            measure: self.measure.as_ref().map(rational::format),
            bound: self.bound.as_ref().map(rational::format),
        }
    }
}

pub fn extract_theta(state: &SurvivorState) -> Result<ThetaCertificate, SurvivorError> {
    let theta = state
        .survivor
        .pick_point()
        .map_err(|_| SurvivorError::EmptySurvivor(state.processed))?;
    let terms = &state.seq.terms()[..state.processed];
    let mut cert = ThetaCertificate::from_theta(theta, terms, state.params.delta.clone())?;
    cert.measure = Some(state.measure());
    cert.bound = Some(state.bound());
    Ok(cert)
}

/// Closed interval `[lo, hi]`.
pub type ClosedInterval = (Rational, Rational);

#[derive(Debug, Clone)]
pub struct NestedConstruction {
    pub certificate: ThetaCertificate,
    /// Middle halves chosen at each stage, outermost first.
    pub chain: Vec<ClosedInterval>,
}

fn middle_half(l: &BigInt, n: u64) -> ClosedInterval {
    let four_n = BigInt::from(4 * n as u128);
    (
        Rational::new(4 * l + 1, four_n.clone()),
        Rational::new(4 * l + 3, four_n),
    )
}

/// Nested middle halves: stage `j` keeps `θ` with `n_j θ` within `1/4` of a
/// half-integer; the leftmost admissible cell of the next term is taken each
/// time.
pub fn warmup_nested_chain(seq: &LacunarySequence, n: usize) -> Result<NestedConstruction, SurvivorError> {
    if n > seq.len() {
        return Err(SurvivorError::TruncationTooLong { n, len: seq.len() });
    }
    let terms = &seq.terms()[..n];
    if let Some(j) = terms
        .windows(2)
        .position(|w| w[1] as u128 <= 4 * w[0] as u128)
    {
        return Err(SurvivorError::RatioNotAboveFour(j));
    }
    let quarter = rational::ratio(1, 4);
    if terms.is_empty() {
        let certificate = ThetaCertificate::from_theta(rational::ratio(1, 2), terms, quarter)?;
        return Ok(NestedConstruction {
            certificate,
            chain: Vec::new(),
        });
    }
    let mut chain = vec![middle_half(&BigInt::zero(), terms[0])];
    for &next in &terms[1..] {
        let (lo, hi) = chain.last().expect("nonempty").clone();
        let cell = rational::ceil(&(&lo * BigInt::from(next)));
        let cell_end = Rational::new(&cell + BigInt::one(), BigInt::from(next));
        if cell_end > hi {
            return Err(SurvivorError::CertificateFailed(
                "no grid cell fits inside the middle half".into(),
            ));
        }
        chain.push(middle_half(&cell, next));
    }
    let (lo, hi) = chain.last().expect("nonempty");
    let theta = (lo + hi) / BigInt::from(2);
    let certificate = ThetaCertificate::from_theta(theta, terms, quarter)?;
    Ok(NestedConstruction { certificate, chain })
}

pub fn warmup_nested(seq: &LacunarySequence, n: usize) -> Result<ThetaCertificate, SurvivorError> {
    Ok(warmup_nested_chain(seq, n)?.certificate)
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineRow {
    pub name: &'static str,
    pub exponent: u32,
    /// `eps^exponent / |ln eps|` with unit constant.
    pub value: f64,
}

pub fn baseline_rows(epsilon: f64) -> Vec<BaselineRow> {
    let log = epsilon.ln().abs();
    [
        ("eps/|log eps| (this construction, up to c)", 1u32),
        ("eps^2/|log eps| (Katznelson)", 2),
        ("eps^4/|log eps| (de Mathan, Pollington)", 4),
    ]
    .into_iter()
    .map(|(name, exponent)| BaselineRow {
        name,
        exponent,
        value: epsilon.powi(exponent as i32) / log,
    })
    .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    #[serde(with = "rational::serde_pq")]
    pub epsilon: Rational,
    pub count: usize,
    pub doubling_span: usize,
    pub params: lll::ParamsJson,
    /// `ceil(1/delta)`.
    pub colors: String,
    /// `value * M * r`; the construction guarantees at least `c0`.
    pub normalized_value: f64,
    /// `value / (eps / |ln eps|)`: the empirical constant `c`.
    pub empirical_c: f64,
    pub baselines: Vec<BaselineRow>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub certificate: ThetaCertificate,
    pub state: SurvivorState,
    pub summary: PipelineSummary,
}

/// Generate, validate, build constants from the doubling span, run the
/// survivor engine, and extract a certified `θ`.
pub fn pipeline(epsilon: &Rational, count: usize, config: &SurvivorConfig) -> Result<PipelineReport, SurvivorError> {
    if !epsilon.is_positive() || epsilon >= &rational::ratio(1, 4) {
        return Err(SurvivorError::EpsilonOutOfRange);
    }
    let seq = sequences::generate_geometric(epsilon, count, 1)?;
    let span = seq.doubling_span();
    let params = lll::make_default_params((span as u64).max(4))?;
    let state = run(&seq, &params, count, config)?;
    let certificate = extract_theta(&state)?;
    if !certificate.reverify() {
        return Err(SurvivorError::CertificateFailed("independent re-evaluation disagrees".into()));
    }
    let value = certificate.value.clone().unwrap_or_else(Rational::one);
    let eps_f = rational::to_f64(epsilon);
    let value_f = rational::to_f64(&value);
    let summary = PipelineSummary {
        epsilon: epsilon.clone(),
        count,
        doubling_span: span,
        params: params.to_json(),
        colors: params.color_count().to_string(),
        normalized_value: rational::to_f64(&(&value * BigInt::from(params.m) * &params.log2m_upper)),
        empirical_c: value_f / (eps_f / eps_f.ln().abs()),
        baselines: baseline_rows(eps_f),
    };
    Ok(PipelineReport {
        certificate,
        state,
        summary,
    })
}
