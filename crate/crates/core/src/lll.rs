//! Constants of the dyadic local-lemma construction and exact checks of the
//! one-sided local lemma's hypothesis and conclusion.
//!
//! Every irrational quantity (`log2 M`) is replaced by a rational upper
//! bracket `r` with `log2 M <= r <= log2 M + 1/64`. `r` enters `delta` in the
//! denominator and `h` inside the ceiling, which moves each inequality in the
//! safe direction.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};
use crate::sequences::LacunarySequence;

/// Exponents up to this are raised exactly; beyond it a certified lower
/// bound is used.
const EXACT_POWER_LIMIT: u64 = 4096;
const LOWER_BOUND_BITS: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LllError {
    #[error("M = {0} is below the minimum of 4")]
    MTooSmall(u64),
    #[error("constants infeasible: {0}")]
    ConstantsInfeasible(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LllParams {
    pub m: u64,
    pub c0: Rational,
    pub c1: u64,
    /// Rational `r` with `log2 M <= r <= log2 M + 1/64`.
    pub log2m_upper: Rational,
    pub delta: Rational,
    pub h: u64,
    pub x: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsJson {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(with = "rational::serde_pq")]
    pub c0: Rational,
    #[serde(rename = "C1")]
    pub c1: u64,
    #[serde(with = "rational::serde_pq")]
    pub delta: Rational,
    pub h: u64,
    #[serde(with = "rational::serde_pq")]
    pub x: Rational,
}

/// `ceil(64 log2 m) / 64`, from the bit length of `m^64 - 1`.
pub fn log2_upper(m: u64) -> Rational {
    assert!(m >= 2);
    let power = BigUint::from(m).pow(64u32);
    let bits = (power - BigUint::one()).bits();
    Rational::new(BigInt::from(bits), BigInt::from(64))
}

/// `(1 - x)^e`, exact for moderate `e` and a certified lower bound otherwise.
pub fn survival_lower_bound(x: &Rational, e: u64) -> Rational {
    let base = Rational::one() - x;
    if e <= EXACT_POWER_LIMIT {
        rational::pow(&base, e)
    } else {
        rational::pow_lower_bound(&base, e, LOWER_BOUND_BITS)
    }
}

pub fn default_c0() -> Rational {
    rational::ratio(1, 240)
}

pub const DEFAULT_C1: u64 = 6;

pub fn make_params(m: u64, c0: Rational, c1: u64) -> Result<LllParams, LllError> {
    if m < 4 {
        return Err(LllError::MTooSmall(m));
    }
    let infeasible = |why: &str| Err(LllError::ConstantsInfeasible(why.to_string()));
    if !c0.is_positive() || c1 == 0 {
        return infeasible("c0 and C1 must be positive");
    }
    if &c0 * BigInt::from(240) > Rational::one() {
        return infeasible("240 c0 > 1");
    }
    if &c0 * BigInt::from(40 * c1) > Rational::one() {
        return infeasible("40 C1 c0 > 1");
    }
    let r = log2_upper(m);
    let delta = &c0 / (&r * BigInt::from(m));
    let blocks = rational::ceil(&(&r * BigInt::from(c1)))
        .to_u64()
        .ok_or_else(|| LllError::ConstantsInfeasible("h overflows".into()))?;
    let h = blocks
        .checked_mul(m)
        .ok_or_else(|| LllError::ConstantsInfeasible("h overflows".into()))?;
    let x = Rational::new(BigInt::one(), BigInt::from(h));
    if x > rational::ratio(1, 16) {
        return infeasible("x = 1/h exceeds 1/16");
    }
    // M^-C1 <= delta
    let m_pow = BigInt::from(m).pow(c1 as u32);
    if &delta * m_pow < Rational::one() {
        return infeasible("M^-C1 > delta");
    }
    if &delta * BigInt::from(36) > x {
        return infeasible("36 delta > x");
    }
    let survival = survival_lower_bound(&x, h);
    if survival < rational::ratio(1, 3) {
        return infeasible("(1-x)^h < 1/3");
    }
    if &delta * BigInt::from(12) > &x * &survival {
        return infeasible("12 delta > x (1-x)^h");
    }
    Ok(LllParams {
        m,
        c0,
        c1,
        log2m_upper: r,
        delta,
        h,
        x,
    })
}

pub fn make_default_params(m: u64) -> Result<LllParams, LllError> {
    make_params(m, default_c0(), DEFAULT_C1)
}

impl LllParams {
    /// `x (1-x)^h`, the per-event budget the hypothesis must respect.
    pub fn hypothesis_threshold(&self) -> Rational {
        &self.x * survival_lower_bound(&self.x, self.h)
    }

    /// `m(i) = max(i - h, 0)` for 1-based `i`.
    pub fn window_start(&self, i: u64) -> u64 {
        i.saturating_sub(self.h)
    }

    /// `ceil(1/delta)`: colors used by the interval-partition coloring.
    pub fn color_count(&self) -> BigInt {
        rational::ceil(&self.delta.recip())
    }

    pub fn to_json(&self) -> ParamsJson {
        ParamsJson {
            m: self.m,
            c0: self.c0.clone(),
            c1: self.c1,
            delta: self.delta.clone(),
            h: self.h,
            x: self.x.clone(),
        }
    }

    /// Rebuilds from `M`, `c0`, `C1` and checks the derived fields agree.
    pub fn from_json(json: &ParamsJson) -> Result<Self, LllError> {
        let params = make_params(json.m, json.c0.clone(), json.c1)?;
        if params.delta != json.delta || params.h != json.h || params.x != json.x {
            return Err(LllError::ConstantsInfeasible(
                "derived delta/h/x do not match M, c0, C1".into(),
            ));
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisReport {
    pub passed: bool,
    /// 0-based index of the first event over budget.
    pub first_violation: Option<usize>,
    pub checked: usize,
}

/// Uniform weights `x_i = x`, window `m(i) = i - h`: every conditional
/// probability must be at most `x (1-x)^h`.
pub fn verify_one_sided_hypothesis(cond_probs: &[Rational], h: u64, x: &Rational) -> HypothesisReport {
    let threshold = x * survival_lower_bound(x, h);
    let first_violation = cond_probs.iter().position(|p| p > &threshold);
    HypothesisReport {
        passed: first_violation.is_none(),
        first_violation,
        checked: cond_probs.len(),
    }
}

/// General weights: `cond_probs[i] <= weights[i] * prod_{j = window[i]}^{i-1} (1 - weights[j])`
/// with 0-based indices and `window[i] <= i`.
pub fn verify_weighted_hypothesis(
    cond_probs: &[Rational],
    weights: &[Rational],
    window: &[usize],
) -> HypothesisReport {
    assert_eq!(cond_probs.len(), weights.len());
    assert_eq!(cond_probs.len(), window.len());
    let first_violation = (0..cond_probs.len()).find(|&i| {
        assert!(window[i] <= i, "window start must not exceed the event index");
        let budget = weights[window[i]..i]
            .iter()
            .fold(weights[i].clone(), |acc, w| acc * (Rational::one() - w));
        cond_probs[i] > budget
    });
    HypothesisReport {
        passed: first_violation.is_none(),
        first_violation,
        checked: cond_probs.len(),
    }
}

/// The lemma's conclusion for a realized chain: each step's
/// `P(A_l | B_l) <= x_l` and the survival product bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConclusionReport {
    pub passed: bool,
    pub first_step_violation: Option<usize>,
    pub product_bound: Rational,
    pub survival: Rational,
}

pub fn verify_conclusion(step_ratios: &[Rational], weights: &[Rational]) -> ConclusionReport {
    assert_eq!(step_ratios.len(), weights.len());
    let first_step_violation = step_ratios.iter().zip(weights).position(|(p, w)| p > w);
    let survival = step_ratios
        .iter()
        .fold(Rational::one(), |acc, p| acc * (Rational::one() - p));
    let product_bound = weights
        .iter()
        .fold(Rational::one(), |acc, w| acc * (Rational::one() - w));
    ConclusionReport {
        passed: first_step_violation.is_none() && survival >= product_bound,
        first_step_violation,
        product_bound,
        survival,
    }
}

/// `(1-x)^n`; `n = 0` gives 1.
pub fn conclusion_bound(n: u64, x: &Rational) -> Rational {
    rational::pow(&(Rational::one() - x), n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalReport {
    /// 1-based event index.
    pub index: usize,
    /// `true` when `i <= h` and the unconditioned `8 delta` route applies.
    pub unconditioned: bool,
    /// `joint <= prior (8 delta + 4 n_{i-h-1}/n_i)`, or `joint <= 8 delta`.
    pub window_bound_holds: bool,
    /// `joint / prior <= 12 delta`.
    pub ratio_bound_holds: bool,
    /// `n_{i-h-1}/n_i <= M^-C1` (vacuous for `i <= h`).
    pub lag_ratio_holds: bool,
    pub ratio: Rational,
}

impl ConditionalReport {
    pub fn passed(&self) -> bool {
        self.window_bound_holds && self.ratio_bound_holds && self.lag_ratio_holds
    }
}

/// Checks the windowed conditional estimate for the 1-based event `i`, given
/// `joint = P(A_i ∩ B)` and `prior = P(B)` with `B = ⋂_{j < i-h} A_j^c`.
/// `n_0` is taken to be 0, so `i = h + 1` reduces to the unconditioned bound.
pub fn verify_conditional_inequality(
    seq: &LacunarySequence,
    params: &LllParams,
    i: usize,
    exact_joint: &Rational,
    exact_prior: &Rational,
) -> ConditionalReport {
    assert!(i >= 1 && i <= seq.len(), "event index out of range");
    let terms = seq.terms();
    let eight_delta = &params.delta * BigInt::from(8);
    let twelve_delta = &params.delta * BigInt::from(12);
    let ratio = if exact_prior.is_zero() {
        Rational::zero()
    } else {
        exact_joint / exact_prior
    };
    let ratio_bound_holds = ratio <= twelve_delta;
    if (i as u64) <= params.h {
        return ConditionalReport {
            index: i,
            unconditioned: true,
            window_bound_holds: exact_joint <= &eight_delta,
            ratio_bound_holds,
            lag_ratio_holds: true,
            ratio,
        };
    }
    let lag = i - params.h as usize - 1;
    let n_lag = if lag == 0 { 0 } else { terms[lag - 1] };
    let lag_ratio = Rational::new(BigInt::from(n_lag), BigInt::from(terms[i - 1]));
    let bound = exact_prior * (eight_delta + &lag_ratio * BigInt::from(4));
    let m_pow = BigInt::from(params.m).pow(params.c1 as u32);
    ConditionalReport {
        index: i,
        unconditioned: false,
        window_bound_holds: exact_joint <= &bound,
        ratio_bound_holds,
        lag_ratio_holds: lag_ratio * m_pow <= Rational::one(),
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::sequences::validate;

    #[test]
    fn params_for_powers_of_two() {
        let p = make_default_params(4).unwrap();
        assert_eq!(p.delta, ratio(1, 1920));
        assert_eq!(p.h, 48);
        assert_eq!(p.x, ratio(1, 48));
        let p = make_default_params(8).unwrap();
        assert_eq!(p.delta, ratio(1, 5760));
        assert_eq!(p.h, 144);
    }

    #[test]
    fn params_for_five_use_bracketed_log() {
        let p = make_default_params(5).unwrap();
        // 2^148 < 5^64 <= 2^149
        assert_eq!(p.log2m_upper, ratio(149, 64));
        let five64 = BigInt::from(5).pow(64u32);
        assert!(five64 > BigInt::one() << 148usize && five64 <= BigInt::one() << 149usize);
        assert_eq!(p.delta, ratio(1, 240) / (ratio(149, 64) * BigInt::from(5)));
        assert!(rational::to_f64(&p.delta) <= 1.0 / 240.0 / (5.0 * 5f64.log2()));
        assert_eq!(p.h, 70);
        assert!(&p.delta * BigInt::from(5).pow(6u32) >= int(1));
        assert!(&p.c0 * BigInt::from(40 * 6) <= int(1));
    }

    #[test]
    fn infeasible_constants_rejected() {
        assert_eq!(make_default_params(3), Err(LllError::MTooSmall(3)));
        assert!(matches!(make_params(4, ratio(1, 239), 6), Err(LllError::ConstantsInfeasible(_))));
        // Lowering C1 breaks M^-C1 <= delta.
        assert!(matches!(make_params(4, ratio(1, 240), 2), Err(LllError::ConstantsInfeasible(_))));
        assert!(matches!(make_params(4, ratio(1, 240), 7), Err(LllError::ConstantsInfeasible(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = make_default_params(6).unwrap();
        let text = serde_json::to_string(&p.to_json()).unwrap();
        assert!(text.contains("\"M\":6") && text.contains("\"C1\":6"));
        let back: ParamsJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LllParams::from_json(&back).unwrap(), p);
    }

    #[test]
    fn one_sided_hypothesis_examples() {
        let x = ratio(1, 48);
        let zeros = vec![int(0); 10];
        assert!(verify_one_sided_hypothesis(&zeros, 48, &x).passed);
        let edge = &x * rational::pow(&(int(1) - &x), 48);
        assert!(verify_one_sided_hypothesis(std::slice::from_ref(&edge), 48, &x).passed);
        let over = edge + ratio(1, 1 << 40);
        let report = verify_one_sided_hypothesis(&[int(0), over], 48, &x);
        assert_eq!(report.first_violation, Some(1));
    }

    #[test]
    fn weighted_hypothesis_matches_uniform() {
        let x = ratio(1, 16);
        let h = 16;
        let probs: Vec<Rational> = (0..40).map(|i| ratio(i % 3, 400)).collect();
        let weights = vec![x.clone(); 40];
        let window: Vec<usize> = (0..40).map(|i: usize| i.saturating_sub(h)).collect();
        let general = verify_weighted_hypothesis(&probs, &weights, &window);
        // Early events have shorter windows, so they may only pass more easily.
        assert!(general.passed);
        assert!(verify_one_sided_hypothesis(&probs, h as u64, &x).passed);
    }

    #[test]
    fn conclusion_examples() {
        assert_eq!(conclusion_bound(1, &ratio(1, 2)), ratio(1, 2));
        assert_eq!(conclusion_bound(10, &ratio(1, 48)), rational::pow(&ratio(47, 48), 10));
        assert_eq!(conclusion_bound(0, &ratio(1, 48)), int(1));
        let r = verify_conclusion(&[ratio(1, 100), ratio(1, 50)], &[ratio(1, 48), ratio(1, 48)]);
        assert!(r.passed);
        let r = verify_conclusion(&[ratio(1, 10)], &[ratio(1, 48)]);
        assert_eq!(r.first_step_violation, Some(0));
    }

    #[test]
    fn conditional_inequality_routes() {
        let seq = validate(&(0..60).map(|k| 1u64 << k).collect::<Vec<_>>(), None).unwrap();
        let p = make_default_params(4).unwrap();
        let eight = &p.delta * BigInt::from(8);
        let r = verify_conditional_inequality(&seq, &p, 3, &eight, &int(1));
        assert!(r.unconditioned && r.passed());
        // i = h + 1: the window is empty and n_0 counts as 0.
        let r = verify_conditional_inequality(&seq, &p, 49, &eight, &int(1));
        assert!(!r.unconditioned && r.passed());
        // i = h + 2 with lag ratio 2^-49 <= 4^-6.
        let r = verify_conditional_inequality(&seq, &p, 50, &(&eight / BigInt::from(2)), &ratio(1, 2));
        assert!(r.lag_ratio_holds && r.passed());
        let r = verify_conditional_inequality(&seq, &p, 50, &ratio(1, 2), &ratio(1, 2));
        assert!(!r.passed());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn invariants_hold_for_all_m(m in 4u64..=65536) {
                let p = make_default_params(m).unwrap();
                let r_f = rational::to_f64(&p.log2m_upper);
                prop_assert!(r_f >= (m as f64).log2() - 1e-12);
                prop_assert!(r_f <= (m as f64).log2() + 1.0 / 64.0 + 1e-12);
                // h delta <= (10/9) C1 c0
                let lhs = &p.delta * BigInt::from(p.h);
                prop_assert!(lhs <= ratio(10, 9) * BigInt::from(p.c1) * &p.c0);
                prop_assert!(&p.delta * BigInt::from(12) <= p.hypothesis_threshold());
                let bigger = make_default_params(m + 1).unwrap();
                prop_assert!(bigger.delta <= p.delta);
            }
        }
    }
}
