//! Lacunary sequences: validation, generation, unions and the split into
//! sparser subsequences.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("terms must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("terms must be positive integers")]
    ZeroTerm,
    #[error("ratio condition n[j+1] >= (1+eps) n[j] fails at index {0}")]
    RatioViolation(usize),
    #[error("sequence {0} carries no growth margin epsilon")]
    NotRatioCertified(usize),
    #[error("union doubling span {span} exceeds the sum {bound} of the input spans")]
    UnionBoundViolated { span: usize, bound: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("term overflowed 64 bits")]
    Overflow,
}

/// A strictly increasing list of positive integers together with its
/// doubling span on this truncation and, when certified, the ratio margin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LacunarySequence {
    terms: Vec<u64>,
    epsilon: Option<Rational>,
    doubling_span: usize,
}

/// On-disk form: `{"epsilon": "p/q" | null, "terms": [ints]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceFile {
    #[serde(with = "rational::serde_pq_opt", default)]
    pub epsilon: Option<Rational>,
    pub terms: Vec<u64>,
}

impl LacunarySequence {
    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn epsilon(&self) -> Option<&Rational> {
        self.epsilon.as_ref()
    }

    /// Smallest `M >= 1` with `terms[j+M] > 2 terms[j]` for every `j` where
    /// `j+M` is in range.
    pub fn doubling_span(&self) -> usize {
        self.doubling_span
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The first `n` terms, re-validated.
    pub fn truncate(&self, n: usize) -> Result<LacunarySequence, SequenceError> {
        validate(&self.terms[..n.min(self.terms.len())], self.epsilon.clone())
    }

    pub fn to_file(&self) -> SequenceFile {
        SequenceFile {
            epsilon: self.epsilon.clone(),
            terms: self.terms.clone(),
        }
    }

    pub fn from_file(file: &SequenceFile) -> Result<Self, SequenceError> {
        validate(&file.terms, file.epsilon.clone())
    }
}

fn doubling_span_of(terms: &[u64]) -> usize {
    let len = terms.len();
    let mut span = 1;
    let mut k = 0;
    for (j, &t) in terms.iter().enumerate() {
        if k <= j {
            k = j + 1;
        }
        let twice = 2 * t as u128;
        while k < len && terms[k] as u128 <= twice {
            k += 1;
        }
        // k is the first index beyond j holding a term > 2 t, or len if none.
        span = span.max(k - j);
    }
    span
}

/// `(1 + eps) * a <= b`, exactly.
fn ratio_holds(a: u64, b: u64, eps: &Rational) -> bool {
    let one_plus = Rational::one() + eps;
    Rational::from_integer(BigInt::from(b)) >= one_plus * BigInt::from(a)
}

pub fn validate(terms: &[u64], epsilon: Option<Rational>) -> Result<LacunarySequence, SequenceError> {
    if terms.is_empty() {
        return Err(SequenceError::EmptySequence);
    }
    if terms[0] == 0 {
        return Err(SequenceError::ZeroTerm);
    }
    if let Some(j) = terms.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SequenceError::NotIncreasing(j));
    }
    if let Some(eps) = &epsilon {
        if !eps.is_positive() {
            return Err(SequenceError::InvalidArgument("epsilon must be positive".into()));
        }
        if let Some(j) = terms.windows(2).position(|w| !ratio_holds(w[0], w[1], eps)) {
            return Err(SequenceError::RatioViolation(j));
        }
    }
    Ok(LacunarySequence {
        terms: terms.to_vec(),
        epsilon,
        doubling_span: doubling_span_of(terms),
    })
}

/// `n_1 = start`, `n_{j+1}` = smallest integer strictly above `(1+eps) n_j`.
pub fn generate_geometric(
    epsilon: &Rational,
    count: usize,
    start: u64,
) -> Result<LacunarySequence, SequenceError> {
    if !epsilon.is_positive() {
        return Err(SequenceError::InvalidArgument("epsilon must be positive".into()));
    }
    if count == 0 || start == 0 {
        return Err(SequenceError::InvalidArgument(
            "count and start must be at least 1".into(),
        ));
    }
    let growth = Rational::one() + epsilon;
    let mut terms = Vec::with_capacity(count);
    let mut current = start;
    terms.push(current);
    while terms.len() < count {
        let scaled = &growth * BigInt::from(current);
        let next = scaled.floor().to_integer() + BigInt::one();
        current = next.to_u64().ok_or(SequenceError::Overflow)?;
        terms.push(current);
    }
    validate(&terms, Some(epsilon.clone()))
}

/// `Σ ⌈1/ε_i⌉`, the span bound a union inherits from ratio-certified parts.
pub fn union_epsilon_bound(seqs: &[LacunarySequence]) -> Result<usize, SequenceError> {
    seqs.iter()
        .enumerate()
        .map(|(i, s)| {
            let eps = s.epsilon.as_ref().ok_or(SequenceError::NotRatioCertified(i))?;
            rational::ceil(&eps.recip())
                .to_usize()
                .ok_or(SequenceError::Overflow)
        })
        .sum()
}

/// Sorted, deduplicated union. The result carries no epsilon; its doubling
/// span is recomputed and checked against the sum of the input spans.
pub fn merge_union(seqs: &[LacunarySequence]) -> Result<LacunarySequence, SequenceError> {
    if seqs.is_empty() {
        return Err(SequenceError::EmptySequence);
    }
    if let Some(i) = seqs.iter().position(|s| s.epsilon.is_none()) {
        return Err(SequenceError::NotRatioCertified(i));
    }
    if seqs.len() == 1 {
        return Ok(seqs[0].clone());
    }
    let mut terms: Vec<u64> = seqs.iter().flat_map(|s| s.terms.iter().copied()).collect();
    terms.sort_unstable();
    terms.dedup();
    let merged = validate(&terms, None)?;
    let bound: usize = seqs.iter().map(|s| s.doubling_span).sum();
    if merged.doubling_span > bound {
        return Err(SequenceError::UnionBoundViolated {
            span: merged.doubling_span,
            bound,
        });
    }
    Ok(merged)
}

/// Smallest `K >= 1` with `(1+eps)^K > 4`.
pub fn split_factor(epsilon: &Rational) -> usize {
    let growth = Rational::one() + epsilon;
    let four = rational::int(4);
    let mut power = growth.clone();
    let mut k = 1;
    while power <= four {
        power *= &growth;
        k += 1;
    }
    k
}

/// Splits into the `K` interleaved subsequences `n_{Kj+r}`; each has
/// consecutive ratio `> (1+eps)^K > 4`. Subsequences that would be empty on
/// a short truncation are omitted.
pub fn split_subsequences(seq: &LacunarySequence) -> Result<(usize, Vec<LacunarySequence>), SequenceError> {
    let eps = seq.epsilon.as_ref().ok_or(SequenceError::NotRatioCertified(0))?;
    let k = split_factor(eps);
    let sub_eps = rational::pow(&(Rational::one() + eps), k as u64) - Rational::one();
    let mut parts = Vec::with_capacity(k);
    for r in 0..k.min(seq.terms.len()) {
        let terms: Vec<u64> = seq.terms.iter().skip(r).step_by(k).copied().collect();
        parts.push(validate(&terms, Some(sub_eps.clone()))?);
    }
    Ok((k, parts))
}

impl LacunarySequence {
    /// `true` when every consecutive ratio is strictly above `factor`.
    pub fn ratio_exceeds(&self, factor: u64) -> bool {
        self.terms
            .windows(2)
            .all(|w| w[1] as u128 > factor as u128 * w[0] as u128)
    }
}
