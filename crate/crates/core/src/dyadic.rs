//! Finite unions of half-open dyadic intervals of `[0, 1)`.
//!
//! A [`DyadicSet`] is stored as its maximal runs `[a, b)` with endpoints
//! counted in units of `2^-62`, so every dyadic interval down to level 62 is
//! representable exactly and measures are integers over `2^62`. The canonical
//! list of maximal dyadic blocks ([`DyadicSet::intervals`]) is derived from
//! the runs on demand; both forms are unique for a given point set.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

/// Finest supported level.
pub const MAX_LEVEL: u32 = 62;
/// The point `1` in fixed-point units.
pub const UNIT: u64 = 1 << MAX_LEVEL;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DyadicError {
    #[error("2*delta/n = {0} exceeds 1")]
    DeltaTooLarge(String),
    #[error("delta must be positive and n at least 1")]
    InvalidRadius,
    #[error("required level {0} is finer than the supported {MAX_LEVEL}")]
    LevelTooDeep(u64),
    #[error("dyadic interval k={k} is out of range for level {level}")]
    BadInterval { k: u64, level: u32 },
    #[error("set is empty")]
    EmptySet,
    #[error("integer overflow while covering n={0}")]
    Overflow(u64),
}

/// `[k 2^-level, (k+1) 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub k: u64,
    pub level: u32,
}

impl DyadicInterval {
    pub fn new(k: u64, level: u32) -> Result<Self, DyadicError> {
        if level > MAX_LEVEL || (k >> level) != 0 {
            return Err(DyadicError::BadInterval { k, level });
        }
        Ok(DyadicInterval { k, level })
    }

    fn width(&self) -> u64 {
        1 << (MAX_LEVEL - self.level)
    }

    pub fn start(&self) -> u64 {
        self.k << (MAX_LEVEL - self.level)
    }

    pub fn end(&self) -> u64 {
        self.start() + self.width()
    }

    pub fn measure(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DyadicSet {
    runs: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DyadicSetJson {
    pub intervals: Vec<(u64, u32)>,
    #[serde(with = "rational::serde_pq")]
    pub measure: Rational,
}

pub fn fixed_to_rational(units: u64) -> Rational {
    Rational::new(BigInt::from(units), BigInt::one() << MAX_LEVEL)
}

impl DyadicSet {
    pub fn empty() -> Self {
        DyadicSet { runs: Vec::new() }
    }

    pub fn full() -> Self {
        DyadicSet {
            runs: vec![(0, UNIT)],
        }
    }

    pub fn from_intervals<I: IntoIterator<Item = DyadicInterval>>(intervals: I) -> Self {
        let mut runs: Vec<(u64, u64)> = intervals.into_iter().map(|i| (i.start(), i.end())).collect();
        runs.sort_unstable();
        DyadicSet {
            runs: merge_sorted(runs),
        }
    }

    /// Builds from arbitrary fixed-point runs (sorted or not, overlapping or not).
    pub fn from_fixed_runs(mut runs: Vec<(u64, u64)>) -> Self {
        runs.retain(|&(a, b)| a < b);
        for r in &mut runs {
            r.1 = r.1.min(UNIT);
        }
        runs.sort_unstable();
        DyadicSet {
            runs: merge_sorted(runs),
        }
    }

    pub fn runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn measure_fixed(&self) -> u64 {
        self.runs.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn measure(&self) -> Rational {
        fixed_to_rational(self.measure_fixed())
    }

    /// The canonical decomposition into maximal dyadic blocks, left to right.
    pub fn intervals(&self) -> Vec<DyadicInterval> {
        let mut out = Vec::new();
        for &(a, b) in &self.runs {
            for_each_block(a, b, |iv| out.push(iv));
        }
        out
    }

    pub fn contains(&self, theta: &Rational) -> bool {
        if theta.is_negative() || theta >= &Rational::one() {
            return false;
        }
        let scaled = (theta.numer() << MAX_LEVEL as usize).div_floor(theta.denom());
        let Some(f) = scaled.to_u64() else {
            return false;
        };
        let idx = self.runs.partition_point(|&(_, b)| b <= f);
        idx < self.runs.len() && self.runs[idx].0 <= f
    }

    pub fn union(&self, other: &DyadicSet) -> DyadicSet {
        let mut runs = Vec::with_capacity(self.runs.len() + other.runs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() || j < other.runs.len() {
            let take_left = j >= other.runs.len() || (i < self.runs.len() && self.runs[i] <= other.runs[j]);
            if take_left {
                runs.push(self.runs[i]);
                i += 1;
            } else {
                runs.push(other.runs[j]);
                j += 1;
            }
        }
        DyadicSet {
            runs: merge_sorted(runs),
        }
    }

    pub fn intersect(&self, other: &DyadicSet) -> DyadicSet {
        DyadicSet {
            runs: intersect_runs(&self.runs, other.runs.iter().copied()),
        }
    }

    pub fn subtract(&self, other: &DyadicSet) -> DyadicSet {
        DyadicSet {
            runs: subtract_runs(&self.runs, other.runs.iter().copied()),
        }
    }

    pub fn complement(&self) -> DyadicSet {
        DyadicSet::full().subtract(self)
    }

    /// Midpoint of the widest canonical block (leftmost among equals).
    pub fn pick_point(&self) -> Result<Rational, DyadicError> {
        let mut best: Option<DyadicInterval> = None;
        for &(a, b) in &self.runs {
            for_each_block(a, b, |iv| {
                if best.is_none_or(|cur| iv.level < cur.level) {
                    best = Some(iv);
                }
            });
        }
        let block = best.ok_or(DyadicError::EmptySet)?;
        // (2k + 1) / 2^(level+1)
        Ok(Rational::new(
            BigInt::from(2 * block.k as u128 + 1),
            BigInt::one() << (block.level + 1),
        ))
    }

    /// Lines `k/2^l .. (k+1)/2^l`, one per canonical block.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for iv in self.intervals() {
            let _ = writeln!(out, "{}/2^{} .. {}/2^{}", iv.k, iv.level, iv.k + 1, iv.level);
        }
        out
    }

    pub fn to_json(&self) -> DyadicSetJson {
        DyadicSetJson {
            intervals: self.intervals().into_iter().map(|iv| (iv.k, iv.level)).collect(),
            measure: self.measure(),
        }
    }

    pub fn from_json(json: &DyadicSetJson) -> Result<Self, DyadicError> {
        let ivs = json
            .intervals
            .iter()
            .map(|&(k, level)| DyadicInterval::new(k, level))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DyadicSet::from_intervals(ivs))
    }

    /// `self \ cover` together with the removed measure, evaluating the
    /// cover lazily inside each run. With `panes > 1` the runs are split into
    /// contiguous chunks processed in parallel; the result does not depend
    /// on `panes`.
    pub fn subtract_cover(&self, cover: &ForbiddenCover, panes: usize) -> (DyadicSet, u64) {
        let runs = if panes <= 1 || self.runs.len() < 4096 {
            subtract_runs(&self.runs, cover.runs_within(0, UNIT))
        } else {
            let chunk = self.runs.len().div_ceil(panes);
            let parts: Vec<Vec<(u64, u64)>> = self
                .runs
                .par_chunks(chunk)
                .map(|part| {
                    let lo = part[0].0;
                    let hi = part[part.len() - 1].1;
                    subtract_runs(part, cover.runs_within(lo, hi))
                })
                .collect();
            parts.concat()
        };
        let result = DyadicSet { runs };
        let removed = self.measure_fixed() - result.measure_fixed();
        (result, removed)
    }

    /// Fixed-point measure of `self ∩ cover`.
    pub fn intersect_cover_measure(&self, cover: &ForbiddenCover) -> u64 {
        intersect_runs(&self.runs, cover.runs_within(0, UNIT))
            .iter()
            .map(|&(a, b)| b - a)
            .sum()
    }
}

fn merge_sorted(runs: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(runs.len());
    for (a, b) in runs {
        if a >= b {
            continue;
        }
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Maximal aligned blocks of `[a, b)`.
fn for_each_block(mut a: u64, b: u64, mut f: impl FnMut(DyadicInterval)) {
    while a < b {
        let align = if a == 0 { MAX_LEVEL } else { a.trailing_zeros().min(MAX_LEVEL) };
        let fit = 63 - (b - a).leading_zeros();
        let bits = align.min(fit);
        let level = MAX_LEVEL - bits;
        f(DyadicInterval { k: a >> bits, level });
        a += 1 << bits;
    }
}

fn subtract_runs(left: &[(u64, u64)], right: impl Iterator<Item = (u64, u64)>) -> Vec<(u64, u64)> {
    let mut right = right.peekable();
    let mut out = Vec::with_capacity(left.len() + 8);
    for &(s, e) in left {
        while right.peek().is_some_and(|r| r.1 <= s) {
            right.next();
        }
        let mut cur = s;
        while let Some(&(rs, re)) = right.peek() {
            if rs >= e {
                break;
            }
            if rs > cur {
                out.push((cur, rs));
            }
            cur = cur.max(re);
            if re >= e {
                break;
            }
            right.next();
        }
        if cur < e {
            out.push((cur, e));
        }
    }
    out
}

fn intersect_runs(left: &[(u64, u64)], right: impl Iterator<Item = (u64, u64)>) -> Vec<(u64, u64)> {
    let mut right = right.peekable();
    let mut out = Vec::new();
    for &(s, e) in left {
        while right.peek().is_some_and(|r| r.1 <= s) {
            right.next();
        }
        while let Some(&(rs, re)) = right.peek() {
            if rs >= e {
                break;
            }
            let lo = rs.max(s);
            let hi = re.min(e);
            if lo < hi {
                out.push((lo, hi));
            }
            if re >= e {
                break;
            }
            right.next();
        }
    }
    out
}

/// `2^-(l+1) < 2 delta / n <= 2^-l`.
pub fn level_for(n: u64, delta: &Rational) -> Result<u32, DyadicError> {
    if n == 0 || !delta.is_positive() {
        return Err(DyadicError::InvalidRadius);
    }
    let ratio = Rational::from_integer(BigInt::from(n)) / (delta * BigInt::from(2));
    if ratio < Rational::one() {
        return Err(DyadicError::DeltaTooLarge(rational::format(&ratio.recip())));
    }
    let level = ratio.floor().to_integer().bits() - 1;
    if level > MAX_LEVEL as u64 {
        return Err(DyadicError::LevelTooDeep(level));
    }
    Ok(level as u32)
}

/// The dyadic cover `A` of the forbidden set `E = {θ : ‖nθ‖ < δ}`: every
/// level-`l` cell meeting one of the open arcs `((m-δ)/n, (m+δ)/n)`.
#[derive(Debug, Clone)]
pub struct ForbiddenCover {
    n: u64,
    level: u32,
    delta_num: i128,
    delta_den: i128,
    /// `n * delta_den`
    scale_den: i128,
}

impl ForbiddenCover {
    pub fn new(n: u64, delta: &Rational) -> Result<Self, DyadicError> {
        let level = level_for(n, delta)?;
        let overflow = || DyadicError::Overflow(n);
        let delta_num = delta.numer().to_i128().ok_or_else(overflow)?;
        let delta_den = delta.denom().to_i128().ok_or_else(overflow)?;
        let scale_den = (n as i128).checked_mul(delta_den).ok_or_else(overflow)?;
        // (m D + N) 2^l must fit for m <= n + margin.
        let top = (n as i128 + 8)
            .checked_mul(delta_den)
            .and_then(|v| v.checked_add(delta_num))
            .and_then(|v| v.checked_mul(1i128 << level))
            .ok_or_else(overflow)?;
        if top > (i128::MAX >> 2) {
            return Err(overflow());
        }
        Ok(ForbiddenCover {
            n,
            level,
            delta_num,
            delta_den,
            scale_den,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cell indices `[k_lo, k_hi]` (unclipped) meeting arc `m`.
    fn cell_range(&self, m: i128) -> (i128, i128) {
        let pow = 1i128 << self.level;
        let lo_num = (m * self.delta_den - self.delta_num) * pow;
        let hi_num = (m * self.delta_den + self.delta_num) * pow;
        // scale_den > 0, so Euclidean division floors.
        let k_lo = lo_num.div_euclid(self.scale_den);
        let k_hi = -(-hi_num).div_euclid(self.scale_den) - 1;
        (k_lo, k_hi)
    }

    /// Merged fixed-point runs of the cover clipped to `[lo, hi)`.
    pub fn runs_within(&self, lo: u64, hi: u64) -> CoverRuns<'_> {
        let n = self.n as i128;
        let margin = 5 * self.delta_num / self.delta_den + 2;
        let m_lo = ((lo as i128 * n) >> MAX_LEVEL) - margin;
        let m_hi = ((hi as i128 * n) >> MAX_LEVEL) + margin;
        CoverRuns {
            cover: self,
            m: m_lo.max(0),
            m_end: m_hi.min(n),
            lo,
            hi,
            pending: None,
        }
    }

    pub fn to_set(&self) -> DyadicSet {
        DyadicSet {
            runs: self.runs_within(0, UNIT).collect(),
        }
    }
}

pub struct CoverRuns<'a> {
    cover: &'a ForbiddenCover,
    m: i128,
    m_end: i128,
    lo: u64,
    hi: u64,
    pending: Option<(u64, u64)>,
}

impl Iterator for CoverRuns<'_> {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        let cells = 1i128 << self.cover.level;
        let shift = MAX_LEVEL - self.cover.level;
        while self.m <= self.m_end {
            let (k_lo, k_hi) = self.cover.cell_range(self.m);
            self.m += 1;
            let k_lo = k_lo.max(0);
            let k_hi = k_hi.min(cells - 1);
            if k_lo > k_hi {
                continue;
            }
            let a = ((k_lo as u64) << shift).max(self.lo);
            let b = (((k_hi + 1) as u64) << shift).min(self.hi);
            if a >= b {
                continue;
            }
            match &mut self.pending {
                Some(p) if a <= p.1 => p.1 = p.1.max(b),
                Some(p) => {
                    let done = *p;
                    *p = (a, b);
                    return Some(done);
                }
                None => self.pending = Some((a, b)),
            }
        }
        self.pending.take()
    }
}

/// `A = ` all level-`l` cells meeting `{θ : ‖nθ‖ < δ}`, `l = level_for(n, δ)`.
pub fn cover_forbidden(n: u64, delta: &Rational) -> Result<DyadicSet, DyadicError> {
    Ok(ForbiddenCover::new(n, delta)?.to_set())
}

pub fn measure(set: &DyadicSet) -> Rational {
    set.measure()
}

pub fn subtract(x: &DyadicSet, y: &DyadicSet) -> DyadicSet {
    x.subtract(y)
}

pub fn pick_point(x: &DyadicSet) -> Result<Rational, DyadicError> {
    x.pick_point()
}
