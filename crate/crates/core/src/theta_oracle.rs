//! Exact evaluation of `‖nθ‖` and exhaustive maximization of
//! `f(θ) = min_j ‖n_j θ‖` on small truncations.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::rational::{self, Rational};

/// Candidate evaluations allowed in [`optimal_theta`].
pub const CANDIDATE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("term list is empty")]
    EmptyTerms,
    #[error("terms must be positive")]
    ZeroTerm,
    #[error("candidate set of size {0} exceeds the budget")]
    TooLarge(u64),
    #[error("grid resolution must be at least 2")]
    ResolutionTooSmall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermDistance {
    pub term: u64,
    #[serde(serialize_with = "ser_bigint")]
    pub nearest: BigInt,
    #[serde(with = "rational::serde_pq")]
    pub distance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistProfile {
    #[serde(with = "rational::serde_pq")]
    pub theta: Rational,
    pub terms: Vec<u64>,
    pub per_term: Vec<TermDistance>,
    #[serde(with = "rational::serde_pq")]
    pub min_value: Rational,
    pub argmin: usize,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Nearest integer to `nθ` (ties round down) and the exact distance to it.
pub fn nearest_and_distance(theta: &Rational, n: u64) -> (BigInt, Rational) {
    let scaled = theta * BigInt::from(n);
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = rational::ratio(1, 2);
    let floor = floor.to_integer();
    if frac <= half {
        (floor, frac)
    } else {
        (floor + BigInt::one(), Rational::one() - frac)
    }
}

/// `‖nθ‖`.
pub fn dist_to_int(theta: &Rational, n: u64) -> Rational {
    nearest_and_distance(theta, n).1
}

pub fn min_dist(theta: &Rational, terms: &[u64]) -> Result<DistProfile, OracleError> {
    if terms.is_empty() {
        return Err(OracleError::EmptyTerms);
    }
    let per_term: Vec<TermDistance> = terms
        .iter()
        .map(|&term| {
            let (nearest, distance) = nearest_and_distance(theta, term);
            TermDistance {
                term,
                nearest,
                distance,
            }
        })
        .collect();
    let (argmin, min_value) = per_term
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.distance.cmp(&b.1.distance).then(a.0.cmp(&b.0)))
        .map(|(i, t)| (i, t.distance.clone()))
        .expect("nonempty");
    Ok(DistProfile {
        theta: theta.clone(),
        terms: terms.to_vec(),
        per_term,
        min_value,
        argmin,
    })
}

/// A candidate `θ = r/d` with `f(θ) = num/d`; plain integers keep the sweep fast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    r: u64,
    d: u64,
    num: u64,
}

impl Candidate {
    /// Better value first, then smaller θ.
    fn better(&self, other: &Candidate) -> Ordering {
        let value = (self.num as u128 * other.d as u128).cmp(&(other.num as u128 * self.d as u128));
        let theta = (other.r as u128 * self.d as u128).cmp(&(self.r as u128 * other.d as u128));
        value.then(theta)
    }

    fn pick(a: Candidate, b: Candidate) -> Candidate {
        if b.better(&a) == Ordering::Greater {
            b
        } else {
            a
        }
    }
}

fn value_numerator(terms: &[u64], r: u64, d: u64) -> u64 {
    terms
        .iter()
        .map(|&n| {
            let t = ((n as u128 * r as u128) % d as u128) as u64;
            t.min(d - t)
        })
        .min()
        .expect("nonempty")
}

fn normalize(terms: &[u64]) -> Result<Vec<u64>, OracleError> {
    if terms.is_empty() {
        return Err(OracleError::EmptyTerms);
    }
    if terms.contains(&0) {
        return Err(OracleError::ZeroTerm);
    }
    let set: BTreeSet<u64> = terms.iter().copied().collect();
    Ok(set.into_iter().collect())
}

/// Denominators of the breakpoints and crossings of the tent maps
/// `θ ↦ ‖n θ‖`: `n_i + n_j`, `|n_i - n_j|` and `2 n_j`.
pub fn candidate_denominators(terms: &[u64]) -> BTreeSet<u64> {
    let mut dens = BTreeSet::new();
    for (i, &a) in terms.iter().enumerate() {
        dens.insert(2 * a);
        for &b in &terms[i + 1..] {
            dens.insert(a + b);
            if a != b {
                dens.insert(a.abs_diff(b));
            }
        }
    }
    dens
}

/// The exact maximizer of `min_j ‖n_j θ‖` over `[0, 1)`, smallest θ on ties.
pub fn optimal_theta(terms: &[u64]) -> Result<(Rational, Rational), OracleError> {
    let terms = normalize(terms)?;
    let dens: Vec<u64> = candidate_denominators(&terms).into_iter().collect();
    let total: u64 = dens.iter().sum();
    if total > CANDIDATE_BUDGET {
        return Err(OracleError::TooLarge(total));
    }
    let best = dens
        .par_iter()
        .map(|&d| {
            (0..d)
                .map(|r| Candidate {
                    r,
                    d,
                    num: value_numerator(&terms, r, d),
                })
                .reduce(Candidate::pick)
                .expect("d >= 2")
        })
        .reduce_with(Candidate::pick)
        .expect("nonempty");
    Ok((
        Rational::new(BigInt::from(best.r), BigInt::from(best.d)),
        Rational::new(BigInt::from(best.num), BigInt::from(best.d)),
    ))
}

/// Best grid point `k/resolution`; the value is a lower bound on the optimum.
pub fn grid_refine(terms: &[u64], resolution: u64) -> Result<(Rational, Rational), OracleError> {
    let terms = normalize(terms)?;
    if resolution < 2 {
        return Err(OracleError::ResolutionTooSmall);
    }
    let best = (0..resolution)
        .into_par_iter()
        .map(|r| Candidate {
            r,
            d: resolution,
            num: value_numerator(&terms, r, resolution),
        })
        .reduce_with(Candidate::pick)
        .expect("resolution >= 2");
    Ok((
        Rational::new(BigInt::from(best.r), BigInt::from(best.d)),
        Rational::new(BigInt::from(best.num), BigInt::from(best.d)),
    ))
}

/// `f(θ)` for an arbitrary rational, via the exact profile.
pub fn objective(theta: &Rational, terms: &[u64]) -> Rational {
    match min_dist(theta, terms) {
        Ok(p) => p.min_value,
        Err(_) => Rational::zero(),
    }
}
