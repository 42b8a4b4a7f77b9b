//! Colorings of distance graphs `G(S)` on finite integer windows.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::rational::{self, Rational};
use crate::sequences::{self, LacunarySequence, SequenceError};
use crate::survivor::{self, SurvivorError, ThetaCertificate};

pub const DEFAULT_VERTEX_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ColoringError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Survivor(#[from] SurvivorError),
    #[error("window [{0}, {1}] is empty")]
    EmptyWindow(i64, i64),
    #[error("distances must be positive")]
    NonPositiveDistance,
    #[error("delta must satisfy 0 < delta <= 1/2")]
    InvalidDelta,
    #[error("window has {size} vertices, above the exact-search cap {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error("coloring needs {0} colors, more than supported")]
    TooManyColors(String),
    #[error("coloring has no rational multiplier")]
    NonRationalTheta,
    #[error("coloring covers [{0}, {1}] but the graph window is [{2}, {3}]")]
    WindowMismatch(i64, i64, i64, i64),
}

/// Closed integer window `[lo, hi]` of `G(S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceGraphWindow {
    forbidden: Vec<u64>,
    lo: i64,
    hi: i64,
}

impl DistanceGraphWindow {
    pub fn new(forbidden: &[u64], lo: i64, hi: i64) -> Result<Self, ColoringError> {
        if lo > hi {
            return Err(ColoringError::EmptyWindow(lo, hi));
        }
        if forbidden.contains(&0) {
            return Err(ColoringError::NonPositiveDistance);
        }
        let mut forbidden = forbidden.to_vec();
        forbidden.sort_unstable();
        forbidden.dedup();
        Ok(DistanceGraphWindow { forbidden, lo, hi })
    }

    pub fn forbidden(&self) -> &[u64] {
        &self.forbidden
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn vertex_count(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    pub fn is_edge(&self, x: i64, y: i64) -> bool {
        self.forbidden.binary_search(&x.abs_diff(y)).is_ok()
    }
}

/// Color ids `0..k` for every integer of a closed window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    lo: i64,
    assignment: Vec<u64>,
    k: u64,
    /// Multiplier of a Bohr-class coloring.
    theta: Option<Rational>,
}

impl Coloring {
    pub fn from_assignment(lo: i64, assignment: Vec<u64>, k: u64) -> Result<Self, ColoringError> {
        if assignment.is_empty() {
            return Err(ColoringError::EmptyWindow(lo, lo - 1));
        }
        if k == 0 || assignment.iter().any(|&c| c >= k) {
            return Err(ColoringError::TooManyColors(k.to_string()));
        }
        Ok(Coloring {
            lo,
            assignment,
            k,
            theta: None,
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn theta(&self) -> Option<&Rational> {
        self.theta.as_ref()
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.assignment.len() as i64 - 1)
    }

    pub fn color(&self, n: i64) -> Option<u64> {
        let idx = n.checked_sub(self.lo)?;
        usize::try_from(idx).ok().and_then(|i| self.assignment.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.lo + i as i64, c))
    }

    /// Distinct colors actually used.
    pub fn used_colors(&self) -> usize {
        let mut used = self.assignment.clone();
        used.sort_unstable();
        used.dedup();
        used.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,color\n");
        for (n, c) in self.iter() {
            let _ = writeln!(out, "{n},{c}");
        }
        out
    }

    /// Members of color class `c` inside the window.
    pub fn class_members(&self, c: u64) -> Vec<i64> {
        self.iter().filter(|&(_, col)| col == c).map(|(n, _)| n).collect()
    }
}

/// `θ = p/q` in lowest terms with `0 <= p < q`, as machine integers when they fit.
fn reduced_u64(theta: &Rational) -> Option<(u64, u64)> {
    let q = theta.denom();
    let p = theta.numer().mod_floor(q);
    Some((p.to_u64()?, q.to_u64()?))
}

/// Bohr-class coloring: `color(n) = floor(k * frac(n θ))` with `k = ceil(1/δ)`.
pub fn color_from_theta(theta: &Rational, delta: &Rational, window: (i64, i64)) -> Result<Coloring, ColoringError> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(ColoringError::EmptyWindow(lo, hi));
    }
    if !delta.is_positive() || delta > &rational::ratio(1, 2) {
        return Err(ColoringError::InvalidDelta);
    }
    let k_big = rational::ceil(&delta.recip());
    let k = k_big
        .to_u64()
        .ok_or_else(|| ColoringError::TooManyColors(k_big.to_string()))?;
    let assignment: Vec<u64> = match reduced_u64(theta) {
        Some((p, q)) => (lo..=hi)
            .into_par_iter()
            .map(|n| {
                let r = (n as i128).rem_euclid(q as i128) as u128;
                let residue = (r * p as u128) % q as u128;
                ((k as u128 * residue) / q as u128) as u64
            })
            .collect(),
        None => (lo..=hi)
            .into_par_iter()
            .map(|n| {
                let f = rational::frac(&(theta * BigInt::from(n)));
                (f * BigInt::from(k)).floor().to_integer().to_u64().expect("below k")
            })
            .collect(),
    };
    Ok(Coloring {
        lo,
        assignment,
        k,
        theta: Some(theta.clone()),
    })
}

/// The Bohr-class coloring of a certificate, with `δ` its guaranteed value.
pub fn color_from_certificate(cert: &ThetaCertificate, window: (i64, i64)) -> Result<Coloring, ColoringError> {
    color_from_theta(&cert.theta, &cert.delta, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Proper,
    Violation(i64, i64),
}

impl Verdict {
    pub fn is_proper(&self) -> bool {
        matches!(self, Verdict::Proper)
    }
}

/// Checks every pair `(x, x + s)`, `s` in `S`, inside the window. The
/// reported violation is the one with smallest `x`, then smallest `s`.
pub fn verify_proper(coloring: &Coloring, graph: &DistanceGraphWindow) -> Result<Verdict, ColoringError> {
    let (clo, chi) = coloring.window();
    let (lo, hi) = graph.window();
    if clo > lo || chi < hi {
        return Err(ColoringError::WindowMismatch(clo, chi, lo, hi));
    }
    let found = (lo..=hi).into_par_iter().find_map_first(|x| {
        let cx = coloring.color(x)?;
        graph
            .forbidden()
            .iter()
            .map_while(|&s| i64::try_from(s).ok().and_then(|s| x.checked_add(s)).filter(|&y| y <= hi))
            .find(|&y| coloring.color(y) == Some(cx))
            .map(|y| (x, y))
    });
    Ok(match found {
        Some((x, y)) => Verdict::Violation(x, y),
        None => Verdict::Proper,
    })
}

struct ExactSearch {
    adj: Vec<u64>,
    colors: Vec<Option<u32>>,
    best: u32,
    lower: u32,
}

impl ExactSearch {
    fn saturation(&self, v: usize) -> u64 {
        let mut mask = 0u64;
        let mut nb = self.adj[v];
        while nb != 0 {
            let u = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            if let Some(c) = self.colors[u] {
                mask |= 1 << c;
            }
        }
        mask
    }

    /// Highest saturation, then most uncolored neighbors, then lowest index.
    fn next_vertex(&self) -> Option<(usize, u64)> {
        let uncolored: u64 = self
            .colors
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .fold(0, |m, (i, _)| m | 1 << i);
        (0..self.adj.len())
            .filter(|&v| self.colors[v].is_none())
            .map(|v| {
                let sat = self.saturation(v);
                (v, sat, sat.count_ones(), (self.adj[v] & uncolored).count_ones())
            })
            .max_by(|a, b| (a.2, a.3).cmp(&(b.2, b.3)).then(b.0.cmp(&a.0)))
            .map(|(v, sat, _, _)| (v, sat))
    }

    fn search(&mut self, used: u32) {
        if self.best == self.lower {
            return;
        }
        let Some((v, sat)) = self.next_vertex() else {
            self.best = self.best.min(used);
            return;
        };
        for c in 0..(used + 1).min(self.best - 1) {
            if sat & (1 << c) != 0 {
                continue;
            }
            self.colors[v] = Some(c);
            self.search(used.max(c + 1));
            self.colors[v] = None;
            if self.best == self.lower {
                return;
            }
        }
    }
}

fn adjacency(graph: &DistanceGraphWindow) -> Vec<u64> {
    let n = graph.vertex_count();
    let (lo, _) = graph.window();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && graph.is_edge(lo + i as i64, lo + j as i64))
                .fold(0u64, |m, j| m | 1 << j)
        })
        .collect()
}

/// Largest clique among the greedy extensions from each start vertex.
fn greedy_clique(adj: &[u64]) -> u32 {
    (0..adj.len())
        .map(|start| {
            let mut clique = 1u64 << start;
            let mut candidates = adj[start];
            while candidates != 0 {
                let v = candidates.trailing_zeros() as usize;
                clique |= 1 << v;
                candidates &= adj[v];
            }
            clique.count_ones()
        })
        .max()
        .unwrap_or(0)
}

/// Exact chromatic number of the induced window graph.
pub fn chromatic_exact(graph: &DistanceGraphWindow, cap: usize) -> Result<usize, ColoringError> {
    let size = graph.vertex_count();
    if size > cap.min(DEFAULT_VERTEX_CAP) {
        return Err(ColoringError::WindowTooLarge {
            size,
            cap: cap.min(DEFAULT_VERTEX_CAP),
        });
    }
    let adj = adjacency(graph);
    let lower = greedy_clique(&adj);
    let mut search = ExactSearch {
        adj,
        colors: vec![None; size],
        best: size as u32 + 1,
        lower,
    };
    search.search(0);
    Ok(search.best as usize)
}

#[derive(Debug, Clone)]
pub struct WarmupColoring {
    pub coloring: Coloring,
    pub parts: usize,
    pub certificates: Vec<ThetaCertificate>,
}

/// Colors `n` by the quarters of `[0, 1)` containing `n θ_r`, one multiplier
/// per interleaved subsequence, for at most `4^K` colors.
pub fn warmup_coloring(seq: &LacunarySequence, window: (i64, i64)) -> Result<WarmupColoring, ColoringError> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(ColoringError::EmptyWindow(lo, hi));
    }
    let (parts, subs) = sequences::split_subsequences(seq)?;
    if parts > 31 {
        return Err(ColoringError::TooManyColors(format!("4^{parts}")));
    }
    let certificates = subs
        .iter()
        .map(|s| survivor::warmup_nested(s, s.len()))
        .collect::<Result<Vec<_>, _>>()?;
    let quarter_maps: Vec<Coloring> = certificates
        .iter()
        .map(|c| color_from_theta(&c.theta, &rational::ratio(1, 4), window))
        .collect::<Result<_, _>>()?;
    let assignment = (0..(hi - lo) as usize + 1)
        .map(|i| {
            quarter_maps
                .iter()
                .enumerate()
                .map(|(r, q)| q.assignment[i] << (2 * r))
                .sum()
        })
        .collect();
    Ok(WarmupColoring {
        coloring: Coloring {
            lo,
            assignment,
            k: 1 << (2 * parts),
            theta: None,
        },
        parts,
        certificates,
    })
}

/// `#{j in [0, q) : floor(k j / q) = c}`.
fn class_count(q: &BigInt, k: u64, c: u64) -> BigInt {
    let k = BigInt::from(k);
    let upper = (BigInt::from(c + 1) * q).div_ceil(&k);
    let lower = (BigInt::from(c) * q).div_ceil(&k);
    upper - lower
}

/// Densest class of a Bohr-class coloring and its exact density.
///
/// Class `c` is `q`-periodic and `n θ mod 1` runs over all of `j/q`, so its
/// density is the number of `j` with `floor(k j / q) = c`, divided by `q`.
/// Ties go to the smallest color id.
pub fn densest_color_class(coloring: &Coloring) -> Result<(u64, Rational), ColoringError> {
    let theta = coloring.theta.as_ref().ok_or(ColoringError::NonRationalTheta)?;
    let q = theta.denom();
    // Class 0 already attains the maximum ceil(q/k), so a capped scan is exact.
    let scan = coloring.k.min(1 << 20);
    let (best_c, best_count) = (0..scan)
        .map(|c| (c, class_count(q, coloring.k, c)))
        .fold((0u64, BigInt::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok((best_c, Rational::new(best_count, q.clone())))
}
