//! Largest `A ⊆ Z/NZ` whose cyclic differences avoid `H ∪ (N - H)`.
//!
//! Positions are scanned left to right with the last `w = max(H)` choices in
//! a bitmask (bit `t` is the position `t` steps back). The first `w`
//! positions (the seam) are enumerated; wrap-around pairs join the final
//! mask to the seam. Seams are tried in order of a linear upper bound and
//! the search stops once no remaining seam can beat the best found.

use std::collections::HashMap;

/// Wrap-around and transition masks for one `(H, N)` instance.
struct Instance {
    w: usize,
    n: usize,
    full: u32,
    /// Bits `d - 1` for `d ∈ H`: a new position clashes with any of these.
    hmask: u32,
    /// `wrap[t]`: seam bits clashing with the final-mask bit `t`.
    wrap: Vec<u32>,
}

impl Instance {
    fn new(h: &[u64], n: usize) -> Instance {
        let w = *h.iter().max().expect("nonempty") as usize;
        let hmask = h.iter().fold(0u32, |m, &d| m | 1 << (d - 1));
        // Final bit t is position N-1-t; seam position j is seam bit w-1-j.
        // Their cyclic distance is j + 1 + t.
        let wrap = (0..w)
            .map(|t| {
                (0..w)
                    .filter(|&j| h.contains(&((j + 1 + t) as u64)))
                    .fold(0u32, |m, j| m | 1 << (w - 1 - j))
            })
            .collect();
        Instance {
            w,
            n,
            full: if w == 32 { u32::MAX } else { (1u32 << w) - 1 },
            hmask,
            wrap,
        }
    }

    fn step(&self, mask: u32, bit: u32) -> Option<u32> {
        if bit == 1 && mask & self.hmask != 0 {
            return None;
        }
        Some(((mask << 1) | bit) & self.full)
    }

    /// Final-mask bits incompatible with `seam`.
    fn bad_final(&self, seam: u32) -> u32 {
        self.wrap
            .iter()
            .enumerate()
            .filter(|(_, &wm)| wm & seam != 0)
            .fold(0u32, |m, (t, _)| m | 1 << t)
    }

    /// Valid seams with position 0 chosen (any nonempty solution rotates to one).
    fn seams(&self) -> Vec<u32> {
        let mut layer = vec![1u32];
        for _ in 1..self.w {
            layer = layer
                .into_iter()
                .flat_map(|m| [self.step(m, 0), self.step(m, 1)])
                .flatten()
                .collect();
        }
        layer
    }

    /// `best[mask]`: most positions choosable in `w..N` after `mask`, ignoring wrap.
    fn linear_bound(&self) -> Vec<i16> {
        let size = 1usize << self.w;
        let mut next = vec![0i16; size];
        let mut cur = vec![0i16; size];
        for _ in self.w..self.n {
            for (mask, slot) in cur.iter_mut().enumerate() {
                let mask = mask as u32;
                let skip = next[self.step(mask, 0).expect("zero bit") as usize];
                let take = self.step(mask, 1).map(|m| next[m as usize] + 1);
                *slot = take.map_or(skip, |t| t.max(skip));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        next
    }

    /// Best cyclic count for a fixed seam, filling dense scratch arrays.
    fn solve_seam<'a>(&self, seam: u32, mut cur: &'a mut [i16], mut next: &'a mut [i16]) -> i16 {
        let mut active = vec![seam];
        cur[seam as usize] = seam.count_ones() as i16;
        let mut next_active = Vec::new();
        for _ in self.w..self.n {
            for &mask in &active {
                let v = cur[mask as usize];
                for (bit, gain) in [(0, 0), (1, 1)] {
                    if let Some(m) = self.step(mask, bit) {
                        let slot = &mut next[m as usize];
                        if *slot < 0 {
                            next_active.push(m);
                        }
                        *slot = (*slot).max(v + gain);
                    }
                }
                cur[mask as usize] = -1;
            }
            std::mem::swap(&mut cur, &mut next);
            std::mem::swap(&mut active, &mut next_active);
            next_active.clear();
        }
        let bad = self.bad_final(seam);
        let best = active
            .iter()
            .filter(|&&m| m & bad == 0)
            .map(|&m| cur[m as usize])
            .max()
            .unwrap_or(-1);
        for &m in &active {
            cur[m as usize] = -1;
        }
        best
    }

    /// Positions of one optimal set for `seam`.
    fn reconstruct(&self, seam: u32) -> Vec<u64> {
        let mut layers: Vec<HashMap<u32, (i16, u32)>> = vec![HashMap::from([(seam, (seam.count_ones() as i16, 0))])];
        for _ in self.w..self.n {
            let prev = layers.last().expect("nonempty");
            let mut layer: HashMap<u32, (i16, u32)> = HashMap::new();
            let mut keys: Vec<u32> = prev.keys().copied().collect();
            keys.sort_unstable();
            for mask in keys {
                let v = prev[&mask].0;
                for (bit, gain) in [(0, 0), (1, 1)] {
                    if let Some(m) = self.step(mask, bit) {
                        let e = layer.entry(m).or_insert((-1, 0));
                        if v + gain > e.0 {
                            *e = (v + gain, mask);
                        }
                    }
                }
            }
            layers.push(layer);
        }
        let bad = self.bad_final(seam);
        let last = layers.last().expect("nonempty");
        let (mut mask, _) = last
            .iter()
            .filter(|(&m, _)| m & bad == 0)
            .max_by_key(|(&m, &(v, _))| (v, std::cmp::Reverse(m)))
            .map(|(&m, &v)| (m, v))
            .expect("seam is feasible");
        let mut chosen = Vec::new();
        for pos in (self.w..self.n).rev() {
            if mask & 1 == 1 {
                chosen.push(pos as u64);
            }
            mask = layers[pos - self.w + 1][&mask].1;
        }
        chosen.extend((0..self.w).filter(|&j| seam & (1 << (self.w - 1 - j)) != 0).map(|j| j as u64));
        chosen.sort_unstable();
        chosen
    }
}

/// Maximum avoiding set; `h` is nonempty, `max(h) <= 24` and `n > 2 max(h)`.
pub(super) fn max_avoiding_set(h: &[u64], n: usize) -> Vec<u64> {
    let inst = Instance::new(h, n);
    let bound = inst.linear_bound();
    let mut seams: Vec<(i16, u32)> = inst
        .seams()
        .into_iter()
        .map(|s| (s.count_ones() as i16 + bound[s as usize], s))
        .collect();
    seams.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let size = 1usize << inst.w;
    let mut cur = vec![-1i16; size];
    let mut next = vec![-1i16; size];
    let mut best = (0i16, None);
    for &(ub, seam) in &seams {
        if ub <= best.0 {
            break;
        }
        let v = inst.solve_seam(seam, &mut cur, &mut next);
        if v > best.0 {
            best = (v, Some(seam));
        }
    }
    let seam = best.1.expect("position 0 alone is always feasible");
    inst.reconstruct(seam)
}
