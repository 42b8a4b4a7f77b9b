//! Dense two-phase simplex for `min c·z` subject to `A z = b`, `z >= 0`.
//! Entering columns follow the most negative reduced cost; after a run of
//! degenerate pivots Bland's rule takes over until the objective moves, which
//! rules out cycling. Sizes here are a few dozen rows by a few thousand columns.

const EPS: f64 = 1e-11;
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SimplexError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Multipliers `y = c_B B^{-1}`, one per row.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

struct Tableau {
    /// `rows x (cols + rows + 1)`; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + self.t.len()
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.width()]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f.abs() > 0.0 {
                for j in 0..=w {
                    line[j] -= f * pivot_row[j];
                }
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Reduced costs `c_j - c_B B^{-1} A_j` for every column.
    fn reduced(&self, cost: &[f64]) -> Vec<f64> {
        let w = self.width();
        let mut d = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate().take(w) {
                    *dj -= cb * self.t[r][j];
                }
            }
        }
        d
    }

    /// Minimizes `cost` over columns `< allowed`; artificial columns beyond it never enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize, limit: usize) -> Result<(), SimplexError> {
        let mut stalled = 0usize;
        loop {
            if self.iterations >= limit {
                return Err(SimplexError::IterationLimit);
            }
            let d = self.reduced(cost);
            let entering = if stalled >= STALL_LIMIT {
                (0..allowed).find(|&j| d[j] < -EPS)
            } else {
                (0..allowed)
                    .filter(|&j| d[j] < -EPS)
                    .min_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite costs"))
            };
            let Some(col) = entering else {
                return Ok(());
            };
            let row = (0..self.t.len())
                .filter(|&r| self.t[r][col] > EPS)
                .min_by(|&a, &b| {
                    let ra = self.rhs(a) / self.t[a][col];
                    let rb = self.rhs(b) / self.t[b][col];
                    ra.partial_cmp(&rb)
                        .expect("finite ratios")
                        .then(self.basis[a].cmp(&self.basis[b]))
                })
                .ok_or(SimplexError::Unbounded)?;
            if self.rhs(row) / self.t[row][col] > EPS {
                stalled = 0;
            } else {
                stalled += 1;
            }
            self.pivot(row, col);
        }
    }
}

/// Solves `min c·z`, `A z = b`, `z >= 0` with `b >= 0`.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64], limit: usize) -> Result<SimplexSolution, SimplexError> {
    let rows = a.len();
    let cols = c.len();
    let width = cols + rows;
    let t = (0..rows)
        .map(|r| {
            let mut line = vec![0.0; width + 1];
            line[..cols].copy_from_slice(&a[r]);
            line[cols + r] = 1.0;
            line[width] = b[r];
            line
        })
        .collect();
    let mut tab = Tableau {
        t,
        basis: (cols..width).collect(),
        cols,
        iterations: 0,
    };

    let mut phase1 = vec![0.0; width];
    phase1[cols..].iter_mut().for_each(|v| *v = 1.0);
    tab.optimize(&phase1, cols, limit)?;
    let infeasibility: f64 = (0..rows).filter(|&r| tab.basis[r] >= cols).map(|r| tab.rhs(r)).sum();
    if infeasibility > 1e-9 {
        return Err(SimplexError::Infeasible);
    }
    // Drive zero-level artificials out of the basis where a real column can replace them.
    for r in 0..rows {
        if tab.basis[r] >= cols {
            if let Some(col) = (0..cols).find(|&j| tab.t[r][j].abs() > 1e-9) {
                tab.pivot(r, col);
            }
        }
    }

    let mut phase2 = vec![0.0; width];
    phase2[..cols].copy_from_slice(c);
    tab.optimize(&phase2, cols, limit)?;

    let mut primal = vec![0.0; cols];
    for (r, &bcol) in tab.basis.iter().enumerate() {
        if bcol < cols {
            primal[bcol] = tab.rhs(r);
        }
    }
    let d = tab.reduced(&phase2);
    let dual = (0..rows).map(|r| -d[cols + r]).collect();
    let objective = primal.iter().zip(c).map(|(z, c)| z * c).sum();
    Ok(SimplexSolution {
        objective,
        primal,
        dual,
        iterations: tab.iterations,
    })
}
