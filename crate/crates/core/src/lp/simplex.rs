//! Dense tableau simplex for `max c.x, Ax <= b, x >= 0` with `b >= 0`.
//!
//! Entering columns follow Dantzig's rule; after a run of degenerate pivots
//! the solver falls back to Bland's rule until the objective moves again,
//! which rules out cycling.

use serde::Serialize;

use super::{LpModel, MAX_SOLVER_K};
use crate::error::{Error, Result};

pub const MAX_PIVOTS: usize = 1_000_000;
const DEGENERATE_STREAK: usize = 20;
const COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub optimum: f64,
    /// Optimal vertex in model variable order.
    pub x: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    width: usize,
    /// `m` constraint rows then the reduced-cost row; last column is the rhs.
    cells: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn row(&self, r: usize) -> &[f64] {
        &self.cells[r * self.width..(r + 1) * self.width]
    }

    fn at(&self, r: usize, col: usize) -> f64 {
        self.cells[r * self.width + col]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn cost_row(&self) -> &[f64] {
        self.row(self.m)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(r, s);
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v *= inv;
        }
        prow[s] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[s];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[s] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[r] = s;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let cost = &self.cost_row()[..self.width - 1];
        if bland {
            cost.iter().position(|&d| d > COST_TOL)
        } else {
            let (s, &d) = cost.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
            (d > COST_TOL).then_some(s)
        }
    }

    /// Minimum-ratio row; ties go to the smallest basic variable index.
    fn leaving(&self, s: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            let a = self.at(r, s);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bt)) => {
                    if ratio < bt - 1e-12 * bt.max(1.0)
                        || (ratio <= bt + 1e-12 * bt.max(1.0) && self.basis[r] < self.basis[br])
                    {
                        Some((r, ratio))
                    } else {
                        Some((br, bt))
                    }
                }
            };
        }
        best
    }
}

/// Solves `model` from the slack basis.
pub fn solve(model: &LpModel) -> Result<LpSolution> {
    if model.k > MAX_SOLVER_K {
        return Err(Error::InvalidParameter(format!(
            "k = {} exceeds the solver cap {MAX_SOLVER_K}",
            model.k
        )));
    }
    if let Some(row) = model.rhs.iter().position(|&b| b.is_nan() || b < 0.0) {
        return Err(Error::InfeasibleStart { row });
    }
    let n = model.num_vars();
    let m = model.num_constraints();
    let width = n + m + 1;
    let mut cells = vec![0.0; (m + 1) * width];
    for (r, (row, &b)) in model.rows.iter().zip(&model.rhs).enumerate() {
        let base = r * width;
        cells[base..base + n].copy_from_slice(row);
        cells[base + n + r] = 1.0;
        cells[base + width - 1] = b;
    }
    cells[m * width..m * width + n].copy_from_slice(&model.objective);
    let mut t = Tableau {
        m,
        width,
        cells,
        basis: (n..n + m).collect(),
    };

    let mut pivots = 0;
    let mut streak = 0;
    while let Some(s) = t.entering(streak >= DEGENERATE_STREAK) {
        if pivots >= MAX_PIVOTS {
            return Err(Error::SolverStalled { pivots });
        }
        let (r, ratio) = t.leaving(s).ok_or(Error::Unbounded)?;
        if ratio == 0.0 {
            streak += 1;
        } else {
            streak = 0;
        }
        t.pivot(r, s);
        pivots += 1;
    }

    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    let optimum = model.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { optimum, x, pivots })
}
