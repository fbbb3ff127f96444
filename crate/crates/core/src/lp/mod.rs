//! The factor-revealing LP for ordinal algorithms in the batched model.
//!
//! Variables are `(c, p_1..p_k, q_1..q_k)`, all nonnegative; the program
//! maximises `c` subject to
//!
//! ```text
//! c <= (1/k) sum_i i p_i
//! c <= sum_i (1 - (i-1)/k) q_i
//! i p_i + sum_{j<i} (p_j + q_j) <= 1     i = 1..k
//! q_i   + sum_{j<i} (p_j + q_j) <= 1     i = 1..k
//! ```

mod dual;
mod simplex;

pub use dual::{convergence_report, dual_certificate, dual_objective, ConvergenceRow, DualCertificate};
pub use simplex::{solve, LpSolution, MAX_PIVOTS};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `k` the dense solver accepts.
pub const MAX_SOLVER_K: usize = 5000;
/// Largest `k` for the closed-form certificate.
pub const MAX_CERTIFICATE_K: usize = 1_000_000;

/// `max objective . x` subject to `rows x <= rhs`, `x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpModel {
    /// Number of batches when built by [`build_primal`], else 0.
    pub k: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LpModel {
    pub fn new(objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != objective.len()) {
            return Err(Error::InvalidParameter(format!("row {r} has the wrong width")));
        }
        Ok(Self {
            k: 0,
            objective,
            rows,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Column of `c`.
    pub fn var_c(&self) -> usize {
        0
    }

    /// Column of `p_i`, `1 <= i <= k`.
    pub fn var_p(&self, i: usize) -> usize {
        i
    }

    /// Column of `q_i`, `1 <= i <= k`.
    pub fn var_q(&self, i: usize) -> usize {
        self.k + i
    }
}

/// Builds the primal for `k` batches.
pub fn build_primal(k: usize) -> Result<LpModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("need k >= 1".into()));
    }
    let width = 2 * k + 1;
    let kf = k as f64;
    let mut rows = Vec::with_capacity(2 * k + 2);

    let mut row = vec![0.0; width];
    row[0] = 1.0;
    for i in 1..=k {
        row[i] = -(i as f64) / kf;
    }
    rows.push(row);

    let mut row = vec![0.0; width];
    row[0] = 1.0;
    for i in 1..=k {
        row[k + i] = -(1.0 - (i - 1) as f64 / kf);
    }
    rows.push(row);

    for i in 1..=k {
        let mut row = vec![0.0; width];
        for j in 1..i {
            row[j] = 1.0;
            row[k + j] = 1.0;
        }
        row[i] = i as f64;
        rows.push(row);
    }
    for i in 1..=k {
        let mut row = vec![0.0; width];
        for j in 1..i {
            row[j] = 1.0;
            row[k + j] = 1.0;
        }
        row[k + i] = 1.0;
        rows.push(row);
    }

    let mut objective = vec![0.0; width];
    objective[0] = 1.0;
    let mut rhs = vec![1.0; 2 * k + 2];
    rhs[0] = 0.0;
    rhs[1] = 0.0;
    Ok(LpModel {
        k,
        objective,
        rows,
        rhs,
    })
}
