//! Closed-form dual solution of the batched LP.
//!
//! With dual weights `alpha` on the first `c`-bound, `beta` on the second,
//! `x_i` on the p-constraints and `y_i` on the q-constraints, the dual reads
//!
//! ```text
//! min sum_i (x_i + y_i)
//! alpha + beta >= 1
//! i x_i + sum_{l>i} (x_l + y_l) >= (i/k) alpha             i = 1..k
//! y_i   + sum_{l>i} (x_l + y_l) >= (1 - (i-1)/k) beta      i = 1..k
//! ```

use std::f64::consts::E;

use rayon::prelude::*;
use serde::Serialize;

use super::{build_primal, solve, MAX_CERTIFICATE_K, MAX_SOLVER_K};
use crate::error::{Error, Result};

/// Relative slack granted to constraints that bind exactly in real arithmetic.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DualCertificate {
    pub k: usize,
    pub tau: usize,
    /// `x[i - 1] = x_i`, before scaling.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dual_alpha: f64,
    pub dual_beta: f64,
    /// Smallest `s >= 1` such that `(s x, y)` is dual feasible.
    pub scale: f64,
}

/// One dual constraint as `s * from_x + from_y >= required`.
#[derive(Debug, Clone, Copy)]
struct Split {
    from_x: f64,
    from_y: f64,
    required: f64,
}

impl DualCertificate {
    /// Dual constraints in order p_1..p_k, q_1..q_k, split by contribution.
    fn splits(&self) -> Vec<Split> {
        let k = self.k;
        let kf = k as f64;
        // Suffix sums over l > i.
        let mut sx = vec![0.0; k + 1];
        let mut sy = vec![0.0; k + 1];
        for i in (1..k).rev() {
            sx[i] = sx[i + 1] + self.x[i];
            sy[i] = sy[i + 1] + self.y[i];
        }
        let mut out = Vec::with_capacity(2 * k);
        for i in 1..=k {
            out.push(Split {
                from_x: i as f64 * self.x[i - 1] + sx[i],
                from_y: sy[i],
                required: i as f64 / kf * self.dual_alpha,
            });
        }
        for i in 1..=k {
            out.push(Split {
                from_x: sx[i],
                from_y: self.y[i - 1] + sy[i],
                required: (k - i + 1) as f64 / kf * self.dual_beta,
            });
        }
        out
    }

    fn constraint_name(&self, index: usize) -> String {
        if index < self.k {
            format!("p_{}", index + 1)
        } else {
            format!("q_{}", index - self.k + 1)
        }
    }

    /// Smallest slack over all dual constraints with `x` scaled by `s`.
    pub fn min_slack(&self, s: f64) -> f64 {
        let weights = self.dual_alpha + self.dual_beta - 1.0;
        self.splits()
            .iter()
            .map(|c| s * c.from_x + c.from_y - c.required * (1.0 - ROUNDING_SLACK))
            .fold(weights, f64::min)
    }

    pub fn is_feasible(&self, s: f64) -> bool {
        self.min_slack(s) >= 0.0
    }

    fn minimal_scale(&self) -> Result<f64> {
        let mut scale: f64 = 1.0;
        for (index, c) in self.splits().iter().enumerate() {
            let need = c.required * (1.0 - ROUNDING_SLACK) - c.from_y;
            if need <= 0.0 {
                continue;
            }
            if c.from_x <= 0.0 {
                return Err(Error::CertificateInfeasible {
                    k: self.k,
                    constraint: self.constraint_name(index),
                });
            }
            scale = scale.max(need / c.from_x);
        }
        Ok(scale)
    }
}

/// Builds the dual solution for `k` batches and its minimal scale.
pub fn dual_certificate(k: usize) -> Result<DualCertificate> {
    if !(2..=MAX_CERTIFICATE_K).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= k <= {MAX_CERTIFICATE_K}, got {k}"
        )));
    }
    // tail[i] = sum_{j=i}^{k-1} 1/j, summed from the small end.
    let mut tail = vec![0.0; k + 1];
    for i in (1..k).rev() {
        tail[i] = tail[i + 1] + 1.0 / i as f64;
    }
    let tau = (2..=k)
        .find(|&t| tail[t] < 1.0 && 1.0 <= tail[t - 1])
        .expect("tail[1] >= 1 and tail[k] = 0");
    let kf = k as f64;
    let x = (1..=k)
        .map(|i| if i < tau { 0.0 } else { E / ((E + 1.0) * kf) * (1.0 - tail[i]) })
        .collect();
    let mut y = vec![0.0; k];
    y[k - 1] = 1.0 / ((E + 1.0) * kf);
    let mut cert = DualCertificate {
        k,
        tau,
        x,
        y,
        dual_alpha: E / (E + 1.0),
        dual_beta: 1.0 / (E + 1.0),
        scale: 1.0,
    };
    cert.scale = cert.minimal_scale()?;
    Ok(cert)
}

/// `sum_i (scale x_i + y_i)`.
pub fn dual_objective(cert: &DualCertificate) -> f64 {
    cert.scale * cert.x.iter().sum::<f64>() + cert.y.iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: usize,
    /// Solver optimum, present for `k <= MAX_SOLVER_K`.
    pub primal: Option<f64>,
    /// Certificate columns, present for `k >= 2`.
    pub dual: Option<f64>,
    pub scale: Option<f64>,
    pub tau: Option<usize>,
}

impl ConvergenceRow {
    /// `primal <= dual` whenever both are known.
    pub fn weak_duality_holds(&self) -> bool {
        match (self.primal, self.dual) {
            (Some(p), Some(d)) => p <= d,
            _ => true,
        }
    }
}

/// Primal optimum, dual objective and certificate scale for each `k`.
pub fn convergence_report(ks: &[usize]) -> Result<Vec<ConvergenceRow>> {
    ks.par_iter()
        .map(|&k| {
            if k == 0 || k > MAX_CERTIFICATE_K {
                return Err(Error::InvalidParameter(format!(
                    "need 1 <= k <= {MAX_CERTIFICATE_K}, got {k}"
                )));
            }
            let cert = if k >= 2 { Some(dual_certificate(k)?) } else { None };
            let primal = if k <= MAX_SOLVER_K {
                Some(solve(&build_primal(k)?)?.optimum)
            } else {
                None
            };
            Ok(ConvergenceRow {
                k,
                primal,
                dual: cert.as_ref().map(dual_objective),
                scale: cert.as_ref().map(|c| c.scale),
                tau: cert.as_ref().map(|c| c.tau),
            })
        })
        .collect()
}
