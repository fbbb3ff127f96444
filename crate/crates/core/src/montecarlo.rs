//! Seeded Monte Carlo estimates of competitive ratios and packing
//! probabilities.
//!
//! Trial `t` draws its arrival order from `derive_seed(seed, t, ORDER_STREAM)`
//! and its coin flips from `derive_seed(seed, t, ALGORITHM_STREAM)`. Trials run
//! in fixed-size batches whose partial results are merged in batch order, so
//! the report does not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    boosted_extended_secretary, classic_on_instance, extended_secretary, mixed_ordinal_1b,
    BoostingConfig, SelectionOutcome,
};
use crate::error::{Error, Result};
use crate::instance::{make_instance, optimal_packing, sample_order, ArrivalOrder, Instance, InstanceKind};
use crate::stream::{derive_seed, rng_from_seed, ALGORITHM_STREAM, ORDER_STREAM};

const BATCH: u64 = 1000;

/// The algorithm to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "alg")]
pub enum AlgorithmSpec {
    Classic { c: f64 },
    Extended { c: f64 },
    Boosted { alpha: f64, c: f64 },
    MixedOrdinal,
}

impl AlgorithmSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Classic { c } | Self::Extended { c } => BoostingConfig::new(1.0, c).map(|_| ()),
            Self::Boosted { alpha, c } => BoostingConfig::new(alpha, c).map(|_| ()),
            Self::MixedOrdinal => Ok(()),
        }
    }

    /// Runs the algorithm once.
    pub fn run(&self, inst: &Instance, order: &ArrivalOrder, algorithm_seed: u64) -> SelectionOutcome {
        match *self {
            Self::Classic { c } => classic_on_instance(inst, order, c),
            Self::Extended { c } => extended_secretary(inst, order, c),
            Self::Boosted { alpha, c } => {
                let cfg = BoostingConfig { alpha, sample_fraction: c };
                boosted_extended_secretary(inst, order, &cfg)
            }
            Self::MixedOrdinal => mixed_ordinal_1b(inst, order, &mut rng_from_seed(algorithm_seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateReport {
    pub algorithm: AlgorithmSpec,
    pub trials: u64,
    pub mean_ratio: f64,
    /// Sample standard deviation of the per-trial ratio over `sqrt(trials)`.
    pub std_error: f64,
    /// Empirical probability that each item is packed, by id.
    pub per_item_prob: BTreeMap<usize, f64>,
    pub seed: u64,
    pub opt_value: f64,
}

impl EstimateReport {
    /// Binomial standard error of `per_item_prob[id]`.
    pub fn item_std_error(&self, id: usize) -> f64 {
        let p = self.per_item_prob.get(&id).copied().unwrap_or(0.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,item,estimate,std_error,trials,seed\n");
        writeln!(out, "mean_ratio,,{},{},{},{}", self.mean_ratio, self.std_error, self.trials, self.seed).unwrap();
        for (&id, &p) in &self.per_item_prob {
            writeln!(out, "packed_prob,{id},{p},{},{},{}", self.item_std_error(id), self.trials, self.seed).unwrap();
        }
        out
    }
}

/// Running moments of one batch, merged with Chan's update.
#[derive(Debug, Clone)]
struct Partial {
    count: u64,
    mean: f64,
    m2: f64,
    packed: Vec<u64>,
}

impl Partial {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            packed: vec![0; n + 1],
        }
    }

    fn push(&mut self, ratio: f64) {
        self.count += 1;
        let d = ratio - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (ratio - self.mean);
    }

    fn merge(mut self, other: &Self) -> Self {
        let total = self.count + other.count;
        if other.count > 0 {
            let d = other.mean - self.mean;
            self.mean += d * other.count as f64 / total as f64;
            self.m2 += other.m2 + d * d * (self.count as f64 * other.count as f64) / total as f64;
        }
        self.count = total;
        for (a, b) in self.packed.iter_mut().zip(&other.packed) {
            *a += b;
        }
        self
    }
}

/// Estimates `E[v(ALG)] / v(OPT)` and per-item packing probabilities over
/// `trials` uniformly random arrival orders.
pub fn estimate(spec: &AlgorithmSpec, inst: &Instance, trials: u64, seed: u64) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    spec.validate()?;
    let opt = optimal_packing(inst)?.value;
    if opt.is_nan() || opt <= 0.0 {
        return Err(Error::DegenerateInstance);
    }
    let n = inst.len();
    let batches = trials.div_ceil(BATCH);
    let partials: Vec<Partial> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut part = Partial::new(n);
            for t in b * BATCH..((b + 1) * BATCH).min(trials) {
                let order = sample_order(n, derive_seed(seed, t, ORDER_STREAM));
                let out = spec.run(inst, &order, derive_seed(seed, t, ALGORITHM_STREAM));
                assert!(out.is_feasible(inst), "infeasible selection in trial {t}: {out:?}");
                for id in out.ids() {
                    part.packed[id] += 1;
                }
                part.push(out.total_value / opt);
            }
            part
        })
        .collect();
    let total = partials.iter().fold(Partial::new(n), |acc, p| acc.merge(p));
    let sd = if trials > 1 {
        (total.m2 / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(EstimateReport {
        algorithm: *spec,
        trials,
        mean_ratio: total.mean,
        std_error: sd / (trials as f64).sqrt(),
        per_item_prob: (1..=n).map(|id| (id, total.packed[id] as f64 / trials as f64)).collect(),
        seed,
        opt_value: opt,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub report: EstimateReport,
}

/// Boosted algorithm at sample fraction `c` for each `alpha`. Boost-tight
/// instance kinds are rebuilt for every `alpha`; other kinds are fixed.
#[allow(clippy::too_many_arguments)]
pub fn sweep_alpha(
    kind: InstanceKind,
    alphas: &[f64],
    n: usize,
    capacity: usize,
    epsilon: f64,
    c: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let inst = make_instance(kind.with_alpha(alpha), n, capacity, epsilon)?;
            let report = estimate(&AlgorithmSpec::Boosted { alpha, c }, &inst, trials, seed)?;
            Ok(SweepRow { alpha, report })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,mean_ratio,std_error,trials,seed\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.alpha, r.report.mean_ratio, r.report.std_error, r.report.trials, r.report.seed
        )
        .unwrap();
    }
    out
}
