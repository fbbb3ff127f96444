//! Problem instances, rank bookkeeping, the offline optimum and the
//! adversarial instance families used throughout the analysis.
//!
//! Items are stored in rank order: the item with id `i` (1-based) is the
//! `i`-th most valuable non-dummy item. Dummy items (value zero) follow all
//! real items and never take part in rank maps or in the optimum.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::rng_from_seed;

/// Adjacent values of generated instances must differ by at least this much,
/// relative to their magnitude.
pub const MIN_RELATIVE_GAP: f64 = 1e3 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub id: usize,
    pub value: f64,
    pub size: usize,
    pub dummy: bool,
}

impl Item {
    pub fn is_small(&self) -> bool {
        self.size == 1
    }
}

/// A 1-B knapsack instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    items: Vec<Item>,
    capacity: usize,
}

impl Instance {
    /// Builds an instance from `(value, size)` pairs in any order; items are
    /// re-labelled by decreasing value.
    pub fn new(capacity: usize, entries: impl IntoIterator<Item = (f64, usize)>) -> Result<Self> {
        let mut entries: Vec<(f64, usize)> = entries.into_iter().collect();
        for &(value, _) in &entries {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "item values must be positive and finite, got {value}"
                )));
            }
        }
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));
        let items = entries
            .into_iter()
            .enumerate()
            .map(|(idx, (value, size))| Item {
                id: idx + 1,
                value,
                size,
                dummy: false,
            })
            .collect();
        Self::from_items(capacity, items)
    }

    /// Validates items that are already in rank order with ids `1..=n`.
    pub fn from_items(capacity: usize, items: Vec<Item>) -> Result<Self> {
        if capacity < 2 {
            return Err(Error::InvalidInstance(format!(
                "capacity must be at least 2, got {capacity}"
            )));
        }
        let mut seen_dummy = false;
        for (idx, item) in items.iter().enumerate() {
            if item.id != idx + 1 {
                return Err(Error::InvalidInstance(format!(
                    "item at position {} has id {}",
                    idx + 1,
                    item.id
                )));
            }
            if item.size != 1 && item.size != capacity {
                return Err(Error::NotOneB {
                    id: item.id,
                    size: item.size,
                    capacity,
                });
            }
            if item.dummy {
                seen_dummy = true;
                if item.value != 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "dummy item {} must have value 0",
                        item.id
                    )));
                }
                continue;
            }
            if seen_dummy {
                return Err(Error::InvalidInstance(
                    "dummy items must follow all real items".into(),
                ));
            }
            if !(item.value.is_finite() && item.value > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "item {} has non-positive value {}",
                    item.id, item.value
                )));
            }
            if idx > 0 && items[idx - 1].value <= item.value {
                return Err(Error::InvalidInstance(format!(
                    "values must be pairwise distinct and decreasing by id (items {} and {})",
                    idx,
                    idx + 1
                )));
            }
        }
        Ok(Self { items, capacity })
    }

    /// Appends `count` zero-value dummy items of the given size.
    pub fn with_dummies(mut self, count: usize, size: usize) -> Result<Self> {
        if size != 1 && size != self.capacity {
            return Err(Error::NotOneB {
                id: self.items.len() + 1,
                size,
                capacity: self.capacity,
            });
        }
        for _ in 0..count {
            let id = self.items.len() + 1;
            self.items.push(Item {
                id,
                value: 0.0,
                size,
                dummy: true,
            });
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    /// Item by 1-based id. Panics on an out-of-range id.
    pub fn item(&self, id: usize) -> &Item {
        &self.items[id - 1]
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|it| it.value)
    }

    pub fn real_items(&self) -> impl Iterator<Item = &Item> + '_ {
        self.items.iter().filter(|it| !it.dummy)
    }

    pub fn rank_maps(&self) -> RankMaps {
        RankMaps::new(self)
    }

    /// Item values as seen by an algorithm that boosts small items by `alpha`.
    pub fn boosted_values(&self, alpha: f64) -> Vec<f64> {
        self.items
            .iter()
            .map(|it| if it.is_small() { alpha * it.value } else { it.value })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ItemRepr {
    id: usize,
    value: String,
    size: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    dummy: bool,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    capacity: usize,
    items: Vec<ItemRepr>,
}

impl From<Instance> for InstanceRepr {
    fn from(inst: Instance) -> Self {
        Self {
            capacity: inst.capacity,
            items: inst
                .items
                .iter()
                .map(|it| ItemRepr {
                    id: it.id,
                    // Display of f64 is the shortest string that parses back exactly.
                    value: it.value.to_string(),
                    size: it.size,
                    dummy: it.dummy,
                })
                .collect(),
        }
    }
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(repr: InstanceRepr) -> Result<Self> {
        let items = repr
            .items
            .into_iter()
            .map(|it| {
                let value = it.value.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidInstance(format!("item {}: bad value {:?}: {e}", it.id, it.value))
                })?;
                Ok(Item {
                    id: it.id,
                    value,
                    size: it.size,
                    dummy: it.dummy,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::from_items(repr.capacity, items)
    }
}

/// Small-item ranks `r_s(i)` and their inverse `r'_g(a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMaps {
    /// Indexed by id; `None` for large and dummy items. Index 0 is unused.
    small_rank: Vec<Option<usize>>,
    /// `small_rank_inverse[a - 1]` is the id of the small item with small rank `a`.
    small_rank_inverse: Vec<usize>,
}

impl RankMaps {
    fn new(inst: &Instance) -> Self {
        let mut small_rank = vec![None; inst.len() + 1];
        let mut small_rank_inverse = Vec::new();
        for it in inst.real_items().filter(|it| it.is_small()) {
            small_rank_inverse.push(it.id);
            small_rank[it.id] = Some(small_rank_inverse.len());
        }
        Self {
            small_rank,
            small_rank_inverse,
        }
    }

    pub fn small_rank(&self, id: usize) -> Option<usize> {
        self.small_rank.get(id).copied().flatten()
    }

    /// Global rank (id) of the small item with small rank `a`.
    pub fn global_rank_of_small(&self, a: usize) -> Option<usize> {
        a.checked_sub(1)
            .and_then(|idx| self.small_rank_inverse.get(idx))
            .copied()
    }

    pub fn small_count(&self) -> usize {
        self.small_rank_inverse.len()
    }

    pub fn small_ids(&self) -> &[usize] {
        &self.small_rank_inverse
    }
}

/// A permutation of item ids, optionally remembering the seed that drew it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalOrder {
    positions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl ArrivalOrder {
    /// An explicit order; `positions[t]` is the id arriving in round `t + 1`.
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        let n = positions.len();
        let mut seen = vec![false; n + 1];
        for &id in &positions {
            if id == 0 || id > n || seen[id] {
                return Err(Error::InvalidOrder(format!(
                    "{positions:?} is not a permutation of 1..={n}"
                )));
            }
            seen[id] = true;
        }
        Ok(Self {
            positions,
            seed: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            positions: (1..=n).collect(),
            seed: None,
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Uniformly random arrival order of `n` items, deterministic in `seed`.
pub fn sample_order(n: usize, seed: u64) -> ArrivalOrder {
    let mut positions = Vec::with_capacity(n);
    shuffle_into(&mut positions, n, seed);
    ArrivalOrder {
        positions,
        seed: Some(seed),
    }
}

/// Fills `buf` with a uniformly random permutation of `1..=n`.
pub(crate) fn shuffle_into(buf: &mut Vec<usize>, n: usize, seed: u64) {
    buf.clear();
    buf.extend(1..=n);
    let mut rng = rng_from_seed(seed);
    buf.shuffle(&mut rng);
}

/// An offline packing: the chosen ids (ascending) and their total value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub ids: Vec<usize>,
    pub value: f64,
}

/// Maximum-value packing of a 1-B instance: either the best large item or the
/// top `min(B, |small|)` small items.
pub fn optimal_packing(inst: &Instance) -> Result<Packing> {
    if inst.real_items().next().is_none() {
        return Err(Error::EmptyInstance);
    }
    let best_large = inst.real_items().find(|it| !it.is_small());
    let smalls: Vec<&Item> = inst
        .real_items()
        .filter(|it| it.is_small())
        .take(inst.capacity())
        .collect();
    let small_value: f64 = smalls.iter().map(|it| it.value).sum();
    match best_large {
        Some(large) if smalls.is_empty() || large.value > small_value => Ok(Packing {
            ids: vec![large.id],
            value: large.value,
        }),
        _ => Ok(Packing {
            ids: smalls.iter().map(|it| it.id).collect(),
            value: small_value,
        }),
    }
}

/// The named instance families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InstanceKind {
    /// All items large, `v_1 = 1`, `v_i = eps^i`.
    I1,
    /// `n - 2` large items and two small ones at the bottom, `v_i = 1 + eps^i`.
    I2,
    /// After boosting by `alpha`: a small item at 1, a large item at `1 - eps`,
    /// everything else `O(eps)` and large.
    BoostTightUpper { alpha: f64 },
    /// After boosting by `alpha`: small `x`, large `b2, b3, b4`, small `y`, all
    /// within `O(eps)` of 1, everything else `O(eps)` and large.
    BoostTightTheta15 { alpha: f64 },
    /// `n = 2B`; `B` large items above `B` small ones whose union is optimal.
    OrdinalPairSmallOpt,
    /// As [`InstanceKind::OrdinalPairSmallOpt`] with `v_1 = B^2`.
    OrdinalPairLargeOpt,
    /// Uniform values in (0, 1), each item small with probability 1/2.
    UniformRandom { seed: u64 },
}

impl InstanceKind {
    /// Replaces the boosting factor of the boost-tight kinds.
    pub fn with_alpha(self, alpha: f64) -> Self {
        match self {
            Self::BoostTightUpper { .. } => Self::BoostTightUpper { alpha },
            Self::BoostTightTheta15 { .. } => Self::BoostTightTheta15 { alpha },
            other => other,
        }
    }
}

fn check_decreasing(values: &[f64], what: &str) -> Result<()> {
    for (idx, pair) in values.windows(2).enumerate() {
        let (hi, lo) = (pair[0], pair[1]);
        if !(lo > 0.0 && hi - lo >= MIN_RELATIVE_GAP * hi.abs()) {
            return Err(Error::DegenerateEpsilon(format!(
                "{what}: positions {} and {} are not separated ({hi} vs {lo})",
                idx + 1,
                idx + 2
            )));
        }
    }
    Ok(())
}

fn tail_values(count: usize, epsilon: f64) -> impl Iterator<Item = f64> {
    // Distinct, decreasing, all below epsilon.
    let denom = (count + 1) as f64;
    (0..count).map(move |t| epsilon * (count - t) as f64 / denom)
}

/// Instantiates one of the named families.
pub fn make_instance(kind: InstanceKind, n: usize, capacity: usize, epsilon: f64) -> Result<Instance> {
    if capacity < 2 {
        return Err(Error::InvalidParameter(format!(
            "capacity must be at least 2, got {capacity}"
        )));
    }
    let needs_epsilon = !matches!(kind, InstanceKind::UniformRandom { .. });
    if needs_epsilon && !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::DegenerateEpsilon(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let b = capacity;
    match kind {
        InstanceKind::I1 => {
            if n < 1 {
                return Err(Error::InvalidParameter("I1 needs n >= 1".into()));
            }
            let values: Vec<f64> = (1..=n)
                .map(|i| if i == 1 { 1.0 } else { epsilon.powi(i as i32) })
                .collect();
            check_decreasing(&values, "I1")?;
            Instance::new(b, values.into_iter().map(|v| (v, b)))
        }
        InstanceKind::I2 => {
            if n < 3 {
                return Err(Error::InvalidParameter("I2 needs n >= 3".into()));
            }
            let entries: Vec<(f64, usize)> = (1..=n)
                .map(|i| {
                    let size = if i + 2 > n { 1 } else { b };
                    (1.0 + epsilon.powi(i as i32), size)
                })
                .collect();
            let values: Vec<f64> = entries.iter().map(|e| e.0).collect();
            check_decreasing(&values, "I2")?;
            Instance::new(b, entries)
        }
        InstanceKind::BoostTightUpper { alpha } => {
            check_alpha(alpha)?;
            if n < 2 {
                return Err(Error::InvalidParameter("BoostTightUpper needs n >= 2".into()));
            }
            // (boosted value, size)
            let mut boosted = vec![(1.0, 1), (1.0 - epsilon, b)];
            boosted.extend(tail_values(n - 2, epsilon).map(|v| (v, b)));
            unboost(boosted, alpha, b, "BoostTightUpper")
        }
        InstanceKind::BoostTightTheta15 { alpha } => {
            check_alpha(alpha)?;
            if n < 6 {
                return Err(Error::InvalidParameter("BoostTightTheta15 needs n >= 6".into()));
            }
            let mut boosted = vec![
                (1.0 + 4.0 * epsilon, 1),
                (1.0 + 3.0 * epsilon, b),
                (1.0 + 2.0 * epsilon, b),
                (1.0 + epsilon, b),
                (1.0, 1),
            ];
            boosted.extend(tail_values(n - 5, epsilon).map(|v| (v, b)));
            let inst = unboost(boosted, alpha, b, "BoostTightTheta15")?;
            // The two small items must form the optimum.
            let opt = optimal_packing(&inst)?;
            if opt.ids.len() != 2 {
                return Err(Error::DegenerateEpsilon(format!(
                    "BoostTightTheta15: alpha = {alpha} makes a single large item optimal"
                )));
            }
            Ok(inst)
        }
        InstanceKind::OrdinalPairSmallOpt | InstanceKind::OrdinalPairLargeOpt => {
            if n != 2 * b {
                return Err(Error::InvalidParameter(format!(
                    "ordinal pair instances need n = 2B, got n = {n}, B = {b}"
                )));
            }
            let mut values: Vec<f64> = (1..=n)
                .map(|i| {
                    if i <= b {
                        1.0 + (b - i) as f64 * epsilon
                    } else {
                        1.0 - i as f64 * epsilon
                    }
                })
                .collect();
            if kind == InstanceKind::OrdinalPairLargeOpt {
                values[0] = (b * b) as f64;
            }
            check_decreasing(&values, "ordinal pair")?;
            Instance::new(
                b,
                values
                    .into_iter()
                    .enumerate()
                    .map(|(idx, v)| (v, if idx < b { b } else { 1 })),
            )
        }
        InstanceKind::UniformRandom { seed } => {
            if n < 1 {
                return Err(Error::InvalidParameter("UniformRandom needs n >= 1".into()));
            }
            let mut rng = rng_from_seed(seed);
            loop {
                let mut entries: Vec<(f64, usize)> = (0..n)
                    .map(|_| {
                        let v: f64 = rng.random_range(f64::EPSILON..1.0);
                        let size = if rng.random_bool(0.5) { 1 } else { b };
                        (v, size)
                    })
                    .collect();
                entries.sort_by(|a, b| b.0.total_cmp(&a.0));
                let values: Vec<f64> = entries.iter().map(|e| e.0).collect();
                if check_decreasing(&values, "uniform").is_ok() {
                    return Instance::new(b, entries);
                }
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")))
    }
}

/// Turns boosted `(value, size)` pairs in intended order into an instance
/// with true values.
fn unboost(boosted: Vec<(f64, usize)>, alpha: f64, b: usize, what: &str) -> Result<Instance> {
    let order: Vec<f64> = boosted.iter().map(|e| e.0).collect();
    check_decreasing(&order, what)?;
    let entries: Vec<(f64, usize)> = boosted
        .into_iter()
        .map(|(v, size)| if size == 1 { (v / alpha, size) } else { (v, size) })
        .collect();
    let mut actual: Vec<f64> = entries.iter().map(|e| e.0).collect();
    actual.sort_by(|a, b| b.total_cmp(a));
    check_decreasing(&actual, what)?;
    Instance::new(b, entries)
}
