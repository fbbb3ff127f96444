//! Selection probabilities of the (boosted) extended secretary algorithm.
//!
//! Two routes live here: the asymptotic closed forms (`n -> infinity`) and an
//! exact oracle that runs the algorithm on every arrival order of a small
//! instance and counts events with integer arithmetic. All probabilities of an
//! enumerated table share the denominator `n!`, so identities between them are
//! checked as integer equalities between counts.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::algorithms::{check_fraction, run_threshold, sample_length};
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Largest instance the oracle enumerates (9! = 362880 orders).
pub const ENUMERATION_CAP: usize = 9;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Limit probability that the item of rank `i` is packed first:
///
/// `p_i = c (ln(1/c) + sum_{l=1}^{i-1} (-1)^{l+1} C(i-1, l) (c^l - 1) / l)`.
///
/// The alternating sum cancels badly for large `i`; it is accurate to about
/// `C(i-1, (i-1)/2) * 1e-16`, i.e. better than 1e-8 up to `i = 30`.
pub fn p_closed_form(i: usize, c: f64) -> Result<f64> {
    check_fraction(c)?;
    if i == 0 {
        return Err(Error::InvalidParameter("rank i must be at least 1".into()));
    }
    let m = i - 1;
    let tail: f64 = (1..=m)
        .map(|l| {
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            sign * binomial(m, l) * (c.powi(l as i32) - 1.0) / l as f64
        })
        .sum();
    Ok(c * ((1.0 / c).ln() + tail))
}

/// Size class of an item for the `B = 2` packing probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemClass {
    Large,
    Small {
        small_rank: usize,
        /// Global rank of the second most valuable small item, if any.
        second_small: Option<usize>,
    },
}

/// Limit probability that item `i` is packed at all when `B = 2`.
pub fn p_closed_form_b2(i: usize, class: ItemClass, c: f64) -> Result<f64> {
    let p_i = p_closed_form(i, c)?;
    match class {
        ItemClass::Large => Ok(p_i),
        ItemClass::Small { small_rank: 1, second_small } => {
            let second = match second_small {
                Some(g) => p_closed_form(g, c)?,
                None => 0.0,
            };
            Ok(p_i + second)
        }
        ItemClass::Small { .. } => Ok(2.0 * p_i),
    }
}

/// Exact event counts over all `n!` arrival orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    n: usize,
    capacity: usize,
    sample_length: usize,
    alpha: Option<f64>,
    orders: u64,
    /// Acceptance positions that can occur: `min(B, n)`.
    slots: usize,
    /// `packed[(i - 1) * slots + (j - 1)]`: orders packing item `i` as `j`-th.
    packed: Vec<u64>,
    /// Orders where small items `i, j` are packed `x`-th and `y`-th.
    events: Vec<u64>,
}

impl ProbabilityTable {
    fn empty(n: usize, capacity: usize, sample_length: usize, alpha: Option<f64>) -> Self {
        let slots = capacity.min(n);
        Self {
            n,
            capacity,
            sample_length,
            alpha,
            orders: 0,
            slots,
            packed: vec![0; n * slots],
            events: vec![0; n * n * slots * slots],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.orders += other.orders;
        for (a, b) in self.packed.iter_mut().zip(&other.packed) {
            *a += b;
        }
        for (a, b) in self.events.iter_mut().zip(&other.events) {
            *a += b;
        }
        self
    }

    fn event_index(&self, i: usize, j: usize, x: usize, y: usize) -> usize {
        (((i - 1) * self.n + (j - 1)) * self.slots + (x - 1)) * self.slots + (y - 1)
    }

    fn tally(&mut self, inst: &Instance, ids: &[usize]) {
        self.orders += 1;
        for (pos, &id) in ids.iter().enumerate() {
            self.packed[(id - 1) * self.slots + pos] += 1;
        }
        for (x, &a) in ids.iter().enumerate() {
            if !inst.item(a).is_small() || inst.item(a).dummy {
                continue;
            }
            for (y, &b) in ids.iter().enumerate() {
                if x != y && inst.item(b).is_small() && !inst.item(b).dummy {
                    let idx = self.event_index(a, b, x + 1, y + 1);
                    self.events[idx] += 1;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn sample_length(&self) -> usize {
        self.sample_length
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// Number of enumerated orders, `n!`.
    pub fn orders(&self) -> u64 {
        self.orders
    }

    /// Highest acceptance position that can occur.
    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Orders in which item `i` is packed as the `j`-th item.
    pub fn packed_count(&self, i: usize, j: usize) -> u64 {
        if j == 0 || j > self.slots {
            return 0;
        }
        self.packed[(i - 1) * self.slots + (j - 1)]
    }

    /// Orders in which item `i` is packed at all.
    pub fn total_packed_count(&self, i: usize) -> u64 {
        (1..=self.slots).map(|j| self.packed_count(i, j)).sum()
    }

    /// Orders in which small items `i` and `j` are packed `x`-th and `y`-th.
    pub fn event_count(&self, i: usize, j: usize, x: usize, y: usize) -> u64 {
        if x == 0 || y == 0 || x > self.slots || y > self.slots {
            return 0;
        }
        self.events[self.event_index(i, j, x, y)]
    }

    pub fn ratio(&self, count: u64) -> Ratio<u64> {
        Ratio::new(count, self.orders)
    }

    /// `p_i(j)`.
    pub fn p(&self, i: usize, j: usize) -> Ratio<u64> {
        self.ratio(self.packed_count(i, j))
    }

    /// `p_i = p_i(1)`.
    pub fn p_first(&self, i: usize) -> Ratio<u64> {
        self.p(i, 1)
    }

    /// `P_i`, the probability that item `i` is packed.
    pub fn packed_prob(&self, i: usize) -> Ratio<u64> {
        self.ratio(self.total_packed_count(i))
    }

    /// `Pr[E^{i,j}_{x,y}]`.
    pub fn event(&self, i: usize, j: usize, x: usize, y: usize) -> Ratio<u64> {
        self.ratio(self.event_count(i, j, x, y))
    }
}

#[derive(Serialize)]
struct RationalRepr {
    num: String,
    den: String,
}

impl From<Ratio<u64>> for RationalRepr {
    fn from(r: Ratio<u64>) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

#[derive(Serialize)]
struct PackedRepr {
    i: usize,
    j: usize,
    p: RationalRepr,
}

#[derive(Serialize)]
struct TotalRepr {
    i: usize,
    p: RationalRepr,
}

#[derive(Serialize)]
struct EventRepr {
    i: usize,
    j: usize,
    x: usize,
    y: usize,
    p: RationalRepr,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TableRepr {
    n: usize,
    capacity: usize,
    sample_length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    orders: String,
    pij: Vec<PackedRepr>,
    #[serde(rename = "Pi")]
    pi: Vec<TotalRepr>,
    events: Vec<EventRepr>,
}

impl Serialize for ProbabilityTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut pij = Vec::new();
        let mut pi = Vec::new();
        let mut events = Vec::new();
        for i in 1..=self.n {
            for j in 1..=self.slots {
                pij.push(PackedRepr {
                    i,
                    j,
                    p: self.p(i, j).into(),
                });
            }
            pi.push(TotalRepr {
                i,
                p: self.packed_prob(i).into(),
            });
            for j in 1..=self.n {
                for x in 1..=self.slots {
                    for y in 1..=self.slots {
                        let count = self.event_count(i, j, x, y);
                        if count > 0 {
                            events.push(EventRepr {
                                i,
                                j,
                                x,
                                y,
                                p: self.ratio(count).into(),
                            });
                        }
                    }
                }
            }
        }
        TableRepr {
            n: self.n,
            capacity: self.capacity,
            sample_length: self.sample_length,
            alpha: self.alpha,
            orders: self.orders.to_string(),
            pij,
            pi,
            events,
        }
        .serialize(serializer)
    }
}

/// Runs the extended secretary algorithm (boosted by `alpha` when given) on
/// every arrival order of `inst` and counts packing events exactly.
pub fn enumerate_exact(inst: &Instance, c: f64, alpha: Option<f64>) -> Result<ProbabilityTable> {
    check_fraction(c)?;
    let n = inst.len();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    if let Some(a) = alpha {
        if !(a.is_finite() && a >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {a}")));
        }
    }
    let keys = inst.boosted_values(alpha.unwrap_or(1.0));
    let sizes: Vec<usize> = inst.items().iter().map(|it| it.size).collect();
    let s = sample_length(n, c);
    let capacity = inst.capacity();

    let table = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut table = ProbabilityTable::empty(n, capacity, s, alpha);
            let rest: Vec<usize> = (1..=n).filter(|&id| id != first).collect();
            let mut arrivals = Vec::with_capacity(n);
            let mut ids = Vec::with_capacity(n);
            for perm in rest.iter().copied().permutations(n - 1) {
                arrivals.clear();
                arrivals.push(first);
                arrivals.extend(perm);
                ids.clear();
                run_threshold(&keys, &sizes, capacity, &arrivals, s, &mut ids);
                table.tally(inst, &ids);
            }
            table
        })
        .reduce(
            || ProbabilityTable::empty(n, capacity, s, alpha),
            ProbabilityTable::merge,
        );
    Ok(table)
}

/// The identities checked by [`structural_identity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// `P_i = p_i` for a large item.
    LargeFirstOnly,
    /// `P_i = i_s* p_i + sum_{x = r_s(i)+1}^{B*} p_{r'_g(x)}` for a small item.
    SmallPacking,
    /// The three-case specialisation at `B = 2`.
    CapacityTwo,
    /// `p_i(x) = sum_j Pr[E^{j,i}_{1,x}]` for a small item and `x >= 2`.
    FirstPickPartition,
    /// `sum_j Pr[E^{i,j}_{1,l}] = p_i` for `2 <= l <= i_s*`.
    FollowerSum,
    /// `Pr[E^{i,j}_{x,y}] = Pr[E^{j,i}_{x,y}]`.
    SwapSymmetry,
    /// `Pr[E^{m,j}_{1,r_s(m)}] = Pr[E^{i,j}_{1,r_s(m)}]` for `r_s(i) < r_s(m)`.
    RankExchange,
    /// `sum_i p_i = 1 - floor(cn)/n`.
    SumRule,
    /// `p_i >= p_{i+1}` along the decision order.
    Monotone,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::LargeFirstOnly => "large items packed first only",
            Self::SmallPacking => "small-item packing probability",
            Self::CapacityTwo => "capacity-two packing probability",
            Self::FirstPickPartition => "partition by first pick",
            Self::FollowerSum => "follower sum",
            Self::SwapSymmetry => "swap symmetry",
            Self::RankExchange => "rank exchange",
            Self::SumRule => "first-pick sum rule",
            Self::Monotone => "first-pick monotonicity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub identity: Identity,
    pub items: Vec<usize>,
    pub detail: String,
    #[serde(serialize_with = "ser_ratio")]
    pub lhs: Ratio<u64>,
    #[serde(serialize_with = "ser_ratio")]
    pub rhs: Ratio<u64>,
}

fn ser_ratio<S: Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    RationalRepr::from(*r).serialize(s)
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated for items {:?} ({}): {} != {}",
            self.identity, self.items, self.detail, self.lhs, self.rhs
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    /// Number of instances of each identity that were evaluated.
    pub checked: BTreeMap<Identity, usize>,
    pub violations: Vec<Violation>,
}

impl IdentityReport {
    pub fn all_exact(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn total_checked(&self) -> usize {
        self.checked.values().sum()
    }

    fn record(&mut self, identity: Identity, items: Vec<usize>, detail: String, lhs: Ratio<u64>, rhs: Ratio<u64>, holds: bool) {
        *self.checked.entry(identity).or_default() += 1;
        if !holds {
            self.violations.push(Violation {
                identity,
                items,
                detail,
                lhs,
                rhs,
            });
        }
    }
}

/// Verifies the structural packing identities on an enumerated table as exact
/// rational equalities. Ranks refer to real (non-dummy) items.
pub fn structural_identity_check(table: &ProbabilityTable, inst: &Instance) -> IdentityReport {
    assert_eq!(table.n(), inst.len(), "table and instance sizes differ");
    let mut report = IdentityReport::default();
    let ranks = inst.rank_maps();
    let b = inst.capacity();
    let slots = table.slots();
    let small_count = ranks.small_count();
    let b_star = b.min(small_count);
    let first = |i: usize| table.packed_count(i, 1);
    let r = |c: u64| table.ratio(c);
    let eq = |report: &mut IdentityReport, id: Identity, items: Vec<usize>, detail: String, lhs: u64, rhs: u64| {
        report.record(id, items, detail, r(lhs), r(rhs), lhs == rhs);
    };

    for it in inst.real_items() {
        let i = it.id;
        let total = table.total_packed_count(i);
        match ranks.small_rank(i) {
            None => {
                eq(&mut report, Identity::LargeFirstOnly, vec![i], "P_i = p_i".into(), total, first(i));
                if b == 2 {
                    eq(&mut report, Identity::CapacityTwo, vec![i], "large".into(), total, first(i));
                }
            }
            Some(rs) => {
                let is_star = rs.min(b);
                let followers: u64 = ((rs + 1)..=b_star)
                    .map(|x| first(ranks.global_rank_of_small(x).expect("x <= |I_S|")))
                    .sum();
                eq(
                    &mut report,
                    Identity::SmallPacking,
                    vec![i],
                    format!("r_s = {rs}, i_s* = {is_star}, B* = {b_star}"),
                    total,
                    is_star as u64 * first(i) + followers,
                );
                if b == 2 {
                    let rhs = if rs == 1 {
                        first(i) + ranks.global_rank_of_small(2).map_or(0, first)
                    } else {
                        2 * first(i)
                    };
                    eq(&mut report, Identity::CapacityTwo, vec![i], format!("small, r_s = {rs}"), total, rhs);
                }
                for x in 2..=slots {
                    let rhs: u64 = ranks
                        .small_ids()
                        .iter()
                        .map(|&j| table.event_count(j, i, 1, x))
                        .sum();
                    eq(
                        &mut report,
                        Identity::FirstPickPartition,
                        vec![i],
                        format!("x = {x}"),
                        table.packed_count(i, x),
                        rhs,
                    );
                }
                for l in 2..=is_star {
                    let lhs: u64 = ranks
                        .small_ids()
                        .iter()
                        .map(|&j| table.event_count(i, j, 1, l))
                        .sum();
                    eq(&mut report, Identity::FollowerSum, vec![i], format!("l = {l}"), lhs, first(i));
                }
            }
        }
    }

    let smalls = ranks.small_ids();
    for (a, &i) in smalls.iter().enumerate() {
        for &j in &smalls[a + 1..] {
            for x in 1..=slots {
                for y in 1..=slots {
                    if x == y {
                        continue;
                    }
                    eq(
                        &mut report,
                        Identity::SwapSymmetry,
                        vec![i, j],
                        format!("x = {x}, y = {y}"),
                        table.event_count(i, j, x, y),
                        table.event_count(j, i, x, y),
                    );
                }
            }
        }
    }

    for &m in smalls {
        let rm = ranks.small_rank(m).expect("small");
        if rm <= 1 || rm > slots {
            continue;
        }
        for &i in &smalls[..rm - 1] {
            for &j in smalls.iter().filter(|&&j| j != i && j != m) {
                eq(
                    &mut report,
                    Identity::RankExchange,
                    vec![m, i, j],
                    format!("r_s(m) = {rm}"),
                    table.event_count(m, j, 1, rm),
                    table.event_count(i, j, 1, rm),
                );
            }
        }
    }

    // Nothing is accepted iff the best item (by decision value) is sampled.
    let n = table.n() as u64;
    let s = table.sample_length() as u64;
    let sum_first: u64 = (1..=table.n()).map(first).sum();
    eq(
        &mut report,
        Identity::SumRule,
        Vec::new(),
        format!("floor(cn) = {s}"),
        sum_first,
        table.orders() / n * (n - s.min(n)),
    );

    let keys = inst.boosted_values(table.alpha().unwrap_or(1.0));
    let mut decision: Vec<usize> = inst.real_items().map(|it| it.id).collect();
    decision.sort_by(|&a, &b| keys[b - 1].total_cmp(&keys[a - 1]));
    for pair in decision.windows(2) {
        let (hi, lo) = (first(pair[0]), first(pair[1]));
        report.record(
            Identity::Monotone,
            vec![pair[0], pair[1]],
            "p_hi >= p_lo".into(),
            r(hi),
            r(lo),
            hi >= lo,
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::INV_E;
    use crate::instance::{make_instance, ArrivalOrder, InstanceKind};
    use crate::stream::rng_from_seed;
    use rand::Rng;

    /// Quadrature oracle: `p_i = c * int_c^1 (1 - t)^{i-1} / t dt`, integrated
    /// with composite Simpson on a log-spaced grid.
    fn p_quadrature(i: usize, c: f64) -> f64 {
        let steps = 20_000;
        let (a, b) = (c.ln(), 0.0f64);
        let h = (b - a) / steps as f64;
        // Substituting t = e^u: dt / t = du.
        let f = |u: f64| (1.0 - u.exp()).powi(i as i32 - 1);
        let mut acc = f(a) + f(b);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        c * acc * h / 3.0
    }

    #[test]
    fn closed_form_reference_values() {
        assert!((p_closed_form(1, INV_E).unwrap() - INV_E).abs() < 1e-15);
        assert!((p_closed_form(2, INV_E).unwrap() - INV_E * INV_E).abs() < 1e-15);
        assert!((p_closed_form(1, 0.26888).unwrap() - 0.35318).abs() < 1e-5);
        let p2 = p_closed_form(2, INV_E).unwrap();
        let p3 = p_closed_form(3, INV_E).unwrap();
        assert!(((INV_E - 3.0 * p3) / p2 - 1.3475).abs() < 5e-4);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &c in &[0.1, 0.26888, INV_E, 0.5, 0.8] {
            for i in 1..=20 {
                let closed = p_closed_form(i, c).unwrap();
                let quad = p_quadrature(i, c);
                assert!((closed - quad).abs() < 1e-9, "i = {i}, c = {c}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn closed_form_rejects_bad_fraction() {
        assert!(p_closed_form(1, 0.0).is_err());
        assert!(p_closed_form(1, 1.0).is_err());
        assert!(p_closed_form(0, 0.5).is_err());
    }

    #[test]
    fn capacity_two_closed_form() {
        let p = |i| p_closed_form(i, INV_E).unwrap();
        assert!((p_closed_form_b2(1, ItemClass::Large, INV_E).unwrap() - INV_E).abs() < 1e-15);
        let v = p_closed_form_b2(2, ItemClass::Small { small_rank: 2, second_small: Some(2) }, INV_E).unwrap();
        assert!((v - 2.0 * INV_E * INV_E).abs() < 1e-15);
        let sole = p_closed_form_b2(3, ItemClass::Small { small_rank: 1, second_small: None }, INV_E).unwrap();
        assert_eq!(sole, p(3));
        let top = p_closed_form_b2(3, ItemClass::Small { small_rank: 1, second_small: Some(5) }, INV_E).unwrap();
        assert!((top - p(3) - p(5)).abs() < 1e-15);
    }

    fn all_large(n: usize) -> Instance {
        Instance::new(2, (0..n).map(|i| ((n - i) as f64, 2))).unwrap()
    }

    #[test]
    fn two_large_items_half_sample() {
        let t = enumerate_exact(&all_large(2), 0.5, None).unwrap();
        assert_eq!(t.orders(), 2);
        assert_eq!(t.p_first(1), Ratio::new(1, 2));
        assert_eq!(t.p_first(2), Ratio::new(0, 1));
    }

    #[test]
    fn three_large_items_one_sampled() {
        let t = enumerate_exact(&all_large(3), 1.0 / 3.0, None).unwrap();
        assert_eq!(t.sample_length(), 1);
        assert_eq!(t.p_first(1), Ratio::new(1, 2));
    }

    #[test]
    fn enumeration_cap() {
        let inst = all_large(10);
        assert_eq!(
            enumerate_exact(&inst, 0.5, None),
            Err(Error::EnumerationCap { n: 10, cap: ENUMERATION_CAP })
        );
    }

    /// Counts via direct calls to the public algorithm, one order at a time.
    fn direct_counts(inst: &Instance, c: f64, alpha: f64) -> Vec<Vec<u64>> {
        use crate::algorithms::{boosted_extended_secretary, BoostingConfig};
        let n = inst.len();
        let cfg = BoostingConfig::new(alpha, c).unwrap();
        let mut counts = vec![vec![0u64; inst.capacity() + 1]; n + 1];
        for perm in (1..=n).permutations(n) {
            let out = boosted_extended_secretary(inst, &ArrivalOrder::new(perm).unwrap(), &cfg);
            for p in out.packed {
                counts[p.id][p.pos] += 1;
            }
        }
        counts
    }

    #[test]
    fn table_matches_direct_runs_i2_shape() {
        let inst = make_instance(InstanceKind::I2, 4, 2, 0.1).unwrap();
        let table = enumerate_exact(&inst, 0.25, None).unwrap();
        let direct = direct_counts(&inst, 0.25, 1.0);
        for i in 1..=4 {
            for j in 1..=2 {
                assert_eq!(table.packed_count(i, j), direct[i][j]);
            }
        }
    }

    #[test]
    fn table_matches_direct_runs_boosted() {
        let inst = Instance::new(2, [(1.0, 2), (0.8, 1), (0.7, 2), (0.5, 1), (0.3, 1)]).unwrap();
        let table = enumerate_exact(&inst, 0.4, Some(1.5)).unwrap();
        let direct = direct_counts(&inst, 0.4, 1.5);
        for i in 1..=5 {
            for j in 1..=2 {
                assert_eq!(table.packed_count(i, j), direct[i][j], "item {i} pos {j}");
            }
        }
        assert!(structural_identity_check(&table, &inst).all_exact());
    }

    #[test]
    fn identities_hold_on_named_examples() {
        let inst = Instance::new(2, [(5.0, 2), (4.0, 1), (3.0, 1), (2.0, 2), (1.0, 1)]).unwrap();
        let table = enumerate_exact(&inst, 0.4, None).unwrap();
        let report = structural_identity_check(&table, &inst);
        assert!(report.all_exact(), "{:?}", report.violations);
        assert!(report.checked[&Identity::RankExchange] > 0);

        let inst = Instance::new(3, [(6.0, 3), (5.0, 1), (4.0, 1), (3.0, 3), (2.0, 1), (1.0, 1)]).unwrap();
        let table = enumerate_exact(&inst, 1.0 / 3.0, None).unwrap();
        let report = structural_identity_check(&table, &inst);
        assert!(report.all_exact(), "{:?}", report.violations);
        assert!(report.checked[&Identity::FollowerSum] > 0);

        let inst = all_large(6);
        let report = structural_identity_check(&enumerate_exact(&inst, 0.5, None).unwrap(), &inst);
        assert!(report.all_exact());
        assert!(!report.checked.contains_key(&Identity::SmallPacking));
        assert_eq!(report.checked[&Identity::LargeFirstOnly], 6);
    }

    #[test]
    fn violations_are_reported() {
        let inst = Instance::new(2, [(5.0, 2), (4.0, 1), (3.0, 1)]).unwrap();
        let mut table = enumerate_exact(&inst, 0.4, None).unwrap();
        // Corrupt one count.
        let slot = table.slots();
        table.packed[slot] += 1;
        let report = structural_identity_check(&table, &inst);
        assert!(!report.all_exact());
        let v = &report.violations[0];
        assert!(v.to_string().contains("violated"));
    }

    #[test]
    fn sum_rule_and_denominators() {
        for seed in 0..30 {
            let n = 2 + seed as usize % 6;
            let inst = make_instance(InstanceKind::UniformRandom { seed }, n, 2 + seed as usize % 2, 0.0).unwrap();
            for &c in &[0.25, 1.0 / 3.0, 0.4] {
                let t = enumerate_exact(&inst, c, None).unwrap();
                let fact: u64 = (1..=n as u64).product();
                assert_eq!(t.orders(), fact);
                let sum: Ratio<u64> = (1..=n).map(|i| t.p_first(i)).sum();
                let s = sample_length(n, c) as u64;
                assert_eq!(sum, Ratio::new(n as u64 - s, n as u64));
                for i in 1..=n {
                    assert_eq!(fact % t.packed_prob(i).denom(), 0);
                    let by_pos: Ratio<u64> = (1..=t.slots()).map(|j| t.p(i, j)).sum();
                    assert_eq!(by_pos, t.packed_prob(i));
                }
            }
        }
    }

    #[test]
    fn enumerated_first_pick_approaches_the_limit() {
        // Errors shrink along each parity of n; floor(n/2) makes odd n lag.
        let c: f64 = 0.5;
        let limit = c * (1.0 / c).ln();
        let err = |n: usize| {
            let t = enumerate_exact(&all_large(n), c, None).unwrap();
            let p = t.p_first(1);
            (*p.numer() as f64 / *p.denom() as f64 - limit).abs()
        };
        let errs: Vec<f64> = (4..=9).map(err).collect();
        for k in 2..errs.len() {
            assert!(errs[k] < errs[k - 2], "{errs:?}");
        }
        assert!(errs[5] < errs[0]);
    }

    #[test]
    fn monte_carlo_agrees_with_the_limit_at_large_n() {
        use crate::instance::sample_order;
        let (n, trials, c) = (10_000usize, 20_000u64, 0.5);
        let mut hits = 0u64;
        for seed in 0..trials {
            let ord = sample_order(n, seed);
            let s = sample_length(n, c);
            // All-large with values decreasing in id: best sampled id is the minimum.
            let best_sampled = ord.positions()[..s].iter().min().copied().unwrap();
            let first = ord.positions()[s..].iter().find(|&&id| id < best_sampled);
            hits += (first == Some(&1)) as u64;
        }
        let p_hat = hits as f64 / trials as f64;
        let limit = p_closed_form(1, c).unwrap();
        let se = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        assert!((p_hat - limit).abs() <= 3.0 * se, "{p_hat} vs {limit}");
    }

    #[test]
    fn table_serializes_rationals_as_strings() {
        let t = enumerate_exact(&all_large(3), 1.0 / 3.0, None).unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["orders"], "6");
        assert_eq!(json["pij"][0]["p"]["num"], "1");
        assert_eq!(json["pij"][0]["p"]["den"], "2");
        assert_eq!(json["sampleLength"], 1);
    }

    #[test]
    fn random_corpus_identities() {
        let mut rng = rng_from_seed(0xC0FFEE);
        for _ in 0..60 {
            let n = rng.random_range(2..=7);
            let b = rng.random_range(2..=3);
            let entries: Vec<(f64, usize)> = (0..n)
                .map(|k| (1.0 + k as f64 + rng.random::<f64>() * 0.5, if rng.random_bool(0.5) { 1 } else { b }))
                .collect();
            let inst = Instance::new(b, entries).unwrap();
            let alpha = if rng.random_bool(0.5) { Some(rng.random_range(1.0..2.0)) } else { None };
            let table = enumerate_exact(&inst, 0.4, alpha).unwrap();
            let report = structural_identity_check(&table, &inst);
            assert!(report.all_exact(), "{:?}", report.violations);
        }
    }
}
