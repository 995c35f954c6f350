//! Exact maximin-share oracles: 1-out-of-d values and canonical partitions by
//! exhaustive set-partition enumeration (restricted growth strings with
//! water-fill pruning), pairwise thresholds, fairness reports, and exhaustive
//! best-allocation searches used to certify upper bounds.
//!
//! All internal arithmetic is integer: every constant of a valuation is scaled
//! by the least common multiple of the denominators, so comparisons are exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Agent, Allocation, DPartition, EdgeId};
use crate::rational::{qi, Q};
use crate::valuation::{SubadditiveForm, Valuation};

/// Enumeration caps for the oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    /// Largest per-agent ground set the partition enumeration accepts.
    pub max_ground: usize,
    /// Hard cap on visited search nodes for a single query.
    pub node_budget: u64,
    /// Largest number of oriented (non-loop) edges in exhaustive
    /// orientation/allocation searches: the space is 2^k or n^k.
    pub max_search_log2: u32,
    /// Largest number of conflict edges per index vector in frugal searches.
    pub max_conflicts: usize,
    /// Subproblem cap for the two-thirds extension recursion before it falls
    /// back to the exhaustive search.
    pub recursion_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_ground: 14,
            node_budget: 200_000_000,
            max_search_log2: 24,
            max_conflicts: 22,
            recursion_budget: 200_000,
        }
    }
}

/// Exact 1-out-of-d maximin result for one agent.
#[derive(Debug, Clone)]
pub struct MmsResult {
    pub owner: Agent,
    pub d: usize,
    pub mu: Q,
    /// Deterministic optimal partition: the lexicographically smallest
    /// restricted-growth string over the owner's edges (ascending ids) among
    /// the maximizers.
    pub canonical: DPartition,
}

// ---------------------------------------------------------------------------
// scaled integer view of one agent's valuation over a ground list
// ---------------------------------------------------------------------------

enum ScaledKind {
    Additive { w: Vec<i128> },
    Xos { clauses: Vec<Vec<i128>> },
    Table { vals: Vec<i128> },
    Rule { bundle_masks: Vec<u32>, inside: i128, outside: i128, owner_mask: u32 },
}

pub(crate) struct ScaledValuation {
    kind: ScaledKind,
    /// Common denominator: integer values are `rational * scale`.
    scale: BigInt,
    /// Per-item upper bounds on marginal contribution (singleton values).
    caps: Vec<i128>,
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .filter(|v| v.abs() < i128::MAX / 1024)
        .ok_or_else(|| Error::CapExceeded("exact arithmetic out of integer range".into()))
}

impl ScaledValuation {
    /// Builds the integer view of `valuation` over `ground` (ascending edge
    /// ids). Items outside the owner's incident set contribute nothing.
    pub(crate) fn build(inst: &Instance, agent: Agent, ground: &[EdgeId]) -> Result<Self> {
        let valuation = &inst.valuations[agent - 1];
        let incident = inst.graph.incident_edges(agent)?;
        let g = ground.len();
        if g > 32 {
            return Err(Error::CapExceeded(format!("ground set of {g} edges exceeds 32")));
        }
        let mut denoms: Vec<BigInt> = Vec::new();
        let mut collect = |q: &Q| denoms.push(q.denom().clone());
        match valuation {
            Valuation::Additive(a) => a.weights.values().for_each(&mut collect),
            Valuation::Xos(x) => x
                .clauses
                .iter()
                .for_each(|c| c.values().for_each(&mut collect)),
            Valuation::Subadditive(s) => match &s.form {
                SubadditiveForm::Table(t) => t.values().for_each(&mut collect),
                SubadditiveForm::BundleContainment { inside, outside, .. } => {
                    collect(inside);
                    collect(outside);
                }
            },
        }
        let scale = denoms
            .iter()
            .fold(BigInt::one(), |acc, d| acc.lcm(d));
        let scaled = |q: &Q| -> Result<i128> { to_i128(&(q.numer() * &scale / q.denom())) };
        let kind = match valuation {
            Valuation::Additive(a) => {
                let w = ground
                    .iter()
                    .map(|e| a.weights.get(e).map_or(Ok(0), |q| scaled(q)))
                    .collect::<Result<Vec<_>>>()?;
                ScaledKind::Additive { w }
            }
            Valuation::Xos(x) => {
                let clauses = x
                    .clauses
                    .iter()
                    .map(|c| {
                        ground
                            .iter()
                            .map(|e| c.get(e).map_or(Ok(0), |q| scaled(q)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                ScaledKind::Xos { clauses }
            }
            Valuation::Subadditive(s) => {
                let owner_mask = mask_of_subset(ground, &incident);
                match &s.form {
                    SubadditiveForm::Table(table) => {
                        let mut vals = vec![0i128; 1usize << g];
                        for (mask_usize, val) in vals.iter_mut().enumerate() {
                            let mask = mask_usize as u32 & owner_mask;
                            let subset: BTreeSet<EdgeId> = (0..g)
                                .filter(|&i| mask >> i & 1 == 1)
                                .map(|i| ground[i])
                                .collect();
                            let q = table.get(&subset).ok_or_else(|| Error::MissingTableEntry {
                                agent,
                                subset: subset.iter().copied().collect(),
                            })?;
                            *val = scaled(q)?;
                        }
                        ScaledKind::Table { vals }
                    }
                    SubadditiveForm::BundleContainment { bundles, inside, outside } => {
                        // bundles not fully inside the ground set can never be
                        // contained by a subset of it
                        let bundle_masks = bundles
                            .iter()
                            .filter(|b| b.iter().all(|e| ground.contains(e)))
                            .map(|b| mask_of_subset(ground, b))
                            .collect();
                        ScaledKind::Rule {
                            bundle_masks,
                            inside: scaled(inside)?,
                            outside: scaled(outside)?,
                            owner_mask,
                        }
                    }
                }
            }
        };
        let mut sv = ScaledValuation { kind, scale, caps: Vec::new() };
        sv.caps = (0..g).map(|i| sv.value_of_mask(1 << i)).collect();
        Ok(sv)
    }

    pub(crate) fn value_of_mask(&self, mask: u32) -> i128 {
        match &self.kind {
            ScaledKind::Additive { w } => iter_bits(mask).map(|i| w[i]).sum(),
            ScaledKind::Xos { clauses } => clauses
                .iter()
                .map(|c| iter_bits(mask).map(|i| c[i]).sum::<i128>())
                .max()
                .unwrap_or(0),
            ScaledKind::Table { vals } => vals[mask as usize],
            ScaledKind::Rule { bundle_masks, inside, outside, owner_mask } => {
                let m = mask & owner_mask;
                if m == 0 {
                    0
                } else if bundle_masks.iter().any(|&b| b & m == b) {
                    *inside
                } else {
                    *outside
                }
            }
        }
    }

    pub(crate) fn to_q(&self, scaled: i128) -> Q {
        Q::new(BigInt::from(scaled), self.scale.clone())
    }
}

fn mask_of_subset(ground: &[EdgeId], subset: &BTreeSet<EdgeId>) -> u32 {
    let mut mask = 0u32;
    for (i, e) in ground.iter().enumerate() {
        if subset.contains(e) {
            mask |= 1 << i;
        }
    }
    mask
}

fn iter_bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

// ---------------------------------------------------------------------------
// max-min partition search
// ---------------------------------------------------------------------------

/// Upper bound on the achievable minimum if the remaining `budget` of item
/// caps could be split fractionally: water-fill the lowest blocks. Returns the
/// level as a fraction (num, den).
fn waterfill_bound(block_vals: &[i128], budget: i128) -> (i128, i128) {
    let mut s: Vec<i128> = block_vals.to_vec();
    s.sort_unstable();
    let mut level = s[0];
    let mut left = budget;
    for (i, &next) in s.iter().enumerate().skip(1) {
        let need = (next - level) * i as i128;
        if left >= need {
            left -= need;
            level = next;
        } else {
            return (level * i as i128 + left, i as i128);
        }
    }
    (level * s.len() as i128 + left, s.len() as i128)
}

struct PartitionSearch<'a> {
    sv: &'a ScaledValuation,
    d: usize,
    order: Vec<usize>,
    suffix_caps: Vec<i128>,
    nodes: u64,
    budget: u64,
}

impl<'a> PartitionSearch<'a> {
    fn new(sv: &'a ScaledValuation, d: usize, order: Vec<usize>, budget: u64) -> Self {
        let g = order.len();
        let mut suffix_caps = vec![0i128; g + 1];
        for i in (0..g).rev() {
            suffix_caps[i] = suffix_caps[i + 1] + sv.caps[order[i]];
        }
        PartitionSearch { sv, d, order, suffix_caps, nodes: 0, budget }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::CapExceeded(format!(
                "partition search exceeded {} nodes",
                self.budget
            )));
        }
        Ok(())
    }

    /// Maximum over partitions into <= d blocks of the minimum block value.
    fn max_min(&mut self) -> Result<i128> {
        let mut block_masks = vec![0u32; self.d];
        let mut block_vals = vec![0i128; self.d];
        let mut best = -1i128;
        self.max_min_rec(0, 0, &mut block_masks, &mut block_vals, &mut best)?;
        Ok(best.max(0))
    }

    fn max_min_rec(
        &mut self,
        depth: usize,
        used: usize,
        block_masks: &mut [u32],
        block_vals: &mut [i128],
        best: &mut i128,
    ) -> Result<()> {
        self.tick()?;
        if depth == self.order.len() {
            let val = block_vals.iter().copied().min().unwrap_or(0);
            if val > *best {
                *best = val;
            }
            return Ok(());
        }
        let (num, den) = waterfill_bound(block_vals, self.suffix_caps[depth]);
        if num <= *best * den {
            return Ok(());
        }
        let item = self.order[depth];
        let limit = (used + 1).min(self.d);
        for b in 0..limit {
            let old_mask = block_masks[b];
            let old_val = block_vals[b];
            block_masks[b] = old_mask | 1 << item;
            block_vals[b] = self.sv.value_of_mask(block_masks[b]);
            let new_used = used.max(b + 1);
            self.max_min_rec(depth + 1, new_used, block_masks, block_vals, best)?;
            block_masks[b] = old_mask;
            block_vals[b] = old_val;
        }
        Ok(())
    }

    /// First restricted-growth string (lexicographic order, items in `order`)
    /// whose partition attains `target` as its minimum block value.
    fn first_attaining(&mut self, target: i128) -> Result<Vec<u8>> {
        let mut block_masks = vec![0u32; self.d];
        let mut block_vals = vec![0i128; self.d];
        let mut rgs = vec![0u8; self.order.len()];
        if self.canon_rec(0, 0, &mut block_masks, &mut block_vals, &mut rgs, target)? {
            Ok(rgs)
        } else {
            Err(Error::InternalInvariant(
                "no partition attains the computed maximin value".into(),
            ))
        }
    }

    fn canon_rec(
        &mut self,
        depth: usize,
        used: usize,
        block_masks: &mut [u32],
        block_vals: &mut [i128],
        rgs: &mut [u8],
        target: i128,
    ) -> Result<bool> {
        self.tick()?;
        if depth == self.order.len() {
            return Ok(block_vals.iter().copied().min().unwrap_or(0) == target);
        }
        let (num, den) = waterfill_bound(block_vals, self.suffix_caps[depth]);
        if num < target * den {
            return Ok(false);
        }
        let item = self.order[depth];
        let limit = (used + 1).min(self.d);
        for b in 0..limit {
            let old_mask = block_masks[b];
            let old_val = block_vals[b];
            block_masks[b] = old_mask | 1 << item;
            block_vals[b] = self.sv.value_of_mask(block_masks[b]);
            rgs[depth] = b as u8;
            let new_used = used.max(b + 1);
            if self.canon_rec(depth + 1, new_used, block_masks, block_vals, rgs, target)? {
                return Ok(true);
            }
            block_masks[b] = old_mask;
            block_vals[b] = old_val;
        }
        Ok(false)
    }
}

// ---------------------------------------------------------------------------
// public oracle entry points
// ---------------------------------------------------------------------------

fn ground_of(inst: &Instance, agent: Agent, limits: &OracleLimits) -> Result<Vec<EdgeId>> {
    let incident = inst.graph.incident_edges(agent)?;
    if incident.len() > limits.max_ground {
        return Err(Error::CapExceeded(format!(
            "agent {agent} has {} relevant edges, oracle cap is {}",
            incident.len(),
            limits.max_ground
        )));
    }
    Ok(incident.into_iter().collect())
}

/// Exact `1`-out-of-`d` maximin value and canonical partition of `agent`.
pub fn compute_mms(inst: &Instance, agent: Agent, d: usize, limits: &OracleLimits) -> Result<MmsResult> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let ground = ground_of(inst, agent, limits)?;
    let sv = ScaledValuation::build(inst, agent, &ground)?;
    // value phase: big items first prunes fastest
    let mut by_cap: Vec<usize> = (0..ground.len()).collect();
    by_cap.sort_by_key(|&i| std::cmp::Reverse(sv.caps[i]));
    let mu_scaled = PartitionSearch::new(&sv, d, by_cap, limits.node_budget).max_min()?;
    // canonical phase: natural order, first partition attaining the value
    let natural: Vec<usize> = (0..ground.len()).collect();
    let rgs = PartitionSearch::new(&sv, d, natural, limits.node_budget).first_attaining(mu_scaled)?;
    let mut parts = vec![BTreeSet::new(); d];
    for (pos, &label) in rgs.iter().enumerate() {
        parts[label as usize].insert(ground[pos]);
    }
    Ok(MmsResult {
        owner: agent,
        d,
        mu: sv.to_q(mu_scaled),
        canonical: DPartition { owner: agent, parts },
    })
}

/// Deterministic optimal `d`-partition of an explicit ground list: the
/// lexicographically smallest restricted-growth string (over `items` in the
/// given order) among the maximizers. Items stay in the parts even when they
/// are irrelevant to the agent.
pub fn canonical_partition_on_set(
    inst: &Instance,
    agent: Agent,
    items: &[EdgeId],
    d: usize,
    limits: &OracleLimits,
) -> Result<Vec<BTreeSet<EdgeId>>> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    if items.len() > limits.max_ground {
        return Err(Error::CapExceeded(format!(
            "ground set of {} edges exceeds oracle cap {}",
            items.len(),
            limits.max_ground
        )));
    }
    let sv = ScaledValuation::build(inst, agent, items)?;
    let mut by_cap: Vec<usize> = (0..items.len()).collect();
    by_cap.sort_by_key(|&i| std::cmp::Reverse(sv.caps[i]));
    let mu_scaled = PartitionSearch::new(&sv, d, by_cap, limits.node_budget).max_min()?;
    let natural: Vec<usize> = (0..items.len()).collect();
    let rgs =
        PartitionSearch::new(&sv, d, natural, limits.node_budget).first_attaining(mu_scaled)?;
    let mut parts = vec![BTreeSet::new(); d];
    for (pos, &label) in rgs.iter().enumerate() {
        parts[label as usize].insert(items[pos]);
    }
    Ok(parts)
}

/// `1`-out-of-`d` maximin value of `agent` over an arbitrary ground set
/// (restricted to her relevant edges first, which cannot change the value).
pub fn mms_on_set(
    inst: &Instance,
    agent: Agent,
    ground_set: &BTreeSet<EdgeId>,
    d: usize,
    limits: &OracleLimits,
) -> Result<Q> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let incident = inst.graph.incident_edges(agent)?;
    let ground: Vec<EdgeId> = ground_set.intersection(&incident).copied().collect();
    if ground.len() > limits.max_ground {
        return Err(Error::CapExceeded(format!(
            "ground set of {} edges exceeds oracle cap {}",
            ground.len(),
            limits.max_ground
        )));
    }
    let sv = ScaledValuation::build(inst, agent, &ground)?;
    let mut by_cap: Vec<usize> = (0..ground.len()).collect();
    by_cap.sort_by_key(|&i| std::cmp::Reverse(sv.caps[i]));
    let mu_scaled = PartitionSearch::new(&sv, d, by_cap, limits.node_budget).max_min()?;
    Ok(sv.to_q(mu_scaled))
}

/// Independent second oracle: direct enumeration of all `d^|ground|` labeled
/// assignments, no symmetry reduction, no pruning. For cross-validation only.
pub fn mms_by_labeled_assignments(
    inst: &Instance,
    agent: Agent,
    d: usize,
    limits: &OracleLimits,
) -> Result<Q> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let ground = ground_of(inst, agent, limits)?;
    let sv = ScaledValuation::build(inst, agent, &ground)?;
    let g = ground.len();
    fn rec(sv: &ScaledValuation, g: usize, depth: usize, masks: &mut [u32], best: &mut i128) {
        if depth == g {
            let val = masks.iter().map(|&m| sv.value_of_mask(m)).min().unwrap_or(0);
            if val > *best {
                *best = val;
            }
            return;
        }
        for b in 0..masks.len() {
            masks[b] |= 1 << depth;
            rec(sv, g, depth + 1, masks, best);
            masks[b] &= !(1u32 << depth);
        }
    }
    let mut masks = vec![0u32; d];
    let mut best = -1i128;
    rec(&sv, g, 0, &mut masks, &mut best);
    Ok(sv.to_q(best.max(0)))
}

/// Pairwise threshold: `max_{j != i}` of the 1-out-of-2 maximin value of
/// agent `i` over `(X_i ∪ X_j) ∩ E_i`. Edges relevant to neither party are
/// value-neutral padding, so restricting to `E_i` is harmless.
pub fn pmms_threshold(
    inst: &Instance,
    alloc: &Allocation,
    agent: Agent,
    limits: &OracleLimits,
) -> Result<Q> {
    inst.graph.check_agent(agent)?;
    let mut best = Q::zero();
    for j in inst.graph.agents() {
        if j == agent {
            continue;
        }
        let mut ground: BTreeSet<EdgeId> = alloc.bundle(agent).clone();
        ground.extend(alloc.bundle(j).iter().copied());
        let mu2 = mms_on_set(inst, agent, &ground, 2, limits)?;
        if mu2 > best {
            best = mu2;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// fairness reports
// ---------------------------------------------------------------------------

/// A fairness ratio: `value / threshold` with the conventions
/// `0/0 = 1` (a zero threshold is vacuously satisfied) and
/// `positive/0 = unbounded`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatioVal {
    Finite(Q),
    Unbounded,
}

impl RatioVal {
    pub fn of(value: &Q, threshold: &Q) -> RatioVal {
        if threshold.is_zero() {
            if value.is_zero() {
                RatioVal::Finite(qi(1))
            } else {
                RatioVal::Unbounded
            }
        } else {
            RatioVal::Finite(value / threshold)
        }
    }

    pub fn at_least(&self, alpha: &Q) -> bool {
        match self {
            RatioVal::Unbounded => true,
            RatioVal::Finite(q) => q >= alpha,
        }
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            RatioVal::Finite(q) => Some(q),
            RatioVal::Unbounded => None,
        }
    }
}

impl PartialOrd for RatioVal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use RatioVal::*;
        Some(match (self, other) {
            (Unbounded, Unbounded) => std::cmp::Ordering::Equal,
            (Unbounded, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Unbounded) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        })
    }
}

impl fmt::Display for RatioVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioVal::Finite(q) => write!(f, "{}", crate::rational::format_rational(q)),
            RatioVal::Unbounded => write!(f, "inf"),
        }
    }
}

/// Per-agent fairness figures at a given `d`.
#[derive(Debug, Clone, Serialize)]
pub struct AgentReport {
    pub agent: Agent,
    #[serde(serialize_with = "ser_q")]
    pub mu: Q,
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    #[serde(serialize_with = "ser_ratio")]
    pub mms_ratio: RatioVal,
    #[serde(serialize_with = "ser_q")]
    pub pmms_threshold: Q,
    #[serde(serialize_with = "ser_ratio")]
    pub pmms_ratio: RatioVal,
    pub frugal: bool,
}

fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::format_rational(q))
}

/// Serde helper for rational struct fields in traces and reports.
pub fn ser_q_field<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    ser_q(q, s)
}

fn ser_ratio<S: serde::Serializer>(r: &RatioVal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct FairnessReport {
    pub d: usize,
    pub is_partition: bool,
    pub is_orientation: bool,
    pub is_frugal: bool,
    pub agents: Vec<AgentReport>,
}

impl FairnessReport {
    pub fn min_mms_ratio(&self) -> RatioVal {
        self.agents
            .iter()
            .map(|a| a.mms_ratio.clone())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap_or(RatioVal::Unbounded)
    }

    pub fn min_pmms_ratio(&self) -> RatioVal {
        self.agents
            .iter()
            .map(|a| a.pmms_ratio.clone())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap_or(RatioVal::Unbounded)
    }
}

/// Full fairness report for an allocation: per-agent `1`-out-of-`d` ratios,
/// pairwise ratios, and the partition / orientation / frugality flags.
/// Frugality is judged against `canon` when supplied, otherwise against the
/// oracle's deterministic canonical partitions at the same `d`.
pub fn verify(
    inst: &Instance,
    alloc: &Allocation,
    d: usize,
    canon: Option<&[DPartition]>,
    limits: &OracleLimits,
) -> Result<FairnessReport> {
    alloc.validate(&inst.graph)?;
    let mut agents = Vec::new();
    let mut all_frugal = true;
    for agent in inst.graph.agents() {
        let mms = compute_mms(inst, agent, d, limits)?;
        let canonical = match canon {
            Some(c) => c
                .get(agent - 1)
                .cloned()
                .ok_or_else(|| Error::Invalid("canonical partition list too short".into()))?,
            None => mms.canonical.clone(),
        };
        let bundle = alloc.bundle(agent);
        let value = inst.value(agent, bundle)?;
        let pm = pmms_threshold(inst, alloc, agent, limits)?;
        let frugal = bundle.is_empty()
            || canonical.parts.iter().any(|p| bundle.is_subset(p));
        all_frugal &= frugal;
        agents.push(AgentReport {
            agent,
            mms_ratio: RatioVal::of(&value, &mms.mu),
            pmms_ratio: RatioVal::of(&value, &pm),
            mu: mms.mu,
            value,
            pmms_threshold: pm,
            frugal,
        });
    }
    Ok(FairnessReport {
        d,
        is_partition: alloc.is_partition(&inst.graph),
        is_orientation: alloc.is_orientation(&inst.graph),
        is_frugal: all_frugal,
        agents,
    })
}

// ---------------------------------------------------------------------------
// exhaustive best-allocation searches
// ---------------------------------------------------------------------------

/// Which family of allocations to search over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchSpace {
    /// Every edge goes to some agent (n^m assignments).
    Allocations,
    /// Every edge goes to one of its endpoints (2^k over non-loops).
    Orientations,
    /// Each agent receives a subset of one canonical bundle; edges claimed by
    /// both chosen bundles are enumerated, unclaimed edges discarded.
    Frugal,
}

/// Which threshold the min-ratio is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `v_i(X_i) / mu_i^d`.
    Mms,
    /// `v_i(X_i) / PMMS_i(X)` (allocation-dependent threshold).
    Pmms,
}

/// Exhaustively maximizes, over the chosen space, the minimum per-agent
/// fairness ratio. Returns the best ratio and the first witness attaining it.
pub fn best_minmax_ratio(
    inst: &Instance,
    d: usize,
    space: SearchSpace,
    objective: Objective,
    limits: &OracleLimits,
) -> Result<(RatioVal, Allocation)> {
    let n = inst.n();
    let mus: Vec<Q> = match objective {
        Objective::Mms => inst
            .graph
            .agents()
            .map(|a| compute_mms(inst, a, d, limits).map(|r| r.mu))
            .collect::<Result<_>>()?,
        Objective::Pmms => vec![Q::zero(); n],
    };
    let min_ratio = |alloc: &Allocation| -> Result<RatioVal> {
        let mut worst: Option<RatioVal> = None;
        for agent in inst.graph.agents() {
            let value = inst.value(agent, alloc.bundle(agent))?;
            let threshold = match objective {
                Objective::Mms => mus[agent - 1].clone(),
                Objective::Pmms => pmms_threshold(inst, alloc, agent, limits)?,
            };
            let r = RatioVal::of(&value, &threshold);
            worst = Some(match worst {
                None => r,
                Some(w) => {
                    if r < w {
                        r
                    } else {
                        w
                    }
                }
            });
        }
        Ok(worst.unwrap_or(RatioVal::Unbounded))
    };

    let mut best: Option<(RatioVal, Allocation)> = None;
    let consider = |alloc: &Allocation, best: &mut Option<(RatioVal, Allocation)>| -> Result<()> {
        let r = min_ratio(alloc)?;
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            *best = Some((r, alloc.clone()));
        }
        Ok(())
    };

    match space {
        SearchSpace::Orientations | SearchSpace::Allocations => {
            let m = inst.m();
            let log2 = match space {
                SearchSpace::Orientations => inst
                    .graph
                    .edges()
                    .iter()
                    .filter(|e| !e.is_self_loop())
                    .count() as u32,
                SearchSpace::Allocations => (m as f64 * (n as f64).log2()).ceil() as u32,
                SearchSpace::Frugal => unreachable!(),
            };
            if log2 > limits.max_search_log2 {
                return Err(Error::CapExceeded(format!(
                    "search space ~2^{log2} exceeds cap 2^{}",
                    limits.max_search_log2
                )));
            }
            let mut alloc = Allocation::empty(n);
            enumerate_assignments(inst, space, 0, &mut alloc, &mut |a| consider(a, &mut best))?;
        }
        SearchSpace::Frugal => {
            let canon: Vec<DPartition> = inst
                .graph
                .agents()
                .map(|a| compute_mms(inst, a, d, limits).map(|r| r.canonical))
                .collect::<Result<_>>()?;
            let vector_count = (d as f64).powi(n as i32);
            if vector_count > 2f64.powi(limits.max_search_log2 as i32) {
                return Err(Error::CapExceeded(format!(
                    "{d}^{n} index vectors exceed cap"
                )));
            }
            let mut indices = vec![0usize; n];
            frugal_vectors(inst, &canon, d, 0, &mut indices, limits, &mut |a| {
                consider(a, &mut best)
            })?;
        }
    }
    best.ok_or_else(|| Error::InternalInvariant("empty search space".into()))
}

fn enumerate_assignments(
    inst: &Instance,
    space: SearchSpace,
    edge: usize,
    alloc: &mut Allocation,
    emit: &mut dyn FnMut(&Allocation) -> Result<()>,
) -> Result<()> {
    if edge == inst.m() {
        return emit(alloc);
    }
    let e = inst.graph.edges()[edge];
    let candidates: Vec<Agent> = match space {
        SearchSpace::Orientations => {
            if e.is_self_loop() {
                vec![e.u]
            } else {
                vec![e.u, e.v]
            }
        }
        SearchSpace::Allocations => (1..=inst.n()).collect(),
        SearchSpace::Frugal => unreachable!(),
    };
    for agent in candidates {
        alloc.bundle_mut(agent).insert(e.id);
        enumerate_assignments(inst, space, edge + 1, alloc, emit)?;
        alloc.bundle_mut(agent).remove(&e.id);
    }
    Ok(())
}

fn frugal_vectors(
    inst: &Instance,
    canon: &[DPartition],
    d: usize,
    agent_idx: usize,
    indices: &mut [usize],
    limits: &OracleLimits,
    emit: &mut dyn FnMut(&Allocation) -> Result<()>,
) -> Result<()> {
    let n = inst.n();
    if agent_idx == n {
        // assign unique-claim edges, enumerate conflicts
        let mut owners: BTreeMap<EdgeId, Vec<Agent>> = BTreeMap::new();
        for agent in 1..=n {
            for &e in &canon[agent - 1].parts[indices[agent - 1]] {
                owners.entry(e).or_default().push(agent);
            }
        }
        let mut base = Allocation::empty(n);
        let mut conflicts: Vec<(EdgeId, Agent, Agent)> = Vec::new();
        for (e, who) in &owners {
            match who.as_slice() {
                [only] => {
                    base.bundle_mut(*only).insert(*e);
                }
                [a, b] => conflicts.push((*e, *a, *b)),
                _ => {
                    return Err(Error::InternalInvariant(
                        "an edge claimed by more than two bundles".into(),
                    ))
                }
            }
        }
        if conflicts.len() > limits.max_conflicts {
            return Err(Error::CapExceeded(format!(
                "{} conflict edges exceed cap {}",
                conflicts.len(),
                limits.max_conflicts
            )));
        }
        for assign in 0u64..1 << conflicts.len() {
            let mut alloc = base.clone();
            for (bit, &(e, a, b)) in conflicts.iter().enumerate() {
                let to = if assign >> bit & 1 == 0 { a.min(b) } else { a.max(b) };
                alloc.bundle_mut(to).insert(e);
            }
            emit(&alloc)?;
        }
        return Ok(());
    }
    for t in 0..d {
        indices[agent_idx] = t;
        frugal_vectors(inst, canon, d, agent_idx + 1, indices, limits, emit)?;
    }
    Ok(())
}

/// Orients every unallocated edge to its lowest-index endpoint, turning a
/// partial (e.g. frugal) allocation into a full orientation. Monotone
/// valuations mean this never lowers any guarantee.
pub fn complete_orientation(inst: &Instance, alloc: &Allocation) -> Allocation {
    let mut full = alloc.clone();
    let have = alloc.allocated_edges();
    for e in inst.graph.edges() {
        if !have.contains(&e.id) {
            full.bundle_mut(e.u).insert(e.id);
        }
    }
    full
}
