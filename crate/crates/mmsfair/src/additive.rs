//! Constructive algorithms for additive agents: the pairwise cut-and-choose
//! protocol (exact MMS and PMMS) and the max-edge greedy (1-out-of-3 MMS).
//! The cut-and-choose engine itself works for arbitrary monotone valuations
//! and is reused by the subadditive module.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Agent, Allocation, EdgeId};
use crate::oracle::{mms_on_set, OracleLimits};
use crate::rational::Q;

/// One pairwise split: the higher-indexed agent cuts her shared edges with the
/// lower-indexed agent into two parts maximizing the minimum, the lower agent
/// takes her preferred part.
#[derive(Debug, Clone, Serialize)]
pub struct PairSplit {
    /// The choosing agent (lower index).
    pub chooser: Agent,
    /// The cutting agent (higher index).
    pub cutter: Agent,
    /// The cutter's optimal halves; part 0 contains the smallest edge id.
    pub cut: [BTreeSet<EdgeId>; 2],
    /// The cutter's guaranteed value (minimum over the two parts).
    #[serde(serialize_with = "crate::oracle::ser_q_field")]
    pub cutter_mu2: Q,
    /// Which part the chooser took (0 or 1).
    pub chooser_pick: usize,
}

impl PairSplit {
    pub fn chooser_part(&self) -> &BTreeSet<EdgeId> {
        &self.cut[self.chooser_pick]
    }

    pub fn cutter_part(&self) -> &BTreeSet<EdgeId> {
        &self.cut[1 - self.chooser_pick]
    }
}

/// Full trace of a pairwise cut-and-choose run.
#[derive(Debug, Clone, Serialize)]
pub struct CutChooseTrace {
    /// Splits in lexicographic pair order (chooser < cutter).
    pub pairs: Vec<PairSplit>,
    /// Self-loops handed to their only relevant agent.
    pub self_loops: Vec<(Agent, BTreeSet<EdgeId>)>,
}

/// The pairwise cut-and-choose engine, valid for any monotone valuations:
/// pairs `(i, j)` with `i < j` are processed in lexicographic order, `j` cuts
/// their shared edges into an exact 1-out-of-2 optimal split (deterministic:
/// lexicographically smallest part assignment among maximizers), `i` takes the
/// part she prefers (part 0 on ties), and self-loops go to their owner.
pub fn pairwise_cut_and_choose(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<(Allocation, CutChooseTrace)> {
    let n = inst.n();
    let mut alloc = Allocation::empty(n);
    let mut pairs = Vec::new();
    let mut self_loops = Vec::new();
    for i in 1..=n {
        let loops = inst.graph.edges_between(i, i)?;
        if !loops.is_empty() {
            alloc.bundle_mut(i).extend(loops.iter().copied());
            self_loops.push((i, loops));
        }
        for j in i + 1..=n {
            let shared = inst.graph.edges_between(i, j)?;
            let (cut, mu2) = optimal_two_partition(inst, j, &shared, limits)?;
            let v0 = inst.value(i, &cut[0])?;
            let v1 = inst.value(i, &cut[1])?;
            let pick = if v1 > v0 { 1 } else { 0 };
            alloc.bundle_mut(i).extend(cut[pick].iter().copied());
            alloc.bundle_mut(j).extend(cut[1 - pick].iter().copied());
            pairs.push(PairSplit {
                chooser: i,
                cutter: j,
                cut,
                cutter_mu2: mu2,
                chooser_pick: pick,
            });
        }
    }
    alloc.validate(&inst.graph)?;
    Ok((alloc, CutChooseTrace { pairs, self_loops }))
}

/// The cutter's exact optimal 2-partition of `ground`, with the
/// lexicographically smallest part assignment among maximizers (so part 0
/// contains the smallest edge id).
fn optimal_two_partition(
    inst: &Instance,
    cutter: Agent,
    ground: &BTreeSet<EdgeId>,
    limits: &OracleLimits,
) -> Result<([BTreeSet<EdgeId>; 2], Q)> {
    let items: Vec<EdgeId> = ground.iter().copied().collect();
    if items.is_empty() {
        return Ok(([BTreeSet::new(), BTreeSet::new()], Q::from_integer(0.into())));
    }
    let split = crate::oracle::canonical_partition_on_set(inst, cutter, &items, 2, limits)?;
    let mu2 = mms_on_set(inst, cutter, ground, 2, limits)?;
    let mut parts = split.into_iter();
    let p0 = parts.next().unwrap_or_default();
    let p1 = parts.next().unwrap_or_default();
    Ok(([p0, p1], mu2))
}

/// Exact-MMS and PMMS orientation for additive agents via pairwise
/// cut-and-choose.
pub fn cut_and_choose(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<(Allocation, CutChooseTrace)> {
    require_additive(inst)?;
    pairwise_cut_and_choose(inst, limits)
}

fn require_additive(inst: &Instance) -> Result<()> {
    for v in &inst.valuations {
        if v.as_additive().is_none() {
            return Err(Error::AlgorithmMismatch {
                agent: v.owner(),
                required: "additive",
                found: v.class_name(),
            });
        }
    }
    Ok(())
}

/// One greedy round: `agent` took `edge`, play passed to `next`.
#[derive(Debug, Clone, Serialize)]
pub struct GreedyRound {
    pub agent: Agent,
    pub edge: EdgeId,
    pub next: Agent,
    /// The agent was chosen by the restart rule (lowest index with a relevant
    /// edge left) instead of receiving play from the previous edge.
    pub restarted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreedyTrace {
    pub rounds: Vec<GreedyRound>,
}

/// 1-out-of-3 MMS orientation for additive agents: starting from agent 1, the
/// acting agent takes her most valuable remaining incident edge (smallest id
/// on ties) and play passes to the edge's other endpoint; when the acting
/// agent has nothing left, the lowest-index agent with a remaining incident
/// edge continues.
pub fn greedy_max_edge(inst: &Instance) -> Result<(Allocation, GreedyTrace)> {
    require_additive(inst)?;
    let n = inst.n();
    let mut remaining: BTreeSet<EdgeId> = (0..inst.m()).collect();
    let mut alloc = Allocation::empty(n);
    let mut rounds = Vec::new();
    let mut current: Agent = 1;
    while !remaining.is_empty() {
        let has_edge = |agent: Agent| -> bool {
            remaining.iter().any(|&e| inst.graph.edge(e).unwrap().touches(agent))
        };
        let mut restarted = false;
        if !has_edge(current) {
            current = (1..=n)
                .find(|&a| has_edge(a))
                .expect("some endpoint of a remaining edge has it");
            restarted = !rounds.is_empty();
        }
        // best remaining incident edge; additive, so singleton weights decide
        let weights = &inst.valuations[current - 1].as_additive().unwrap().weights;
        let zero = Q::from_integer(0.into());
        let pick = remaining
            .iter()
            .filter(|&&e| inst.graph.edge(e).unwrap().touches(current))
            .max_by(|&&a, &&b| {
                let wa = weights.get(&a).unwrap_or(&zero);
                let wb = weights.get(&b).unwrap_or(&zero);
                wa.cmp(wb).then(b.cmp(&a)) // smallest id among ties
            })
            .copied()
            .expect("current agent has an incident edge");
        remaining.remove(&pick);
        alloc.bundle_mut(current).insert(pick);
        let next = inst.graph.edge(pick).unwrap().other_endpoint(current);
        rounds.push(GreedyRound { agent: current, edge: pick, next, restarted });
        current = next;
    }
    alloc.validate(&inst.graph)?;
    Ok((alloc, GreedyTrace { rounds }))
}
