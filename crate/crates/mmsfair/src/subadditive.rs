//! Subadditive agents: the recursive half-MMS frugal orientation and the
//! half-PMMS pairwise protocol.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::additive::{pairwise_cut_and_choose, CutChooseTrace};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Agent, Allocation, DPartition, EdgeId};
use crate::oracle::{compute_mms, OracleLimits};
use crate::rational::Q;

/// Half-PMMS orientation for subadditive agents (additive and XOS accepted as
/// special cases): the same pairwise cut-and-choose as the additive protocol,
/// with the cutter's optimal split computed through her general oracle. On
/// additive instances this coincides split-for-split with the additive
/// algorithm since the tie-breaks are shared.
pub fn subadditive_half_pmms(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<(Allocation, CutChooseTrace)> {
    pairwise_cut_and_choose(inst, limits)
}

/// What the half-MMS recursion produced for one agent.
#[derive(Debug, Clone)]
pub struct FrugalShare {
    pub agent: Agent,
    /// Index of the canonical bundle the share lives in.
    pub bundle: usize,
    pub edges: BTreeSet<EdgeId>,
}

type Prefix = Vec<Rc<FrugalShare>>;

struct HalfMms<'a> {
    inst: &'a Instance,
    order: Vec<Agent>,
    canon: Vec<DPartition>,
    memo: BTreeMap<(usize, Vec<Vec<usize>>), Prefix>,
}

impl HalfMms<'_> {
    fn canon_of(&self, agent: Agent) -> &DPartition {
        &self.canon[agent - 1]
    }

    /// Frugal orientation for the first `k` agents of the order, where agent
    /// `order[i]` may only use bundle indices from `sets[i]` (|sets[i]| = k).
    fn solve(&mut self, k: usize, sets: &[Vec<usize>]) -> Result<Prefix> {
        let key = (k, sets.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let result = if k == 1 {
            let agent = self.order[0];
            let t = sets[0][0];
            let edges = self.canon_of(agent).parts[t].clone();
            vec![Rc::new(FrugalShare { agent, bundle: t, edges })]
        } else {
            self.extend(k, sets)?
        };
        self.memo.insert(key, result.clone());
        Ok(result)
    }

    fn extend(&mut self, k: usize, sets: &[Vec<usize>]) -> Result<Prefix> {
        let newcomer = self.order[k - 1];
        // first promise: drop the largest admissible index of every earlier agent
        let dropped: Vec<Vec<usize>> = sets[..k - 1]
            .iter()
            .map(|s| s[..s.len() - 1].to_vec())
            .collect();
        let kept = self.solve(k - 1, &dropped)?;
        // second promise: drop instead the bundle each agent actually used
        let alt_sets: Vec<Vec<usize>> = sets[..k - 1]
            .iter()
            .zip(&kept)
            .map(|(s, share)| s.iter().copied().filter(|&t| t != share.bundle).collect())
            .collect();
        let t = sets[k - 1][0];
        let bundle = self.canon_of(newcomer).parts[t].clone();
        let kept_edges: BTreeSet<EdgeId> =
            kept.iter().flat_map(|s| s.edges.iter().copied()).collect();

        let outside: BTreeSet<EdgeId> = bundle.difference(&kept_edges).copied().collect();
        let v_bundle = self.inst.value(newcomer, &bundle)?;
        let v_outside = self.inst.value(newcomer, &outside)?;
        let half = v_bundle.clone() / Q::from_integer(2.into());
        if v_outside >= half {
            let mut out = kept;
            out.push(Rc::new(FrugalShare { agent: newcomer, bundle: t, edges: outside }));
            return Ok(out);
        }
        let alt = self.solve(k - 1, &alt_sets)?;
        let alt_edges: BTreeSet<EdgeId> =
            alt.iter().flat_map(|s| s.edges.iter().copied()).collect();
        // the two promises never share an edge relevant to the newcomer
        let inside: BTreeSet<EdgeId> = bundle.intersection(&kept_edges).copied().collect();
        if inside.intersection(&alt_edges).next().is_some() {
            return Err(Error::InternalInvariant(
                "the two promised orientations overlap inside the newcomer's bundle".into(),
            ));
        }
        let v_inside = self.inst.value(newcomer, &inside)?;
        if v_inside < half {
            // subadditivity forces v(inside) + v(outside) >= v(bundle)
            return Err(Error::InternalInvariant(
                "neither half of the bundle reaches half its value".into(),
            ));
        }
        let mut out = alt;
        out.push(Rc::new(FrugalShare { agent: newcomer, bundle: t, edges: inside }));
        Ok(out)
    }
}

/// Half-MMS frugal orientation for subadditive agents, built by extending a
/// promised orientation one agent at a time: the newcomer takes whichever half
/// of her lowest admissible canonical bundle (outside or inside the previous
/// orientation) is worth at least half the bundle, preferring the outside
/// branch. Agents are processed in index order unless `order` says otherwise.
pub fn subadditive_half_mms(
    inst: &Instance,
    order: Option<&[Agent]>,
    limits: &OracleLimits,
) -> Result<(Allocation, Vec<DPartition>)> {
    let n = inst.n();
    let canon: Vec<DPartition> = inst
        .graph
        .agents()
        .map(|a| compute_mms(inst, a, n, limits).map(|r| r.canonical))
        .collect::<Result<_>>()?;
    subadditive_half_mms_with_canon(inst, canon, order)
}

/// Same construction over caller-supplied optimal `n`-partitions; useful when
/// the optimum is known structurally on instances too large for the oracle.
pub fn subadditive_half_mms_with_canon(
    inst: &Instance,
    canon: Vec<DPartition>,
    order: Option<&[Agent]>,
) -> Result<(Allocation, Vec<DPartition>)> {
    let n = inst.n();
    for p in &canon {
        p.validate(&inst.graph)?;
        if p.d() != n {
            return Err(Error::Invalid("supplied partitions must have n parts".into()));
        }
    }
    let order: Vec<Agent> = match order {
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted != (1..=n).collect::<Vec<_>>() {
                return Err(Error::Invalid("order must be a permutation of 1..=n".into()));
            }
            o.to_vec()
        }
        None => (1..=n).collect(),
    };
    let mut solver = HalfMms { inst, order, canon, memo: BTreeMap::new() };
    let sets: Vec<Vec<usize>> = vec![(0..n).collect(); n];
    let shares = solver.solve(n, &sets)?;
    let mut alloc = Allocation::empty(n);
    for share in &shares {
        alloc.bundle_mut(share.agent).extend(share.edges.iter().copied());
    }
    alloc.validate(&inst.graph)?;
    Ok((alloc, solver.canon))
}
