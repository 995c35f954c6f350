//! Deterministic builders for the small instances that certify tightness of
//! the bounds: each generator documents the claim it is paired with, and the
//! test suite re-establishes every claim with the exhaustive oracles.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Allocation, DPartition, Multigraph};
use crate::rational::{qf, qi, Q};
use crate::transversal::{find_its, MultipartiteGraph};
use crate::valuation::{
    AdditiveValuation, SubadditiveForm, SubadditiveValuation, Valuation, XosValuation,
};

fn symmetric_additive(
    graph: Multigraph,
    weights: &[Q],
) -> Result<Instance> {
    let n = graph.agent_count();
    let mut valuations = Vec::with_capacity(n);
    for agent in 1..=n {
        let incident = graph.incident_edges(agent)?;
        let map: BTreeMap<_, _> = incident.into_iter().map(|e| (e, weights[e].clone())).collect();
        valuations.push(Valuation::Additive(AdditiveValuation { owner: agent, weights: map }));
    }
    Instance::new(graph, valuations)
}

/// One large edge of weight `n` and `2(n-1)` small edges of weight 1/2, all
/// with endpoints (1, 2), symmetric weights. The max-edge greedy run leaves
/// agent 2 with exactly half of her pairwise threshold.
pub fn gen_greedy_bad(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Invalid("gen_greedy_bad needs n >= 2".into()));
    }
    let m = 1 + 2 * (n - 1);
    let graph = Multigraph::new(n, &vec![(1, 2); m])?;
    let mut weights = vec![qi(n as i64)];
    weights.extend(std::iter::repeat_n(qf(1, 2), 2 * (n - 1)));
    symmetric_additive(graph, &weights)
}

/// The complete simple graph with unit symmetric weights. Every maximin value
/// is 0, every 1-out-of-(n-1) value is 1, and the pairwise cut-and-choose
/// order leaves the last agent empty-handed.
pub fn gen_complete_unit(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Invalid("gen_complete_unit needs n >= 3".into()));
    }
    let mut endpoints = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            endpoints.push((i, j));
        }
    }
    let graph = Multigraph::new(n, &endpoints)?;
    let weights = vec![qi(1); endpoints.len()];
    symmetric_additive(graph, &weights)
}

/// Three agents, three (1,2) edges with symmetric weights `M, M, 1`. The
/// returned allocation gives agent 1 the small edge: it is exactly maximin
/// fair but only `1/M` of her pairwise threshold.
pub fn gen_mms_not_pmms(m_weight: i64) -> Result<(Instance, Allocation)> {
    if m_weight < 1 {
        return Err(Error::Invalid("gen_mms_not_pmms needs M >= 1".into()));
    }
    let graph = Multigraph::new(3, &[(1, 2), (1, 2), (1, 2)])?;
    let weights = vec![qi(m_weight), qi(m_weight), qi(1)];
    let inst = symmetric_additive(graph, &weights)?;
    let mut alloc = Allocation::empty(3);
    alloc.bundle_mut(1).insert(2); // the small edge
    alloc.bundle_mut(2).extend([0, 1]); // both large edges
    Ok((inst, alloc))
}

/// Four (1,2) edges indexed as a 2x2 grid: edge `2*(r-1) + (c-1)` is cell
/// (r, c). Agent 1 has a clause of value 1/2 per row, agent 2 per column, and
/// `pad` extra isolated agents are appended after the zero-value agent 3.
/// No orientation beats half of the pairwise threshold for everyone, yet the
/// returned (wasteful) allocation is exactly pairwise fair.
pub fn gen_xos_pmms_upper(pad: usize) -> Result<(Instance, Allocation)> {
    let n = 3 + pad;
    let graph = Multigraph::new(n, &vec![(1, 2); 4])?;
    let cell = |r: usize, c: usize| 2 * (r - 1) + (c - 1);
    let row_clause = |r: usize| -> BTreeMap<_, _> {
        (1..=2).map(|c| (cell(r, c), qf(1, 2))).collect()
    };
    let col_clause = |c: usize| -> BTreeMap<_, _> {
        (1..=2).map(|r| (cell(r, c), qf(1, 2))).collect()
    };
    let mut valuations = vec![
        Valuation::Xos(XosValuation { owner: 1, clauses: vec![row_clause(1), row_clause(2)] }),
        Valuation::Xos(XosValuation { owner: 2, clauses: vec![col_clause(1), col_clause(2)] }),
    ];
    for agent in 3..=n {
        valuations.push(Valuation::Xos(XosValuation { owner: agent, clauses: vec![BTreeMap::new()] }));
    }
    let inst = Instance::new(graph, valuations)?;
    let mut alloc = Allocation::empty(n);
    alloc.bundle_mut(1).extend([cell(1, 1), cell(1, 2)]);
    alloc.bundle_mut(2).insert(cell(2, 1));
    alloc.bundle_mut(3).insert(cell(2, 2));
    Ok((inst, alloc))
}

/// The tight subadditive family: for each pair `i < j` there are `n^2` edges
/// `e(i, t_i, j, t_j)`, and agent `i`'s bundle `B_{i,t}` collects the edges
/// carrying her index `t` towards every other agent. A set is worth 1 when it
/// contains a full bundle and 1/2 otherwise. Returns the instance and the
/// intended bundle partitions (which are also the unique optimal ones).
pub fn gen_subadditive_upper(n: usize) -> Result<(Instance, Vec<DPartition>)> {
    if n < 2 {
        return Err(Error::Invalid("gen_subadditive_upper needs n >= 2".into()));
    }
    let mut endpoints = Vec::new();
    let mut index_of = BTreeMap::new(); // (i, t_i, j, t_j) -> edge id
    for i in 1..=n {
        for j in i + 1..=n {
            for ti in 0..n {
                for tj in 0..n {
                    index_of.insert((i, ti, j, tj), endpoints.len());
                    endpoints.push((i, j));
                }
            }
        }
    }
    let graph = Multigraph::new(n, &endpoints)?;
    let mut bundles_per_agent: Vec<Vec<BTreeSet<usize>>> = vec![vec![BTreeSet::new(); n]; n];
    for (&(i, ti, j, tj), &e) in &index_of {
        bundles_per_agent[i - 1][ti].insert(e);
        bundles_per_agent[j - 1][tj].insert(e);
    }
    let mut valuations = Vec::with_capacity(n);
    for agent in 1..=n {
        valuations.push(Valuation::Subadditive(SubadditiveValuation {
            owner: agent,
            form: SubadditiveForm::BundleContainment {
                bundles: bundles_per_agent[agent - 1].clone(),
                inside: qi(1),
                outside: qf(1, 2),
            },
        }));
    }
    let inst = Instance::new(graph, valuations)?;
    let canon = bundles_per_agent
        .into_iter()
        .enumerate()
        .map(|(idx, parts)| DPartition { owner: idx + 1, parts })
        .collect();
    Ok((inst, canon))
}

/// Builds the tight XOS instance from a certified no-transversal conflict
/// graph: parts are agents, a part's vertices are her bundles, every conflict
/// edge becomes a shared item, and each vertex is padded with self-loops to
/// exactly `b` items, all worth `1/b` under that bundle's clause. Refuses
/// graphs that do admit a transversal.
pub fn gen_xos_upper(conflict: &MultipartiteGraph, b: usize) -> Result<Instance> {
    conflict.validate()?;
    let r = conflict.part_count();
    if r < 2 {
        return Err(Error::Invalid("conflict graph needs at least 2 parts".into()));
    }
    let d = conflict.parts[0];
    if conflict.parts.iter().any(|&s| s != d) || d == 0 {
        return Err(Error::Invalid("conflict graph parts must all have the same positive size".into()));
    }
    if conflict.max_degree() > b {
        return Err(Error::Invalid(format!(
            "conflict graph has degree {} > b = {b}",
            conflict.max_degree()
        )));
    }
    let budget = (d as u64).pow(r as u32) * (r * r) as u64 + 10_000;
    if find_its(conflict, 1, budget)?.is_some() {
        return Err(Error::Invalid(
            "conflict graph admits an independent transversal; not certified".into(),
        ));
    }
    // items: one per conflict edge, then self-loop padding per vertex
    let mut endpoints = Vec::new();
    let mut vertex_items: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for &(p1, i1, p2, i2) in &conflict.edges {
        vertex_items.entry((p1, i1)).or_default().push(endpoints.len());
        vertex_items.entry((p2, i2)).or_default().push(endpoints.len());
        endpoints.push((p1 + 1, p2 + 1));
    }
    for p in 0..r {
        for i in 0..d {
            let have = vertex_items.entry((p, i)).or_default();
            while have.len() < b {
                have.push(endpoints.len());
                endpoints.push((p + 1, p + 1));
            }
        }
    }
    let graph = Multigraph::new(r, &endpoints)?;
    let mut valuations = Vec::with_capacity(r);
    for p in 0..r {
        let clauses = (0..d)
            .map(|i| {
                vertex_items[&(p, i)]
                    .iter()
                    .map(|&e| (e, Q::new(1.into(), (b as i64).into())))
                    .collect::<BTreeMap<_, _>>()
            })
            .collect();
        valuations.push(Valuation::Xos(XosValuation { owner: p + 1, clauses }));
    }
    let mut inst = Instance::new(graph, valuations)?;
    inst.meta = Some(serde_json::json!({
        "conflict_graph": { "parts": conflict.parts, "edges": conflict.edges },
        "b": b,
    }));
    Ok(inst)
}

/// The 4-part, 4-vertex-per-part conflict pattern in which every part pairs
/// off with one partner on two vertices and shares its other two vertices
/// with both remaining parts. It has no size-1 independent transversal.
pub fn fig_4xos_conflict_graph() -> MultipartiteGraph {
    let blocks: [(usize, usize, [usize; 2], [usize; 2]); 6] = [
        (0, 1, [0, 1], [0, 1]),
        (0, 2, [2, 3], [2, 3]),
        (0, 3, [2, 3], [2, 3]),
        (1, 2, [2, 3], [2, 3]),
        (1, 3, [2, 3], [2, 3]),
        (2, 3, [0, 1], [0, 1]),
    ];
    let mut edges = Vec::new();
    for (p, q, left, right) in blocks {
        for &i in &left {
            for &j in &right {
                edges.push(((p, i), (q, j)));
            }
        }
    }
    MultipartiteGraph::new(vec![4; 4], edges).expect("fixed graph is valid")
}
