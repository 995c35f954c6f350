//! Multipartite conflict graphs: independent transversal search, bipartite
//! matchings with Hall certificates, block degree metrics, and a randomized
//! search for small graphs without independent transversals.

use std::collections::BTreeSet;

use num_traits::Zero;

use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::Q;

/// A vertex addressed as (part, index within part), both 0-based.
pub type PartVertex = (usize, usize);

/// An undirected multipartite graph given by part sizes and cross-part edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultipartiteGraph {
    /// Size of each part.
    pub parts: Vec<usize>,
    /// Edges as `(p1, i1, p2, i2)` with `p1 != p2`.
    pub edges: Vec<(usize, usize, usize, usize)>,
}

impl MultipartiteGraph {
    pub fn new(parts: Vec<usize>, edges: Vec<(PartVertex, PartVertex)>) -> Result<Self> {
        let g = MultipartiteGraph {
            parts,
            edges: edges
                .into_iter()
                .map(|((p1, i1), (p2, i2))| {
                    if (p1, i1) <= (p2, i2) {
                        (p1, i1, p2, i2)
                    } else {
                        (p2, i2, p1, i1)
                    }
                })
                .collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for &(p1, i1, p2, i2) in &self.edges {
            if p1 == p2 {
                return Err(Error::Invalid(format!(
                    "intra-part edge ({p1},{i1})-({p2},{i2}) not allowed"
                )));
            }
            for (p, i) in [(p1, i1), (p2, i2)] {
                if p >= self.parts.len() || i >= self.parts[p] {
                    return Err(Error::Invalid(format!("vertex ({p},{i}) out of bounds")));
                }
            }
        }
        Ok(())
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.iter().sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.parts.len());
        let mut acc = 0;
        for &s in &self.parts {
            off.push(acc);
            acc += s;
        }
        off
    }

    /// Adjacency bitmask per global vertex (graphs up to 128 vertices).
    fn adjacency(&self) -> Result<Vec<u128>> {
        let v = self.vertex_count();
        if v > 128 {
            return Err(Error::CapExceeded(format!("{v} vertices exceed the 128-vertex cap")));
        }
        let off = self.offsets();
        let mut adj = vec![0u128; v];
        for &(p1, i1, p2, i2) in &self.edges {
            let a = off[p1] + i1;
            let b = off[p2] + i2;
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Ok(adj)
    }

    pub fn degree(&self, v: PartVertex) -> usize {
        self.edges
            .iter()
            .filter(|&&(p1, i1, p2, i2)| (p1, i1) == v || (p2, i2) == v)
            .count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.parts.len())
            .flat_map(|p| (0..self.parts[p]).map(move |i| (p, i)))
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, a: PartVertex, b: PartVertex) -> bool {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.edges.contains(&(x.0, x.1, y.0, y.1))
    }

    pub fn to_json(&self) -> String {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|&(p1, i1, p2, i2)| Value::from(vec![p1, i1, p2, i2]))
            .collect();
        let mut out = serde_json::to_string_pretty(&serde_json::json!({
            "parts": self.parts,
            "edges": edges,
        }))
        .expect("serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("malformed graph JSON: {e}")))?;
        let parts = root
            .get("parts")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"parts\"".into()))?
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Parse("bad part size".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = root
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"edges\"".into()))?
            .iter()
            .map(|e| {
                let quad = e
                    .as_array()
                    .filter(|a| a.len() == 4)
                    .ok_or_else(|| Error::Parse("edge must be [p1,i1,p2,i2]".into()))?;
                let nums = quad
                    .iter()
                    .map(|v| {
                        v.as_u64()
                            .map(|x| x as usize)
                            .ok_or_else(|| Error::Parse("bad edge index".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(((nums[0], nums[1]), (nums[2], nums[3])))
            })
            .collect::<Result<Vec<_>>>()?;
        MultipartiteGraph::new(parts, edges)
    }
}

/// Degree statistics per part.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMetrics {
    /// Average vertex degree of each part, as exact rationals.
    pub part_average_degree: Vec<Q>,
    /// Maximum over parts of the average degree.
    pub max_block_average_degree: Q,
    /// Minimum part size.
    pub thickness: usize,
    pub max_degree: usize,
}

pub fn block_metrics(g: &MultipartiteGraph) -> BlockMetrics {
    let mut endpoint_counts = vec![0usize; g.parts.len()];
    for &(p1, _, p2, _) in &g.edges {
        endpoint_counts[p1] += 1;
        endpoint_counts[p2] += 1;
    }
    let part_average_degree: Vec<Q> = g
        .parts
        .iter()
        .zip(&endpoint_counts)
        .map(|(&size, &cnt)| {
            if size == 0 {
                Q::zero()
            } else {
                Q::new(cnt.into(), size.into())
            }
        })
        .collect();
    let max_block_average_degree =
        part_average_degree.iter().cloned().max().unwrap_or_else(Q::zero);
    BlockMetrics {
        part_average_degree,
        max_block_average_degree,
        thickness: g.parts.iter().copied().min().unwrap_or(0),
        max_degree: g.max_degree(),
    }
}

fn conflict_free(adj: &[u128], v: usize, chosen_mask: u128) -> bool {
    adj[v] & chosen_mask == 0
}

struct ItsSearch<'a> {
    g: &'a MultipartiteGraph,
    adj: Vec<u128>,
    off: Vec<usize>,
    s: usize,
    nodes: u64,
    budget: u64,
}

impl ItsSearch<'_> {
    fn part_feasible(&self, p: usize, chosen_mask: u128) -> bool {
        let mut free = 0;
        for i in 0..self.g.parts[p] {
            if conflict_free(&self.adj, self.off[p] + i, chosen_mask) {
                free += 1;
                if free >= self.s {
                    return true;
                }
            }
        }
        false
    }

    fn solve_part(
        &mut self,
        part: usize,
        chosen_mask: &mut u128,
        chosen: &mut Vec<Vec<usize>>,
    ) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::CapExceeded(format!(
                "transversal search exceeded {} nodes",
                self.budget
            )));
        }
        if part == self.g.part_count() {
            return Ok(true);
        }
        for later in part..self.g.part_count() {
            if !self.part_feasible(later, *chosen_mask) {
                return Ok(false);
            }
        }
        let mut combo = Vec::with_capacity(self.s);
        self.pick(part, 0, &mut combo, chosen_mask, chosen)
    }

    fn pick(
        &mut self,
        part: usize,
        start: usize,
        combo: &mut Vec<usize>,
        chosen_mask: &mut u128,
        chosen: &mut Vec<Vec<usize>>,
    ) -> Result<bool> {
        if combo.len() == self.s {
            chosen.push(combo.clone());
            if self.solve_part(part + 1, chosen_mask, chosen)? {
                return Ok(true);
            }
            chosen.pop();
            return Ok(false);
        }
        for i in start..self.g.parts[part] {
            let v = self.off[part] + i;
            // vertices within a part are never adjacent; only cross-part
            // conflicts can arise
            if !conflict_free(&self.adj, v, *chosen_mask) {
                continue;
            }
            combo.push(i);
            *chosen_mask |= 1 << v;
            if self.pick(part, i + 1, combo, chosen_mask, chosen)? {
                return Ok(true);
            }
            *chosen_mask &= !(1u128 << v);
            combo.pop();
        }
        Ok(false)
    }
}

/// Searches for an independent transversal of size `s`: `s` vertices from
/// every part, pairwise non-adjacent. Returns the lexicographically smallest
/// one (parts in order, ascending vertex indices) or `None`, certified by
/// exhausting the pruned search tree.
pub fn find_its(
    g: &MultipartiteGraph,
    s: usize,
    node_budget: u64,
) -> Result<Option<Vec<Vec<usize>>>> {
    if g.parts.iter().any(|&size| size < s) {
        return Ok(None);
    }
    let adj = g.adjacency()?;
    let off = g.offsets();
    let mut search = ItsSearch { g, adj, off, s, nodes: 0, budget: node_budget };
    let mut chosen_mask = 0u128;
    let mut chosen = Vec::with_capacity(g.part_count());
    let found = search.solve_part(0, &mut chosen_mask, &mut chosen)?;
    Ok(if found { Some(chosen) } else { None })
}

/// Second oracle for `find_its(_, 1)`: plain enumeration of every transversal
/// with no pruning. Only call when the product of part sizes is small.
pub fn has_size1_its_by_enumeration(g: &MultipartiteGraph) -> Result<bool> {
    let adj = g.adjacency()?;
    let off = g.offsets();
    let r = g.part_count();
    if g.parts.iter().any(|&s| s == 0) {
        return Ok(false);
    }
    let mut pick = vec![0usize; r];
    loop {
        let mut independent = true;
        'pairs: for a in 0..r {
            for b in a + 1..r {
                let va = off[a] + pick[a];
                let vb = off[b] + pick[b];
                if adj[va] >> vb & 1 == 1 {
                    independent = false;
                    break 'pairs;
                }
            }
        }
        if independent {
            return Ok(true);
        }
        let mut p = 0;
        loop {
            if p == r {
                return Ok(false);
            }
            pick[p] += 1;
            if pick[p] < g.parts[p] {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
    }
}

/// Result of a maximum-matching computation on a 2-partite graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingResult {
    /// A matching of size `min(|U|, |V|)`.
    Perfect(Vec<(usize, usize)>),
    /// The maximum matching falls short; `violator` is a set of vertices on
    /// one side whose joint neighborhood is smaller than the set itself.
    Deficient {
        matching: Vec<(usize, usize)>,
        /// Which side the violating set lives on (0 = left part).
        side: usize,
        violator: Vec<usize>,
    },
}

/// Maximum bipartite matching by augmenting paths; on deficiency, returns a
/// Hall-violating set built from the vertices reachable by alternating paths
/// from an unmatched vertex.
pub fn hall_matching(g: &MultipartiteGraph) -> Result<MatchingResult> {
    if g.part_count() != 2 {
        return Err(Error::Invalid(format!(
            "hall_matching needs exactly 2 parts, got {}",
            g.part_count()
        )));
    }
    let (nu, nv) = (g.parts[0], g.parts[1]);
    // run with the smaller side on the left so the violator lands there
    let swap = nu > nv;
    let (left, right) = if swap { (nv, nu) } else { (nu, nv) };
    let mut adj = vec![Vec::new(); left];
    for &(p1, i1, _p2, i2) in &g.edges {
        debug_assert_eq!(p1, 0);
        let (l, r) = if swap { (i2, i1) } else { (i1, i2) };
        adj[l].push(r);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    fn try_augment(
        u: usize,
        adj: &[Vec<usize>],
        matched_right: &mut [Option<usize>],
        used: &mut [bool],
    ) -> bool {
        for &v in &adj[u] {
            if used[v] {
                continue;
            }
            used[v] = true;
            if matched_right[v].is_none()
                || try_augment(matched_right[v].unwrap(), adj, matched_right, used)
            {
                matched_right[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut matched_right: Vec<Option<usize>> = vec![None; right];
    let mut size = 0;
    let mut unmatched_left = Vec::new();
    for u in 0..left {
        let mut used = vec![false; right];
        if try_augment(u, &adj, &mut matched_right, &mut used) {
            size += 1;
        } else {
            unmatched_left.push(u);
        }
    }
    let mut matching: Vec<(usize, usize)> = matched_right
        .iter()
        .enumerate()
        .filter_map(|(v, m)| m.map(|u| if swap { (v, u) } else { (u, v) }))
        .collect();
    matching.sort_unstable();
    if size == left.min(right) {
        return Ok(MatchingResult::Perfect(matching));
    }
    // alternating reachability from the first unmatched left vertex gives a
    // set with |N(W)| = |W| - 1
    let start = unmatched_left[0];
    let mut left_reach = BTreeSet::from([start]);
    let mut right_reach: BTreeSet<usize> = BTreeSet::new();
    loop {
        let mut grew = false;
        for &u in left_reach.clone().iter() {
            for &v in &adj[u] {
                if right_reach.insert(v) {
                    grew = true;
                }
                if let Some(u2) = matched_right[v] {
                    if left_reach.insert(u2) {
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    Ok(MatchingResult::Deficient {
        matching,
        side: if swap { 1 } else { 0 },
        violator: left_reach.into_iter().collect(),
    })
}

/// Degree threshold of the tight inapproximability construction for `n`
/// agents and `d` bundles: the maximum degree at which a no-transversal
/// conflict pattern exists, yielding the `1 - 1/threshold` upper bound.
pub fn degree_threshold(n: usize, d: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::Invalid("degree threshold needs n >= 3".into()));
    }
    if d == 0 {
        return Err(Error::Invalid("degree threshold needs d >= 1".into()));
    }
    Ok(if n % 2 == 1 {
        ((n - 1) * d).div_ceil(2 * (n - 2))
    } else {
        (n * d).div_ceil(2 * (n - 1))
    })
}

/// Randomized search for an `r`-partite graph with parts of size `d`, maximum
/// degree at most `b`, and no size-1 independent transversal. Whatever the
/// greedy cover produces is certified exhaustively before being returned;
/// `None` (nothing found within budget) is a valid outcome.
pub fn search_no_its(
    r: usize,
    d: usize,
    b: usize,
    budget: u64,
    seed: u64,
) -> Result<Option<MultipartiteGraph>> {
    if r * d > 24 {
        return Err(Error::CapExceeded(format!(
            "{r} parts of size {d} exceed the exhaustive certification cap of 24 vertices"
        )));
    }
    if b == 0 || r < 2 || d == 0 {
        return Ok(None);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let transversal_count: u64 = (d as u64).pow(r as u32);
    let mut steps = 0u64;

    'restart: while steps < budget {
        // greedy cover from scratch: repeatedly take the first uncovered
        // transversal and add the legal edge inside it that covers the most
        let mut edges: BTreeSet<(usize, usize, usize, usize)> = BTreeSet::new();
        let mut degree = vec![vec![0usize; d]; r];
        loop {
            steps += 1;
            if steps >= budget {
                break 'restart;
            }
            let graph = MultipartiteGraph {
                parts: vec![d; r],
                edges: edges.iter().copied().collect(),
            };
            let Some(pick) = first_uncovered(&graph, d, r) else {
                // candidate: certify and return
                let cert_budget = transversal_count * (r * r) as u64 + 10_000;
                if find_its(&graph, 1, cert_budget)?.is_none() {
                    return Ok(Some(graph));
                }
                break;
            };
            let mut best: Option<((usize, usize, usize, usize), u64)> = None;
            for p1 in 0..r {
                for p2 in p1 + 1..r {
                    let (i1, i2) = (pick[p1], pick[p2]);
                    if degree[p1][i1] >= b || degree[p2][i2] >= b {
                        continue;
                    }
                    if edges.contains(&(p1, i1, p2, i2)) {
                        continue;
                    }
                    let mut trial = graph.clone();
                    trial.edges.push((p1, i1, p2, i2));
                    let score = covered_count(&trial, d, r) * 4 + rng.random_range(0..4u64);
                    if best.as_ref().is_none_or(|&(_, s)| score > s) {
                        best = Some(((p1, i1, p2, i2), score));
                    }
                }
            }
            match best {
                Some((e, _)) => {
                    edges.insert(e);
                    degree[e.0][e.1] += 1;
                    degree[e.2][e.3] += 1;
                }
                None => {
                    // wedged: drop a few random edges and keep going
                    for _ in 0..rng.random_range(1..=3usize) {
                        if edges.is_empty() {
                            break;
                        }
                        let k = rng.random_range(0..edges.len());
                        let victim = *edges.iter().nth(k).unwrap();
                        edges.remove(&victim);
                        degree[victim.0][victim.1] -= 1;
                        degree[victim.2][victim.3] -= 1;
                    }
                }
            }
        }
    }
    Ok(None)
}

/// First transversal (odometer order) with no internal edge, if any.
fn first_uncovered(g: &MultipartiteGraph, d: usize, r: usize) -> Option<Vec<usize>> {
    let mut pick = vec![0usize; r];
    loop {
        let covered =
            (0..r).any(|a| (a + 1..r).any(|b| g.has_edge((a, pick[a]), (b, pick[b]))));
        if !covered {
            return Some(pick);
        }
        let mut p = 0;
        loop {
            if p == r {
                return None;
            }
            pick[p] += 1;
            if pick[p] < d {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
    }
}

fn covered_count(g: &MultipartiteGraph, d: usize, r: usize) -> u64 {
    let mut pick = vec![0usize; r];
    let mut covered = 0u64;
    loop {
        if (0..r).any(|a| (a + 1..r).any(|b| g.has_edge((a, pick[a]), (b, pick[b])))) {
            covered += 1;
        }
        let mut p = 0;
        loop {
            if p == r {
                return covered;
            }
            pick[p] += 1;
            if pick[p] < d {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
    }
}
