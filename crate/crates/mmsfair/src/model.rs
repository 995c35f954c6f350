//! The multigraph item model: agents are vertices, items are edges (parallel
//! edges and self-loops allowed). Agents are 1-indexed, edge ids are dense and
//! 0-indexed. All types are immutable after construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 0-based dense edge identifier.
pub type EdgeId = usize;
/// 1-based agent identifier.
pub type Agent = usize;

/// One item. Endpoints satisfy `1 <= u <= v <= n`; `u == v` is a self-loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub u: Agent,
    pub v: Agent,
}

impl Edge {
    /// Whether the edge is incident to `agent`.
    pub fn touches(&self, agent: Agent) -> bool {
        self.u == agent || self.v == agent
    }

    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint that is not `agent` (itself for self-loops).
    pub fn other_endpoint(&self, agent: Agent) -> Agent {
        if self.u == agent {
            self.v
        } else {
            self.u
        }
    }
}

/// A multigraph of `n` agents and `m` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Multigraph {
    /// Builds a multigraph from endpoint pairs; edge `k` gets id `k`.
    pub fn new(n: usize, endpoints: &[(Agent, Agent)]) -> Result<Self> {
        let edges = endpoints
            .iter()
            .enumerate()
            .map(|(id, &(u, v))| Edge { id, u: u.min(v), v: u.max(v) })
            .collect();
        let g = Multigraph { n, edges };
        g.validate()?;
        Ok(g)
    }

    /// Builds from explicit edges; ids must already be dense `0..m`.
    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let g = Multigraph { n, edges };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("agent count must be positive".into()));
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.id != k {
                return Err(Error::Invalid(format!(
                    "edge ids must be dense 0..{}; found id {} at position {k}",
                    self.edges.len(),
                    e.id
                )));
            }
            if e.u < 1 || e.v > self.n || e.u > e.v {
                return Err(Error::Invalid(format!(
                    "edge {} endpoints ({}, {}) out of range for n={} (need 1 <= u <= v <= n)",
                    e.id, e.u, e.v, self.n
                )));
            }
        }
        Ok(())
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> {
        1..=self.n
    }

    pub fn check_agent(&self, agent: Agent) -> Result<()> {
        if agent < 1 || agent > self.n {
            return Err(Error::AgentOutOfRange(agent, self.n));
        }
        Ok(())
    }

    /// All edges incident to `agent` (self-loops included once).
    pub fn incident_edges(&self, agent: Agent) -> Result<BTreeSet<EdgeId>> {
        self.check_agent(agent)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| e.touches(agent))
            .map(|e| e.id)
            .collect())
    }

    /// Edges whose endpoint set is exactly `{i, j}` (unordered, `i != j`),
    /// or the self-loops at `i` when `i == j`.
    pub fn edges_between(&self, i: Agent, j: Agent) -> Result<BTreeSet<EdgeId>> {
        self.check_agent(i)?;
        self.check_agent(j)?;
        let (a, b) = (i.min(j), i.max(j));
        Ok(self
            .edges
            .iter()
            .filter(|e| e.u == a && e.v == b)
            .map(|e| e.id)
            .collect())
    }
}

/// An allocation: one bundle of edge ids per agent, pairwise disjoint.
/// The union may be a strict subset of the edges (partial allocation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<BTreeSet<EdgeId>>,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation { bundles: vec![BTreeSet::new(); n] }
    }

    /// Bundle of `agent` (1-based).
    pub fn bundle(&self, agent: Agent) -> &BTreeSet<EdgeId> {
        &self.bundles[agent - 1]
    }

    pub fn bundle_mut(&mut self, agent: Agent) -> &mut BTreeSet<EdgeId> {
        &mut self.bundles[agent - 1]
    }

    pub fn allocated_edges(&self) -> BTreeSet<EdgeId> {
        self.bundles.iter().flatten().copied().collect()
    }

    /// Checks disjointness, bundle count, and that every id exists in `g`.
    pub fn validate(&self, g: &Multigraph) -> Result<()> {
        if self.bundles.len() != g.agent_count() {
            return Err(Error::Invalid(format!(
                "allocation has {} bundles for {} agents",
                self.bundles.len(),
                g.agent_count()
            )));
        }
        let mut seen = vec![false; g.edge_count()];
        for (idx, bundle) in self.bundles.iter().enumerate() {
            for &e in bundle {
                if e >= g.edge_count() {
                    return Err(Error::Invalid(format!(
                        "allocation references unknown edge id {e}"
                    )));
                }
                if seen[e] {
                    return Err(Error::Invalid(format!(
                        "edge {e} allocated twice (second time to agent {})",
                        idx + 1
                    )));
                }
                seen[e] = true;
            }
        }
        Ok(())
    }

    /// Every edge of the graph is allocated.
    pub fn is_partition(&self, g: &Multigraph) -> bool {
        self.allocated_edges().len() == g.edge_count()
    }

    /// Every allocated edge sits at one of its endpoints.
    pub fn is_orientation(&self, g: &Multigraph) -> bool {
        self.bundles.iter().enumerate().all(|(idx, bundle)| {
            bundle
                .iter()
                .all(|&e| g.edge(e).is_some_and(|edge| edge.touches(idx + 1)))
        })
    }
}

/// A partition of one agent's relevant edges `E_i` into `d` parts
/// (empty parts allowed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DPartition {
    pub owner: Agent,
    pub parts: Vec<BTreeSet<EdgeId>>,
}

impl DPartition {
    pub fn d(&self) -> usize {
        self.parts.len()
    }

    /// Parts must be disjoint and union exactly to the owner's incident set.
    pub fn validate(&self, g: &Multigraph) -> Result<()> {
        let incident = g.incident_edges(self.owner)?;
        let mut seen = BTreeSet::new();
        for part in &self.parts {
            for &e in part {
                if !seen.insert(e) {
                    return Err(Error::Invalid(format!(
                        "edge {e} appears in two parts of agent {}'s partition",
                        self.owner
                    )));
                }
            }
        }
        if seen != incident {
            return Err(Error::Invalid(format!(
                "agent {}'s partition does not cover exactly her incident edges",
                self.owner
            )));
        }
        Ok(())
    }

    /// Index of the part containing `e`, if any.
    pub fn part_of(&self, e: EdgeId) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(&e))
    }
}
