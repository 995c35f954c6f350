//! Seeded random instance generators for benchmarks and property corpora.
//! Everything is deterministic in the seed (ChaCha8, stable across platforms).

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::Multigraph;
use crate::rational::{qi, Q};
use crate::valuation::{
    AdditiveValuation, SubadditiveForm, SubadditiveValuation, Valuation, XosValuation,
};

fn random_graph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Multigraph {
    let endpoints: Vec<(usize, usize)> = (0..m)
        .map(|_| {
            let u = rng.random_range(1..=n);
            let v = rng.random_range(1..=n);
            (u.min(v), u.max(v))
        })
        .collect();
    Multigraph::new(n, &endpoints).expect("random endpoints are in range")
}

/// Resamples until no agent has more than `max_incident` relevant edges.
fn random_graph_capped(
    n: usize,
    m: usize,
    max_incident: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Multigraph> {
    for _ in 0..10_000 {
        let g = random_graph(n, m, rng);
        let ok = (1..=n).all(|a| g.incident_edges(a).is_ok_and(|s| s.len() <= max_incident));
        if ok {
            return Ok(g);
        }
    }
    Err(Error::Invalid(format!(
        "could not sample an (n={n}, m={m}) graph with incidence <= {max_incident}"
    )))
}

/// Random additive instance: integer weights `0..=max_weight` on each agent's
/// incident edges.
pub fn random_additive(n: usize, m: usize, max_weight: u32, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph(n, m, &mut rng);
    let mut valuations = Vec::with_capacity(n);
    for agent in 1..=n {
        let weights: BTreeMap<_, _> = graph
            .incident_edges(agent)?
            .into_iter()
            .map(|e| (e, qi(rng.random_range(0..=max_weight) as i64)))
            .collect();
        valuations.push(Valuation::Additive(AdditiveValuation { owner: agent, weights }));
    }
    Instance::new(graph, valuations)
}

/// Random XOS instance with `clause_count` clauses per agent and integer
/// clause weights `0..=max_weight`; per-agent incidence capped at 10 so the
/// exact oracles stay cheap.
pub fn random_xos(
    n: usize,
    m: usize,
    clause_count: usize,
    max_weight: u32,
    seed: u64,
) -> Result<Instance> {
    if n == 0 || clause_count == 0 {
        return Err(Error::Invalid("n and clause_count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph_capped(n, m, 10, &mut rng)?;
    let mut valuations = Vec::with_capacity(n);
    for agent in 1..=n {
        let incident: Vec<_> = graph.incident_edges(agent)?.into_iter().collect();
        let clauses = (0..clause_count)
            .map(|_| {
                incident
                    .iter()
                    .map(|&e| (e, qi(rng.random_range(0..=max_weight) as i64)))
                    .collect::<BTreeMap<_, _>>()
            })
            .collect();
        valuations.push(Valuation::Xos(XosValuation { owner: agent, clauses }));
    }
    Instance::new(graph, valuations)
}

/// Random subadditive instance: each agent's set function is a maximum of a
/// few budgeted additive functions `min(cap, Σ w)`, which is monotone,
/// normalized, and subadditive by construction; it is materialized as an
/// explicit table over the agent's incident edges (capped at 10).
pub fn random_subadditive(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph_capped(n, m, 10, &mut rng)?;
    let mut valuations = Vec::with_capacity(n);
    for agent in 1..=n {
        let incident: Vec<_> = graph.incident_edges(agent)?.into_iter().collect();
        let k = rng.random_range(2..=3usize);
        let budgets: Vec<(i64, Vec<i64>)> = (0..k)
            .map(|_| {
                let cap = rng.random_range(1..=10i64);
                let w = (0..incident.len()).map(|_| rng.random_range(0..=5i64)).collect();
                (cap, w)
            })
            .collect();
        let mut table = BTreeMap::new();
        for mask in 0u32..1 << incident.len() {
            let subset: BTreeSet<_> = incident
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let value = budgets
                .iter()
                .map(|(cap, w)| {
                    let sum: i64 = incident
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(i, _)| w[i])
                        .sum();
                    sum.min(*cap)
                })
                .max()
                .unwrap_or(0);
            table.insert(subset, qi(value));
        }
        valuations.push(Valuation::Subadditive(SubadditiveValuation {
            owner: agent,
            form: SubadditiveForm::Table(table),
        }));
    }
    Instance::new(graph, valuations)
}

/// Total value an agent assigns to the whole edge set; handy for sanity
/// checks on generated corpora.
pub fn total_value(inst: &Instance, agent: usize) -> Result<Q> {
    let all: BTreeSet<_> = (0..inst.m()).collect();
    inst.value(agent, &all)
}
