//! Valuation oracles: additive weight maps, XOS clause lists, and subadditive
//! set functions (explicit table or bundle-containment rule). Every valuation
//! is graphical: evaluation only ever depends on `S ∩ E_owner`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Agent, DPartition, EdgeId, Multigraph};
use crate::rational::{is_nonnegative, qi, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveValuation {
    pub owner: Agent,
    pub weights: BTreeMap<EdgeId, Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XosValuation {
    pub owner: Agent,
    /// Nonempty list of additive clauses; the value of a set is the maximum
    /// clause sum.
    pub clauses: Vec<BTreeMap<EdgeId, Q>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubadditiveForm {
    /// Explicit value for every subset of the owner's incident edges.
    Table(BTreeMap<BTreeSet<EdgeId>, Q>),
    /// `v(∅) = 0`; `v(S) = inside` if `S` contains some bundle, else `outside`.
    BundleContainment {
        bundles: Vec<BTreeSet<EdgeId>>,
        inside: Q,
        outside: Q,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubadditiveValuation {
    pub owner: Agent,
    pub form: SubadditiveForm,
}

/// An agent's valuation oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Additive(AdditiveValuation),
    Xos(XosValuation),
    Subadditive(SubadditiveValuation),
}

impl Valuation {
    pub fn owner(&self) -> Agent {
        match self {
            Valuation::Additive(v) => v.owner,
            Valuation::Xos(v) => v.owner,
            Valuation::Subadditive(v) => v.owner,
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            Valuation::Additive(_) => "additive",
            Valuation::Xos(_) => "xos",
            Valuation::Subadditive(_) => "subadditive",
        }
    }

    pub fn as_additive(&self) -> Option<&AdditiveValuation> {
        match self {
            Valuation::Additive(v) => Some(v),
            _ => None,
        }
    }

    /// Evaluates the valuation on `s`. Only `s ∩ E_owner` matters.
    pub fn value(&self, g: &Multigraph, s: &BTreeSet<EdgeId>) -> Result<Q> {
        match self {
            Valuation::Additive(v) => Ok(additive_sum(&v.weights, s)),
            Valuation::Xos(v) => Ok(xos_max(&v.clauses, s)),
            Valuation::Subadditive(v) => {
                let incident = g.incident_edges(v.owner)?;
                let restricted: BTreeSet<EdgeId> = s.intersection(&incident).copied().collect();
                match &v.form {
                    SubadditiveForm::Table(table) => {
                        table.get(&restricted).cloned().ok_or_else(|| Error::MissingTableEntry {
                            agent: v.owner,
                            subset: restricted.iter().copied().collect(),
                        })
                    }
                    SubadditiveForm::BundleContainment { bundles, inside, outside } => {
                        if restricted.is_empty() {
                            Ok(Q::zero())
                        } else if bundles.iter().any(|b| b.is_subset(&restricted)) {
                            Ok(inside.clone())
                        } else {
                            Ok(outside.clone())
                        }
                    }
                }
            }
        }
    }

    /// Value of the single edge `e`.
    pub fn singleton(&self, g: &Multigraph, e: EdgeId) -> Result<Q> {
        self.value(g, &BTreeSet::from([e]))
    }
}

pub(crate) fn additive_sum(weights: &BTreeMap<EdgeId, Q>, s: &BTreeSet<EdgeId>) -> Q {
    let mut total = Q::zero();
    // iterate over the smaller side
    if weights.len() <= s.len() {
        for (e, w) in weights {
            if s.contains(e) {
                total += w;
            }
        }
    } else {
        for e in s {
            if let Some(w) = weights.get(e) {
                total += w;
            }
        }
    }
    total
}

pub(crate) fn xos_max(clauses: &[BTreeMap<EdgeId, Q>], s: &BTreeSet<EdgeId>) -> Q {
    clauses
        .iter()
        .map(|c| additive_sum(c, s))
        .max()
        .unwrap_or_else(Q::zero)
}

/// Outcome of `validate_valuation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// The valuation structurally parses but exhaustive checking was skipped;
    /// carries the reason. Never a silent pass.
    Unchecked(String),
}

/// Enumeration caps for exhaustive validity checking.
#[derive(Debug, Clone, Copy)]
pub struct ValidationLimits {
    /// Largest `|E_owner|` for which table monotonicity/subadditivity is
    /// checked exhaustively.
    pub max_ground: usize,
}

impl Default for ValidationLimits {
    fn default() -> Self {
        ValidationLimits { max_ground: 14 }
    }
}

/// Checks graphical relevance, nonnegativity, normalization (`v(∅)=0`),
/// monotonicity, and subadditivity where the form requires it. Returns the
/// first violation as an error, or `Unchecked` when the exhaustive part would
/// exceed the cap.
pub fn validate_valuation(
    v: &Valuation,
    g: &Multigraph,
    limits: ValidationLimits,
) -> Result<Validity> {
    g.check_agent(v.owner())?;
    let incident = g.incident_edges(v.owner())?;
    let check_keys = |keys: &mut dyn Iterator<Item = &EdgeId>| -> Result<()> {
        for &e in keys {
            if !incident.contains(&e) {
                return Err(Error::RelevanceViolation { agent: v.owner(), edge: e });
            }
        }
        Ok(())
    };
    match v {
        Valuation::Additive(a) => {
            check_keys(&mut a.weights.keys())?;
            for (e, w) in &a.weights {
                if !is_nonnegative(w) {
                    return Err(Error::Invalid(format!(
                        "agent {} has negative weight on edge {e}",
                        a.owner
                    )));
                }
            }
            Ok(Validity::Valid)
        }
        Valuation::Xos(x) => {
            if x.clauses.is_empty() {
                return Err(Error::Invalid(format!(
                    "agent {} has an XOS valuation with no clauses",
                    x.owner
                )));
            }
            for clause in &x.clauses {
                check_keys(&mut clause.keys())?;
                for (e, w) in clause {
                    if !is_nonnegative(w) {
                        return Err(Error::Invalid(format!(
                            "agent {} has negative clause weight on edge {e}",
                            x.owner
                        )));
                    }
                }
            }
            Ok(Validity::Valid)
        }
        Valuation::Subadditive(s) => validate_subadditive(s, g, &incident, limits),
    }
}

fn validate_subadditive(
    v: &SubadditiveValuation,
    g: &Multigraph,
    incident: &BTreeSet<EdgeId>,
    limits: ValidationLimits,
) -> Result<Validity> {
    match &v.form {
        SubadditiveForm::BundleContainment { bundles, inside, outside } => {
            for b in bundles {
                for &e in b {
                    if !incident.contains(&e) {
                        return Err(Error::RelevanceViolation { agent: v.owner, edge: e });
                    }
                }
                if b.is_empty() {
                    return Err(Error::Invalid(format!(
                        "agent {} has an empty containment bundle",
                        v.owner
                    )));
                }
            }
            if !is_nonnegative(outside) || inside < outside {
                return Err(Error::Invalid(format!(
                    "agent {}: bundle-containment rule needs 0 <= outside <= inside",
                    v.owner
                )));
            }
            let splittable = bundles.iter().any(|b| b.len() >= 2);
            if !splittable || *inside <= outside.clone() + outside.clone() {
                // Structurally monotone and subadditive.
                return Ok(Validity::Valid);
            }
            if incident.len() <= limits.max_ground {
                return exhaustive_subadditive_check(v, g, incident);
            }
            Ok(Validity::Unchecked(format!(
                "inside > 2*outside and |E_owner| = {} exceeds cap {}",
                incident.len(),
                limits.max_ground
            )))
        }
        SubadditiveForm::Table(table) => {
            for key in table.keys() {
                for &e in key {
                    if !incident.contains(&e) {
                        return Err(Error::RelevanceViolation { agent: v.owner, edge: e });
                    }
                }
            }
            if incident.len() > limits.max_ground {
                return Ok(Validity::Unchecked(format!(
                    "|E_owner| = {} exceeds table check cap {}",
                    incident.len(),
                    limits.max_ground
                )));
            }
            exhaustive_subadditive_check(v, g, incident)
        }
    }
}

/// Checks v(∅)=0, monotonicity by single-element extensions, and
/// subadditivity over all disjoint pairs, by full enumeration.
fn exhaustive_subadditive_check(
    v: &SubadditiveValuation,
    g: &Multigraph,
    incident: &BTreeSet<EdgeId>,
) -> Result<Validity> {
    let items: Vec<EdgeId> = incident.iter().copied().collect();
    let n = items.len();
    let set_of = |mask: u32| -> BTreeSet<EdgeId> {
        (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| items[i]).collect()
    };
    let val = Valuation::Subadditive(v.clone());
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u32..1 << n {
        values.push(val.value(g, &set_of(mask))?);
    }
    if !values[0].is_zero() {
        return Err(Error::Invalid(format!(
            "agent {}: v(∅) = {} is not 0",
            v.owner, values[0]
        )));
    }
    for mask in 0u32..1 << n {
        if !is_nonnegative(&values[mask as usize]) {
            return Err(Error::Invalid(format!(
                "agent {}: negative value on {:?}",
                v.owner,
                set_of(mask)
            )));
        }
        for i in 0..n {
            if mask >> i & 1 == 0 {
                let bigger = mask | 1 << i;
                if values[mask as usize] > values[bigger as usize] {
                    return Err(Error::Invalid(format!(
                        "agent {}: monotonicity violated, v({:?}) > v({:?})",
                        v.owner,
                        set_of(mask),
                        set_of(bigger)
                    )));
                }
            }
        }
    }
    // Disjoint pairs suffice: overlapping pairs follow from monotonicity.
    let full = (1u32 << n) - 1;
    let mut s = 0u32;
    loop {
        let rest = full & !s;
        let mut t = rest;
        loop {
            let union = s | t;
            let lhs = values[s as usize].clone() + values[t as usize].clone();
            if lhs < values[union as usize] {
                return Err(Error::Invalid(format!(
                    "agent {}: subadditivity violated on S={:?}, T={:?}",
                    v.owner,
                    set_of(s),
                    set_of(t)
                )));
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & rest;
        }
        if s == full {
            break;
        }
        s += 1;
    }
    Ok(Validity::Valid)
}

/// An XOS valuation rescaled so every canonical part is worth exactly 1, with
/// the cap at 1 applied lazily at evaluation time. Capping a maximum of
/// additive clauses stays inside the XOS class, so the capped clause family is
/// never materialized.
#[derive(Debug, Clone)]
pub struct CappedXos {
    pub owner: Agent,
    /// The original clauses divided by the partition's minimum part value.
    pub scaled_clauses: Vec<BTreeMap<EdgeId, Q>>,
}

impl CappedXos {
    pub fn value(&self, s: &BTreeSet<EdgeId>) -> Q {
        let raw = xos_max(&self.scaled_clauses, s);
        if raw > qi(1) {
            qi(1)
        } else {
            raw
        }
    }
}

/// Rescales `v` by the minimum part value of `partition` and caps at 1, so
/// every part of `partition` is worth exactly 1 to the owner.
pub fn normalize_capped(v: &XosValuation, partition: &DPartition) -> Result<CappedXos> {
    if v.owner != partition.owner {
        return Err(Error::Invalid(format!(
            "partition owner {} does not match valuation owner {}",
            partition.owner, v.owner
        )));
    }
    let mu = partition
        .parts
        .iter()
        .map(|p| xos_max(&v.clauses, p))
        .min()
        .unwrap_or_else(Q::zero);
    if mu.is_zero() {
        return Err(Error::DegenerateMms { agent: v.owner, d: partition.d() });
    }
    let scaled_clauses = v
        .clauses
        .iter()
        .map(|c| c.iter().map(|(e, w)| (*e, w / &mu)).collect())
        .collect();
    Ok(CappedXos { owner: v.owner, scaled_clauses })
}

/// Result of reducing XOS agents to additive weights over their canonical
/// bundles. For every active agent each canonical part is worth exactly 1
/// under the reduced weights, and for any frugal set `X ⊆ B_{i,t}`,
/// `reduced(X) <= v_i(X) / mu_i`.
#[derive(Debug, Clone)]
pub struct FrugalReduction {
    pub d: usize,
    pub canon: Vec<DPartition>,
    /// Reduced additive weights per agent (empty map for inactive agents).
    pub weights: Vec<BTreeMap<EdgeId, Q>>,
    /// Original 1-out-of-d maximin value of each agent over `canon`.
    pub mu: Vec<Q>,
    /// Agents with positive maximin value; only they carry guarantees.
    pub active: Vec<bool>,
    /// For each agent and part, the clause index that realizes the part's
    /// value (`None` for inactive agents).
    pub clause_choice: Vec<Vec<Option<usize>>>,
}

impl FrugalReduction {
    /// Reduced additive value of a set for an agent.
    pub fn weight_of(&self, agent: Agent, s: &BTreeSet<EdgeId>) -> Q {
        additive_sum(&self.weights[agent - 1], s)
    }

    pub fn part(&self, agent: Agent, t: usize) -> &BTreeSet<EdgeId> {
        &self.canon[agent - 1].parts[t]
    }

    pub fn is_active(&self, agent: Agent) -> bool {
        self.active[agent - 1]
    }

    pub fn active_agents(&self) -> Vec<Agent> {
        (1..=self.active.len()).filter(|&a| self.is_active(a)).collect()
    }

    /// The reduced instance as an additive `Instance` (useful for feeding the
    /// oracles; inactive agents keep empty weight maps).
    pub fn to_additive_instance(&self, graph: &Multigraph) -> Instance {
        let valuations = self
            .weights
            .iter()
            .enumerate()
            .map(|(idx, w)| {
                Valuation::Additive(AdditiveValuation { owner: idx + 1, weights: w.clone() })
            })
            .collect();
        Instance { graph: graph.clone(), valuations, meta: None }
    }
}

/// Reduces an instance of XOS (or additive) agents to additive weights over
/// the supplied canonical 1-out-of-d partitions. For each agent and part, the
/// lowest-index clause attaining the part's value is selected and its weights
/// on that part are divided by the part value; agents whose minimum part value
/// is 0 are marked inactive and get empty weights.
pub fn frugal_reduce(inst: &Instance, d: usize, canon: &[DPartition]) -> Result<FrugalReduction> {
    let n = inst.graph.agent_count();
    if canon.len() != n {
        return Err(Error::Invalid(format!(
            "expected {n} canonical partitions, got {}",
            canon.len()
        )));
    }
    let mut weights = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut active = Vec::with_capacity(n);
    let mut clause_choice = Vec::with_capacity(n);
    for agent in 1..=n {
        let part_list = &canon[agent - 1];
        if part_list.owner != agent || part_list.d() != d {
            return Err(Error::Invalid(format!(
                "canonical partition {agent} has wrong owner or part count"
            )));
        }
        let clauses: Vec<BTreeMap<EdgeId, Q>> = match &inst.valuations[agent - 1] {
            Valuation::Additive(a) => vec![a.weights.clone()],
            Valuation::Xos(x) => x.clauses.clone(),
            Valuation::Subadditive(_) => {
                return Err(Error::AlgorithmMismatch {
                    agent,
                    required: "additive or XOS",
                    found: "subadditive",
                })
            }
        };
        let part_values: Vec<Q> = part_list
            .parts
            .iter()
            .map(|p| xos_max(&clauses, p))
            .collect();
        let agent_mu = part_values.iter().min().cloned().unwrap_or_else(Q::zero);
        if agent_mu.is_zero() {
            weights.push(BTreeMap::new());
            mu.push(agent_mu);
            active.push(false);
            clause_choice.push(vec![None; d]);
            continue;
        }
        let mut w = BTreeMap::new();
        let mut choices = Vec::with_capacity(d);
        for (t, part) in part_list.parts.iter().enumerate() {
            // lowest clause index attaining the part's value
            let best = clauses
                .iter()
                .position(|c| additive_sum(c, part) == part_values[t])
                .expect("some clause attains the maximum");
            choices.push(Some(best));
            for &e in part {
                let we = clauses[best].get(&e).cloned().unwrap_or_else(Q::zero);
                w.insert(e, we / &part_values[t]);
            }
        }
        weights.push(w);
        mu.push(agent_mu);
        active.push(true);
        clause_choice.push(choices);
    }
    Ok(FrugalReduction { d, canon: canon.to_vec(), weights, mu, active, clause_choice })
}

/// The reverse construction: masks each additive agent's weights to her
/// canonical parts, one clause per part. Transfers frugal upper bounds from
/// additive to XOS instances.
pub fn xos_from_additive_bundles(inst: &Instance, canon: &[DPartition]) -> Result<Instance> {
    let n = inst.graph.agent_count();
    let mut valuations = Vec::with_capacity(n);
    for agent in 1..=n {
        let add = inst.valuations[agent - 1].as_additive().ok_or(Error::AlgorithmMismatch {
            agent,
            required: "additive",
            found: inst.valuations[agent - 1].class_name(),
        })?;
        let parts = &canon[agent - 1].parts;
        let clauses: Vec<BTreeMap<EdgeId, Q>> = parts
            .iter()
            .map(|part| {
                add.weights
                    .iter()
                    .filter(|(e, _)| part.contains(e))
                    .map(|(e, w)| (*e, w.clone()))
                    .collect()
            })
            .collect();
        valuations.push(Valuation::Xos(XosValuation { owner: agent, clauses }));
    }
    Ok(Instance { graph: inst.graph.clone(), valuations, meta: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn line_graph(m: usize) -> Multigraph {
        // m parallel edges between agents 1 and 2
        Multigraph::new(2, &vec![(1, 2); m]).unwrap()
    }

    #[test]
    fn additive_evaluation_sums() {
        let g = line_graph(3);
        let v = Valuation::Additive(AdditiveValuation {
            owner: 1,
            weights: BTreeMap::from([(0, qi(3)), (1, qi(1)), (2, qi(1))]),
        });
        assert_eq!(v.value(&g, &BTreeSet::from([0, 1])).unwrap(), qi(4));
    }

    #[test]
    fn xos_evaluation_takes_max_clause() {
        let g = line_graph(2);
        let v = Valuation::Xos(XosValuation {
            owner: 1,
            clauses: vec![BTreeMap::from([(0, qi(1))]), BTreeMap::from([(1, qi(1))])],
        });
        assert_eq!(v.value(&g, &BTreeSet::from([0, 1])).unwrap(), qi(1));
    }

    #[test]
    fn rule_evaluation_matches_containment() {
        let g = line_graph(3);
        let v = Valuation::Subadditive(SubadditiveValuation {
            owner: 1,
            form: SubadditiveForm::BundleContainment {
                bundles: vec![BTreeSet::from([0, 1])],
                inside: qi(1),
                outside: qf(1, 2),
            },
        });
        assert_eq!(v.value(&g, &BTreeSet::from([0])).unwrap(), qf(1, 2));
        assert_eq!(v.value(&g, &BTreeSet::from([0, 1, 2])).unwrap(), qi(1));
        assert_eq!(v.value(&g, &BTreeSet::new()).unwrap(), Q::zero());
    }

    #[test]
    fn additive_is_always_valid() {
        let g = line_graph(2);
        let v = Valuation::Additive(AdditiveValuation {
            owner: 2,
            weights: BTreeMap::from([(0, qi(5)), (1, Q::zero())]),
        });
        assert_eq!(validate_valuation(&v, &g, Default::default()).unwrap(), Validity::Valid);
    }

    #[test]
    fn table_subadditivity_violation_is_reported() {
        let g = line_graph(2);
        let mut table = BTreeMap::new();
        table.insert(BTreeSet::new(), qi(0));
        table.insert(BTreeSet::from([0]), qi(2));
        table.insert(BTreeSet::from([1]), qi(2));
        table.insert(BTreeSet::from([0, 1]), qi(5));
        let v = Valuation::Subadditive(SubadditiveValuation {
            owner: 1,
            form: SubadditiveForm::Table(table),
        });
        let err = validate_valuation(&v, &g, Default::default()).unwrap_err();
        assert!(err.to_string().contains("subadditivity"), "{err}");
    }

    #[test]
    fn relevance_violation_is_caught() {
        let g = Multigraph::new(3, &[(1, 2)]).unwrap();
        let v = Valuation::Additive(AdditiveValuation {
            owner: 3,
            weights: BTreeMap::from([(0, qi(1))]),
        });
        assert!(matches!(
            validate_valuation(&v, &g, Default::default()),
            Err(Error::RelevanceViolation { agent: 3, edge: 0 })
        ));
    }

    #[test]
    fn normalize_caps_at_one() {
        let _g = line_graph(2);
        let v = XosValuation {
            owner: 1,
            clauses: vec![BTreeMap::from([(0, qi(2)), (1, qi(2))])],
        };
        let partition = DPartition {
            owner: 1,
            parts: vec![BTreeSet::from([0]), BTreeSet::from([1])],
        };
        let capped = normalize_capped(&v, &partition).unwrap();
        assert_eq!(capped.value(&BTreeSet::from([0])), qi(1));
        assert_eq!(capped.value(&BTreeSet::from([0, 1])), qi(1));
    }

    #[test]
    fn normalize_rejects_zero_mu() {
        let g = line_graph(1);
        let _ = g;
        let v = XosValuation { owner: 1, clauses: vec![BTreeMap::from([(0, qi(1))])] };
        let partition = DPartition {
            owner: 1,
            parts: vec![BTreeSet::from([0]), BTreeSet::new()],
        };
        assert!(matches!(
            normalize_capped(&v, &partition),
            Err(Error::DegenerateMms { agent: 1, d: 2 })
        ));
    }

    #[test]
    fn reduce_single_clause_identity_when_normalized() {
        // two unit-value parts: the reduction keeps the weights verbatim
        let g = line_graph(2);
        let inst = crate::Instance::new(
            g,
            vec![
                Valuation::Xos(XosValuation {
                    owner: 1,
                    clauses: vec![BTreeMap::from([(0, qi(1)), (1, qi(1))])],
                }),
                Valuation::Xos(XosValuation {
                    owner: 2,
                    clauses: vec![BTreeMap::from([(0, qi(1)), (1, qi(1))])],
                }),
            ],
        )
        .unwrap();
        let canon: Vec<DPartition> = (1..=2)
            .map(|a| DPartition {
                owner: a,
                parts: vec![BTreeSet::from([0]), BTreeSet::from([1])],
            })
            .collect();
        let red = frugal_reduce(&inst, 2, &canon).unwrap();
        assert_eq!(red.weights[0], BTreeMap::from([(0, qi(1)), (1, qi(1))]));
        assert_eq!(red.mu[0], qi(1));
    }

    #[test]
    fn reduce_two_clause_instance() {
        // clauses {0:1} and {1:1}; parts ({0},{1}): each part picks its own
        // clause and the reduced maximin value is exactly 1
        let g = line_graph(2);
        let inst = crate::Instance::new(
            g,
            vec![
                Valuation::Xos(XosValuation {
                    owner: 1,
                    clauses: vec![BTreeMap::from([(0, qi(1))]), BTreeMap::from([(1, qi(1))])],
                }),
                Valuation::Xos(XosValuation {
                    owner: 2,
                    clauses: vec![BTreeMap::from([(0, qi(1)), (1, qi(1))])],
                }),
            ],
        )
        .unwrap();
        let canon: Vec<DPartition> = (1..=2)
            .map(|a| DPartition {
                owner: a,
                parts: vec![BTreeSet::from([0]), BTreeSet::from([1])],
            })
            .collect();
        let red = frugal_reduce(&inst, 2, &canon).unwrap();
        assert_eq!(red.weights[0], BTreeMap::from([(0, qi(1)), (1, qi(1))]));
        assert_eq!(red.clause_choice[0], vec![Some(0), Some(1)]);
        // brute force over all 2-partitions of the reduced additive instance
        let reduced_inst = red.to_additive_instance(&inst.graph);
        let mu = crate::oracle::compute_mms(&reduced_inst, 1, 2, &Default::default())
            .unwrap()
            .mu;
        assert_eq!(mu, qi(1));
    }

    #[test]
    fn reduced_weight_never_exceeds_scaled_value_on_frugal_sets() {
        for seed in 0..20u64 {
            let inst = crate::corpus::random_xos(2, 6, 3, 6, seed).unwrap();
            let red = crate::xos::reduce_at(&inst, 2, &Default::default()).unwrap();
            for agent in 1..=2 {
                if !red.is_active(agent) {
                    continue;
                }
                for t in 0..2 {
                    let part: Vec<usize> = red.part(agent, t).iter().copied().collect();
                    // every frugal subset of the part
                    for mask in 0u32..1 << part.len() {
                        let subset: BTreeSet<usize> = part
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, &e)| e)
                            .collect();
                        let reduced = red.weight_of(agent, &subset);
                        let raw = inst.value(agent, &subset).unwrap();
                        assert!(
                            reduced * red.mu[agent - 1].clone() <= raw,
                            "seed {seed} agent {agent} part {t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reduction_gives_unit_maximin_to_active_agents() {
        for seed in 0..10u64 {
            let inst = crate::corpus::random_xos(3, 8, 2, 6, seed).unwrap();
            let red = crate::xos::reduce_at(&inst, 3, &Default::default()).unwrap();
            let reduced_inst = red.to_additive_instance(&inst.graph);
            for agent in 1..=3 {
                if red.is_active(agent) {
                    let mu = crate::oracle::compute_mms(&reduced_inst, agent, 3, &Default::default())
                        .unwrap()
                        .mu;
                    assert_eq!(mu, qi(1), "seed {seed} agent {agent}");
                }
            }
        }
    }

    #[test]
    fn masked_clauses_lose_cross_part_value() {
        let g = line_graph(2);
        let inst = crate::Instance::new(
            g,
            vec![
                Valuation::Additive(AdditiveValuation {
                    owner: 1,
                    weights: BTreeMap::from([(0, qi(1)), (1, qi(1))]),
                }),
                Valuation::Additive(AdditiveValuation {
                    owner: 2,
                    weights: BTreeMap::from([(0, qi(1)), (1, qi(1))]),
                }),
            ],
        )
        .unwrap();
        let canon: Vec<DPartition> = (1..=2)
            .map(|a| DPartition {
                owner: a,
                parts: vec![BTreeSet::from([0]), BTreeSet::from([1])],
            })
            .collect();
        let lifted = xos_from_additive_bundles(&inst, &canon).unwrap();
        assert_eq!(lifted.value(1, &BTreeSet::from([0, 1])).unwrap(), qi(1));
        assert_eq!(lifted.value(1, &BTreeSet::from([0])).unwrap(), qi(1));
        // a single-part canonical partition keeps the full additive value
        let whole: Vec<DPartition> = (1..=2)
            .map(|a| DPartition { owner: a, parts: vec![BTreeSet::from([0, 1])] })
            .collect();
        let lifted_whole = xos_from_additive_bundles(&inst, &whole).unwrap();
        assert_eq!(lifted_whole.value(1, &BTreeSet::from([0, 1])).unwrap(), qi(2));
    }

    #[test]
    fn normalize_is_fixed_point_on_normalized_input() {
        let _g = line_graph(2);
        let v = XosValuation {
            owner: 1,
            clauses: vec![BTreeMap::from([(0, qi(1))]), BTreeMap::from([(1, qi(1))])],
        };
        let partition = DPartition {
            owner: 1,
            parts: vec![BTreeSet::from([0]), BTreeSet::from([1])],
        };
        let capped = normalize_capped(&v, &partition).unwrap();
        for s in [BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([1]), BTreeSet::from([0, 1])] {
            assert_eq!(capped.value(&s), xos_max(&v.clauses, &s).min(qi(1)));
        }
    }

    #[test]
    fn capped_value_is_min_of_one_and_scaled_value() {
        for seed in 0..10u64 {
            let inst = crate::corpus::random_xos(2, 5, 3, 6, seed).unwrap();
            let Valuation::Xos(v) = &inst.valuations[0] else { panic!() };
            let res = crate::oracle::compute_mms(&inst, 1, 2, &Default::default()).unwrap();
            if num_traits::Zero::is_zero(&res.mu) {
                continue;
            }
            let capped = normalize_capped(v, &res.canonical).unwrap();
            let incident: Vec<usize> =
                inst.graph.incident_edges(1).unwrap().into_iter().collect();
            for mask in 0u32..1 << incident.len() {
                let s: BTreeSet<usize> = incident
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let expect = (inst.value(1, &s).unwrap() / res.mu.clone()).min(qi(1));
                assert_eq!(capped.value(&s), expect, "seed {seed}");
            }
            for part in &res.canonical.parts {
                assert_eq!(capped.value(part), qi(1));
            }
        }
    }

    #[test]
    fn class_lifting_preserves_values_pointwise() {
        // additive -> one-clause XOS -> explicit table agree everywhere
        for seed in 0..5u64 {
            let inst = crate::corpus::random_additive(2, 6, 5, seed).unwrap();
            let Valuation::Additive(a) = &inst.valuations[0] else { panic!() };
            let xos = Valuation::Xos(XosValuation {
                owner: 1,
                clauses: vec![a.weights.clone()],
            });
            let incident: Vec<usize> =
                inst.graph.incident_edges(1).unwrap().into_iter().collect();
            let mut table = BTreeMap::new();
            for mask in 0u32..1 << incident.len() {
                let s: BTreeSet<usize> = incident
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                table.insert(s.clone(), additive_sum(&a.weights, &s));
            }
            let sub = Valuation::Subadditive(SubadditiveValuation {
                owner: 1,
                form: SubadditiveForm::Table(table),
            });
            for mask in 0u32..1 << incident.len() {
                let s: BTreeSet<usize> = incident
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let base = inst.value(1, &s).unwrap();
                assert_eq!(xos.value(&inst.graph, &s).unwrap(), base);
                assert_eq!(sub.value(&inst.graph, &s).unwrap(), base);
            }
        }
    }
}
