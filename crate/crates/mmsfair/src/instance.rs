//! Instances and their JSON wire format.
//!
//! ```json
//! {
//!   "n": 3,
//!   "edges": [{"id": 0, "u": 1, "v": 2}, ...],
//!   "valuations": [
//!     {"type": "additive", "weights": {"0": 3, "1": "1/2"}},
//!     {"type": "xos", "clauses": [{"0": 1}, {"1": 1}]},
//!     {"type": "subadditive", "table": {"": 0, "0": "1/2", "0,1": 1}},
//!     {"type": "subadditive", "rule": "bundle-containment",
//!      "bundles": [[0, 1]], "inside": 1, "outside": "1/2"}
//!   ]
//! }
//! ```
//!
//! `valuations[i]` belongs to agent `i+1`. Rationals are integers or "p/q"
//! strings; serialization always emits the canonical form (integer numbers
//! where possible). An optional `meta` object is carried through untouched.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{Allocation, Edge, EdgeId, Multigraph};
use crate::rational::{is_nonnegative, rational_from_json, rational_to_json, Q};
use crate::valuation::{
    AdditiveValuation, SubadditiveForm, SubadditiveValuation, Valuation, XosValuation,
};

/// A multigraph together with one valuation per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: Multigraph,
    pub valuations: Vec<Valuation>,
    pub meta: Option<Value>,
}

impl Instance {
    pub fn new(graph: Multigraph, valuations: Vec<Valuation>) -> Result<Self> {
        let inst = Instance { graph, valuations, meta: None };
        inst.validate()?;
        Ok(inst)
    }

    /// Structural validation: one valuation per agent, owners aligned,
    /// graphical relevance of every referenced edge, nonnegative weights.
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.agent_count();
        if self.valuations.len() != n {
            return Err(Error::Invalid(format!(
                "instance has {} valuations for {n} agents",
                self.valuations.len()
            )));
        }
        for (idx, v) in self.valuations.iter().enumerate() {
            if v.owner() != idx + 1 {
                return Err(Error::Invalid(format!(
                    "valuation at position {idx} has owner {} (expected {})",
                    v.owner(),
                    idx + 1
                )));
            }
            self.check_relevance(v)?;
        }
        Ok(())
    }

    fn check_relevance(&self, v: &Valuation) -> Result<()> {
        let incident = self.graph.incident_edges(v.owner())?;
        let check = |e: EdgeId, w: Option<&Q>| -> Result<()> {
            if e >= self.graph.edge_count() {
                return Err(Error::Invalid(format!(
                    "agent {} references unknown edge id {e}",
                    v.owner()
                )));
            }
            if !incident.contains(&e) {
                return Err(Error::RelevanceViolation { agent: v.owner(), edge: e });
            }
            if let Some(w) = w {
                if !is_nonnegative(w) {
                    return Err(Error::Invalid(format!(
                        "agent {} has a negative value on edge {e}",
                        v.owner()
                    )));
                }
            }
            Ok(())
        };
        match v {
            Valuation::Additive(a) => {
                for (e, w) in &a.weights {
                    check(*e, Some(w))?;
                }
            }
            Valuation::Xos(x) => {
                if x.clauses.is_empty() {
                    return Err(Error::Invalid(format!(
                        "agent {} has an XOS valuation with no clauses",
                        x.owner
                    )));
                }
                for clause in &x.clauses {
                    for (e, w) in clause {
                        check(*e, Some(w))?;
                    }
                }
            }
            Valuation::Subadditive(s) => match &s.form {
                SubadditiveForm::Table(table) => {
                    for key in table.keys() {
                        for &e in key {
                            check(e, None)?;
                        }
                    }
                }
                SubadditiveForm::BundleContainment { bundles, inside, outside } => {
                    for b in bundles {
                        for &e in b {
                            check(e, None)?;
                        }
                    }
                    if !is_nonnegative(inside) || !is_nonnegative(outside) {
                        return Err(Error::Invalid(format!(
                            "agent {} has negative rule values",
                            s.owner
                        )));
                    }
                }
            },
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.graph.agent_count()
    }

    pub fn m(&self) -> usize {
        self.graph.edge_count()
    }

    /// Value of `s` for `agent`.
    pub fn value(&self, agent: usize, s: &BTreeSet<EdgeId>) -> Result<Q> {
        self.graph.check_agent(agent)?;
        self.valuations[agent - 1].value(&self.graph, s)
    }

    pub fn all_additive(&self) -> bool {
        self.valuations.iter().all(|v| v.as_additive().is_some())
    }
}

/// Parses the instance JSON format.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| Error::Parse("instance must be an object".into()))?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("missing or invalid \"n\"".into()))? as usize;
    let edges_json = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"edges\" array".into()))?;
    let mut edges = Vec::with_capacity(edges_json.len());
    let mut seen_ids = BTreeSet::new();
    for e in edges_json {
        let id = field_usize(e, "id")?;
        let u = field_usize(e, "u")?;
        let v = field_usize(e, "v")?;
        if !seen_ids.insert(id) {
            return Err(Error::Parse(format!("duplicate edge id {id}")));
        }
        edges.push(Edge { id, u: u.min(v), v: u.max(v) });
    }
    edges.sort_by_key(|e| e.id);
    let graph = Multigraph::from_edges(n, edges)?;
    let vals_json = obj
        .get("valuations")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"valuations\" array".into()))?;
    let mut valuations = Vec::with_capacity(vals_json.len());
    for (idx, vj) in vals_json.iter().enumerate() {
        valuations.push(parse_valuation(vj, idx + 1)?);
    }
    let mut inst = Instance { graph, valuations, meta: obj.get("meta").cloned() };
    inst.validate()?;
    // normalize meta: drop null
    if inst.meta == Some(Value::Null) {
        inst.meta = None;
    }
    Ok(inst)
}

fn field_usize(v: &Value, name: &str) -> Result<usize> {
    v.get(name)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("edge missing integer field \"{name}\"")))
}

fn parse_weight_map(v: &Value) -> Result<BTreeMap<EdgeId, Q>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("weight map must be an object".into()))?;
    let mut map = BTreeMap::new();
    for (k, val) in obj {
        let id: EdgeId = k
            .parse()
            .map_err(|_| Error::Parse(format!("weight key {k:?} is not an edge id")))?;
        map.insert(id, rational_from_json(val)?);
    }
    Ok(map)
}

fn parse_subset_key(k: &str) -> Result<BTreeSet<EdgeId>> {
    if k.is_empty() {
        return Ok(BTreeSet::new());
    }
    k.split(',')
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("table key {k:?} is not a comma-separated id list")))
        })
        .collect()
}

fn parse_valuation(v: &Value, owner: usize) -> Result<Valuation> {
    let ty = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse(format!("valuation {owner} missing \"type\"")))?;
    match ty {
        "additive" => {
            let weights = parse_weight_map(
                v.get("weights")
                    .ok_or_else(|| Error::Parse(format!("valuation {owner} missing \"weights\"")))?,
            )?;
            Ok(Valuation::Additive(AdditiveValuation { owner, weights }))
        }
        "xos" => {
            let clauses_json = v
                .get("clauses")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("valuation {owner} missing \"clauses\"")))?;
            let clauses = clauses_json
                .iter()
                .map(parse_weight_map)
                .collect::<Result<Vec<_>>>()?;
            Ok(Valuation::Xos(XosValuation { owner, clauses }))
        }
        "subadditive" => {
            if let Some(table_json) = v.get("table") {
                let obj = table_json
                    .as_object()
                    .ok_or_else(|| Error::Parse("\"table\" must be an object".into()))?;
                let mut table = BTreeMap::new();
                for (k, val) in obj {
                    table.insert(parse_subset_key(k)?, rational_from_json(val)?);
                }
                Ok(Valuation::Subadditive(SubadditiveValuation {
                    owner,
                    form: SubadditiveForm::Table(table),
                }))
            } else if v.get("rule").and_then(Value::as_str) == Some("bundle-containment") {
                let bundles_json = v
                    .get("bundles")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("rule form missing \"bundles\"".into()))?;
                let bundles = bundles_json
                    .iter()
                    .map(|b| {
                        b.as_array()
                            .ok_or_else(|| Error::Parse("bundle must be an id array".into()))?
                            .iter()
                            .map(|x| {
                                x.as_u64()
                                    .map(|v| v as usize)
                                    .ok_or_else(|| Error::Parse("bundle ids must be integers".into()))
                            })
                            .collect::<Result<BTreeSet<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let inside = rational_from_json(
                    v.get("inside").ok_or_else(|| Error::Parse("rule form missing \"inside\"".into()))?,
                )?;
                let outside = rational_from_json(
                    v.get("outside")
                        .ok_or_else(|| Error::Parse("rule form missing \"outside\"".into()))?,
                )?;
                Ok(Valuation::Subadditive(SubadditiveValuation {
                    owner,
                    form: SubadditiveForm::BundleContainment { bundles, inside, outside },
                }))
            } else {
                Err(Error::Parse(format!(
                    "subadditive valuation {owner} needs a \"table\" or rule \"bundle-containment\""
                )))
            }
        }
        other => Err(Error::Parse(format!("unknown valuation type {other:?}"))),
    }
}

fn weight_map_to_json(map: &BTreeMap<EdgeId, Q>) -> Value {
    let mut obj = Map::new();
    for (e, w) in map {
        obj.insert(e.to_string(), rational_to_json(w));
    }
    Value::Object(obj)
}

fn valuation_to_json(v: &Valuation) -> Value {
    match v {
        Valuation::Additive(a) => json!({
            "type": "additive",
            "weights": weight_map_to_json(&a.weights),
        }),
        Valuation::Xos(x) => json!({
            "type": "xos",
            "clauses": x.clauses.iter().map(weight_map_to_json).collect::<Vec<_>>(),
        }),
        Valuation::Subadditive(s) => match &s.form {
            SubadditiveForm::Table(table) => {
                let mut obj = Map::new();
                for (key, val) in table {
                    let k = key.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
                    obj.insert(k, rational_to_json(val));
                }
                json!({ "type": "subadditive", "table": Value::Object(obj) })
            }
            SubadditiveForm::BundleContainment { bundles, inside, outside } => json!({
                "type": "subadditive",
                "rule": "bundle-containment",
                "bundles": bundles
                    .iter()
                    .map(|b| b.iter().copied().collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "inside": rational_to_json(inside),
                "outside": rational_to_json(outside),
            }),
        },
    }
}

/// Canonical serialization; `parse_instance(serialize_instance(x)) == x` and
/// serialization is a fixed point on canonical text.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut obj = Map::new();
    obj.insert("n".into(), Value::from(inst.graph.agent_count()));
    obj.insert(
        "edges".into(),
        Value::Array(
            inst.graph
                .edges()
                .iter()
                .map(|e| json!({"id": e.id, "u": e.u, "v": e.v}))
                .collect(),
        ),
    );
    obj.insert(
        "valuations".into(),
        Value::Array(inst.valuations.iter().map(valuation_to_json).collect()),
    );
    if let Some(meta) = &inst.meta {
        obj.insert("meta".into(), meta.clone());
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(obj)).expect("serialization");
    out.push('\n');
    out
}

/// Allocation wire format: `{"bundles": [[edge ids], ...]}`.
pub fn parse_allocation(text: &str) -> Result<Allocation> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed allocation JSON: {e}")))
}

pub fn serialize_allocation(alloc: &Allocation) -> String {
    let mut out = serde_json::to_string_pretty(alloc).expect("serialization");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn minimal_instance_parses() {
        let text = r#"{"n":1,"edges":[{"id":0,"u":1,"v":1}],"valuations":[{"type":"additive","weights":{"0":1}}]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.value(1, &BTreeSet::from([0])).unwrap(), qi(1));
    }

    #[test]
    fn relevance_violation_on_parse() {
        let text = r#"{"n":3,"edges":[{"id":0,"u":1,"v":2}],"valuations":[
            {"type":"additive","weights":{}},
            {"type":"additive","weights":{}},
            {"type":"additive","weights":{"0":2}}]}"#;
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(err, Error::RelevanceViolation { agent: 3, edge: 0 }));
    }

    #[test]
    fn duplicate_edge_id_rejected() {
        let text = r#"{"n":2,"edges":[{"id":0,"u":1,"v":2},{"id":0,"u":1,"v":2}],"valuations":[]}"#;
        assert!(parse_instance(text).is_err());
    }

    #[test]
    fn round_trip_is_identity_on_canonical_text() {
        let text = r#"{"n":3,"edges":[{"id":0,"u":1,"v":2},{"id":1,"u":2,"v":3},{"id":2,"u":1,"v":3}],"valuations":[
            {"type":"additive","weights":{"0":1,"2":"1/2"}},
            {"type":"xos","clauses":[{"0":1},{"1":"2/3"}]},
            {"type":"subadditive","rule":"bundle-containment","bundles":[[1,2]],"inside":1,"outside":"1/2"}]}"#;
        let inst = parse_instance(text).unwrap();
        let canonical = serialize_instance(&inst);
        let reparsed = parse_instance(&canonical).unwrap();
        assert_eq!(inst, reparsed);
        assert_eq!(canonical, serialize_instance(&reparsed));
    }
}
