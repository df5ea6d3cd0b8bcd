//! Finite intrinsic decision models: information fields as partitions,
//! measurability of policies, and induced subfields of product spaces.
//!
//! On a finite set every sigma-algebra is atomic, so fields are stored as
//! partitions and every measurability question is decided by enumerating
//! blocks. A decision object couples a finite nature space `Omega` (with
//! probability weights) to per-agent decision sets `U_a`, per-agent fields
//! `F_a` on those sets, and per-agent information fields `I_a` on the full
//! product space `Omega x prod_b U_b`. A policy for agent `a` is measurable
//! when it is constant on every `I_a` block up to the cells of `F_a`.
//!
//! Product-space points are identified by joining coordinates with `|`,
//! nature first and agents in declared order, e.g. `w0|u1|u2`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldsError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("`{0}` is not a subset of `{1}`")]
    SubsetViolation(String, String),
    #[error("partition for {context} is invalid: {reason}")]
    BadPartition { context: String, reason: String },
    #[error("probability weights have mass {mass}, expected 1 within 1e-9")]
    BadWeights { mass: f64 },
    #[error("policy for agent `{agent}` is missing point `{point}`")]
    PartialPolicy { agent: String, point: String },
    #[error("policy maps `{point}` to `{value}`, which is not a decision of `{agent}`")]
    BadDecision { agent: String, point: String, value: String },
    #[error("name `{0}` is empty, duplicated, or contains the reserved separator `|`")]
    BadName(String),
    #[error("malformed decision object: {0}")]
    Format(String),
}

/// A partition of a finite set, blocks sorted by smallest member. Partitions
/// stand in for sigma-algebras: blocks are the atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<BTreeSet<String>>,
}

impl Partition {
    /// Validates that `blocks` are nonempty, disjoint, and cover `ground`.
    pub fn new(
        blocks: Vec<BTreeSet<String>>,
        ground: &BTreeSet<String>,
        context: &str,
    ) -> Result<Self, FieldsError> {
        let bad = |reason: String| FieldsError::BadPartition {
            context: context.to_string(),
            reason,
        };
        let mut seen = BTreeSet::new();
        for block in &blocks {
            if block.is_empty() {
                return Err(bad("empty block".to_string()));
            }
            for point in block {
                if !ground.contains(point) {
                    return Err(bad(format!("`{point}` is not in the ground set")));
                }
                if !seen.insert(point.clone()) {
                    return Err(bad(format!("`{point}` appears in two blocks")));
                }
            }
        }
        if seen.len() != ground.len() {
            let missing = ground.difference(&seen).next().unwrap();
            return Err(bad(format!("`{missing}` is not covered")));
        }
        let mut blocks = blocks;
        blocks.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
        Ok(Partition { blocks })
    }

    /// The finest partition: every point is its own block.
    pub fn discrete(ground: &BTreeSet<String>) -> Self {
        let blocks = ground
            .iter()
            .map(|p| BTreeSet::from([p.clone()]))
            .collect();
        Partition { blocks }
    }

    /// The coarsest partition: one block (empty for an empty ground set).
    pub fn trivial(ground: &BTreeSet<String>) -> Self {
        if ground.is_empty() {
            Partition { blocks: Vec::new() }
        } else {
            Partition { blocks: vec![ground.clone()] }
        }
    }

    /// Groups `points` by a key function.
    pub fn by_key<K: Ord>(
        points: impl IntoIterator<Item = String>,
        key: impl Fn(&str) -> K,
    ) -> Self {
        let mut groups: BTreeMap<K, BTreeSet<String>> = BTreeMap::new();
        for p in points {
            let k = key(&p);
            groups.entry(k).or_default().insert(p);
        }
        let mut blocks: Vec<BTreeSet<String>> = groups.into_values().collect();
        blocks.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[BTreeSet<String>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, point: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(point))
    }

    /// True when every block of `self` is contained in a block of `coarser`.
    /// Partitions over different ground sets never refine each other.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let ground: BTreeSet<&String> = self.blocks.iter().flatten().collect();
        let other: BTreeSet<&String> = coarser.blocks.iter().flatten().collect();
        if ground != other {
            return false;
        }
        self.blocks.iter().all(|block| {
            let first = block.iter().next().expect("blocks are nonempty");
            match coarser.block_of(first) {
                Some(i) => block.iter().all(|p| coarser.blocks[i].contains(p)),
                None => false,
            }
        })
    }
}

/// `sub` is a subfield of `sup` when every `sub`-atom is a union of
/// `sup`-atoms, i.e. `sup` refines `sub`.
pub fn is_subfield(sub: &Partition, sup: &Partition) -> bool {
    sup.refines(sub)
}

/// A finite decision object: agents, a weighted nature space, per-agent
/// decision sets with fields on them, and per-agent information fields on
/// the full product space.
#[derive(Debug, Clone)]
pub struct DecisionObject {
    agents: Vec<String>,
    omega: Vec<String>,
    weights: BTreeMap<String, f64>,
    decisions: BTreeMap<String, Vec<String>>,
    fields: BTreeMap<String, Partition>,
    info: BTreeMap<String, Partition>,
}

#[derive(Debug, Deserialize)]
struct DecisionObjectFile {
    agents: Vec<String>,
    omega: Vec<String>,
    #[serde(default)]
    weights: BTreeMap<String, f64>,
    decisions: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    fields: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    info: BTreeMap<String, Vec<Vec<String>>>,
}

fn check_names(names: &[String]) -> Result<(), FieldsError> {
    let mut seen = BTreeSet::new();
    for name in names {
        if name.is_empty() || name.contains('|') || !seen.insert(name) {
            return Err(FieldsError::BadName(name.clone()));
        }
    }
    Ok(())
}

impl DecisionObject {
    /// Builds and validates an object. `fields` defaults to the discrete
    /// partition of `U_a` (full resolution) and `info` to the discrete
    /// partition of the product space (full information) for agents absent
    /// from the respective maps. `weights` defaults to uniform.
    pub fn new(
        agents: Vec<String>,
        omega: Vec<String>,
        weights: Option<BTreeMap<String, f64>>,
        decisions: BTreeMap<String, Vec<String>>,
        fields: BTreeMap<String, Partition>,
        info: BTreeMap<String, Partition>,
    ) -> Result<Self, FieldsError> {
        if agents.is_empty() {
            return Err(FieldsError::Format("agent set is empty".to_string()));
        }
        if omega.is_empty() {
            return Err(FieldsError::Format("nature space is empty".to_string()));
        }
        check_names(&agents)?;
        check_names(&omega)?;
        let weights = match weights {
            Some(w) => {
                let mass: f64 = w.values().sum();
                if (mass - 1.0).abs() > 1e-9 || w.values().any(|p| *p < 0.0) {
                    return Err(FieldsError::BadWeights { mass });
                }
                for name in w.keys() {
                    if !omega.contains(name) {
                        return Err(FieldsError::Format(format!(
                            "weight for unknown nature state `{name}`"
                        )));
                    }
                }
                w
            }
            None => {
                let p = 1.0 / omega.len() as f64;
                omega.iter().map(|w| (w.clone(), p)).collect()
            }
        };
        for agent in &agents {
            let u = decisions
                .get(agent)
                .ok_or_else(|| FieldsError::Format(format!("agent `{agent}` has no decision set")))?;
            if u.is_empty() {
                return Err(FieldsError::Format(format!(
                    "agent `{agent}` has an empty decision set"
                )));
            }
            check_names(u)?;
        }
        for name in decisions.keys().chain(fields.keys()).chain(info.keys()) {
            if !agents.contains(name) {
                return Err(FieldsError::UnknownAgent(name.clone()));
            }
        }
        let mut obj = DecisionObject {
            agents,
            omega,
            weights,
            decisions,
            fields: BTreeMap::new(),
            info: BTreeMap::new(),
        };
        let product: BTreeSet<String> = obj.product_ids().into_iter().collect();
        for agent in &obj.agents {
            let u: BTreeSet<String> = obj.decisions[agent].iter().cloned().collect();
            let field = match fields.get(agent) {
                Some(p) => Partition::new(p.blocks.clone(), &u, &format!("F_{agent}"))?,
                None => Partition::discrete(&u),
            };
            let information = match info.get(agent) {
                Some(p) => Partition::new(p.blocks.clone(), &product, &format!("I_{agent}"))?,
                None => Partition::discrete(&product),
            };
            obj.fields.insert(agent.clone(), field);
            obj.info.insert(agent.clone(), information);
        }
        Ok(obj)
    }

    /// Reads the JSON form; partitions are lists of lists of point ids.
    pub fn from_json(text: &str) -> Result<Self, FieldsError> {
        let file: DecisionObjectFile =
            serde_json::from_str(text).map_err(|e| FieldsError::Format(e.to_string()))?;
        let to_partition = |raw: Vec<Vec<String>>| Partition {
            blocks: raw.into_iter().map(|b| b.into_iter().collect()).collect(),
        };
        let fields = file
            .fields
            .into_iter()
            .map(|(k, v)| (k, to_partition(v)))
            .collect();
        let info = file
            .info
            .into_iter()
            .map(|(k, v)| (k, to_partition(v)))
            .collect();
        let weights = if file.weights.is_empty() { None } else { Some(file.weights) };
        DecisionObject::new(file.agents, file.omega, weights, file.decisions, fields, info)
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn omega(&self) -> &[String] {
        &self.omega
    }

    pub fn weight(&self, w: &str) -> f64 {
        self.weights.get(w).copied().unwrap_or(0.0)
    }

    pub fn decisions(&self, agent: &str) -> Result<&[String], FieldsError> {
        self.decisions
            .get(agent)
            .map(Vec::as_slice)
            .ok_or_else(|| FieldsError::UnknownAgent(agent.to_string()))
    }

    pub fn field(&self, agent: &str) -> Result<&Partition, FieldsError> {
        self.fields
            .get(agent)
            .ok_or_else(|| FieldsError::UnknownAgent(agent.to_string()))
    }

    pub fn info_field(&self, agent: &str) -> Result<&Partition, FieldsError> {
        self.info
            .get(agent)
            .ok_or_else(|| FieldsError::UnknownAgent(agent.to_string()))
    }

    /// All points of the full product space `Omega x prod_a U_a`, nature
    /// varying slowest and the last declared agent fastest.
    pub fn product_ids(&self) -> Vec<String> {
        self.points_over(&self.agents)
    }

    /// Points of `H_B = Omega x prod_{a in B} U_a`. Coordinates follow the
    /// declared agent order regardless of the order of `b`.
    pub fn product_ids_over(&self, b: &BTreeSet<String>) -> Result<Vec<String>, FieldsError> {
        for agent in b {
            if !self.agents.contains(agent) {
                return Err(FieldsError::UnknownAgent(agent.clone()));
            }
        }
        let ordered: Vec<String> = self
            .agents
            .iter()
            .filter(|a| b.contains(*a))
            .cloned()
            .collect();
        Ok(self.points_over(&ordered))
    }

    fn points_over(&self, agents: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        let sizes: Vec<usize> = agents.iter().map(|a| self.decisions[a].len()).collect();
        for w in &self.omega {
            let mut counter = vec![0usize; agents.len()];
            loop {
                let mut id = w.clone();
                for (agent, &c) in agents.iter().zip(&counter) {
                    id.push('|');
                    id.push_str(&self.decisions[agent][c]);
                }
                out.push(id);
                let mut pos = agents.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    counter[pos] += 1;
                    if counter[pos] < sizes[pos] {
                        break;
                    }
                    counter[pos] = 0;
                }
                if counter.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        out
    }

    /// The coordinate of a full-product-space point: the nature component
    /// for `None`, agent `a`'s decision for `Some(a)`.
    pub fn coordinate(&self, point: &str, agent: Option<&str>) -> Result<String, FieldsError> {
        let parts: Vec<&str> = point.split('|').collect();
        if parts.len() != self.agents.len() + 1 {
            return Err(FieldsError::Format(format!(
                "point `{point}` has {} coordinates, expected {}",
                parts.len(),
                self.agents.len() + 1
            )));
        }
        match agent {
            None => Ok(parts[0].to_string()),
            Some(a) => {
                let i = self
                    .agents
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| FieldsError::UnknownAgent(a.to_string()))?;
                Ok(parts[i + 1].to_string())
            }
        }
    }
}

/// A policy for one agent: a total map from full-product-space points to
/// that agent's decisions.
#[derive(Debug, Clone)]
pub struct Policy {
    pub agent: String,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct PolicyFile {
    agent: String,
    map: BTreeMap<String, String>,
}

impl Policy {
    pub fn from_json(text: &str) -> Result<Self, FieldsError> {
        let file: PolicyFile =
            serde_json::from_str(text).map_err(|e| FieldsError::Format(e.to_string()))?;
        Ok(Policy { agent: file.agent, map: file.map })
    }

    /// A policy that plays `value` everywhere.
    pub fn constant(obj: &DecisionObject, agent: &str, value: &str) -> Result<Self, FieldsError> {
        if !obj.decisions(agent)?.contains(&value.to_string()) {
            return Err(FieldsError::BadDecision {
                agent: agent.to_string(),
                point: "*".to_string(),
                value: value.to_string(),
            });
        }
        let map = obj
            .product_ids()
            .into_iter()
            .map(|p| (p, value.to_string()))
            .collect();
        Ok(Policy { agent: agent.to_string(), map })
    }

    /// A policy that echoes agent `source`'s coordinate. Requires the two
    /// agents to share a decision alphabet on the echoed values.
    pub fn echo(obj: &DecisionObject, agent: &str, source: &str) -> Result<Self, FieldsError> {
        let own: BTreeSet<&String> = obj.decisions(agent)?.iter().collect();
        let mut map = BTreeMap::new();
        for point in obj.product_ids() {
            let value = obj.coordinate(&point, Some(source))?;
            if !own.contains(&value) {
                return Err(FieldsError::BadDecision {
                    agent: agent.to_string(),
                    point,
                    value,
                });
            }
            map.insert(point, value);
        }
        Ok(Policy { agent: agent.to_string(), map })
    }

    fn validate(&self, obj: &DecisionObject) -> Result<(), FieldsError> {
        let own: BTreeSet<&String> = obj.decisions(&self.agent)?.iter().collect();
        for point in obj.product_ids() {
            match self.map.get(&point) {
                None => {
                    return Err(FieldsError::PartialPolicy {
                        agent: self.agent.clone(),
                        point,
                    })
                }
                Some(value) if !own.contains(value) => {
                    return Err(FieldsError::BadDecision {
                        agent: self.agent.clone(),
                        point,
                        value: value.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Two points in one information-field block whose policy values land in
/// different cells of the agent's decision field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurabilityWitness {
    pub point_a: String,
    pub point_b: String,
    pub decision_a: String,
    pub decision_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasurableVerdict {
    Measurable,
    Fails(MeasurabilityWitness),
}

impl MeasurableVerdict {
    pub fn is_measurable(&self) -> bool {
        matches!(self, MeasurableVerdict::Measurable)
    }
}

/// Decides whether `pol` is measurable from `I_a` to `F_a`: on every block
/// of the information field the policy's values must lie in a single cell
/// of the decision field. Returns the first offending pair otherwise.
pub fn check_measurable(
    obj: &DecisionObject,
    pol: &Policy,
) -> Result<MeasurableVerdict, FieldsError> {
    pol.validate(obj)?;
    let info = obj.info_field(&pol.agent)?;
    let field = obj.field(&pol.agent)?;
    for block in info.blocks() {
        let mut first: Option<(&String, &String, usize)> = None;
        for point in block {
            let value = &pol.map[point];
            let cell = field.block_of(value).expect("policy values are decisions");
            match first {
                None => first = Some((point, value, cell)),
                Some((p0, v0, c0)) if c0 != cell => {
                    return Ok(MeasurableVerdict::Fails(MeasurabilityWitness {
                        point_a: p0.clone(),
                        point_b: point.clone(),
                        decision_a: v0.clone(),
                        decision_b: value.clone(),
                    }))
                }
                Some(_) => {}
            }
        }
    }
    Ok(MeasurableVerdict::Measurable)
}

/// The subfield of `H_B` induced by the agents in `C`: the partition of
/// `H_B` by equality under the canonical projection onto
/// `H_C = Omega x prod_{a in C} U_a`. The nature coordinate is part of the
/// projection, so `C` empty yields the partition by nature state alone.
pub fn induced_subfield(
    obj: &DecisionObject,
    b: &BTreeSet<String>,
    c: &BTreeSet<String>,
) -> Result<Partition, FieldsError> {
    if !c.is_subset(b) {
        return Err(FieldsError::SubsetViolation(
            format!("{c:?}"),
            format!("{b:?}"),
        ));
    }
    let points = obj.product_ids_over(b)?;
    let ordered: Vec<usize> = obj
        .agents
        .iter()
        .filter(|a| b.contains(*a))
        .enumerate()
        .filter(|(_, a)| c.contains(*a))
        .map(|(i, _)| i + 1)
        .collect();
    Ok(Partition::by_key(points, |id| {
        let parts: Vec<&str> = id.split('|').collect();
        let mut key = vec![parts[0].to_string()];
        key.extend(ordered.iter().map(|&i| parts[i].to_string()));
        key
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_agent_object(info_alpha: Option<Vec<Vec<&str>>>) -> DecisionObject {
        let mut info = BTreeMap::new();
        if let Some(blocks) = info_alpha {
            info.insert(
                "alpha".to_string(),
                Partition {
                    blocks: blocks
                        .into_iter()
                        .map(|b| b.into_iter().map(String::from).collect())
                        .collect(),
                },
            );
        }
        DecisionObject::new(
            vec!["alpha".to_string(), "beta".to_string()],
            vec!["w".to_string()],
            None,
            BTreeMap::from([
                ("alpha".to_string(), vec!["0".to_string(), "1".to_string()]),
                ("beta".to_string(), vec!["0".to_string(), "1".to_string()]),
            ]),
            BTreeMap::new(),
            info,
        )
        .unwrap()
    }

    #[test]
    fn product_ids_follow_declared_order() {
        let obj = two_agent_object(None);
        assert_eq!(
            obj.product_ids(),
            vec!["w|0|0", "w|0|1", "w|1|0", "w|1|1"]
        );
        assert_eq!(obj.coordinate("w|0|1", Some("beta")).unwrap(), "1");
        assert_eq!(obj.coordinate("w|0|1", None).unwrap(), "w");
    }

    #[test]
    fn constant_policies_are_measurable() {
        let obj = two_agent_object(Some(vec![vec![
            "w|0|0", "w|0|1", "w|1|0", "w|1|1",
        ]]));
        let pol = Policy::constant(&obj, "alpha", "1").unwrap();
        assert!(check_measurable(&obj, &pol).unwrap().is_measurable());
    }

    #[test]
    fn echo_under_trivial_information_fails_with_a_witness() {
        let obj = two_agent_object(Some(vec![vec![
            "w|0|0", "w|0|1", "w|1|0", "w|1|1",
        ]]));
        let pol = Policy::echo(&obj, "alpha", "beta").unwrap();
        match check_measurable(&obj, &pol).unwrap() {
            MeasurableVerdict::Fails(w) => {
                assert_ne!(w.decision_a, w.decision_b);
                let info = obj.info_field("alpha").unwrap();
                assert_eq!(info.block_of(&w.point_a), info.block_of(&w.point_b));
                // The offending pair differs only in beta's coordinate.
                assert_eq!(
                    obj.coordinate(&w.point_a, Some("alpha")).unwrap(),
                    obj.coordinate(&w.point_b, Some("alpha")).unwrap()
                );
                assert_ne!(
                    obj.coordinate(&w.point_a, Some("beta")).unwrap(),
                    obj.coordinate(&w.point_b, Some("beta")).unwrap()
                );
            }
            MeasurableVerdict::Measurable => panic!("echo cannot be trivially measurable"),
        }
    }

    #[test]
    fn echo_is_measurable_when_information_reveals_the_source() {
        let obj = two_agent_object(Some(vec![
            vec!["w|0|0", "w|1|0"],
            vec!["w|0|1", "w|1|1"],
        ]));
        let pol = Policy::echo(&obj, "alpha", "beta").unwrap();
        assert!(check_measurable(&obj, &pol).unwrap().is_measurable());
    }

    #[test]
    fn coarse_decision_fields_forgive_variation_within_a_cell() {
        // F_alpha lumps both decisions into one cell, so even the echo
        // policy is measurable from trivial information.
        let obj = DecisionObject::new(
            vec!["alpha".to_string(), "beta".to_string()],
            vec!["w".to_string()],
            None,
            BTreeMap::from([
                ("alpha".to_string(), vec!["0".to_string(), "1".to_string()]),
                ("beta".to_string(), vec!["0".to_string(), "1".to_string()]),
            ]),
            BTreeMap::from([(
                "alpha".to_string(),
                Partition {
                    blocks: vec![BTreeSet::from(["0".to_string(), "1".to_string()])],
                },
            )]),
            BTreeMap::from([(
                "alpha".to_string(),
                Partition {
                    blocks: vec![BTreeSet::from([
                        "w|0|0".to_string(),
                        "w|0|1".to_string(),
                        "w|1|0".to_string(),
                        "w|1|1".to_string(),
                    ])],
                },
            )]),
        )
        .unwrap();
        let pol = Policy::echo(&obj, "alpha", "beta").unwrap();
        assert!(check_measurable(&obj, &pol).unwrap().is_measurable());
    }

    fn three_way_object() -> DecisionObject {
        DecisionObject::new(
            vec!["one".to_string(), "two".to_string()],
            vec!["w".to_string()],
            None,
            BTreeMap::from([
                ("one".to_string(), vec!["a".to_string(), "b".to_string()]),
                (
                    "two".to_string(),
                    vec!["x".to_string(), "y".to_string(), "z".to_string()],
                ),
            ]),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn induced_subfield_matches_hand_counts() {
        let obj = three_way_object();
        let b: BTreeSet<String> = ["one".to_string(), "two".to_string()].into();
        let c1: BTreeSet<String> = ["one".to_string()].into();
        let full = induced_subfield(&obj, &b, &b).unwrap();
        assert_eq!(full.len(), 6);
        assert!(full.blocks().iter().all(|blk| blk.len() == 1));
        let by_one = induced_subfield(&obj, &b, &c1).unwrap();
        assert_eq!(by_one.len(), 2);
        assert!(by_one.blocks().iter().all(|blk| blk.len() == 3));
        let none = induced_subfield(&obj, &b, &BTreeSet::new()).unwrap();
        assert_eq!(none.len(), 1);
        assert_eq!(none.blocks()[0].len(), 6);
        assert!(is_subfield(&none, &by_one));
        assert!(is_subfield(&by_one, &full));
        assert!(!is_subfield(&full, &by_one));
    }

    #[test]
    fn induced_subfield_keeps_the_nature_coordinate() {
        let obj = DecisionObject::new(
            vec!["one".to_string()],
            vec!["rain".to_string(), "sun".to_string()],
            None,
            BTreeMap::from([("one".to_string(), vec!["u".to_string(), "v".to_string()])]),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let b: BTreeSet<String> = ["one".to_string()].into();
        // Projecting away every agent still separates nature states.
        let p = induced_subfield(&obj, &b, &BTreeSet::new()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(
            p.blocks()[0],
            BTreeSet::from(["rain|u".to_string(), "rain|v".to_string()])
        );
    }

    #[test]
    fn subset_violation_is_rejected() {
        let obj = three_way_object();
        let b: BTreeSet<String> = ["one".to_string()].into();
        let c: BTreeSet<String> = ["two".to_string()].into();
        assert!(matches!(
            induced_subfield(&obj, &b, &c),
            Err(FieldsError::SubsetViolation(..))
        ));
    }

    fn random_object(rng: &mut ChaCha8Rng) -> DecisionObject {
        let n_omega = rng.gen_range(1..=2);
        let omega: Vec<String> = (0..n_omega).map(|i| format!("w{i}")).collect();
        let agents = vec!["p".to_string(), "q".to_string()];
        let mut decisions = BTreeMap::new();
        for a in &agents {
            let n = rng.gen_range(2..=3);
            decisions.insert(a.clone(), (0..n).map(|i| i.to_string()).collect());
        }
        DecisionObject::new(agents, omega, None, decisions, BTreeMap::new(), BTreeMap::new())
            .unwrap()
    }

    fn random_coarsening(rng: &mut ChaCha8Rng, ground: &BTreeSet<String>) -> Partition {
        let n_blocks = rng.gen_range(1..=ground.len());
        let mut blocks: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n_blocks];
        for (i, p) in ground.iter().enumerate() {
            let target = if i < n_blocks { i } else { rng.gen_range(0..n_blocks) };
            blocks[target].insert(p.clone());
        }
        Partition::new(blocks, ground, "random").unwrap()
    }

    #[test]
    fn induced_subfields_coarsen_as_the_subset_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let obj = random_object(&mut rng);
            let b: BTreeSet<String> = obj.agents().iter().cloned().collect();
            let larger: BTreeSet<String> = ["p".to_string(), "q".to_string()].into();
            let smaller: BTreeSet<String> = ["p".to_string()].into();
            let coarse = induced_subfield(&obj, &b, &smaller).unwrap();
            let fine = induced_subfield(&obj, &b, &larger).unwrap();
            assert!(is_subfield(&coarse, &fine));
            let empty = induced_subfield(&obj, &b, &BTreeSet::new()).unwrap();
            assert!(is_subfield(&empty, &coarse));
        }
    }

    #[test]
    fn refining_information_preserves_measurability() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for round in 0..60 {
            let base = random_object(&mut rng);
            let product: BTreeSet<String> = base.product_ids().into_iter().collect();
            let coarse_info = random_coarsening(&mut rng, &product);
            let obj = DecisionObject::new(
                base.agents().to_vec(),
                base.omega().to_vec(),
                None,
                base.agents()
                    .iter()
                    .map(|a| (a.clone(), base.decisions(a).unwrap().to_vec()))
                    .collect(),
                BTreeMap::new(),
                BTreeMap::from([("p".to_string(), coarse_info.clone())]),
            )
            .unwrap();
            let choices = obj.decisions("p").unwrap().to_vec();
            let map: BTreeMap<String, String> = obj
                .product_ids()
                .into_iter()
                .map(|pt| {
                    let v = choices[rng.gen_range(0..choices.len())].clone();
                    (pt, v)
                })
                .collect();
            let pol = Policy { agent: "p".to_string(), map };
            let coarse_verdict = check_measurable(&obj, &pol).unwrap();
            // Refine: full information always refines any coarse field.
            let refined = DecisionObject::new(
                obj.agents().to_vec(),
                obj.omega().to_vec(),
                None,
                obj.agents()
                    .iter()
                    .map(|a| (a.clone(), obj.decisions(a).unwrap().to_vec()))
                    .collect(),
                BTreeMap::new(),
                BTreeMap::new(),
            )
            .unwrap();
            let fine_verdict = check_measurable(&refined, &pol).unwrap();
            if coarse_verdict.is_measurable() {
                assert!(fine_verdict.is_measurable(), "round {round}");
            }
        }
    }

    #[test]
    fn json_ingestion_and_validation() {
        let text = r#"{
            "agents": ["alpha", "beta"],
            "omega": ["w"],
            "weights": {"w": 1.0},
            "decisions": {"alpha": ["0", "1"], "beta": ["0", "1"]},
            "fields": {"alpha": [["0"], ["1"]]},
            "info": {"alpha": [["w|0|0", "w|0|1", "w|1|0", "w|1|1"]]}
        }"#;
        let obj = DecisionObject::from_json(text).unwrap();
        assert_eq!(obj.info_field("alpha").unwrap().len(), 1);
        assert_eq!(obj.info_field("beta").unwrap().len(), 4);
        assert_eq!(obj.weight("w"), 1.0);

        let bad_mass = text.replace("1.0", "0.5");
        assert!(matches!(
            DecisionObject::from_json(&bad_mass),
            Err(FieldsError::BadWeights { .. })
        ));

        let bad_partition = text.replace("[\"0\"], [\"1\"]", "[\"0\"]");
        assert!(matches!(
            DecisionObject::from_json(&bad_partition),
            Err(FieldsError::BadPartition { .. })
        ));
    }

    #[test]
    fn partition_construction_rejects_overlap_and_gaps() {
        let ground: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
        let overlap = vec![
            BTreeSet::from(["a".to_string(), "b".to_string()]),
            BTreeSet::from(["b".to_string()]),
        ];
        assert!(Partition::new(overlap, &ground, "t").is_err());
        let gap = vec![BTreeSet::from(["a".to_string()])];
        assert!(Partition::new(gap, &ground, "t").is_err());
        let ok = Partition::new(
            vec![
                BTreeSet::from(["b".to_string()]),
                BTreeSet::from(["a".to_string()]),
            ],
            &ground,
            "t",
        )
        .unwrap();
        assert_eq!(ok.blocks()[0], BTreeSet::from(["a".to_string()]));
        assert!(Partition::discrete(&ground).refines(&Partition::trivial(&ground)));
        assert!(!Partition::trivial(&ground).refines(&Partition::discrete(&ground)));
    }
}
