use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::element::Element;
use super::homomorphism::{Coalgebra, CoalgebraError};
use super::signature::{FunctorSignature, LabelSet, SignatureError};

#[derive(Debug, Error)]
pub enum LtsError {
    #[error("transition ({src}, {label}, {dst}) mentions unknown state `{state}`")]
    UnknownState { src: String, label: String, dst: String, state: String },
    #[error("transition ({src}, {label}, {dst}) uses undeclared label `{label}`")]
    UnknownLabel { src: String, label: String, dst: String },
    #[error("label set is empty")]
    NoLabels,
    #[error("state set is empty")]
    NoStates,
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error("malformed LTS file: {0}")]
    Format(String),
}

/// A finite labelled transition system: the `P(A x _)` row of the functor
/// table, kept in relational form because partition refinement wants to walk
/// edges, not powerset elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    states: BTreeSet<String>,
    labels: BTreeSet<String>,
    transitions: BTreeSet<(String, String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LtsFile {
    states: Vec<String>,
    labels: Vec<String>,
    transitions: Vec<(String, String, String)>,
}

impl Lts {
    pub fn new(
        states: impl IntoIterator<Item = impl Into<String>>,
        labels: impl IntoIterator<Item = impl Into<String>>,
        transitions: impl IntoIterator<Item = (impl Into<String>, impl Into<String>, impl Into<String>)>,
    ) -> Result<Self, LtsError> {
        let states: BTreeSet<String> = states.into_iter().map(Into::into).collect();
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if states.is_empty() {
            return Err(LtsError::NoStates);
        }
        if labels.is_empty() {
            return Err(LtsError::NoLabels);
        }
        let transitions: BTreeSet<(String, String, String)> = transitions
            .into_iter()
            .map(|(s, a, t)| (s.into(), a.into(), t.into()))
            .collect();
        for (s, a, t) in &transitions {
            let unknown = if !states.contains(s) {
                Some(s)
            } else if !states.contains(t) {
                Some(t)
            } else {
                None
            };
            if let Some(state) = unknown {
                return Err(LtsError::UnknownState {
                    src: s.clone(),
                    label: a.clone(),
                    dst: t.clone(),
                    state: state.clone(),
                });
            }
            if !labels.contains(a) {
                return Err(LtsError::UnknownLabel {
                    src: s.clone(),
                    label: a.clone(),
                    dst: t.clone(),
                });
            }
        }
        Ok(Lts { states, labels, transitions })
    }

    pub fn from_json(text: &str) -> Result<Self, LtsError> {
        let file: LtsFile =
            serde_json::from_str(text).map_err(|e| LtsError::Format(e.to_string()))?;
        Lts::new(file.states, file.labels, file.transitions)
    }

    pub fn to_json(&self) -> String {
        let file = LtsFile {
            states: self.states.iter().cloned().collect(),
            labels: self.labels.iter().cloned().collect(),
            transitions: self.transitions.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("LTS serialization cannot fail")
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn transitions(&self) -> &BTreeSet<(String, String, String)> {
        &self.transitions
    }

    pub fn successors<'a>(
        &'a self,
        state: &'a str,
        label: &'a str,
    ) -> impl Iterator<Item = &'a String> {
        self.transitions
            .iter()
            .filter(move |(s, a, _)| s == state && a == label)
            .map(|(_, _, t)| t)
    }

    /// The same system as a `P(A x _)` coalgebra.
    pub fn to_coalgebra(&self) -> Result<Coalgebra, LtsError> {
        let alphabet = LabelSet::new("A", self.labels.iter().cloned())?;
        let signature = FunctorSignature::lts(alphabet);
        let structure = self.states.iter().map(|s| {
            let value = Element::subset(self.transitions.iter().filter(|(src, _, _)| src == s).map(
                |(_, a, t)| Element::pair(Element::label(a.clone()), Element::state(t.clone())),
            ));
            (s.clone(), value)
        });
        Ok(Coalgebra::new(signature, self.states.iter().cloned(), structure)?)
    }
}

/// The coarsest strong-bisimulation partition, computed by iterated
/// splitting. Blocks are returned sorted by their smallest member, so the
/// output is deterministic for a given system.
pub fn bisimilarity_partition(lts: &Lts) -> Vec<BTreeSet<String>> {
    let states: Vec<&String> = lts.states.iter().collect();
    let mut block_of: BTreeMap<&String, usize> =
        states.iter().map(|s| (*s, 0usize)).collect();
    loop {
        // A state's signature is the set of (label, target block) pairs it
        // can reach in one step.
        let signature = |s: &String| -> BTreeSet<(&String, usize)> {
            lts.transitions
                .iter()
                .filter(|(src, _, _)| src == s)
                .map(|(_, a, t)| (a, block_of[t]))
                .collect()
        };
        let mut next: BTreeMap<(usize, BTreeSet<(&String, usize)>), Vec<&String>> =
            BTreeMap::new();
        for s in &states {
            next.entry((block_of[*s], signature(s))).or_default().push(*s);
        }
        let old_count = block_of.values().copied().collect::<BTreeSet<_>>().len();
        let changed = next.len() != old_count;
        let mut sorted: Vec<Vec<&String>> = next.into_values().collect();
        sorted.sort_by_key(|blk| blk[0].clone());
        for (i, blk) in sorted.iter().enumerate() {
            for s in blk {
                block_of.insert(s, i);
            }
        }
        if !changed {
            break;
        }
    }
    let mut blocks: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (s, b) in block_of {
        blocks.entry(b).or_default().insert(s.clone());
    }
    blocks.into_values().collect()
}

/// Quotient of an LTS by a partition of its states. Each block is named
/// after its smallest member. Also returns the projection map, which for the
/// bisimilarity partition is a coalgebra homomorphism onto the quotient.
pub fn quotient_lts(
    lts: &Lts,
    partition: &[BTreeSet<String>],
) -> Result<(Lts, BTreeMap<String, String>), LtsError> {
    let mut projection: BTreeMap<String, String> = BTreeMap::new();
    for block in partition {
        let name = block
            .iter()
            .next()
            .ok_or_else(|| LtsError::Format("empty block in partition".to_string()))?
            .clone();
        for s in block {
            projection.insert(s.clone(), name.clone());
        }
    }
    for s in &lts.states {
        if !projection.contains_key(s) {
            return Err(LtsError::Format(format!("partition does not cover state `{s}`")));
        }
    }
    let states: BTreeSet<String> = projection.values().cloned().collect();
    let transitions = lts
        .transitions
        .iter()
        .map(|(s, a, t)| (projection[s].clone(), a.clone(), projection[t].clone()));
    let quotient = Lts::new(states, lts.labels.iter().cloned(), transitions)?;
    Ok((quotient, projection))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::homomorphism::check_homomorphism;

    fn lts(states: &[&str], labels: &[&str], trans: &[(&str, &str, &str)]) -> Lts {
        Lts::new(
            states.iter().copied(),
            labels.iter().copied(),
            trans.iter().map(|(s, a, t)| (*s, *a, *t)),
        )
        .unwrap()
    }

    /// Brute-force oracle: enumerate every relation on the state set, keep
    /// the ones that are strong bisimulations, and take their union. Only
    /// usable for very small systems; it is deliberately independent of the
    /// partition-refinement implementation.
    fn oracle_partition(lts: &Lts) -> Vec<BTreeSet<String>> {
        let states: Vec<&String> = lts.states().iter().collect();
        let n = states.len();
        assert!(n <= 3, "oracle enumerates 2^(n*n) relations");
        let labels: Vec<&String> = lts.labels().iter().collect();
        let is_bisim = |rel: &Vec<(usize, usize)>| -> bool {
            rel.iter().all(|&(i, j)| {
                labels.iter().all(|a| {
                    let forth = lts.successors(states[i], a).all(|t1| {
                        lts.successors(states[j], a).any(|t2| {
                            rel.contains(&(
                                states.iter().position(|s| *s == t1).unwrap(),
                                states.iter().position(|s| *s == t2).unwrap(),
                            ))
                        })
                    });
                    let back = lts.successors(states[j], a).all(|t2| {
                        lts.successors(states[i], a).any(|t1| {
                            rel.contains(&(
                                states.iter().position(|s| *s == t1).unwrap(),
                                states.iter().position(|s| *s == t2).unwrap(),
                            ))
                        })
                    });
                    forth && back
                })
            })
        };
        let mut union: BTreeSet<(usize, usize)> = BTreeSet::new();
        for mask in 0u32..(1 << (n * n)) {
            let rel: Vec<(usize, usize)> = (0..n * n)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| (k / n, k % n))
                .collect();
            if is_bisim(&rel) {
                union.extend(rel);
            }
        }
        // The union of all bisimulations is an equivalence; group states by
        // their equivalence class.
        let mut blocks: Vec<BTreeSet<String>> = Vec::new();
        let mut assigned = vec![false; n];
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let mut block = BTreeSet::new();
            for j in 0..n {
                if union.contains(&(i, j)) && union.contains(&(j, i)) {
                    block.insert(states[j].clone());
                    assigned[j] = true;
                }
            }
            assert!(block.contains(states[i]), "largest bisimulation must be reflexive");
            blocks.push(block);
        }
        blocks.sort_by_key(|b| b.iter().next().unwrap().clone());
        blocks
    }

    #[test]
    fn branching_to_deadlocks_merges_the_deadlocks() {
        let sys = lts(
            &["s0", "s1", "s2"],
            &["a"],
            &[("s0", "a", "s1"), ("s0", "a", "s2")],
        );
        let partition = bisimilarity_partition(&sys);
        assert_eq!(partition.len(), 2);
        assert_eq!(partition[0], ["s0"].iter().map(|s| s.to_string()).collect());
        assert_eq!(
            partition[1],
            ["s1", "s2"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(partition, oracle_partition(&sys));
    }

    #[test]
    fn loop_and_unrolled_loop_are_bisimilar() {
        let sys = lts(
            &["p", "q0", "q1"],
            &["a"],
            &[("p", "a", "p"), ("q0", "a", "q1"), ("q1", "a", "q0")],
        );
        let partition = bisimilarity_partition(&sys);
        assert_eq!(partition.len(), 1);
        assert_eq!(partition, oracle_partition(&sys));
    }

    #[test]
    fn distinct_labels_separate_states() {
        let sys = lts(
            &["s0", "s1", "s2"],
            &["a", "b"],
            &[("s0", "a", "s1"), ("s1", "b", "s2")],
        );
        let partition = bisimilarity_partition(&sys);
        assert_eq!(partition.len(), 3);
        assert_eq!(partition, oracle_partition(&sys));
    }

    #[test]
    fn matches_oracle_on_random_small_systems() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let states = ["s0", "s1", "s2"];
        let labels = ["a", "b"];
        for _ in 0..60 {
            let mut trans = Vec::new();
            for s in states {
                for a in labels {
                    for t in states {
                        if rng.gen_bool(0.25) {
                            trans.push((s, a, t));
                        }
                    }
                }
            }
            let sys = lts(&states, &labels, &trans);
            assert_eq!(bisimilarity_partition(&sys), oracle_partition(&sys), "{sys:?}");
        }
    }

    #[test]
    fn projection_onto_bisimilarity_classes_is_a_homomorphism() {
        let sys = lts(
            &["p", "q0", "q1", "r"],
            &["a", "b"],
            &[
                ("p", "a", "p"),
                ("q0", "a", "q1"),
                ("q1", "a", "q0"),
                ("r", "b", "p"),
            ],
        );
        let partition = bisimilarity_partition(&sys);
        let (quotient, projection) = quotient_lts(&sys, &partition).unwrap();
        let verdict = check_homomorphism(
            &sys.to_coalgebra().unwrap(),
            &quotient.to_coalgebra().unwrap(),
            &projection,
        )
        .unwrap();
        assert!(verdict.holds());
    }

    #[test]
    fn json_round_trip() {
        let sys = lts(&["s0", "s1"], &["a"], &[("s0", "a", "s1")]);
        let json = sys.to_json();
        assert_eq!(Lts::from_json(&json).unwrap(), sys);
    }

    #[test]
    fn rejects_dangling_transitions() {
        let bad = Lts::new(["s0"], ["a"], [("s0", "a", "s9")]);
        assert!(matches!(bad, Err(LtsError::UnknownState { .. })));
        let bad = Lts::new(["s0"], ["a"], [("s0", "b", "s0")]);
        assert!(matches!(bad, Err(LtsError::UnknownLabel { .. })));
    }
}
