//! 1-safe Petri nets: structure, firing rule, reachability and the
//! distant-transition independence relation.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_STATES: usize = 1 << 20;

/// On-disk net document. Arrays define the canonical ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub places: Vec<String>,
    pub transitions: Vec<TransitionDocument>,
    pub initial_marking: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDocument {
    pub id: String,
    pub pre: Vec<String>,
    pub post: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    /// sorted place indices
    pub pre: Vec<usize>,
    /// sorted place indices
    pub post: Vec<usize>,
}

/// A set of marked places, indexed by canonical place order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking {
    tokens: Vec<bool>,
}

impl Marking {
    pub fn empty(places: usize) -> Self {
        Self {
            tokens: vec![false; places],
        }
    }

    pub fn from_places(places: usize, marked: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(places);
        for p in marked {
            m.tokens[p] = true;
        }
        m
    }

    pub fn contains(&self, place: usize) -> bool {
        self.tokens.get(place).copied().unwrap_or(false)
    }

    pub fn marked(&self) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: Marking,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachabilityGraph {
    /// index 0 is the initial marking; BFS discovery order
    pub markings: Vec<Marking>,
    /// `(from, transition, to)`
    pub edges: Vec<(usize, usize, usize)>,
    /// transitions never enabled at a reachable marking
    pub dead_transitions: Vec<usize>,
}

pub fn parse_net(text: &str) -> Result<PetriNet> {
    let doc: NetDocument = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = full
            .rsplit_once(" at line ")
            .map_or(full.as_str(), |(m, _)| m)
            .to_string();
        Error::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    })?;
    PetriNet::from_document(&doc)
}

impl PetriNet {
    pub fn from_document(doc: &NetDocument) -> Result<Self> {
        if doc.places.is_empty() {
            return Err(Error::EmptyNet("places"));
        }
        if doc.transitions.is_empty() {
            return Err(Error::EmptyNet("transitions"));
        }
        let mut index = HashMap::new();
        for (i, p) in doc.places.iter().enumerate() {
            if index.insert(p.as_str(), i).is_some() {
                return Err(Error::DuplicateId {
                    id: p.clone(),
                    location: format!("places[{i}]"),
                });
            }
        }
        let lookup = |name: &str, location: String| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::DanglingPlace {
                    place: name.to_string(),
                    location,
                })
        };
        let mut seen = HashSet::new();
        let mut transitions = Vec::with_capacity(doc.transitions.len());
        for (i, t) in doc.transitions.iter().enumerate() {
            if index.contains_key(t.id.as_str()) || !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: t.id.clone(),
                    location: format!("transitions[{i}].id"),
                });
            }
            if t.pre.is_empty() {
                return Err(Error::EmptyPreset {
                    location: format!("transitions[{i}] (`{}`)", t.id),
                });
            }
            if t.post.is_empty() {
                return Err(Error::EmptyPostset {
                    location: format!("transitions[{i}] (`{}`)", t.id),
                });
            }
            let resolve = |names: &[String], field: &str| -> Result<Vec<usize>> {
                let mut out = Vec::with_capacity(names.len());
                for (j, n) in names.iter().enumerate() {
                    out.push(lookup(n, format!("transitions[{i}].{field}[{j}]"))?);
                }
                out.sort_unstable();
                out.dedup();
                Ok(out)
            };
            let pre = resolve(&t.pre, "pre")?;
            let post = resolve(&t.post, "post")?;
            transitions.push(Transition {
                id: t.id.clone(),
                pre,
                post,
            });
        }
        let mut marked = Vec::new();
        for (j, n) in doc.initial_marking.iter().enumerate() {
            marked.push(lookup(n, format!("initial_marking[{j}]"))?);
        }
        Ok(Self {
            initial: Marking::from_places(doc.places.len(), marked),
            places: doc.places.clone(),
            transitions,
        })
    }

    pub fn to_document(&self) -> NetDocument {
        NetDocument {
            places: self.places.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionDocument {
                    id: t.id.clone(),
                    pre: t.pre.iter().map(|&p| self.places[p].clone()).collect(),
                    post: t.post.iter().map(|&p| self.places[p].clone()).collect(),
                })
                .collect(),
            initial_marking: self.marking_names(&self.initial),
        }
    }

    /// SHA-256 of the canonical serialization; insensitive to whitespace and
    /// to the order of place names inside presets and postsets.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(&self.to_document()).expect("serializable");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn transition_index(&self, id: &str) -> Result<usize> {
        self.transitions
            .iter()
            .position(|t| t.id == id)
            .ok_or_else(|| Error::UnknownTransition(id.to_string()))
    }

    pub fn marking(&self, names: &[&str]) -> Result<Marking> {
        let mut marked = Vec::new();
        for n in names {
            let i =
                self.places
                    .iter()
                    .position(|p| p == n)
                    .ok_or_else(|| Error::DanglingPlace {
                        place: n.to_string(),
                        location: "marking".into(),
                    })?;
            marked.push(i);
        }
        Ok(Marking::from_places(self.places.len(), marked))
    }

    pub fn marking_names(&self, m: &Marking) -> Vec<String> {
        m.marked().map(|p| self.places[p].clone()).collect()
    }

    fn transition(&self, t: usize) -> Result<&Transition> {
        self.transitions
            .get(t)
            .ok_or_else(|| Error::UnknownTransition(format!("#{t}")))
    }

    pub fn enables(&self, m: &Marking, t: usize) -> Result<bool> {
        Ok(self.transition(t)?.pre.iter().all(|&p| m.contains(p)))
    }

    /// Fires `t` at `m` with the 1-safe firing rule.
    pub fn fire(&self, m: &Marking, t: usize) -> Result<Marking> {
        if !self.enables(m, t)? {
            return Err(Error::NotEnabled(self.transitions[t].id.clone()));
        }
        Ok(self.fire_unchecked(m, t))
    }

    fn fire_unchecked(&self, m: &Marking, t: usize) -> Marking {
        let tr = &self.transitions[t];
        let mut next = m.clone();
        for &p in &tr.pre {
            next.tokens[p] = false;
        }
        for &p in &tr.post {
            next.tokens[p] = true;
        }
        next
    }

    /// A place that would receive a second token when firing `t` at `m`.
    fn contact(&self, m: &Marking, t: usize) -> Option<usize> {
        let tr = &self.transitions[t];
        tr.post
            .iter()
            .copied()
            .find(|p| m.contains(*p) && tr.pre.binary_search(p).is_err())
    }

    pub fn reachability_graph(&self, max_states: usize) -> Result<ReachabilityGraph> {
        let mut markings = vec![self.initial.clone()];
        let mut index = HashMap::from([(self.initial.clone(), 0usize)]);
        // (predecessor, transition) for witness reconstruction
        let mut parent: Vec<Option<(usize, usize)>> = vec![None];
        let mut edges = Vec::new();
        let mut live = vec![false; self.transitions.len()];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let m = markings[i].clone();
            for t in 0..self.transitions.len() {
                if !self.enables(&m, t)? {
                    continue;
                }
                live[t] = true;
                if let Some(p) = self.contact(&m, t) {
                    let mut witness = vec![self.transitions[t].id.clone()];
                    let mut cur = i;
                    while let Some((prev, via)) = parent[cur] {
                        witness.push(self.transitions[via].id.clone());
                        cur = prev;
                    }
                    witness.reverse();
                    return Err(Error::NotSafe {
                        witness,
                        place: self.places[p].clone(),
                    });
                }
                let next = self.fire_unchecked(&m, t);
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if markings.len() >= max_states {
                            return Err(Error::StateLimit(max_states));
                        }
                        let j = markings.len();
                        index.insert(next.clone(), j);
                        markings.push(next);
                        parent.push(Some((i, t)));
                        queue.push_back(j);
                        j
                    }
                };
                edges.push((i, t, j));
            }
        }
        Ok(ReachabilityGraph {
            markings,
            edges,
            dead_transitions: (0..live.len()).filter(|&t| !live[t]).collect(),
        })
    }

    /// `(•t ∪ t•) ∩ (•u ∪ u•) = ∅`
    pub fn distant(&self, t: usize, u: usize) -> Result<bool> {
        if t == u {
            return Err(Error::Invalid(format!(
                "distance of transition `{}` with itself is undefined",
                self.transition(t)?.id
            )));
        }
        let (a, b) = (self.transition(t)?, self.transition(u)?);
        let touches = |tr: &Transition, p: &usize| {
            tr.pre.binary_search(p).is_ok() || tr.post.binary_search(p).is_ok()
        };
        Ok(!a.pre.iter().chain(&a.post).any(|p| touches(b, p)))
    }

    /// Alphabet `Σ = T` and the unordered distant pairs `(t, u)` with `t < u`.
    pub fn independence_alphabet(&self) -> (Vec<String>, Vec<(usize, usize)>) {
        let letters = self.transitions.iter().map(|t| t.id.clone()).collect();
        let n = self.transitions.len();
        let mut pairs = Vec::new();
        for t in 0..n {
            for u in t + 1..n {
                if self.distant(t, u).expect("distinct indices") {
                    pairs.push((t, u));
                }
            }
        }
        (letters, pairs)
    }
}

impl fmt::Display for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "net with {} places, {} transitions",
            self.places.len(),
            self.transitions.len()
        )
    }
}
