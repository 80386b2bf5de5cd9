//! Directed, unweighted word-form graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Accumulative,
    Stage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// Where a network came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub child_id: String,
    pub speaker: String,
    pub mode: Mode,
    pub label: String,
    /// Visit indices of the contributing files, ascending.
    pub visits: Vec<usize>,
    pub reversed: bool,
}

impl Provenance {
    pub fn new(child_id: &str, speaker: &str, mode: Mode, label: &str) -> Self {
        Self {
            child_id: child_id.to_string(),
            speaker: speaker.to_string(),
            mode,
            label: label.to_string(),
            visits: Vec::new(),
            reversed: false,
        }
    }

    pub fn with_visits(mut self, visits: impl IntoIterator<Item = usize>) -> Self {
        self.visits = visits.into_iter().collect();
        self.visits.sort_unstable();
        self.visits.dedup();
        self
    }
}

impl Default for Provenance {
    fn default() -> Self {
        Self::new("", "", Mode::Stage, "")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Adjacency {
    succ: BTreeSet<String>,
    pred: BTreeSet<String>,
}

/// Directed word-collocation network with set semantics on nodes and arcs.
///
/// Nodes and arcs iterate in lexicographic order, so every derived listing
/// is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalNetwork {
    adjacency: BTreeMap<String, Adjacency>,
    arc_count: usize,
    pub meta: Provenance,
}

impl LexicalNetwork {
    pub fn new(meta: Provenance) -> Self {
        Self {
            adjacency: BTreeMap::new(),
            arc_count: 0,
            meta,
        }
    }

    /// Builds a network from explicit node and arc lists; arc endpoints are
    /// added as nodes.
    pub fn from_parts<N, A, S>(meta: Provenance, nodes: N, arcs: A) -> Self
    where
        N: IntoIterator<Item = S>,
        A: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut g = Self::new(meta);
        for n in nodes {
            g.add_node(n.as_ref());
        }
        for (u, v) in arcs {
            g.add_arc(u.as_ref(), v.as_ref());
        }
        g
    }

    /// Returns true if the node was new.
    pub fn add_node(&mut self, word: &str) -> bool {
        if self.adjacency.contains_key(word) {
            return false;
        }
        self.adjacency.insert(word.to_string(), Adjacency::default());
        true
    }

    /// Adds `source → target`, creating missing endpoints. Returns true if
    /// the arc was new.
    pub fn add_arc(&mut self, source: &str, target: &str) -> bool {
        self.add_node(source);
        self.add_node(target);
        let inserted = self
            .adjacency
            .get_mut(source)
            .expect("source present")
            .succ
            .insert(target.to_string());
        if inserted {
            self.adjacency
                .get_mut(target)
                .expect("target present")
                .pred
                .insert(source.to_string());
            self.arc_count += 1;
        }
        inserted
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.adjacency.contains_key(word)
    }

    pub fn has_arc(&self, source: &str, target: &str) -> bool {
        self.adjacency.get(source).is_some_and(|a| a.succ.contains(target))
    }

    /// Nodes in lexicographic order.
    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.adjacency.keys().map(String::as_str)
    }

    /// Arcs sorted by (source, target).
    pub fn arcs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(u, a)| a.succ.iter().map(move |v| (u.as_str(), v.as_str())))
    }

    pub fn successors(&self, word: &str) -> Result<impl Iterator<Item = &str> + '_> {
        Ok(self.entry(word)?.succ.iter().map(String::as_str))
    }

    pub fn predecessors(&self, word: &str) -> Result<impl Iterator<Item = &str> + '_> {
        Ok(self.entry(word)?.pred.iter().map(String::as_str))
    }

    fn entry(&self, word: &str) -> Result<&Adjacency> {
        self.adjacency
            .get(word)
            .ok_or_else(|| Error::UnknownNode(word.to_string()))
    }

    /// In- or out-degree; a self-loop counts once in each direction.
    pub fn degree(&self, word: &str, direction: Direction) -> Result<usize> {
        let a = self.entry(word)?;
        Ok(match direction {
            Direction::In => a.pred.len(),
            Direction::Out => a.succ.len(),
        })
    }

    /// Degrees of all nodes, in node order.
    pub fn degrees(&self, direction: Direction) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.adjacency.iter().map(move |(w, a)| {
            let d = match direction {
                Direction::In => a.pred.len(),
                Direction::Out => a.succ.len(),
            };
            (w.as_str(), d)
        })
    }

    /// Arcs divided by nodes.
    pub fn average_degree(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Undefined("average degree of an empty network".into()));
        }
        Ok(self.arc_count as f64 / self.node_count() as f64)
    }

    /// Up to `k` nodes by degree, descending, ties broken by word.
    pub fn top_k_by_degree(&self, k: usize, direction: Direction) -> Vec<&str> {
        let mut ranked: Vec<(&str, usize)> = self.degrees(direction).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.into_iter().take(k).map(|(w, _)| w).collect()
    }

    /// Same nodes with every arc flipped.
    pub fn reverse(&self) -> Self {
        let adjacency = self
            .adjacency
            .iter()
            .map(|(w, a)| {
                (
                    w.clone(),
                    Adjacency {
                        succ: a.pred.clone(),
                        pred: a.succ.clone(),
                    },
                )
            })
            .collect();
        let mut meta = self.meta.clone();
        meta.reversed = !meta.reversed;
        Self {
            adjacency,
            arc_count: self.arc_count,
            meta,
        }
    }

    /// Set union of nodes and arcs. Both inputs must share child and
    /// speaker unless `allow_mixed` is set.
    pub fn union(&self, other: &Self, allow_mixed: bool) -> Result<Self> {
        if !allow_mixed
            && (self.meta.child_id != other.meta.child_id || self.meta.speaker != other.meta.speaker)
        {
            return Err(Error::IncompatibleProvenance(format!(
                "{}/{} vs {}/{}",
                self.meta.child_id, self.meta.speaker, other.meta.child_id, other.meta.speaker
            )));
        }
        let mut out = self.clone();
        out.extend_from(other);
        out.meta.visits.extend(other.meta.visits.iter().copied());
        out.meta.visits.sort_unstable();
        out.meta.visits.dedup();
        Ok(out)
    }

    /// Adds all nodes and arcs of `other`, leaving metadata alone.
    pub fn extend_from(&mut self, other: &Self) {
        for w in other.nodes() {
            self.add_node(w);
        }
        for (u, v) in other.arcs() {
            self.add_arc(u, v);
        }
    }

    /// Equal node and arc sets, ignoring metadata.
    pub fn same_structure(&self, other: &Self) -> bool {
        self.arc_count == other.arc_count
            && self.adjacency.len() == other.adjacency.len()
            && self
                .adjacency
                .iter()
                .zip(other.adjacency.iter())
                .all(|((w1, a1), (w2, a2))| w1 == w2 && a1.succ == a2.succ)
    }

    /// Induced subgraph on `words` (unknown words are ignored).
    pub fn induced<'a>(&self, words: impl IntoIterator<Item = &'a str>, meta: Provenance) -> Self {
        let keep: BTreeSet<&str> = words.into_iter().filter(|w| self.contains(w)).collect();
        let mut g = Self::new(meta);
        for w in &keep {
            g.add_node(w);
        }
        for w in &keep {
            for v in &self.adjacency[*w].succ {
                if keep.contains(v.as_str()) {
                    g.add_arc(w, v);
                }
            }
        }
        g
    }
}

impl fmt::Display for LexicalNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} nodes, {} arcs ({} {} {})",
            self.node_count(),
            self.arc_count(),
            self.meta.child_id,
            self.meta.speaker,
            self.meta.label
        )
    }
}
