//! Hub and authority weights by mutual reinforcement (HITS).
//!
//! Both vectors start uniform and are updated simultaneously from the
//! previous iterate:
//!
//! ```text
//! authority(v) = sum of hub(u) over arcs u -> v
//! hub(u)       = sum of authority(v) over arcs u -> v
//! ```
//!
//! followed by Euclidean normalization. Updating both from the previous
//! iterate makes the computation on the reversed graph the exact mirror of
//! the computation on the original, so hub and authority swap bit for bit.
//! When the dominant eigenvalue is not simple the even and odd iterates can
//! settle on different vectors of the dominant eigenspace; that two-cycle is
//! detected and resolved by averaging the pair.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LexicalNetwork;
use crate::stages::StageWindow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitsOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HitsOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitsResult {
    /// Node labels in lexicographic order; the weight vectors share it.
    pub nodes: Vec<String>,
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub tolerance: f64,
    /// Even and odd iterates settled on different vectors.
    pub cycled: bool,
    /// Estimated ratio of the second to the first eigenvalue of the
    /// authority matrix; values near 1 mean the ranking is fragile.
    pub spectral_ratio: Option<f64>,
}

/// Spectral ratios above this are reported as a missing spectral gap.
const GAP_WARNING_RATIO: f64 = 1.0 - 1e-6;
const DEFLATION_ITERATIONS: usize = 200;

impl HitsResult {
    fn index(&self, word: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(word)).ok()
    }

    pub fn hub_weight(&self, word: &str) -> Option<f64> {
        self.index(word).map(|i| self.hub[i])
    }

    pub fn authority_weight(&self, word: &str) -> Option<f64> {
        self.index(word).map(|i| self.authority[i])
    }

    pub fn hubs(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.nodes.iter().map(String::as_str).zip(self.hub.iter().copied())
    }

    pub fn authorities(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.nodes.iter().map(String::as_str).zip(self.authority.iter().copied())
    }

    /// Human-readable note when the result depends on the starting vector
    /// or did not converge.
    pub fn spectral_warning(&self) -> Option<String> {
        if !self.converged {
            return Some(format!("did not converge within {} iterations", self.iterations));
        }
        if self.cycled {
            return Some("dominant eigenvalue is not simple (even/odd iterates differ); weights averaged".into());
        }
        match self.spectral_ratio {
            Some(r) if r > GAP_WARNING_RATIO => Some(format!(
                "no spectral gap (second/first eigenvalue ratio {r:.6}); ranking depends on the uniform start"
            )),
            _ => None,
        }
    }
}

struct Adjacency {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Adjacency {
    fn of(g: &LexicalNetwork, nodes: &[String]) -> Self {
        let index = |w: &str| nodes.binary_search_by(|n| n.as_str().cmp(w)).expect("node listed");
        let mut succ = vec![Vec::new(); nodes.len()];
        let mut pred = vec![Vec::new(); nodes.len()];
        // arcs come sorted by (source, target), so both lists end up sorted
        for (u, v) in g.arcs() {
            let (u, v) = (index(u), index(v));
            succ[u].push(v);
            pred[v].push(u);
        }
        Self { succ, pred }
    }

    /// `out[v] = sum of x[u] over arcs u -> v`.
    fn pull_in(&self, x: &[f64], out: &mut [f64]) {
        for (v, preds) in self.pred.iter().enumerate() {
            out[v] = preds.iter().map(|&u| x[u]).sum();
        }
    }

    /// `out[u] = sum of x[v] over arcs u -> v`.
    fn pull_out(&self, x: &[f64], out: &mut [f64]) {
        for (u, succs) in self.succ.iter().enumerate() {
            out[u] = succs.iter().map(|&v| x[v]).sum();
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Computes hub and authority weights.
pub fn hits(g: &LexicalNetwork, options: HitsOptions) -> Result<HitsResult> {
    if g.is_empty() {
        return Err(Error::Undefined("hub/authority weights of an empty network".into()));
    }
    if options.tolerance.is_nan() || options.tolerance <= 0.0 {
        return Err(Error::Config("hits tolerance must be positive".into()));
    }
    let nodes: Vec<String> = g.nodes().map(str::to_string).collect();
    let n = nodes.len();
    if g.arc_count() == 0 {
        return Ok(HitsResult {
            nodes,
            hub: vec![0.0; n],
            authority: vec![0.0; n],
            iterations: 0,
            converged: true,
            tolerance: options.tolerance,
            cycled: false,
            spectral_ratio: None,
        });
    }

    let adj = Adjacency::of(g, &nodes);
    let start = 1.0 / (n as f64).sqrt();
    let mut hub = vec![start; n];
    let mut auth = vec![start; n];
    // iterate two steps back, for cycle detection
    let mut hub_back = hub.clone();
    let mut auth_back = auth.clone();
    let mut next_hub = vec![0.0; n];
    let mut next_auth = vec![0.0; n];

    let mut iterations = 0;
    let mut converged = false;
    let mut cycle_change = f64::INFINITY;
    while iterations < options.max_iterations {
        iterations += 1;
        adj.pull_in(&hub, &mut next_auth);
        adj.pull_out(&auth, &mut next_hub);
        normalize(&mut next_auth);
        normalize(&mut next_hub);

        let change = max_change(&next_hub, &hub).max(max_change(&next_auth, &auth));
        cycle_change = if iterations >= 2 {
            max_change(&next_hub, &hub_back).max(max_change(&next_auth, &auth_back))
        } else {
            f64::INFINITY
        };

        std::mem::swap(&mut hub_back, &mut hub);
        std::mem::swap(&mut auth_back, &mut auth);
        std::mem::swap(&mut hub, &mut next_hub);
        std::mem::swap(&mut auth, &mut next_auth);
        // now: hub/auth = newest, hub_back/auth_back = previous

        if change < options.tolerance {
            converged = true;
            break;
        }
    }

    let mut cycled = false;
    if !converged && cycle_change < options.tolerance {
        // settled into a two-cycle: average the pair
        for (h, prev) in hub.iter_mut().zip(&hub_back) {
            *h += prev;
        }
        for (a, prev) in auth.iter_mut().zip(&auth_back) {
            *a += prev;
        }
        normalize(&mut hub);
        normalize(&mut auth);
        cycled = true;
        converged = true;
    }

    let spectral_ratio = Some(spectral_ratio(&adj, &auth));
    Ok(HitsResult {
        nodes,
        hub,
        authority: auth,
        iterations,
        converged,
        tolerance: options.tolerance,
        cycled,
        spectral_ratio,
    })
}

/// Estimates second/first eigenvalue of `AᵀA` by power iteration deflated
/// against the converged authority vector.
fn spectral_ratio(adj: &Adjacency, authority: &[f64]) -> f64 {
    let n = authority.len();
    let mut tmp = vec![0.0; n];
    let mut y = vec![0.0; n];
    let apply = |x: &[f64], tmp: &mut [f64], y: &mut [f64]| {
        adj.pull_out(x, tmp);
        adj.pull_in(tmp, y);
    };
    apply(authority, &mut tmp, &mut y);
    let first: f64 = authority.iter().zip(&y).map(|(a, b)| a * b).sum();
    if first <= 0.0 {
        return 0.0;
    }

    let deflate = |x: &mut [f64]| {
        let dot: f64 = x.iter().zip(authority).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(authority).for_each(|(v, a)| *v -= dot * a);
    };
    // fixed, non-uniform start so it is not parallel to the authority vector
    let mut x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13 + 1) as f64).collect();
    deflate(&mut x);
    if normalize(&mut x) < 1e-12 {
        return 0.0;
    }
    let mut second = 0.0;
    for _ in 0..DEFLATION_ITERATIONS {
        apply(&x, &mut tmp, &mut y);
        deflate(&mut y);
        second = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        if normalize(&mut y) < 1e-300 {
            return 0.0;
        }
        std::mem::swap(&mut x, &mut y);
    }
    (second / first).clamp(0.0, 1.0)
}

fn top_by(nodes: &[String], weights: &[f64], k: usize, floor: f64) -> Vec<String> {
    let mut ranked: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > floor)
        .collect();
    // stable sort keeps lexicographic node order among equal weights
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.into_iter().take(k).map(|(i, _)| nodes[i].clone()).collect()
}

/// Up to `k` best hubs. Weights at or below the iteration tolerance count
/// as zero and are never listed.
pub fn top_hubs(r: &HitsResult, k: usize) -> Vec<String> {
    top_by(&r.nodes, &r.hub, k, r.tolerance)
}

/// Up to `k` best authorities, with the same rules as [`top_hubs`].
pub fn top_authorities(r: &HitsResult, k: usize) -> Vec<String> {
    top_by(&r.nodes, &r.authority, k, r.tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Hub,
    Authority,
    #[serde(rename = "H&A")]
    HubAndAuthority,
    #[serde(rename = "--")]
    Neither,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Hub => "Hub",
            Status::Authority => "Authority",
            Status::HubAndAuthority => "H&A",
            Status::Neither => "--",
        })
    }
}

pub fn classify_word<S: AsRef<str>>(word: &str, hubs: &[S], authorities: &[S]) -> Status {
    let in_hubs = hubs.iter().any(|h| h.as_ref() == word);
    let in_auths = authorities.iter().any(|a| a.as_ref() == word);
    match (in_hubs, in_auths) {
        (true, true) => Status::HubAndAuthority,
        (true, false) => Status::Hub,
        (false, true) => Status::Authority,
        (false, false) => Status::Neither,
    }
}

/// Status of one word across stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub word: String,
    pub statuses: Vec<(String, Status)>,
}

/// Top-k lists of one stage network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRanking {
    pub label: String,
    pub hubs: Vec<String>,
    pub authorities: Vec<String>,
    pub result: HitsResult,
}

/// Runs HITS on every stage network (concurrently) and keeps the top-k lists.
pub fn rank_stages(
    stage_networks: &[(StageWindow, LexicalNetwork)],
    k: usize,
    options: HitsOptions,
) -> Result<Vec<StageRanking>> {
    stage_networks
        .par_iter()
        .map(|(window, g)| {
            let result = hits(g, options).map_err(|e| match e {
                Error::Undefined(m) => Error::Undefined(format!("stage {}: {m}", window.stage_label)),
                e => e,
            })?;
            Ok(StageRanking {
                label: window.stage_label.clone(),
                hubs: top_hubs(&result, k),
                authorities: top_authorities(&result, k),
                result,
            })
        })
        .collect()
}

/// Classifies each word on every stage, in stage order.
pub fn shift_table<S: AsRef<str>>(
    stage_networks: &[(StageWindow, LexicalNetwork)],
    words: &[S],
    k: usize,
    options: HitsOptions,
) -> Result<Vec<ShiftRecord>> {
    let rankings = rank_stages(stage_networks, k, options)?;
    Ok(shift_records(&rankings, words))
}

pub fn shift_records<S: AsRef<str>>(rankings: &[StageRanking], words: &[S]) -> Vec<ShiftRecord> {
    words
        .iter()
        .map(|w| ShiftRecord {
            word: w.as_ref().to_string(),
            statuses: rankings
                .iter()
                .map(|r| (r.label.clone(), classify_word(w.as_ref(), &r.hubs, &r.authorities)))
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Direction, Provenance};

    fn net(arcs: &[(&str, &str)]) -> LexicalNetwork {
        LexicalNetwork::from_parts(Provenance::default(), std::iter::empty::<&str>(), arcs.iter().copied())
    }

    fn run(g: &LexicalNetwork) -> HitsResult {
        hits(g, HitsOptions::default()).unwrap()
    }

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn single_arc() {
        let g = LexicalNetwork::from_parts(Provenance::default(), ["w"], [("u", "v")]);
        let r = run(&g);
        assert_eq!(r.hub_weight("u"), Some(1.0));
        assert_eq!(r.authority_weight("v"), Some(1.0));
        assert_eq!(r.hub_weight("v"), Some(0.0));
        assert_eq!(r.authority_weight("w"), Some(0.0));
        assert!(r.converged);
        assert_eq!(top_hubs(&r, 10), vec!["u"]);
        assert_eq!(top_authorities(&r, 10), vec!["v"]);
    }

    #[test]
    fn bipartite_fixture() {
        // eigenvector of [[2,1],[1,1]]: (1, (sqrt5-1)/2) normalized
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let big = 1.0 / (1.0 + phi * phi).sqrt();
        let small = phi * big;
        let r = run(&net(&[("h1", "a1"), ("h1", "a2"), ("h2", "a1")]));
        assert!((r.hub_weight("h1").unwrap() - big).abs() < 1e-9);
        assert!((r.hub_weight("h2").unwrap() - small).abs() < 1e-9);
        assert!((r.authority_weight("a1").unwrap() - big).abs() < 1e-9);
        assert!((r.authority_weight("a2").unwrap() - small).abs() < 1e-9);
        assert!((big - 0.8507).abs() < 1e-4 && (small - 0.5257).abs() < 1e-4);
        assert_eq!(top_hubs(&r, 1), vec!["h1"]);
        assert_eq!(top_authorities(&r, 2), vec!["a1", "a2"]);
        assert!(r.spectral_warning().is_none());
    }

    #[test]
    fn arcless_graph_is_all_zero() {
        let g = LexicalNetwork::from_parts(Provenance::default(), ["a", "b"], std::iter::empty());
        let r = run(&g);
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert!(r.hub.iter().chain(&r.authority).all(|&w| w == 0.0));
        assert!(top_hubs(&r, 10).is_empty());
    }

    #[test]
    fn empty_graph_is_error() {
        assert!(hits(&LexicalNetwork::new(Provenance::default()), HitsOptions::default()).is_err());
    }

    #[test]
    fn normalized_vectors() {
        let r = run(&net(&[("a", "b"), ("b", "c"), ("c", "a"), ("a", "c"), ("d", "a")]));
        assert!((norm(&r.hub) - 1.0).abs() < 1e-9);
        assert!((norm(&r.authority) - 1.0).abs() < 1e-9);
        assert!(r.hub.iter().chain(&r.authority).all(|&w| w >= 0.0));
    }

    #[test]
    fn reverse_swaps_weights_exactly() {
        let g = net(&[("a", "b"), ("b", "c"), ("c", "a"), ("a", "c"), ("d", "a"), ("d", "d")]);
        let r = run(&g);
        let rr = run(&g.reverse());
        assert_eq!(r.hub, rr.authority);
        assert_eq!(r.authority, rr.hub);
        assert_eq!(top_hubs(&r, 10), top_authorities(&rr, 10));
    }

    #[test]
    fn degenerate_spectrum_cycles_and_is_reported() {
        // two out-stars of equal strength: x -> {p, q} and {r, s} -> y
        let g = net(&[("x", "p"), ("x", "q"), ("r", "y"), ("s", "y")]);
        let r = run(&g);
        assert!(r.converged);
        assert!(r.cycled);
        assert!(r.spectral_warning().is_some());
        assert!((norm(&r.hub) - 1.0).abs() < 1e-9);
        let rr = run(&g.reverse());
        assert_eq!(r.hub, rr.authority);
    }

    #[test]
    fn tied_components_warn_about_gap() {
        let g = net(&[("a", "b"), ("c", "d")]);
        let r = run(&g);
        assert!(r.converged && !r.cycled);
        assert!(r.spectral_warning().is_some());
        assert_eq!(top_hubs(&r, 10), vec!["a", "c"]);
    }

    #[test]
    fn out_degree_is_not_importance() {
        // a points at three shared authorities, h at four private sinks
        let g = net(&[
            ("a", "b"),
            ("a", "c"),
            ("a", "d"),
            ("e", "b"),
            ("e", "c"),
            ("f", "c"),
            ("f", "d"),
            ("g", "b"),
            ("g", "d"),
            ("i", "b"),
            ("h", "k"),
            ("h", "l"),
            ("h", "m"),
            ("h", "n"),
        ]);
        assert_eq!(g.node_count(), 13);
        let r = run(&g);
        assert!(g.degree("h", Direction::Out).unwrap() > g.degree("a", Direction::Out).unwrap());
        assert!(r.hub_weight("a").unwrap() > r.hub_weight("h").unwrap());
        assert_eq!(top_hubs(&r, 1), vec!["a"]);
    }

    #[test]
    fn classify() {
        let hubs = ["a", "want"];
        let auths = ["a", "the"];
        assert_eq!(classify_word("a", &hubs, &auths), Status::HubAndAuthority);
        assert_eq!(classify_word("want", &hubs, &auths), Status::Hub);
        assert_eq!(classify_word("the", &hubs, &auths), Status::Authority);
        assert_eq!(classify_word("dog", &hubs, &auths), Status::Neither);
        assert_eq!(Status::Neither.to_string(), "--");
        assert_eq!(Status::HubAndAuthority.to_string(), "H&A");
    }

    #[test]
    fn absent_word_is_neither() {
        let range = crate::stages::default_ranges()[0].clone();
        let stages = vec![(StageWindow::new("S1", 0, range, vec![1]), net(&[("u", "v")]))];
        let table = shift_table(&stages, &["a"], 10, HitsOptions::default()).unwrap();
        assert_eq!(table[0].statuses, vec![("S1".to_string(), Status::Neither)]);
    }
}
