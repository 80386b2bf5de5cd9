#![allow(dead_code)]

use lexnet::corpus::{parse_session, Corpus, IngestConfig, SessionSource};
use lexnet::graph::{LexicalNetwork, Provenance};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

pub const BIRTHDAY: &str = "\
@Begin
@Participants:\tCHI Joel Target_Child, MOT Mother
*MOT:\twhat would you like for your birthday ?
*MOT:\twould you like a train ?
*MOT:\tJoel ?
*CHI:\tyes .
*CHI:\toh .
*CHI:\tI'd like a elephant .
*CHI:\tno .
*CHI:\tand lion .
@End
";

const VOCAB: &[&str] = &[
    "a", "the", "dog", "Dog", "cat", "go", "gone", "no", "more", "ball", "want", "see", "I'd", "choo+choo", "it's",
    "teddy", "up", "down",
];
const MARKERS: &[&str] = &["", "", "", "", " [+ imit]", " [+ SR]", " [+ PI]"];
const TERMINATORS: &[&str] = &[".", "?", "!"];

/// Random CHAT-lite transcript for one visit.
pub fn random_transcript<R: Rng>(rng: &mut R, child: &str, max_utterances: usize) -> String {
    let mut text = format!("@Begin\n@Participants:\tCHI {child} Target_Child, MOT Mother\n");
    for _ in 0..rng.gen_range(0..=max_utterances) {
        let speaker = if rng.gen_bool(0.5) { "CHI" } else { "MOT" };
        let words: Vec<&str> = (0..rng.gen_range(0..6)).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect();
        let marker = MARKERS[rng.gen_range(0..MARKERS.len())];
        let end = TERMINATORS[rng.gen_range(0..TERMINATORS.len())];
        text.push_str(&format!("*{speaker}:\t{} {end}{marker}\n", words.join(" ")));
    }
    text.push_str("@End\n");
    text
}

pub fn random_corpus<R: Rng>(rng: &mut R, max_files: usize, max_utterances: usize) -> Corpus {
    let cfg = IngestConfig::default();
    let files = rng.gen_range(1..=max_files);
    let sessions = (1..=files)
        .map(|v| {
            let text = random_transcript(rng, "Kid", max_utterances);
            parse_session(&text, &SessionSource::new(format!("kid{v:02}.cha"), v), &cfg).unwrap()
        })
        .collect();
    Corpus::new("kid", sessions).unwrap()
}

/// Random digraph on `n0 .. n{k-1}`, self-loops included.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize, density: f64) -> LexicalNetwork {
    let n = rng.gen_range(1..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut arcs = Vec::new();
    for u in &names {
        for v in &names {
            if rng.gen_bool(density) {
                arcs.push((u.clone(), v.clone()));
            }
        }
    }
    LexicalNetwork::from_parts(Provenance::default(), names.clone(), arcs)
}

pub fn net(arcs: &[(&str, &str)]) -> LexicalNetwork {
    LexicalNetwork::from_parts(Provenance::default(), std::iter::empty::<&str>(), arcs.iter().copied())
}

/// Dense adjacency matrix in lexicographic node order.
pub fn adjacency(g: &LexicalNetwork) -> (Vec<String>, DMatrix<f64>) {
    let nodes: Vec<String> = g.nodes().map(str::to_string).collect();
    let index = |w: &str| nodes.iter().position(|n| n == w).unwrap();
    let mut a = DMatrix::zeros(nodes.len(), nodes.len());
    for (u, v) in g.arcs() {
        a[(index(u), index(v))] = 1.0;
    }
    (nodes, a)
}

/// Ratio of the second to the first eigenvalue of a symmetric PSD matrix,
/// or `None` when the matrix is zero.
pub fn eigen_ratio(m: &DMatrix<f64>) -> Option<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let first = values[0];
    if first <= 1e-12 {
        return None;
    }
    Some(values.get(1).copied().unwrap_or(0.0).max(0.0) / first)
}

/// Dominant eigenvector of `m` by dense power iteration from the uniform
/// vector, L2-normalized. Stops once an iterate moves less than 1e-14.
pub fn power_vector(m: &DMatrix<f64>, max_iterations: usize) -> DVector<f64> {
    let n = m.nrows();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..max_iterations {
        let y = m * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return y;
        }
        let y = y / norm;
        let moved = (&y - &x).amax();
        x = y;
        if moved < 1e-14 {
            break;
        }
    }
    x
}

/// Hub and authority vectors of `g` from dense matrices:
/// dominant eigenvectors of `A Aᵀ` and `Aᵀ A`.
pub struct DenseHits {
    pub nodes: Vec<String>,
    pub hub: DVector<f64>,
    pub authority: DVector<f64>,
    pub ratio: Option<f64>,
}

pub fn dense_hits(g: &LexicalNetwork) -> DenseHits {
    let (nodes, a) = adjacency(g);
    let hub_matrix = &a * a.transpose();
    let authority_matrix = a.transpose() * &a;
    DenseHits {
        nodes,
        ratio: eigen_ratio(&authority_matrix),
        hub: power_vector(&hub_matrix, 100_000),
        authority: power_vector(&authority_matrix, 100_000),
    }
}

/// Top-k by weight, ties by label; weights at or below `floor` left out.
pub fn dense_top(nodes: &[String], weights: &DVector<f64>, k: usize, floor: f64) -> Vec<String> {
    let mut ranked: Vec<(&String, f64)> = nodes.iter().zip(weights.iter().copied()).filter(|(_, w)| *w > floor).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(n, _)| n.clone()).collect()
}

/// Minimal reader for the `*Vertices` / `*Arcs` subset, independent of
/// the exporter.
pub fn read_pajek(text: &str) -> Result<LexicalNetwork, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let count: usize = header
        .strip_prefix("*Vertices ")
        .ok_or_else(|| format!("bad header {header:?}"))?
        .trim()
        .parse()
        .map_err(|e| format!("bad vertex count: {e}"))?;
    let mut labels = Vec::with_capacity(count);
    for i in 1..=count {
        let line = lines.next().ok_or("missing vertex line")?;
        let (number, rest) = line.split_once(' ').ok_or_else(|| format!("bad vertex line {line:?}"))?;
        if number.parse::<usize>() != Ok(i) {
            return Err(format!("vertex {i} numbered {number}"));
        }
        let quoted = rest
            .strip_prefix('"')
            .and_then(|r| r.strip_suffix('"'))
            .ok_or_else(|| format!("unquoted label {rest:?}"))?;
        labels.push(quoted.replace("\"\"", "\""));
    }
    if lines.next() != Some("*Arcs") {
        return Err("missing *Arcs".into());
    }
    let mut arcs = Vec::new();
    for line in lines {
        let mut parts = line.split(' ');
        let mut end = || -> Result<usize, String> {
            let i: usize = parts.next().ok_or("short arc line")?.parse().map_err(|_| format!("bad arc {line:?}"))?;
            if i == 0 || i > count {
                return Err(format!("arc endpoint {i} out of range"));
            }
            Ok(i - 1)
        };
        let (u, v) = (end()?, end()?);
        arcs.push((labels[u].clone(), labels[v].clone()));
    }
    Ok(LexicalNetwork::from_parts(Provenance::default(), labels, arcs))
}
