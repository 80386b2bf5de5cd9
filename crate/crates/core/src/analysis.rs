//! Derived measures: egonets, growth trajectories, child/mother dyads.

use serde::{Deserialize, Serialize};

use crate::corpus::{session_mlu, Corpus};
use crate::error::{Error, Result};
use crate::graph::{Direction, LexicalNetwork};
use crate::stages::StageWindow;

/// Which neighbours of the center an egonet includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighborhood {
    #[default]
    Both,
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgonetView {
    pub center: String,
    pub network: LexicalNetwork,
}

/// Induced subgraph on `word` and its immediate neighbours.
pub fn egonet(g: &LexicalNetwork, word: &str, neighborhood: Neighborhood) -> Result<EgonetView> {
    let mut members = vec![word];
    if neighborhood != Neighborhood::Out {
        members.extend(g.predecessors(word)?);
    }
    if neighborhood != Neighborhood::In {
        members.extend(g.successors(word)?);
    }
    let mut meta = g.meta.clone();
    meta.label = format!("{} egonet {word}", g.meta.label).trim().to_string();
    Ok(EgonetView {
        center: word.to_string(),
        network: g.induced(members, meta),
    })
}

/// Size and connectivity of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub label: String,
    pub size: usize,
    pub arcs: usize,
    pub average_degree: f64,
}

impl GrowthPoint {
    /// Empty networks report an average degree of 0.
    pub fn of(label: &str, g: &LexicalNetwork) -> Self {
        Self {
            label: label.to_string(),
            size: g.node_count(),
            arcs: g.arc_count(),
            average_degree: g.average_degree().unwrap_or(0.0),
        }
    }
}

pub fn growth_trajectory<'a, S: AsRef<str> + 'a>(
    networks: impl IntoIterator<Item = &'a (S, LexicalNetwork)>,
) -> Vec<GrowthPoint> {
    networks
        .into_iter()
        .map(|(label, g)| GrowthPoint::of(label.as_ref(), g))
        .collect()
}

/// Mother minus child at one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthDelta {
    pub size: i64,
    pub average_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadReport {
    pub stage_labels: Vec<String>,
    pub child_points: Vec<GrowthPoint>,
    pub mother_points: Vec<GrowthPoint>,
    pub deltas: Vec<GrowthDelta>,
}

pub fn dyad_compare(
    child: &[(StageWindow, LexicalNetwork)],
    mother: &[(StageWindow, LexicalNetwork)],
) -> Result<DyadReport> {
    let labels = |s: &[(StageWindow, LexicalNetwork)]| -> Vec<String> {
        s.iter().map(|(w, _)| w.stage_label.clone()).collect()
    };
    let stage_labels = labels(child);
    if stage_labels != labels(mother) {
        return Err(Error::Misaligned(format!(
            "child stages {:?} vs mother stages {:?}",
            stage_labels,
            labels(mother)
        )));
    }
    let points = |s: &[(StageWindow, LexicalNetwork)]| -> Vec<GrowthPoint> {
        s.iter().map(|(w, g)| GrowthPoint::of(&w.stage_label, g)).collect()
    };
    let child_points = points(child);
    let mother_points = points(mother);
    let deltas = child_points
        .iter()
        .zip(&mother_points)
        .map(|(c, m)| GrowthDelta {
            size: m.size as i64 - c.size as i64,
            average_degree: m.average_degree - c.average_degree,
        })
        .collect();
    Ok(DyadReport {
        stage_labels,
        child_points,
        mother_points,
        deltas,
    })
}

/// Highest in- and out-degree nodes, side by side. Nodes of degree zero
/// in a direction are left out of that list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub in_degree: Vec<(String, usize)>,
    pub out_degree: Vec<(String, usize)>,
}

pub fn top_degree_report(g: &LexicalNetwork, k: usize) -> Result<DegreeReport> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let list = |direction| -> Result<Vec<(String, usize)>> {
        g.top_k_by_degree(k, direction)
            .into_iter()
            .map(|w| Ok((w.to_string(), g.degree(w, direction)?)))
            .filter(|r| !matches!(r, Ok((_, 0))))
            .collect()
    };
    Ok(DegreeReport {
        in_degree: list(Direction::In)?,
        out_degree: list(Direction::Out)?,
    })
}

/// Data behind one stage network: files, utterances, morphemes, MLU, size
/// and average degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub label: String,
    pub files: usize,
    pub utterances: u64,
    pub morphemes: u64,
    pub mlu: Option<f64>,
    pub size: usize,
    pub average_degree: f64,
}

pub fn stage_rows(
    corpus: &Corpus,
    stage_networks: &[(StageWindow, LexicalNetwork)],
    speaker: &str,
) -> Vec<StageRow> {
    stage_networks
        .iter()
        .map(|(w, g)| {
            let sessions = w.file_indices.iter().filter_map(|&v| corpus.session(v));
            let mlu = session_mlu(sessions, speaker).ok();
            StageRow {
                label: w.stage_label.clone(),
                files: w.file_indices.len(),
                utterances: mlu.map_or(0, |m| m.utterances),
                morphemes: mlu.map_or(0, |m| m.morphemes),
                mlu: mlu.map(|m| m.value()),
                size: g.node_count(),
                average_degree: g.average_degree().unwrap_or(0.0),
            }
        })
        .collect()
}
