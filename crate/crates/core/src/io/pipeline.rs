//! Corpus loading and the end-to-end run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{dyad_compare, growth_trajectory, stage_rows, top_degree_report};
use crate::builder::{accumulative_series, build_stage_networks};
use crate::centrality::{rank_stages, shift_records, StageRanking};
use crate::corpus::{parse_session, session_mlu, Corpus, IngestConfig, Session, SessionSource};
use crate::error::{Error, Result};
use crate::graph::LexicalNetwork;
use crate::io::config::RunConfig;
use crate::io::pajek::export_pajek;
use crate::io::table::{
    degree_table, dyad_table, format_number, growth_table, shift_csv_table, stage_rows_table, Table,
};
use crate::stages::{plan_stages, session_stages, stage_name, StagePlan, StageWindow};

const TRANSCRIPT_EXTENSION: &str = "cha";

/// Transcript files named by `inputs`: files as given, directories
/// expanded to their `.cha` files. Sorted, duplicates removed.
pub fn transcript_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for input in inputs {
        let meta = fs::metadata(input).map_err(|source| Error::Read {
            path: input.clone(),
            source,
        })?;
        if meta.is_dir() {
            let entries = fs::read_dir(input).map_err(|source| Error::Read {
                path: input.clone(),
                source,
            })?;
            for entry in entries {
                let path = entry
                    .map_err(|source| Error::Read {
                        path: input.clone(),
                        source,
                    })?
                    .path();
                if path.is_file() && path.extension().is_some_and(|e| e == TRANSCRIPT_EXTENSION) {
                    paths.push(path);
                }
            }
        } else {
            paths.push(input.clone());
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(Error::Input("no transcript files found".into()));
    }
    Ok(paths)
}

/// Last run of digits in the file stem (`joel07a.cha` → 7).
fn visit_number(path: &Path) -> Option<usize> {
    let stem = path.file_stem()?.to_str()?;
    let end = stem.rfind(|c: char| c.is_ascii_digit())? + 1;
    let start = stem[..end]
        .rfind(|c: char| !c.is_ascii_digit())
        .map_or(0, |i| i + 1);
    stem[start..end].parse().ok()
}

/// Parses every transcript and groups sessions into one corpus per child.
///
/// Visit indices come from the digits in the file names when every file of
/// a child has a distinct nonzero number; otherwise files are numbered
/// 1, 2, ... in path order.
pub fn load_corpora(inputs: &[PathBuf], ingest: &IngestConfig) -> Result<Vec<Corpus>> {
    let paths = transcript_paths(inputs)?;
    let sessions: Vec<(PathBuf, Session)> = paths
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|source| Error::Read {
                path: path.clone(),
                source,
            })?;
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Input(format!("{} is not valid UTF-8", path.display())))?;
            let source = SessionSource::new(path.display().to_string(), 1);
            Ok((path.clone(), parse_session(&text, &source, ingest)?))
        })
        .collect::<Result<_>>()?;

    let mut by_child: BTreeMap<String, Vec<(PathBuf, Session)>> = BTreeMap::new();
    for (path, session) in sessions {
        by_child.entry(session.child_id.clone()).or_default().push((path, session));
    }

    by_child
        .into_iter()
        .map(|(child, mut files)| {
            let numbers: Option<Vec<usize>> = files.iter().map(|(p, _)| visit_number(p).filter(|&n| n > 0)).collect();
            let distinct = numbers.as_ref().is_some_and(|ns| {
                let mut sorted = ns.clone();
                sorted.sort_unstable();
                sorted.windows(2).all(|w| w[0] != w[1])
            });
            for (i, (_, session)) in files.iter_mut().enumerate() {
                session.visit_index = match (&numbers, distinct) {
                    (Some(ns), true) => ns[i],
                    _ => i + 1,
                };
            }
            Corpus::new(child, files.into_iter().map(|(_, s)| s).collect())
        })
        .collect()
}

/// Reads pinned stage plans, keyed by child id.
pub fn load_stage_plans(paths: &[PathBuf]) -> Result<BTreeMap<String, StagePlan>> {
    let mut plans = BTreeMap::new();
    for path in paths {
        let text = fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.clone(),
            source,
        })?;
        let plan = StagePlan::from_table(&text)?;
        if plans.insert(plan.child_id.clone(), plan).is_some() {
            return Err(Error::Config(format!("two stage plans for the same child ({})", path.display())));
        }
    }
    Ok(plans)
}

/// Per-visit MLU of both speakers, with the child's stage.
pub fn mlu_table(corpus: &Corpus, config: &RunConfig) -> Result<Table> {
    let stages = session_stages(corpus, &config.child_speaker, &config.plan_options())?;
    let mut t = Table::new(&["visit", "source", "speaker", "utterances", "morphemes", "mlu", "basis", "stage"]);
    for (session, labeled) in corpus.sessions.iter().zip(&stages) {
        let stage = labeled.stage.map(stage_name).unwrap_or_default();
        for speaker in [&config.child_speaker, &config.mother_speaker] {
            let (u, m, v, basis) = match session_mlu([session], speaker) {
                Ok(mlu) => (
                    mlu.utterances.to_string(),
                    mlu.morphemes.to_string(),
                    format_number(mlu.value()),
                    if mlu.word_based { "word" } else { "mor" },
                ),
                Err(_) => ("0".into(), "0".into(), String::new(), ""),
            };
            t.push(vec![
                session.visit_index.to_string(),
                session.source_name.clone(),
                speaker.clone(),
                u,
                m,
                v,
                basis.to_string(),
                stage.clone(),
            ]);
        }
    }
    Ok(t)
}

/// Accumulative networks labeled by visit.
pub fn accumulative_growth(corpus: &Corpus, speaker: &str, config: &RunConfig) -> Table {
    let series: Vec<(String, LexicalNetwork)> = accumulative_series(corpus, speaker, config.build_options())
        .into_iter()
        .map(|g| (g.meta.visits.last().map_or(String::new(), |v| v.to_string()), g))
        .collect();
    growth_table(&growth_trajectory(&series))
}

#[derive(Serialize)]
struct WeightedWord<'a> {
    word: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct StageHits<'a> {
    label: &'a str,
    files: &'a [usize],
    nodes: usize,
    arcs: usize,
    iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
    hubs: Vec<WeightedWord<'a>>,
    authorities: Vec<WeightedWord<'a>>,
}

#[derive(Serialize)]
struct HitsReport<'a> {
    child: &'a str,
    speaker: &'a str,
    k: usize,
    tolerance: f64,
    stages: Vec<StageHits<'a>>,
}

/// Top-k hubs and authorities of every stage as pretty JSON.
pub fn hits_json(
    child: &str,
    speaker: &str,
    k: usize,
    tolerance: f64,
    stages: &[(StageWindow, LexicalNetwork)],
    rankings: &[StageRanking],
) -> String {
    fn weighted<'a>(words: &'a [String], weight: impl Fn(&str) -> Option<f64>) -> Vec<WeightedWord<'a>> {
        words
            .iter()
            .map(|w| WeightedWord {
                word: w,
                weight: weight(w).unwrap_or(0.0),
            })
            .collect()
    }
    let report = HitsReport {
        child,
        speaker,
        k,
        tolerance,
        stages: stages
            .iter()
            .zip(rankings)
            .map(|((window, g), r)| StageHits {
                label: &r.label,
                files: &window.file_indices,
                nodes: g.node_count(),
                arcs: g.arc_count(),
                iterations: r.result.iterations,
                converged: r.result.converged,
                warning: r.result.spectral_warning(),
                hubs: weighted(&r.hubs, |w| r.result.hub_weight(w)),
                authorities: weighted(&r.authorities, |w| r.result.authority_weight(w)),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
    out.push('\n');
    out
}

/// File-name-safe version of a stage label (`early S4` → `early_S4`).
pub fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// What one child's run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildSummary {
    pub child_id: String,
    pub sessions: usize,
    pub windows: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| Error::Write {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, contents).map_err(|source| Error::Write {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

fn require_speaker(corpus: &Corpus, speaker: &str) -> Result<()> {
    session_mlu(&corpus.sessions, speaker).map(|_| ()).map_err(|_| {
        Error::Input(format!(
            "child {}: no spontaneous utterances for speaker {speaker}",
            corpus.child_id
        ))
    })
}

/// Runs every analysis for one child and writes the artifacts under
/// `<output_dir>/<child_id>/`.
pub fn run_child(corpus: &Corpus, config: &RunConfig, pinned: Option<&StagePlan>) -> Result<ChildSummary> {
    let dir = config.output_dir.join(file_label(&corpus.child_id));
    let mut written = Vec::new();
    let child = config.child_speaker.as_str();
    let mother = config.mother_speaker.as_str();
    require_speaker(corpus, child)?;
    require_speaker(corpus, mother)?;

    let dump: String = corpus.sessions.iter().map(Session::dump).collect();
    write(&dir, "sessions.tsv", &dump, &mut written)?;
    write(&dir, "mlu.csv", &mlu_table(corpus, config)?.to_csv(), &mut written)?;

    let plan = match pinned {
        Some(plan) => plan.clone(),
        None => plan_stages(corpus, child, &config.plan_options())?,
    };
    write(&dir, "stage_plan.tsv", &plan.to_table(), &mut written)?;
    let labels: Vec<String> = plan.windows.iter().map(|w| w.stage_label.clone()).collect();

    let mut warnings: Vec<String> = corpus
        .sessions
        .iter()
        .flat_map(|s| s.warnings.iter().map(move |w| format!("{}: {w}", s.source_name)))
        .collect();

    let mut per_speaker = Vec::new();
    for speaker in [child, mother] {
        write(
            &dir,
            &format!("growth_{speaker}.csv"),
            &accumulative_growth(corpus, speaker, config).to_csv(),
            &mut written,
        )?;

        let stages = build_stage_networks(corpus, &plan, speaker, config.build_options())?;
        for (window, g) in &stages {
            write(
                &dir,
                &format!("networks/{speaker}_{}.net", file_label(&window.stage_label)),
                &export_pajek(g),
                &mut written,
            )?;
        }
        write(
            &dir,
            &format!("stages_{speaker}.csv"),
            &stage_rows_table(&stage_rows(corpus, &stages, speaker)).to_csv(),
            &mut written,
        )?;

        let degrees = stages
            .iter()
            .map(|(w, g)| Ok((w.stage_label.clone(), top_degree_report(g, config.k)?)))
            .collect::<Result<Vec<_>>>()?;
        write(&dir, &format!("degrees_{speaker}.csv"), &degree_table(&degrees).to_csv(), &mut written)?;

        let rankings = rank_stages(&stages, config.k, config.hits_options()).map_err(|e| match e {
            Error::Undefined(m) => Error::Input(format!("child {} speaker {speaker}: {m}", corpus.child_id)),
            e => e,
        })?;
        for r in &rankings {
            if let Some(w) = r.result.spectral_warning() {
                warnings.push(format!("{speaker} {}: {w}", r.label));
            }
        }
        write(
            &dir,
            &format!("hits_{speaker}.json"),
            &hits_json(&corpus.child_id, speaker, config.k, config.hits_tolerance, &stages, &rankings),
            &mut written,
        )?;
        let shifts = shift_records(&rankings, &config.shift_words);
        write(
            &dir,
            &format!("shift_{speaker}.csv"),
            &shift_csv_table(&labels, &shifts).to_csv(),
            &mut written,
        )?;
        per_speaker.push(stages);
    }

    let dyad = dyad_compare(&per_speaker[0], &per_speaker[1])?;
    write(&dir, "dyad.csv", &dyad_table(&dyad).to_csv(), &mut written)?;

    let mut notes = warnings.join("\n");
    if !notes.is_empty() {
        notes.push('\n');
    }
    write(&dir, "warnings.txt", &notes, &mut written)?;

    Ok(ChildSummary {
        child_id: corpus.child_id.clone(),
        sessions: corpus.sessions.len(),
        windows: labels,
        files: written,
    })
}

/// Loads every input, then processes children concurrently.
pub fn run_pipeline(config: &RunConfig) -> Result<Vec<ChildSummary>> {
    config.validate()?;
    if config.inputs.is_empty() {
        return Err(Error::Config("no inputs given".into()));
    }
    let corpora = load_corpora(&config.inputs, &config.ingest())?;
    let plans = load_stage_plans(&config.stage_plans)?;
    corpora
        .par_iter()
        .map(|corpus| run_child(corpus, config, plans.get(&corpus.child_id)))
        .collect()
}
