use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lexnet::analysis::{egonet, growth_trajectory, stage_rows, Neighborhood};
use lexnet::builder::{accumulative_series, build_stage_networks};
use lexnet::centrality::{rank_stages, shift_records};
use lexnet::corpus::{Corpus, Session};
use lexnet::graph::LexicalNetwork;
use lexnet::io::pipeline::{hits_json, load_stage_plans, mlu_table};
use lexnet::io::table::{growth_table, shift_csv_table, stage_rows_table};
use lexnet::io::{export_pajek, load_corpora, run_pipeline, RunConfig, Table};
use lexnet::stages::{plan_stages, MluRange, Placement, StagePlan};
use lexnet::{Error, Result};

/// Word-collocation networks from child/caretaker CHAT transcripts.
#[derive(Parser)]
#[command(name = "lexnet", version)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; flags below override its keys.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[arg(long, global = true)]
    child_speaker: Option<String>,

    #[arg(long, global = true)]
    mother_speaker: Option<String>,

    /// MLU stage range such as "(1.5,2]"; repeat for several stages.
    #[arg(long = "mlu-range", global = true)]
    mlu_ranges: Vec<String>,

    #[arg(long, global = true)]
    window_size: Option<usize>,

    #[arg(long, global = true)]
    split_threshold: Option<usize>,

    #[arg(long, global = true)]
    placement: Option<String>,

    #[arg(long, global = true)]
    smoothing: Option<usize>,

    /// Drop arcs from a word to itself.
    #[arg(long, global = true)]
    no_self_loops: bool,

    /// Length of the top hub, authority and degree lists.
    #[arg(long, short, global = true)]
    k: Option<usize>,

    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[arg(long, global = true)]
    max_iterations: Option<usize>,

    /// Pinned stage_plan.tsv; repeat for several children.
    #[arg(long = "stage-plan", global = true)]
    stage_plans: Vec<PathBuf>,

    /// Restrict to one child when the inputs hold several.
    #[arg(long, global = true)]
    child: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildMode {
    Accumulative,
    Stage,
}

#[derive(Clone, Copy, ValueEnum)]
enum Who {
    Child,
    Mother,
}

#[derive(Clone, Copy, ValueEnum)]
enum Hood {
    Both,
    In,
    Out,
}

#[derive(Args)]
struct Inputs {
    /// Transcript files or directories of .cha files.
    inputs: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normalized utterances, one per line.
    Ingest(Inputs),
    /// Per-visit MLU of child and mother, with the child's stage.
    Mlu(Inputs),
    /// Network size and average degree per visit or per stage.
    Build {
        #[arg(long, value_enum, default_value = "accumulative")]
        mode: BuildMode,
        #[arg(long, value_enum, default_value = "child")]
        speaker: Who,
        /// Also write one Pajek file per network here.
        #[arg(long)]
        net_dir: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Top hubs and authorities of every stage network, as JSON.
    Hits {
        #[arg(long, value_enum, default_value = "child")]
        speaker: Who,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Egonet of one word, as Pajek.
    Egonet {
        #[arg(long)]
        word: String,
        #[arg(long, value_enum, default_value = "child")]
        speaker: Who,
        /// Stage label; without it the network of all visits is used.
        #[arg(long)]
        stage: Option<String>,
        #[arg(long, value_enum, default_value = "both")]
        neighborhood: Hood,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Hub/authority status of words across stages.
    Shift {
        #[arg(long, value_enum, default_value = "child")]
        speaker: Who,
        /// Comma-separated words; defaults to the configured shift words.
        #[arg(long, value_delimiter = ',')]
        words: Vec<String>,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Run every analysis and write all artifacts to the output directory.
    Report(Inputs),
    /// One network as Pajek.
    Export {
        #[arg(long, value_enum, default_value = "child")]
        speaker: Who,
        /// Stage label; without it the accumulative network is exported.
        #[arg(long)]
        stage: Option<String>,
        /// Last visit of the accumulative network (default: all visits).
        #[arg(long, conflicts_with = "stage")]
        visit: Option<usize>,
        #[command(flatten)]
        inputs: Inputs,
    },
}

impl Command {
    fn inputs(&self) -> &[PathBuf] {
        match self {
            Command::Ingest(i) | Command::Mlu(i) | Command::Report(i) => &i.inputs,
            Command::Build { inputs, .. }
            | Command::Hits { inputs, .. }
            | Command::Egonet { inputs, .. }
            | Command::Shift { inputs, .. }
            | Command::Export { inputs, .. } => &inputs.inputs,
        }
    }
}

fn load_config(global: &Global, inputs: &[PathBuf]) -> Result<RunConfig> {
    let mut config = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if !inputs.is_empty() {
        config.inputs = inputs.to_vec();
    }
    if let Some(dir) = &global.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(s) = &global.child_speaker {
        config.child_speaker = s.clone();
    }
    if let Some(s) = &global.mother_speaker {
        config.mother_speaker = s.clone();
    }
    if !global.mlu_ranges.is_empty() {
        config.mlu_ranges = global
            .mlu_ranges
            .iter()
            .map(|r| r.parse::<MluRange>())
            .collect::<Result<_>>()?;
    }
    if let Some(n) = global.window_size {
        config.window_size = n;
    }
    if let Some(n) = global.split_threshold {
        config.split_threshold = Some(n);
    }
    if let Some(p) = &global.placement {
        config.window_placement = p.parse::<Placement>()?;
    }
    if let Some(n) = global.smoothing {
        config.smoothing = n;
    }
    if global.no_self_loops {
        config.self_loops = false;
    }
    if let Some(k) = global.k {
        config.k = k;
    }
    if let Some(t) = global.tolerance {
        config.hits_tolerance = t;
    }
    if let Some(n) = global.max_iterations {
        config.hits_max_iterations = n;
    }
    config.stage_plans.extend(global.stage_plans.iter().cloned());
    config.validate()?;
    if config.inputs.is_empty() {
        return Err(Error::Config("no inputs given".into()));
    }
    Ok(config)
}

struct Context {
    config: RunConfig,
    corpora: Vec<Corpus>,
    plans: BTreeMap<String, StagePlan>,
}

impl Context {
    fn load(global: &Global, inputs: &[PathBuf]) -> Result<Self> {
        let config = load_config(global, inputs)?;
        let mut corpora = load_corpora(&config.inputs, &config.ingest())?;
        if let Some(child) = &global.child {
            corpora.retain(|c| &c.child_id == child);
            if corpora.is_empty() {
                return Err(Error::Input(format!("no transcripts for child {child}")));
            }
        }
        let plans = load_stage_plans(&config.stage_plans)?;
        Ok(Self { config, corpora, plans })
    }

    fn single(&self) -> Result<&Corpus> {
        match self.corpora.as_slice() {
            [one] => Ok(one),
            many => Err(Error::Input(format!(
                "inputs hold {} children ({}); choose one with --child",
                many.len(),
                many.iter().map(|c| c.child_id.as_str()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    fn speaker(&self, who: Who) -> &str {
        match who {
            Who::Child => &self.config.child_speaker,
            Who::Mother => &self.config.mother_speaker,
        }
    }

    fn plan(&self, corpus: &Corpus) -> Result<StagePlan> {
        match self.plans.get(&corpus.child_id) {
            Some(plan) => Ok(plan.clone()),
            None => plan_stages(corpus, &self.config.child_speaker, &self.config.plan_options()),
        }
    }

    fn stage_network(&self, corpus: &Corpus, who: Who, label: &str) -> Result<LexicalNetwork> {
        let plan = self.plan(corpus)?;
        let stages = build_stage_networks(corpus, &plan, self.speaker(who), self.config.build_options())?;
        let known: Vec<&str> = stages.iter().map(|(w, _)| w.stage_label.as_str()).collect();
        stages
            .iter()
            .find(|(w, _)| w.stage_label == label)
            .map(|(_, g)| g.clone())
            .ok_or_else(|| match known.as_slice() {
                [] => Error::Input(format!("no stage {label:?}; child {} has no stage windows", corpus.child_id)),
                _ => Error::Input(format!("no stage {label:?}; stages are {}", known.join(", "))),
            })
    }

    fn accumulated(&self, corpus: &Corpus, who: Who, visit: Option<usize>) -> Result<LexicalNetwork> {
        let series = accumulative_series(corpus, self.speaker(who), self.config.build_options());
        let found = match visit {
            None => series.last(),
            Some(v) => series.iter().find(|g| g.meta.visits.last() == Some(&v)),
        };
        found
            .cloned()
            .ok_or_else(|| Error::Input(format!("child {} has no visit {}", corpus.child_id, visit.unwrap_or(0))))
    }
}

/// Concatenates per-child tables under a leading `child` column.
fn with_child(tables: Vec<(String, Table)>) -> Table {
    let mut out = Table::default();
    for (child, t) in tables {
        if out.header.is_empty() {
            out.header = std::iter::once("child".to_string()).chain(t.header).collect();
        }
        for row in t.rows {
            out.rows.push(std::iter::once(child.clone()).chain(row).collect());
        }
    }
    out
}

fn run(cli: Cli) -> Result<String> {
    let global = &cli.global;
    if let Command::Report(_) = cli.command {
        let config = load_config(global, cli.command.inputs())?;
        let summaries = run_pipeline(&config)?;
        let mut out = String::new();
        for s in summaries {
            out.push_str(&format!(
                "{}: {} sessions, stages [{}], {} files under {}\n",
                s.child_id,
                s.sessions,
                s.windows.join(", "),
                s.files.len(),
                config.output_dir.join(&s.child_id).display()
            ));
        }
        return Ok(out);
    }

    let cx = Context::load(global, cli.command.inputs())?;
    match &cli.command {
        Command::Ingest(_) => {
            let mut out = String::new();
            for c in &cx.corpora {
                for line in c.sessions.iter().map(Session::dump).collect::<String>().lines() {
                    out.push_str(&format!("{}\t{line}\n", c.child_id));
                }
            }
            Ok(out)
        }
        Command::Mlu(_) => {
            let tables = cx
                .corpora
                .iter()
                .map(|c| Ok((c.child_id.clone(), mlu_table(c, &cx.config)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(with_child(tables).to_csv())
        }
        Command::Build {
            mode, speaker, net_dir, ..
        } => {
            let spk = cx.speaker(*speaker);
            let mut tables = Vec::new();
            for c in &cx.corpora {
                let networks: Vec<(String, LexicalNetwork)> = match mode {
                    BuildMode::Accumulative => {
                        let series = accumulative_series(c, spk, cx.config.build_options());
                        tables.push((
                            c.child_id.clone(),
                            growth_table(&growth_trajectory(
                                &series
                                    .iter()
                                    .map(|g| (g.meta.visits.last().map_or(String::new(), |v| v.to_string()), g.clone()))
                                    .collect::<Vec<_>>(),
                            )),
                        ));
                        series.into_iter().map(|g| (g.meta.label.clone(), g)).collect()
                    }
                    BuildMode::Stage => {
                        let stages = build_stage_networks(c, &cx.plan(c)?, spk, cx.config.build_options())?;
                        tables.push((c.child_id.clone(), stage_rows_table(&stage_rows(c, &stages, spk))));
                        stages.into_iter().map(|(w, g)| (w.stage_label, g)).collect()
                    }
                };
                if let Some(dir) = net_dir {
                    let dir = dir.join(lexnet::io::pipeline::file_label(&c.child_id));
                    std::fs::create_dir_all(&dir).map_err(|source| Error::Write {
                        path: dir.clone(),
                        source,
                    })?;
                    for (label, g) in &networks {
                        let path = dir.join(format!("{spk}_{}.net", lexnet::io::pipeline::file_label(label)));
                        std::fs::write(&path, export_pajek(g)).map_err(|source| Error::Write { path, source })?;
                    }
                }
            }
            Ok(with_child(tables).to_csv())
        }
        Command::Hits { speaker, .. } => {
            let c = cx.single()?;
            let spk = cx.speaker(*speaker);
            let stages = build_stage_networks(c, &cx.plan(c)?, spk, cx.config.build_options())?;
            let rankings = rank_stages(&stages, cx.config.k, cx.config.hits_options())?;
            Ok(hits_json(&c.child_id, spk, cx.config.k, cx.config.hits_tolerance, &stages, &rankings))
        }
        Command::Egonet {
            word,
            speaker,
            stage,
            neighborhood,
            ..
        } => {
            let c = cx.single()?;
            let g = match stage {
                Some(label) => cx.stage_network(c, *speaker, label)?,
                None => cx.accumulated(c, *speaker, None)?,
            };
            let nb = match neighborhood {
                Hood::Both => Neighborhood::Both,
                Hood::In => Neighborhood::In,
                Hood::Out => Neighborhood::Out,
            };
            Ok(export_pajek(&egonet(&g, word, nb)?.network))
        }
        Command::Shift { speaker, words, .. } => {
            let c = cx.single()?;
            let words = if words.is_empty() { &cx.config.shift_words } else { words };
            let stages = build_stage_networks(c, &cx.plan(c)?, cx.speaker(*speaker), cx.config.build_options())?;
            let rankings = rank_stages(&stages, cx.config.k, cx.config.hits_options())?;
            let labels: Vec<&str> = stages.iter().map(|(w, _)| w.stage_label.as_str()).collect();
            Ok(shift_csv_table(&labels, &shift_records(&rankings, words)).to_csv())
        }
        Command::Export {
            speaker, stage, visit, ..
        } => {
            let c = cx.single()?;
            let g = match stage {
                Some(label) => cx.stage_network(c, *speaker, label)?,
                None => cx.accumulated(c, *speaker, *visit)?,
            };
            Ok(export_pajek(&g))
        }
        Command::Report(_) => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lexnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
