//! Collocation networks from utterances.
//!
//! Every token becomes a node and every adjacent token pair inside one
//! utterance becomes an arc. Arcs never cross utterance boundaries.

use crate::corpus::{spontaneous_utterances, Corpus, Utterance};
use crate::error::{Error, Result};
use crate::graph::{LexicalNetwork, Mode, Provenance};
use crate::stages::{StagePlan, StageWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Keep arcs such as `no → no` from "no no".
    pub self_loops: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { self_loops: true }
    }
}

/// Builds a network from already-filtered utterances.
pub fn build_network<'a>(
    utterances: impl IntoIterator<Item = &'a Utterance>,
    meta: Provenance,
    options: BuildOptions,
) -> LexicalNetwork {
    let mut g = LexicalNetwork::new(meta);
    for u in utterances {
        add_utterance(&mut g, &u.tokens, options);
    }
    g
}

fn add_utterance(g: &mut LexicalNetwork, tokens: &[String], options: BuildOptions) {
    for t in tokens {
        g.add_node(t);
    }
    for pair in tokens.windows(2) {
        if options.self_loops || pair[0] != pair[1] {
            g.add_arc(&pair[0], &pair[1]);
        }
    }
}

/// Element `t` holds every spontaneous utterance of `speaker` from the
/// first `t + 1` sessions.
pub fn accumulative_series(corpus: &Corpus, speaker: &str, options: BuildOptions) -> Vec<LexicalNetwork> {
    let mut series = Vec::with_capacity(corpus.sessions.len());
    let mut current = LexicalNetwork::new(Provenance::new(&corpus.child_id, speaker, Mode::Accumulative, ""));
    for session in &corpus.sessions {
        for u in spontaneous_utterances([session], speaker) {
            add_utterance(&mut current, &u.tokens, options);
        }
        current.meta.visits.push(session.visit_index);
        current.meta.label = format!("visit {}", session.visit_index);
        series.push(current.clone());
    }
    series
}

/// One network per window from the speaker's spontaneous utterances in
/// exactly the window's files.
pub fn build_stage_networks(
    corpus: &Corpus,
    plan: &StagePlan,
    speaker: &str,
    options: BuildOptions,
) -> Result<Vec<(StageWindow, LexicalNetwork)>> {
    plan.windows
        .iter()
        .map(|window| {
            let sessions = window
                .file_indices
                .iter()
                .map(|&v| {
                    corpus.session(v).ok_or_else(|| Error::MissingFile {
                        window: window.stage_label.clone(),
                        visit: v,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let meta = Provenance::new(&corpus.child_id, speaker, Mode::Stage, &window.stage_label)
                .with_visits(window.file_indices.iter().copied());
            let g = build_network(spontaneous_utterances(sessions, speaker), meta, options);
            Ok((window.clone(), g))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_session, IngestConfig, SessionSource};
    use crate::stages::MluRange;

    const BIRTHDAY: &str = "\
*MOT:\twhat would you like for your birthday ?
*MOT:\twould you like a train ?
*MOT:\tJoel ?
*CHI:\tyes .
*CHI:\toh .
*CHI:\tI'd like a elephant .
*CHI:\tno .
*CHI:\tand lion .
";

    fn corpus(files: &[&str]) -> Corpus {
        let cfg = IngestConfig::default();
        let sessions = files
            .iter()
            .enumerate()
            .map(|(i, t)| parse_session(t, &SessionSource::new(format!("f{}", i + 1), i + 1), &cfg).unwrap())
            .collect();
        Corpus::new("joel", sessions).unwrap()
    }

    fn build(c: &Corpus, speaker: &str) -> LexicalNetwork {
        build_network(
            spontaneous_utterances(&c.sessions, speaker),
            Provenance::default(),
            BuildOptions::default(),
        )
    }

    #[test]
    fn birthday_mother() {
        let g = build(&corpus(&[BIRTHDAY]), "MOT");
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.arc_count(), 8);
        let expected = [
            ("a", "train"),
            ("for", "your"),
            ("like", "a"),
            ("like", "for"),
            ("what", "would"),
            ("would", "you"),
            ("you", "like"),
            ("your", "birthday"),
        ];
        assert_eq!(g.arcs().collect::<Vec<_>>(), expected);
        assert!(g.contains("joel"));
    }

    #[test]
    fn birthday_child() {
        let g = build(&corpus(&[BIRTHDAY]), "CHI");
        assert_eq!(g.node_count(), 9);
        assert_eq!(
            g.arcs().collect::<Vec<_>>(),
            vec![("a", "elephant"), ("and", "lion"), ("i'd", "like"), ("like", "a")]
        );
    }

    #[test]
    fn repeated_bigrams_collapse() {
        let g = build(&corpus(&["*MOT:\tyou like .\n*MOT:\tyou like .\n"]), "MOT");
        assert_eq!((g.node_count(), g.arc_count()), (2, 1));
    }

    #[test]
    fn self_loop_toggle() {
        let c = corpus(&["*CHI:\tno no .\n"]);
        let on = build(&c, "CHI");
        assert_eq!(on.arc_count(), 1);
        let off = build_network(
            spontaneous_utterances(&c.sessions, "CHI"),
            Provenance::default(),
            BuildOptions { self_loops: false },
        );
        assert_eq!((off.node_count(), off.arc_count()), (1, 0));
    }

    #[test]
    fn empty_input_gives_empty_network() {
        let g = build_network(std::iter::empty(), Provenance::default(), BuildOptions::default());
        assert!(g.is_empty());
    }

    #[test]
    fn accumulative_matches_one_shot() {
        let c = corpus(&[BIRTHDAY, "*CHI:\tmore juice .\n*MOT:\tmore ?\n", "*CHI:\tlike juice .\n"]);
        let series = accumulative_series(&c, "CHI", BuildOptions::default());
        assert_eq!(series.len(), 3);
        for (t, g) in series.iter().enumerate() {
            let direct = build_network(
                spontaneous_utterances(&c.sessions[..=t], "CHI"),
                Provenance::default(),
                BuildOptions::default(),
            );
            assert!(g.same_structure(&direct));
            assert_eq!(g.meta.visits, (1..=t + 1).collect::<Vec<_>>());
        }
        assert!(series[0].same_structure(&build(&corpus(&[BIRTHDAY]), "CHI")));
        assert!(series.windows(2).all(|w| w[0].node_count() <= w[1].node_count()));
    }

    #[test]
    fn stage_networks_use_exact_windows() {
        let c = corpus(&[BIRTHDAY, "*CHI:\tmore juice .\n"]);
        let range: MluRange = "[1,1.5]".parse().unwrap();
        let plan = StagePlan {
            child_id: "joel".into(),
            ranges: vec![range.clone()],
            windows: vec![
                StageWindow::new("S1", 0, range.clone(), vec![1]),
                StageWindow::new("S2", 0, range.clone(), vec![]),
            ],
        };
        let nets = build_stage_networks(&c, &plan, "CHI", BuildOptions::default()).unwrap();
        assert_eq!((nets[0].1.node_count(), nets[0].1.arc_count()), (9, 4));
        assert!(nets[1].1.is_empty());

        let bad = StagePlan {
            windows: vec![StageWindow::new("S3", 0, range, vec![7])],
            ..plan
        };
        match build_stage_networks(&c, &bad, "CHI", BuildOptions::default()) {
            Err(Error::MissingFile { window, visit }) => assert_eq!((window.as_str(), visit), ("S3", 7)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
