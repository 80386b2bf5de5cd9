//! CHAT-lite transcript ingestion.
//!
//! Supports the subset of CHAT needed to build collocation networks: `@`
//! headers, `*SPK:` main tiers, `%mor:` dependent tiers, postcode brackets
//! and whitespace-led continuation lines. Everything else in a bracket group
//! (retracing, overlap, error codes) is stripped before tokenizing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::NaiveDate;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speaker codes, exclusion markers and punctuation used while parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub speakers: Vec<String>,
    /// Postcodes such as `[+ imit]` that mark an utterance as non-spontaneous.
    pub exclusion_markers: Vec<String>,
    /// Tokens standing for unintelligible speech.
    pub unintelligible: Vec<String>,
    pub punctuation: Vec<String>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            speakers: vec!["MOT".into(), "CHI".into()],
            exclusion_markers: default_exclusion_markers(),
            unintelligible: vec!["xxx".into(), "yyy".into(), "www".into()],
            punctuation: vec![".".into(), "?".into(), "!".into(), ",".into()],
        }
    }
}

pub fn default_exclusion_markers() -> Vec<String> {
    // imitation, self-repetition, routine, partly intelligible
    ["[+ imit]", "[+ I]", "[+ SR]", "[+ R]", "[+ rout]", "[+ PI]"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

impl IngestConfig {
    fn is_punctuation(&self, token: &str) -> bool {
        self.punctuation.iter().any(|p| p == token)
    }

    fn is_punctuation_char(&self, c: char) -> bool {
        self.punctuation.iter().any(|p| {
            let mut chars = p.chars();
            chars.next() == Some(c) && chars.next().is_none()
        })
    }

    fn has_speaker(&self, code: &str) -> bool {
        self.speakers.iter().any(|s| s == code)
    }
}

/// One speaker turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub tokens: Vec<String>,
    /// Morpheme count; zero only when `tokens` is empty.
    pub morphemes: usize,
    pub spontaneous: bool,
    /// Main-tier body with whitespace collapsed.
    pub raw: String,
    /// Items of the attached `%mor` tier, if any.
    pub mor: Option<Vec<String>>,
}

impl Utterance {
    pub fn new(speaker: &str, raw: &str, mor: Option<Vec<String>>, config: &IngestConfig) -> Self {
        let raw = collapse_whitespace(raw);
        let tokens = tokenize(&raw, config);
        let mut utterance = Utterance {
            speaker: speaker.to_string(),
            tokens,
            morphemes: 0,
            spontaneous: false,
            raw,
            mor,
        };
        utterance.morphemes = count_morphemes(&utterance, config);
        utterance.spontaneous = is_spontaneous(&utterance, config);
        utterance
    }

    /// True when the morpheme count came from a `%mor` tier rather than
    /// from the token count.
    pub fn has_mor(&self) -> bool {
        self.mor
            .as_ref()
            .is_some_and(|items| items.iter().any(|i| !is_mor_punctuation(i)))
    }
}

/// One transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub child_id: String,
    pub visit_index: usize,
    pub source_name: String,
    pub date: Option<NaiveDate>,
    pub utterances: Vec<Utterance>,
    /// Non-fatal problems met while parsing (skipped speakers, stray tiers).
    pub warnings: Vec<String>,
}

/// Where a transcript came from; the loader decides the visit index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSource {
    pub name: String,
    pub visit_index: usize,
}

impl SessionSource {
    pub fn new(name: impl Into<String>, visit_index: usize) -> Self {
        Self {
            name: name.into(),
            visit_index,
        }
    }
}

impl Default for SessionSource {
    fn default() -> Self {
        Self::new("<memory>", 1)
    }
}

/// All sessions of one child, ordered by visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub child_id: String,
    pub sessions: Vec<Session>,
}

impl Corpus {
    /// Sorts by visit index and rejects duplicates.
    pub fn new(child_id: impl Into<String>, mut sessions: Vec<Session>) -> Result<Self> {
        sessions.sort_by_key(|s| s.visit_index);
        for pair in sessions.windows(2) {
            if pair[0].visit_index == pair[1].visit_index {
                return Err(Error::Input(format!(
                    "visit {} appears twice ({} and {})",
                    pair[0].visit_index, pair[0].source_name, pair[1].source_name
                )));
            }
        }
        if let Some(s) = sessions.iter().find(|s| s.visit_index == 0) {
            return Err(Error::Input(format!("{}: visit index must be >= 1", s.source_name)));
        }
        Ok(Self {
            child_id: child_id.into(),
            sessions,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn session(&self, visit_index: usize) -> Option<&Session> {
        self.sessions
            .binary_search_by_key(&visit_index, |s| s.visit_index)
            .ok()
            .map(|i| &self.sessions[i])
    }
}

/// Mean length of utterance kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mlu {
    pub morphemes: u64,
    pub utterances: u64,
    /// At least one contributing utterance had no `%mor` tier.
    pub word_based: bool,
}

impl Mlu {
    pub fn new(morphemes: u64, utterances: u64) -> Result<Self> {
        if utterances == 0 {
            return Err(Error::Undefined("MLU over zero utterances".into()));
        }
        Ok(Self {
            morphemes,
            utterances,
            word_based: false,
        })
    }

    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.morphemes, self.utterances)
    }

    pub fn value(&self) -> f64 {
        self.morphemes as f64 / self.utterances as f64
    }
}

/// Parses one transcript.
pub fn parse_session(text: &str, source: &SessionSource, config: &IngestConfig) -> Result<Session> {
    struct Pending {
        speaker: String,
        raw: String,
        mor: Option<Vec<String>>,
    }

    let parse_err = |line: usize, message: String| Error::Parse {
        source_name: source.name.clone(),
        line,
        message,
    };

    let mut child_name: Option<String> = None;
    let mut date = None;
    let mut pending: Vec<Pending> = Vec::new();
    let mut warnings = Vec::new();
    // whether the most recent main tier was kept (dependent tiers attach to it)
    let mut last_kept = false;
    let mut seen_main = false;

    for (line_no, line) in logical_lines(text).map_err(|(n, m)| parse_err(n, m))? {
        match line.chars().next() {
            Some('@') => {
                let (name, value) = match line.split_once(':') {
                    Some((n, v)) => (n.trim(), v.trim()),
                    None => (line.trim(), ""),
                };
                match name {
                    "@Participants" => {
                        if let Some(name) = target_child_name(value) {
                            child_name = Some(name);
                        }
                    }
                    "@Date" => match parse_chat_date(value) {
                        Some(d) => date = Some(d),
                        None => warnings.push(format!("line {line_no}: unreadable date {value:?}")),
                    },
                    _ => {}
                }
            }
            Some('*') => {
                let (code, body) = split_tier(&line[1..], is_speaker_char)
                    .ok_or_else(|| parse_err(line_no, format!("malformed main tier prefix in {line:?}")))?;
                seen_main = true;
                if config.has_speaker(code) {
                    pending.push(Pending {
                        speaker: code.to_string(),
                        raw: body.to_string(),
                        mor: None,
                    });
                    last_kept = true;
                } else {
                    warnings.push(format!("line {line_no}: skipped speaker {code}"));
                    last_kept = false;
                }
            }
            Some('%') => {
                let (name, body) = split_tier(&line[1..], |c| c.is_ascii_alphanumeric())
                    .ok_or_else(|| parse_err(line_no, format!("malformed dependent tier prefix in {line:?}")))?;
                if !seen_main {
                    warnings.push(format!("line {line_no}: %{name} tier before any main tier"));
                } else if name == "mor" && last_kept {
                    let utterance = pending.last_mut().expect("kept main tier");
                    if utterance.mor.is_some() {
                        warnings.push(format!("line {line_no}: second %mor tier ignored"));
                    } else {
                        utterance.mor = Some(body.split_whitespace().map(str::to_string).collect());
                    }
                }
            }
            _ => return Err(parse_err(line_no, format!("expected @, * or % tier, found {line:?}"))),
        }
    }

    let utterances = pending
        .into_iter()
        .map(|p| Utterance::new(&p.speaker, &p.raw, p.mor, config))
        .collect();

    Ok(Session {
        child_id: child_name.unwrap_or_else(|| child_id_from_name(&source.name)),
        visit_index: source.visit_index,
        source_name: source.name.clone(),
        date,
        utterances,
        warnings,
    })
}

/// Joins continuation lines onto their tier; blank lines are dropped.
fn logical_lines(text: &str) -> std::result::Result<Vec<(usize, String)>, (usize, String)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            match out.last_mut() {
                Some((_, prev)) => {
                    prev.push(' ');
                    prev.push_str(line.trim());
                }
                None => return Err((line_no, "continuation line before any tier".into())),
            }
        } else {
            out.push((line_no, line.trim_end().to_string()));
        }
    }
    Ok(out)
}

fn is_speaker_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `CODE:body` into the code and the trimmed body.
fn split_tier(rest: &str, valid: impl Fn(char) -> bool) -> Option<(&str, &str)> {
    let (code, body) = rest.split_once(':')?;
    if code.is_empty() || !code.chars().all(valid) {
        return None;
    }
    Some((code, body.trim()))
}

fn target_child_name(participants: &str) -> Option<String> {
    participants.split(',').find_map(|entry| {
        let fields: Vec<&str> = entry.split_whitespace().collect();
        match fields.as_slice() {
            [_, name, role, ..] if *role == "Target_Child" => Some(name.to_lowercase()),
            _ => None,
        }
    })
}

fn parse_chat_date(value: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(value.trim(), "%d-%b-%Y").ok()
}

/// Leading alphabetic run of the file stem, lowercased (`joel07a.cha` → `joel`).
pub fn child_id_from_name(name: &str) -> String {
    let file = name.rsplit(['/', '\\']).next().unwrap_or(name);
    let stem = file.split('.').next().unwrap_or(file);
    let id: String = stem
        .chars()
        .take_while(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if id.is_empty() {
        "unknown".to_string()
    } else {
        id
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes `[...]` groups and timing bullets.
fn strip_annotations(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut bracket_depth = 0usize;
    let mut in_bullet = false;
    for c in line.chars() {
        match c {
            '\u{15}' => in_bullet = !in_bullet,
            _ if in_bullet => {}
            '[' => {
                bracket_depth += 1;
                out.push(' ');
            }
            ']' if bracket_depth > 0 => bracket_depth -= 1,
            _ if bracket_depth > 0 => {}
            '<' | '>' => out.push(' '),
            _ => out.push(c),
        }
    }
    out
}

/// Bracket groups of a main line, whitespace-normalized and lowercased.
fn bracket_groups(line: &str) -> Vec<String> {
    let mut groups = Vec::new();
    let mut rest = line;
    while let Some(start) = rest.find('[') {
        match rest[start..].find(']') {
            Some(len) => {
                groups.push(normalize_marker(&rest[start..start + len + 1]));
                rest = &rest[start + len + 1..];
            }
            None => break,
        }
    }
    groups
}

fn normalize_marker(marker: &str) -> String {
    collapse_whitespace(marker).to_lowercase()
}

/// Splits an utterance body into lowercased word forms.
pub fn tokenize(main_line: &str, config: &IngestConfig) -> Vec<String> {
    strip_annotations(main_line)
        .split_whitespace()
        .filter_map(|raw| {
            if config.is_punctuation(raw) {
                return None;
            }
            // CHAT terminators and linkers: "+...", "+/.", "+,"
            if raw.starts_with('+') && !raw.chars().any(char::is_alphanumeric) {
                return None;
            }
            // fillers, events and omitted words are not word forms
            if raw.starts_with('&') || (raw.starts_with('0') && raw.len() > 1) {
                return None;
            }
            let form = raw.split('@').next().unwrap_or(raw);
            let form: String = form
                .chars()
                .filter(|c| *c != '(' && *c != ')')
                .flat_map(char::to_lowercase)
                .collect();
            let form = form.trim_matches(|c| config.is_punctuation_char(c));
            if form.is_empty() || config.is_punctuation(form) {
                None
            } else {
                Some(form.to_string())
            }
        })
        .collect()
}

/// False when the utterance carries an exclusion postcode, contains an
/// unintelligible token, or has no tokens at all.
pub fn is_spontaneous(utterance: &Utterance, config: &IngestConfig) -> bool {
    if utterance.tokens.is_empty() {
        return false;
    }
    let markers: BTreeSet<String> = config.exclusion_markers.iter().map(|m| normalize_marker(m)).collect();
    if bracket_groups(&utterance.raw).iter().any(|g| markers.contains(g)) {
        return false;
    }
    !utterance
        .tokens
        .iter()
        .any(|t| config.unintelligible.iter().any(|u| u.eq_ignore_ascii_case(t)))
}

fn is_mor_punctuation(item: &str) -> bool {
    !item.chars().any(char::is_alphanumeric)
}

fn count_morphemes(utterance: &Utterance, config: &IngestConfig) -> usize {
    if utterance.tokens.is_empty() {
        return 0;
    }
    let from_mor = utterance.mor.as_ref().map(|items| {
        items
            .iter()
            .filter(|i| !config.is_punctuation(i) && !is_mor_punctuation(i))
            .count()
    });
    match from_mor {
        Some(n) if n > 0 => n,
        _ => utterance.tokens.len(),
    }
}

/// Items on the `%mor` tier when present, otherwise the token count.
pub fn morpheme_count(utterance: &Utterance) -> Result<usize> {
    if utterance.tokens.is_empty() || utterance.morphemes == 0 {
        return Err(Error::Undefined(format!(
            "morpheme count of empty utterance {:?}",
            utterance.raw
        )));
    }
    Ok(utterance.morphemes)
}

/// Spontaneous utterances of `speaker`, in transcript order.
pub fn spontaneous_utterances<'a>(
    sessions: impl IntoIterator<Item = &'a Session>,
    speaker: &'a str,
) -> impl Iterator<Item = &'a Utterance> {
    sessions
        .into_iter()
        .flat_map(|s| s.utterances.iter())
        .filter(move |u| u.spontaneous && u.speaker == speaker)
}

/// Pooled MLU of one speaker over the given sessions.
pub fn session_mlu<'a>(sessions: impl IntoIterator<Item = &'a Session>, speaker: &str) -> Result<Mlu> {
    let mut morphemes = 0u64;
    let mut utterances = 0u64;
    let mut word_based = false;
    let qualifying = sessions
        .into_iter()
        .flat_map(|s| s.utterances.iter())
        .filter(|u| u.spontaneous && u.speaker == speaker);
    for u in qualifying {
        morphemes += morpheme_count(u)? as u64;
        utterances += 1;
        word_based |= !u.has_mor();
    }
    if utterances == 0 {
        return Err(Error::Undefined(format!("no spontaneous utterances for speaker {speaker}")));
    }
    Ok(Mlu {
        morphemes,
        utterances,
        word_based,
    })
}

impl Session {
    /// Line-oriented dump: `visit TAB speaker TAB spontaneous TAB morphemes TAB tokens...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for u in &self.utterances {
            write!(out, "{}\t{}\t{}\t{}", self.visit_index, u.speaker, u.spontaneous, u.morphemes).unwrap();
            for t in &u.tokens {
                out.push('\t');
                out.push_str(t);
            }
            out.push('\n');
        }
        out
    }

    /// Normalized CHAT-lite text that parses back to this session.
    pub fn to_chat(&self) -> String {
        let mut out = String::from("@Begin\n");
        writeln!(out, "@Participants:\tCHI {} Target_Child", self.child_id).unwrap();
        if let Some(date) = self.date {
            writeln!(out, "@Date:\t{}", date.format("%d-%b-%Y").to_string().to_uppercase()).unwrap();
        }
        for u in &self.utterances {
            writeln!(out, "*{}:\t{}", u.speaker, u.raw).unwrap();
            if let Some(items) = &u.mor {
                writeln!(out, "%mor:\t{}", items.join(" ")).unwrap();
            }
        }
        out.push_str("@End\n");
        out
    }
}
