//! MLU stage segmentation.
//!
//! Each session is labeled by the MLU range its child MLU falls in. For
//! each stage the longest run of consecutive same-stage sessions supplies a
//! window of files; long runs are split into early and late windows.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::corpus::{session_mlu, Corpus, Mlu};
use crate::error::{Error, Result};

pub type Rational = Ratio<u64>;

/// Interval over MLU values with explicit endpoint inclusion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MluRange {
    pub lower: Rational,
    pub lower_closed: bool,
    pub upper: Rational,
    pub upper_closed: bool,
}

impl MluRange {
    pub fn contains(&self, value: &Rational) -> bool {
        let above = if self.lower_closed {
            *value >= self.lower
        } else {
            *value > self.lower
        };
        let below = if self.upper_closed {
            *value <= self.upper
        } else {
            *value < self.upper
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper || (self.lower == self.upper && !(self.lower_closed && self.upper_closed))
    }

    pub fn overlaps(&self, other: &MluRange) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        // a ends before b starts
        let before = |a: &MluRange, b: &MluRange| {
            a.upper < b.lower || (a.upper == b.lower && !(a.upper_closed && b.lower_closed))
        };
        !(before(self, other) || before(other, self))
    }
}

impl FromStr for MluRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed MLU range {s:?}; expected e.g. \"(1.5,2]\""));
        let s = s.trim();
        let lower_closed = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let upper_closed = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let inner = &s[1..s.len() - 1];
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        let range = MluRange {
            lower: parse_decimal(lo).ok_or_else(bad)?,
            lower_closed,
            upper: parse_decimal(hi).ok_or_else(bad)?,
            upper_closed,
        };
        if range.is_empty() {
            return Err(Error::Config(format!("MLU range {s:?} is empty")));
        }
        Ok(range)
    }
}

impl fmt::Display for MluRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lower_closed { '[' } else { '(' },
            format_decimal(&self.lower),
            format_decimal(&self.upper),
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

impl Serialize for MluRange {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MluRange {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a nonnegative decimal such as `1.342` exactly.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let denom = 10u64.checked_pow(frac.len() as u32)?;
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Rational::new(int.checked_mul(denom)?.checked_add(frac)?, denom))
}

/// Decimal rendering; non-terminating fractions are cut at 12 digits.
pub fn format_decimal(r: &Rational) -> String {
    let int = r.to_integer();
    let mut rem = *r.numer() % *r.denom();
    if rem.is_zero() {
        return int.to_string();
    }
    let mut out = format!("{int}.");
    for _ in 0..12 {
        if rem == 0 {
            break;
        }
        let scaled = rem as u128 * 10;
        out.push(char::from_digit((scaled / *r.denom() as u128) as u32, 10).unwrap());
        rem = (scaled % *r.denom() as u128) as u64;
    }
    out
}

pub fn default_ranges() -> Vec<MluRange> {
    ["[1,1.5]", "(1.5,2]", "(2,2.5]", "(2.5,3]", "(3,3.5]"]
        .iter()
        .map(|s| s.parse().expect("valid default range"))
        .collect()
}

/// Rejects overlapping or unordered ranges.
pub fn validate_ranges(ranges: &[MluRange]) -> Result<()> {
    for (i, a) in ranges.iter().enumerate() {
        for b in &ranges[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::Config(format!("MLU ranges {a} and {b} overlap")));
            }
        }
    }
    for pair in ranges.windows(2) {
        if pair[0].lower > pair[1].lower {
            return Err(Error::Config(format!(
                "MLU ranges out of order: {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

/// Index of the range containing `mlu`, or `None` outside all ranges.
pub fn assign_stage(mlu: &Rational, ranges: &[MluRange]) -> Result<Option<usize>> {
    validate_ranges(ranges)?;
    Ok(ranges.iter().position(|r| r.contains(mlu)))
}

pub fn stage_name(index: usize) -> String {
    format!("S{}", index + 1)
}

/// Consecutive files chosen to represent one stage or sub-stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageWindow {
    pub stage_label: String,
    /// Index into the plan's ranges.
    pub stage: usize,
    pub mlu_range: MluRange,
    pub file_indices: Vec<usize>,
    pub span_days: Option<i64>,
}

impl StageWindow {
    pub fn new(label: &str, stage: usize, mlu_range: MluRange, file_indices: Vec<usize>) -> Self {
        Self {
            stage_label: label.to_string(),
            stage,
            mlu_range,
            file_indices,
            span_days: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePlan {
    pub child_id: String,
    pub windows: Vec<StageWindow>,
    pub ranges: Vec<MluRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Start,
    Center,
    End,
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "start" => Ok(Placement::Start),
            "center" => Ok(Placement::Center),
            "end" => Ok(Placement::End),
            _ => Err(Error::Config(format!("unknown window placement {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanOptions {
    pub ranges: Vec<MluRange>,
    pub window_size: usize,
    /// Runs at least this long get separate early and late windows.
    pub split_threshold: usize,
    pub placement: Placement,
    /// Width of the pooled moving MLU; 1 uses each session's own MLU.
    pub smoothing: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            ranges: default_ranges(),
            window_size: 5,
            split_threshold: 10,
            placement: Placement::Start,
            smoothing: 1,
        }
    }
}

impl PlanOptions {
    pub fn validate(&self) -> Result<()> {
        validate_ranges(&self.ranges)?;
        if self.window_size == 0 {
            return Err(Error::Config("window_size must be at least 1".into()));
        }
        if self.split_threshold < 2 * self.window_size {
            return Err(Error::Config(format!(
                "split_threshold {} would make early and late windows of {} files overlap",
                self.split_threshold, self.window_size
            )));
        }
        if self.smoothing == 0 {
            return Err(Error::Config("smoothing width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Child MLU and stage of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionStage {
    pub visit_index: usize,
    /// The session's own MLU; `None` without spontaneous child speech.
    pub mlu: Option<Mlu>,
    /// The value used for stage assignment (equals `mlu` without smoothing).
    pub stage_mlu: Option<Rational>,
    pub stage: Option<usize>,
}

/// Labels every session with its stage.
pub fn session_stages(corpus: &Corpus, speaker: &str, options: &PlanOptions) -> Result<Vec<SessionStage>> {
    options.validate()?;
    let mlus: Vec<Option<Mlu>> = corpus
        .sessions
        .iter()
        .map(|s| session_mlu([s], speaker).ok())
        .collect();
    let n = mlus.len();
    let before = (options.smoothing - 1) / 2;
    let after = options.smoothing / 2;
    Ok(corpus
        .sessions
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let stage_mlu = mlus[i].map(|own| {
                if options.smoothing == 1 {
                    return own.ratio();
                }
                let (m, u) = mlus[i.saturating_sub(before)..(i + after + 1).min(n)]
                    .iter()
                    .flatten()
                    .fold((0, 0), |(m, u), x| (m + x.morphemes, u + x.utterances));
                Rational::new(m, u)
            });
            let stage = stage_mlu
                .as_ref()
                .and_then(|m| options.ranges.iter().position(|r| r.contains(m)));
            SessionStage {
                visit_index: s.visit_index,
                mlu: mlus[i],
                stage_mlu,
                stage,
            }
        })
        .collect())
}

/// Chooses the file windows for every stage the child passes through.
pub fn plan_stages(corpus: &Corpus, speaker: &str, options: &PlanOptions) -> Result<StagePlan> {
    let labeled = session_stages(corpus, speaker, options)?;

    // longest run per stage, earliest on ties: (start, len)
    let mut best: Vec<Option<(usize, usize)>> = vec![None; options.ranges.len()];
    let mut start = 0;
    while start < labeled.len() {
        let stage = labeled[start].stage;
        let mut end = start + 1;
        while end < labeled.len() && labeled[end].stage == stage {
            end += 1;
        }
        if let Some(s) = stage {
            let len = end - start;
            if best[s].is_none_or(|(_, l)| len > l) {
                best[s] = Some((start, len));
            }
        }
        start = end;
    }

    let w = options.window_size;
    let mut windows = Vec::new();
    for (stage, run) in best.iter().enumerate() {
        let Some((start, len)) = *run else { continue };
        let range = options.ranges[stage].clone();
        let name = stage_name(stage);
        let mut push = |label: String, from: usize, count: usize| {
            let files: Vec<usize> = labeled[from..from + count].iter().map(|s| s.visit_index).collect();
            let mut window = StageWindow::new(&label, stage, range.clone(), files);
            window.span_days = span_days(corpus, &window.file_indices);
            windows.push(window);
        };
        if len >= options.split_threshold {
            push(format!("early {name}"), start, w);
            push(format!("late {name}"), start + len - w, w);
        } else if len <= w {
            push(name, start, len);
        } else {
            let offset = match options.placement {
                Placement::Start => 0,
                Placement::Center => (len - w) / 2,
                Placement::End => len - w,
            };
            push(name, start + offset, w);
        }
    }
    windows.sort_by_key(|w| w.file_indices.first().copied());

    Ok(StagePlan {
        child_id: corpus.child_id.clone(),
        windows,
        ranges: options.ranges.clone(),
    })
}

fn span_days(corpus: &Corpus, visits: &[usize]) -> Option<i64> {
    let dates = visits
        .iter()
        .map(|&v| corpus.session(v).and_then(|s| s.date))
        .collect::<Option<Vec<_>>>()?;
    Some((*dates.last()? - *dates.first()?).num_days())
}

const PLAN_HEADER: &str = "label\trange\tfiles\tspan_days";

impl StagePlan {
    /// Tab-separated table, one window per line.
    pub fn to_table(&self) -> String {
        let mut out = format!("#child\t{}\n#ranges", self.child_id);
        for r in &self.ranges {
            out.push('\t');
            out.push_str(&r.to_string());
        }
        out.push('\n');
        out.push_str(PLAN_HEADER);
        out.push('\n');
        for w in &self.windows {
            let files: Vec<String> = w.file_indices.iter().map(usize::to_string).collect();
            let span = w.span_days.map_or("-".to_string(), |d| d.to_string());
            out.push_str(&format!("{}\t{}\t{}\t{}\n", w.stage_label, w.mlu_range, files.join(","), span));
        }
        out
    }

    /// Reads a table written by [`StagePlan::to_table`] (or by hand).
    pub fn from_table(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse {
            source_name: "stage plan".into(),
            line,
            message: msg.to_string(),
        };
        let mut child_id = String::new();
        let mut ranges: Option<Vec<MluRange>> = None;
        let mut windows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() || line == PLAN_HEADER {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "#child" => child_id = fields.get(1).unwrap_or(&"").to_string(),
                "#ranges" => {
                    ranges = Some(fields[1..].iter().map(|r| r.parse()).collect::<Result<_>>()?);
                }
                f if f.starts_with('#') => {}
                _ => {
                    let [label, range, files, span] = fields[..] else {
                        return Err(bad(n, "expected 4 tab-separated fields"));
                    };
                    let mlu_range: MluRange = range.parse()?;
                    let ranges = ranges.get_or_insert_with(default_ranges);
                    let stage = ranges
                        .iter()
                        .position(|r| *r == mlu_range)
                        .ok_or_else(|| bad(n, "range is not one of the plan's ranges"))?;
                    let file_indices = if files.is_empty() {
                        Vec::new()
                    } else {
                        files
                            .split(',')
                            .map(|f| f.trim().parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad(n, "file list must be comma-separated visit numbers"))?
                    };
                    let span_days = match span {
                        "-" | "" => None,
                        d => Some(d.parse().map_err(|_| bad(n, "span_days must be an integer or -"))?),
                    };
                    windows.push(StageWindow {
                        stage_label: label.to_string(),
                        stage,
                        mlu_range,
                        file_indices,
                        span_days,
                    });
                }
            }
        }
        let ranges = ranges.unwrap_or_else(default_ranges);
        validate_ranges(&ranges)?;
        let plan = StagePlan {
            child_id,
            windows,
            ranges,
        };
        plan.check()?;
        Ok(plan)
    }

    /// Windows are ordered, disjoint and made of consecutive visits.
    pub fn check(&self) -> Result<()> {
        let mut last: Option<usize> = None;
        for w in &self.windows {
            if w.file_indices.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Config(format!("window {} lists files out of order", w.stage_label)));
            }
            if let (Some(prev), Some(&first)) = (last, w.file_indices.first()) {
                if first <= prev {
                    return Err(Error::Config(format!(
                        "window {} overlaps or precedes the previous window",
                        w.stage_label
                    )));
                }
            }
            if let Some(&l) = w.file_indices.last() {
                last = Some(l);
            }
        }
        Ok(())
    }
}
