//! Tabular reports rendered as CSV.

use crate::analysis::{DegreeReport, DyadReport, GrowthPoint, StageRow};
use crate::centrality::ShiftRecord;

/// Header plus rows of already-rendered fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma-separated, quoting only where needed, `\n` line ends.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
    }
}

/// Up to six significant digits, trailing zeros trimmed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn growth_table(points: &[GrowthPoint]) -> Table {
    let mut t = Table::new(&["label", "size", "arcs", "avg_degree"]);
    for p in points {
        t.push(vec![
            p.label.clone(),
            p.size.to_string(),
            p.arcs.to_string(),
            format_number(p.average_degree),
        ]);
    }
    t
}

pub fn dyad_table(report: &DyadReport) -> Table {
    let mut t = Table::new(&[
        "label",
        "child_size",
        "child_arcs",
        "child_avg_degree",
        "mother_size",
        "mother_arcs",
        "mother_avg_degree",
        "delta_size",
        "delta_degree",
    ]);
    for (((label, c), m), d) in report
        .stage_labels
        .iter()
        .zip(&report.child_points)
        .zip(&report.mother_points)
        .zip(&report.deltas)
    {
        t.push(vec![
            label.clone(),
            c.size.to_string(),
            c.arcs.to_string(),
            format_number(c.average_degree),
            m.size.to_string(),
            m.arcs.to_string(),
            format_number(m.average_degree),
            d.size.to_string(),
            format_number(d.average_degree),
        ]);
    }
    t
}

/// One row per word, one column per stage.
pub fn shift_csv_table<S: AsRef<str>>(stage_labels: &[S], records: &[ShiftRecord]) -> Table {
    let mut header = vec!["word".to_string()];
    header.extend(stage_labels.iter().map(|l| l.as_ref().to_string()));
    let mut t = Table::new(&header);
    for r in records {
        let mut row = vec![r.word.clone()];
        row.extend(r.statuses.iter().map(|(_, s)| s.to_string()));
        t.push(row);
    }
    t
}

pub fn stage_rows_table(rows: &[StageRow]) -> Table {
    let mut t = Table::new(&["label", "files", "utterances", "morphemes", "mlu", "size", "avg_degree"]);
    for r in rows {
        t.push(vec![
            r.label.clone(),
            r.files.to_string(),
            r.utterances.to_string(),
            r.morphemes.to_string(),
            r.mlu.map(format_number).unwrap_or_default(),
            r.size.to_string(),
            format_number(r.average_degree),
        ]);
    }
    t
}

/// Rank-aligned in/out-degree lists for several labeled reports.
pub fn degree_table(reports: &[(String, DegreeReport)]) -> Table {
    let mut t = Table::new(&["label", "rank", "in_word", "in_degree", "out_word", "out_degree"]);
    for (label, r) in reports {
        let n = r.in_degree.len().max(r.out_degree.len());
        for i in 0..n {
            let (iw, id) = r.in_degree.get(i).map_or((String::new(), String::new()), |(w, d)| (w.clone(), d.to_string()));
            let (ow, od) = r.out_degree.get(i).map_or((String::new(), String::new()), |(w, d)| (w.clone(), d.to_string()));
            t.push(vec![label.clone(), (i + 1).to_string(), iw, id, ow, od]);
        }
    }
    t
}
