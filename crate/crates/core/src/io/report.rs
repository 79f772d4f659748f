//! Plain-text and CSV report rendering.
//!
//! Every number is printed with six significant digits. Output is a pure
//! function of the results, so reports are byte-stable across runs.

use std::fmt::Write as _;

use crate::bia::{ComplianceReport, Relation, Status};
use crate::error::{Error, Result};
use crate::metrics::{Operation, Rate};
use crate::pipeline::ScenarioResults;
use crate::reliability::SystemReliability;

pub const SIGNIFICANT_DIGITS: i32 = 6;
const MISSING: &str = "/";

/// Formats with six significant digits and no trailing zeros.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextTable {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new(title: impl Into<String>, header: &[&str]) -> Self {
        TextTable {
            title: title.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Aligned columns: the first left-aligned, the rest right-aligned.
    pub fn to_text(&self) -> String {
        let cols = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate().take(cols) {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let mut out = String::new();
            for (i, w) in widths.iter().enumerate() {
                let cell = cells.get(i).map(String::as_str).unwrap_or("");
                if i > 0 {
                    out.push_str("  ");
                }
                if i == 0 {
                    let _ = write!(out, "{cell:<w$}");
                } else {
                    let _ = write!(out, "{cell:>w$}");
                }
            }
            out.trim_end().to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        let _ = writeln!(out, "{}", line(&self.header));
        let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let _ = writeln!(out, "{}", "-".repeat(total));
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

fn row(cells: &[&str]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

/// Derived variables of the basic model, as read from its final period.
pub fn render_derived(r: &ScenarioResults) -> TextTable {
    let mut t = TextTable::new(
        format!(
            "{}: derived variables after period {}",
            r.name, r.basic.horizon
        ),
        &["variable", "value", "unit"],
    );
    for m in &r.derived {
        t.push(vec![
            m.label.to_string(),
            format_sig(m.value),
            m.unit.clone(),
        ]);
    }
    for (label, s) in &r.throughput {
        t.push(vec![
            format!("{label} throughput, aggregate mean"),
            format_sig(s.mean_aggregate),
            "MB/s".into(),
        ]);
    }
    t
}

pub fn render_projection(r: &ScenarioResults) -> Option<TextTable> {
    let p = r.projection.as_ref()?;
    let mut t = TextTable::new(
        format!(
            "{}: projection for {} MB",
            r.name,
            format_sig(p.test_data_mb)
        ),
        &["component", "rate", "rate unit", "time (h)"],
    );
    for pt in &p.times {
        let what = match pt.basis.operation {
            Operation::Backup => format!("backup time ({})", pt.basis.label),
            Operation::Restore(_) => format!("restore time ({})", pt.basis.label),
        };
        t.push(vec![
            what,
            format_sig(pt.basis.rate.value()),
            pt.basis.rate.unit().to_string(),
            format_sig(pt.hours()),
        ]);
    }
    if let Some(c) = &r.test_cost {
        t.push(vec![
            "total service cost/month (test data)".into(),
            MISSING.into(),
            MISSING.into(),
            format!("{} USD", format_sig(c.total)),
        ]);
    }
    Some(t)
}

pub fn render_costs(r: &ScenarioResults) -> TextTable {
    let mut t = TextTable::new(
        format!("{}: monthly cloud cost (USD)", r.name),
        &["basis", "storage", "transactions", "instance", "total"],
    );
    let mut push = |label: &str, c: &crate::cost::CostBreakdown| {
        t.push(vec![
            label.to_string(),
            format_sig(c.storage_cost),
            format_sig(c.transaction_cost),
            format_sig(c.instance_cost),
            format_sig(c.total),
        ]);
    };
    push("basic model", &r.basic_cost);
    if let Some(c) = &r.test_cost {
        push("test data", c);
    }
    t
}

pub fn render_reliability(name: &str, rel: &SystemReliability) -> TextTable {
    let mut t = TextTable::new(
        format!("{name}: reliability over {} h", format_sig(rel.mission_h)),
        &["component", "basis", "reliability"],
    );
    for c in &rel.components {
        t.push(vec![
            c.name.clone(),
            c.basis.describe(),
            format_sig(c.reliability),
        ]);
    }
    t.push(row(&["SYSTEM", "series"]));
    t.rows
        .last_mut()
        .expect("just pushed")
        .push(format_sig(rel.system));
    t
}

pub fn render_compliance(report: &ComplianceReport) -> TextTable {
    let mut t = TextTable::new(
        format!("{}: BIA compliance", report.scenario),
        &["metric", "measured", "target", "status"],
    );
    for v in &report.verdicts {
        let q = |q: Option<crate::bia::Quantity>| {
            q.map(|q| format!("{} {}", format_sig(q.value), q.unit.symbol()))
                .unwrap_or_else(|| MISSING.to_string())
        };
        let rel = match v.relation {
            Relation::AtMost => "<= ",
            Relation::AtLeast => ">= ",
        };
        let target = match v.target {
            Some(_) => format!("{rel}{}", q(v.target)),
            None => MISSING.to_string(),
        };
        t.push(vec![
            v.metric.clone(),
            q(v.measured),
            target,
            v.status.to_string(),
        ]);
    }
    if let Some(m) = report.mtd_hours {
        t.push(vec![
            "MTD (RTO + WRT)".into(),
            format!("{} h", format_sig(m)),
            MISSING.into(),
            String::new(),
        ]);
    }
    t
}

fn compliance_summary(report: &ComplianceReport) -> String {
    let fails = report.count(Status::Fail);
    let evaluated = report.verdicts.len() - report.count(Status::NotEvaluable);
    if fails == 0 {
        format!("PASS ({evaluated} checked)")
    } else {
        format!("FAIL ({fails} of {evaluated})")
    }
}

/// Side-by-side comparison of evaluated scenarios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonReport {
    pub table: TextTable,
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        self.table.to_text()
    }

    pub fn to_csv(&self) -> String {
        self.table.to_csv()
    }
}

pub fn render_comparison(results: &[ScenarioResults]) -> Result<ComparisonReport> {
    let first = results
        .first()
        .ok_or_else(|| Error::config("nothing to compare"))?;
    let test_data = first.test_data_mb();
    if let Some(r) = results.iter().find(|r| r.test_data_mb() != test_data) {
        return Err(Error::config(format!(
            "'{}' uses test data {:?} MB but '{}' uses {:?} MB",
            r.name,
            r.test_data_mb(),
            first.name,
            test_data
        )));
    }

    // (row label, unit) in first-seen order, with one value per system
    let mut rows: Vec<(String, String, Vec<Option<String>>)> = Vec::new();
    let n = results.len();
    let mut set = |label: String, unit: &str, col: usize, value: String| {
        let idx = match rows.iter().position(|(l, u, _)| *l == label && u == unit) {
            Some(i) => i,
            None => {
                rows.push((label, unit.to_string(), vec![None; n]));
                rows.len() - 1
            }
        };
        rows[idx].2[col] = Some(value);
    };

    for (col, r) in results.iter().enumerate() {
        for b in r.rates.iter().filter(|b| b.operation == Operation::Backup) {
            set(
                format!("backup throughput ({})", b.label),
                b.rate.unit(),
                col,
                format_sig(b.rate.value()),
            );
        }
    }
    for (col, r) in results.iter().enumerate() {
        for b in r.rates.iter().filter(|b| b.operation != Operation::Backup) {
            let label = match b.rate {
                Rate::SecondsPerMb(_) => format!("restore time per MB ({})", b.label),
                Rate::Throughput(_) => format!("recovery throughput ({})", b.label),
            };
            set(label, b.rate.unit(), col, format_sig(b.rate.value()));
        }
    }
    if let Some(t) = test_data {
        for col in 0..n {
            set("test data".into(), "MB", col, format_sig(t));
        }
        for (col, r) in results.iter().enumerate() {
            for pt in &r
                .projection
                .as_ref()
                .expect("test data implies projection")
                .times
            {
                let label = match pt.basis.operation {
                    Operation::Backup => format!("backup time ({})", pt.basis.label),
                    Operation::Restore(_) => format!("restore time ({})", pt.basis.label),
                };
                set(label, "h", col, format_sig(pt.hours()));
            }
        }
    }
    for (col, r) in results.iter().enumerate() {
        set(
            "monthly cost (basic model)".into(),
            "USD",
            col,
            format_sig(r.basic_cost.total),
        );
        if let Some(c) = &r.test_cost {
            set(
                "monthly cost (test data)".into(),
                "USD",
                col,
                format_sig(c.total),
            );
        }
        if let Some(rel) = &r.reliability {
            set("system reliability".into(), "", col, format_sig(rel.system));
        }
        set(
            "BIA compliance".into(),
            "",
            col,
            compliance_summary(&r.compliance),
        );
    }

    let mut header = vec!["metric", "unit"];
    header.extend(results.iter().map(|r| r.name.as_str()));
    let mut table = TextTable::new("", &header);
    for (label, unit, values) in rows {
        let mut cells = vec![label, unit];
        cells.extend(
            values
                .into_iter()
                .map(|v| v.unwrap_or_else(|| MISSING.to_string())),
        );
        table.push(cells);
    }
    Ok(ComparisonReport { table })
}
