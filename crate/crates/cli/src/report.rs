use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        writeln!(out, "    {}", line(&self.columns)).unwrap();
        for r in &self.rows {
            writeln!(out, "    {}", line(r)).unwrap();
        }
        out
    }
}

/// Outcome of one task. Contains no timing so reports are reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub task: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl Record {
    pub fn new(task: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Record { task: task.into(), passed, detail: detail.into(), table: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub surface: String,
    pub lie: String,
    pub window: i64,
    pub passed: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(command: &str, surface: String, lie: String, window: i64, records: Vec<Record>) -> Self {
        let passed = records.iter().all(|r| r.passed);
        Report { command: command.into(), surface, lie, window, passed, records }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "knlab {}: {} | {} | window {}", self.command, self.surface, self.lie, self.window).unwrap();
        for r in &self.records {
            writeln!(out, "[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.task, r.detail).unwrap();
            if let Some(t) = &r.table {
                out.push_str(&t.to_text());
            }
        }
        writeln!(out, "{}", if self.passed { "all checks passed" } else { "verification FAILED" }).unwrap();
        out
    }

    fn summary(&self) -> Table {
        let mut t = Table::new(&["task", "passed", "detail"]);
        for r in &self.records {
            t.push(vec![r.task.clone(), r.passed.to_string(), r.detail.clone()]);
        }
        t
    }

    /// The summary followed by every table, each introduced by `# task`.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut out = self.summary().to_csv()?;
        for r in &self.records {
            if let Some(t) = &r.table {
                write!(out, "\n# {}\n{}", r.task, t.to_csv()?).unwrap();
            }
        }
        Ok(out)
    }

    /// Writes `report.<ext>` into `dir`; in CSV mode also one file per table.
    pub fn write_to(&self, dir: &Path, format: Format) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        match format {
            Format::Json => std::fs::write(dir.join("report.json"), self.to_json()),
            Format::Text => std::fs::write(dir.join("report.txt"), self.to_text()),
            Format::Csv => {
                let io = |e: csv::Error| std::io::Error::other(e.to_string());
                std::fs::write(dir.join("summary.csv"), self.summary().to_csv().map_err(io)?)?;
                for r in &self.records {
                    if let Some(t) = &r.table {
                        std::fs::write(dir.join(format!("{}.csv", slug(&r.task))), t.to_csv().map_err(io)?)?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_formats() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1/2".into(), "x, y".into()]);
        let r = Report::new("verify", "I=[0] O=[inf]".into(), "sl(2)".into(), 3, vec![
            Record::new("duality", true, "ok").with_table(t),
            Record::new("grading", false, "bad"),
        ]);
        assert!(!r.passed);
        assert!(r.to_text().contains("[FAIL] grading: bad"));
        assert!(r.to_csv().unwrap().contains("\"x, y\""));
        assert!(r.to_json().contains("\"passed\": false"));
        assert_eq!(slug("cocycle affine:0 (x)"), "cocycle_affine_0_x");
    }
}
