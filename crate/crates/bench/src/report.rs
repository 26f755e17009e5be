//! Per-image results, the tables derived from them, and report files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::rank::{Better, Column, Criterion, RankAccumulator, RankTable};
use crate::BenchError;

/// Outcome of one filter on one noisy image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub image_index: usize,
    pub image: String,
    pub level: f64,
    pub filter: String,
    pub mae: f64,
    pub mse: f64,
    pub ncd: f64,
    /// Mean single-threaded run time; absent when timing is off.
    pub time_ms: Option<f64>,
    /// Lookup-table construction time of the filter.
    pub lut_ms: Option<f64>,
}

/// Mean run time of one filter over every (image, level) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeRow {
    pub filter: String,
    pub mean_ms: f64,
    /// Time in units of the fastest non-identity filter, rounded.
    pub relative: Option<i64>,
    pub lut_ms: f64,
}

/// Resolved settings printed at the top of every report file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigEcho(pub Vec<(String, String)>);

impl ConfigEcho {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn csv_comment(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("# {k}: {v}\n"))
            .collect()
    }

    fn markdown(&self) -> String {
        let mut out = String::from("| Setting | Value |\n|---|---|\n");
        for (k, v) in &self.0 {
            let _ = writeln!(out, "| {k} | {} |", v.replace('|', "\\|"));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub config: ConfigEcho,
    pub filters: Vec<String>,
    pub levels: Vec<f64>,
    pub records: Vec<Record>,
    /// Images that could not be processed, with the reason.
    pub skipped: Vec<(String, String)>,
    /// Mean MAE/MSE/NCD ranks per level.
    pub effectiveness: RankTable,
    /// Mean per-image time ranks per level; absent when timing is off.
    pub efficiency: Option<RankTable>,
    pub times: Option<Vec<TimeRow>>,
}

impl BenchReport {
    /// Derives every table from the per-image records. Filter and level order
    /// follow their first appearance in `records`.
    pub fn from_records(
        config: ConfigEcho,
        records: Vec<Record>,
        skipped: Vec<(String, String)>,
    ) -> Result<Self, BenchError> {
        if records.is_empty() {
            return Err(BenchError::Empty);
        }
        let mut filters: Vec<String> = Vec::new();
        let mut levels: Vec<f64> = Vec::new();
        let mut groups: Vec<(usize, f64)> = Vec::new();
        for r in &records {
            if !filters.contains(&r.filter) {
                filters.push(r.filter.clone());
            }
            if !levels.contains(&r.level) {
                levels.push(r.level);
            }
            if !groups.contains(&(r.image_index, r.level)) {
                groups.push((r.image_index, r.level));
            }
        }
        let filter_pos = |name: &str| {
            filters
                .iter()
                .position(|f| f == name)
                .expect("known filter")
        };
        let level_pos = |l: f64| levels.iter().position(|&x| x == l).expect("known level");

        let columns: Vec<Column> = Criterion::EFFECTIVENESS
            .into_iter()
            .flat_map(|criterion| levels.iter().map(move |&level| Column { criterion, level }))
            .collect();
        let mut eff = RankAccumulator::new(filters.clone(), columns);
        let timed = records.iter().all(|r| r.time_ms.is_some());
        let time_columns = levels
            .iter()
            .map(|&level| Column {
                criterion: Criterion::Time,
                level,
            })
            .collect();
        let mut time_acc = RankAccumulator::new(filters.clone(), time_columns);

        for &(image, level) in &groups {
            let mut scores = vec![[f64::NAN; 4]; filters.len()];
            for r in records
                .iter()
                .filter(|r| r.image_index == image && r.level == level)
            {
                scores[filter_pos(&r.filter)] =
                    [r.mae, r.mse, r.ncd, r.time_ms.unwrap_or(f64::NAN)];
            }
            let lp = level_pos(level);
            for (ci, _) in Criterion::EFFECTIVENESS.iter().enumerate() {
                let col: Vec<f64> = scores.iter().map(|s| s[ci]).collect();
                eff.add_group(ci * levels.len() + lp, &col, Better::Lower);
            }
            if timed {
                let col: Vec<f64> = scores.iter().map(|s| s[3]).collect();
                time_acc.add_group(lp, &col, Better::Lower);
            }
        }

        let times = timed.then(|| time_rows(&filters, &records));
        Ok(BenchReport {
            config,
            effectiveness: eff.finish(),
            efficiency: timed.then(|| time_acc.finish()),
            times,
            filters,
            levels,
            records,
            skipped,
        })
    }

    pub fn records_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        let body = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
        Ok(self.config.csv_comment() + &String::from_utf8(body).expect("csv output is UTF-8"))
    }

    pub fn effectiveness_csv(&self) -> String {
        self.config.csv_comment() + &self.effectiveness.to_csv()
    }

    pub fn efficiency_csv(&self) -> String {
        let body = match &self.efficiency {
            Some(t) => t.to_csv(),
            None => "filter,mean\n".to_string(),
        };
        self.config.csv_comment() + &body
    }

    pub fn times_csv(&self) -> String {
        let mut out = self.config.csv_comment();
        out.push_str("filter,mean_ms,relative,lut_ms\n");
        for row in self.times.iter().flatten() {
            let rel = row.relative.map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.6},{rel},{:.6}",
                row.filter, row.mean_ms, row.lut_ms
            );
        }
        out
    }

    pub fn markdown(&self) -> String {
        let mut out = String::from("# Filter benchmark\n\n## Configuration\n\n");
        out.push_str(&self.config.markdown());
        let images: Vec<&str> = {
            let mut seen: Vec<(usize, &str)> = Vec::new();
            for r in &self.records {
                if !seen.iter().any(|(i, _)| *i == r.image_index) {
                    seen.push((r.image_index, &r.image));
                }
            }
            seen.into_iter().map(|(_, n)| n).collect()
        };
        let _ = writeln!(
            out,
            "\nImages processed: {} ({})",
            images.len(),
            images.join(", ")
        );
        if !self.skipped.is_empty() {
            out.push_str("\nSkipped:\n\n");
            for (name, why) in &self.skipped {
                let _ = writeln!(out, "- {name}: {why}");
            }
        }
        out.push_str("\n## Effectiveness (mean rank, 0 is best)\n\n");
        out.push_str(&self.effectiveness.to_markdown());
        match (&self.efficiency, &self.times) {
            (Some(eff), Some(times)) => {
                out.push_str("\n## Efficiency (mean per-image time rank)\n\n");
                out.push_str(&eff.to_markdown());
                out.push_str("\n## Run time\n\n| Filter | Mean ms | Relative | Table ms |\n|---|---:|---:|---:|\n");
                let mut sorted: Vec<&TimeRow> = times.iter().collect();
                sorted.sort_by(|a, b| a.mean_ms.total_cmp(&b.mean_ms));
                for row in sorted {
                    let rel = row
                        .relative
                        .map(|r| r.to_string())
                        .unwrap_or_else(|| "-".into());
                    let _ = writeln!(
                        out,
                        "| {} | {:.3} | {rel} | {:.3} |",
                        row.filter, row.mean_ms, row.lut_ms
                    );
                }
            }
            _ => out.push_str("\nTiming disabled.\n"),
        }
        out
    }

    /// Writes `effectiveness.csv`, `efficiency.csv`, `times.csv`,
    /// `records.csv` and `report.md` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), BenchError> {
        std::fs::create_dir_all(dir)?;
        let files = [
            ("effectiveness.csv", self.effectiveness_csv()),
            ("efficiency.csv", self.efficiency_csv()),
            ("times.csv", self.times_csv()),
            ("records.csv", self.records_csv()?),
            ("report.md", self.markdown()),
        ];
        for (name, body) in files {
            rvf_core::io::write_atomic(&dir.join(name), body.as_bytes())?;
        }
        Ok(())
    }
}

/// Parses the output of [`BenchReport::records_csv`], skipping the config
/// comment lines.
pub fn read_records(text: &str) -> Result<Vec<Record>, BenchError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for r in rdr.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

fn time_rows(filters: &[String], records: &[Record]) -> Vec<TimeRow> {
    let mut rows: Vec<TimeRow> = filters
        .iter()
        .map(|f| {
            let mine: Vec<&Record> = records.iter().filter(|r| &r.filter == f).collect();
            let mean_ms =
                mine.iter().map(|r| r.time_ms.unwrap_or(0.0)).sum::<f64>() / mine.len() as f64;
            let lut_ms = mine.iter().filter_map(|r| r.lut_ms).fold(0.0, f64::max);
            TimeRow {
                filter: f.clone(),
                mean_ms,
                relative: None,
                lut_ms,
            }
        })
        .collect();
    let fastest = rows
        .iter()
        .filter(|r| r.filter != "none")
        .map(|r| r.mean_ms)
        .fold(f64::INFINITY, f64::min);
    if fastest.is_finite() && fastest > 0.0 {
        for row in &mut rows {
            row.relative = Some((row.mean_ms / fastest).round() as i64);
        }
    }
    rows
}
