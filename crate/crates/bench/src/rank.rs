//! Competition ranking of filters and averaged rank tables.

use std::fmt;

/// Which direction of a score is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Better {
    Lower,
    Higher,
}

/// Ranks scores starting at 0: a score's rank is the number of scores that
/// are strictly better, so tied scores share the lowest rank. NaN scores are
/// excluded (their rank is `None`) and do not count against the others.
pub fn rank_measures(scores: &[f64], better: Better) -> Vec<Option<usize>> {
    let nan = scores.iter().filter(|v| v.is_nan()).count();
    if nan > 0 {
        log::warn!("{nan} NaN score(s) excluded from ranking");
    }
    let mut order: Vec<usize> = (0..scores.len()).filter(|&i| !scores[i].is_nan()).collect();
    let key = |v: f64| match better {
        Better::Lower => v,
        Better::Higher => -v,
    };
    order.sort_by(|&a, &b| key(scores[a]).total_cmp(&key(scores[b])));
    let mut ranks = vec![None; scores.len()];
    for (pos, &i) in order.iter().enumerate() {
        let rank = if pos > 0 && key(scores[order[pos - 1]]) == key(scores[i]) {
            ranks[order[pos - 1]].expect("earlier entries are ranked")
        } else {
            pos
        };
        ranks[i] = Some(rank);
    }
    ranks
}

/// The quality or cost a rank column is based on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    Mae,
    Mse,
    Ncd,
    Time,
}

impl Criterion {
    pub const EFFECTIVENESS: [Criterion; 3] = [Criterion::Mae, Criterion::Mse, Criterion::Ncd];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Mae => "MAE",
            Criterion::Mse => "MSE",
            Criterion::Ncd => "NCD",
            Criterion::Time => "Time",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A column of a rank table: one criterion at one noise level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Column {
    pub criterion: Criterion,
    pub level: f64,
}

impl Column {
    /// E.g. `MAE@10%`.
    pub fn header(&self) -> String {
        format!("{}@{}%", self.criterion, format_percent(self.level))
    }
}

pub(crate) fn format_percent(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}

/// Mean ranks of one filter.
#[derive(Clone, Debug, PartialEq)]
pub struct RankRow {
    pub filter: String,
    /// Mean rank per column; `None` when the filter was never ranked there.
    pub cells: Vec<Option<f64>>,
    /// Arithmetic mean of the available cells.
    pub mean: Option<f64>,
}

/// Filters by rows, (criterion, level) by columns, cells hold mean ranks.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable {
    pub columns: Vec<Column>,
    pub rows: Vec<RankRow>,
}

/// Accumulates ranks per (filter, column) before averaging.
#[derive(Clone, Debug)]
pub struct RankAccumulator {
    filters: Vec<String>,
    columns: Vec<Column>,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl RankAccumulator {
    pub fn new(filters: Vec<String>, columns: Vec<Column>) -> Self {
        let cells = filters.len() * columns.len();
        RankAccumulator {
            filters,
            columns,
            sums: vec![0.0; cells],
            counts: vec![0; cells],
        }
    }

    /// Ranks one comparison group (all filters on one image at one level for
    /// one criterion). `scores[i]` belongs to filter `i`; missing entries are
    /// `NaN`.
    pub fn add_group(&mut self, column: usize, scores: &[f64], better: Better) {
        debug_assert_eq!(scores.len(), self.filters.len());
        for (f, rank) in rank_measures(scores, better).into_iter().enumerate() {
            if let Some(r) = rank {
                let cell = f * self.columns.len() + column;
                self.sums[cell] += r as f64;
                self.counts[cell] += 1;
            }
        }
    }

    pub fn finish(self) -> RankTable {
        let ncols = self.columns.len();
        let rows = self
            .filters
            .into_iter()
            .enumerate()
            .map(|(f, filter)| {
                let cells: Vec<Option<f64>> = (0..ncols)
                    .map(|c| {
                        let i = f * ncols + c;
                        (self.counts[i] > 0).then(|| self.sums[i] / self.counts[i] as f64)
                    })
                    .collect();
                let present: Vec<f64> = cells.iter().flatten().copied().collect();
                let mean = (!present.is_empty())
                    .then(|| present.iter().sum::<f64>() / present.len() as f64);
                RankRow {
                    filter,
                    cells,
                    mean,
                }
            })
            .collect();
        RankTable {
            columns: self.columns,
            rows,
        }
    }
}

impl RankTable {
    pub fn row(&self, filter: &str) -> Option<&RankRow> {
        self.rows.iter().find(|r| r.filter == filter)
    }

    pub fn cell(&self, filter: &str, criterion: Criterion, level: f64) -> Option<f64> {
        let col = self
            .columns
            .iter()
            .position(|c| c.criterion == criterion && c.level == level)?;
        self.row(filter)?.cells[col]
    }

    /// Rows ordered by overall mean rank (ties keep their original order).
    pub fn sorted_by_mean(&self) -> Vec<&RankRow> {
        let mut rows: Vec<&RankRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            a.mean
                .unwrap_or(f64::INFINITY)
                .total_cmp(&b.mean.unwrap_or(f64::INFINITY))
        });
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("filter");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.header());
        }
        out.push_str(",mean\n");
        for row in &self.rows {
            out.push_str(&row.filter);
            for cell in row.cells.iter().chain(std::iter::once(&row.mean)) {
                out.push(',');
                if let Some(v) = cell {
                    out.push_str(&format!("{v:.4}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// A Markdown table sorted by mean rank.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Filter |");
        for c in &self.columns {
            out.push_str(&format!(" {} |", c.header()));
        }
        out.push_str(" Mean |\n|---|");
        for _ in &self.columns {
            out.push_str("---:|");
        }
        out.push_str("---:|\n");
        for row in self.sorted_by_mean() {
            out.push_str(&format!("| {} |", row.filter));
            for cell in row.cells.iter().chain(std::iter::once(&row.mean)) {
                match cell {
                    Some(v) => out.push_str(&format!(" {v:.2} |")),
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        out
    }
}
