use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rvf_core::{Criterion, Error as CoreError, FilterSpec, MeasureId, WindowSize};

/// One entry of a benchmark: a real filter, or the identity baseline that
/// returns the noisy image unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BenchFilter {
    Identity,
    Filter(FilterSpec),
}

impl BenchFilter {
    /// Every criterion the library implements plus the identity baseline:
    /// `none`, the sixteen measures in catalog order, then `ddf`.
    pub fn catalog(window: WindowSize) -> Vec<BenchFilter> {
        let mut out = vec![BenchFilter::Identity];
        out.extend(
            MeasureId::ALL
                .into_iter()
                .map(|id| BenchFilter::Filter(FilterSpec::new(id).with_window(window))),
        );
        out.push(BenchFilter::Filter(
            FilterSpec::new(Criterion::Ddf {
                p: Criterion::DEFAULT_DDF_P,
            })
            .with_window(window),
        ));
        out
    }

    /// Short, unique label used as the row key in reports.
    pub fn label(&self) -> &'static str {
        match self {
            BenchFilter::Identity => "none",
            BenchFilter::Filter(f) => f.criterion.label(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, BenchFilter::Identity)
    }
}

impl fmt::Display for BenchFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchFilter::Identity => f.write_str("none"),
            BenchFilter::Filter(spec) => spec.criterion.fmt(f),
        }
    }
}

/// Parses `all` or a comma-separated list such as `none,d1,cfs:C=100,t=2`.
/// Measure parameters are comma separated too, so a piece that does not start
/// with a known id continues the previous parameterized item.
pub fn parse_filter_list(s: &str, window: WindowSize) -> Result<Vec<BenchFilter>, CoreError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(BenchFilter::catalog(window));
    }
    let mut items: Vec<String> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let head = part.split(':').next().unwrap_or(part);
        let starts_item = head.eq_ignore_ascii_case("none")
            || head.eq_ignore_ascii_case("ddf")
            || head.parse::<MeasureId>().is_ok();
        match items.last_mut() {
            Some(prev) if !starts_item && prev.contains(':') => {
                prev.push(',');
                prev.push_str(part);
            }
            _ => items.push(part.to_string()),
        }
    }
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let filter = if item.eq_ignore_ascii_case("none") {
            BenchFilter::Identity
        } else {
            BenchFilter::Filter(FilterSpec::new(Criterion::from_str(&item)?).with_window(window))
        };
        if out
            .iter()
            .any(|f: &BenchFilter| f.label() == filter.label())
        {
            return Err(CoreError::Config(format!(
                "filter {} listed more than once",
                filter.label()
            )));
        }
        out.push(filter);
    }
    if out.is_empty() {
        return Err(CoreError::Config("empty filter list".to_string()));
    }
    Ok(out)
}

/// Settings of a benchmark run.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub corpus: Vec<PathBuf>,
    /// Sample corruption probabilities.
    pub levels: Vec<f64>,
    /// Per-channel corruption probabilities of the noise model.
    pub channel: [f64; 3],
    pub filters: Vec<BenchFilter>,
    pub seed: u64,
    /// Timed repetitions per (image, level, filter), after one warm-up run.
    pub reps: u32,
    /// When false, only effectiveness is measured and the report is fully
    /// deterministic.
    pub timing: bool,
    pub window: WindowSize,
}

impl BenchConfig {
    pub const DEFAULT_LEVELS: [f64; 3] = [0.10, 0.20, 0.30];
    pub const DEFAULT_REPS: u32 = 10;

    pub fn new(corpus: Vec<PathBuf>) -> Self {
        BenchConfig {
            corpus,
            levels: Self::DEFAULT_LEVELS.to_vec(),
            channel: [rvf_core::NoiseConfig::DEFAULT_CHANNEL; 3],
            filters: BenchFilter::catalog(WindowSize::DEFAULT),
            seed: 0,
            reps: Self::DEFAULT_REPS,
            timing: true,
            window: WindowSize::DEFAULT,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.corpus.is_empty() {
            return Err(CoreError::Config("benchmark corpus is empty".to_string()));
        }
        if self.filters.is_empty() {
            return Err(CoreError::Config("no filters to benchmark".to_string()));
        }
        if self.levels.is_empty() {
            return Err(CoreError::Config("no noise levels given".to_string()));
        }
        if self.timing && self.reps == 0 {
            return Err(CoreError::Config(
                "timing repetitions must be >= 1".to_string(),
            ));
        }
        for &level in &self.levels {
            rvf_core::NoiseConfig {
                phi: level,
                channel: self.channel,
                seed: 0,
            }
            .validate()?;
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise seed for one (image, level) cell, independent of the other images.
pub fn derive_seed(base: u64, image_index: usize, level: f64) -> u64 {
    let mut h = splitmix64(base);
    h = splitmix64(h ^ image_index as u64);
    splitmix64(h ^ level.to_bits())
}
