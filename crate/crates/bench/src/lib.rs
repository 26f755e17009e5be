//! Benchmark harness for reduced-ordering filters.
//!
//! [`run_benchmark`] corrupts every corpus image at every noise level, runs
//! each configured filter, scores the results with MAE, MSE and NCD, and
//! turns the per-image numbers into mean-rank tables. With timing enabled it
//! also times each filter single-threaded and ranks the times per image.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rvf_core::{corrupt, load_image, Execution, Image, NoiseConfig, QualityReport};

mod config;
mod rank;
mod report;
mod timing;

pub use config::{derive_seed, parse_filter_list, BenchConfig, BenchFilter};
pub use rank::{rank_measures, Better, Column, Criterion, RankAccumulator, RankRow, RankTable};
pub use report::{read_records, BenchReport, ConfigEcho, Record, TimeRow};
pub use timing::{prepare, time_filter, time_measure, time_prepared};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] rvf_core::Error),
    #[error("records file: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("no image of the corpus could be processed")]
    Empty,
}

/// Lists the PNG and PPM files of a directory in name order.
pub fn corpus_from_dir(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let entries = std::fs::read_dir(dir).map_err(|e| rvf_core::Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "ppm")) && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(
            rvf_core::Error::Config(format!("no .png or .ppm files in {}", dir.display())).into(),
        );
    }
    Ok(files)
}

fn config_echo(cfg: &BenchConfig, filters: &[BenchFilter]) -> ConfigEcho {
    let mut echo = ConfigEcho::default();
    let names: Vec<String> = cfg.corpus.iter().map(|p| p.display().to_string()).collect();
    echo.push("corpus", names.join(", "));
    let levels: Vec<String> = cfg.levels.iter().map(|l| l.to_string()).collect();
    echo.push("levels", levels.join(", "));
    echo.push(
        "channel probabilities",
        format!("{}, {}, {}", cfg.channel[0], cfg.channel[1], cfg.channel[2]),
    );
    echo.push("base seed", cfg.seed);
    echo.push(
        "per-image seed",
        "splitmix64(base, image index, level bits)",
    );
    echo.push("prng", rvf_core::noise::PRNG_NAME);
    echo.push(
        "window",
        format!("{0}x{0}, replicate border", cfg.window.side()),
    );
    let specs: Vec<String> = filters.iter().map(|f| f.to_string()).collect();
    echo.push("filters", specs.join(" "));
    if cfg.timing {
        echo.push(
            "timing",
            format!("{} reps after 1 warm-up, single-threaded", cfg.reps),
        );
    } else {
        echo.push("timing", "off");
    }
    echo.push("lab", rvf_core::quality::LAB_CONVENTION);
    echo
}

fn image_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs the whole benchmark. Images that fail to load or process are skipped
/// with a warning; the run fails only when nothing could be measured.
/// With `cfg.timing` off the report is a pure function of `cfg`.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let filters: Vec<BenchFilter> = cfg
        .filters
        .iter()
        .map(|f| match f {
            BenchFilter::Identity => BenchFilter::Identity,
            BenchFilter::Filter(s) => BenchFilter::Filter(s.with_window(cfg.window)),
        })
        .collect();
    let mut prepared = Vec::with_capacity(filters.len());
    for f in &filters {
        prepared.push(prepare(f)?);
    }

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (index, path) in cfg.corpus.iter().enumerate() {
        let name = image_name(path);
        match bench_image(cfg, index, &name, path, &filters, &prepared) {
            Ok(mut recs) => records.append(&mut recs),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped.push((name, e.to_string()));
            }
        }
    }
    BenchReport::from_records(config_echo(cfg, &filters), records, skipped)
}

type Prepared = (Option<rvf_core::PreparedFilter>, f64);

fn bench_image(
    cfg: &BenchConfig,
    index: usize,
    name: &str,
    path: &Path,
    filters: &[BenchFilter],
    prepared: &[Prepared],
) -> Result<Vec<Record>, BenchError> {
    let original = load_image(path)?;
    log::info!("{name}: {}x{}", original.cols(), original.rows());
    let mut out = Vec::new();
    for &level in &cfg.levels {
        let noise = NoiseConfig {
            phi: level,
            channel: cfg.channel,
            seed: derive_seed(cfg.seed, index, level),
        };
        let (noisy, _) = corrupt(&original, &noise)?;
        let quality: Vec<QualityReport> = prepared
            .par_iter()
            .map(|(p, _)| {
                let filtered: Image = match p {
                    None => noisy.clone(),
                    Some(p) => p.run(&noisy, Execution::Serial)?,
                };
                QualityReport::compute(&original, &filtered)
            })
            .collect::<Result<_, _>>()?;
        for ((filter, (p, lut_ms)), q) in filters.iter().zip(prepared).zip(quality) {
            let time_ms = match (cfg.timing, p) {
                (false, _) => None,
                (true, None) => Some(0.0),
                (true, Some(p)) => Some(time_prepared(p, &noisy, cfg.reps)?),
            };
            out.push(Record {
                image_index: index,
                image: name.to_string(),
                level,
                filter: filter.label().to_string(),
                mae: q.mae,
                mse: q.mse,
                ncd: q.ncd,
                time_ms,
                lut_ms: cfg.timing.then_some(*lut_ms),
            });
        }
    }
    Ok(out)
}
