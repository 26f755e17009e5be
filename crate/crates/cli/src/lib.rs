//! Argument parsing and command execution for the `rvf` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use rvf_bench::{corpus_from_dir, parse_filter_list, run_benchmark, BenchConfig, BenchError};
use rvf_core::{
    corrupt, filter_image, load_image, save_image, Criterion, FilterSpec, MeasureId, NoiseConfig,
    QualityReport, WindowSize,
};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rvf_core::Error),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{0}")]
    Usage(String),
    /// Help or version text; not a failure.
    #[error("{0}")]
    Display(String),
}

impl CliError {
    /// 2 for I/O and unreadable files, 3 for configuration and usage errors,
    /// 4 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        use rvf_core::Error as E;
        let core = match self {
            CliError::Core(e) => e,
            CliError::Bench(BenchError::Core(e)) => e,
            CliError::Bench(BenchError::Io(_) | BenchError::Csv(_)) => return 2,
            CliError::Bench(BenchError::Empty) => return 2,
            CliError::Usage(_) => return 3,
            CliError::Display(_) => return 0,
        };
        match core {
            E::Io { .. } | E::Format { .. } => 2,
            E::Config(_) | E::DimensionMismatch { .. } => 3,
            E::Numeric { .. } | E::UndefinedMetric(_) | E::OutOfBounds { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rvf",
    version,
    about = "Reduced-ordering vector filters for color images"
)]
struct Cli {
    /// Worker threads for filtering (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// File of `key = value` lines supplying flag defaults; flags given on
    /// the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt an image with correlated impulsive noise.
    Noise(NoiseArgs),
    /// Filter an image with a reduced-ordering vector filter.
    Filter(FilterArgs),
    /// Compare a processed image against the original (MAE, MSE, NCD).
    Metrics(MetricsArgs),
    /// Rank filters on a corpus of images.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Probability that a pixel is corrupted.
    #[arg(long, allow_negative_numbers = true)]
    phi: f64,
    /// Probability that a corrupted pixel has only channel 1 replaced.
    #[arg(long, default_value_t = NoiseConfig::DEFAULT_CHANNEL, allow_negative_numbers = true)]
    phi1: f64,
    #[arg(long, default_value_t = NoiseConfig::DEFAULT_CHANNEL, allow_negative_numbers = true)]
    phi2: f64,
    #[arg(long, default_value_t = NoiseConfig::DEFAULT_CHANNEL, allow_negative_numbers = true)]
    phi3: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a color-coded map of the corrupted pixels.
    #[arg(long, value_name = "FILE")]
    mask: Option<PathBuf>,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Ordering criterion, e.g. `d1`, `fms:K=512`, `cfs:C=150,t=4`, `ddf:p=2`.
    #[arg(long, value_name = "SPEC", value_parser = parse_criterion)]
    measure: Criterion,
    /// Side of the square window (odd, at least 3).
    #[arg(long, default_value_t = 3, value_parser = parse_window)]
    window: usize,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Write JSON (the default).
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Write CSV.
    #[arg(long)]
    csv: bool,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    original: PathBuf,
    filtered: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of PNG/PPM images.
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,
    /// Comma-separated noise probabilities.
    #[arg(long, default_value = "0.1,0.2,0.3", value_parser = parse_levels)]
    levels: Levels,
    /// `all` or a comma-separated list of criteria, `none` for the identity.
    #[arg(long, default_value = "all")]
    measures: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timed runs per filter and image, after one warm-up run.
    #[arg(long, default_value_t = BenchConfig::DEFAULT_REPS)]
    reps: u32,
    /// Skip timing; the reports are then identical across runs.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, default_value_t = 3, value_parser = parse_window)]
    window: usize,
    /// Output directory for the report files.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
struct Levels(Vec<f64>);

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse::<Criterion>().map_err(|e| match e {
        rvf_core::Error::Config(msg) => msg,
        other => other.to_string(),
    })
}

fn parse_window(s: &str) -> Result<usize, String> {
    let side: usize = s.parse().map_err(|_| format!("not an integer: {s}"))?;
    WindowSize::from_side(side).map_err(|e| e.to_string())?;
    Ok(side)
}

fn parse_levels(s: &str) -> Result<Levels, String> {
    let levels = s
        .split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| format!("not a number: {p}"))?;
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(format!("noise level must be in [0, 1], got {v}"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Levels(levels))
}

fn probability(flag: &str, v: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "--{flag}: must be in [0, 1], got {v}"
        )))
    }
}

/// Measure ids with their default parameters, appended to every help page.
fn measure_help() -> String {
    let mut out = String::from("Measures (id and defaults):\n");
    for id in MeasureId::ALL {
        let spec = id.default_spec().to_string();
        let params = spec
            .split_once(':')
            .map(|(_, p)| p)
            .unwrap_or("no parameters");
        let _ = writeln!(out, "  {:<11} {}", id.name(), params);
    }
    let ddf = Criterion::Ddf {
        p: Criterion::DEFAULT_DDF_P,
    }
    .to_string();
    let _ = writeln!(
        out,
        "  {:<11} {}",
        "ddf",
        ddf.split_once(':').map(|(_, p)| p).unwrap_or("")
    );
    out.push_str("  none        identity (bench only)\n");
    out
}

fn command() -> clap::Command {
    let help = measure_help();
    let mut cmd = Cli::command()
        .args_override_self(true)
        .after_help(help.clone());
    for name in ["noise", "filter", "metrics", "bench"] {
        cmd = cmd.mut_subcommand(name, |c| {
            c.args_override_self(true).after_help(help.clone())
        });
    }
    cmd
}

/// A parsed command line.
#[derive(Debug)]
pub struct CliConfig {
    cli: Cli,
}

impl CliConfig {
    /// The filter a `filter` invocation will apply.
    pub fn filter_spec(&self) -> Option<FilterSpec> {
        match &self.cli.command {
            Command::Filter(a) => Some(
                FilterSpec::new(a.measure)
                    .with_window(WindowSize::from_side(a.window).expect("validated")),
            ),
            _ => None,
        }
    }

    /// The noise model of a `noise` invocation, after validation.
    pub fn noise_config(&self) -> Option<NoiseConfig> {
        match &self.cli.command {
            Command::Noise(a) => Some(NoiseConfig {
                phi: a.phi,
                channel: [a.phi1, a.phi2, a.phi3],
                seed: a.seed,
            }),
            _ => None,
        }
    }

    pub fn threads(&self) -> Option<usize> {
        self.cli.threads
    }
}

fn clap_error(e: clap::Error) -> CliError {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Display(e.to_string()),
        _ => CliError::Usage(e.render().to_string().trim_end().to_string()),
    }
}

/// Reads `key = value` lines; `#` starts a comment.
fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| rvf_core::Error::io(path, e))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected `key = value`",
                path.display(),
                no + 1
            ))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

const SUBCOMMANDS: [&str; 4] = ["noise", "filter", "metrics", "bench"];

/// Finds the subcommand and the `--config` value without a full parse, since
/// the file may supply required flags.
fn locate(argv: &[String]) -> (Option<usize>, Option<PathBuf>) {
    let mut sub = None;
    let mut config = None;
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if a == "--" {
            break;
        }
        if a == "--config" {
            config = argv.get(i + 1).map(PathBuf::from);
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if a == "--threads" && sub.is_none() {
            i += 2;
            continue;
        } else if sub.is_none() && SUBCOMMANDS.contains(&a) {
            sub = Some(i);
        }
        i += 1;
    }
    (sub, config)
}

/// Parses a full argv (program name first). Flags from a `--config` file are
/// placed before the command-line flags so that the latter take precedence.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<CliConfig, CliError> {
    let argv: Vec<String> = argv.iter().map(|s| s.as_ref().to_string()).collect();
    let (sub_pos, config) = locate(&argv);
    let merged = match (sub_pos, config) {
        (Some(pos), Some(config)) => {
            let mut root = command();
            root.build();
            let sub = root
                .find_subcommand(&argv[pos])
                .cloned()
                .expect("known subcommand");
            let mut merged = argv[..=pos].to_vec();
            merged.extend(config_flags(&config, &sub)?);
            merged.extend_from_slice(&argv[pos + 1..]);
            merged
        }
        _ => argv,
    };
    let matches = command()
        .try_get_matches_from(&merged)
        .map_err(clap_error)?;
    finish(Cli::from_arg_matches(&matches).map_err(clap_error)?)
}

/// Turns the lines of a config file into `--key=value` flags of `sub`.
fn config_flags(config: &Path, sub: &clap::Command) -> Result<Vec<String>, CliError> {
    let mut flags = Vec::new();
    for (key, value) in read_config_file(config)? {
        let key = key.replace('_', "-");
        let bad = |msg: String| CliError::Usage(format!("{}: {msg}", config.display()));
        if key == "config" {
            return Err(bad("config files cannot nest".into()));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && !a.is_positional())
            .ok_or_else(|| bad(format!("unknown key `{key}` for {}", sub.get_name())))?;
        if arg.get_action().takes_values() {
            flags.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" => flags.push(format!("--{key}")),
                "false" => {}
                _ => return Err(bad(format!("`{key}` expects true or false"))),
            }
        }
    }
    Ok(flags)
}

fn finish(cli: Cli) -> Result<CliConfig, CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads: must be at least 1".into()));
    }
    if let Command::Noise(a) = &cli.command {
        probability("phi", a.phi)?;
        probability("phi1", a.phi1)?;
        probability("phi2", a.phi2)?;
        probability("phi3", a.phi3)?;
        if a.phi1 + a.phi2 + a.phi3 > 1.0 + 1e-12 {
            return Err(CliError::Usage(format!(
                "--phi1 + --phi2 + --phi3 must not exceed 1, got {}",
                a.phi1 + a.phi2 + a.phi3
            )));
        }
    }
    Ok(CliConfig { cli })
}

/// Executes a parsed command line.
pub fn run(cfg: CliConfig) -> Result<(), CliError> {
    let level = if cfg.cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    let pool = match cfg.cli.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("--threads: {e}")))?,
        ),
        None => None,
    };
    match pool {
        Some(pool) => pool.install(|| execute(&cfg)),
        None => execute(&cfg),
    }
}

fn execute(cfg: &CliConfig) -> Result<(), CliError> {
    match &cfg.cli.command {
        Command::Noise(a) => {
            let noise = cfg.noise_config().expect("noise command");
            let img = load_image(&a.input)?;
            let (noisy, mask) = corrupt(&img, &noise)?;
            save_image(&noisy, &a.output)?;
            if let Some(path) = &a.mask {
                save_image(&mask.to_image(), path)?;
            }
            let counts = mask.counts();
            log::info!(
                "corrupted {} of {} pixels (seed {})",
                counts[1..].iter().sum::<usize>(),
                counts.iter().sum::<usize>(),
                noise.seed
            );
        }
        Command::Filter(a) => {
            let spec = cfg.filter_spec().expect("filter command");
            let img = load_image(&a.input)?;
            let out = filter_image(&img, &spec)?;
            save_image(&out, &a.output)?;
            log::info!("{spec} applied to {}", a.input.display());
        }
        Command::Metrics(a) => {
            let original = load_image(&a.original)?;
            let other = load_image(&a.filtered)?;
            let q = QualityReport::compute(&original, &other)?;
            let text = if a.csv {
                metrics_csv(&a.original, &a.filtered, &q)
            } else {
                metrics_json(&a.original, &a.filtered, &q)
            };
            match &a.out {
                Some(path) => rvf_core::io::write_atomic(path, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Bench(a) => {
            let window = WindowSize::from_side(a.window)?;
            let mut bench = BenchConfig::new(corpus_from_dir(&a.corpus)?);
            bench.levels = a.levels.0.clone();
            bench.filters = parse_filter_list(&a.measures, window)
                .map_err(|e| CliError::Usage(format!("--measures: {e}")))?;
            bench.seed = a.seed;
            bench.reps = a.reps;
            bench.timing = !a.no_timing;
            bench.window = window;
            let report = run_benchmark(&bench)?;
            report.write_to(&a.out)?;
            log::info!("report written to {}", a.out.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MetricsOut<'a> {
    original: &'a str,
    filtered: &'a str,
    mae: f64,
    mse: f64,
    ncd: f64,
}

fn metrics_json(original: &Path, filtered: &Path, q: &QualityReport) -> String {
    let o = original.display().to_string();
    let f = filtered.display().to_string();
    let out = MetricsOut {
        original: &o,
        filtered: &f,
        mae: q.mae,
        mse: q.mse,
        ncd: q.ncd,
    };
    serde_json::to_string_pretty(&out).expect("plain struct serializes") + "\n"
}

fn metrics_csv(original: &Path, filtered: &Path, q: &QualityReport) -> String {
    let quote = |p: &Path| {
        let s = p.display().to_string();
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s
        }
    };
    format!(
        "original,filtered,mae,mse,ncd\n{},{},{},{},{}\n",
        quote(original),
        quote(filtered),
        q.mae,
        q.mse,
        q.ncd
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rvf_core::{MeasureSpec, Orientation};

    fn parse(args: &str) -> Result<CliConfig, CliError> {
        let argv: Vec<&str> = std::iter::once("rvf")
            .chain(args.split_whitespace())
            .collect();
        parse_args(&argv)
    }

    #[test]
    fn cfs_parameters() {
        let spec = parse("filter --measure cfs:C=150,t=4 in.png out.png")
            .unwrap()
            .filter_spec()
            .unwrap();
        assert_eq!(
            spec.criterion,
            Criterion::Measure(MeasureSpec::Cfs { c: 150.0, t: 4.0 })
        );
        assert_eq!(spec.window.len(), 9);
    }

    #[test]
    fn defaults() {
        let spec = parse("filter --measure d2 in.png out.png")
            .unwrap()
            .filter_spec()
            .unwrap();
        assert_eq!(spec.criterion, Criterion::Measure(MeasureSpec::D2));
        assert_eq!(spec.criterion.orientation(), Orientation::Minimize);
        assert_eq!(spec.window, WindowSize::DEFAULT);
        let n = parse("noise --phi 0.2 a.png b.png")
            .unwrap()
            .noise_config()
            .unwrap();
        assert_eq!(n, NoiseConfig::new(0.2, 0));
    }

    #[test]
    fn errors_name_the_flag() {
        let e = parse("noise --phi 1.5 a.png b.png").unwrap_err();
        assert!(e.to_string().contains("--phi"), "{e}");
        assert_eq!(e.exit_code(), 3);
        let e = parse("noise --phi 0.1 --phi2 -0.5 a.png b.png").unwrap_err();
        assert!(e.to_string().contains("--phi2"), "{e}");
        let e = parse("filter --measure bogus a.png b.png").unwrap_err();
        assert!(e.to_string().contains("--measure"), "{e}");
        assert_eq!(e.exit_code(), 3);
        let e = parse("filter --measure fms:K=x a.png b.png").unwrap_err();
        assert!(e.to_string().contains("--measure"), "{e}");
        let e = parse("filter --measure d1 --window 4 a.png b.png").unwrap_err();
        assert!(e.to_string().contains("--window"), "{e}");
        assert!(parse("filter --measure d1 --frobnicate a.png b.png").is_err());
    }

    #[test]
    fn help_lists_measures() {
        for sub in ["noise", "filter", "metrics", "bench"] {
            let Err(CliError::Display(text)) = parse(&format!("{sub} --help")) else {
                panic!("help for {sub}");
            };
            for id in MeasureId::ALL {
                assert!(
                    text.contains(&format!("  {:<11}", id.name())),
                    "{sub}: {id}"
                );
            }
            assert!(text.contains("K=1024") && text.contains("C=150,t=4") && text.contains("p=2"));
        }
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("noise.conf");
        std::fs::write(&path, "# defaults\nphi = 0.3\nseed = 9\nphi1 = 0.5\n").unwrap();
        let argv = format!("noise --config {} --seed 4 a.png b.png", path.display());
        let n = parse(&argv).unwrap().noise_config().unwrap();
        assert_eq!((n.phi, n.seed, n.channel[0]), (0.3, 4, 0.5));

        std::fs::write(&path, "colour = red\n").unwrap();
        let e = parse(&argv).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn threads_must_be_positive() {
        assert!(parse("filter --threads 0 --measure d1 a.png b.png").is_err());
        let cfg = parse("filter --threads 2 --measure d1 a.png b.png").unwrap();
        assert_eq!(cfg.threads(), Some(2));
    }
}
