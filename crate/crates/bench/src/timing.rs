use std::time::{Duration, Instant};

use rvf_core::{Execution, FilterSpec, Image, PreparedFilter};

use crate::config::BenchFilter;

/// Builds the lookup tables of a filter and returns them with the build time
/// in milliseconds. The identity baseline has nothing to build.
pub fn prepare(filter: &BenchFilter) -> rvf_core::Result<(Option<PreparedFilter>, f64)> {
    match filter {
        BenchFilter::Identity => Ok((None, 0.0)),
        BenchFilter::Filter(spec) => {
            let start = Instant::now();
            let prepared = PreparedFilter::new(spec)?;
            Ok((Some(prepared), ms(start.elapsed())))
        }
    }
}

/// Mean wall time in milliseconds of `reps` single-threaded runs, after one
/// untimed warm-up. Table construction is not included.
pub fn time_prepared(prepared: &PreparedFilter, img: &Image, reps: u32) -> rvf_core::Result<f64> {
    let reps = reps.max(1);
    std::hint::black_box(prepared.run(img, Execution::Serial)?);
    let mut total = Duration::ZERO;
    for _ in 0..reps {
        let start = Instant::now();
        let out = prepared.run(img, Execution::Serial)?;
        total += start.elapsed();
        std::hint::black_box(out);
    }
    Ok(ms(total) / reps as f64)
}

/// Convenience wrapper over [`time_prepared`]; `none` costs 0 ms.
pub fn time_measure(img: &Image, filter: &BenchFilter, reps: u32) -> rvf_core::Result<f64> {
    match prepare(filter)? {
        (None, _) => Ok(0.0),
        (Some(p), _) => time_prepared(&p, img, reps),
    }
}

/// [`time_measure`] for a plain filter spec.
pub fn time_filter(img: &Image, spec: &FilterSpec, reps: u32) -> rvf_core::Result<f64> {
    time_measure(img, &BenchFilter::Filter(*spec), reps)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;
    use rvf_core::{MeasureId, Rgb};

    #[test]
    fn identity_costs_nothing() {
        let img = Image::filled(8, 8, Rgb::new(1, 2, 3));
        assert_eq!(time_measure(&img, &BenchFilter::Identity, 3).unwrap(), 0.0);
    }

    #[test]
    fn real_filter_takes_time() {
        let img = Image::from_fn(32, 32, |r, c| Rgb::new(r as u8, c as u8, 7));
        let t = time_filter(&img, &FilterSpec::new(MeasureId::D1), 2).unwrap();
        assert!(t > 0.0 && t.is_finite());
    }
}
