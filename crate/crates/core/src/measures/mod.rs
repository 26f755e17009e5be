//! Pairwise distance and similarity measures between color vectors.
//!
//! All measures operate on raw 8-bit channel values (no rescaling to `[0, 1]`)
//! and return `f64`. Quantities that are integral (sums of absolute or squared
//! differences, dot products, squared norms) are accumulated exactly in
//! integers before conversion, so the results are symmetric bit-for-bit.
//!
//! Zero-vector conventions:
//! - `bray`, `goude`, `soergel`: distance 0 when both vectors are zero.
//! - `canberra`, `divergence`, `ware`: a channel with `x_k = y_k = 0`
//!   contributes nothing.
//! - `cosine`: `pi` when exactly one vector is zero, 0 when both are.
//! - `fds`: 0 when exactly one vector is zero, 1 when both are.

mod lut;
mod spec;

use std::f64::consts::PI;

pub use lut::{lut_eval, lut_eval_cfs, MeasureTables, PairLut, PairTerm, SpatialLut, SqrtLut};
pub use spec::{MeasureId, MeasureSpec, Orientation};

use crate::error::{Error, Result};
use crate::image::Rgb;

/// A pixel coordinate `(row, col)`.
pub type Position = (usize, usize);

#[inline(always)]
fn abs_diff(a: u8, b: u8) -> u32 {
    a.abs_diff(b) as u32
}

#[inline(always)]
pub(crate) fn sum_abs_diff(x: Rgb, y: Rgb) -> u32 {
    let (x, y) = (x.0, y.0);
    abs_diff(x[0], y[0]) + abs_diff(x[1], y[1]) + abs_diff(x[2], y[2])
}

#[inline(always)]
pub(crate) fn sum_sq_diff(x: Rgb, y: Rgb) -> u32 {
    let (x, y) = (x.0, y.0);
    let d0 = abs_diff(x[0], y[0]);
    let d1 = abs_diff(x[1], y[1]);
    let d2 = abs_diff(x[2], y[2]);
    d0 * d0 + d1 * d1 + d2 * d2
}

#[inline(always)]
fn dot(x: Rgb, y: Rgb) -> u32 {
    let (x, y) = (x.0, y.0);
    x[0] as u32 * y[0] as u32 + x[1] as u32 * y[1] as u32 + x[2] as u32 * y[2] as u32
}

#[inline(always)]
fn norm_sq(x: Rgb) -> u32 {
    dot(x, x)
}

/// City-block distance.
#[inline]
pub fn d1(x: Rgb, y: Rgb) -> f64 {
    sum_abs_diff(x, y) as f64
}

/// Euclidean distance.
#[inline]
pub fn d2(x: Rgb, y: Rgb) -> f64 {
    (sum_sq_diff(x, y) as f64).sqrt()
}

/// Squared Euclidean distance.
#[inline]
pub fn d2sq(x: Rgb, y: Rgb) -> f64 {
    sum_sq_diff(x, y) as f64
}

/// Chessboard distance.
#[inline]
pub fn dinf(x: Rgb, y: Rgb) -> f64 {
    max_abs_diff(x, y) as f64
}

#[inline(always)]
pub(crate) fn max_abs_diff(x: Rgb, y: Rgb) -> u32 {
    let (a, b) = (x.0, y.0);
    abs_diff(a[0], b[0])
        .max(abs_diff(a[1], b[1]))
        .max(abs_diff(a[2], b[2]))
}

/// Minkowski distance of order `p >= 1`. `p = inf` gives [`dinf`].
#[inline]
pub fn minkowski(x: Rgb, y: Rgb, p: f64) -> f64 {
    if p == 1.0 {
        d1(x, y)
    } else if p == 2.0 {
        d2(x, y)
    } else if p.is_infinite() {
        dinf(x, y)
    } else {
        let s: f64 = (0..3)
            .map(|k| (abs_diff(x.0[k], y.0[k]) as f64).powf(p))
            .sum();
        s.powf(1.0 / p)
    }
}

#[inline]
pub fn bray(x: Rgb, y: Rgb) -> f64 {
    let den: u32 = x.0.iter().chain(y.0.iter()).map(|&v| v as u32).sum();
    if den == 0 {
        return 0.0;
    }
    sum_abs_diff(x, y) as f64 / den as f64
}

#[inline(always)]
pub(crate) fn canberra_term(a: u8, b: u8) -> f64 {
    let s = a as u32 + b as u32;
    if s == 0 {
        0.0
    } else {
        abs_diff(a, b) as f64 / s as f64
    }
}

#[inline]
pub fn canberra(x: Rgb, y: Rgb) -> f64 {
    let (x, y) = (x.0, y.0);
    canberra_term(x[0], y[0]) + canberra_term(x[1], y[1]) + canberra_term(x[2], y[2])
}

#[inline(always)]
pub(crate) fn sqrt_term(a: u8) -> f64 {
    (a as f64).sqrt()
}

#[inline]
pub fn chord(x: Rgb, y: Rgb) -> f64 {
    chord_with(x, y, sqrt_term)
}

#[inline(always)]
pub(crate) fn chord_with(x: Rgb, y: Rgb, root: impl Fn(u8) -> f64) -> f64 {
    let (x, y) = (x.0, y.0);
    let d0 = root(x[0]) - root(y[0]);
    let d1 = root(x[1]) - root(y[1]);
    let d2 = root(x[2]) - root(y[2]);
    (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
}

/// Angle between the two vectors, in radians.
///
/// The cosine is formed as `x.y / sqrt(|x|^2 |y|^2)` from exact integer
/// quantities, so collinear vectors give exactly 0.
#[inline]
pub fn cosine(x: Rgb, y: Rgb) -> f64 {
    let nx = norm_sq(x) as u64;
    let ny = norm_sq(y) as u64;
    match (nx == 0, ny == 0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => PI,
        (false, false) => {
            let c = dot(x, y) as f64 / ((nx * ny) as f64).sqrt();
            c.clamp(-1.0, 1.0).acos()
        }
    }
}

#[inline(always)]
pub(crate) fn divergence_term(a: u8, b: u8) -> f64 {
    let s = a as u32 + b as u32;
    if s == 0 {
        0.0
    } else {
        let d = abs_diff(a, b);
        (d * d) as f64 / s as f64
    }
}

#[inline]
pub fn divergence(x: Rgb, y: Rgb) -> f64 {
    let (x, y) = (x.0, y.0);
    (divergence_term(x[0], y[0]) + divergence_term(x[1], y[1]) + divergence_term(x[2], y[2])).sqrt()
}

/// `sqrt((|x|^2 + |y|^2 - 2 x.y) / (|x|^2 + |y|^2 + 2 x.y))`, evaluated as
/// `sqrt(|x - y|^2 / |x + y|^2)` in integers.
#[inline]
pub fn goude(x: Rgb, y: Rgb) -> f64 {
    let (a, b) = (x.0, y.0);
    let mut den = 0u32;
    for k in 0..3 {
        let s = a[k] as u32 + b[k] as u32;
        den += s * s;
    }
    if den == 0 {
        return 0.0;
    }
    (sum_sq_diff(x, y) as f64 / den as f64).sqrt()
}

#[inline]
pub fn soergel(x: Rgb, y: Rgb) -> f64 {
    let (a, b) = (x.0, y.0);
    let den = a[0].max(b[0]) as u32 + a[1].max(b[1]) as u32 + a[2].max(b[2]) as u32;
    if den == 0 {
        return 0.0;
    }
    sum_abs_diff(x, y) as f64 / den as f64
}

#[inline(always)]
pub(crate) fn ware_term(a: u8, b: u8) -> f64 {
    let m = a.max(b);
    if m == 0 {
        0.0
    } else {
        abs_diff(a, b) as f64 / m as f64
    }
}

#[inline]
pub fn ware(x: Rgb, y: Rgb) -> f64 {
    let (x, y) = (x.0, y.0);
    ware_term(x[0], y[0]) + ware_term(x[1], y[1]) + ware_term(x[2], y[2])
}

#[inline(always)]
pub(crate) fn fms_term(a: u8, b: u8, k: f64) -> f64 {
    (a.min(b) as f64 + k) / (a.max(b) as f64 + k)
}

/// Fuzzy magnitude similarity on integer vectors.
#[inline]
pub fn fms(x: Rgb, y: Rgb, k: f64) -> f64 {
    let (x, y) = (x.0, y.0);
    fms_term(x[0], y[0], k) * fms_term(x[1], y[1], k) * fms_term(x[2], y[2], k)
}

/// Fuzzy magnitude similarity on real-valued vectors.
#[inline]
pub fn fms_real(x: [f64; 3], y: [f64; 3], k: f64) -> f64 {
    let term = |a: f64, b: f64| (a.min(b) + k) / (a.max(b) + k);
    term(x[0], y[0]) * term(x[1], y[1]) * term(x[2], y[2])
}

/// `x / |x|`, or `None` for the zero vector.
#[inline]
pub fn unit_vector(x: Rgb) -> Option<[f64; 3]> {
    let n = norm_sq(x);
    if n == 0 {
        return None;
    }
    let norm = (n as f64).sqrt();
    Some([
        x.0[0] as f64 / norm,
        x.0[1] as f64 / norm,
        x.0[2] as f64 / norm,
    ])
}

/// Fuzzy directional similarity: [`fms_real`] of the unit-normalized vectors.
#[inline]
pub fn fds(x: Rgb, y: Rgb, k: f64) -> f64 {
    fds_units(unit_vector(x), unit_vector(y), k)
}

/// [`fds`] from precomputed [`unit_vector`]s.
#[inline(always)]
pub(crate) fn fds_units(ux: Option<[f64; 3]>, uy: Option<[f64; 3]>, k: f64) -> f64 {
    match (ux, uy) {
        (Some(ux), Some(uy)) => fms_real(ux, uy, k),
        (None, None) => 1.0,
        _ => 0.0,
    }
}

/// Fuzzy magnitude-directional similarity.
#[inline]
pub fn fmds(x: Rgb, y: Rgb, k1: f64, k2: f64) -> f64 {
    fms(x, y, k1) * fds(x, y, k2)
}

/// Chebyshev distance between two pixel coordinates.
#[inline(always)]
pub fn chebyshev(p: Position, q: Position) -> usize {
    p.0.abs_diff(q.0).max(p.1.abs_diff(q.1))
}

#[inline(always)]
pub(crate) fn cfs_color_term(x: Rgb, y: Rgb, c: f64) -> f64 {
    c / (c + d2(x, y))
}

#[inline(always)]
pub(crate) fn cfs_spatial_term(offset: usize, t: f64) -> f64 {
    t / (t + offset as f64)
}

/// Combined fuzzy similarity of color closeness and spatial proximity.
pub fn eval_cfs(x: Rgb, px: Position, y: Rgb, py: Position, c: f64, t: f64) -> f64 {
    cfs_color_term(x, y, c) * cfs_spatial_term(chebyshev(px, py), t)
}

/// Evaluates a position-independent measure directly from its formula.
///
/// `cfs` needs pixel coordinates and is rejected here; use [`eval_cfs`].
pub fn eval_measure(spec: &MeasureSpec, x: Rgb, y: Rgb) -> Result<f64> {
    Ok(match *spec {
        MeasureSpec::D1 => d1(x, y),
        MeasureSpec::D2 => d2(x, y),
        MeasureSpec::D2Sq => d2sq(x, y),
        MeasureSpec::DInf => dinf(x, y),
        MeasureSpec::Bray => bray(x, y),
        MeasureSpec::Canberra => canberra(x, y),
        MeasureSpec::Chord => chord(x, y),
        MeasureSpec::Cosine => cosine(x, y),
        MeasureSpec::Divergence => divergence(x, y),
        MeasureSpec::Goude => goude(x, y),
        MeasureSpec::Soergel => soergel(x, y),
        MeasureSpec::Ware => ware(x, y),
        MeasureSpec::Fms { k } => fms(x, y, k),
        MeasureSpec::Fds { k } => fds(x, y, k),
        MeasureSpec::Fmds { k1, k2 } => fmds(x, y, k1, k2),
        MeasureSpec::Cfs { .. } => {
            return Err(Error::Config(
                "cfs depends on pixel positions; evaluate it with eval_cfs".to_string(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(r: u8, g: u8, b: u8) -> Rgb {
        Rgb::new(r, g, b)
    }

    fn eval(s: &str, x: Rgb, y: Rgb) -> f64 {
        eval_measure(&s.parse().unwrap(), x, y).unwrap()
    }

    #[test]
    fn self_distance_zero() {
        for x in [v(0, 0, 0), v(1, 2, 3), v(255, 255, 255), v(0, 128, 7)] {
            assert_eq!(eval("d2", x, x), 0.0);
            assert_eq!(eval("cosine", x, x), 0.0);
        }
    }

    #[test]
    fn cosine_cases() {
        assert_eq!(eval("cosine", v(1, 0, 0), v(0, 1, 0)), PI / 2.0);
        assert_eq!(eval("cosine", v(0, 0, 0), v(10, 10, 10)), PI);
        assert_eq!(eval("cosine", v(10, 10, 10), v(0, 0, 0)), PI);
        assert_eq!(eval("cosine", v(0, 0, 0), v(0, 0, 0)), 0.0);
        assert_eq!(eval("cosine", v(1, 2, 3), v(2, 4, 6)), 0.0);
        assert_eq!(eval("cosine", v(2, 4, 6), v(3, 6, 9)), 0.0);
    }

    #[test]
    fn both_zero_conventions() {
        let z = Rgb::BLACK;
        for id in ["soergel", "bray", "goude", "canberra", "divergence", "ware"] {
            assert_eq!(eval(id, z, z), 0.0, "{id}");
        }
        assert_eq!(eval("fds", z, z), 1.0);
        assert_eq!(eval("fds", z, v(3, 0, 0)), 0.0);
        assert_eq!(eval("fds", v(0, 9, 0), z), 0.0);
    }

    #[test]
    fn fms_values() {
        let x = v(12, 200, 0);
        assert_eq!(eval("fms:K=1024", x, x), 1.0);
        let expected = (1024.0f64 / 1279.0).powi(3);
        let got = eval("fms:K=1024", v(0, 0, 0), v(255, 255, 255));
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn minkowski_family() {
        assert_eq!(eval("d1", v(10, 20, 30), v(13, 24, 35)), 12.0);
        assert_eq!(eval("d2", v(0, 0, 0), v(3, 4, 0)), 5.0);
        assert_eq!(eval("d2sq", v(0, 0, 0), v(3, 4, 0)), 25.0);
        assert_eq!(eval("dinf", v(10, 20, 30), v(13, 24, 35)), 5.0);
        assert_eq!(minkowski(v(0, 0, 0), v(3, 4, 0), 2.0), 5.0);
        assert_eq!(minkowski(v(0, 0, 0), v(3, 4, 0), f64::INFINITY), 4.0);
        let p3 = minkowski(v(0, 0, 0), v(1, 1, 1), 3.0);
        assert!((p3 - 3f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn table_measures() {
        // first channel is (0, 0) and contributes nothing
        assert!((eval("canberra", v(0, 10, 40), v(0, 10, 60)) - 0.2).abs() < 1e-15);
        // sqrt((20^2/100))
        assert!((eval("divergence", v(0, 10, 40), v(0, 10, 60)) - 2.0).abs() < 1e-15);
        // 20 / 60
        assert!((eval("ware", v(0, 10, 40), v(0, 10, 60)) - 1.0 / 3.0).abs() < 1e-15);
        // 20 / (0 + 20 + 100)
        assert!((eval("bray", v(0, 10, 40), v(0, 10, 60)) - 20.0 / 120.0).abs() < 1e-15);
        // 20 / (10 + 60)
        assert!((eval("soergel", v(0, 10, 40), v(0, 10, 60)) - 20.0 / 70.0).abs() < 1e-15);
        // |x-y|^2 = 400, |x+y|^2 = 400 + 10000 = 10400
        assert!(
            (eval("goude", v(0, 10, 40), v(0, 10, 60)) - (400.0f64 / 10400.0).sqrt()).abs() < 1e-15
        );
        // (sqrt 4 - sqrt 9)^2 + (sqrt 16 - sqrt 1)^2 = 1 + 9
        assert!((eval("chord", v(4, 16, 0), v(9, 1, 0)) - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cfs_values() {
        let x = v(10, 20, 30);
        assert_eq!(eval_cfs(x, (3, 3), x, (3, 3), 150.0, 4.0), 1.0);
        assert_eq!(eval_cfs(x, (3, 3), x, (4, 2), 150.0, 4.0), 0.8);
        // d2([0,0,0], [90,120,0]) = 150
        assert_eq!(
            eval_cfs(v(0, 0, 0), (0, 0), v(90, 120, 0), (0, 0), 150.0, 4.0),
            0.5
        );
    }

    #[test]
    fn cfs_requires_positions() {
        assert!(matches!(
            eval_measure(
                &MeasureSpec::Cfs { c: 150.0, t: 4.0 },
                v(1, 1, 1),
                v(1, 1, 1)
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fds_is_fms_on_unit_vectors() {
        let x = v(30, 60, 90);
        let y = v(200, 10, 5);
        let nx = (30f64 * 30.0 + 60.0 * 60.0 + 90.0 * 90.0).sqrt();
        let ny = (200f64 * 200.0 + 100.0 + 25.0).sqrt();
        let ux = [30.0 / nx, 60.0 / nx, 90.0 / nx];
        let uy = [200.0 / ny, 10.0 / ny, 5.0 / ny];
        let mut want = 1.0;
        for k in 0..3 {
            want *= (ux[k].min(uy[k]) + 4.0) / (ux[k].max(uy[k]) + 4.0);
        }
        assert!((fds(x, y, 4.0) - want).abs() < 1e-15);
    }
}
