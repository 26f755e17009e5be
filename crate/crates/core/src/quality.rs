//! Effectiveness criteria: mean absolute error, mean squared error and
//! normalized color difference in CIELAB.
//!
//! CIELAB coordinates assume sRGB input under a D65 white. The RGB to XYZ
//! matrix is derived from the sRGB primaries and the D65 chromaticity
//! (x = 0.3127, y = 0.3290), so reference white maps exactly onto the white
//! point.

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

/// Linear sRGB to CIE XYZ (D65).
pub const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4123907992659595, 0.35758433938387796, 0.1804807884018343],
    [0.21263900587151036, 0.7151686787677559, 0.07219231536073371],
    [0.01933081871559185, 0.11919477979462599, 0.9505321522496606],
];

/// D65 reference white `(Xn, Yn, Zn)`.
pub const D65_WHITE: [f64; 3] = [0.9504559270516717, 1.0, 1.0890577507598784];

/// Human-readable summary of the color conversion, for report provenance.
pub const LAB_CONVENTION: &str =
    "sRGB (IEC 61966-2-1 transfer), D65 white (x=0.3127, y=0.3290), CIE 1976 L*a*b*";

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub fn norm(self) -> f64 {
        (self.l * self.l + self.a * self.a + self.b * self.b).sqrt()
    }

    pub fn distance(self, other: Lab) -> f64 {
        let dl = self.l - other.l;
        let da = self.a - other.a;
        let db = self.b - other.b;
        (dl * dl + da * da + db * db).sqrt()
    }
}

/// sRGB gamma expansion of an 8-bit channel value.
fn srgb_to_linear(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

pub fn rgb_to_lab(v: Rgb) -> Lab {
    if v.is_zero() {
        return Lab::default();
    }
    let lin = v.0.map(srgb_to_linear);
    let xyz: [f64; 3] = std::array::from_fn(|i| {
        SRGB_TO_XYZ[i][0] * lin[0] + SRGB_TO_XYZ[i][1] * lin[1] + SRGB_TO_XYZ[i][2] * lin[2]
    });
    let fx = lab_f(xyz[0] / D65_WHITE[0]);
    let fy = lab_f(xyz[1] / D65_WHITE[1]);
    let fz = lab_f(xyz[2] / D65_WHITE[2]);
    Lab {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

pub fn mae(x: &Image, y: &Image) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let total: u64 = x
        .pixels()
        .iter()
        .zip(y.pixels())
        .map(|(p, q)| (0..3).map(|k| p.0[k].abs_diff(q.0[k]) as u64).sum::<u64>())
        .sum();
    Ok(total as f64 / (3 * x.pixels().len()) as f64)
}

pub fn mse(x: &Image, y: &Image) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let total: u64 = x
        .pixels()
        .iter()
        .zip(y.pixels())
        .map(|(p, q)| {
            (0..3)
                .map(|k| {
                    let d = p.0[k].abs_diff(q.0[k]) as u64;
                    d * d
                })
                .sum::<u64>()
        })
        .sum();
    Ok(total as f64 / (3 * x.pixels().len()) as f64)
}

/// Normalized color difference of `y` against the reference `x`. Not
/// symmetric: the normalization uses `x` only.
pub fn ncd(x: &Image, y: &Image) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, q) in x.pixels().iter().zip(y.pixels()) {
        let lp = rgb_to_lab(*p);
        num += lp.distance(rgb_to_lab(*q));
        den += lp.norm();
    }
    if den == 0.0 {
        return Err(Error::UndefinedMetric(
            "NCD is undefined for an all-black reference image".to_string(),
        ));
    }
    Ok(num / den)
}

/// MAE, MSE and NCD of a filtered (or noisy) image against the original.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QualityReport {
    pub mae: f64,
    pub mse: f64,
    pub ncd: f64,
}

impl QualityReport {
    pub fn compute(original: &Image, other: &Image) -> Result<Self> {
        Ok(QualityReport {
            mae: mae(original, other)?,
            mse: mse(original, other)?,
            ncd: ncd(original, other)?,
        })
    }
}
