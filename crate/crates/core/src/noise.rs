//! Correlated impulsive noise.
//!
//! Every pixel is left intact with probability `1 - phi`. Otherwise exactly
//! one of four corruptions happens: only channel 1, 2 or 3 is replaced (with
//! probabilities `phi1 * phi`, `phi2 * phi`, `phi3 * phi`) or all three are
//! replaced (probability `(1 - phi1 - phi2 - phi3) * phi`). Replacement values
//! are uniform on `0..=255`.
//!
//! Draw order, which is part of the reproducibility contract: pixels are
//! visited in raster order from a single [`ChaCha8Rng`] stream seeded with
//! `seed`. Each pixel consumes one `f64` (the branch draw, compared against
//! the cumulative branch probabilities in the order ch1, ch2, ch3, all) and
//! then one `u8` per replaced channel, red first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

/// Identifier of the pseudo-random generator, for report provenance.
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

/// Parameters of the noise model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    /// Probability that a pixel is corrupted at all.
    pub phi: f64,
    /// Conditional probabilities that only channel 1, 2 or 3 is hit.
    pub channel: [f64; 3],
    pub seed: u64,
}

impl NoiseConfig {
    pub const DEFAULT_CHANNEL: f64 = 0.25;

    pub fn new(phi: f64, seed: u64) -> Self {
        NoiseConfig {
            phi,
            channel: [Self::DEFAULT_CHANNEL; 3],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.phi) {
            return Err(Error::Config(format!(
                "phi must be in [0, 1], got {}",
                self.phi
            )));
        }
        for (k, &p) in self.channel.iter().enumerate() {
            if !in_unit(p) {
                return Err(Error::Config(format!(
                    "phi{} must be in [0, 1], got {p}",
                    k + 1
                )));
            }
        }
        let total: f64 = self.channel.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "phi1 + phi2 + phi3 must not exceed 1, got {total}"
            )));
        }
        Ok(())
    }

    /// Unconditional probabilities of the branches (clean, ch1, ch2, ch3, all).
    pub fn branch_probabilities(&self) -> [f64; 5] {
        let [p1, p2, p3] = self.channel;
        [
            1.0 - self.phi,
            p1 * self.phi,
            p2 * self.phi,
            p3 * self.phi,
            (1.0 - (p1 + p2 + p3)).max(0.0) * self.phi,
        ]
    }
}

/// What happened to one pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Corruption {
    Clean,
    Channel1,
    Channel2,
    Channel3,
    All,
}

impl Corruption {
    pub const ALL: [Corruption; 5] = [
        Corruption::Clean,
        Corruption::Channel1,
        Corruption::Channel2,
        Corruption::Channel3,
        Corruption::All,
    ];

    /// Display color used when a mask is saved as an image.
    pub fn color(self) -> Rgb {
        match self {
            Corruption::Clean => Rgb::new(0, 0, 0),
            Corruption::Channel1 => Rgb::new(255, 0, 0),
            Corruption::Channel2 => Rgb::new(0, 255, 0),
            Corruption::Channel3 => Rgb::new(0, 0, 255),
            Corruption::All => Rgb::new(255, 255, 255),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Per-pixel corruption labels, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionMask {
    rows: usize,
    cols: usize,
    labels: Vec<Corruption>,
}

impl CorruptionMask {
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn labels(&self) -> &[Corruption] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> Corruption {
        self.labels[row * self.cols + col]
    }

    /// Number of pixels per label, indexed by [`Corruption::index`].
    pub fn counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn to_image(&self) -> Image {
        Image::from_pixels(
            self.rows,
            self.cols,
            self.labels.iter().map(|l| l.color()).collect(),
        )
        .expect("mask dimensions are valid")
    }
}

/// Corrupts `img` and reports which pixels were hit.
pub fn corrupt(img: &Image, cfg: &NoiseConfig) -> Result<(Image, CorruptionMask)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [_, p1, p2, p3, _] = cfg.branch_probabilities();
    let c1 = p1;
    let c2 = c1 + p2;
    let c3 = c2 + p3;
    let c_all = cfg.phi;

    let mut out = img.clone();
    let mut labels = Vec::with_capacity(img.pixels().len());
    for px in out.pixels_mut() {
        let u: f64 = rng.random();
        let label = if u >= c_all {
            Corruption::Clean
        } else if u < c1 {
            Corruption::Channel1
        } else if u < c2 {
            Corruption::Channel2
        } else if u < c3 {
            Corruption::Channel3
        } else {
            Corruption::All
        };
        match label {
            Corruption::Clean => {}
            Corruption::Channel1 => px.0[0] = rng.random(),
            Corruption::Channel2 => px.0[1] = rng.random(),
            Corruption::Channel3 => px.0[2] = rng.random(),
            Corruption::All => {
                for k in 0..3 {
                    px.0[k] = rng.random();
                }
            }
        }
        labels.push(label);
    }
    let (rows, cols) = img.dims();
    Ok((out, CorruptionMask { rows, cols, labels }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(rows: usize, cols: usize) -> Image {
        Image::from_fn(rows, cols, |r, c| Rgb::new(r as u8, c as u8, (r + c) as u8))
    }

    #[test]
    fn phi_zero_is_identity() {
        let img = gradient(20, 30);
        let (out, mask) = corrupt(&img, &NoiseConfig::new(0.0, 3)).unwrap();
        assert_eq!(out, img);
        assert!(mask.labels().iter().all(|&l| l == Corruption::Clean));
    }

    #[test]
    fn forced_all_branch() {
        let img = gradient(10, 10);
        let cfg = NoiseConfig {
            phi: 1.0,
            channel: [0.0; 3],
            seed: 9,
        };
        let (_, mask) = corrupt(&img, &cfg).unwrap();
        assert!(mask.labels().iter().all(|&l| l == Corruption::All));
    }

    #[test]
    fn labels_describe_changes() {
        let img = gradient(64, 64);
        let (out, mask) = corrupt(&img, &NoiseConfig::new(0.5, 11)).unwrap();
        for r in 0..64 {
            for c in 0..64 {
                let (o, n) = (img.get(r, c).0, out.get(r, c).0);
                let kept: &[usize] = match mask.get(r, c) {
                    Corruption::Clean => &[0, 1, 2],
                    Corruption::Channel1 => &[1, 2],
                    Corruption::Channel2 => &[0, 2],
                    Corruption::Channel3 => &[0, 1],
                    Corruption::All => &[],
                };
                for &k in kept {
                    assert_eq!(o[k], n[k]);
                }
            }
        }
    }

    #[test]
    fn seeded_reproducibility() {
        let img = gradient(32, 32);
        let cfg = NoiseConfig::new(0.3, 1234);
        assert_eq!(corrupt(&img, &cfg).unwrap(), corrupt(&img, &cfg).unwrap());
        let other = corrupt(&img, &NoiseConfig::new(0.3, 1235)).unwrap();
        assert_ne!(corrupt(&img, &cfg).unwrap().0, other.0);
    }

    #[test]
    fn validation() {
        assert!(NoiseConfig::new(1.5, 0).validate().is_err());
        assert!(NoiseConfig::new(-0.1, 0).validate().is_err());
        let mut cfg = NoiseConfig::new(0.2, 0);
        cfg.channel = [0.5, 0.5, 0.1];
        assert!(cfg.validate().is_err());
        cfg.channel = [0.5, 0.5, 0.0];
        assert!(cfg.validate().is_ok());
        cfg.channel = [0.5, -0.5, 0.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let p = NoiseConfig::new(0.3, 0).branch_probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[1] - 0.075).abs() < 1e-15);
        assert!((p[4] - 0.075).abs() < 1e-15);
    }

    #[test]
    fn mask_image_colors() {
        let img = gradient(4, 4);
        let (_, mask) = corrupt(&img, &NoiseConfig::new(0.0, 0)).unwrap();
        assert_eq!(mask.to_image(), Image::filled(4, 4, Rgb::BLACK));
    }
}
