//! Precomputed tables for measures whose per-channel terms depend only on a
//! pair of 8-bit values (or on a single value, or on a spatial offset).
//!
//! Every entry is produced by the same expression the direct path uses, so
//! table lookups reproduce the direct results bit-for-bit.

use super::{
    canberra_term, cfs_color_term, cfs_spatial_term, chebyshev, chord_with, divergence_term,
    eval_measure, fds, fms_term, sqrt_term, ware_term, MeasureSpec, Position,
};
use crate::error::{Error, Result};
use crate::image::{Rgb, WindowSize};

/// Which per-channel term a [`PairLut`] tabulates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairTerm {
    Canberra,
    Divergence,
    Ware,
    Fms { k: f64 },
}

impl PairTerm {
    #[inline]
    fn eval(self, a: u8, b: u8) -> f64 {
        match self {
            PairTerm::Canberra => canberra_term(a, b),
            PairTerm::Divergence => divergence_term(a, b),
            PairTerm::Ware => ware_term(a, b),
            PairTerm::Fms { k } => fms_term(a, b, k),
        }
    }
}

/// A 256x256 table of a per-channel term, indexed by the two channel values.
#[derive(Clone)]
pub struct PairLut {
    term: PairTerm,
    table: Box<[f64]>,
}

impl std::fmt::Debug for PairLut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PairLut").field("term", &self.term).finish()
    }
}

impl PairLut {
    pub fn build(term: PairTerm) -> Self {
        let mut table = Vec::with_capacity(256 * 256);
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                table.push(term.eval(a, b));
            }
        }
        PairLut {
            term,
            table: table.into_boxed_slice(),
        }
    }

    pub fn term(&self) -> PairTerm {
        self.term
    }

    #[inline(always)]
    pub fn get(&self, a: u8, b: u8) -> f64 {
        // 65536 entries, any (u8, u8) index is in range
        self.table[((a as usize) << 8) | b as usize]
    }

    #[inline(always)]
    pub(crate) fn sum3(&self, x: Rgb, y: Rgb) -> f64 {
        let (x, y) = (x.0, y.0);
        self.get(x[0], y[0]) + self.get(x[1], y[1]) + self.get(x[2], y[2])
    }

    #[inline(always)]
    pub(crate) fn product3(&self, x: Rgb, y: Rgb) -> f64 {
        let (x, y) = (x.0, y.0);
        self.get(x[0], y[0]) * self.get(x[1], y[1]) * self.get(x[2], y[2])
    }
}

/// Square roots of the 256 channel values.
#[derive(Clone, Debug)]
pub struct SqrtLut {
    table: [f64; 256],
}

impl Default for SqrtLut {
    fn default() -> Self {
        Self::build()
    }
}

impl SqrtLut {
    pub fn build() -> Self {
        let mut table = [0.0; 256];
        for (v, slot) in table.iter_mut().enumerate() {
            *slot = sqrt_term(v as u8);
        }
        SqrtLut { table }
    }

    #[inline(always)]
    pub fn get(&self, v: u8) -> f64 {
        self.table[v as usize]
    }

    pub fn as_slice(&self) -> &[f64; 256] {
        &self.table
    }
}

/// The spatial proximity factor `t / (t + offset)` of `cfs`, tabulated for
/// every Chebyshev offset that can occur inside one window.
#[derive(Clone, Debug)]
pub struct SpatialLut {
    t: f64,
    table: Vec<f64>,
}

impl SpatialLut {
    pub fn build(t: f64, window: WindowSize) -> Self {
        let table = (0..window.side()).map(|d| cfs_spatial_term(d, t)).collect();
        SpatialLut { t, table }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Largest offset covered by the table.
    pub fn max_offset(&self) -> usize {
        self.table.len() - 1
    }

    #[inline(always)]
    pub fn get(&self, offset: usize) -> Option<f64> {
        self.table.get(offset).copied()
    }

    /// The `n x n` table over window index pairs of an interior window.
    pub fn index_pair_table(&self) -> Vec<f64> {
        let side = self.table.len();
        let n = side * side;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let d = chebyshev((i / side, i % side), (j / side, j % side));
                out.push(self.table[d]);
            }
        }
        out
    }
}

/// The tables prepared for one measure, built once and shared read-only.
#[derive(Clone, Debug)]
pub struct MeasureTables {
    spec: MeasureSpec,
    pub(crate) pair: Option<PairLut>,
    pub(crate) sqrt: Option<SqrtLut>,
    pub(crate) spatial: Option<SpatialLut>,
}

impl MeasureTables {
    /// Builds whatever tables `spec` uses. `window` bounds the spatial
    /// offsets tabulated for `cfs` and is ignored otherwise.
    pub fn build(spec: &MeasureSpec, window: WindowSize) -> Self {
        let mut tables = MeasureTables {
            spec: *spec,
            pair: None,
            sqrt: None,
            spatial: None,
        };
        match *spec {
            MeasureSpec::Canberra => tables.pair = Some(PairLut::build(PairTerm::Canberra)),
            MeasureSpec::Divergence => tables.pair = Some(PairLut::build(PairTerm::Divergence)),
            MeasureSpec::Ware => tables.pair = Some(PairLut::build(PairTerm::Ware)),
            MeasureSpec::Fms { k } => tables.pair = Some(PairLut::build(PairTerm::Fms { k })),
            MeasureSpec::Fmds { k1, .. } => {
                tables.pair = Some(PairLut::build(PairTerm::Fms { k: k1 }))
            }
            MeasureSpec::Chord => tables.sqrt = Some(SqrtLut::build()),
            MeasureSpec::Cfs { t, .. } => tables.spatial = Some(SpatialLut::build(t, window)),
            _ => {}
        }
        tables
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    /// True when at least one table was built.
    pub fn has_tables(&self) -> bool {
        self.pair.is_some() || self.sqrt.is_some() || self.spatial.is_some()
    }

    fn check(&self, spec: &MeasureSpec) -> Result<()> {
        if self.spec != *spec {
            return Err(Error::Config(format!(
                "tables were prepared for {} but {} was requested",
                self.spec, spec
            )));
        }
        Ok(())
    }

    fn pair(&self) -> Result<&PairLut> {
        self.pair
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{}: pair table missing", self.spec)))
    }
}

/// Evaluates a measure through its lookup tables. Results are bit-identical to
/// [`eval_measure`]; measures without tables fall back to the direct formula.
pub fn lut_eval(spec: &MeasureSpec, tables: &MeasureTables, x: Rgb, y: Rgb) -> Result<f64> {
    tables.check(spec)?;
    Ok(match *spec {
        MeasureSpec::Canberra | MeasureSpec::Ware => tables.pair()?.sum3(x, y),
        MeasureSpec::Divergence => tables.pair()?.sum3(x, y).sqrt(),
        MeasureSpec::Fms { .. } => tables.pair()?.product3(x, y),
        MeasureSpec::Fmds { k2, .. } => tables.pair()?.product3(x, y) * fds(x, y, k2),
        MeasureSpec::Chord => {
            let lut = tables
                .sqrt
                .as_ref()
                .ok_or_else(|| Error::Config("chord: sqrt table missing".to_string()))?;
            chord_with(x, y, |v| lut.get(v))
        }
        MeasureSpec::Cfs { .. } => {
            return Err(Error::Config(
                "cfs depends on pixel positions; evaluate it with lut_eval_cfs".to_string(),
            ))
        }
        _ => eval_measure(spec, x, y)?,
    })
}

/// Table-driven `cfs`: the spatial factor comes from the offset table.
pub fn lut_eval_cfs(
    tables: &MeasureTables,
    x: Rgb,
    px: Position,
    y: Rgb,
    py: Position,
) -> Result<f64> {
    let MeasureSpec::Cfs { c, .. } = tables.spec else {
        return Err(Error::Config(format!(
            "tables were prepared for {}, not cfs",
            tables.spec
        )));
    };
    let spatial = tables
        .spatial
        .as_ref()
        .ok_or_else(|| Error::Config("cfs: spatial table missing".to_string()))?;
    let offset = chebyshev(px, py);
    let s = spatial.get(offset).ok_or_else(|| {
        Error::Config(format!(
            "cfs: spatial offset {offset} exceeds the window span {}",
            spatial.max_offset()
        ))
    })?;
    Ok(cfs_color_term(x, y, c) * s)
}
