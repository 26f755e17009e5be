//! The reduced-ordering filter engine.
//!
//! Each window sample `x_i` gets an aggregate score `D_i = sum_j s(x_i, x_j)`
//! over all `n` samples (the `j = i` term included). The output is the sample
//! with the lowest score for dissimilarities, or the highest for
//! similarities. Ties go to the lowest window index.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{pad_replicate, Image, Rgb, Window, WindowSize};
use crate::measures::{
    self, cfs_color_term, chebyshev, cosine, MeasureId, MeasureSpec, MeasureTables, Orientation,
    PairLut, Position, SpatialLut, SqrtLut,
};

/// The quantity a filter orders window samples by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Criterion {
    /// Aggregate of a pairwise measure.
    Measure(MeasureSpec),
    /// Product of the aggregate Minkowski distance of order `p` and the
    /// aggregate angular distance (directional-distance ordering).
    Ddf { p: f64 },
}

impl Criterion {
    pub const DEFAULT_DDF_P: f64 = 2.0;

    pub fn orientation(&self) -> Orientation {
        match self {
            Criterion::Measure(m) => m.orientation(),
            Criterion::Ddf { .. } => Orientation::Minimize,
        }
    }

    /// Short label: the measure id, or `ddf`.
    pub fn label(&self) -> &'static str {
        match self {
            Criterion::Measure(m) => m.id().name(),
            Criterion::Ddf { .. } => "ddf",
        }
    }
}

impl From<MeasureSpec> for Criterion {
    fn from(m: MeasureSpec) -> Self {
        Criterion::Measure(m)
    }
}

impl From<MeasureId> for Criterion {
    fn from(id: MeasureId) -> Self {
        Criterion::Measure(id.default_spec())
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Measure(m) => m.fmt(f),
            Criterion::Ddf { p } => write!(f, "ddf:p={p}"),
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    /// Accepts every measure string plus `ddf` and `ddf:p=<order>`
    /// (`p >= 1`, `inf` allowed).
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        if !head.trim().eq_ignore_ascii_case("ddf") {
            return s.parse().map(Criterion::Measure);
        }
        let mut p = Self::DEFAULT_DDF_P;
        for item in tail
            .into_iter()
            .flat_map(|t| t.split(','))
            .filter(|t| !t.trim().is_empty())
        {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{s:?}: malformed parameter {item:?}")))?;
            if !name.trim().eq_ignore_ascii_case("p") {
                return Err(Error::Config(format!(
                    "{s:?}: unknown parameter {:?} for ddf (expected p)",
                    name.trim()
                )));
            }
            p = value.trim().parse().map_err(|_| {
                Error::Config(format!("{s:?}: parameter p is not a number: {value:?}"))
            })?;
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::Config(format!("{s:?}: ddf order p must be >= 1")));
        }
        Ok(Criterion::Ddf { p })
    }
}

/// A criterion and a window size. Ties always resolve to the lowest index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    pub criterion: Criterion,
    pub window: WindowSize,
}

impl FilterSpec {
    pub fn new(criterion: impl Into<Criterion>) -> Self {
        FilterSpec {
            criterion: criterion.into(),
            window: WindowSize::DEFAULT,
        }
    }

    pub fn with_window(mut self, window: WindowSize) -> Self {
        self.window = window;
        self
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}x{})",
            self.criterion,
            self.window.side(),
            self.window.side()
        )
    }
}

/// Aggregate scores aligned with the window indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// How rows are distributed over threads. The output does not depend on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Index of the selected sample: argmin (or argmax) with the first extremum
/// winning. NaN scores are an error.
pub fn select_output(scores: &[f64], orientation: Orientation, measure: &str) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Numeric {
            measure: measure.to_string(),
            reason: "empty score vector".to_string(),
        });
    }
    select_index(scores, orientation).ok_or_else(|| Error::Numeric {
        measure: measure.to_string(),
        reason: "aggregate score is NaN".to_string(),
    })
}

#[inline(always)]
fn select_index(scores: &[f64], orientation: Orientation) -> Option<usize> {
    let mut best = 0;
    let mut best_v = scores[0];
    if best_v.is_nan() {
        return None;
    }
    for (i, &v) in scores.iter().enumerate().skip(1) {
        if v.is_nan() {
            return None;
        }
        let better = match orientation {
            Orientation::Minimize => v < best_v,
            Orientation::Maximize => v > best_v,
        };
        if better {
            best = i;
            best_v = v;
        }
    }
    Some(best)
}

/// Scores one window at a time into caller-provided buffers.
trait WindowScorer: Sync {
    const NEEDS_POSITIONS: bool = false;

    /// `out` receives one score per sample of `v`.
    fn score(&self, v: &[Rgb], pos: &[Position], out: &mut [f64]);
}

/// Computes `out[i] = sum_j s(x_i, x_j)` from the upper triangle only. Each
/// `out[i]` still receives its terms in index order, so with a symmetric
/// `pair` the result equals the row sums evaluated left to right.
#[inline(always)]
fn pairwise_sums<T>(n: usize, out: &mut [T], pair: impl Fn(usize, usize) -> T)
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::AddAssign,
{
    if n == 9 {
        return pairwise_sums_fixed::<T, 9>(out, pair);
    }
    out[..n].fill(T::default());
    for i in 0..n {
        let mut acc = out[i] + pair(i, i);
        for j in i + 1..n {
            let s = pair(i, j);
            acc += s;
            out[j] += s;
        }
        out[i] = acc;
    }
}

/// [`pairwise_sums`] for a window size known at compile time, which lets the
/// pair loop unroll completely.
#[inline(always)]
fn pairwise_sums_fixed<T, const N: usize>(out: &mut [T], pair: impl Fn(usize, usize) -> T)
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::AddAssign,
{
    let mut acc = [T::default(); N];
    for i in 0..N {
        let mut a = acc[i] + pair(i, i);
        for j in i + 1..N {
            let s = pair(i, j);
            a += s;
            acc[j] += s;
        }
        acc[i] = a;
    }
    out[..N].copy_from_slice(&acc);
}

struct Pairwise<F>(F);

impl<F> WindowScorer for Pairwise<F>
where
    F: Fn(Rgb, Rgb) -> f64 + Sync,
{
    #[inline]
    fn score(&self, v: &[Rgb], _: &[Position], out: &mut [f64]) {
        pairwise_sums(v.len(), out, |i, j| (self.0)(v[i], v[j]));
    }
}

/// Pairwise scorer for integer-valued measures. Sums are exact in `u64` and
/// every partial sum is an integer below 2^53, so the result equals the
/// `f64` sums of the floating-point kernels.
struct IntPairwise<F>(F);

impl<F> WindowScorer for IntPairwise<F>
where
    F: Fn(Rgb, Rgb) -> u32 + Sync,
{
    #[inline]
    fn score(&self, v: &[Rgb], _: &[Position], out: &mut [f64]) {
        let n = v.len();
        let mut small = [0u64; 81];
        let mut large = Vec::new();
        let acc: &mut [u64] = if n <= small.len() {
            &mut small[..n]
        } else {
            large.resize(n, 0);
            &mut large
        };
        pairwise_sums(n, acc, |i, j| u64::from((self.0)(v[i], v[j])));
        for (o, s) in out.iter_mut().zip(acc.iter()) {
            *o = *s as f64;
        }
    }
}

/// City-block scorer. For 3x3 windows on x86-64 each row sum
/// `sum_j |x_i - x_j|_1` is computed with two packed sum-of-absolute-differences
/// operations over all 27 window bytes; the integer result is exact, so it
/// equals the pairwise sums.
struct CityBlock;

impl WindowScorer for CityBlock {
    #[inline]
    fn score(&self, v: &[Rgb], pos: &[Position], out: &mut [f64]) {
        #[cfg(target_arch = "x86_64")]
        if v.len() == 9 {
            // SAFETY: SSE2 is part of the x86-64 baseline.
            return unsafe { sad::row_sums_3x3(v, out) };
        }
        IntPairwise(measures::sum_abs_diff).score(v, pos, out)
    }
}

#[cfg(target_arch = "x86_64")]
mod sad {
    use std::arch::x86_64::{
        __m128i, _mm_add_epi64, _mm_cvtsi128_si64, _mm_sad_epu8, _mm_set_epi64x, _mm_unpackhi_epi64,
    };

    use crate::image::Rgb;

    /// `p * MUL` repeats the 24-bit pattern `p` at byte offsets 0, 3 and 6.
    const MUL: u64 = 1 | 1 << 24 | 1 << 48;

    fn pack(x: Rgb) -> u64 {
        u64::from(x.0[0]) | u64::from(x.0[1]) << 8 | u64::from(x.0[2]) << 16
    }

    #[inline]
    #[target_feature(enable = "sse2")]
    fn lanes(lo: u64, hi: u64) -> __m128i {
        _mm_set_epi64x(hi as i64, lo as i64)
    }

    #[inline]
    #[target_feature(enable = "sse2")]
    fn hsum(v: __m128i) -> u64 {
        _mm_cvtsi128_si64(v) as u64 + _mm_cvtsi128_si64(_mm_unpackhi_epi64(v, v)) as u64
    }

    #[inline]
    #[target_feature(enable = "sse2")]
    pub(super) fn row_sums_3x3(v: &[Rgb], out: &mut [f64]) {
        let mut bytes = [0u8; 32];
        for (k, x) in v.iter().enumerate() {
            bytes[3 * k..3 * k + 3].copy_from_slice(&x.0);
        }
        let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
        let w0 = lanes(word(0), word(1));
        let w1 = lanes(word(2), word(3));
        for (o, &x) in out.iter_mut().zip(v) {
            // The repeated pattern continues at phase 2 in the second word and
            // phase 1 in the third; the fourth word holds the last copy.
            let p = pack(x);
            let p1 = p >> 8 | (p & 0xff) << 16;
            let p2 = p >> 16 | (p & 0xffff) << 8;
            let x0 = lanes(p.wrapping_mul(MUL), p2.wrapping_mul(MUL));
            let x1 = lanes(p1.wrapping_mul(MUL), p);
            let total = _mm_add_epi64(_mm_sad_epu8(w0, x0), _mm_sad_epu8(w1, x1));
            *o = hsum(total) as f64;
        }
    }
}

/// Directional scorer for fds and fmds. Unit vectors are computed once per
/// window sample instead of once per pair; `magnitude` supplies the fms
/// factor of fmds.
struct Directional<'a> {
    k: f64,
    magnitude: Option<&'a PairLut>,
}

impl WindowScorer for Directional<'_> {
    #[inline]
    fn score(&self, v: &[Rgb], _: &[Position], out: &mut [f64]) {
        let n = v.len();
        let mut small = [None; 81];
        let mut large = Vec::new();
        let units: &mut [Option<[f64; 3]>] = if n <= small.len() {
            &mut small[..n]
        } else {
            large.resize(n, None);
            &mut large
        };
        for (u, &x) in units.iter_mut().zip(v) {
            *u = measures::unit_vector(x);
        }
        let units = &*units;
        match self.magnitude {
            None => pairwise_sums(n, out, |i, j| {
                measures::fds_units(units[i], units[j], self.k)
            }),
            Some(lut) => pairwise_sums(n, out, |i, j| {
                lut.product3(v[i], v[j]) * measures::fds_units(units[i], units[j], self.k)
            }),
        }
    }
}

struct CfsScorer<'a> {
    c: f64,
    spatial: &'a SpatialLut,
}

impl WindowScorer for CfsScorer<'_> {
    const NEEDS_POSITIONS: bool = true;

    #[inline]
    fn score(&self, v: &[Rgb], pos: &[Position], out: &mut [f64]) {
        pairwise_sums(v.len(), out, |i, j| {
            let s = self
                .spatial
                .get(chebyshev(pos[i], pos[j]))
                .expect("window offsets stay within the tabulated span");
            cfs_color_term(v[i], v[j], self.c) * s
        });
    }
}

struct DdfScorer {
    p: f64,
}

impl WindowScorer for DdfScorer {
    #[inline]
    fn score(&self, v: &[Rgb], _: &[Position], out: &mut [f64]) {
        let n = v.len();
        let mut angular = [0.0f64; 64];
        let mut angular_vec;
        let angular: &mut [f64] = if n <= angular.len() {
            &mut angular[..n]
        } else {
            angular_vec = vec![0.0; n];
            &mut angular_vec
        };
        pairwise_sums(n, angular, |i, j| cosine(v[i], v[j]));
        pairwise_sums(n, out, |i, j| measures::minkowski(v[i], v[j], self.p));
        for (o, a) in out.iter_mut().zip(angular.iter()) {
            *o *= *a;
        }
    }
}

/// Aggregate scores of every window sample under `spec`.
///
/// `tables` must have been built for `spec`; the table-driven evaluation is
/// bit-identical to the direct formulas.
pub fn aggregate_scores(
    w: &Window,
    spec: &MeasureSpec,
    tables: &MeasureTables,
) -> Result<ScoreVector> {
    if tables.spec() != spec {
        return Err(Error::Config(format!(
            "tables were prepared for {} but {} was requested",
            tables.spec(),
            spec
        )));
    }
    let n = w.len();
    if w.positions.len() != n {
        return Err(Error::Config(format!(
            "window has {n} vectors but {} positions",
            w.positions.len()
        )));
    }
    if let Some(spatial) = &tables.spatial {
        let span = w
            .positions
            .iter()
            .flat_map(|&p| w.positions.iter().map(move |&q| chebyshev(p, q)))
            .max()
            .unwrap_or(0);
        if span > spatial.max_offset() {
            return Err(Error::Config(format!(
                "cfs: window positions span {span}, tables cover {}",
                spatial.max_offset()
            )));
        }
    }
    let mut out = vec![0.0; n];
    dispatch(
        spec,
        tables,
        ScoreWindow {
            window: w,
            out: &mut out,
        },
    )?;
    Ok(ScoreVector(out))
}

/// Directional-distance aggregate scores:
/// `D_i = (sum_j d_p(x_i, x_j)) * (sum_j angle(x_i, x_j))`.
pub fn ddf_scores(w: &Window, p: f64) -> ScoreVector {
    let n = w.len();
    let mut out = vec![0.0; n];
    WindowScorer::score(&DdfScorer { p }, &w.vectors, &w.positions, &mut out);
    ScoreVector(out)
}

/// Receives the concrete scorer chosen by [`dispatch`].
trait ScorerVisitor {
    fn visit<S: WindowScorer>(self, scorer: S);
}

struct ScoreWindow<'a> {
    window: &'a Window,
    out: &'a mut [f64],
}

impl ScorerVisitor for ScoreWindow<'_> {
    fn visit<S: WindowScorer>(self, scorer: S) {
        scorer.score(&self.window.vectors, &self.window.positions, self.out);
    }
}

fn missing(spec: &MeasureSpec) -> Error {
    Error::Config(format!("{spec}: lookup table missing"))
}

/// Monomorphizes `visitor` over the scorer implementing `spec`.
fn dispatch<V: ScorerVisitor>(
    spec: &MeasureSpec,
    tables: &MeasureTables,
    visitor: V,
) -> Result<()> {
    let pair = || tables.pair.as_ref().ok_or_else(|| missing(spec));
    match *spec {
        MeasureSpec::D1 => visitor.visit(CityBlock),
        MeasureSpec::D2 => visitor.visit(Pairwise(measures::d2)),
        MeasureSpec::D2Sq => visitor.visit(IntPairwise(measures::sum_sq_diff)),
        MeasureSpec::DInf => visitor.visit(IntPairwise(measures::max_abs_diff)),
        MeasureSpec::Bray => visitor.visit(Pairwise(measures::bray)),
        MeasureSpec::Cosine => visitor.visit(Pairwise(measures::cosine)),
        MeasureSpec::Goude => visitor.visit(Pairwise(measures::goude)),
        MeasureSpec::Soergel => visitor.visit(Pairwise(measures::soergel)),
        MeasureSpec::Canberra | MeasureSpec::Ware => {
            let lut: &PairLut = pair()?;
            visitor.visit(Pairwise(move |x, y| lut.sum3(x, y)))
        }
        MeasureSpec::Divergence => {
            let lut: &PairLut = pair()?;
            visitor.visit(Pairwise(move |x, y| lut.sum3(x, y).sqrt()))
        }
        MeasureSpec::Chord => {
            let lut: &SqrtLut = tables.sqrt.as_ref().ok_or_else(|| missing(spec))?;
            visitor.visit(Pairwise(move |x, y| {
                measures::chord_with(x, y, |v| lut.get(v))
            }))
        }
        MeasureSpec::Fms { .. } => {
            let lut: &PairLut = pair()?;
            visitor.visit(Pairwise(move |x, y| lut.product3(x, y)))
        }
        MeasureSpec::Fds { k } => visitor.visit(Directional { k, magnitude: None }),
        MeasureSpec::Fmds { k2, .. } => {
            let lut: &PairLut = pair()?;
            visitor.visit(Directional {
                k: k2,
                magnitude: Some(lut),
            })
        }
        MeasureSpec::Cfs { c, .. } => {
            let spatial = tables.spatial.as_ref().ok_or_else(|| missing(spec))?;
            visitor.visit(CfsScorer { c, spatial })
        }
    }
    Ok(())
}

/// Index selected by the mean-vector route for `d2sq`: the sample closest
/// (in squared Euclidean distance) to the window mean.
///
/// Computed exactly in integers as `|n x_i - sum_j x_j|^2`, which is
/// `n^2 |x_i - mean|^2`, so ties match the pairwise route.
pub fn d2sq_shortcut_select(v: &[Rgb]) -> usize {
    let n = v.len() as i64;
    let mut sum = [0i64; 3];
    for x in v {
        for k in 0..3 {
            sum[k] += x.0[k] as i64;
        }
    }
    let mut best = 0;
    let mut best_d = i64::MAX;
    for (i, x) in v.iter().enumerate() {
        let mut d = 0;
        for k in 0..3 {
            let e = n * x.0[k] as i64 - sum[k];
            d += e * e;
        }
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// A filter with its lookup tables built, ready to run on many images.
#[derive(Clone, Debug)]
pub struct PreparedFilter {
    spec: FilterSpec,
    tables: Option<MeasureTables>,
    pairwise_only: bool,
}

impl PreparedFilter {
    pub fn new(spec: &FilterSpec) -> Result<Self> {
        let tables = match &spec.criterion {
            Criterion::Measure(m) => {
                m.validate()?;
                Some(MeasureTables::build(m, spec.window))
            }
            Criterion::Ddf { p } => {
                if p.is_nan() || *p < 1.0 {
                    return Err(Error::Config(format!("ddf order p must be >= 1, got {p}")));
                }
                None
            }
        };
        Ok(PreparedFilter {
            spec: *spec,
            tables,
            pairwise_only: false,
        })
    }

    /// Forces `d2sq` through the pairwise aggregate instead of the mean-vector
    /// route.
    pub fn pairwise_only(mut self) -> Self {
        self.pairwise_only = true;
        self
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn run(&self, img: &Image, exec: Execution) -> Result<Image> {
        let window = self.spec.window;
        let padded = pad_replicate(img, window.radius());
        let ctx = Driver {
            padded: &padded,
            rows: img.rows(),
            cols: img.cols(),
            window,
            exec,
        };
        let pixels = match (&self.spec.criterion, &self.tables) {
            (Criterion::Measure(MeasureSpec::D2Sq), _) if !self.pairwise_only => {
                ctx.run_select(d2sq_shortcut_select)?
            }
            (Criterion::Measure(m), Some(tables)) => {
                let mut result = None;
                let orientation = m.orientation();
                let label = m.id().name();
                dispatch(
                    m,
                    tables,
                    RunVisitor {
                        ctx: &ctx,
                        orientation,
                        label,
                        result: &mut result,
                    },
                )?;
                result.expect("dispatch always visits")?
            }
            (Criterion::Ddf { p }, _) => {
                ctx.run_scorer(&DdfScorer { p: *p }, Orientation::Minimize, "ddf")?
            }
            (Criterion::Measure(m), None) => return Err(missing(m)),
        };
        Image::from_pixels(img.rows(), img.cols(), pixels)
    }
}

struct RunVisitor<'a, 'b> {
    ctx: &'a Driver<'b>,
    orientation: Orientation,
    label: &'static str,
    result: &'a mut Option<Result<Vec<Rgb>>>,
}

impl ScorerVisitor for RunVisitor<'_, '_> {
    fn visit<S: WindowScorer>(self, scorer: S) {
        *self.result = Some(self.ctx.run_scorer(&scorer, self.orientation, self.label));
    }
}

struct Driver<'a> {
    padded: &'a Image,
    rows: usize,
    cols: usize,
    window: WindowSize,
    exec: Execution,
}

/// Per-worker buffers.
struct Scratch {
    v: Vec<Rgb>,
    pos: Vec<Position>,
    scores: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            v: vec![Rgb::BLACK; n],
            pos: vec![(0, 0); n],
            scores: vec![0.0; n],
        }
    }
}

impl Driver<'_> {
    #[inline(always)]
    fn gather(&self, r: usize, c: usize, scratch: &mut Scratch, positions: bool) {
        let side = self.window.side();
        let radius = self.window.radius();
        let pcols = self.padded.cols();
        let px = self.padded.pixels();
        if side == 3 {
            for dr in 0..3 {
                let base = (r + dr) * pcols + c;
                let src: &[Rgb; 3] = px[base..base + 3].try_into().expect("3 samples");
                scratch.v[dr * 3..dr * 3 + 3].copy_from_slice(src);
            }
        } else {
            for dr in 0..side {
                let base = (r + dr) * pcols + c;
                scratch.v[dr * side..(dr + 1) * side].copy_from_slice(&px[base..base + side]);
            }
        }
        if positions {
            for dr in 0..side {
                let ur = (r + dr).saturating_sub(radius).min(self.rows - 1);
                for dc in 0..side {
                    let uc = (c + dc).saturating_sub(radius).min(self.cols - 1);
                    scratch.pos[dr * side + dc] = (ur, uc);
                }
            }
        }
    }

    fn for_rows(
        &self,
        row_fn: impl Fn(usize, &mut [Rgb], &mut Scratch) -> Result<()> + Sync,
    ) -> Result<Vec<Rgb>> {
        let mut out = vec![Rgb::BLACK; self.rows * self.cols];
        let n = self.window.len();
        match self.exec {
            Execution::Serial => {
                let mut scratch = Scratch::new(n);
                for (r, row) in out.chunks_mut(self.cols).enumerate() {
                    row_fn(r, row, &mut scratch)?;
                }
            }
            Execution::Parallel => {
                out.par_chunks_mut(self.cols)
                    .enumerate()
                    .try_for_each_init(
                        || Scratch::new(n),
                        |scratch, (r, row)| row_fn(r, row, scratch),
                    )?;
            }
        }
        Ok(out)
    }

    fn run_scorer<S: WindowScorer>(
        &self,
        scorer: &S,
        orientation: Orientation,
        label: &str,
    ) -> Result<Vec<Rgb>> {
        self.for_rows(|r, row, scratch| {
            for (c, dst) in row.iter_mut().enumerate() {
                self.gather(r, c, scratch, S::NEEDS_POSITIONS);
                scorer.score(&scratch.v, &scratch.pos, &mut scratch.scores);
                let idx =
                    select_index(&scratch.scores, orientation).ok_or_else(|| Error::Numeric {
                        measure: label.to_string(),
                        reason: format!("NaN aggregate score at ({r}, {c})"),
                    })?;
                *dst = scratch.v[idx];
            }
            Ok(())
        })
    }

    fn run_select(&self, select: impl Fn(&[Rgb]) -> usize + Sync) -> Result<Vec<Rgb>> {
        self.for_rows(|r, row, scratch| {
            for (c, dst) in row.iter_mut().enumerate() {
                self.gather(r, c, scratch, false);
                *dst = scratch.v[select(&scratch.v)];
            }
            Ok(())
        })
    }
}

/// Filters an image, spreading rows over the current rayon pool.
pub fn filter_image(img: &Image, spec: &FilterSpec) -> Result<Image> {
    PreparedFilter::new(spec)?.run(img, Execution::Parallel)
}

/// Filters an image on the calling thread only.
pub fn filter_image_serial(img: &Image, spec: &FilterSpec) -> Result<Image> {
    PreparedFilter::new(spec)?.run(img, Execution::Serial)
}

/// `d2sq` filtering through the window mean instead of pairwise sums.
pub fn filter_d2sq_shortcut(img: &Image, window: WindowSize) -> Image {
    PreparedFilter::new(&FilterSpec::new(MeasureSpec::D2Sq).with_window(window))
        .and_then(|f| f.run(img, Execution::Parallel))
        .expect("d2sq needs no tables and cannot produce NaN")
}
