//! Raster representation, border padding and sliding-window extraction.

use std::fmt;

use crate::error::{Error, Result};

/// One color pixel: red, green and blue intensities in `[0, 255]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0, 0, 0]);

    #[inline]
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb([r, g, b])
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    #[inline]
    pub fn channels(self) -> [u8; 3] {
        self.0
    }
}

impl From<[u8; 3]> for Rgb {
    fn from(v: [u8; 3]) -> Self {
        Rgb(v)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.0[0], self.0[1], self.0[2])
    }
}

/// An `rows x cols` raster of [`Rgb`] pixels stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    rows: usize,
    cols: usize,
    pixels: Vec<Rgb>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl Image {
    /// Builds an image from row-major pixels. Fails unless both dimensions are
    /// positive and `pixels.len() == rows * cols`.
    pub fn from_pixels(rows: usize, cols: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "image dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if pixels.len() != rows * cols {
            return Err(Error::Config(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        Ok(Image { rows, cols, pixels })
    }

    /// A constant image. Panics if a dimension is zero.
    pub fn filled(rows: usize, cols: usize, value: Rgb) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        Image {
            rows,
            cols,
            pixels: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                pixels.push(f(r, c));
            }
        }
        Image { rows, cols, pixels }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Rgb {
        self.pixels[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Rgb) {
        self.pixels[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rgb] {
        &self.pixels[row * self.cols..(row + 1) * self.cols]
    }

    pub(crate) fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }
}

/// Side length of a square filtering window. Always odd and at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WindowSize(usize);

impl WindowSize {
    /// The 3x3 window (`n = 9`).
    pub const DEFAULT: WindowSize = WindowSize(3);

    pub fn from_side(side: usize) -> Result<Self> {
        if side < 3 || side % 2 == 0 {
            return Err(Error::Config(format!(
                "window side must be an odd integer >= 3, got {side}"
            )));
        }
        Ok(WindowSize(side))
    }

    /// From the number of samples `n`; `sqrt(n)` must be an odd integer >= 3.
    pub fn from_len(n: usize) -> Result<Self> {
        let side = (n as f64).sqrt().round() as usize;
        if side * side != n {
            return Err(Error::Config(format!(
                "window size {n} is not a perfect square"
            )));
        }
        Self::from_side(side)
    }

    #[inline]
    pub fn side(self) -> usize {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0 * self.0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        false
    }

    #[inline]
    pub fn radius(self) -> usize {
        self.0 / 2
    }

    /// Zero-based index of the center sample in raster order.
    #[inline]
    pub fn center(self) -> usize {
        self.len() / 2
    }
}

impl Default for WindowSize {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// The samples of one sliding window in raster order, together with their
/// coordinates in the unpadded image frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub vectors: Vec<Rgb>,
    pub positions: Vec<(usize, usize)>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The center sample, `x_{(n+1)/2}` in one-based indexing.
    pub fn center(&self) -> Rgb {
        self.vectors[self.vectors.len() / 2]
    }

    /// Builds a window whose positions are those of an interior `side x side`
    /// neighborhood, i.e. `(i / side, i % side)` for index `i`.
    pub fn from_vectors(vectors: Vec<Rgb>) -> Result<Self> {
        let size = WindowSize::from_len(vectors.len())?;
        let side = size.side();
        let positions = (0..vectors.len()).map(|i| (i / side, i % side)).collect();
        Ok(Window { vectors, positions })
    }
}

/// Pads `img` by `radius` pixels on every side, replicating the nearest edge pixel.
pub fn pad_replicate(img: &Image, radius: usize) -> Image {
    if radius == 0 {
        return img.clone();
    }
    let rows = img.rows + 2 * radius;
    let cols = img.cols + 2 * radius;
    let mut pixels = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let src_r = r.saturating_sub(radius).min(img.rows - 1);
        let src = img.row(src_r);
        pixels.extend(std::iter::repeat_n(src[0], radius));
        pixels.extend_from_slice(src);
        pixels.extend(std::iter::repeat_n(src[img.cols - 1], radius));
    }
    Image { rows, cols, pixels }
}

/// Extracts the window centered at `(row, col)` of a padded image.
///
/// `(row, col)` is expressed in the padded frame, and the padding radius is
/// assumed to be `size.radius()`. Positions are reported in the unpadded frame
/// and clamped to the image, so replicated border samples share the
/// coordinates of the pixel they copy.
pub fn window_at(padded: &Image, row: usize, col: usize, size: WindowSize) -> Result<Window> {
    let radius = size.radius();
    let out_of_bounds = || Error::OutOfBounds {
        row,
        col,
        rows: padded.rows,
        cols: padded.cols,
        radius,
    };
    if padded.rows < 2 * radius + 1 || padded.cols < 2 * radius + 1 {
        return Err(out_of_bounds());
    }
    if row < radius || col < radius || row + radius >= padded.rows || col + radius >= padded.cols {
        return Err(out_of_bounds());
    }
    let inner_rows = padded.rows - 2 * radius;
    let inner_cols = padded.cols - 2 * radius;
    let n = size.len();
    let mut vectors = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    for pr in row - radius..=row + radius {
        let ur = pr.saturating_sub(radius).min(inner_rows - 1);
        for pc in col - radius..=col + radius {
            let uc = pc.saturating_sub(radius).min(inner_cols - 1);
            vectors.push(padded.get(pr, pc));
            positions.push((ur, uc));
        }
    }
    Ok(Window { vectors, positions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn distinct(rows: usize, cols: usize) -> Image {
        Image::from_fn(rows, cols, |r, c| {
            let v = (r * cols + c) as u8;
            Rgb::new(v, v.wrapping_mul(3), 255 - v)
        })
    }

    #[test]
    fn from_pixels_rejects_bad_shapes() {
        assert!(Image::from_pixels(0, 3, vec![]).is_err());
        assert!(Image::from_pixels(2, 2, vec![Rgb::BLACK; 3]).is_err());
        assert!(Image::from_pixels(2, 2, vec![Rgb::BLACK; 4]).is_ok());
    }

    #[test]
    fn window_size_validation() {
        assert!(WindowSize::from_side(1).is_err());
        assert!(WindowSize::from_side(4).is_err());
        assert_eq!(WindowSize::from_len(9).unwrap().side(), 3);
        assert_eq!(WindowSize::from_len(25).unwrap().radius(), 2);
        assert!(WindowSize::from_len(8).is_err());
        assert!(WindowSize::from_len(16).is_err());
        assert_eq!(WindowSize::DEFAULT.center(), 4);
    }

    #[test]
    fn pad_radius_zero_is_identity() {
        let img = distinct(3, 4);
        assert_eq!(pad_replicate(&img, 0), img);
    }

    #[test]
    fn pad_single_pixel() {
        let v = Rgb::new(9, 8, 7);
        let padded = pad_replicate(&Image::filled(1, 1, v), 1);
        assert_eq!(padded, Image::filled(3, 3, v));
    }

    #[test]
    fn pad_two_by_two_corners() {
        // a b      a a b b
        // c d  ->  a a b b
        //          c c d d
        //          c c d d
        let a = Rgb::new(1, 0, 0);
        let b = Rgb::new(2, 0, 0);
        let c = Rgb::new(3, 0, 0);
        let d = Rgb::new(4, 0, 0);
        let img = Image::from_pixels(2, 2, vec![a, b, c, d]).unwrap();
        let p = pad_replicate(&img, 1);
        assert_eq!(p.dims(), (4, 4));
        let expected = [a, a, b, b, a, a, b, b, c, c, d, d, c, c, d, d];
        assert_eq!(p.pixels(), &expected);
    }

    #[test]
    fn window_on_constant_image() {
        let v = Rgb::new(5, 6, 7);
        let padded = pad_replicate(&Image::filled(4, 4, v), 1);
        let w = window_at(&padded, 2, 2, WindowSize::DEFAULT).unwrap();
        assert_eq!(w.vectors, vec![v; 9]);
    }

    #[test]
    fn full_coverage_window() {
        let img = distinct(3, 3);
        let w = window_at(&img, 1, 1, WindowSize::DEFAULT).unwrap();
        assert_eq!(w.vectors, img.pixels());
        assert_eq!(w.center(), img.get(1, 1));
    }

    #[test]
    fn corner_window_replicates_corner() {
        let img = distinct(3, 3);
        let padded = pad_replicate(&img, 1);
        // Unpadded (0, 0) sits at padded (1, 1). Neighborhood rows -1..=1 and
        // cols -1..=1 clamp to {0,0,1} x {0,0,1}, so the corner appears 4 times.
        let w = window_at(&padded, 1, 1, WindowSize::DEFAULT).unwrap();
        let corner = img.get(0, 0);
        assert_eq!(w.vectors.iter().filter(|&&v| v == corner).count(), 4);
        assert_eq!(w.center(), corner);
        assert_eq!(
            w.positions,
            vec![
                (0, 0),
                (0, 0),
                (0, 1),
                (0, 0),
                (0, 0),
                (0, 1),
                (1, 0),
                (1, 0),
                (1, 1)
            ]
        );
    }

    #[test]
    fn window_out_of_range() {
        let padded = pad_replicate(&distinct(3, 3), 1);
        assert!(matches!(
            window_at(&padded, 0, 2, WindowSize::DEFAULT),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(window_at(&padded, 2, 4, WindowSize::DEFAULT).is_err());
        assert!(window_at(&padded, 3, 3, WindowSize::DEFAULT).is_ok());
    }

    #[test]
    fn interior_positions() {
        let img = distinct(5, 5);
        let padded = pad_replicate(&img, 1);
        let w = window_at(&padded, 3, 3, WindowSize::DEFAULT).unwrap();
        assert_eq!(w.positions[0], (1, 1));
        assert_eq!(w.positions[8], (3, 3));
        assert_eq!(w.center(), img.get(2, 2));
    }
}
