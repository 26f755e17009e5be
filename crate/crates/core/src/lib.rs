//! Reduced-ordering vector filters for color images.
//!
//! The crate provides the pieces needed to remove impulsive noise from RGB
//! images by ordering the vectors of a sliding window with an aggregate
//! distance (or similarity) and keeping the lowest-ranked one:
//!
//! - [`image`] and [`io`]: rasters, replicate padding, windows, PNG/PPM files.
//! - [`measures`]: sixteen pairwise measures, with lookup-table evaluation.
//! - [`filter`]: the aggregate-ordering engine, the directional-distance
//!   criterion and the mean-vector route for squared Euclidean ordering.
//! - [`noise`]: seeded correlated impulsive noise.
//! - [`quality`]: MAE, MSE and CIELAB normalized color difference.

pub mod error;
pub mod filter;
pub mod image;
pub mod io;
pub mod measures;
pub mod noise;
pub mod quality;

pub use error::{Error, Result};
pub use filter::{
    aggregate_scores, ddf_scores, filter_d2sq_shortcut, filter_image, filter_image_serial,
    select_output, Criterion, Execution, FilterSpec, PreparedFilter, ScoreVector,
};
pub use image::{pad_replicate, window_at, Image, Rgb, Window, WindowSize};
pub use io::{load_image, save_image};
pub use measures::{
    eval_cfs, eval_measure, lut_eval, MeasureId, MeasureSpec, MeasureTables, Orientation,
};
pub use noise::{corrupt, Corruption, CorruptionMask, NoiseConfig};
pub use quality::{mae, mse, ncd, rgb_to_lab, Lab, QualityReport};
