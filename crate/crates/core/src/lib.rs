//! Digital ink toolkit: ink model and InkML I/O, normalization, tokenization,
//! rendering with augmentation, training-mixture generation, a geometric
//! derendering baseline, page-level derendering and evaluation metrics.
//!
//! Geometry is generic over [`scalar::Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the raster and pipeline layers use.

pub mod eval;
pub mod geo;
pub mod ink;
pub mod inkml;
pub mod json;
pub mod kv;
pub mod mixture;
pub mod normalize;
pub mod page;
pub mod raster;
pub mod scalar;
pub mod tokens;

pub use ink::{BoundingBox, DigitalInk, InkError, Point, Stroke};
pub use raster::RasterImage;
pub use scalar::Scalar;

pub type Ink = DigitalInk<f64>;
pub type Ink32 = DigitalInk<f32>;
pub type Stroke64 = Stroke<f64>;
pub type Point64 = Point<f64>;
pub type BBox = BoundingBox<f64>;
pub type Transform = normalize::CanvasTransform<f64>;
