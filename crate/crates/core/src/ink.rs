//! Digital ink value types: timestamped points, strokes, and inks.
//!
//! Coordinates follow the image convention (y grows downwards) in every
//! space: source images, canvases and InkML files.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::normalize::CanvasTransform;
use crate::scalar::Scalar;

/// Metadata key marking inks whose timestamps were assigned rather than recorded.
pub const SYNTHETIC_TIME_KEY: &str = "synthetic_time";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InkError {
    #[error("empty ink has no bounds")]
    EmptyInk,
    #[error("stroke must contain at least one point")]
    EmptyStroke,
    #[error("non-finite coordinate at point {point}")]
    NonFinite { point: usize },
    #[error("negative timestamp at point {point}")]
    NegativeTime { point: usize },
    #[error("timestamps decrease at point {point}")]
    DecreasingTime { point: usize },
    #[error("transform scale must be finite and non-zero")]
    DegenerateTransform,
    #[error("invalid bounding box: ({x_min}, {y_min}, {x_max}, {y_max})")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
    /// Seconds from the start of the ink.
    pub t: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S, t: S) -> Self {
        Self { x, y, t }
    }

    /// A point with `t = 0`.
    pub fn xy(x: S, y: S) -> Self {
        Self { x, y, t: S::zero() }
    }

    pub fn distance(&self, other: &Self) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A pen-down to pen-up sequence of points. Never empty; time never runs backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke<S> {
    points: Vec<Point<S>>,
}

impl<S: Scalar> Stroke<S> {
    pub fn new(points: Vec<Point<S>>) -> Result<Self, InkError> {
        if points.is_empty() {
            return Err(InkError::EmptyStroke);
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.t.is_finite()) {
                return Err(InkError::NonFinite { point: i });
            }
            if p.t < S::zero() {
                return Err(InkError::NegativeTime { point: i });
            }
            if i > 0 && p.t < points[i - 1].t {
                return Err(InkError::DecreasingTime { point: i });
            }
        }
        Ok(Self { points })
    }

    /// Builds a stroke from `(x, y)` pairs with all timestamps zero.
    pub fn from_xy(coords: &[(S, S)]) -> Result<Self, InkError> {
        Self::new(coords.iter().map(|&(x, y)| Point::xy(x, y)).collect())
    }

    /// Callers guarantee the invariants (used by transformations that
    /// provably keep them).
    pub(crate) fn from_points_unchecked(points: Vec<Point<S>>) -> Self {
        debug_assert!(!points.is_empty());
        Self { points }
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> &Point<S> {
        &self.points[0]
    }

    pub fn last(&self) -> &Point<S> {
        &self.points[self.points.len() - 1]
    }

    pub fn into_points(self) -> Vec<Point<S>> {
        self.points
    }

    /// Polyline length in coordinate units.
    pub fn length(&self) -> S {
        self.points
            .windows(2)
            .fold(S::zero(), |acc, w| acc + w[0].distance(&w[1]))
    }
}

/// An ordered list of strokes plus free-form string metadata.
///
/// Zero strokes is a legal value and means "no ink".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DigitalInk<S> {
    strokes: Vec<Stroke<S>>,
    metadata: BTreeMap<String, String>,
}

impl<S: Scalar> DigitalInk<S> {
    pub fn new(strokes: Vec<Stroke<S>>) -> Self {
        Self {
            strokes,
            metadata: BTreeMap::new(),
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, String>) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn strokes(&self) -> &[Stroke<S>] {
        &self.strokes
    }

    pub fn into_strokes(self) -> Vec<Stroke<S>> {
        self.strokes
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn has_synthetic_time(&self) -> bool {
        self.meta(SYNTHETIC_TIME_KEY) == Some("true")
    }

    pub fn points(&self) -> impl Iterator<Item = &Point<S>> {
        self.strokes.iter().flat_map(|s| s.points.iter())
    }

    pub fn total_points(&self) -> usize {
        self.strokes.iter().map(Stroke::len).sum()
    }

    pub fn bounds(&self) -> Result<BoundingBox<S>, InkError> {
        let mut pts = self.points();
        let first = pts.next().ok_or(InkError::EmptyInk)?;
        let init = BoundingBox {
            x_min: first.x,
            y_min: first.y,
            x_max: first.x,
            y_max: first.y,
        };
        Ok(pts.fold(init, |b, p| BoundingBox {
            x_min: b.x_min.min(p.x),
            y_min: b.y_min.min(p.y),
            x_max: b.x_max.max(p.x),
            y_max: b.y_max.max(p.y),
        }))
    }

    /// Applies `f` to every point's coordinates; time, order and metadata are kept.
    pub fn map_xy(&self, mut f: impl FnMut(S, S) -> (S, S)) -> Self {
        let strokes = self
            .strokes
            .iter()
            .map(|s| {
                Stroke::from_points_unchecked(
                    s.points
                        .iter()
                        .map(|p| {
                            let (x, y) = f(p.x, p.y);
                            Point::new(x, y, p.t)
                        })
                        .collect(),
                )
            })
            .collect();
        Self {
            strokes,
            metadata: self.metadata.clone(),
        }
    }

    pub fn transform(&self, map: &CanvasTransform<S>) -> Result<Self, InkError> {
        map.validate()?;
        Ok(self.map_xy(|x, y| map.apply(x, y)))
    }

    /// Rotates every point by `angle` radians about `(cx, cy)`.
    pub fn rotate(&self, angle: S, cx: S, cy: S) -> Self {
        let (sin, cos) = angle.sin_cos();
        self.map_xy(|x, y| {
            let dx = x - cx;
            let dy = y - cy;
            (cx + dx * cos - dy * sin, cy + dx * sin + dy * cos)
        })
    }

    /// Same strokes, replacing metadata-independent stroke content.
    pub(crate) fn with_strokes(&self, strokes: Vec<Stroke<S>>) -> Self {
        Self {
            strokes,
            metadata: self.metadata.clone(),
        }
    }

    pub(crate) fn metadata_mut(&mut self) -> &mut BTreeMap<String, String> {
        &mut self.metadata
    }

    /// Converts to another scalar type.
    pub fn cast<T: Scalar>(&self) -> DigitalInk<T> {
        DigitalInk {
            strokes: self
                .strokes
                .iter()
                .map(|s| Stroke {
                    points: s
                        .points
                        .iter()
                        .map(|p| Point::new(T::of(p.x.as_f64()), T::of(p.y.as_f64()), T::of(p.t.as_f64())))
                        .collect(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        }
    }
}

/// Axis-aligned box with `x_min <= x_max` and `y_min <= y_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<S> {
    pub x_min: S,
    pub y_min: S,
    pub x_max: S,
    pub y_max: S,
}

impl<S: Scalar> BoundingBox<S> {
    pub fn new(x_min: S, y_min: S, x_max: S, y_max: S) -> Result<Self, InkError> {
        let b = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min > x_max || y_min > y_max {
            return Err(InkError::InvalidBox {
                x_min: x_min.as_f64(),
                y_min: y_min.as_f64(),
                x_max: x_max.as_f64(),
                y_max: y_max.as_f64(),
            });
        }
        Ok(b)
    }

    pub fn width(&self) -> S {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> S {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> S {
        self.width() * self.height()
    }

    pub fn center(&self) -> (S, S) {
        (
            (self.x_min + self.x_max) * S::half(),
            (self.y_min + self.y_max) * S::half(),
        )
    }

    pub fn intersection_area(&self, other: &Self) -> S {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= S::zero() || h <= S::zero() {
            S::zero()
        } else {
            w * h
        }
    }

    /// Intersection over union; zero when the union is empty.
    pub fn iou(&self, other: &Self) -> S {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= S::zero() {
            S::zero()
        } else {
            inter / union
        }
    }

    pub fn contains_box(&self, other: &Self) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && other.x_max <= self.x_max
            && other.y_max <= self.y_max
    }

    /// The box scaled by `factor` about its center.
    pub fn scaled_about_center(&self, factor: S) -> Self {
        let (cx, cy) = self.center();
        let hw = self.width() * S::half() * factor;
        let hh = self.height() * S::half() * factor;
        Self {
            x_min: cx - hw,
            y_min: cy - hh,
            x_max: cx + hw,
            y_max: cy + hh,
        }
    }
}
