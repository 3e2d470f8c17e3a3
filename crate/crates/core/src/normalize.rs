//! Ink normalization: fixed-period time resampling, Ramer-Douglas-Peucker
//! reduction and centered fitting onto an `N x N` canvas.
//!
//! The full chain is [`normalize`], which runs the three steps in order
//! (resample, simplify, fit) and returns the canvas transform so callers can
//! map canvas coordinates back to the source space.

use thiserror::Error;

use crate::ink::{DigitalInk, InkError, Point, Stroke, SYNTHETIC_TIME_KEY};
use crate::scalar::Scalar;

/// Metadata key set when resampling had to be skipped.
pub const RESAMPLE_SKIPPED_KEY: &str = "resample_skipped";

pub const DEFAULT_PERIOD_S: f64 = 0.020;
pub const DEFAULT_EPSILON: f64 = 1.0;
pub const DEFAULT_CANVAS: u32 = 224;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("timestamps decrease in stroke {stroke} at point {point}")]
    DecreasingTime { stroke: usize, point: usize },
    #[error("resampling period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("simplification tolerance must be non-negative and finite, got {0}")]
    BadEpsilon(f64),
    #[error("canvas size must be positive")]
    BadCanvas,
    #[error(transparent)]
    Ink(#[from] InkError),
}

/// Uniform scale plus translation: `p' = scale * p + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanvasTransform<S> {
    pub scale: S,
    pub offset_x: S,
    pub offset_y: S,
    pub canvas_size: u32,
}

impl<S: Scalar> CanvasTransform<S> {
    pub fn new(scale: S, offset_x: S, offset_y: S, canvas_size: u32) -> Result<Self, InkError> {
        let t = Self {
            scale,
            offset_x,
            offset_y,
            canvas_size,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn identity(canvas_size: u32) -> Self {
        Self {
            scale: S::one(),
            offset_x: S::zero(),
            offset_y: S::zero(),
            canvas_size,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), InkError> {
        let ok = self.scale.is_finite()
            && self.scale != S::zero()
            && self.offset_x.is_finite()
            && self.offset_y.is_finite();
        if ok {
            Ok(())
        } else {
            Err(InkError::DegenerateTransform)
        }
    }

    #[inline]
    pub fn apply(&self, x: S, y: S) -> (S, S) {
        (x * self.scale + self.offset_x, y * self.scale + self.offset_y)
    }

    pub fn inverse(&self) -> Self {
        Self {
            scale: S::one() / self.scale,
            offset_x: -self.offset_x / self.scale,
            offset_y: -self.offset_y / self.scale,
            canvas_size: self.canvas_size,
        }
    }

    /// `self` followed by `next`, i.e. `next ∘ self`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            scale: self.scale * next.scale,
            offset_x: self.offset_x * next.scale + next.offset_x,
            offset_y: self.offset_y * next.scale + next.offset_y,
            canvas_size: next.canvas_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleSpec {
    /// Sampling period in seconds.
    pub period: f64,
}

impl Default for ResampleSpec {
    fn default() -> Self {
        Self {
            period: DEFAULT_PERIOD_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifySpec {
    /// Tolerance in canvas units.
    pub epsilon: f64,
}

impl Default for SimplifySpec {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Resamples every stroke at `t0 + k * period` by linear interpolation.
///
/// First and last points of each stroke are always kept. Inks flagged as
/// having synthetic time are returned unchanged with [`RESAMPLE_SKIPPED_KEY`] set.
pub fn resample_time<S: Scalar>(
    ink: &DigitalInk<S>,
    spec: &ResampleSpec,
) -> Result<DigitalInk<S>, NormalizeError> {
    if !(spec.period > 0.0 && spec.period.is_finite()) {
        return Err(NormalizeError::BadPeriod(spec.period));
    }
    if ink.has_synthetic_time() {
        let mut out = ink.clone();
        out.metadata_mut()
            .insert(RESAMPLE_SKIPPED_KEY.into(), SYNTHETIC_TIME_KEY.into());
        return Ok(out);
    }
    let period = S::of(spec.period);
    let mut strokes = Vec::with_capacity(ink.strokes().len());
    for (si, stroke) in ink.strokes().iter().enumerate() {
        let pts = stroke.points();
        if let Some(i) = (1..pts.len()).find(|&i| pts[i].t < pts[i - 1].t) {
            return Err(NormalizeError::DecreasingTime {
                stroke: si,
                point: i,
            });
        }
        strokes.push(Stroke::from_points_unchecked(resample_stroke(pts, period)));
    }
    Ok(ink.with_strokes(strokes))
}

fn resample_stroke<S: Scalar>(pts: &[Point<S>], period: S) -> Vec<Point<S>> {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if pts.len() == 1 {
        return vec![first];
    }
    // ticks closer than this to the final timestamp are absorbed by it
    let slack = period * S::of(1e-6);
    let mut out = vec![first];
    let mut seg = 0;
    let mut k = 1usize;
    loop {
        let tick = first.t + period * S::of(k as f64);
        if tick >= last.t - slack {
            break;
        }
        while pts[seg + 1].t < tick {
            seg += 1;
        }
        let (a, b) = (pts[seg], pts[seg + 1]);
        let span = b.t - a.t;
        let f = if span > S::zero() {
            (tick - a.t) / span
        } else {
            S::one()
        };
        out.push(Point::new(
            a.x + (b.x - a.x) * f,
            a.y + (b.y - a.y) * f,
            tick,
        ));
        k += 1;
    }
    out.push(last);
    out
}

/// Per-stroke Ramer-Douglas-Peucker reduction with tolerance `spec.epsilon`.
///
/// Retained points are original points (time included); endpoints always stay.
/// A zero tolerance returns the ink unchanged.
pub fn simplify<S: Scalar>(
    ink: &DigitalInk<S>,
    spec: &SimplifySpec,
) -> Result<DigitalInk<S>, NormalizeError> {
    if !(spec.epsilon >= 0.0 && spec.epsilon.is_finite()) {
        return Err(NormalizeError::BadEpsilon(spec.epsilon));
    }
    if spec.epsilon == 0.0 {
        return Ok(ink.clone());
    }
    let eps = S::of(spec.epsilon);
    let strokes = ink
        .strokes()
        .iter()
        .map(|s| {
            let pts = s.points();
            let kept = rdp_keep(pts, eps);
            Stroke::from_points_unchecked(kept.into_iter().map(|i| pts[i]).collect())
        })
        .collect();
    Ok(ink.with_strokes(strokes))
}

/// Distance from `p` to the line through `a` and `b` (to `a` if they coincide).
pub(crate) fn line_distance<S: Scalar>(p: &Point<S>, a: &Point<S>, b: &Point<S>) -> S {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len = dx.hypot(dy);
    if len == S::zero() {
        return p.distance(a);
    }
    ((p.x - a.x) * dy - (p.y - a.y) * dx).abs() / len
}

/// Sorted indices of the points kept by RDP.
pub fn rdp_keep<S: Scalar>(pts: &[Point<S>], epsilon: S) -> Vec<usize> {
    let n = pts.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let mut best = lo;
        let mut best_d = S::neg_infinity();
        for i in lo + 1..hi {
            let d = line_distance(&pts[i], &pts[lo], &pts[hi]);
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        if best_d > epsilon {
            keep[best] = true;
            stack.push((best, hi));
            stack.push((lo, best));
        }
    }
    keep.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}

/// The transform that fits `ink` centered into `[0, n]^2`, aspect preserved.
///
/// The larger side of the bounds maps to exactly `n`. A single-location ink
/// gets scale 1 and lands on the canvas center.
pub fn canvas_fit_transform<S: Scalar>(
    ink: &DigitalInk<S>,
    n: u32,
) -> Result<CanvasTransform<S>, NormalizeError> {
    if n == 0 {
        return Err(NormalizeError::BadCanvas);
    }
    let b = ink.bounds()?;
    let size = S::of(n as f64);
    let side = b.width().max(b.height());
    let scale = if side > S::zero() { size / side } else { S::one() };
    let offset_x = (size - b.width() * scale) * S::half() - b.x_min * scale;
    let offset_y = (size - b.height() * scale) * S::half() - b.y_min * scale;
    Ok(CanvasTransform::new(scale, offset_x, offset_y, n)?)
}

pub fn fit_to_canvas<S: Scalar>(
    ink: &DigitalInk<S>,
    n: u32,
) -> Result<(DigitalInk<S>, CanvasTransform<S>), NormalizeError> {
    let t = canvas_fit_transform(ink, n)?;
    Ok((ink.transform(&t)?, t))
}

/// Assigns `t = k * period` with one shared counter over the whole ink.
///
/// The counter skips one extra tick between consecutive strokes. The result
/// carries `synthetic_time = true`.
pub fn hallucinate_time<S: Scalar>(ink: &DigitalInk<S>, period: S) -> DigitalInk<S> {
    let mut k = 0usize;
    let mut strokes = Vec::with_capacity(ink.strokes().len());
    for (si, s) in ink.strokes().iter().enumerate() {
        if si > 0 {
            k += 1;
        }
        let pts = s
            .points()
            .iter()
            .map(|p| {
                let t = period * S::of(k as f64);
                k += 1;
                Point::new(p.x, p.y, t)
            })
            .collect();
        strokes.push(Stroke::from_points_unchecked(pts));
    }
    let mut out = ink.with_strokes(strokes);
    out.metadata_mut()
        .insert(SYNTHETIC_TIME_KEY.into(), "true".into());
    out
}

/// Parameters of the full resample → simplify → fit chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeSpec {
    pub resample: ResampleSpec,
    pub simplify: SimplifySpec,
    pub canvas: u32,
}

impl Default for NormalizeSpec {
    fn default() -> Self {
        Self {
            resample: ResampleSpec::default(),
            simplify: SimplifySpec::default(),
            canvas: DEFAULT_CANVAS,
        }
    }
}

/// Runs resample, simplify and fit in that order.
///
/// The simplification tolerance is given in canvas units; since it runs
/// before fitting it is divided by the fit scale of the resampled ink.
pub fn normalize<S: Scalar>(
    ink: &DigitalInk<S>,
    spec: &NormalizeSpec,
) -> Result<(DigitalInk<S>, CanvasTransform<S>), NormalizeError> {
    let resampled = resample_time(ink, &spec.resample)?;
    let pre_scale = canvas_fit_transform(&resampled, spec.canvas)?.scale.as_f64();
    let simplified = simplify(
        &resampled,
        &SimplifySpec {
            epsilon: spec.simplify.epsilon / pre_scale,
        },
    )?;
    fit_to_canvas(&simplified, spec.canvas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timed(points: &[(f64, f64, f64)]) -> DigitalInk<f64> {
        let pts = points.iter().map(|&(x, y, t)| Point::new(x, y, t)).collect();
        DigitalInk::new(vec![Stroke::new(pts).unwrap()])
    }

    fn xy(ink: &DigitalInk<f64>) -> Vec<Vec<(f64, f64)>> {
        ink.strokes()
            .iter()
            .map(|s| s.points().iter().map(|p| (p.x, p.y)).collect())
            .collect()
    }

    #[test]
    fn resample_linear_motion() {
        let ink = timed(&[(0.0, 0.0, 0.0), (10.0, 0.0, 0.1)]);
        let out = resample_time(&ink, &ResampleSpec::default()).unwrap();
        let xs: Vec<f64> = out.strokes()[0].points().iter().map(|p| p.x).collect();
        assert_eq!(xs.len(), 6);
        for (got, want) in xs.iter().zip([0.0, 2.0, 4.0, 6.0, 8.0, 10.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn resample_single_point_and_fixed_point() {
        let one = timed(&[(3.0, 4.0, 0.5)]);
        assert_eq!(resample_time(&one, &ResampleSpec::default()).unwrap(), one);

        let pts: Vec<(f64, f64, f64)> = (0..8)
            .map(|k| (k as f64 * 1.5, (k * k) as f64, k as f64 * 0.02))
            .collect();
        let ink = timed(&pts);
        let out = resample_time(&ink, &ResampleSpec::default()).unwrap();
        assert_eq!(out.total_points(), 8);
        for (a, b) in out.points().zip(ink.points()) {
            assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_short_stroke_collapses_to_endpoints() {
        let ink = timed(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.005), (2.0, 0.0, 0.01)]);
        let out = resample_time(&ink, &ResampleSpec::default()).unwrap();
        assert_eq!(xy(&out), vec![vec![(0.0, 0.0), (2.0, 0.0)]]);
    }

    #[test]
    fn resample_rejects_decreasing_time() {
        // Stroke::new refuses decreasing time, so build through the unchecked path.
        let s = Stroke::from_points_unchecked(vec![
            Point::new(0.0, 0.0, 0.1),
            Point::new(1.0, 0.0, 0.0),
        ]);
        let ink = DigitalInk::new(vec![Stroke::from_xy(&[(0.0, 0.0)]).unwrap(), s]);
        let err = resample_time(&ink, &ResampleSpec::default()).unwrap_err();
        assert_eq!(err, NormalizeError::DecreasingTime { stroke: 1, point: 1 });
    }

    #[test]
    fn resample_skips_synthetic_time() {
        let ink = hallucinate_time(&timed(&[(0.0, 0.0, 0.0), (5.0, 0.0, 1.0)]), 0.02);
        let out = resample_time(&ink, &ResampleSpec::default()).unwrap();
        assert_eq!(out.strokes(), ink.strokes());
        assert_eq!(out.meta(RESAMPLE_SKIPPED_KEY), Some(SYNTHETIC_TIME_KEY));
    }

    #[test]
    fn simplify_examples() {
        let collinear = timed(&[(0.0, 0.0, 0.0), (5.0, 0.0, 0.1), (10.0, 0.0, 0.2)]);
        let out = simplify(&collinear, &SimplifySpec { epsilon: 0.5 }).unwrap();
        assert_eq!(xy(&out), vec![vec![(0.0, 0.0), (10.0, 0.0)]]);
        assert_eq!(out.strokes()[0].last().t, 0.2);

        let same = simplify(&collinear, &SimplifySpec { epsilon: 0.0 }).unwrap();
        assert_eq!(same, collinear);

        // middle point sits 10/sqrt(2) = 7.07 from the chord
        let corner = timed(&[(0.0, 0.0, 0.0), (10.0, 0.0, 0.1), (10.0, 10.0, 0.2)]);
        let out = simplify(&corner, &SimplifySpec { epsilon: 0.5 }).unwrap();
        assert_eq!(out.total_points(), 3);
        let d: f64 = line_distance(
            &Point::xy(10.0, 0.0),
            &Point::xy(0.0, 0.0),
            &Point::xy(10.0, 10.0),
        );
        assert!((d - 7.0710678118654755).abs() < 1e-12);
    }

    #[test]
    fn fit_examples() {
        let ink: DigitalInk<f64> = DigitalInk::new(vec![Stroke::from_xy(&[(0.0, 0.0), (10.0, 5.0)]).unwrap()]);
        let (out, t) = fit_to_canvas(&ink, 224).unwrap();
        assert!((t.scale - 22.4).abs() < 1e-12);
        let b = out.bounds().unwrap();
        for (got, want) in [(b.x_min, 0.0), (b.y_min, 56.0), (b.x_max, 224.0), (b.y_max, 168.0)] {
            assert!((got - want).abs() < 1e-9);
        }

        let dot: DigitalInk<f64> = DigitalInk::new(vec![Stroke::from_xy(&[(7.0, -3.0)]).unwrap()]);
        let (out, t) = fit_to_canvas(&dot, 224).unwrap();
        assert_eq!(t.scale, 1.0);
        let p = out.strokes()[0].first();
        assert_eq!((p.x, p.y), (112.0, 112.0));

        let full: DigitalInk<f64> = DigitalInk::new(vec![Stroke::from_xy(&[(0.0, 0.0), (224.0, 224.0)]).unwrap()]);
        let (_, t) = fit_to_canvas(&full, 224).unwrap();
        assert!((t.scale - 1.0).abs() < 1e-9);
        assert!(t.offset_x.abs() < 1e-9 && t.offset_y.abs() < 1e-9);

        assert!(fit_to_canvas(&DigitalInk::<f64>::empty(), 224).is_err());
    }

    #[test]
    fn hallucinate_examples() {
        let one = timed(&[(0.0, 0.0, 5.0), (1.0, 0.0, 6.0), (2.0, 0.0, 7.0)]);
        let out = hallucinate_time(&one, 0.02);
        let ts: Vec<f64> = out.points().map(|p| p.t).collect();
        assert_eq!(ts, vec![0.0, 0.02, 0.04]);
        assert!(out.has_synthetic_time());

        let two: DigitalInk<f64> = DigitalInk::new(vec![
            Stroke::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap(),
            Stroke::from_xy(&[(0.0, 1.0), (1.0, 1.0)]).unwrap(),
        ]);
        let ts: Vec<f64> = hallucinate_time(&two, 0.02).points().map(|p| p.t).collect();
        let want = [0.0, 0.02, 0.06, 0.08];
        for (g, w) in ts.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }

        assert!(hallucinate_time(&DigitalInk::<f64>::empty(), 0.02).is_empty());
    }

    #[test]
    fn normalize_chain_lands_on_canvas() {
        let pts: Vec<(f64, f64, f64)> = (0..50)
            .map(|k| {
                let a = k as f64 * 0.2;
                (100.0 + 40.0 * a.cos(), 300.0 + 20.0 * a.sin(), k as f64 * 0.013)
            })
            .collect();
        let (out, t) = normalize(&timed(&pts), &NormalizeSpec::default()).unwrap();
        let b = out.bounds().unwrap();
        assert!(b.x_min >= -1e-9 && b.x_max <= 224.0 + 1e-9);
        assert!(t.scale > 0.0);
    }
}
