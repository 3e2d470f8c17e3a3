//! Full-page derendering: word boxes in, one backend call per word, strokes
//! mapped back into page coordinates.

mod backend;
mod boxes;
mod svg;

pub use backend::{
    BackendError, BackendOutput, DerenderBackend, DerenderRequest, FixedBackend, GeoBackend, SubprocessBackend,
};
pub use boxes::{load_wordboxes, parse_wordboxes, segment_words, wordboxes_to_json, ProjectionSegmenter, WordDetector};
pub use svg::svg_overlay;

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;

use crate::ink::{DigitalInk, InkError, Stroke, SYNTHETIC_TIME_KEY};
use crate::json::JsonError;
use crate::normalize::CanvasTransform;
use crate::raster::{fit_image, RasterError, RasterImage, MIN_RENDER_SIZE};
use crate::{BBox, Ink};

/// Open interval on width / height for a usable word crop.
pub const MIN_ASPECT: f64 = 0.5;
pub const MAX_ASPECT: f64 = 4.0;
/// Smallest accepted crop side, pixels.
pub const MIN_SIDE_PX: f64 = 25.0;

#[derive(Debug, thiserror::Error)]
pub enum PageError {
    #[error("image size {0} is below the minimum of {MIN_RENDER_SIZE}")]
    CanvasTooSmall(u32),
    #[error("word box label must be non-empty when present")]
    EmptyLabel,
    #[error("rotation must be finite")]
    BadRotation,
    #[error(transparent)]
    Ink(#[from] InkError),
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// A word region on the page, optionally labeled and rotated (radians,
/// clockwise in image coordinates, about the box center).
#[derive(Debug, Clone, PartialEq)]
pub struct WordBox {
    pub bbox: BBox,
    pub label: Option<String>,
    pub rotation: Option<f64>,
}

impl WordBox {
    pub fn new(bbox: BBox, label: Option<String>, rotation: Option<f64>) -> Result<Self, PageError> {
        if label.as_deref() == Some("") {
            return Err(PageError::EmptyLabel);
        }
        if rotation.is_some_and(|r| !r.is_finite()) {
            return Err(PageError::BadRotation);
        }
        Ok(Self { bbox, label, rotation })
    }

    pub fn plain(bbox: BBox) -> Self {
        Self {
            bbox,
            label: None,
            rotation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    /// Clamped box has no area inside the page.
    OutsideImage,
    AspectRatio { ratio: f64 },
    MinSide { side: f64 },
    BackendError(String),
}

impl SkipReason {
    pub fn code(&self) -> &'static str {
        match self {
            SkipReason::OutsideImage => "outside_image",
            SkipReason::AspectRatio { .. } => "aspect_ratio",
            SkipReason::MinSide { .. } => "min_side",
            SkipReason::BackendError(_) => "backend_error",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::OutsideImage => write!(f, "outside_image: box does not overlap the page"),
            SkipReason::AspectRatio { ratio } => {
                write!(f, "aspect_ratio: width/height {ratio:.3} not in ({MIN_ASPECT}, {MAX_ASPECT})")
            }
            SkipReason::MinSide { side } => write!(f, "min_side: side {side} below {MIN_SIDE_PX} px"),
            SkipReason::BackendError(msg) => write!(f, "backend_error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterDecision {
    /// The box clamped to the page.
    Keep(BBox),
    Skip(SkipReason),
}

/// Clamps the box to the page, then requires `0.5 < w/h < 4.0` and both
/// sides at least 25 px.
pub fn filter_box(wb: &WordBox, width: u32, height: u32) -> FilterDecision {
    let b = &wb.bbox;
    let x0 = b.x_min.clamp(0.0, width as f64);
    let x1 = b.x_max.clamp(0.0, width as f64);
    let y0 = b.y_min.clamp(0.0, height as f64);
    let y1 = b.y_max.clamp(0.0, height as f64);
    let (w, h) = (x1 - x0, y1 - y0);
    if w <= 0.0 || h <= 0.0 {
        return FilterDecision::Skip(SkipReason::OutsideImage);
    }
    let ratio = w / h;
    if !(ratio > MIN_ASPECT && ratio < MAX_ASPECT) {
        return FilterDecision::Skip(SkipReason::AspectRatio { ratio });
    }
    let side = w.min(h);
    if side < MIN_SIDE_PX {
        return FilterDecision::Skip(SkipReason::MinSide { side });
    }
    FilterDecision::Keep(BBox { x_min: x0, y_min: y0, x_max: x1, y_max: y1 })
}

/// Placement of an upright crop in the page: crop pixel `(u, v)` sits at
/// `center + R(rotation) * (u - width/2, v - height/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropFrame {
    pub center: (f64, f64),
    pub width: u32,
    pub height: u32,
    pub rotation: f64,
}

impl CropFrame {
    fn for_box(b: &BBox, rotation: Option<f64>) -> Self {
        match rotation {
            None | Some(0.0) => {
                let x0 = b.x_min.floor();
                let y0 = b.y_min.floor();
                let w = (b.x_max.ceil() - x0).max(1.0);
                let h = (b.y_max.ceil() - y0).max(1.0);
                Self {
                    center: (x0 + w / 2.0, y0 + h / 2.0),
                    width: w as u32,
                    height: h as u32,
                    rotation: 0.0,
                }
            }
            Some(r) => Self {
                center: b.center(),
                width: b.width().round().max(1.0) as u32,
                height: b.height().round().max(1.0) as u32,
                rotation: r,
            },
        }
    }

    pub fn to_page(&self, u: f64, v: f64) -> (f64, f64) {
        let (du, dv) = (u - self.width as f64 / 2.0, v - self.height as f64 / 2.0);
        if self.rotation == 0.0 {
            return (self.center.0 + du, self.center.1 + dv);
        }
        let (s, c) = self.rotation.sin_cos();
        (self.center.0 + c * du - s * dv, self.center.1 + s * du + c * dv)
    }

    fn crop(&self, page: &RasterImage) -> Result<RasterImage, RasterError> {
        if self.rotation == 0.0 {
            let (x0, y0) = self.to_page(0.0, 0.0);
            return page.crop(x0 as u32, y0 as u32, self.width, self.height);
        }
        let mut out = RasterImage::filled(self.width, self.height, [0, 0, 0])?;
        for j in 0..self.height {
            for i in 0..self.width {
                let (x, y) = self.to_page(i as f64 + 0.5, j as f64 + 0.5);
                out.set(i, j, page.sample_bilinear(x, y).map(crate::raster::to_u8));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordRecord {
    pub word: WordBox,
    pub crop: Option<CropFrame>,
    /// Crop pixels to model canvas.
    pub transform: Option<CanvasTransform<f64>>,
    pub diagnostics: Vec<String>,
    pub skipped: Option<SkipReason>,
    /// This word's strokes within the page ink.
    pub strokes: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageResult {
    pub ink: Ink,
    pub records: Vec<WordRecord>,
}

impl PageResult {
    pub fn kept(&self) -> usize {
        self.records.iter().filter(|r| r.skipped.is_none()).count()
    }

    pub fn backend_failures(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.skipped, Some(SkipReason::BackendError(_))))
            .count()
    }

    pub fn word_ink(&self, index: usize) -> Ink {
        let r = &self.records[index];
        DigitalInk::new(self.ink.strokes()[r.strokes.clone()].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageOptions {
    /// Side of the image handed to the backend.
    pub m: u32,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl Default for PageOptions {
    fn default() -> Self {
        Self {
            m: crate::raster::DEFAULT_IMAGE_SIZE,
            jobs: 1,
        }
    }
}

struct WordOutcome {
    record: WordRecord,
    strokes: Vec<Stroke<f64>>,
}

fn clip_to_canvas(ink: &Ink, m: f64) -> (Ink, usize) {
    let mut clipped = 0;
    let out = ink.map_xy(|x, y| {
        let (cx, cy) = (x.clamp(0.0, m), y.clamp(0.0, m));
        if (cx, cy) != (x, y) {
            clipped += 1;
        }
        (cx, cy)
    });
    (out, clipped)
}

fn derender_word_box(page: &RasterImage, wb: &WordBox, backend: &dyn DerenderBackend, m: u32) -> WordOutcome {
    let mut record = WordRecord {
        word: wb.clone(),
        crop: None,
        transform: None,
        diagnostics: Vec::new(),
        skipped: None,
        strokes: 0..0,
    };
    let skip = |mut record: WordRecord, reason| {
        record.skipped = Some(reason);
        WordOutcome { record, strokes: Vec::new() }
    };
    let clamped = match filter_box(wb, page.width(), page.height()) {
        FilterDecision::Keep(b) => b,
        FilterDecision::Skip(reason) => return skip(record, reason),
    };
    let frame = CropFrame::for_box(&clamped, wb.rotation);
    record.crop = Some(frame);
    let crop = match frame.crop(page) {
        Ok(c) => c,
        Err(_) => return skip(record, SkipReason::OutsideImage),
    };
    let (fitted, t) = match fit_image(&crop, m) {
        Ok(v) => v,
        Err(e) => return skip(record, SkipReason::BackendError(e.to_string())),
    };
    record.transform = Some(t);
    let (cx0, cy0) = t.apply(0.0, 0.0);
    let (cx1, cy1) = t.apply(crop.width() as f64, crop.height() as f64);
    let content = BBox { x_min: cx0, y_min: cy0, x_max: cx1, y_max: cy1 };

    let label = wb.label.as_deref().filter(|_| backend.accepts_text_prompt());
    let mut request = DerenderRequest { image: &fitted, label, content, m };
    let mut out = match backend.derender(&request) {
        Ok(o) => o,
        Err(e) => return skip(record, SkipReason::BackendError(e.to_string())),
    };
    record.diagnostics.append(&mut out.diagnostics);
    if out.ink.is_empty() && label.is_some() {
        record.diagnostics.push("empty output with label; retried without label".into());
        request.label = None;
        out = match backend.derender(&request) {
            Ok(o) => o,
            Err(e) => return skip(record, SkipReason::BackendError(e.to_string())),
        };
        record.diagnostics.append(&mut out.diagnostics);
    }
    let (ink, clipped) = clip_to_canvas(&out.ink, m as f64);
    if clipped > 0 {
        record.diagnostics.push(format!("clipped {clipped} points to [0, {m}]"));
    }
    let back = t.inverse();
    let on_page = ink.map_xy(|x, y| {
        let (u, v) = back.apply(x, y);
        frame.to_page(u, v)
    });
    WordOutcome {
        record,
        strokes: on_page.into_strokes(),
    }
}

/// Derenders every kept box and pastes the strokes back in input order.
/// Backend failures skip the word; they never abort the page.
pub fn derender_page(
    page: &RasterImage,
    boxes: &[WordBox],
    backend: &dyn DerenderBackend,
    opts: &PageOptions,
) -> Result<PageResult, PageError> {
    if opts.m < MIN_RENDER_SIZE {
        return Err(PageError::CanvasTooSmall(opts.m));
    }
    let run = || -> Vec<WordOutcome> {
        boxes
            .par_iter()
            .map(|wb| derender_word_box(page, wb, backend, opts.m))
            .collect()
    };
    let outcomes = match opts.jobs {
        0 => run(),
        1 => boxes
            .iter()
            .map(|wb| derender_word_box(page, wb, backend, opts.m))
            .collect(),
        j => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| PageError::Pool(e.to_string()))?
            .install(run),
    };

    let mut strokes = Vec::new();
    let mut records = Vec::with_capacity(outcomes.len());
    for mut o in outcomes {
        let start = strokes.len();
        strokes.append(&mut o.strokes);
        o.record.strokes = start..strokes.len();
        records.push(o.record);
    }
    let mut ink = DigitalInk::new(strokes);
    if !ink.is_empty() {
        ink = ink.with_meta(SYNTHETIC_TIME_KEY, "true");
    }
    Ok(PageResult { ink, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wb(x0: f64, y0: f64, x1: f64, y1: f64) -> WordBox {
        WordBox::plain(BBox::new(x0, y0, x1, y1).unwrap())
    }

    fn reason(d: FilterDecision) -> Option<&'static str> {
        match d {
            FilterDecision::Keep(_) => None,
            FilterDecision::Skip(r) => Some(r.code()),
        }
    }

    #[test]
    fn filter_examples() {
        assert_eq!(reason(filter_box(&wb(0.0, 0.0, 100.0, 50.0), 500, 500)), None);
        assert_eq!(reason(filter_box(&wb(0.0, 0.0, 100.0, 20.0), 500, 500)), Some("aspect_ratio"));
        assert_eq!(reason(filter_box(&wb(0.0, 0.0, 24.0, 24.0), 500, 500)), Some("min_side"));
        assert_eq!(reason(filter_box(&wb(0.0, 0.0, 100.0, 25.0), 500, 500)), Some("aspect_ratio"));
        assert_eq!(reason(filter_box(&wb(0.0, 0.0, 99.9, 25.0), 500, 500)), None);
        assert_eq!(reason(filter_box(&wb(0.0, 0.0, 25.0, 25.0), 500, 500)), None);
        assert_eq!(reason(filter_box(&wb(600.0, 0.0, 700.0, 50.0), 500, 500)), Some("outside_image"));
    }

    #[test]
    fn filter_clamps_before_measuring() {
        // 100x50 nominal, but only 20x50 lies on the page
        assert_eq!(reason(filter_box(&wb(-80.0, 0.0, 20.0, 50.0), 500, 500)), Some("aspect_ratio"));
        match filter_box(&wb(-10.0, -10.0, 90.0, 40.0), 500, 500) {
            FilterDecision::Keep(b) => assert_eq!((b.x_min, b.y_min, b.x_max, b.y_max), (0.0, 0.0, 90.0, 40.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_label_is_rejected() {
        let b = BBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(WordBox::new(b, Some(String::new()), None).is_err());
    }

    #[test]
    fn rotated_frame_round_trip() {
        let b = BBox::new(10.0, 20.0, 110.0, 60.0).unwrap();
        let f = CropFrame::for_box(&b, Some(0.3));
        let (x, y) = f.to_page(50.0, 20.0);
        assert!((x - 60.0).abs() < 1e-12 && (y - 40.0).abs() < 1e-12);
        let f0 = CropFrame::for_box(&b, None);
        assert_eq!(f0.to_page(0.0, 0.0), (10.0, 20.0));
    }
}
