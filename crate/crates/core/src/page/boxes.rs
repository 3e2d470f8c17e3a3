use std::path::Path;

use serde_json::{json, Value};

use super::{PageError, WordBox};
use crate::geo::binarize;
use crate::json;
use crate::{BBox, RasterImage};

/// Parses `[{"box":[x_min,y_min,x_max,y_max],"label":"..","rotation":0.1}]`.
pub fn parse_wordboxes(text: &str) -> Result<Vec<WordBox>, PageError> {
    let items = json::parse_array(text)?;
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("$[{i}]");
        let obj = json::object(item, &path, &["box", "label", "rotation"])?;
        let [x0, y0, x1, y1] = json::bbox(obj.get("box"), &format!("{path}.box"))?;
        let label = match obj.get("label") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(Value::String(_)) => return Err(json::schema(&format!("{path}.label"), "must be non-empty").into()),
            Some(_) => return Err(json::schema(&format!("{path}.label"), "expected a string").into()),
        };
        let rotation = match obj.get("rotation") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_f64()
                    .filter(|r| r.is_finite())
                    .ok_or_else(|| json::schema(&format!("{path}.rotation"), "expected a finite number"))?,
            ),
        };
        let bbox = BBox::new(x0, y0, x1, y1)?;
        out.push(WordBox::new(bbox, label, rotation)?);
    }
    Ok(out)
}

pub fn load_wordboxes(path: impl AsRef<Path>) -> Result<Vec<WordBox>, PageError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_wordboxes(&text)
}

pub fn wordboxes_to_json(boxes: &[WordBox]) -> String {
    let items: Vec<Value> = boxes
        .iter()
        .map(|w| {
            let b = &w.bbox;
            let corners = [b.x_min, b.y_min, b.x_max, b.y_max].map(json::number_json);
            let mut v = json!({ "box": corners });
            if let Some(l) = &w.label {
                v["label"] = json!(l);
            }
            if let Some(r) = w.rotation {
                v["rotation"] = json::number_json(r);
            }
            v
        })
        .collect();
    serde_json::to_string_pretty(&Value::Array(items)).expect("plain values serialize")
}

/// Source of word boxes for a page.
pub trait WordDetector {
    fn detect(&self, page: &RasterImage) -> Vec<WordBox>;
}

/// Projection-profile segmentation: text lines are runs of inked rows, words
/// are runs of inked columns within a line separated by wide enough gaps.
/// Only meant for clean, upright demo pages.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionSegmenter {
    /// Column gaps at least this wide split words.
    pub min_word_gap: u32,
    /// Margin added around each detected word, clamped to the page.
    pub padding: u32,
}

impl Default for ProjectionSegmenter {
    fn default() -> Self {
        Self {
            min_word_gap: 12,
            padding: 4,
        }
    }
}

fn runs(profile: &[bool], min_gap: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < profile.len() {
        if !profile[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < profile.len() && profile[i] {
            i += 1;
        }
        match out.last_mut() {
            Some(last) if start - last.1 < min_gap => last.1 = i,
            _ => out.push((start, i)),
        }
    }
    out
}

impl WordDetector for ProjectionSegmenter {
    fn detect(&self, page: &RasterImage) -> Vec<WordBox> {
        let bin = binarize(page);
        let (w, h) = (bin.width() as i64, bin.height() as i64);
        let rows: Vec<bool> = (0..h).map(|y| (0..w).any(|x| bin.get(x, y))).collect();
        let pad = self.padding as f64;
        let mut out = Vec::new();
        for (y0, y1) in runs(&rows, 1) {
            let cols: Vec<bool> = (0..w).map(|x| (y0 as i64..y1 as i64).any(|y| bin.get(x, y))).collect();
            for (x0, x1) in runs(&cols, self.min_word_gap.max(1) as usize) {
                let b = BBox {
                    x_min: (x0 as f64 - pad).max(0.0),
                    y_min: (y0 as f64 - pad).max(0.0),
                    x_max: (x1 as f64 + pad).min(w as f64),
                    y_max: (y1 as f64 + pad).min(h as f64),
                };
                out.push(WordBox::plain(b));
            }
        }
        out
    }
}

pub fn segment_words(page: &RasterImage) -> Vec<WordBox> {
    ProjectionSegmenter::default().detect(page)
}
