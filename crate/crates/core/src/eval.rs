//! Evaluation metrics: character-level F1 over character boxes, and geometric
//! comparisons between inks.

use serde_json::{json, Value};

use crate::ink::{BoundingBox, DigitalInk, Point};
use crate::json::{self, JsonError};
use crate::scalar::Scalar;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("IoU threshold {0} is outside (0, 1)")]
    Threshold(f64),
    #[error("sample step {0} must be positive and finite")]
    Step(f64),
    #[error("chamfer distance needs two non-empty inks")]
    EmptyInk,
    #[error(transparent)]
    Json(#[from] JsonError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharBox<S> {
    pub bbox: BoundingBox<S>,
    pub ch: char,
}

impl<S: Scalar> CharBox<S> {
    pub fn new(bbox: BoundingBox<S>, ch: char) -> Self {
        Self { bbox, ch }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub pred: usize,
    pub truth: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matches: Vec<Match>,
    pub unmatched_pred: usize,
    pub unmatched_truth: usize,
}

impl F1Report {
    pub fn to_json(&self) -> Value {
        json!({
            "precision": json::number_json(self.precision),
            "recall": json::number_json(self.recall),
            "f1": json::number_json(self.f1),
            "matched": self.matches.len(),
            "unmatched_pred": self.unmatched_pred,
            "unmatched_truth": self.unmatched_truth,
            "matches": self.matches.iter().map(|m| json!({
                "pred": m.pred,
                "truth": m.truth,
                "iou": json::number_json(m.iou),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_table(&self) -> String {
        format!(
            "precision  {:.4}\nrecall     {:.4}\nf1         {:.4}\nmatched    {}\nunmatched  pred {} / truth {}\n",
            self.precision,
            self.recall,
            self.f1,
            self.matches.len(),
            self.unmatched_pred,
            self.unmatched_truth
        )
    }
}

/// Greedy one-to-one matching: candidate pairs need the same character and
/// IoU at or above the threshold, and are taken in order of descending IoU
/// (ties by pred index, then truth index).
pub fn char_f1<S: Scalar>(
    pred: &[CharBox<S>],
    truth: &[CharBox<S>],
    iou_threshold: f64,
) -> Result<F1Report, EvalError> {
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(EvalError::Threshold(iou_threshold));
    }
    if pred.is_empty() && truth.is_empty() {
        return Ok(F1Report {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            matches: Vec::new(),
            unmatched_pred: 0,
            unmatched_truth: 0,
        });
    }
    let mut candidates = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            if p.ch != t.ch {
                continue;
            }
            let iou = p.bbox.iou(&t.bbox).as_f64();
            if iou >= iou_threshold {
                candidates.push(Match { pred: i, truth: j, iou });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.pred.cmp(&b.pred))
            .then(a.truth.cmp(&b.truth))
    });
    let mut pred_used = vec![false; pred.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut matches = Vec::new();
    for c in candidates {
        if !pred_used[c.pred] && !truth_used[c.truth] {
            pred_used[c.pred] = true;
            truth_used[c.truth] = true;
            matches.push(c);
        }
    }
    let k = matches.len() as f64;
    let precision = if pred.is_empty() { 0.0 } else { k / pred.len() as f64 };
    let recall = if truth.is_empty() { 0.0 } else { k / truth.len() as f64 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(F1Report {
        precision,
        recall,
        f1,
        unmatched_pred: pred.len() - matches.len(),
        unmatched_truth: truth.len() - matches.len(),
        matches,
    })
}

/// Parses `[{"box":[x_min,y_min,x_max,y_max],"char":"a"}, ...]`.
pub fn parse_char_boxes(text: &str) -> Result<Vec<CharBox<f64>>, EvalError> {
    let items = json::parse_array(text)?;
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("$[{i}]");
        let obj = json::object(item, &path, &["box", "char"])?;
        let [x0, y0, x1, y1] = json::bbox(obj.get("box"), &format!("{path}.box"))?;
        let cpath = format!("{path}.char");
        let s = obj
            .get("char")
            .ok_or_else(|| json::schema(&cpath, "missing field"))?
            .as_str()
            .ok_or_else(|| json::schema(&cpath, "expected a string"))?;
        let mut chars = s.chars();
        let ch = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(json::schema(&cpath, "expected exactly one character").into()),
        };
        let bbox = BoundingBox::new(x0, y0, x1, y1).expect("validated by json::bbox");
        out.push(CharBox::new(bbox, ch));
    }
    Ok(out)
}

pub fn char_boxes_to_json<S: Scalar>(boxes: &[CharBox<S>]) -> String {
    let items: Vec<Value> = boxes
        .iter()
        .map(|b| {
            let corners = [b.bbox.x_min, b.bbox.y_min, b.bbox.x_max, b.bbox.y_max]
                .map(|v| json::number_json(v.as_f64()));
            json!({
                "box": corners,
                "char": b.ch.to_string(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&Value::Array(items)).expect("plain values serialize")
}

/// Points along every stroke at arc-length spacing of at most `step`,
/// vertices included.
pub fn densify<S: Scalar>(ink: &DigitalInk<S>, step: S) -> Vec<(S, S)> {
    let mut out = Vec::new();
    for s in ink.strokes() {
        let pts = s.points();
        out.push((pts[0].x, pts[0].y));
        for w in pts.windows(2) {
            let (a, b): (&Point<S>, &Point<S>) = (&w[0], &w[1]);
            let len = a.distance(b);
            let k = (len / step).ceil().to_usize().unwrap_or(1).max(1);
            let kf = S::of(k as f64);
            for i in 1..=k {
                let u = S::of(i as f64) / kf;
                out.push((a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u));
            }
        }
    }
    out
}

fn mean_nearest<S: Scalar>(from: &[(S, S)], to: &[(S, S)]) -> S {
    let total = from.iter().fold(S::zero(), |acc, &(x, y)| {
        let d = to
            .iter()
            .map(|&(u, v)| (x - u).hypot(y - v))
            .fold(S::infinity(), S::min);
        acc + d
    });
    total / S::of(from.len() as f64)
}

/// Symmetric Chamfer distance: the average of the two directed mean
/// nearest-neighbour distances between densified polylines.
pub fn chamfer<S: Scalar>(a: &DigitalInk<S>, b: &DigitalInk<S>, step: S) -> Result<S, EvalError> {
    if !(step > S::zero() && step.is_finite()) {
        return Err(EvalError::Step(step.as_f64()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::EmptyInk);
    }
    let (pa, pb) = (densify(a, step), densify(b, step));
    Ok((mean_nearest(&pa, &pb) + mean_nearest(&pb, &pa)) * S::half())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeStats<S> {
    pub stroke_count: usize,
    pub point_count: usize,
    pub total_length: S,
    pub mean_points_per_stroke: S,
}

pub fn stroke_stats<S: Scalar>(ink: &DigitalInk<S>) -> StrokeStats<S> {
    let stroke_count = ink.strokes().len();
    let point_count = ink.total_points();
    let total_length = ink.strokes().iter().fold(S::zero(), |acc, s| acc + s.length());
    let mean_points_per_stroke = if stroke_count == 0 {
        S::zero()
    } else {
        S::of(point_count as f64 / stroke_count as f64)
    };
    StrokeStats {
        stroke_count,
        point_count,
        total_length,
        mean_points_per_stroke,
    }
}
