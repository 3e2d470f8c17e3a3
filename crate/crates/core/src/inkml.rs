//! Reader and writer for the trace/annotation subset of InkML.
//!
//! Layout produced by [`serialize_inkml`]:
//!
//! ```text
//! <?xml version="1.0" encoding="UTF-8"?>
//! <ink xmlns="http://www.w3.org/2003/InkML">
//!   <traceFormat>…X, Y, T channels…</traceFormat>
//!   <annotation type="key">document-level value</annotation>
//!   <traceGroup>
//!     <annotation type="key">per-ink value</annotation>
//!     <trace>x y t, x y t, …</trace>
//!   </traceGroup>
//! </ink>
//! ```
//!
//! Points are separated by commas, channels by whitespace. Traces without a
//! time channel get synthetic timestamps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::ink::{DigitalInk, InkError, Point, Stroke};
use crate::normalize::{hallucinate_time, DEFAULT_PERIOD_S};
use crate::scalar::Scalar;

pub const INKML_NS: &str = "http://www.w3.org/2003/InkML";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InkmlError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("unsupported InkML element <{element}> at line {line}, column {column}")]
    Unsupported {
        element: String,
        line: u32,
        column: u32,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("bad value in trace {trace}: {message}")]
    Value { trace: usize, message: String },
    #[error("cannot serialize non-finite coordinate in ink {ink}, stroke {stroke}")]
    NonFinite { ink: usize, stroke: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InkmlDocument<S> {
    pub inks: Vec<DigitalInk<S>>,
    /// Document-level annotations.
    pub annotations: BTreeMap<String, String>,
}

impl<S: Scalar> InkmlDocument<S> {
    pub fn single(ink: DigitalInk<S>) -> Self {
        Self {
            inks: vec![ink],
            annotations: BTreeMap::new(),
        }
    }
}

const REJECTED: [&str; 3] = ["brush", "canvas", "context"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Channel {
    X,
    Y,
    T,
    Other,
}

struct Layout {
    channels: Vec<Channel>,
}

impl Layout {
    fn index(&self, c: Channel) -> Option<usize> {
        self.channels.iter().position(|&x| x == c)
    }
}

pub fn parse_inkml<S: Scalar>(text: &str) -> Result<InkmlDocument<S>, InkmlError> {
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        InkmlError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    check_supported(&doc, root)?;

    let mut trace_counter = 0usize;
    match root.tag_name().name() {
        "trace" => {
            let ink = build_ink(&[root], BTreeMap::new(), None, &mut trace_counter)?;
            Ok(InkmlDocument::single(ink))
        }
        "ink" => {
            let layout = root
                .children()
                .find(|c| c.is_element() && c.tag_name().name() == "traceFormat")
                .map(parse_trace_format)
                .transpose()?;
            let annotations = collect_annotations(root);
            let direct: Vec<Node> = elements(root, "trace").collect();
            let groups: Vec<Node> = elements(root, "traceGroup").collect();
            if groups.is_empty() {
                // bare traces form a single ink owning the annotations
                let ink = build_ink(&direct, annotations, layout.as_ref(), &mut trace_counter)?;
                return Ok(InkmlDocument::single(ink));
            }
            if !direct.is_empty() {
                return Err(InkmlError::Schema(
                    "traces must either all be inside traceGroups or all at top level".into(),
                ));
            }
            let mut inks = Vec::with_capacity(groups.len());
            for g in groups {
                let traces: Vec<Node> = elements(g, "trace").collect();
                inks.push(build_ink(
                    &traces,
                    collect_annotations(g),
                    layout.as_ref(),
                    &mut trace_counter,
                )?);
            }
            Ok(InkmlDocument { inks, annotations })
        }
        other => Err(InkmlError::Schema(format!(
            "root element must be <ink> or <trace>, found <{other}>"
        ))),
    }
}

fn check_supported(doc: &Document, root: Node) -> Result<(), InkmlError> {
    for node in root.descendants().filter(Node::is_element) {
        let name = node.tag_name().name();
        if REJECTED.contains(&name) {
            let pos = doc.text_pos_at(node.range().start);
            return Err(InkmlError::Unsupported {
                element: name.to_string(),
                line: pos.row,
                column: pos.col,
            });
        }
    }
    Ok(())
}

fn elements<'a, 'i>(parent: Node<'a, 'i>, name: &'static str) -> impl Iterator<Item = Node<'a, 'i>> {
    parent
        .children()
        .filter(move |c| c.is_element() && c.tag_name().name() == name)
}

fn collect_annotations(parent: Node) -> BTreeMap<String, String> {
    elements(parent, "annotation")
        .map(|a| {
            (
                a.attribute("type").unwrap_or("").to_string(),
                a.text().unwrap_or("").to_string(),
            )
        })
        .collect()
}

fn parse_trace_format(node: Node) -> Result<Layout, InkmlError> {
    let channels: Vec<Channel> = elements(node, "channel")
        .map(|c| match c.attribute("name") {
            Some("X") => Channel::X,
            Some("Y") => Channel::Y,
            Some("T") => Channel::T,
            _ => Channel::Other,
        })
        .collect();
    let layout = Layout { channels };
    for (c, name) in [(Channel::X, "X"), (Channel::Y, "Y")] {
        if layout.index(c).is_none() {
            return Err(InkmlError::Schema(format!("traceFormat lacks the {name} channel")));
        }
    }
    Ok(layout)
}

fn build_ink<S: Scalar>(
    traces: &[Node],
    metadata: BTreeMap<String, String>,
    layout: Option<&Layout>,
    counter: &mut usize,
) -> Result<DigitalInk<S>, InkmlError> {
    let mut strokes = Vec::with_capacity(traces.len());
    let mut all_timed = true;
    for node in traces {
        let idx = *counter;
        *counter += 1;
        let (points, timed) = parse_trace::<S>(node.text().unwrap_or(""), layout, idx)?;
        all_timed &= timed;
        let stroke = Stroke::new(points).map_err(|e| InkmlError::Value {
            trace: idx,
            message: match e {
                InkError::EmptyStroke => "trace has no points".to_string(),
                other => other.to_string(),
            },
        })?;
        strokes.push(stroke);
    }
    let ink = DigitalInk::new(strokes).with_metadata(metadata);
    if all_timed || ink.is_empty() {
        Ok(ink)
    } else {
        Ok(hallucinate_time(&ink, S::of(DEFAULT_PERIOD_S)))
    }
}

/// Parses `x y [t], ...`; the flag tells whether a time channel was present.
fn parse_trace<S: Scalar>(
    text: &str,
    layout: Option<&Layout>,
    trace: usize,
) -> Result<(Vec<Point<S>>, bool), InkmlError> {
    let value_err = |message: String| InkmlError::Value { trace, message };
    let mut points = Vec::new();
    let mut width: Option<usize> = None;
    let mut timed = false;
    for (pi, sample) in text.split(',').enumerate() {
        let fields: Vec<&str> = sample.split_whitespace().collect();
        if fields.is_empty() {
            if text.trim().is_empty() {
                break;
            }
            return Err(value_err(format!("empty sample {pi}")));
        }
        let mut values = Vec::with_capacity(fields.len());
        for f in &fields {
            let v: f64 = f
                .parse()
                .map_err(|_| value_err(format!("non-numeric value {f:?} in sample {pi}")))?;
            if !v.is_finite() {
                return Err(value_err(format!("non-finite value {f:?} in sample {pi}")));
            }
            values.push(v);
        }
        let (x, y, t) = match layout {
            Some(l) => {
                if values.len() != l.channels.len() {
                    return Err(value_err(format!(
                        "sample {pi} has {} values, traceFormat declares {}",
                        values.len(),
                        l.channels.len()
                    )));
                }
                let at = |c| l.index(c).map(|i| values[i]);
                (at(Channel::X).unwrap(), at(Channel::Y).unwrap(), at(Channel::T))
            }
            None => match values.len() {
                2 => (values[0], values[1], None),
                3 => (values[0], values[1], Some(values[2])),
                k => return Err(value_err(format!("sample {pi} has {k} values, expected 2 or 3"))),
            },
        };
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(value_err(format!("sample {pi} has a different channel count")))
            }
            _ => {}
        }
        timed = t.is_some();
        points.push(Point::new(S::of(x), S::of(y), S::of(t.unwrap_or(0.0))));
    }
    Ok((points, timed))
}

/// Fixed-point decimal with at most six fractional digits, trailing zeros trimmed.
pub fn format_number(v: f64) -> Option<String> {
    if !v.is_finite() {
        return None;
    }
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    Some(s)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn write_annotations(out: &mut String, indent: &str, map: &BTreeMap<String, String>) {
    for (k, v) in map {
        let _ = writeln!(
            out,
            "{indent}<annotation type=\"{}\">{}</annotation>",
            escape(k),
            escape(v)
        );
    }
}

/// Deterministic serialization; every ink becomes one `<traceGroup>`.
pub fn serialize_inkml<S: Scalar>(doc: &InkmlDocument<S>) -> Result<String, InkmlError> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<ink xmlns=\"{INKML_NS}\">");
    out.push_str("  <traceFormat>\n");
    out.push_str("    <channel name=\"X\" type=\"decimal\"/>\n");
    out.push_str("    <channel name=\"Y\" type=\"decimal\"/>\n");
    out.push_str("    <channel name=\"T\" type=\"decimal\" units=\"s\"/>\n");
    out.push_str("  </traceFormat>\n");
    write_annotations(&mut out, "  ", &doc.annotations);
    for (ii, ink) in doc.inks.iter().enumerate() {
        out.push_str("  <traceGroup>\n");
        write_annotations(&mut out, "    ", ink.metadata());
        for (si, stroke) in ink.strokes().iter().enumerate() {
            out.push_str("    <trace>");
            for (pi, p) in stroke.points().iter().enumerate() {
                if pi > 0 {
                    out.push_str(", ");
                }
                let fields = [p.x, p.y, p.t]
                    .map(|v| format_number(v.as_f64()).ok_or(InkmlError::NonFinite { ink: ii, stroke: si }));
                let [x, y, t] = fields;
                let _ = write!(out, "{} {} {}", x?, y?, t?);
            }
            out.push_str("</trace>\n");
        }
        out.push_str("  </traceGroup>\n");
    }
    out.push_str("</ink>\n");
    Ok(out)
}
