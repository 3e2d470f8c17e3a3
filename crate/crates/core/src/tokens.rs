//! Ink tokenization and task prompt/target assembly.
//!
//! An ink becomes, per stroke, a begin-of-stroke token followed by one `X`
//! and one `Y` token per point, each holding the coordinate rounded to an
//! integer in `[0, n]`. With separate `x` and `y` tables plus the stroke
//! marker the ink part of the vocabulary holds `2n + 3` tokens. Text tokens
//! (single characters) follow the ink tokens in id space.
//!
//! Token text format (fixtures, backend protocol): tokens separated by
//! whitespace, `b` for begin-of-stroke, `x17` / `y204` for coordinates and
//! `U+0061` for the character `a`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ink::{DigitalInk, Point, Stroke};
use crate::normalize::{hallucinate_time, DEFAULT_CANVAS, DEFAULT_PERIOD_S};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TokenError {
    #[error("ink not normalized: coordinate {value} at stroke {stroke}, point {point} is outside [-0.5, {limit}]")]
    NotNormalized {
        stroke: usize,
        point: usize,
        value: f64,
        limit: f64,
    },
    #[error("malformed token sequence at token {index}: {reason}")]
    Malformed { index: usize, reason: DecodeIssue },
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("character {0:?} is not in the vocabulary")]
    UnknownChar(char),
    #[error("coordinate value {value} exceeds vocabulary range [0, {n}]")]
    CoordinateOutOfRange { value: u32, n: u32 },
    #[error("cannot parse token {0:?}")]
    BadTokenText(String),
    #[error("vocabulary coordinate range must be at least 1")]
    BadVocabulary,
    #[error("task {task} {problem}")]
    TaskMismatch { task: Task, problem: &'static str },
}

/// One element of a token stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    BeginStroke,
    X(u32),
    Y(u32),
    Text(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::BeginStroke => f.write_str("b"),
            Token::X(v) => write!(f, "x{v}"),
            Token::Y(v) => write!(f, "y{v}"),
            Token::Text(c) => write!(f, "U+{:04X}", *c as u32),
        }
    }
}

impl FromStr for Token {
    type Err = TokenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TokenError::BadTokenText(s.to_string());
        let digits = |d: &str| -> Result<u32, TokenError> {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            d.parse().map_err(|_| bad())
        };
        if s == "b" {
            Ok(Token::BeginStroke)
        } else if let Some(rest) = s.strip_prefix('x') {
            Ok(Token::X(digits(rest)?))
        } else if let Some(rest) = s.strip_prefix('y') {
            Ok(Token::Y(digits(rest)?))
        } else if let Some(hex) = s.strip_prefix("U+") {
            if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(bad());
            }
            let code = u32::from_str_radix(hex, 16).map_err(|_| bad())?;
            char::from_u32(code).map(Token::Text).ok_or_else(bad)
        } else {
            Err(bad())
        }
    }
}

/// Ordered token stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq(pub Vec<Token>);

impl TokenSeq {
    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_text(text: &str) -> Result<Self, TokenError> {
        text.split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(TokenSeq)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.to_string());
        }
        out
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Default character inventory: printable ASCII and the Latin-1 supplement.
pub fn default_text_symbols() -> Vec<char> {
    (0x20u32..=0x7E)
        .chain(0xA0..=0xFF)
        .filter_map(char::from_u32)
        .collect()
}

/// Token id layout: `0` is begin-of-stroke, `1..=n+1` are `x = 0..=n`,
/// `n+2..=2n+2` are `y = 0..=n`, text symbols start at `2n + 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    n: u32,
    text_symbols: Vec<char>,
}

impl Vocabulary {
    pub fn new(n: u32, text_symbols: Vec<char>) -> Result<Self, TokenError> {
        if n == 0 {
            return Err(TokenError::BadVocabulary);
        }
        let mut seen = std::collections::BTreeSet::new();
        let text_symbols = text_symbols.into_iter().filter(|c| seen.insert(*c)).collect();
        Ok(Self { n, text_symbols })
    }

    pub fn with_default_text(n: u32) -> Result<Self, TokenError> {
        Self::new(n, default_text_symbols())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn text_symbols(&self) -> &[char] {
        &self.text_symbols
    }

    pub fn ink_token_count(&self) -> u32 {
        2 * (self.n + 1) + 1
    }

    pub fn len(&self) -> usize {
        self.ink_token_count() as usize + self.text_symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id_of(&self, token: Token) -> Result<u32, TokenError> {
        let n = self.n;
        match token {
            Token::BeginStroke => Ok(0),
            Token::X(v) if v <= n => Ok(1 + v),
            Token::Y(v) if v <= n => Ok(n + 2 + v),
            Token::X(v) | Token::Y(v) => Err(TokenError::CoordinateOutOfRange { value: v, n }),
            Token::Text(c) => self
                .text_symbols
                .iter()
                .position(|&s| s == c)
                .map(|i| self.ink_token_count() + i as u32)
                .ok_or(TokenError::UnknownChar(c)),
        }
    }

    pub fn token_of(&self, id: u32) -> Result<Token, TokenError> {
        let n = self.n;
        match id {
            0 => Ok(Token::BeginStroke),
            i if i <= n + 1 => Ok(Token::X(i - 1)),
            i if i <= 2 * n + 2 => Ok(Token::Y(i - n - 2)),
            i => self
                .text_symbols
                .get((i - self.ink_token_count()) as usize)
                .map(|&c| Token::Text(c))
                .ok_or(TokenError::UnknownId(id)),
        }
    }

    pub fn to_ids(&self, seq: &TokenSeq) -> Result<Vec<u32>, TokenError> {
        seq.0.iter().map(|&t| self.id_of(t)).collect()
    }

    pub fn from_ids(&self, ids: &[u32]) -> Result<TokenSeq, TokenError> {
        ids.iter().map(|&i| self.token_of(i)).collect::<Result<_, _>>().map(TokenSeq)
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self {
            n: DEFAULT_CANVAS,
            text_symbols: default_text_symbols(),
        }
    }
}

/// Rounds half up and clamps to `[0, n]`.
fn quantize<S: Scalar>(v: S, n: u32) -> u32 {
    let r = (v + S::half()).floor().as_f64();
    r.clamp(0.0, n as f64) as u32
}

/// Encodes a canvas-fitted ink. Timestamps are dropped.
pub fn encode_ink<S: Scalar>(ink: &DigitalInk<S>, vocab: &Vocabulary) -> Result<TokenSeq, TokenError> {
    let n = vocab.n();
    let lo = S::of(-0.5);
    let hi = S::of(n as f64 + 0.5);
    let mut out = Vec::with_capacity(ink.strokes().len() + 2 * ink.total_points());
    for (si, stroke) in ink.strokes().iter().enumerate() {
        out.push(Token::BeginStroke);
        for (pi, p) in stroke.points().iter().enumerate() {
            for v in [p.x, p.y] {
                if !(v >= lo && v <= hi) {
                    return Err(TokenError::NotNormalized {
                        stroke: si,
                        point: pi,
                        value: v.as_f64(),
                        limit: n as f64 + 0.5,
                    });
                }
            }
            out.push(Token::X(quantize(p.x, n)));
            out.push(Token::Y(quantize(p.y, n)));
        }
    }
    Ok(TokenSeq(out))
}

/// Why a token could not be consumed by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeIssue {
    PointBeforeStroke,
    DanglingX,
    YWithoutX,
    EmptyStroke,
    TextInInk,
    OutOfRange,
}

impl fmt::Display for DecodeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeIssue::PointBeforeStroke => "coordinate before any begin-of-stroke",
            DecodeIssue::DanglingX => "x coordinate without a following y",
            DecodeIssue::YWithoutX => "y coordinate without a preceding x",
            DecodeIssue::EmptyStroke => "stroke without points",
            DecodeIssue::TextInInk => "text token inside ink",
            DecodeIssue::OutOfRange => "coordinate outside the vocabulary range",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostic {
    pub index: usize,
    pub issue: DecodeIssue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    /// Skip malformed fragments and report them.
    #[default]
    Tolerant,
    /// Fail on the first grammar violation.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded<S> {
    pub ink: DigitalInk<S>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    pub mode: DecodeMode,
    /// Period used to hallucinate timestamps, seconds.
    pub period: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            mode: DecodeMode::Tolerant,
            period: DEFAULT_PERIOD_S,
        }
    }
}

/// Parses `( b (X Y)+ )*` back into an ink with integer coordinates.
///
/// In tolerant mode every violation is skipped and recorded once; in strict
/// mode the first one is returned as an error.
pub fn decode_ink<S: Scalar>(
    seq: &TokenSeq,
    vocab: &Vocabulary,
    opts: &DecodeOptions,
) -> Result<Decoded<S>, TokenError> {
    let n = vocab.n();
    let mut st = DecodeState::<S> {
        mode: opts.mode,
        diagnostics: Vec::new(),
        strokes: Vec::new(),
        current: None,
        pending_x: None,
    };
    for (i, &tok) in seq.0.iter().enumerate() {
        match tok {
            Token::BeginStroke => {
                st.close()?;
                st.current = Some((i, Vec::new()));
            }
            Token::X(v) => {
                if st.current.is_none() {
                    st.report(i, DecodeIssue::PointBeforeStroke)?;
                } else if v > n {
                    st.report(i, DecodeIssue::OutOfRange)?;
                } else {
                    if let Some((xi, _)) = st.pending_x {
                        st.report(xi, DecodeIssue::DanglingX)?;
                    }
                    st.pending_x = Some((i, v));
                }
            }
            Token::Y(v) => {
                if st.current.is_none() {
                    st.report(i, DecodeIssue::PointBeforeStroke)?;
                } else if v > n {
                    st.pending_x = None;
                    st.report(i, DecodeIssue::OutOfRange)?;
                } else if let Some((_, x)) = st.pending_x.take() {
                    if let Some((_, pts)) = st.current.as_mut() {
                        pts.push(Point::xy(S::of(x as f64), S::of(v as f64)));
                    }
                } else {
                    st.report(i, DecodeIssue::YWithoutX)?;
                }
            }
            Token::Text(_) => st.report(i, DecodeIssue::TextInInk)?,
        }
    }
    st.close()?;

    let ink = hallucinate_time(&DigitalInk::new(st.strokes), S::of(opts.period));
    Ok(Decoded {
        ink,
        diagnostics: st.diagnostics,
    })
}

struct DecodeState<S> {
    mode: DecodeMode,
    diagnostics: Vec<Diagnostic>,
    strokes: Vec<Stroke<S>>,
    /// Index of the opening `b` and the points so far; `None` before the first `b`.
    current: Option<(usize, Vec<Point<S>>)>,
    pending_x: Option<(usize, u32)>,
}

impl<S: Scalar> DecodeState<S> {
    fn report(&mut self, index: usize, issue: DecodeIssue) -> Result<(), TokenError> {
        match self.mode {
            DecodeMode::Strict => Err(TokenError::Malformed { index, reason: issue }),
            DecodeMode::Tolerant => {
                self.diagnostics.push(Diagnostic { index, issue });
                Ok(())
            }
        }
    }

    /// Closes the open stroke, reporting at most one issue for it.
    fn close(&mut self) -> Result<(), TokenError> {
        let dangling = self.pending_x.take();
        let Some((bi, pts)) = self.current.take() else {
            return Ok(());
        };
        if let Some((xi, _)) = dangling {
            self.report(xi, DecodeIssue::DanglingX)?;
        } else if pts.is_empty() {
            self.report(bi, DecodeIssue::EmptyStroke)?;
        }
        if !pts.is_empty() {
            self.strokes.push(Stroke::from_points_unchecked(pts));
        }
        Ok(())
    }
}

/// Splits a hybrid target into its leading text and the ink part.
pub fn split_text_prefix(seq: &TokenSeq) -> (String, TokenSeq) {
    let cut = seq
        .0
        .iter()
        .position(|t| !matches!(t, Token::Text(_)))
        .unwrap_or(seq.len());
    let text = seq.0[..cut]
        .iter()
        .filter_map(|t| match t {
            Token::Text(c) => Some(*c),
            _ => None,
        })
        .collect();
    (text, TokenSeq(seq.0[cut..].to_vec()))
}

/// The five training/inference tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    VanillaDerender,
    DerenderWithText,
    RecognizeSyn,
    RecognizeReal,
    RecognizeAndDerender,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::VanillaDerender,
        Task::DerenderWithText,
        Task::RecognizeSyn,
        Task::RecognizeReal,
        Task::RecognizeAndDerender,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::VanillaDerender => "VanillaDerender",
            Task::DerenderWithText => "DerenderWithText",
            Task::RecognizeSyn => "RecognizeSyn",
            Task::RecognizeReal => "RecognizeReal",
            Task::RecognizeAndDerender => "RecognizeAndDerender",
        }
    }

    pub fn outputs_ink(self) -> bool {
        matches!(
            self,
            Task::VanillaDerender | Task::DerenderWithText | Task::RecognizeAndDerender
        )
    }

    pub fn outputs_text(self) -> bool {
        matches!(
            self,
            Task::RecognizeSyn | Task::RecognizeReal | Task::RecognizeAndDerender
        )
    }

    /// Whether the input image is rendered from ink (as opposed to a real photo).
    pub fn is_synthetic(self) -> bool {
        self != Task::RecognizeReal
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

/// Canonical prompt strings. Stable across versions; golden tests depend on them.
pub const PROMPT_VANILLA: &str = "Derender the ink.";
pub const PROMPT_WITH_TEXT_PREFIX: &str = "Derender the ink: ";
pub const PROMPT_RECOGNIZE: &str = "Recognize the text.";
pub const PROMPT_RECOGNIZE_AND_DERENDER: &str = "Recognize and derender.";

/// A task plus its optional text payload (present only for `DerenderWithText`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskPrompt {
    task: Task,
    text_payload: Option<String>,
}

impl TaskPrompt {
    pub fn new(task: Task, text_payload: Option<String>) -> Result<Self, TokenError> {
        match (task, &text_payload) {
            (Task::DerenderWithText, Some(p)) if !p.is_empty() => {}
            (Task::DerenderWithText, _) => {
                return Err(TokenError::TaskMismatch {
                    task,
                    problem: "requires a non-empty text payload",
                })
            }
            (_, Some(_)) => {
                return Err(TokenError::TaskMismatch {
                    task,
                    problem: "takes no text payload",
                })
            }
            _ => {}
        }
        Ok(Self { task, text_payload })
    }

    pub fn plain(task: Task) -> Result<Self, TokenError> {
        Self::new(task, None)
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn text_payload(&self) -> Option<&str> {
        self.text_payload.as_deref()
    }
}

pub fn build_prompt(p: &TaskPrompt) -> String {
    match p.task {
        Task::VanillaDerender => PROMPT_VANILLA.to_string(),
        Task::DerenderWithText => {
            format!("{PROMPT_WITH_TEXT_PREFIX}{}", p.text_payload.as_deref().unwrap_or(""))
        }
        Task::RecognizeSyn | Task::RecognizeReal => PROMPT_RECOGNIZE.to_string(),
        Task::RecognizeAndDerender => PROMPT_RECOGNIZE_AND_DERENDER.to_string(),
    }
}

/// Assembles the expected output: ink tokens, text tokens, or text then ink.
pub fn build_target(task: Task, ink: Option<&TokenSeq>, text: Option<&str>) -> Result<TokenSeq, TokenError> {
    let ink = ink.filter(|s| !s.is_empty());
    let text = text.filter(|s| !s.is_empty());
    let mismatch = |problem| TokenError::TaskMismatch { task, problem };
    if task.outputs_ink() != ink.is_some() {
        return Err(mismatch(if ink.is_some() {
            "does not produce ink"
        } else {
            "requires ink tokens"
        }));
    }
    if task.outputs_text() != text.is_some() {
        return Err(mismatch(if text.is_some() {
            "does not produce text"
        } else {
            "requires a text label"
        }));
    }
    if let Some(seq) = ink {
        if seq.0.iter().any(|t| matches!(t, Token::Text(_))) {
            return Err(mismatch("got text tokens in the ink part"));
        }
    }
    let mut out: Vec<Token> = text.map(|s| s.chars().map(Token::Text).collect()).unwrap_or_default();
    if let Some(seq) = ink {
        out.extend_from_slice(&seq.0);
    }
    Ok(TokenSeq(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Token::*;

    fn ink(strokes: &[&[(f64, f64)]]) -> DigitalInk<f64> {
        DigitalInk::new(strokes.iter().map(|s| Stroke::from_xy(s).unwrap()).collect())
    }

    fn decode(seq: Vec<Token>) -> Decoded<f64> {
        decode_ink(&TokenSeq(seq), &Vocabulary::default(), &DecodeOptions::default()).unwrap()
    }

    #[test]
    fn encode_examples() {
        let v = Vocabulary::default();
        assert_eq!(encode_ink(&ink(&[&[(0.0, 0.0)]]), &v).unwrap().0, vec![BeginStroke, X(0), Y(0)]);
        assert_eq!(encode_ink(&ink(&[&[(1.4, 2.6)]]), &v).unwrap().0, vec![BeginStroke, X(1), Y(3)]);
        let two = ink(&[&[(0.0, 0.0), (1.0, 1.0)], &[(2.0, 2.0), (3.0, 3.0)]]);
        assert_eq!(encode_ink(&two, &v).unwrap().len(), 10);
        assert_eq!(v.ink_token_count(), 451);
    }

    #[test]
    fn encode_rounds_half_up_and_clamps() {
        let v = Vocabulary::with_default_text(10).unwrap();
        let seq = encode_ink(&ink(&[&[(0.5, -0.5), (10.5, 2.5)]]), &v).unwrap();
        assert_eq!(seq.0, vec![BeginStroke, X(1), Y(0), X(10), Y(3)]);
        let err = encode_ink(&ink(&[&[(10.6, 0.0)]]), &v).unwrap_err();
        assert!(err.to_string().starts_with("ink not normalized"));
    }

    #[test]
    fn decode_examples() {
        let d = decode(vec![BeginStroke, X(3), Y(4)]);
        assert_eq!(d.ink.strokes().len(), 1);
        let p = d.ink.strokes()[0].first();
        assert_eq!((p.x, p.y, p.t), (3.0, 4.0, 0.0));
        assert!(d.diagnostics.is_empty());

        let d = decode(vec![BeginStroke, X(3)]);
        assert!(d.ink.is_empty());
        assert_eq!(d.diagnostics, vec![Diagnostic { index: 1, issue: DecodeIssue::DanglingX }]);
    }

    #[test]
    fn decode_tolerates_garbage() {
        let d = decode(vec![X(1), Y(2), BeginStroke, BeginStroke, Y(5), X(1), Text('a'), Y(2)]);
        assert_eq!(d.ink.strokes().len(), 1);
        let issues: Vec<DecodeIssue> = d.diagnostics.iter().map(|d| d.issue).collect();
        assert_eq!(
            issues,
            vec![
                DecodeIssue::PointBeforeStroke,
                DecodeIssue::PointBeforeStroke,
                DecodeIssue::EmptyStroke,
                DecodeIssue::YWithoutX,
                DecodeIssue::TextInInk,
            ]
        );
    }

    #[test]
    fn strict_decode_reports_first_violation() {
        let v = Vocabulary::default();
        let opts = DecodeOptions { mode: DecodeMode::Strict, ..Default::default() };
        let err = decode_ink::<f64>(&TokenSeq(vec![BeginStroke, X(1), Y(1), Text('q')]), &v, &opts).unwrap_err();
        assert_eq!(err, TokenError::Malformed { index: 3, reason: DecodeIssue::TextInInk });
        let err = decode_ink::<f64>(&TokenSeq(vec![BeginStroke, X(3)]), &v, &opts).unwrap_err();
        assert_eq!(err, TokenError::Malformed { index: 1, reason: DecodeIssue::DanglingX });
    }

    #[test]
    fn vocabulary_ids_are_disjoint_and_invertible() {
        let v = Vocabulary::with_default_text(4).unwrap();
        assert_eq!(v.ink_token_count(), 11);
        for id in 0..v.len() as u32 {
            let t = v.token_of(id).unwrap();
            assert_eq!(v.id_of(t).unwrap(), id);
            assert_eq!(matches!(t, Text(_)), id >= 11);
        }
        assert!(v.token_of(v.len() as u32).is_err());
        assert!(v.id_of(X(5)).is_err());
    }

    #[test]
    fn token_text_round_trip() {
        let seq = TokenSeq(vec![Text('h'), Text(' '), BeginStroke, X(17), Y(204)]);
        assert_eq!(seq.to_text(), "U+0068 U+0020 b x17 y204");
        assert_eq!(TokenSeq::from_text(&seq.to_text()).unwrap(), seq);
        assert!(TokenSeq::from_text("b x y1").is_err());
        assert!(TokenSeq::from_text("b x-1").is_err());
    }

    #[test]
    fn prompts() {
        let p = |t, s: Option<&str>| build_prompt(&TaskPrompt::new(t, s.map(String::from)).unwrap());
        assert_eq!(p(Task::VanillaDerender, None), "Derender the ink.");
        assert_eq!(p(Task::DerenderWithText, Some("hello")), "Derender the ink: hello");
        assert_eq!(p(Task::RecognizeAndDerender, None), "Recognize and derender.");
        assert_eq!(p(Task::RecognizeSyn, None), "Recognize the text.");
        assert!(TaskPrompt::new(Task::VanillaDerender, Some("x".into())).is_err());
        assert!(TaskPrompt::new(Task::DerenderWithText, None).is_err());
    }

    #[test]
    fn targets() {
        let ink = TokenSeq(vec![BeginStroke, X(1), Y(1)]);
        assert_eq!(build_target(Task::VanillaDerender, Some(&ink), None).unwrap(), ink);
        assert_eq!(
            build_target(Task::RecognizeSyn, None, Some("ab")).unwrap().0,
            vec![Text('a'), Text('b')]
        );
        let hybrid = build_target(Task::RecognizeAndDerender, Some(&ink), Some("a")).unwrap();
        assert_eq!(hybrid.0, vec![Text('a'), BeginStroke, X(1), Y(1)]);
        assert_eq!(split_text_prefix(&hybrid), ("a".to_string(), ink.clone()));

        assert!(build_target(Task::VanillaDerender, Some(&ink), Some("a")).is_err());
        assert!(build_target(Task::RecognizeReal, Some(&ink), Some("a")).is_err());
        assert!(build_target(Task::RecognizeAndDerender, None, Some("a")).is_err());
        assert!(build_target(Task::DerenderWithText, None, None).is_err());
    }
}
