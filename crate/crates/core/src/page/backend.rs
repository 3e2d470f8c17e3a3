use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::geo::derender_word_in;
use crate::kv::KvWriter;
use crate::tokens::{
    build_prompt, decode_ink, split_text_prefix, DecodeOptions, Task, TaskPrompt, TokenSeq, Vocabulary,
};
use crate::{BBox, Ink, RasterImage};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct BackendError(pub String);

/// One word handed to a backend.
#[derive(Debug, Clone, Copy)]
pub struct DerenderRequest<'a> {
    /// `m x m` fitted word image.
    pub image: &'a RasterImage,
    pub label: Option<&'a str>,
    /// Where the word pixels sit inside `image`; the rest is padding.
    pub content: BBox,
    pub m: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BackendOutput {
    /// Canvas coordinates, nominally inside `[0, m]^2`.
    pub ink: Ink,
    pub diagnostics: Vec<String>,
}

impl BackendOutput {
    pub fn ink(ink: Ink) -> Self {
        Self {
            ink,
            diagnostics: Vec::new(),
        }
    }
}

pub trait DerenderBackend: Sync {
    fn accepts_text_prompt(&self) -> bool;
    fn derender(&self, req: &DerenderRequest<'_>) -> Result<BackendOutput, BackendError>;
}

/// The geometric baseline; ignores labels.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeoBackend;

impl DerenderBackend for GeoBackend {
    fn accepts_text_prompt(&self) -> bool {
        false
    }

    fn derender(&self, req: &DerenderRequest<'_>) -> Result<BackendOutput, BackendError> {
        Ok(BackendOutput::ink(derender_word_in(req.image, &req.content)))
    }
}

/// Returns the same canvas-space ink for every word.
#[derive(Debug, Clone)]
pub struct FixedBackend(pub Ink);

impl DerenderBackend for FixedBackend {
    fn accepts_text_prompt(&self) -> bool {
        false
    }

    fn derender(&self, _req: &DerenderRequest<'_>) -> Result<BackendOutput, BackendError> {
        Ok(BackendOutput::ink(self.0.clone()))
    }
}

/// Runs an external command once per word.
///
/// The work directory gets `input.png` and `request.rec`; the command is run
/// through `sh -c` with the directory path appended as its last argument and
/// must leave the token text in `output.tokens`.
#[derive(Debug, Clone)]
pub struct SubprocessBackend {
    pub command: String,
    vocab: Vocabulary,
    scratch: PathBuf,
    keep_workdirs: bool,
}

static WORKDIR_COUNTER: AtomicU64 = AtomicU64::new(0);

impl SubprocessBackend {
    pub fn new(command: impl Into<String>, n: u32) -> Result<Self, BackendError> {
        let vocab = Vocabulary::with_default_text(n).map_err(|e| BackendError(e.to_string()))?;
        Ok(Self {
            command: command.into(),
            vocab,
            scratch: std::env::temp_dir(),
            keep_workdirs: false,
        })
    }

    /// Parent directory for per-word work directories.
    pub fn with_scratch(mut self, dir: impl Into<PathBuf>, keep: bool) -> Self {
        self.scratch = dir.into();
        self.keep_workdirs = keep;
        self
    }

    fn workdir(&self) -> Result<PathBuf, BackendError> {
        let k = WORKDIR_COUNTER.fetch_add(1, Ordering::Relaxed);
        let dir = self.scratch.join(format!("inkforge-word-{}-{k}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(|e| BackendError(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn run_in(&self, dir: &Path, req: &DerenderRequest<'_>) -> Result<BackendOutput, BackendError> {
        let io = |e: &dyn std::fmt::Display| BackendError(e.to_string());
        req.image.write_png(dir.join("input.png")).map_err(|e| io(&e))?;
        let prompt = match req.label {
            Some(l) => TaskPrompt::new(Task::DerenderWithText, Some(l.to_string())),
            None => TaskPrompt::plain(Task::VanillaDerender),
        }
        .map_err(|e| io(&e))?;
        let mut rec = KvWriter::new();
        rec.put("task", prompt.task().name())
            .put("prompt", build_prompt(&prompt))
            .put("image_size", req.m.to_string())
            .put("canvas_size", self.vocab.n().to_string());
        std::fs::write(dir.join("request.rec"), rec.finish()).map_err(|e| io(&e))?;

        let status = Command::new("sh")
            .arg("-c")
            .arg(format!("{} \"$0\"", self.command))
            .arg(dir)
            .status()
            .map_err(|e| BackendError(format!("cannot start {:?}: {e}", self.command)))?;
        if !status.success() {
            return Err(BackendError(format!("{:?} exited with {status}", self.command)));
        }
        let text = std::fs::read_to_string(dir.join("output.tokens"))
            .map_err(|e| BackendError(format!("output.tokens: {e}")))?;
        let seq = TokenSeq::from_text(&text).map_err(|e| BackendError(format!("output.tokens: {e}")))?;
        let (_, ink_part) = split_text_prefix(&seq);
        let decoded = decode_ink::<f64>(&ink_part, &self.vocab, &DecodeOptions::default())
            .map_err(|e| io(&e))?;
        let scale = req.m as f64 / self.vocab.n() as f64;
        Ok(BackendOutput {
            ink: decoded.ink.map_xy(|x, y| (x * scale, y * scale)),
            diagnostics: decoded
                .diagnostics
                .iter()
                .map(|d| format!("token {}: {}", d.index, d.issue))
                .collect(),
        })
    }
}

impl DerenderBackend for SubprocessBackend {
    fn accepts_text_prompt(&self) -> bool {
        true
    }

    fn derender(&self, req: &DerenderRequest<'_>) -> Result<BackendOutput, BackendError> {
        let dir = self.workdir()?;
        let out = self.run_in(&dir, req);
        if !self.keep_workdirs {
            let _ = std::fs::remove_dir_all(&dir);
        }
        out
    }
}
