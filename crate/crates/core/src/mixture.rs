//! The five-task training-example stream.
//!
//! Each draw picks a task by weight, a source uniformly from the pool that
//! task can use, and a per-example seed; drawing is cheap and sequential,
//! rendering can then fan out across workers without changing the output.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::inkml::{parse_inkml, InkmlError};
use crate::kv::KvWriter;
use crate::normalize::{normalize, NormalizeError, NormalizeSpec};
use crate::raster::{
    fit_image, prepare_for_render, render, sample_augmentation_with, AugmentationProbabilities, RasterError,
    DEFAULT_IMAGE_SIZE,
};
use crate::tokens::{
    build_prompt, build_target, decode_ink, encode_ink, split_text_prefix, DecodeMode, DecodeOptions, Task,
    TaskPrompt, TokenError, TokenSeq, Vocabulary,
};
use crate::{Ink, RasterImage};

/// Ink annotation holding the transcription.
pub const LABEL_KEY: &str = "label";

#[derive(Debug, thiserror::Error)]
pub enum MixtureError {
    #[error("task {task} needs a text label but source {source_id:?} has none")]
    MissingLabel { task: Task, source_id: String },
    #[error("source {0:?} has no strokes to render")]
    EmptyInk(String),
    #[error("task {task} cannot use source {source_id:?}")]
    WrongSource { task: Task, source_id: String },
    #[error("mixture weights: {0}")]
    Weights(String),
    #[error("task {0} has non-zero weight but no usable sources")]
    EmptyPool(Task),
    #[error("example violates its invariants: {0}")]
    Invalid(String),
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{path}: {message}")]
    Load { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InkSample {
    pub id: String,
    pub ink: Ink,
    pub label: Option<String>,
}

/// A real photo or scan of a word with its transcription.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    pub id: String,
    pub image: RasterImage,
    pub label: String,
}

#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Ink(&'a InkSample),
    Image(&'a ImageSample),
}

impl Source<'_> {
    pub fn id(&self) -> &str {
        match self {
            Source::Ink(s) => &s.id,
            Source::Image(s) => &s.id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub source_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub image: RasterImage,
    pub prompt: String,
    pub target: TokenSeq,
    pub task: Task,
    pub provenance: Provenance,
}

/// Rendering and tokenization settings shared by all examples.
#[derive(Debug, Clone)]
pub struct ExampleConfig {
    pub vocab: Vocabulary,
    /// Side of the input image.
    pub m: u32,
    pub normalize: NormalizeSpec,
    pub probabilities: AugmentationProbabilities,
}

impl Default for ExampleConfig {
    fn default() -> Self {
        Self {
            vocab: Vocabulary::default(),
            m: DEFAULT_IMAGE_SIZE,
            normalize: NormalizeSpec::default(),
            probabilities: AugmentationProbabilities::default(),
        }
    }
}

impl ExampleConfig {
    /// Ink canvas size `N` of the vocabulary.
    pub fn n(&self) -> u32 {
        self.vocab.n()
    }
}

impl TrainingExample {
    /// Image size, representability in the vocabulary, and the task's target
    /// shape: ink tokens only, text only, or non-empty text followed by ink.
    pub fn validate(&self, cfg: &ExampleConfig) -> Result<(), MixtureError> {
        let bad = |m: String| Err(MixtureError::Invalid(m));
        if self.image.width() != cfg.m || self.image.height() != cfg.m {
            return bad(format!("image is {}x{}, expected {}x{}", self.image.width(), self.image.height(), cfg.m, cfg.m));
        }
        cfg.vocab.to_ids(&self.target)?;
        let (text, ink) = split_text_prefix(&self.target);
        if self.task.outputs_text() && text.is_empty() {
            return bad(format!("{} target has no text", self.task));
        }
        if !self.task.outputs_text() && !text.is_empty() {
            return bad(format!("{} target starts with text", self.task));
        }
        if self.task.outputs_ink() {
            if ink.is_empty() {
                return bad(format!("{} target has no ink", self.task));
            }
            let strict = DecodeOptions {
                mode: DecodeMode::Strict,
                ..DecodeOptions::default()
            };
            decode_ink::<f64>(&ink, &cfg.vocab, &strict)?;
        } else if !ink.is_empty() {
            return bad(format!("{} target has ink tokens", self.task));
        }
        Ok(())
    }
}

fn need_label(task: Task, id: &str, label: Option<&str>) -> Result<String, MixtureError> {
    match label {
        Some(l) if !l.is_empty() => Ok(l.to_string()),
        _ => Err(MixtureError::MissingLabel {
            task,
            source_id: id.to_string(),
        }),
    }
}

/// Builds one example. Synthetic tasks normalize the ink, rotate and fit it
/// to the `N` canvas for the target and to `M` for rendering with a sampled
/// augmentation; real recognition only fits the image.
pub fn make_example(
    source: Source<'_>,
    task: Task,
    seed: u64,
    cfg: &ExampleConfig,
) -> Result<TrainingExample, MixtureError> {
    let provenance = Provenance {
        source_id: source.id().to_string(),
        seed,
    };
    let example = match (task, source) {
        (Task::RecognizeReal, Source::Image(s)) => {
            let label = need_label(task, &s.id, Some(&s.label))?;
            let (image, _) = fit_image(&s.image, cfg.m)?;
            TrainingExample {
                image,
                prompt: build_prompt(&TaskPrompt::plain(task)?),
                target: build_target(task, None, Some(&label))?,
                task,
                provenance,
            }
        }
        (Task::RecognizeReal, _) | (_, Source::Image(_)) => {
            return Err(MixtureError::WrongSource {
                task,
                source_id: provenance.source_id,
            })
        }
        (_, Source::Ink(s)) => {
            if s.ink.is_empty() {
                return Err(MixtureError::EmptyInk(s.id.clone()));
            }
            let label = match task {
                Task::VanillaDerender => None,
                _ => Some(need_label(task, &s.id, s.label.as_deref())?),
            };
            let (norm, _) = normalize(&s.ink, &cfg.normalize)?;
            let aug = sample_augmentation_with(seed, &cfg.probabilities);
            let target_ink = prepare_for_render(&norm, &aug, cfg.n())?;
            let image = render(&prepare_for_render(&norm, &aug, cfg.m)?, cfg.m, &aug)?;
            let ink_tokens = encode_ink(&target_ink, &cfg.vocab)?;
            let prompt = match task {
                Task::DerenderWithText => TaskPrompt::new(task, label.clone())?,
                _ => TaskPrompt::plain(task)?,
            };
            let ink_part = task.outputs_ink().then_some(&ink_tokens);
            let text_part = if task.outputs_text() { label.as_deref() } else { None };
            TrainingExample {
                image,
                prompt: build_prompt(&prompt),
                target: build_target(task, ink_part, text_part)?,
                task,
                provenance,
            }
        }
    };
    example.validate(cfg)?;
    Ok(example)
}

/// Task weights (in [`Task::ALL`] order) and the stream seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub weights: [f64; 5],
    pub rng_seed: u64,
}

impl MixtureSpec {
    /// Equal weights.
    pub fn uniform(rng_seed: u64) -> Self {
        Self {
            weights: [0.2; 5],
            rng_seed,
        }
    }

    pub fn only(task: Task, rng_seed: u64) -> Self {
        let mut weights = [0.0; 5];
        weights[task_index(task)] = 1.0;
        Self { weights, rng_seed }
    }

    pub fn weight(&self, task: Task) -> f64 {
        self.weights[task_index(task)]
    }

    pub fn validate(&self) -> Result<(), MixtureError> {
        if let Some(w) = self.weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(MixtureError::Weights(format!("weight {w} is not a non-negative number")));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MixtureError::Weights(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

fn task_index(task: Task) -> usize {
    Task::ALL.iter().position(|&t| t == task).expect("listed")
}

#[derive(Debug, Clone, Default)]
pub struct SourcePool {
    pub inks: Vec<InkSample>,
    pub images: Vec<ImageSample>,
}

/// One planned example: which task, which source, which seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Draw {
    pub index: u64,
    pub task: Task,
    /// Index into the pool's `inks` or `images`, depending on the task.
    pub source: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct Mixture<'a> {
    spec: MixtureSpec,
    pool: &'a SourcePool,
    /// Usable source indices per task.
    candidates: [Vec<usize>; 5],
    cfg: ExampleConfig,
}

impl<'a> Mixture<'a> {
    pub fn new(spec: MixtureSpec, pool: &'a SourcePool, cfg: ExampleConfig) -> Result<Self, MixtureError> {
        spec.validate()?;
        let labeled: Vec<usize> = (0..pool.inks.len())
            .filter(|&i| pool.inks[i].label.as_deref().is_some_and(|l| !l.is_empty()) && !pool.inks[i].ink.is_empty())
            .collect();
        let candidates = Task::ALL.map(|t| match t {
            Task::VanillaDerender => (0..pool.inks.len()).filter(|&i| !pool.inks[i].ink.is_empty()).collect(),
            Task::RecognizeReal => (0..pool.images.len()).collect(),
            _ => labeled.clone(),
        });
        for t in Task::ALL {
            if spec.weight(t) > 0.0 && candidates[task_index(t)].is_empty() {
                return Err(MixtureError::EmptyPool(t));
            }
        }
        Ok(Self {
            spec,
            pool,
            candidates,
            cfg,
        })
    }

    pub fn config(&self) -> &ExampleConfig {
        &self.cfg
    }

    /// The endless, deterministic sequence of draws.
    pub fn plan(&self) -> impl Iterator<Item = Draw> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.rng_seed);
        let active: Vec<(Task, f64)> = Task::ALL
            .iter()
            .map(|&t| (t, self.spec.weight(t)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        (0u64..).map(move |index| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut task = active.last().expect("weights sum to 1").0;
            for &(t, w) in &active {
                acc += w;
                if u < acc {
                    task = t;
                    break;
                }
            }
            let pool = &self.candidates[task_index(task)];
            let source = pool[rng.random_range(0..pool.len())];
            let seed = rng.random();
            Draw {
                index,
                task,
                source,
                seed,
            }
        })
    }

    pub fn source(&self, draw: &Draw) -> Source<'a> {
        match draw.task {
            Task::RecognizeReal => Source::Image(&self.pool.images[draw.source]),
            _ => Source::Ink(&self.pool.inks[draw.source]),
        }
    }

    pub fn build(&self, draw: &Draw) -> Result<TrainingExample, MixtureError> {
        make_example(self.source(draw), draw.task, draw.seed, &self.cfg)
    }

    /// Lazily built, validated examples.
    pub fn stream(&self) -> impl Iterator<Item = Result<TrainingExample, MixtureError>> + '_ {
        self.plan().map(move |d| self.build(&d))
    }

    /// The first `count` examples, rendered on `jobs` workers (0 = global
    /// pool); the result is identical for any worker count.
    pub fn materialize(&self, count: usize, jobs: usize) -> Result<Vec<TrainingExample>, MixtureError> {
        let draws: Vec<Draw> = self.plan().take(count).collect();
        let run = || draws.par_iter().map(|d| self.build(d)).collect::<Result<Vec<_>, _>>();
        match jobs {
            1 => draws.iter().map(|d| self.build(d)).collect(),
            0 => run(),
            j => rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| MixtureError::Invalid(e.to_string()))?
                .install(run),
        }
    }
}

/// Sidecar record for an example.
pub fn example_record(index: u64, ex: &TrainingExample) -> String {
    let mut w = KvWriter::new();
    w.put("index", index)
        .put("task", ex.task.name())
        .put("prompt", &ex.prompt)
        .put("target", ex.target.to_text())
        .put("source", &ex.provenance.source_id)
        .put("seed", ex.provenance.seed);
    w.finish()
}

/// Writes `{index:08}.png` and `{index:08}.rec` for each example, numbering
/// from `first_index`.
pub fn write_examples(dir: &Path, first_index: u64, examples: &[TrainingExample]) -> Result<(), MixtureError> {
    let io = |p: &Path, e: &dyn std::fmt::Display| MixtureError::Load {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;
    for (k, ex) in examples.iter().enumerate() {
        let index = first_index + k as u64;
        let png = dir.join(format!("{index:08}.png"));
        ex.image.write_png(&png).map_err(|e| io(&png, &e))?;
        let rec = dir.join(format!("{index:08}.rec"));
        std::fs::write(&rec, example_record(index, ex)).map_err(|e| io(&rec, &e))?;
    }
    Ok(())
}

fn sorted_files(dir: &Path, ext: &str) -> Result<Vec<std::path::PathBuf>, MixtureError> {
    let err = |e: std::io::Error| MixtureError::Load {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == ext))
        .collect();
    files.sort();
    Ok(files)
}

/// Every `.inkml` file in `dir` (sorted by name). Each ink becomes a sample
/// named `stem` (or `stem#k` when a file holds several); its label is the
/// ink's `label` annotation, falling back to the document's.
pub fn load_ink_dir(dir: &Path) -> Result<Vec<InkSample>, MixtureError> {
    let mut out = Vec::new();
    for path in sorted_files(dir, "inkml")? {
        let load = |m: String| MixtureError::Load {
            path: path.display().to_string(),
            message: m,
        };
        let text = std::fs::read_to_string(&path).map_err(|e| load(e.to_string()))?;
        let doc = parse_inkml::<f64>(&text).map_err(|e: InkmlError| load(e.to_string()))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let several = doc.inks.len() > 1;
        for (k, ink) in doc.inks.into_iter().enumerate() {
            let label = ink
                .meta(LABEL_KEY)
                .or(doc.annotations.get(LABEL_KEY).map(String::as_str))
                .map(str::to_string);
            let id = if several { format!("{stem}#{k}") } else { stem.clone() };
            out.push(InkSample { id, ink, label });
        }
    }
    Ok(out)
}

/// Every `.png` in `dir` paired with the same-stem `.txt` transcription
/// (surrounding whitespace trimmed). Images without a label are an error.
pub fn load_image_dir(dir: &Path) -> Result<Vec<ImageSample>, MixtureError> {
    let mut out = Vec::new();
    for path in sorted_files(dir, "png")? {
        let load = |m: String| MixtureError::Load {
            path: path.display().to_string(),
            message: m,
        };
        let txt = path.with_extension("txt");
        let label = std::fs::read_to_string(&txt)
            .map_err(|e| load(format!("label {}: {e}", txt.display())))?
            .trim()
            .to_string();
        if label.is_empty() {
            return Err(load("empty label".into()));
        }
        let image = RasterImage::read_png(&path).map_err(|e| load(e.to_string()))?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push(ImageSample { id, image, label });
    }
    Ok(out)
}

/// Number of tokens the target of `task` has for a normalized ink of the
/// given stroke sizes and a label of `label_chars` characters.
pub fn target_len(task: Task, stroke_points: &[usize], label_chars: usize) -> usize {
    let ink: usize = stroke_points.iter().map(|m| 1 + 2 * m).sum();
    match (task.outputs_text(), task.outputs_ink()) {
        (true, true) => label_chars + ink,
        (true, false) => label_chars,
        _ => ink,
    }
}
