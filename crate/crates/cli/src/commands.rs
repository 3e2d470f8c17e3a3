use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use inkforge::eval::{char_f1, parse_char_boxes, DEFAULT_IOU_THRESHOLD};
use inkforge::geo::derender_word;
use inkforge::inkml::{parse_inkml, serialize_inkml, InkmlDocument};
use inkforge::mixture::{load_image_dir, load_ink_dir, write_examples, ExampleConfig, Mixture, MixtureSpec, SourcePool};
use inkforge::normalize::normalize;
use inkforge::page::{
    derender_page, load_wordboxes, segment_words, svg_overlay, DerenderBackend, GeoBackend, PageOptions,
    SubprocessBackend,
};
use inkforge::raster::{render_augmented, sample_augmentation_with, AugmentationSpec};
use inkforge::tokens::{decode_ink, encode_ink, DecodeMode, DecodeOptions, Task, TokenSeq};
use inkforge::{Ink, RasterImage};

use crate::config::Config;
use crate::{CliError, Command};

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Writes to `out`, or to stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(data),
    }
}

fn read_single_ink(path: &Path) -> Result<Ink, CliError> {
    let doc = parse_inkml::<f64>(&read_text(path)?).map_err(|e| data(format!("{}: {e}", path.display())))?;
    match <[Ink; 1]>::try_from(doc.inks) {
        Ok([ink]) => Ok(ink),
        Err(inks) => Err(data(format!("{}: expected one ink, found {}", path.display(), inks.len()))),
    }
}

fn inkml_text(ink: Ink) -> Result<String, CliError> {
    serialize_inkml(&InkmlDocument::single(ink)).map_err(data)
}

fn read_png(path: &Path) -> Result<RasterImage, CliError> {
    RasterImage::read_png(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Resample, simplify and fit to the N canvas first
    #[arg(long)]
    normalize: bool,
}

#[derive(Debug, Args)]
pub struct DetokenizeArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fail on the first grammar violation instead of skipping it
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    input: PathBuf,
    /// Augmentation spec record; plain black-on-white when absent
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    /// Stroke width for the plain style
    #[arg(long, default_value_t = 3.0)]
    width: f64,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DerenderArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DerenderPageArgs {
    input: PathBuf,
    /// Word-box JSON; boxes are found by projection profiles when absent
    #[arg(long)]
    boxes: Option<PathBuf>,
    /// `geo` or `subprocess:CMD`
    #[arg(long, default_value = "geo")]
    backend: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write a colored stroke overlay
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
pub struct MixtureArgs {
    /// Directory of .inkml files with `label` annotations
    #[arg(long)]
    inks: Option<PathBuf>,
    /// Directory of word .png files with same-stem .txt labels
    #[arg(long)]
    ocr: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Comma-separated weights in task order: VanillaDerender, DerenderWithText,
    /// RecognizeSyn, RecognizeReal, RecognizeAndDerender
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pred: PathBuf,
    truth: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    #[arg(long)]
    json: bool,
}

pub fn run(cmd: Command, cfg: &Config) -> Result<(), CliError> {
    match cmd {
        Command::Tokenize(a) => tokenize(a, cfg),
        Command::Detokenize(a) => detokenize(a, cfg),
        Command::Render(a) => render(a, cfg),
        Command::Augment(a) => augment(a, cfg),
        Command::Derender(a) => derender(a),
        Command::DerenderPage(a) => derender_page_cmd(a, cfg),
        Command::MakeMixture(a) => make_mixture(a, cfg),
        Command::EvalF1(a) => eval_f1(a),
    }
}

fn tokenize(a: TokenizeArgs, cfg: &Config) -> Result<(), CliError> {
    let mut ink = read_single_ink(&a.input)?;
    if a.normalize {
        ink = normalize(&ink, &cfg.normalize_spec()).map_err(data)?.0;
    }
    let seq = encode_ink(&ink, &cfg.vocab()).map_err(data)?;
    emit(a.output.as_deref(), &format!("{}\n", seq.to_text()))
}

fn detokenize(a: DetokenizeArgs, cfg: &Config) -> Result<(), CliError> {
    let seq = TokenSeq::from_text(&read_text(&a.input)?).map_err(data)?;
    let opts = DecodeOptions {
        mode: if a.strict { DecodeMode::Strict } else { DecodeMode::Tolerant },
        period: cfg.period,
    };
    let decoded = decode_ink::<f64>(&seq, &cfg.vocab(), &opts).map_err(data)?;
    for d in &decoded.diagnostics {
        eprintln!("warning: token {}: {}", d.index, d.issue);
    }
    emit(a.output.as_deref(), &inkml_text(decoded.ink)?)
}

fn render(a: RenderArgs, cfg: &Config) -> Result<(), CliError> {
    let ink = read_single_ink(&a.input)?;
    let spec = match &a.spec {
        Some(p) => AugmentationSpec::from_kv(&read_text(p)?).map_err(|e| data(format!("{}: {e}", p.display())))?,
        None => AugmentationSpec::plain(a.width),
    };
    let img = render_augmented(&ink, cfg.m, &spec).map_err(data)?;
    write_bytes(&a.output, &img.encode_png().map_err(data)?)
}

fn augment(a: AugmentArgs, cfg: &Config) -> Result<(), CliError> {
    let spec = sample_augmentation_with(cfg.seed, &cfg.probabilities);
    emit(a.output.as_deref(), &spec.to_kv())
}

fn derender(a: DerenderArgs) -> Result<(), CliError> {
    let img = read_png(&a.input)?;
    emit(a.output.as_deref(), &inkml_text(derender_word(&img))?)
}

fn derender_page_cmd(a: DerenderPageArgs, cfg: &Config) -> Result<(), CliError> {
    let page = read_png(&a.input)?;
    let boxes = match &a.boxes {
        Some(p) => load_wordboxes(p).map_err(|e| data(format!("{}: {e}", p.display())))?,
        None => segment_words(&page),
    };
    let backend: Box<dyn DerenderBackend> = match a.backend.as_str() {
        "geo" => Box::new(GeoBackend),
        other => match other.strip_prefix("subprocess:") {
            Some(cmd) if !cmd.trim().is_empty() => {
                Box::new(SubprocessBackend::new(cmd, cfg.n).map_err(|e| CliError::Usage(e.to_string()))?)
            }
            _ => return Err(CliError::Usage(format!("unknown backend {other:?}; use geo or subprocess:CMD"))),
        },
    };
    let opts = PageOptions { m: cfg.m, jobs: a.jobs };
    let result = derender_page(&page, &boxes, backend.as_ref(), &opts).map_err(data)?;
    for (i, r) in result.records.iter().enumerate() {
        if let Some(reason) = &r.skipped {
            eprintln!("word {i}: skipped: {reason}");
        }
        for d in &r.diagnostics {
            eprintln!("word {i}: {d}");
        }
    }
    if let Some(svg) = &a.svg {
        let href = a.input.to_string_lossy();
        write_bytes(svg, svg_overlay(&result, page.width(), page.height(), Some(&href)).as_bytes())?;
    }
    emit(a.output.as_deref(), &inkml_text(result.ink.clone())?)?;
    match result.backend_failures() {
        0 => Ok(()),
        k => Err(CliError::Backend(format!("backend failed on {k} of {} words", boxes.len()))),
    }
}

fn parse_weights(text: &str) -> Result<[f64; 5], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("--weights needs {} comma-separated numbers", Task::ALL.len()));
    if parts.len() != Task::ALL.len() {
        return Err(bad());
    }
    let mut w = [0.0; 5];
    for (dst, p) in w.iter_mut().zip(parts) {
        *dst = p.parse().map_err(|_| bad())?;
    }
    Ok(w)
}

fn make_mixture(a: MixtureArgs, cfg: &Config) -> Result<(), CliError> {
    let mut spec = MixtureSpec::uniform(cfg.seed);
    if let Some(w) = &a.weights {
        spec.weights = parse_weights(w)?;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let pool = SourcePool {
        inks: match &a.inks {
            Some(d) => load_ink_dir(d).map_err(data)?,
            None => Vec::new(),
        },
        images: match &a.ocr {
            Some(d) => load_image_dir(d).map_err(data)?,
            None => Vec::new(),
        },
    };
    let ex_cfg = ExampleConfig {
        vocab: cfg.vocab(),
        m: cfg.m,
        normalize: cfg.normalize_spec(),
        probabilities: cfg.probabilities,
    };
    let mix = Mixture::new(spec, &pool, ex_cfg).map_err(data)?;
    let examples = mix.materialize(a.count, a.jobs).map_err(data)?;
    write_examples(&a.output, 0, &examples).map_err(data)
}

fn eval_f1(a: EvalArgs) -> Result<(), CliError> {
    let load = |p: &Path| parse_char_boxes(&read_text(p)?).map_err(|e| data(format!("{}: {e}", p.display())));
    let pred = load(&a.pred)?;
    let truth = load(&a.truth)?;
    let report = char_f1(&pred, &truth, a.iou).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = if a.json {
        format!("{}\n", serde_json::to_string_pretty(&report.to_json()).map_err(data)?)
    } else {
        report.to_table()
    };
    emit(None, &text)
}
