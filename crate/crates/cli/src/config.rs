use std::path::Path;

use inkforge::kv::KvRecord;
use inkforge::normalize::{NormalizeSpec, ResampleSpec, SimplifySpec, DEFAULT_CANVAS, DEFAULT_EPSILON, DEFAULT_PERIOD_S};
use inkforge::raster::{AugmentationProbabilities, DEFAULT_IMAGE_SIZE, MIN_RENDER_SIZE};
use inkforge::tokens::Vocabulary;

use crate::{CliError, GlobalArgs};

pub const SEED_ENV: &str = "INKFORGE_SEED";

const KEYS: [&str; 9] = ["n", "m", "period", "epsilon", "p_lines", "p_grids", "p_noise", "p_blur", "seed"];

/// Resolved settings: defaults, then the config file, then flags. The seed
/// falls back to `INKFORGE_SEED` when neither file nor flag sets it.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: u32,
    pub m: u32,
    pub period: f64,
    pub epsilon: f64,
    pub probabilities: AugmentationProbabilities,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n: DEFAULT_CANVAS,
            m: DEFAULT_IMAGE_SIZE,
            period: DEFAULT_PERIOD_S,
            epsilon: DEFAULT_EPSILON,
            probabilities: AugmentationProbabilities::default(),
            seed: 0,
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

impl Config {
    pub fn resolve(args: &GlobalArgs, env_seed: Option<String>) -> Result<Self, CliError> {
        let mut c = Config::default();
        let mut seed = None;
        if let Some(path) = &args.config {
            seed = c.apply_file(path)?;
        }
        if let Some(v) = args.n {
            c.n = v;
        }
        if let Some(v) = args.m {
            c.m = v;
        }
        if let Some(v) = args.period {
            c.period = v;
        }
        if let Some(v) = args.epsilon {
            c.epsilon = v;
        }
        let p = &mut c.probabilities;
        for (dst, src) in [
            (&mut p.lines, args.p_lines),
            (&mut p.grids, args.p_grids),
            (&mut p.noise, args.p_noise),
            (&mut p.blur, args.p_blur),
        ] {
            if let Some(v) = src {
                *dst = v;
            }
        }
        seed = args.seed.or(seed);
        if seed.is_none() {
            if let Some(v) = env_seed {
                seed = Some(v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an integer")))?);
            }
        }
        c.seed = seed.unwrap_or(0);
        c.validate()?;
        Ok(c)
    }

    fn apply_file(&mut self, path: &Path) -> Result<Option<u64>, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let rec = KvRecord::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let bad = |e: inkforge::kv::KvError| usage(format!("{}: {e}", path.display()));
        rec.reject_unknown(&KEYS).map_err(bad)?;
        if let Some(v) = rec.parse_value("n").map_err(bad)? {
            self.n = v;
        }
        if let Some(v) = rec.parse_value("m").map_err(bad)? {
            self.m = v;
        }
        if let Some(v) = rec.parse_value("period").map_err(bad)? {
            self.period = v;
        }
        if let Some(v) = rec.parse_value("epsilon").map_err(bad)? {
            self.epsilon = v;
        }
        let p = &mut self.probabilities;
        for (key, dst) in [
            ("p_lines", &mut p.lines),
            ("p_grids", &mut p.grids),
            ("p_noise", &mut p.noise),
            ("p_blur", &mut p.blur),
        ] {
            if let Some(v) = rec.parse_value(key).map_err(bad)? {
                *dst = v;
            }
        }
        rec.parse_value("seed").map_err(bad)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(usage("n must be at least 1"));
        }
        if self.m < MIN_RENDER_SIZE {
            return Err(usage(format!("m must be at least {MIN_RENDER_SIZE}")));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(usage("period must be positive"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(usage("epsilon must be non-negative"));
        }
        let p = &self.probabilities;
        for (name, v) in [("p_lines", p.lines), ("p_grids", p.grids), ("p_noise", p.noise), ("p_blur", p.blur)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(usage(format!("{name} must be in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn vocab(&self) -> Vocabulary {
        Vocabulary::with_default_text(self.n).expect("n validated")
    }

    pub fn normalize_spec(&self) -> NormalizeSpec {
        NormalizeSpec {
            resample: ResampleSpec { period: self.period },
            simplify: SimplifySpec { epsilon: self.epsilon },
            canvas: self.n,
        }
    }
}
