use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RasterError;
use crate::kv::{KvRecord, KvWriter};

pub const ROTATION_RANGE: (f64, f64) = (-FRAC_PI_4, FRAC_PI_4);
pub const COLOR_RANGE: (f64, f64) = (0.0, 1.0);
pub const STROKE_WIDTH_RANGE: (f64, f64) = (1.0, 12.0);
pub const LINE_WIDTH_RANGE: (f64, f64) = (1.0, 6.0);
pub const LINE_SPACING_RANGE: (f64, f64) = (10.0, 100.0);
/// Standard deviation on the 8-bit intensity scale.
pub const NOISE_STD_RANGE: (f64, f64) = (50.0, 500.0);
pub const BLUR_RADIUS_RANGE: (f64, f64) = (0.0, 5.0);

/// Ruled lines or grid drawn beneath the ink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineStyle {
    pub width_px: f64,
    pub spacing_px: f64,
    pub rgb: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationSpec {
    pub rotation_rad: f64,
    pub stroke_rgb: [f64; 3],
    pub background_rgb: [f64; 3],
    pub stroke_width_px: f64,
    pub lines: Option<LineStyle>,
    pub grids: Option<LineStyle>,
    pub gaussian_noise_std: Option<f64>,
    /// Zero disables blurring.
    pub box_blur_radius_px: f64,
    pub rng_seed: u64,
}

/// Probability that each optional augmentation is switched on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationProbabilities {
    pub lines: f64,
    pub grids: f64,
    pub noise: f64,
    pub blur: f64,
}

impl Default for AugmentationProbabilities {
    fn default() -> Self {
        Self {
            lines: 0.25,
            grids: 0.25,
            noise: 0.5,
            blur: 0.5,
        }
    }
}

fn check(field: &'static str, value: f64, (lo, hi): (f64, f64)) -> Result<(), RasterError> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(RasterError::OutOfRange {
            field,
            value,
            lo,
            hi,
        })
    }
}

impl AugmentationSpec {
    /// Black ink on white, unrotated, without extras.
    pub fn plain(stroke_width_px: f64) -> Self {
        Self {
            rotation_rad: 0.0,
            stroke_rgb: [0.0; 3],
            background_rgb: [1.0; 3],
            stroke_width_px,
            lines: None,
            grids: None,
            gaussian_noise_std: None,
            box_blur_radius_px: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        check("rotation_rad", self.rotation_rad, ROTATION_RANGE)?;
        for (field, rgb) in [("stroke_rgb", self.stroke_rgb), ("background_rgb", self.background_rgb)] {
            for c in rgb {
                check(field, c, COLOR_RANGE)?;
            }
        }
        check("stroke_width_px", self.stroke_width_px, STROKE_WIDTH_RANGE)?;
        for (names, style) in [
            (["lines.width_px", "lines.spacing_px", "lines.rgb"], self.lines),
            (["grids.width_px", "grids.spacing_px", "grids.rgb"], self.grids),
        ] {
            if let Some(s) = style {
                check(names[0], s.width_px, LINE_WIDTH_RANGE)?;
                check(names[1], s.spacing_px, LINE_SPACING_RANGE)?;
                for c in s.rgb {
                    check(names[2], c, COLOR_RANGE)?;
                }
            }
        }
        if let Some(std) = self.gaussian_noise_std {
            check("gaussian_noise_std", std, NOISE_STD_RANGE)?;
        }
        check("box_blur_radius_px", self.box_blur_radius_px, BLUR_RADIUS_RANGE)
    }

    /// Flat key-value record; optional groups are present only when enabled.
    pub fn to_kv(&self) -> String {
        let rgb = |c: [f64; 3]| format!("{},{},{}", c[0], c[1], c[2]);
        let mut w = KvWriter::new();
        w.put("rotation_rad", self.rotation_rad)
            .put("stroke_rgb", rgb(self.stroke_rgb))
            .put("background_rgb", rgb(self.background_rgb))
            .put("stroke_width_px", self.stroke_width_px);
        for (prefix, style) in [("lines", self.lines), ("grids", self.grids)] {
            if let Some(s) = style {
                w.put(&format!("{prefix}.width_px"), s.width_px)
                    .put(&format!("{prefix}.spacing_px"), s.spacing_px)
                    .put(&format!("{prefix}.rgb"), rgb(s.rgb));
            }
        }
        if let Some(std) = self.gaussian_noise_std {
            w.put("gaussian_noise_std", std);
        }
        w.put("box_blur_radius_px", self.box_blur_radius_px)
            .put("rng_seed", self.rng_seed);
        w.finish()
    }

    pub fn from_kv(text: &str) -> Result<Self, RasterError> {
        let rec = KvRecord::parse(text)?;
        rec.reject_unknown(&[
            "rotation_rad",
            "stroke_rgb",
            "background_rgb",
            "stroke_width_px",
            "lines.width_px",
            "lines.spacing_px",
            "lines.rgb",
            "grids.width_px",
            "grids.spacing_px",
            "grids.rgb",
            "gaussian_noise_std",
            "box_blur_radius_px",
            "rng_seed",
        ])?;
        let rgb = |key: &str| -> Result<[f64; 3], RasterError> {
            let raw = rec.require(key)?;
            let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
            let bad = || crate::kv::KvError::Value {
                key: key.to_string(),
                message: format!("expected r,g,b, got {raw:?}"),
            };
            if parts.len() != 3 {
                return Err(bad().into());
            }
            let mut out = [0.0; 3];
            for (o, p) in out.iter_mut().zip(parts) {
                *o = p.parse().map_err(|_| bad())?;
            }
            Ok(out)
        };
        let style = |prefix: &str| -> Result<Option<LineStyle>, RasterError> {
            let wk = format!("{prefix}.width_px");
            if rec.get(&wk).is_none() {
                return Ok(None);
            }
            Ok(Some(LineStyle {
                width_px: rec.require_value(&wk)?,
                spacing_px: rec.require_value(&format!("{prefix}.spacing_px"))?,
                rgb: rgb(&format!("{prefix}.rgb"))?,
            }))
        };
        let spec = Self {
            rotation_rad: rec.require_value("rotation_rad")?,
            stroke_rgb: rgb("stroke_rgb")?,
            background_rgb: rgb("background_rgb")?,
            stroke_width_px: rec.require_value("stroke_width_px")?,
            lines: style("lines")?,
            grids: style("grids")?,
            gaussian_noise_std: rec.parse_value("gaussian_noise_std")?,
            box_blur_radius_px: rec.parse_value("box_blur_radius_px")?.unwrap_or(0.0),
            rng_seed: rec.parse_value("rng_seed")?.unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Samples a spec with the default switch-on probabilities.
pub fn sample_augmentation(rng_seed: u64) -> AugmentationSpec {
    sample_augmentation_with(rng_seed, &AugmentationProbabilities::default())
}

/// Every continuous field is uniform over its closed range.
pub fn sample_augmentation_with(rng_seed: u64, probs: &AugmentationProbabilities) -> AugmentationSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| rng.random_range(lo..=hi);
    let rgb = |rng: &mut ChaCha8Rng| {
        [
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
        ]
    };

    let rotation_rad = uniform(&mut rng, ROTATION_RANGE);
    let stroke_rgb = rgb(&mut rng);
    let background_rgb = rgb(&mut rng);
    let stroke_width_px = uniform(&mut rng, STROKE_WIDTH_RANGE);
    let style = |rng: &mut ChaCha8Rng, p: f64| {
        rng.random_bool(p).then(|| LineStyle {
            width_px: uniform(rng, LINE_WIDTH_RANGE),
            spacing_px: uniform(rng, LINE_SPACING_RANGE),
            rgb: rgb(rng),
        })
    };
    let lines = style(&mut rng, probs.lines);
    let grids = style(&mut rng, probs.grids);
    let gaussian_noise_std = rng
        .random_bool(probs.noise)
        .then(|| rng.random_range(NOISE_STD_RANGE.0..=NOISE_STD_RANGE.1));
    let box_blur_radius_px = if rng.random_bool(probs.blur) {
        rng.random_range(BLUR_RADIUS_RANGE.0..=BLUR_RADIUS_RANGE.1)
    } else {
        0.0
    };
    AugmentationSpec {
        rotation_rad,
        stroke_rgb,
        background_rgb,
        stroke_width_px,
        lines,
        grids,
        gaussian_noise_std,
        box_blur_radius_px,
        rng_seed: rng.random(),
    }
}
