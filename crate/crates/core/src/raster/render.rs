use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{to_u8, AugmentationSpec, LineStyle, RasterError, RasterImage, MIN_RENDER_SIZE};
use crate::ink::DigitalInk;
use crate::normalize::fit_to_canvas;
use crate::scalar::Scalar;

/// Rotates the ink about its bounds center by `spec.rotation_rad`, then fits
/// it onto the `m x m` canvas.
pub fn prepare_for_render<S: Scalar>(
    ink: &DigitalInk<S>,
    spec: &AugmentationSpec,
    m: u32,
) -> Result<DigitalInk<S>, RasterError> {
    let b = ink.bounds().map_err(crate::normalize::NormalizeError::from)?;
    let (cx, cy) = b.center();
    let rotated = ink.rotate(S::of(spec.rotation_rad), cx, cy);
    Ok(fit_to_canvas(&rotated, m)?.0)
}

/// [`prepare_for_render`] followed by [`render`].
pub fn render_augmented<S: Scalar>(
    ink: &DigitalInk<S>,
    m: u32,
    spec: &AugmentationSpec,
) -> Result<RasterImage, RasterError> {
    if ink.is_empty() {
        return render(ink, m, spec);
    }
    render(&prepare_for_render(ink, spec, m)?, m, spec)
}

/// Draws a canvas-fitted ink onto an `m x m` image.
///
/// Layers, bottom to top: background, ruled lines, grid, ink (anti-aliased,
/// round caps and joins), then Gaussian noise and box blur over everything.
/// Pixel `(i, j)` covers `[i, i+1) x [j, j+1)`.
pub fn render<S: Scalar>(
    ink: &DigitalInk<S>,
    m: u32,
    spec: &AugmentationSpec,
) -> Result<RasterImage, RasterError> {
    if m < MIN_RENDER_SIZE {
        return Err(RasterError::CanvasTooSmall(m));
    }
    spec.validate()?;
    let side = m as usize;
    let mut buf = Plane::new(side, spec.background_rgb.map(|c| c * 255.0));

    if let Some(style) = spec.lines {
        let cov = rule_coverage(side, &style, false);
        buf.composite(&cov, style.rgb.map(|c| c * 255.0));
    }
    if let Some(style) = spec.grids {
        let cov = rule_coverage(side, &style, true);
        buf.composite(&cov, style.rgb.map(|c| c * 255.0));
    }
    let cov = ink_coverage(ink, side, spec.stroke_width_px);
    buf.composite(&cov, spec.stroke_rgb.map(|c| c * 255.0));

    if let Some(std) = spec.gaussian_noise_std {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let normal = Normal::new(0.0, std).expect("noise std validated");
        for v in buf.data.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    if spec.box_blur_radius_px > 0.0 {
        buf.box_blur(spec.box_blur_radius_px);
    }
    RasterImage::from_rgb(m, m, buf.data.iter().map(|&v| to_u8(v)).collect())
}

/// Square RGB working buffer in 0..255 floating point.
struct Plane {
    side: usize,
    data: Vec<f64>,
}

impl Plane {
    fn new(side: usize, rgb: [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(side * side * 3);
        for _ in 0..side * side {
            data.extend_from_slice(&rgb);
        }
        Self { side, data }
    }

    fn composite(&mut self, coverage: &[f64], rgb: [f64; 3]) {
        for (px, &a) in self.data.chunks_exact_mut(3).zip(coverage) {
            if a > 0.0 {
                for c in 0..3 {
                    px[c] = px[c] * (1.0 - a) + rgb[c] * a;
                }
            }
        }
    }

    /// Separable box filter with fractional radius; edges clamp.
    fn box_blur(&mut self, radius: f64) {
        let whole = radius.floor() as i64;
        let frac = radius - radius.floor();
        let mut kernel: Vec<(i64, f64)> = (-whole..=whole).map(|k| (k, 1.0)).collect();
        if frac > 0.0 {
            kernel.push((-whole - 1, frac));
            kernel.push((whole + 1, frac));
        }
        let norm: f64 = kernel.iter().map(|(_, w)| w).sum();
        let n = self.side as i64;
        let idx = |x: i64, y: i64, c: usize| ((y * n + x) as usize) * 3 + c;
        for horizontal in [true, false] {
            let src = self.data.clone();
            for y in 0..n {
                for x in 0..n {
                    for c in 0..3 {
                        let mut acc = 0.0;
                        for &(k, w) in &kernel {
                            let (sx, sy) = if horizontal {
                                ((x + k).clamp(0, n - 1), y)
                            } else {
                                (x, (y + k).clamp(0, n - 1))
                            };
                            acc += w * src[idx(sx, sy, c)];
                        }
                        self.data[idx(x, y, c)] = acc / norm;
                    }
                }
            }
        }
    }
}

#[inline]
fn coverage_at(distance: f64, half_width: f64) -> f64 {
    (half_width + 0.5 - distance).clamp(0.0, 1.0)
}

fn segment_distance(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - (a.0 + t * dx)).hypot(py - (a.1 + t * dy))
}

fn ink_coverage<S: Scalar>(ink: &DigitalInk<S>, side: usize, width: f64) -> Vec<f64> {
    let mut cov = vec![0.0; side * side];
    let half = width / 2.0;
    let reach = half + 1.0;
    let mut stamp = |a: (f64, f64), b: (f64, f64)| {
        let x0 = ((a.0.min(b.0) - reach).floor().max(0.0)) as usize;
        let y0 = ((a.1.min(b.1) - reach).floor().max(0.0)) as usize;
        let x1 = ((a.0.max(b.0) + reach).ceil()).min(side as f64);
        let y1 = ((a.1.max(b.1) + reach).ceil()).min(side as f64);
        if x1 <= 0.0 || y1 <= 0.0 {
            return;
        }
        for y in y0..y1 as usize {
            for x in x0..x1 as usize {
                let d = segment_distance(x as f64 + 0.5, y as f64 + 0.5, a, b);
                let c = coverage_at(d, half);
                let slot = &mut cov[y * side + x];
                if c > *slot {
                    *slot = c;
                }
            }
        }
    };
    for stroke in ink.strokes() {
        let pts: Vec<(f64, f64)> = stroke
            .points()
            .iter()
            .map(|p| (p.x.as_f64(), p.y.as_f64()))
            .collect();
        if pts.len() == 1 {
            stamp(pts[0], pts[0]);
        }
        for w in pts.windows(2) {
            stamp(w[0], w[1]);
        }
    }
    cov
}

/// Coverage of rules spaced `spacing_px` apart, starting one spacing in.
fn rule_coverage(side: usize, style: &LineStyle, grid: bool) -> Vec<f64> {
    let half = style.width_px / 2.0;
    let profile: Vec<f64> = (0..side)
        .map(|i| {
            let c = i as f64 + 0.5;
            let k = (c / style.spacing_px).round().max(1.0);
            let d = (c - k * style.spacing_px).abs();
            coverage_at(d, half)
        })
        .collect();
    let mut cov = vec![0.0; side * side];
    for y in 0..side {
        for x in 0..side {
            let h = profile[y];
            cov[y * side + x] = if grid { h.max(profile[x]) } else { h };
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ink::Stroke;

    fn line(x0: f64, y0: f64, x1: f64, y1: f64) -> DigitalInk<f64> {
        DigitalInk::new(vec![Stroke::from_xy(&[(x0, y0), (x1, y1)]).unwrap()])
    }

    #[test]
    fn empty_ink_renders_background() {
        let img = render(&DigitalInk::<f64>::empty(), 32, &AugmentationSpec::plain(3.0)).unwrap();
        assert!(img.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn horizontal_stroke_geometry() {
        let img = render(&line(10.0, 112.0, 214.0, 112.0), 224, &AugmentationSpec::plain(3.0)).unwrap();
        assert_eq!(img.get(112, 112), [0, 0, 0]);
        assert_eq!(img.get(10, 10), [255, 255, 255]);
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut spec = crate::raster::sample_augmentation(9);
        spec.gaussian_noise_std = Some(120.0);
        spec.box_blur_radius_px = 1.5;
        let ink = line(20.0, 30.0, 200.0, 190.0);
        let a = render(&ink, 64, &spec).unwrap();
        let b = render(&ink, 64, &spec).unwrap();
        assert_eq!(a.pixels(), b.pixels());
    }

    #[test]
    fn ink_pixels_stay_near_segments() {
        let ink = DigitalInk::new(vec![
            Stroke::from_xy(&[(5.0, 5.0), (40.0, 20.0), (60.0, 58.0)]).unwrap(),
            Stroke::from_xy(&[(30.0, 50.0)]).unwrap(),
        ]);
        let width = 4.0;
        let img = render(&ink, 64, &AugmentationSpec::plain(width)).unwrap();
        let segs = [((5.0, 5.0), (40.0, 20.0)), ((40.0, 20.0), (60.0, 58.0)), ((30.0, 50.0), (30.0, 50.0))];
        for y in 0..64 {
            for x in 0..64 {
                if img.get(x, y) != [255, 255, 255] {
                    let d = segs
                        .iter()
                        .map(|&(a, b)| segment_distance(x as f64 + 0.5, y as f64 + 0.5, a, b))
                        .fold(f64::INFINITY, f64::min);
                    assert!(d <= width / 2.0 + 1.0, "pixel ({x},{y}) at distance {d}");
                }
            }
        }
    }

    #[test]
    fn lines_sit_under_ink() {
        let mut spec = AugmentationSpec::plain(3.0);
        spec.lines = Some(LineStyle { width_px: 2.0, spacing_px: 20.0, rgb: [1.0, 0.0, 0.0] });
        let img = render(&line(0.0, 20.0, 64.0, 20.0), 64, &spec).unwrap();
        assert_eq!(img.get(30, 20), [0, 0, 0]);
        assert_eq!(img.get(30, 40), [255, 0, 0]);
        assert_eq!(img.get(30, 30), [255, 255, 255]);
    }

    #[test]
    fn blur_preserves_uniform_image() {
        let mut spec = AugmentationSpec::plain(3.0);
        spec.box_blur_radius_px = 2.7;
        let img = render(&DigitalInk::<f64>::empty(), 16, &spec).unwrap();
        assert!(img.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn small_canvas_rejected() {
        assert!(matches!(
            render(&DigitalInk::<f64>::empty(), 7, &AugmentationSpec::plain(1.0)),
            Err(RasterError::CanvasTooSmall(7))
        ));
    }
}
