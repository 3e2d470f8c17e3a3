use super::{to_u8, RasterError, RasterImage};
use crate::normalize::CanvasTransform;

/// Scales `img` so its larger side equals `m`, centers it on an `m x m`
/// black canvas, and returns the map from source to canvas coordinates.
///
/// Upscaling samples bilinearly, downscaling averages the source footprint.
pub fn fit_image(img: &RasterImage, m: u32) -> Result<(RasterImage, CanvasTransform<f64>), RasterError> {
    if m == 0 {
        return Err(RasterError::ZeroDimension { width: m, height: m });
    }
    let (w, h) = (img.width() as f64, img.height() as f64);
    let size = m as f64;
    if img.width() == m && img.height() == m {
        return Ok((img.clone(), CanvasTransform::identity(m)));
    }
    let scale = size / w.max(h);
    let off_x = (size - w * scale) / 2.0;
    let off_y = (size - h * scale) / 2.0;
    let transform = CanvasTransform {
        scale,
        offset_x: off_x,
        offset_y: off_y,
        canvas_size: m,
    };

    let mut out = RasterImage::filled(m, m, [0, 0, 0])?;
    for j in 0..m {
        let v = (j as f64 + 0.5 - off_y) / scale;
        if !(0.0..h).contains(&v) {
            continue;
        }
        for i in 0..m {
            let u = (i as f64 + 0.5 - off_x) / scale;
            if !(0.0..w).contains(&u) {
                continue;
            }
            let rgb = if scale >= 1.0 {
                img.sample_bilinear(u, v)
            } else {
                let fx = ((i as f64 - off_x) / scale, (i as f64 + 1.0 - off_x) / scale);
                let fy = ((j as f64 - off_y) / scale, (j as f64 + 1.0 - off_y) / scale);
                area_average(img, fx, fy)
            };
            out.set(i, j, rgb.map(to_u8));
        }
    }
    Ok((out, transform))
}

/// Mean over the source rectangle `[x.0, x.1) x [y.0, y.1)`, weighted by overlap.
fn area_average(img: &RasterImage, x: (f64, f64), y: (f64, f64)) -> [f64; 3] {
    let x = (x.0.max(0.0), x.1.min(img.width() as f64));
    let y = (y.0.max(0.0), y.1.min(img.height() as f64));
    let mut acc = [0.0; 3];
    let mut total = 0.0;
    for sy in y.0.floor() as u32..y.1.ceil() as u32 {
        let wy = (y.1.min(sy as f64 + 1.0) - y.0.max(sy as f64)).max(0.0);
        for sx in x.0.floor() as u32..x.1.ceil() as u32 {
            let wx = (x.1.min(sx as f64 + 1.0) - x.0.max(sx as f64)).max(0.0);
            let w = wx * wy;
            if w > 0.0 {
                let p = img.get(sx, sy);
                for c in 0..3 {
                    acc[c] += w * p[c] as f64;
                }
                total += w;
            }
        }
    }
    if total > 0.0 {
        acc.map(|a| a / total)
    } else {
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_black(img: &RasterImage, x: u32, y: u32) -> bool {
        img.get(x, y) == [0, 0, 0]
    }

    #[test]
    fn wide_image_gets_bands_top_and_bottom() {
        let src = RasterImage::filled(448, 224, [200, 200, 200]).unwrap();
        let (out, t) = fit_image(&src, 224).unwrap();
        assert_eq!((t.scale, t.offset_x, t.offset_y), (0.5, 0.0, 56.0));
        for x in [0, 100, 223] {
            assert!(is_black(&out, x, 55));
            assert_eq!(out.get(x, 56), [200, 200, 200]);
            assert_eq!(out.get(x, 167), [200, 200, 200]);
            assert!(is_black(&out, x, 168));
        }
    }

    #[test]
    fn square_input_is_unchanged() {
        let mut src = RasterImage::filled(224, 224, [1, 2, 3]).unwrap();
        src.set(7, 9, [250, 0, 0]);
        let (out, t) = fit_image(&src, 224).unwrap();
        assert_eq!(out, src);
        assert_eq!(t, CanvasTransform::identity(224));
    }

    #[test]
    fn tall_image_centered_horizontally() {
        let src = RasterImage::filled(10, 40, [255, 255, 255]).unwrap();
        let (out, t) = fit_image(&src, 224).unwrap();
        assert!((t.scale - 5.6).abs() < 1e-12);
        assert!((t.offset_x - 84.0).abs() < 1e-9);
        assert!(is_black(&out, 83, 100));
        assert_eq!(out.get(84, 100), [255, 255, 255]);
        assert_eq!(out.get(139, 100), [255, 255, 255]);
        assert!(is_black(&out, 140, 100));
        // corners round-trip through the inverse map
        let inv = t.inverse();
        for (x, y) in [(0.0, 0.0), (10.0, 40.0), (10.0, 0.0)] {
            let (cx, cy) = t.apply(x, y);
            let (bx, by) = inv.apply(cx, cy);
            assert!((bx - x).abs() < 0.5 && (by - y).abs() < 0.5);
        }
    }
}
