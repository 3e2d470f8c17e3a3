use super::BinaryImage;
use crate::ink::BoundingBox;
use crate::raster::RasterImage;

/// Luma with the 0.299 / 0.587 / 0.114 weights, rounded to 8 bits.
fn gray(rgb: [u8; 3]) -> u8 {
    (0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

/// Otsu's threshold: classes are `<= t` and `> t`. `None` for single-valued
/// histograms.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total_sum: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let mut w0 = 0u64;
    let mut sum0 = 0.0;
    let mut best = (0u8, f64::NEG_INFINITY);
    for (t, &c) in hist.iter().enumerate().take(255) {
        w0 += c;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (total_sum - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if between > best.1 {
            best = (t as u8, between);
        }
    }
    Some(best.0)
}

pub fn binarize(img: &RasterImage) -> BinaryImage {
    binarize_region(img, None)
}

/// Otsu binarization over the pixels whose centers fall in `region` (the
/// whole image when `None`). Foreground is the smaller class, so it never
/// exceeds half the considered pixels; ties go to the dark side.
pub fn binarize_region(img: &RasterImage, region: Option<&BoundingBox<f64>>) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let inside = |x: u32, y: u32| match region {
        None => true,
        Some(r) => {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            cx >= r.x_min && cx <= r.x_max && cy >= r.y_min && cy <= r.y_max
        }
    };
    let mut levels = vec![0u8; w as usize * h as usize];
    let mut hist = [0u64; 256];
    for y in 0..h {
        for x in 0..w {
            if inside(x, y) {
                let g = gray(img.get(x, y));
                levels[(y * w + x) as usize] = g;
                hist[g as usize] += 1;
            }
        }
    }
    let mut out = BinaryImage::new(w, h);
    let Some(t) = otsu_threshold(&hist) else {
        return out;
    };
    let dark: u64 = hist[..=t as usize].iter().sum();
    let bright: u64 = hist[t as usize + 1..].iter().sum();
    let dark_is_ink = dark <= bright;
    for y in 0..h {
        for x in 0..w {
            if inside(x, y) {
                let is_dark = levels[(y * w + x) as usize] <= t;
                out.set(x, y, is_dark == dark_is_ink);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text_image(ink: [u8; 3], paper: [u8; 3]) -> RasterImage {
        let mut img = RasterImage::filled(20, 10, paper).unwrap();
        for x in 3..15 {
            img.set(x, 4, ink);
            img.set(x, 5, ink);
        }
        img
    }

    #[test]
    fn dark_text_on_light_paper() {
        let b = binarize(&text_image([0, 0, 0], [255, 255, 255]));
        assert_eq!(b.count(), 24);
        assert!(b.get(3, 4) && !b.get(0, 0));
    }

    #[test]
    fn light_text_on_dark_paper() {
        let b = binarize(&text_image([255, 255, 255], [0, 0, 0]));
        assert_eq!(b.count(), 24);
        assert!(b.get(3, 4) && !b.get(0, 0));
    }

    #[test]
    fn uniform_image_has_no_foreground() {
        let img = RasterImage::filled(8, 8, [128, 128, 128]).unwrap();
        assert_eq!(binarize(&img).count(), 0);
    }

    #[test]
    fn region_excludes_padding() {
        // black padding outside the content would otherwise outvote the paper
        let mut img = RasterImage::filled(20, 20, [0, 0, 0]).unwrap();
        for y in 8..12 {
            for x in 0..20 {
                img.set(x, y, [255, 255, 255]);
            }
        }
        img.set(5, 10, [0, 0, 0]);
        let region = BoundingBox::new(0.0, 8.0, 20.0, 12.0).unwrap();
        let b = binarize_region(&img, Some(&region));
        assert_eq!(b.count(), 1);
        assert!(b.get(5, 10));
    }
}
