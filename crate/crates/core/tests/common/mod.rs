#![allow(dead_code)]

use inkforge::raster::{render, AugmentationSpec};
use inkforge::{BBox, DigitalInk, Ink, RasterImage, Stroke};

pub fn ink(strokes: &[&[(f64, f64)]]) -> Ink {
    DigitalInk::new(strokes.iter().map(|s| Stroke::from_xy(s).unwrap()).collect())
}

/// Line drawings inside a 64 px canvas, away from the border.
pub fn geo_fixtures() -> Vec<(String, Ink)> {
    let mut out = Vec::new();
    for (i, &(a, b)) in [
        ((10.0, 32.0), (54.0, 32.0)),
        ((32.0, 10.0), (32.0, 54.0)),
        ((10.0, 10.0), (54.0, 54.0)),
        ((10.0, 54.0), (54.0, 20.0)),
        ((12.0, 40.0), (50.0, 22.0)),
        ((20.0, 12.0), (28.0, 52.0)),
    ]
    .iter()
    .enumerate()
    {
        out.push((format!("line{i}"), ink(&[&[a, b]])));
    }
    for (i, &(c, dx, dy)) in [
        ((14.0, 50.0), 36.0, -36.0),
        ((50.0, 50.0), -36.0, -30.0),
        ((14.0, 14.0), 30.0, 36.0),
        ((48.0, 12.0), -32.0, 40.0),
    ]
    .iter()
    .enumerate()
    {
        let (x, y) = c;
        out.push((format!("ell{i}"), ink(&[&[(x, y + dy), (x, y), (x + dx, y)]])));
    }
    for (i, &(teeth, amp)) in [(2, 14.0), (3, 12.0), (3, 18.0), (4, 10.0), (2, 20.0)].iter().enumerate() {
        let step = 44.0 / (2 * teeth) as f64;
        let pts: Vec<(f64, f64)> = (0..=2 * teeth)
            .map(|k| (10.0 + k as f64 * step, if k % 2 == 0 { 32.0 + amp } else { 32.0 - amp }))
            .collect();
        out.push((format!("zigzag{i}"), ink(&[&pts])));
    }
    for (i, &(cx, cy, r)) in [(32.0, 32.0, 20.0), (30.0, 34.0, 16.0), (34.0, 30.0, 22.0), (32.0, 32.0, 12.0), (28.0, 28.0, 18.0)]
        .iter()
        .enumerate()
    {
        out.push((format!("plus{i}"), ink(&[&[(cx - r, cy), (cx + r, cy)], &[(cx, cy - r), (cx, cy + r)]])));
    }
    out
}

pub fn render_plain(ink: &Ink, m: u32, width: f64) -> RasterImage {
    render(ink, m, &AugmentationSpec::plain(width)).unwrap()
}

pub struct Page {
    pub image: RasterImage,
    pub boxes: Vec<BBox>,
    pub words: Vec<Ink>,
}

fn word_inks() -> Vec<Ink> {
    vec![
        // "u"-like cup
        ink(&[&[(0.0, 0.0), (0.0, 20.0), (10.0, 28.0), (20.0, 20.0), (20.0, 0.0)]]),
        // "n"-hump pair
        ink(&[&[(0.0, 30.0), (0.0, 0.0), (15.0, 0.0), (15.0, 30.0)], &[(25.0, 30.0), (25.0, 5.0), (45.0, 5.0), (45.0, 30.0)]]),
        // zigzag word
        ink(&[&[(0.0, 20.0), (12.0, 0.0), (24.0, 20.0), (36.0, 0.0), (48.0, 20.0), (60.0, 0.0)]]),
        // "T"
        ink(&[&[(0.0, 0.0), (30.0, 0.0)], &[(15.0, 0.0), (15.0, 32.0)]]),
        // "L" with tail
        ink(&[&[(0.0, 0.0), (0.0, 30.0), (40.0, 30.0)], &[(48.0, 10.0), (48.0, 30.0)]]),
    ]
}

/// Five words drawn at width 2 on a white page, each with a padded box.
pub fn synthetic_page() -> Page {
    let (pw, ph) = (520u32, 140u32);
    let mut pixels = vec![255u8; (pw * ph * 3) as usize];
    let mut boxes = Vec::new();
    let mut words = Vec::new();
    let mut x = 20.0;
    for (k, w) in word_inks().into_iter().enumerate() {
        let y = if k % 2 == 0 { 40.0 } else { 60.0 };
        let placed = w.map_xy(|a, b| (a + x, b + y));
        let bb = placed.bounds().unwrap();
        // render each word in its own tile and copy its non-white pixels
        let tile = 128u32;
        let (ox, oy) = (bb.x_min - 20.0, bb.y_min - 20.0);
        let local = placed.map_xy(|a, b| (a - ox, b - oy));
        let img = render_plain(&local, tile, 2.0);
        for j in 0..tile {
            for i in 0..tile {
                let px = img.get(i, j);
                if px == [255, 255, 255] {
                    continue;
                }
                let (gx, gy) = (i as i64 + ox as i64, j as i64 + oy as i64);
                if gx >= 0 && gy >= 0 && (gx as u32) < pw && (gy as u32) < ph {
                    let at = ((gy as u32 * pw + gx as u32) * 3) as usize;
                    for c in 0..3 {
                        pixels[at + c] = pixels[at + c].min(px[c]);
                    }
                }
            }
        }
        boxes.push(BBox::new(bb.x_min - 6.0, bb.y_min - 6.0, bb.x_max + 6.0, bb.y_max + 6.0).unwrap());
        words.push(placed);
        x = bb.x_max + 40.0;
    }
    Page {
        image: RasterImage::from_rgb(pw, ph, pixels).unwrap(),
        boxes,
        words,
    }
}
