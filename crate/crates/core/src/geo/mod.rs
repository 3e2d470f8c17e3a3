//! Classical derendering baseline: binarize, thin to a one-pixel skeleton,
//! and trace the skeleton into ordered strokes.
//!
//! Stroke order is a plain left-to-right heuristic and junctions are resolved
//! by the smallest turning angle; there is no learned writing prior here.

mod binarize;
mod thin;
mod trace;

pub use binarize::{binarize, binarize_region, otsu_threshold};
pub use thin::skeletonize;
pub use trace::{build_graph, plan_traversal, trace_strokes, Edge, Node, NodeKind, SkeletonGraph, Walk};

use crate::ink::BoundingBox;
use crate::raster::RasterImage;
use crate::Ink;

/// Row-major foreground mask.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryImage({}x{})", self.width, self.height)?;
        for y in 0..self.height {
            let row: String = (0..self.width)
                .map(|x| if self.get(x as i64, y as i64) { '#' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl BinaryImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    /// Parses rows of `#`/`1` (foreground) and anything else (background).
    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len() as u32;
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0) as u32;
        let mut img = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                if c == '#' || c == '1' {
                    img.set(x as u32, y as u32, true);
                }
            }
        }
        img
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Out-of-bounds reads are background.
    #[inline]
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Foreground pixels in row-major order.
    pub fn iter_foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    /// Number of 8-connected foreground components.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.bits.len()];
        let w = self.width as i64;
        let mut count = 0;
        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                let (x, y) = (i as i64 % w, i as i64 / w);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if self.get(nx, ny) {
                            let j = (ny * w + nx) as usize;
                            if !seen[j] {
                                seen[j] = true;
                                stack.push(j);
                            }
                        }
                    }
                }
            }
        }
        count
    }
}

/// Binarize, thin and trace a word image. Output is in image pixel coordinates.
pub fn derender_word(img: &RasterImage) -> Ink {
    trace_strokes(&skeletonize(&binarize(img)))
}

/// [`derender_word`] restricted to `region`; pixels outside it are background.
pub fn derender_word_in(img: &RasterImage, region: &BoundingBox<f64>) -> Ink {
    trace_strokes(&skeletonize(&binarize_region(img, Some(region))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ink::{DigitalInk, Stroke};
    use crate::raster::{render, AugmentationSpec};

    #[test]
    fn blank_image_gives_empty_ink() {
        let img = RasterImage::filled(40, 40, [255, 255, 255]).unwrap();
        assert!(derender_word(&img).is_empty());
    }

    #[test]
    fn straight_line_round_trip() {
        let ink: Ink = DigitalInk::new(vec![Stroke::from_xy(&[(30.0, 100.0), (190.0, 120.0)]).unwrap()]);
        let img = render(&ink, 224, &AugmentationSpec::plain(3.0)).unwrap();
        let out = derender_word(&img);
        assert_eq!(out.strokes().len(), 1);
        let s = &out.strokes()[0];
        let (a, b) = (s.first(), s.last());
        let (a, b) = if a.x <= b.x { (a, b) } else { (b, a) };
        assert!((a.x - 30.0).hypot(a.y - 100.0) <= 3.0, "{a:?}");
        assert!((b.x - 190.0).hypot(b.y - 120.0) <= 3.0, "{b:?}");
    }

    #[test]
    fn two_dots_give_two_strokes() {
        let ink: Ink = DigitalInk::new(vec![
            Stroke::from_xy(&[(10.0, 10.0)]).unwrap(),
            Stroke::from_xy(&[(30.0, 12.0)]).unwrap(),
        ]);
        let img = render(&ink, 40, &AugmentationSpec::plain(4.0)).unwrap();
        let out = derender_word(&img);
        assert_eq!(out.strokes().len(), 2);
        assert!(out.strokes()[0].first().x < out.strokes()[1].first().x);
        assert!(out.strokes().iter().all(|s| s.len() <= 3));
    }

    #[test]
    fn components_counts_diagonal_links() {
        let img = BinaryImage::from_rows(&["#..", ".#.", "...", "..#"]);
        assert_eq!(img.components(), 2);
    }
}
