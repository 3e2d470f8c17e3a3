//! Zhang-Suen thinning.
//!
//! After each sub-iteration a cleanup pass removes the redundant corner
//! pixels of 4-connected staircases. Without it a thick diagonal stroke
//! first thins to a two-pixel staircase whose end pixel always passes the
//! deletion test, and the whole stroke erodes away from its tips.
//!
//! Deletions are sequential: candidates come from a snapshot and are
//! re-checked against the live mask, so a 2x2 block keeps one pixel and the
//! number of 8-connected components never changes.

use super::BinaryImage;

/// P2..P9: N, NE, E, SE, S, SW, W, NW.
const RING: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

fn ring(img: &BinaryImage, x: i64, y: i64) -> [bool; 8] {
    RING.map(|(dx, dy)| img.get(x + dx, y + dy))
}

fn neighbours(n: &[bool; 8]) -> usize {
    n.iter().filter(|&&v| v).count()
}

fn deletable(n: &[bool; 8], first_pass: bool) -> bool {
    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
    if !(2..=6).contains(&neighbours(n)) || a != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = *n;
    if first_pass {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

/// Yokoi connectivity number for 8-connectivity; 1 means removing the pixel
/// changes no topology.
fn yokoi8(n: &[bool; 8]) -> usize {
    let bg = |i: usize| !n[i % 8];
    [0, 2, 4, 6]
        .iter()
        .filter(|&&k| bg(k) && !(bg(k + 1) && bg(k + 2)))
        .count()
}

/// Staircase corner: exactly one vertical and one horizontal 4-neighbour,
/// and removable without changing topology.
fn redundant_corner(n: &[bool; 8]) -> bool {
    let [p2, _, p4, _, p6, _, p8, _] = *n;
    (p2 != p6) && (p4 != p8) && yokoi8(n) == 1
}

fn sweep(img: &mut BinaryImage, rule: impl Fn(&[bool; 8]) -> bool) -> bool {
    let candidates: Vec<(u32, u32)> = img
        .iter_foreground()
        .filter(|&(x, y)| rule(&ring(img, x as i64, y as i64)))
        .collect();
    let mut changed = false;
    for (x, y) in candidates {
        if rule(&ring(img, x as i64, y as i64)) {
            img.set(x, y, false);
            changed = true;
        }
    }
    changed
}

pub fn skeletonize(bin: &BinaryImage) -> BinaryImage {
    let mut img = bin.clone();
    loop {
        let mut changed = false;
        for first_pass in [true, false] {
            changed |= sweep(&mut img, |n| deletable(n, first_pass));
            changed |= sweep(&mut img, redundant_corner);
        }
        if !changed {
            return img;
        }
    }
}
