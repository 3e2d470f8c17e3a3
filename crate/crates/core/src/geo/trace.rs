//! Skeleton graph construction and greedy stroke traversal.
//!
//! Pixels are linked to their 4-neighbours, and diagonally only when neither
//! shared 4-neighbour is set (otherwise every corner would read as a
//! junction). Pixels whose link count is not 2 are graph nodes; touching
//! junction pixels merge into one node. Edges are the pixel chains between
//! nodes. Closed loops without any node get an anchor at their leftmost pixel.

use std::collections::HashSet;

use super::BinaryImage;
use crate::ink::{DigitalInk, Point, Stroke};
use crate::normalize::{hallucinate_time, simplify, SimplifySpec, DEFAULT_PERIOD_S};
use crate::Ink;

const ALL_DIRS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];
/// How many pixels along a chain define its direction at a node.
const DIRECTION_SPAN: usize = 5;
/// RDP tolerance applied to traced pixel paths.
const TRACE_EPSILON: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Isolated,
    End,
    Junction,
    /// Arbitrary cut point on a closed loop.
    Anchor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub pixels: Vec<(u32, u32)>,
}

impl Node {
    /// Leftmost, then topmost pixel.
    pub fn key(&self) -> (u32, u32) {
        *self.pixels.iter().min().expect("node has pixels")
    }
}

/// A chain of pixels from a pixel of node `from` to a pixel of node `to`,
/// both ends included.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub pixels: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkeletonGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// One pen-down path: edges in order with their orientation (`true` = traversed
/// from `to` back to `from`), or a lone node.
#[derive(Debug, Clone, PartialEq)]
pub enum Walk {
    Path(Vec<(usize, bool)>),
    Dot(usize),
}

fn links(img: &BinaryImage, x: u32, y: u32) -> Vec<(u32, u32)> {
    let (x, y) = (x as i64, y as i64);
    ALL_DIRS
        .iter()
        .filter(|&&(dx, dy)| {
            img.get(x + dx, y + dy)
                && (dx == 0 || dy == 0 || (!img.get(x + dx, y) && !img.get(x, y + dy)))
        })
        .map(|&(dx, dy)| ((x + dx) as u32, (y + dy) as u32))
        .collect()
}

fn link_key(a: (u32, u32), b: (u32, u32)) -> ((u32, u32), (u32, u32)) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn build_graph(skel: &BinaryImage) -> SkeletonGraph {
    let w = skel.width() as usize;
    let idx = |(x, y): (u32, u32)| y as usize * w + x as usize;
    let n_pix = w * skel.height() as usize;

    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_pix];
    // column-major so node and anchor discovery runs left to right
    let mut pixels: Vec<(u32, u32)> = skel.iter_foreground().collect();
    pixels.sort();
    for &p in &pixels {
        adj[idx(p)] = links(skel, p.0, p.1);
    }

    let mut node_of: Vec<Option<usize>> = vec![None; n_pix];
    let mut nodes: Vec<Node> = Vec::new();
    for &p in &pixels {
        if node_of[idx(p)].is_some() {
            continue;
        }
        let kind = match adj[idx(p)].len() {
            0 => NodeKind::Isolated,
            1 => NodeKind::End,
            2 => continue,
            _ => NodeKind::Junction,
        };
        let id = nodes.len();
        node_of[idx(p)] = Some(id);
        let mut members = vec![p];
        if kind == NodeKind::Junction {
            let mut stack = vec![p];
            while let Some(q) = stack.pop() {
                for &r in &adj[idx(q)] {
                    if adj[idx(r)].len() >= 3 && node_of[idx(r)].is_none() {
                        node_of[idx(r)] = Some(id);
                        members.push(r);
                        stack.push(r);
                    }
                }
            }
            members.sort();
        }
        nodes.push(Node { kind, pixels: members });
    }

    let mut used: HashSet<((u32, u32), (u32, u32))> = HashSet::new();
    let mut visited = vec![false; n_pix];
    let mut edges = Vec::new();

    let walk = |start: (u32, u32),
                next: (u32, u32),
                used: &mut HashSet<_>,
                visited: &mut Vec<bool>,
                node_of: &Vec<Option<usize>>|
     -> Vec<(u32, u32)> {
        let mut chain = vec![start, next];
        used.insert(link_key(start, next));
        let (mut prev, mut cur) = (start, next);
        while node_of[idx(cur)].is_none() {
            visited[idx(cur)] = true;
            let step = adj[idx(cur)]
                .iter()
                .copied()
                .find(|&q| q != prev && !used.contains(&link_key(cur, q)));
            let Some(q) = step else { break };
            used.insert(link_key(cur, q));
            chain.push(q);
            prev = cur;
            cur = q;
        }
        chain
    };

    for (id, node) in nodes.iter().enumerate() {
        for &p in &node.pixels {
            for &q in &adj[idx(p)] {
                if node_of[idx(q)] == Some(id) || used.contains(&link_key(p, q)) {
                    continue;
                }
                let chain = walk(p, q, &mut used, &mut visited, &node_of);
                let end = *chain.last().expect("chain has two pixels");
                let to = node_of[idx(end)].expect("chains end at nodes");
                edges.push(Edge { from: id, to, pixels: chain });
            }
        }
    }

    for &p in &pixels {
        if node_of[idx(p)].is_some() || visited[idx(p)] {
            continue;
        }
        let id = nodes.len();
        nodes.push(Node { kind: NodeKind::Anchor, pixels: vec![p] });
        node_of[idx(p)] = Some(id);
        let q = adj[idx(p)][0];
        let chain = walk(p, q, &mut used, &mut visited, &node_of);
        edges.push(Edge { from: id, to: id, pixels: chain });
    }

    SkeletonGraph { nodes, edges }
}

fn oriented(edge: &Edge, reversed: bool) -> Vec<(u32, u32)> {
    let mut px = edge.pixels.clone();
    if reversed {
        px.reverse();
    }
    px
}

fn direction(a: (u32, u32), b: (u32, u32)) -> (f64, f64) {
    let (dx, dy) = (b.0 as f64 - a.0 as f64, b.1 as f64 - a.1 as f64);
    let n = dx.hypot(dy);
    if n == 0.0 {
        (0.0, 0.0)
    } else {
        (dx / n, dy / n)
    }
}

fn leaving(px: &[(u32, u32)]) -> (f64, f64) {
    direction(px[0], px[DIRECTION_SPAN.min(px.len() - 1)])
}

fn arriving(px: &[(u32, u32)]) -> (f64, f64) {
    let n = px.len() - 1;
    direction(px[n - DIRECTION_SPAN.min(n)], px[n])
}

/// Greedy cover of every edge exactly once. Walks start at the leftmost free
/// end point (or the leftmost node with free edges when only junctions and
/// loops remain) and continue through junctions along the free edge that
/// turns the least.
pub fn plan_traversal(graph: &SkeletonGraph) -> Vec<Walk> {
    let mut incident: Vec<Vec<(usize, bool)>> = vec![Vec::new(); graph.nodes.len()];
    for (e, edge) in graph.edges.iter().enumerate() {
        incident[edge.from].push((e, false));
        incident[edge.to].push((e, true));
    }
    let mut consumed = vec![false; graph.edges.len()];
    let mut walks = Vec::new();

    let mut order: Vec<usize> = (0..graph.nodes.len()).collect();
    order.sort_by_key(|&i| (graph.nodes[i].key(), i));

    loop {
        let free = |i: usize, consumed: &[bool]| incident[i].iter().any(|&(e, _)| !consumed[e]);
        let start = order
            .iter()
            .copied()
            .find(|&i| graph.nodes[i].kind == NodeKind::End && free(i, &consumed))
            .or_else(|| order.iter().copied().find(|&i| free(i, &consumed)));
        let Some(mut node) = start else { break };

        let mut path = Vec::new();
        // rightward reference direction for the first choice at a junction
        let mut heading = (1.0, 0.0);
        loop {
            let best = incident[node]
                .iter()
                .filter(|&&(e, _)| !consumed[e])
                .map(|&(e, rev)| {
                    let d = leaving(&oriented(&graph.edges[e], rev));
                    (e, rev, d.0 * heading.0 + d.1 * heading.1)
                })
                .fold(None, |acc: Option<(usize, bool, f64)>, c| match acc {
                    Some(a) if a.2 >= c.2 => Some(a),
                    _ => Some(c),
                });
            let Some((e, rev, _)) = best else { break };
            consumed[e] = true;
            path.push((e, rev));
            let px = oriented(&graph.edges[e], rev);
            heading = arriving(&px);
            node = if rev { graph.edges[e].from } else { graph.edges[e].to };
        }
        walks.push(Walk::Path(path));
    }

    for &i in &order {
        if graph.nodes[i].kind == NodeKind::Isolated {
            walks.push(Walk::Dot(i));
        }
    }
    walks
}

fn walk_pixels(graph: &SkeletonGraph, walk: &Walk) -> Vec<(u32, u32)> {
    match walk {
        Walk::Dot(n) => vec![graph.nodes[*n].key()],
        Walk::Path(steps) => {
            let mut out: Vec<(u32, u32)> = Vec::new();
            for &(e, rev) in steps {
                for p in oriented(&graph.edges[e], rev) {
                    if out.last() != Some(&p) {
                        out.push(p);
                    }
                }
            }
            out
        }
    }
}

/// Traces a skeleton into strokes in pixel-center coordinates, ordered by
/// their leftmost x, simplified and given synthetic timestamps.
pub fn trace_strokes(skel: &BinaryImage) -> Ink {
    let graph = build_graph(skel);
    let mut strokes: Vec<Vec<(u32, u32)>> = plan_traversal(&graph)
        .iter()
        .map(|w| walk_pixels(&graph, w))
        .filter(|p| !p.is_empty())
        .collect();
    strokes.sort_by_key(|s| s.iter().map(|p| p.0).min());
    let strokes = strokes
        .into_iter()
        .map(|px| {
            let pts = px
                .into_iter()
                .map(|(x, y)| Point::new(x as f64 + 0.5, y as f64 + 0.5, 0.0))
                .collect();
            Stroke::new(pts).expect("pixel centers are finite")
        })
        .collect();
    let ink = DigitalInk::new(strokes);
    let ink = simplify(&ink, &SimplifySpec { epsilon: TRACE_EPSILON }).expect("simplify of valid ink");
    hallucinate_time(&ink, DEFAULT_PERIOD_S)
}
