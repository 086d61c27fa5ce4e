//! Landmark and reachability precision-recall between two networks.
//!
//! Landmarks are vertex positions. Every predicted landmark is assigned
//! its nearest ground-truth landmark; the prediction is a true positive
//! at threshold `t` when that distance is at most `t` (several
//! predictions may share one target), and a ground-truth landmark is a
//! false negative when no true positive was assigned to it.
//!
//! Reachability scores connectivity: every simple path of at most
//! [`MAX_PATH_EDGES`] edges is a candidate, sampled into a polyline at
//! [`SAMPLES_PER_EDGE`] points per edge. A predicted path counts as a
//! true positive at `t` when both its endpoints are landmark true
//! positives at `t` and its symmetric-mean-Chamfer distance to the
//! nearest ground-truth path between the assigned endpoint pair is at
//! most `t`; any other predicted path is a false positive. A
//! ground-truth path missed by every true positive is a false negative.
//!
//! A vacuous denominator scores 1 (an empty prediction against an empty
//! truth is perfect); `F1` is 0 whenever precision and recall are both 0.
//! Matching is precomputed once per network pair, so sweeping the
//! threshold grid costs one pass per threshold.

use std::collections::HashMap;

use crate::graph::{Path, Point, RoadNetwork};

pub const LANDMARK_THRESHOLDS: [f64; 10] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
pub const REACH_THRESHOLDS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];
pub const MAX_PATH_EDGES: usize = 5;
pub const SAMPLES_PER_EDGE: usize = 100;

/// Precision, recall, and F1 at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// One metric swept over a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PrSweep {
    pub points: Vec<PrPoint>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

impl PrSweep {
    fn from_points(points: Vec<PrPoint>) -> PrSweep {
        let n = points.len().max(1) as f64;
        let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
        for pt in &points {
            p += pt.precision;
            r += pt.recall;
            f += pt.f1;
        }
        PrSweep {
            points,
            mean_precision: p / n,
            mean_recall: r / n,
            mean_f1: f / n,
        }
    }
}

/// Both metrics plus the element counts they were computed over.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub landmark: PrSweep,
    pub reachability: PrSweep,
    pub pred_landmarks: usize,
    pub gt_landmarks: usize,
    pub pred_paths: usize,
    pub gt_paths: usize,
}

fn pr_point(
    threshold: f64,
    tp: usize,
    pred_total: usize,
    matched_gt: usize,
    gt_total: usize,
) -> PrPoint {
    let precision = if pred_total > 0 {
        tp as f64 / pred_total as f64
    } else {
        1.0
    };
    let recall = if gt_total > 0 {
        matched_gt as f64 / gt_total as f64
    } else {
        1.0
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    PrPoint {
        threshold,
        precision,
        recall,
        f1,
    }
}

struct Assignment {
    dist: Vec<f64>,
    nearest: Vec<usize>,
}

fn nearest_assignment(pred: &[Point], gt: &[Point]) -> Assignment {
    let mut dist = Vec::with_capacity(pred.len());
    let mut nearest = Vec::with_capacity(pred.len());
    for p in pred {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, g) in gt.iter().enumerate() {
            let d = p.dist(*g);
            if d < best.0 {
                best = (d, j);
            }
        }
        dist.push(best.0);
        nearest.push(best.1);
    }
    Assignment { dist, nearest }
}

/// Landmark precision-recall over raw point sets.
pub fn landmark_pr_points(pred: &[Point], gt: &[Point], thresholds: &[f64]) -> PrSweep {
    let assign = nearest_assignment(pred, gt);
    let points = thresholds
        .iter()
        .map(|&t| {
            let mut matched = vec![false; gt.len()];
            let mut tp = 0usize;
            for (i, &d) in assign.dist.iter().enumerate() {
                if d <= t {
                    tp += 1;
                    matched[assign.nearest[i]] = true;
                }
            }
            let matched_gt = matched.iter().filter(|&&m| m).count();
            pr_point(t, tp, pred.len(), matched_gt, gt.len())
        })
        .collect();
    PrSweep::from_points(points)
}

fn vertex_points(net: &RoadNetwork) -> Vec<Point> {
    net.vertices().iter().map(|v| v.point()).collect()
}

/// Landmark precision-recall over the vertices of two networks.
pub fn landmark_pr(pred: &RoadNetwork, gt: &RoadNetwork, thresholds: &[f64]) -> PrSweep {
    landmark_pr_points(&vertex_points(pred), &vertex_points(gt), thresholds)
}

/// Symmetric mean nearest-neighbour distance between two sampled
/// curves. Zero when both are empty, infinite when exactly one is.
pub fn chamfer(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let mean_nn = |from: &[Point], to: &[Point]| -> f64 {
        let total: f64 = from
            .iter()
            .map(|p| to.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .sum();
        total / from.len() as f64
    };
    (mean_nn(a, b) + mean_nn(b, a)) / 2.0
}

struct PathSet {
    /// Sampled polyline per path.
    polylines: Vec<Vec<Point>>,
    /// `(source, target)` vertex indices per path.
    pair_of: Vec<(usize, usize)>,
    /// Path indices grouped by endpoint pair.
    by_pair: HashMap<(usize, usize), Vec<usize>>,
}

/// Every simple path of 1 to `max_edges` edges, sampled at
/// `samples_per_edge >= 2` points per edge.
fn collect_paths(net: &RoadNetwork, max_edges: usize, samples_per_edge: usize) -> PathSet {
    let out = net.out_edges();
    let mut set = PathSet {
        polylines: Vec::new(),
        pair_of: Vec::new(),
        by_pair: HashMap::new(),
    };

    #[allow(clippy::too_many_arguments)]
    fn extend(
        net: &RoadNetwork,
        out: &[Vec<usize>],
        source: usize,
        at: usize,
        edges: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        max_edges: usize,
        samples_per_edge: usize,
        set: &mut PathSet,
    ) {
        if edges.len() == max_edges {
            return;
        }
        for &e in &out[at] {
            let next = net
                .vertex_index(&net.edges()[e].target)
                .expect("resolvable edge");
            if on_path[next] {
                continue;
            }
            edges.push(e);
            on_path[next] = true;
            let idx = set.polylines.len();
            set.polylines.push(
                Path {
                    edges: edges.clone(),
                }
                .polyline(net, samples_per_edge),
            );
            set.pair_of.push((source, next));
            set.by_pair.entry((source, next)).or_default().push(idx);
            extend(
                net,
                out,
                source,
                next,
                edges,
                on_path,
                max_edges,
                samples_per_edge,
                set,
            );
            on_path[next] = false;
            edges.pop();
        }
    }

    let mut on_path = vec![false; net.vertices().len()];
    for u in 0..net.vertices().len() {
        let mut edges = Vec::new();
        on_path[u] = true;
        extend(
            net,
            &out,
            u,
            u,
            &mut edges,
            &mut on_path,
            max_edges,
            samples_per_edge,
            &mut set,
        );
        on_path[u] = false;
    }
    set
}

/// Reachability precision-recall between two networks.
pub fn reachability_pr(
    pred: &RoadNetwork,
    gt: &RoadNetwork,
    thresholds: &[f64],
    max_edges: usize,
    samples_per_edge: usize,
) -> PrSweep {
    let assign = nearest_assignment(&vertex_points(pred), &vertex_points(gt));
    let gt_paths = collect_paths(gt, max_edges, samples_per_edge);
    let pred_paths = collect_paths(pred, max_edges, samples_per_edge);

    // Per predicted path: the score it must clear (endpoint gate and
    // curve distance combined) and the ground-truth path it claims.
    let mut scored: Vec<(f64, Option<usize>)> = Vec::with_capacity(pred_paths.polylines.len());
    for (i, poly) in pred_paths.polylines.iter().enumerate() {
        let (u, v) = pred_paths.pair_of[i];
        if assign.nearest[u] == usize::MAX || assign.nearest[v] == usize::MAX {
            scored.push((f64::INFINITY, None));
            continue;
        }
        let gate = assign.dist[u].max(assign.dist[v]);
        let gpair = (assign.nearest[u], assign.nearest[v]);
        let best = gt_paths
            .by_pair
            .get(&gpair)
            .into_iter()
            .flatten()
            .map(|&g| (chamfer(poly, &gt_paths.polylines[g]), g))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((c, g)) => scored.push((gate.max(c), Some(g))),
            None => scored.push((f64::INFINITY, None)),
        }
    }

    let points = thresholds
        .iter()
        .map(|&t| {
            let mut matched = vec![false; gt_paths.polylines.len()];
            let mut tp = 0usize;
            for &(score, g) in &scored {
                if score <= t {
                    tp += 1;
                    matched[g.expect("finite score implies a claimed path")] = true;
                }
            }
            let matched_gt = matched.iter().filter(|&&m| m).count();
            pr_point(t, tp, scored.len(), matched_gt, gt_paths.polylines.len())
        })
        .collect();
    PrSweep::from_points(points)
}

/// Both metrics at the standard threshold grids.
pub fn evaluate(pred: &RoadNetwork, gt: &RoadNetwork) -> MetricReport {
    let landmark = landmark_pr(pred, gt, &LANDMARK_THRESHOLDS);
    let reachability = reachability_pr(
        pred,
        gt,
        &REACH_THRESHOLDS,
        MAX_PATH_EDGES,
        SAMPLES_PER_EDGE,
    );
    let count = |net: &RoadNetwork| collect_paths(net, MAX_PATH_EDGES, 2).polylines.len();
    MetricReport {
        landmark,
        reachability,
        pred_landmarks: pred.vertices().len(),
        gt_landmarks: gt.vertices().len(),
        pred_paths: count(pred),
        gt_paths: count(gt),
    }
}
