use std::f64::consts::TAU;

use super::{SaliencyMap, Target, TargetSet};
use crate::rng::RandomSource;

/// Pixels strictly greater than every in-bounds 8-neighbour and at least
/// `threshold`, thinned greedily so kept points are `min_distance` apart.
pub fn local_maxima(map: &SaliencyMap, min_distance: f64, threshold: f64) -> TargetSet {
    let (w, h) = (map.width(), map.height());
    let mut candidates = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = map.get(x, y);
            if v < threshold {
                continue;
            }
            let mut is_max = true;
            'scan: for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    if (nx, ny) != (x, y) && map.get(nx, ny) >= v {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                candidates.push((y * w + x, v));
            }
        }
    }
    // descending value, ties by row-major index
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut kept: Vec<Target> = Vec::new();
    for (idx, v) in candidates {
        let t = Target {
            x: (idx % w) as f64,
            y: (idx / w) as f64,
            weight: v,
        };
        if kept.iter().all(|k| k.distance(&t) >= min_distance) {
            kept.push(t);
        }
    }
    TargetSet {
        width: w,
        height: h,
        points: kept,
    }
}

/// Each target followed by one copy shifted uniformly within `radius`
/// pixels, clamped into the stimulus.
pub fn jitter_targets(targets: &TargetSet, radius: f64, rng: &mut RandomSource) -> TargetSet {
    let max_x = (targets.width - 1) as f64;
    let max_y = (targets.height - 1) as f64;
    let mut points = Vec::with_capacity(2 * targets.len());
    for p in &targets.points {
        let r = radius * rng.unit_uniform().sqrt();
        let theta = TAU * rng.unit_uniform();
        points.push(*p);
        points.push(Target {
            x: (p.x + r * theta.cos()).clamp(0.0, max_x),
            y: (p.y + r * theta.sin()).clamp(0.0, max_y),
            weight: p.weight,
        });
    }
    TargetSet {
        width: targets.width,
        height: targets.height,
        points,
    }
}
