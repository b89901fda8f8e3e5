use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::{dist_ball, perimeter, CellSet, Rect};
use crate::rng::{substream, STREAM_SAMPLER};

/// D(Y) = | |A∩Y| − |B∩Y| |.
pub fn rect_discrepancy_pair(a: &CellSet, b: &CellSet, y: &CellSet) -> u64 {
    let mut ca: i64 = 0;
    let mut cb: i64 = 0;
    for c in y.iter_cells() {
        ca += a.contains(&c) as i64;
        cb += b.contains(&c) as i64;
    }
    (ca - cb).unsigned_abs()
}

/// D_δ(X;R) = | |X∩R| − δ|R| |.
pub fn density_discrepancy(x: &CellSet, delta: f64, r: &Rect) -> f64 {
    (x.count_in(r) as f64 - delta * r.volume() as f64).abs()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundAudit {
    pub samples: usize,
    pub max_ratio: f64,
    pub argmax_size: usize,
    pub argmax_perimeter: u64,
}

fn random_rect(rng: &mut impl Rng, frame: &Rect) -> Rect {
    let d = frame.dim();
    let mut low = Vec::with_capacity(d);
    let mut sides = Vec::with_capacity(d);
    for a in 0..d {
        let max_side = (frame.sides[a] / 2).max(1);
        let s = rng.random_range(1..=max_side);
        let l = frame.low[a] + rng.random_range(0..=frame.sides[a] - s);
        low.push(l);
        sides.push(s);
    }
    Rect { low, sides }
}

/// Random finite sets Y inside the frame: unions of rectangles, or random-walk blobs thickened a little.
pub(crate) fn sample_test_set(rng: &mut impl Rng, frame: &Rect) -> CellSet {
    let d = frame.dim();
    let mut y = CellSet::new(frame.clone());
    if rng.random::<bool>() {
        for _ in 0..rng.random_range(1..=3) {
            let r = random_rect(rng, frame);
            for c in r.cells() {
                y.insert(&c);
            }
        }
    } else {
        let mut c: Vec<i64> =
            (0..d).map(|a| frame.low[a] + rng.random_range(0..frame.sides[a])).collect();
        let steps = rng.random_range(1..=frame.volume().min(400));
        y.insert(&c);
        for _ in 0..steps {
            let a = rng.random_range(0..d);
            let s = if rng.random::<bool>() { 1 } else { -1 };
            c[a] = (c[a] + s).clamp(frame.low[a], frame.high(a) - 1);
            y.insert(&c);
        }
        let grow = rng.random_range(0..=2);
        if grow > 0 {
            y = dist_ball(&y, grow).reframe(frame.clone());
        }
    }
    y
}

/// Largest observed D_δ(X;Y)/p(Y) over random Y inside X's bounding rectangle.
pub fn laczkovich_bound_audit(x: &CellSet, delta: f64, samples: usize, seed: u64) -> BoundAudit {
    let mut rng = substream(seed, STREAM_SAMPLER);
    let mut best = BoundAudit { samples, max_ratio: 0.0, argmax_size: 0, argmax_perimeter: 0 };
    for _ in 0..samples {
        let y = sample_test_set(&mut rng, x.rect());
        let size = y.count();
        let inside = y.intersection(x).count();
        let p = perimeter(&y);
        let ratio = (inside as f64 - delta * size as f64).abs() / p as f64;
        if ratio > best.max_ratio {
            best.max_ratio = ratio;
            best.argmax_size = size;
            best.argmax_perimeter = p;
        }
    }
    best
}
