use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::torus::{torus_dist_inf, wrap};
use crate::geometry::TorusPoint;
use crate::lattice::{linf, CellSet, Rect};
use crate::matching::Side;
use crate::rng::{substream, STREAM_NETS};
use crate::window::{build_sparse_coloring, CosetWindow};

/// Net of one level (levels count from 1). Odd levels carry a B-net, even levels an A-net.
#[derive(Clone, Debug)]
pub struct NetLevel {
    pub level: usize,
    pub radius: i64,
    pub horizon: i64,
    pub part: Side,
    /// Torus ball radius ρ: half the smallest torus distance among offsets of norm ≤ r + 4M.
    pub ball_radius: f64,
    pub centers: Vec<TorusPoint>,
    /// Cells whose oracle ball fits in the window; `None` when no cell qualifies.
    pub eligible: Option<Rect>,
    pub cells: Vec<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct SparseNetLadder {
    pub m_cap: i64,
    pub levels: Vec<NetLevel>,
    /// Σ_{j≤i} (M/r_j)^{(d−1)/d} per level.
    pub condition: Vec<f64>,
    /// 4^{1−d}.
    pub condition_bound: f64,
}

impl SparseNetLadder {
    pub fn level(&self, i: usize) -> &NetLevel {
        &self.levels[i - 1]
    }

    pub fn a_net(&self, i: usize) -> &[Vec<i64>] {
        let l = self.level(i);
        if l.part == Side::A {
            &l.cells
        } else {
            &[]
        }
    }

    pub fn b_net(&self, i: usize) -> &[Vec<i64>] {
        let l = self.level(i);
        if l.part == Side::B {
            &l.cells
        } else {
            &[]
        }
    }

    /// Fraction of window cells within L∞ distance r of some net cell of any level.
    pub fn coverage(&self, window: &Rect, r: i64) -> f64 {
        let mut near = CellSet::new(window.clone());
        for l in &self.levels {
            for c in &l.cells {
                let ball = Rect::cube(c.iter().map(|x| x - r).collect(), 2 * r + 1);
                if let Some(b) = ball.intersect(window) {
                    for x in b.cells() {
                        near.insert(&x);
                    }
                }
            }
        }
        near.count() as f64 / window.volume() as f64
    }
}

/// Torus cut into n^k boxes of side 1/n ≥ ρ; a point within ρ of a centre lies in a box
/// adjacent to the centre's box.
struct CenterBuckets {
    n: usize,
    k: usize,
    map: HashMap<Vec<usize>, Vec<usize>>,
}

impl CenterBuckets {
    fn new(centers: &[TorusPoint], rho: f64) -> Self {
        let k = centers.first().map_or(1, |c| c.dim());
        let n = ((1.0 / rho).floor() as usize).clamp(1, 1 << 20);
        let mut map: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, c) in centers.iter().enumerate() {
            map.entry(Self::bucket(n, c.coords())).or_default().push(i);
        }
        CenterBuckets { n, k, map }
    }

    fn bucket(n: usize, p: &[f64]) -> Vec<usize> {
        p.iter().map(|&x| ((x * n as f64) as usize).min(n - 1)).collect()
    }

    fn for_each_near(&self, p: &[f64], mut f: impl FnMut(usize)) {
        let home = Self::bucket(self.n, p);
        let span: Vec<usize> = if self.n >= 3 { vec![self.n - 1, 0, 1] } else { (0..self.n).collect() };
        let mut key = vec![0; self.k];
        let total = span.len().pow(self.k as u32);
        for code in 0..total {
            let mut c = code;
            for a in 0..self.k {
                let s = span[c % span.len()];
                c /= span.len();
                key[a] = if self.n >= 3 { (home[a] + s) % self.n } else { s };
            }
            if let Some(v) = self.map.get(&key) {
                v.iter().for_each(|&i| f(i));
            }
        }
    }
}

pub fn part_of_level(i: usize) -> Side {
    if i % 2 == 1 {
        Side::B
    } else {
        Side::A
    }
}

/// Σ_{j≤i} (M/r_j)^{(d−1)/d} for every level.
pub fn condition_sums(radii: &[i64], m: i64, d: usize) -> Vec<f64> {
    let e = (d as f64 - 1.0) / d as f64;
    radii
        .iter()
        .scan(0.0, |acc, &r| {
            *acc += (m as f64 / r as f64).powf(e);
            Some(*acc)
        })
        .collect()
}

/// Nets from a seeded Kronecker sequence of torus centres: each level takes `candidates`
/// consecutive centres, collects the eligible cells of its part whose torus point lies within ρ of a
/// centre, and keeps them greedily (centre order, then row-major) while they stay (r + 4M)-sparse.
pub fn build_nets(
    win: &CosetWindow,
    radii: &[i64],
    horizons: &[i64],
    candidates: usize,
    seed: u64,
) -> Result<SparseNetLadder> {
    if radii.is_empty() || radii[0] < 1 || radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::arg("radii must be positive and non-decreasing"));
    }
    if horizons.len() != radii.len() || horizons.iter().any(|&j| j < 1) {
        return Err(Error::arg("one positive horizon per level is required"));
    }
    let k = win.sys.k;
    let m = win.m_cap() as i64;
    let mut rng = substream(seed, STREAM_NETS);
    let alpha: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let start: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let mut t = 0u64;
    let w = &win.window;
    let mut levels = Vec::with_capacity(radii.len());
    for (l, (&r, &j)) in radii.iter().zip(horizons).enumerate() {
        let level = l + 1;
        let part = part_of_level(level);
        let sparsity = r + 4 * m;
        let rho = build_sparse_coloring(&win.sys, sparsity as u64)?.min_distance / 2.0;
        let bits = match part {
            Side::A => &win.a_bits,
            Side::B => &win.b_bits,
        };
        let eligible = w.shrink(j + m);
        let centers: Vec<TorusPoint> = (0..candidates)
            .map(|_| {
                t += 1;
                TorusPoint::new((0..k).map(|a| wrap(start[a] + t as f64 * alpha[a])).collect())
            })
            .collect();
        let mut kept: Vec<Vec<i64>> = Vec::new();
        if let Some(e) = &eligible {
            let buckets = CenterBuckets::new(&centers, rho);
            // (centre, eligible index) for every hit, then greedy in centre order, row-major within.
            let mut hits: Vec<(usize, usize)> = (0..e.volume())
                .into_par_iter()
                .flat_map_iter(|i| {
                    let c = e.coords(i);
                    let wi = w.index_unchecked(&c);
                    let mut found = Vec::new();
                    if bits.get(wi) {
                        let mut p = vec![0.0; k];
                        win.point_of_index(wi, &mut p);
                        buckets.for_each_near(&p, |ci| {
                            if torus_dist_inf(&p, centers[ci].coords()) < rho {
                                found.push((ci, i));
                            }
                        });
                    }
                    found
                })
                .collect();
            hits.sort_unstable();
            for (_, i) in hits {
                let c = e.coords(i);
                if kept.iter().all(|q| linf(q, &c) > sparsity) {
                    kept.push(c);
                }
            }
        }
        levels.push(NetLevel { level, radius: r, horizon: j, part, ball_radius: rho, centers, eligible, cells: kept });
    }
    let d = win.d();
    Ok(SparseNetLadder {
        m_cap: m,
        condition: condition_sums(radii, m, d),
        condition_bound: 4f64.powi(1 - d as i32),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_free_system, Shape};
    use crate::window::extract_window;

    fn win(a: &Shape) -> CosetWindow {
        let sys = sample_free_system(4, 2, 2, 2).unwrap();
        let b = Shape::disk(vec![0.3, 0.3], 0.25);
        extract_window(a, &b, &sys, &TorusPoint::new(vec![0.1, 0.9]), &Rect::centered_cube(2, 200)).unwrap()
    }

    #[test]
    fn parity_and_condition() {
        assert_eq!(part_of_level(1), Side::B);
        assert_eq!(part_of_level(2), Side::A);
        let c = condition_sums(&[4, 16], 1, 2);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_a_gives_empty_a_nets() {
        let w = win(&Shape::empty(2));
        let nets = build_nets(&w, &[8, 8, 16], &[16, 16, 32], 40, 1).unwrap();
        assert!(nets.a_net(2).is_empty());
        assert!(nets.a_net(1).is_empty() && nets.b_net(2).is_empty());
    }

    #[test]
    fn nets_are_sparse_and_eligible() {
        let w = win(&Shape::full(2));
        let nets = build_nets(&w, &[6, 10], &[12, 20], 200, 3).unwrap();
        let mut total = 0;
        for l in &nets.levels {
            let sp = l.radius + 4 * nets.m_cap;
            for x in 0..l.cells.len() {
                assert!(l.eligible.as_ref().unwrap().contains(&l.cells[x]));
                for y in x + 1..l.cells.len() {
                    assert!(linf(&l.cells[x], &l.cells[y]) > sp);
                }
            }
            total += l.cells.len();
        }
        assert!(total > 0);
        let cov = nets.coverage(&w.window, 10);
        assert!((0.0..=1.0).contains(&cov));
        assert!(build_nets(&w, &[10, 6], &[1, 1], 1, 0).is_err());
    }

    #[test]
    fn bucketed_scan_matches_naive_scan() {
        let w = win(&Shape::full(2));
        let (radii, horizons) = ([6, 10, 10], [12, 20, 30]);
        let nets = build_nets(&w, &radii, &horizons, 60, 9).unwrap();
        for l in &nets.levels {
            let e = l.eligible.as_ref().unwrap();
            let sp = l.radius + 4 * nets.m_cap;
            let mut kept: Vec<Vec<i64>> = Vec::new();
            for y in &l.centers {
                for c in e.cells() {
                    let wi = w.window.index_unchecked(&c);
                    let mut p = vec![0.0; 2];
                    w.point_of_index(wi, &mut p);
                    let on = if l.part == Side::A { w.a_bits.get(wi) } else { w.b_bits.get(wi) };
                    if on && torus_dist_inf(&p, y.coords()) < l.ball_radius && kept.iter().all(|q| linf(q, &c) > sp) {
                        kept.push(c);
                    }
                }
            }
            assert_eq!(kept, l.cells);
        }
    }
}
