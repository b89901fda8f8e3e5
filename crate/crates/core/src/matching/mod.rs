pub(crate) mod local;
mod matching;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dist_ball, linf, offsets_row_major, CellSet, Rect};
use crate::rng::{substream, STREAM_SAMPLER};
use crate::window::CosetWindow;
use local::{LocalGraph, NIL};
pub use matching::{Matching, NONE};

/// Bipartite graph on A × B with edges of L∞ length at most M.
#[derive(Clone, Copy, Debug)]
pub struct TranslationGraph<'a> {
    pub a: &'a CellSet,
    pub b: &'a CellSet,
    pub m_cap: u32,
}

impl<'a> TranslationGraph<'a> {
    pub fn new(a: &'a CellSet, b: &'a CellSet, m_cap: u32) -> Result<Self> {
        if a.rect() != b.rect() {
            return Err(Error::arg("A and B must share one window"));
        }
        Ok(TranslationGraph { a, b, m_cap })
    }

    pub fn from_window(win: &'a CosetWindow) -> Self {
        TranslationGraph { a: &win.a_bits, b: &win.b_bits, m_cap: win.sys.m_cap }
    }

    pub fn window(&self) -> &Rect {
        self.a.rect()
    }

    pub fn is_edge(&self, a: &[i64], b: &[i64]) -> bool {
        self.a.contains(a) && self.b.contains(b) && linf(a, b) <= self.m_cap as i64
    }

    /// B-neighbours of an A-cell in row-major offset order.
    pub fn neighbours_of_a(&self, a: &[i64]) -> Vec<Vec<i64>> {
        offsets_row_major(a.len(), self.m_cap as i64)
            .into_iter()
            .map(|o| a.iter().zip(&o).map(|(x, y)| x + y).collect::<Vec<i64>>())
            .filter(|b| self.b.contains(b))
            .collect()
    }

    pub(crate) fn local(&self, region: &Rect) -> LocalGraph {
        LocalGraph::new(region, self.m_cap as i64, |c| (self.a.contains(c), self.b.contains(c)))
    }
}

/// Loads the edges of `m` inside the region; cells matched across the region edge become unavailable.
pub(crate) fn load_matching(g: &mut LocalGraph, m: &Matching) {
    let w = m.window().clone();
    let region = g.region.clone();
    let mut c = vec![0; region.dim()];
    for i in 0..region.volume() {
        region.coords_into(i, &mut c);
        let Some(wi) = w.index_of(&c) else { continue };
        let p = g.pidx(&c);
        if let Some(bj) = m.partner_of_a(wi) {
            let bc = w.coords(bj);
            if region.contains(&bc) {
                let q = g.pidx(&bc);
                if g.mate_b[q as usize] == NIL {
                    g.add_edge(p, q);
                }
            } else {
                g.is_a[p as usize] = false;
            }
        }
        if let Some(aj) = m.partner_of_b(wi) {
            if !region.contains(&w.coords(aj)) {
                g.is_b[p as usize] = false;
            }
        }
    }
}

fn write_region(m: &mut Matching, g: &LocalGraph, r: &Rect) {
    let w = m.window().clone();
    for (a, b) in g.pairs_in(r) {
        m.insert_indices(w.index_unchecked(&a), w.index_unchecked(&b));
    }
}

/// Maximum matching of G[R,R]: greedy first-free-neighbour pass, then Hopcroft–Karp phases.
pub fn canonical_max_matching(g: &TranslationGraph, r: &Rect) -> Result<Matching> {
    let r = g
        .window()
        .intersect(r)
        .filter(|x| x == r)
        .ok_or_else(|| Error::arg("rectangle must lie inside the window"))?;
    let mut lg = g.local(&r);
    lg.canonical(&r, 0);
    let mut m = Matching::new(g.window().clone(), g.m_cap);
    write_region(&mut m, &lg, &r);
    Ok(m)
}

/// Alternating path a0, b0, a1, b1, ..., b_t (window coordinates).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentingPath {
    pub cells: Vec<Vec<i64>>,
}

impl AugmentingPath {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Shortest augmenting path inside R of length ≤ max_len, by breadth-first search.
pub fn bounded_augmenting_path(
    g: &TranslationGraph,
    r: &Rect,
    m: &Matching,
    max_len: usize,
) -> Option<AugmentingPath> {
    let r = g.window().intersect(r)?;
    let mut lg = g.local(&r);
    load_matching(&mut lg, m);
    let starts = lg.free_a_cells(&r);
    lg.shortest_path(&starts, max_len)
        .map(|p| AugmentingPath { cells: p.into_iter().map(|x| lg.coords(x)).collect() })
}

/// Flips an augmenting path; the result is one edge larger.
pub fn flip(g: &TranslationGraph, m: &Matching, path: &AugmentingPath) -> Result<Matching> {
    let cells = &path.cells;
    if cells.len() < 2 || cells.len() % 2 != 0 {
        return Err(Error::arg("an augmenting path has an odd number of edges"));
    }
    let w = m.window();
    let idx = |c: &[i64]| w.index_of(c).ok_or_else(|| Error::arg(format!("{c:?} outside window")));
    let first = idx(&cells[0])?;
    let last = idx(&cells[cells.len() - 1])?;
    if m.partner_of_a(first).is_some() || m.partner_of_b(last).is_some() {
        return Err(Error::arg("path endpoints must be unmatched"));
    }
    for t in 0..cells.len() - 1 {
        let (a, b) = if t % 2 == 0 { (&cells[t], &cells[t + 1]) } else { (&cells[t + 1], &cells[t]) };
        if !g.is_edge(a, b) {
            return Err(Error::arg(format!("{a:?} -> {b:?} is not an edge")));
        }
        let matched = m.partner_of_a(idx(a)?) == Some(idx(b)?);
        if matched != (t % 2 == 1) {
            return Err(Error::arg("path does not alternate between free and matched edges"));
        }
    }
    let mut out = m.clone();
    for t in (1..cells.len() - 1).step_by(2) {
        out.remove_a(idx(&cells[t + 1])?);
    }
    for t in (0..cells.len()).step_by(2) {
        out.insert(&cells[t], &cells[t + 1])?;
    }
    debug_assert_eq!(out.size(), m.size() + 1);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A set X on one side whose neighbourhood is smaller than X.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallCertificate {
    pub side: Side,
    pub set: Vec<Vec<i64>>,
    pub neighbourhood: Vec<Vec<i64>>,
}

/// Checks that every `left` cell of the region can be matched into `right` cells of the region.
pub(crate) fn one_side_cover(
    region: &Rect,
    m: i64,
    left: impl Fn(&[i64]) -> bool,
    right: impl Fn(&[i64]) -> bool,
) -> std::result::Result<(), (Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let mut lg = LocalGraph::new(region, m, |c| (left(c), right(c)));
    let cells = lg.a_cells(region);
    lg.greedy(&cells, 0);
    lg.hopcroft_karp(&cells);
    if cells.iter().all(|&p| lg.mate_a[p as usize] != NIL) {
        return Ok(());
    }
    let (za, zb) = lg.koenig_sets(&cells);
    let mut x: Vec<Vec<i64>> = za.into_iter().map(|p| lg.coords(p)).collect();
    let mut gx: Vec<Vec<i64>> = zb.into_iter().map(|p| lg.coords(p)).collect();
    x.sort();
    gx.sort();
    Err((x, gx))
}

/// Decides whether one matching of G[R,R] covers `required_a` and `required_b` simultaneously.
///
/// Coverage of both sides at once is equivalent to coverage of each side separately, so two
/// one-sided searches suffice; a failed search yields its alternating-reachable set as certificate.
pub fn hall_deficiency(
    g: &TranslationGraph,
    r: &Rect,
    required_a: &CellSet,
    required_b: &CellSet,
) -> Option<HallCertificate> {
    let m = g.m_cap as i64;
    let res_a = one_side_cover(r, m, |c| required_a.contains(c), |c| g.b.contains(c) && r.contains(c));
    let res_a = res_a.and_then(|_| {
        // Required cells that are not A-cells can never be covered.
        match required_a.iter_cells().find(|c| !(g.a.contains(c) && r.contains(c))) {
            Some(c) => Err((vec![c], vec![])),
            None => Ok(()),
        }
    });
    if let Err((set, neighbourhood)) = res_a {
        return Some(HallCertificate { side: Side::A, set, neighbourhood });
    }
    let res_b = one_side_cover(r, m, |c| required_b.contains(c), |c| g.a.contains(c) && r.contains(c));
    let res_b = res_b.and_then(|_| match required_b.iter_cells().find(|c| !(g.b.contains(c) && r.contains(c))) {
        Some(c) => Err((vec![c], vec![])),
        None => Ok(()),
    });
    if let Err((set, neighbourhood)) = res_b {
        return Some(HallCertificate { side: Side::B, set, neighbourhood });
    }
    None
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionSample {
    pub size: usize,
    pub gamma: usize,
    pub target: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionAudit {
    pub min_margin: f64,
    pub samples: Vec<ExpansionSample>,
}

/// Worst margin |Γ(X)| − min(|X| + 10d|X|^{(d−1)/d}, |B∩R|/2) over sampled connected X ⊆ A∩R.
pub fn expansion_audit(g: &TranslationGraph, r: &Rect, sample_sets: usize, seed: u64) -> Result<ExpansionAudit> {
    if r.balance() > 3.0 {
        return Err(Error::arg("expansion audit needs a 3-balanced rectangle"));
    }
    let d = r.dim();
    let a_in: Vec<Vec<i64>> = r.cells().filter(|c| g.a.contains(c)).collect();
    if a_in.is_empty() {
        return Err(Error::arg("rectangle holds no A-cells"));
    }
    let b_total = r.cells().filter(|c| g.b.contains(c)).count();
    let mut rng = substream(seed, STREAM_SAMPLER);
    let mut samples = Vec::with_capacity(sample_sets);
    let mut min_margin = f64::INFINITY;
    while samples.len() < sample_sets {
        // A lattice-connected blob grown by a random walk; X is its A-part.
        let mut blob = CellSet::new(r.clone());
        let mut c = a_in[rng.random_range(0..a_in.len())].clone();
        blob.insert(&c);
        let steps = rng.random_range(0..=r.volume() / 2);
        for _ in 0..steps {
            let ax = rng.random_range(0..d);
            let s = if rng.random::<bool>() { 1 } else { -1 };
            c[ax] = (c[ax] + s).clamp(r.low[ax], r.high(ax) - 1);
            blob.insert(&c);
        }
        let x = CellSet::from_fn(r.clone(), |q| blob.contains(q) && g.a.contains(q));
        let size = x.count();
        if size == 0 {
            continue;
        }
        let ball = dist_ball(&x, g.m_cap as i64);
        let gamma = r.cells().filter(|q| ball.contains(q) && g.b.contains(q)).count();
        let df = d as f64;
        let target = (size as f64 + 10.0 * df * (size as f64).powf((df - 1.0) / df)).min(b_total as f64 / 2.0);
        min_margin = min_margin.min(gamma as f64 - target);
        samples.push(ExpansionSample { size, gamma, target });
    }
    Ok(ExpansionAudit { min_margin, samples })
}

#[cfg(test)]
mod tests;
