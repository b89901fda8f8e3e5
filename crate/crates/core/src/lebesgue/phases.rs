use rayon::prelude::*;

use super::voronoi::GridDomain;
use crate::lattice::{Rect, RectTree};
use crate::matching::local::LocalGraph;
use crate::matching::{load_matching, Matching, TranslationGraph};
use crate::window::CosetWindow;

/// Offset rotation for the greedy pass. Zero for the real pipeline; the mutant keys it on
/// absolute window coordinates, which breaks translation equivariance on purpose.
pub(crate) fn rotation(r: &Rect, m: i64, mutant: bool) -> usize {
    if !mutant {
        return 0;
    }
    let n = (2 * m + 1).pow(r.dim() as u32);
    r.low[0].rem_euclid(n) as usize
}

fn pairs_as_indices(lg: &LocalGraph, r: &Rect, w: &Rect) -> Vec<(usize, usize)> {
    lg.pairs_in(r).into_iter().map(|(a, b)| (w.index_unchecked(&a), w.index_unchecked(&b))).collect()
}

fn canonical_pairs(g: &TranslationGraph, q: &Rect, mutant: bool) -> Vec<(usize, usize)> {
    let mut lg = g.local(q);
    lg.canonical(q, rotation(q, g.m_cap as i64, mutant));
    pairs_as_indices(&lg, q, g.window())
}

fn insert_all(m: &mut Matching, pairs: Vec<Vec<(usize, usize)>>) {
    for (a, b) in pairs.into_iter().flatten() {
        m.insert_indices(a, b);
    }
}

/// M₀: a canonical maximum matching inside each level-0 cube.
pub fn init_m0(win: &CosetWindow, dom: &GridDomain) -> Matching {
    init_m0_with(win, dom, false)
}

pub(crate) fn init_m0_with(win: &CosetWindow, dom: &GridDomain, mutant: bool) -> Matching {
    let g = TranslationGraph::from_window(win);
    let pairs: Vec<_> = dom.cubes.par_iter().map(|q| canonical_pairs(&g, &q.rect, mutant)).collect();
    let mut m = Matching::new(win.window.clone(), win.m_cap());
    insert_all(&mut m, pairs);
    m
}

/// M_i′: the edges of `m` with both ends in one cube of `dom`. Returns the number of changed cells.
pub fn prune_cross_cube(m: &Matching, dom: &GridDomain) -> (Matching, usize) {
    let mut out = m.clone();
    let removed = out.retain(|i, j| dom.same_cube(i, j));
    (out, 2 * removed)
}

/// A cube is dirty when it meets a cell outside the previous domain or cells of two previous seeds.
pub fn dirty_cubes(dom: &GridDomain, dom_prev: &GridDomain) -> Vec<bool> {
    let w = &dom.window;
    dom.cubes
        .par_iter()
        .map(|q| {
            let mut seed = None;
            let mut c = vec![0; w.dim()];
            for j in 0..q.rect.volume() {
                q.rect.coords_into(j, &mut c);
                let k = dom_prev.cube_of[w.index_unchecked(&c)];
                if k == super::voronoi::NO_CUBE {
                    return true;
                }
                let s = dom_prev.cubes[k as usize].seed;
                if *seed.get_or_insert(s) != s {
                    return true;
                }
            }
            false
        })
        .collect()
}

/// M_i″: dirty cubes rematched from scratch, clean cubes untouched.
pub fn rematch_dirty_cubes(
    win: &CosetWindow,
    m1: &Matching,
    dom: &GridDomain,
    dom_prev: &GridDomain,
) -> (Matching, Vec<bool>) {
    rematch_with(win, m1, dom, dom_prev, false)
}

pub(crate) fn rematch_with(
    win: &CosetWindow,
    m1: &Matching,
    dom: &GridDomain,
    dom_prev: &GridDomain,
    mutant: bool,
) -> (Matching, Vec<bool>) {
    let dirty = dirty_cubes(dom, dom_prev);
    let g = TranslationGraph::from_window(win);
    let pairs: Vec<_> = dom
        .cubes
        .par_iter()
        .zip(&dirty)
        .filter(|(_, &d)| d)
        .map(|(q, _)| canonical_pairs(&g, &q.rect, mutant))
        .collect();
    let mut m2 = m1.clone();
    m2.retain(|i, _| dom.cube_of[i] == super::voronoi::NO_CUBE || !dirty[dom.cube_of[i] as usize]);
    insert_all(&mut m2, pairs);
    (m2, dirty)
}

/// Result of refining one clean cube.
#[derive(Clone, Debug, Default)]
pub struct RefineOutcome {
    /// Final edges inside the cube as (A index, B index) in the window.
    pub pairs: Vec<(usize, usize)>,
    /// Basic rectangles that were not inherited and got a fresh matching.
    pub fresh_rects: usize,
    /// `flips[ℓ]` = augmentations performed in the pass for level ℓ (index 0 unused).
    pub flips: Vec<usize>,
    /// Path cap of the final pass over the whole cube.
    pub root_cap: usize,
}

/// Path-length cap for the pass at level ℓ: ⌊(2^{h−ℓ+1} + 1/2)·N_{i−1}⌋.
pub fn path_cap(h: u32, l: u32, n_prev: i64) -> usize {
    ((1i64 << (h - l + 1)) * n_prev + n_prev / 2) as usize
}

/// Refines M″ inside the clean cube `tree.root`. Basic rectangles that are not whole inherited
/// cubes are matched afresh; then each level's rectangles are augmented with bounded paths,
/// finest first, scanning free A-cells in row-major order after every flip.
pub fn refine_cube(win: &CosetWindow, m2: &Matching, tree: &RectTree) -> RefineOutcome {
    refine_cube_with(win, m2, tree, false)
}

pub(crate) fn refine_cube_with(win: &CosetWindow, m2: &Matching, tree: &RectTree, mutant: bool) -> RefineOutcome {
    let g = TranslationGraph::from_window(win);
    let q = &tree.root;
    let mut lg = g.local(q);
    load_matching(&mut lg, m2);
    let n_prev = tree.n_prev;
    let mut fresh_rects = 0;
    for node in tree.basic() {
        // Inside a clean cube, a basic rectangle is inherited exactly when it is a full grid cube.
        if node.rect.sides.iter().any(|&s| s != n_prev) {
            lg.canonical(&node.rect, rotation(&node.rect, g.m_cap as i64, mutant));
            fresh_rects += 1;
        }
    }
    let h = tree.h;
    let mut flips = vec![0; h as usize + 1];
    for l in (1..=h).rev() {
        let cap = path_cap(h, l, n_prev);
        for node in tree.level(l - 1) {
            lg.set_mask(&node.rect);
            loop {
                let starts = lg.free_a_cells(&node.rect);
                if starts.is_empty() {
                    break;
                }
                match lg.shortest_path(&starts, cap) {
                    Some(p) => {
                        lg.flip(&p);
                        flips[l as usize] += 1;
                    }
                    None => break,
                }
            }
        }
    }
    RefineOutcome { pairs: pairs_as_indices(&lg, q, g.window()), fresh_rects, flips, root_cap: path_cap(h, 1, n_prev) }
}
