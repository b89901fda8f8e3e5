//! Multi-scale matching on Voronoi grid domains: M₀ inside small cubes, then per level a prune,
//! a rematch of dirty cubes and a bounded-augmentation refine of clean cubes.

mod phases;
mod schedule;
mod voronoi;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use phases::{
    dirty_cubes, init_m0, path_cap, prune_cross_cube, refine_cube, rematch_dirty_cubes, RefineOutcome,
};
pub use schedule::{build_schedule, summability_partial_sums, validate_ladder, GridSchedule};
pub use voronoi::{grid_domain, integer_voronoi, DomainCube, GridDomain, Ownership, NO_CUBE, NO_OWNER};

use crate::error::{Error, Result};
use crate::geometry::{coset_point, FreeVectorSystem, Shape, TorusPoint};
use crate::lattice::{build_rect_tree, CellSet, Rect};
use crate::matching::{load_matching, Matching, TranslationGraph, NONE};
use crate::window::{extract_window, CosetWindow};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseFractions {
    /// Cells matched by M₀ (level 0 only).
    pub init: f64,
    pub prune: f64,
    pub rematch: f64,
    pub refine: f64,
    /// Cells whose partner differs between M_{i−1} and M_i.
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub level: usize,
    pub n_cube: i64,
    pub seeds: usize,
    pub fallback: bool,
    /// Accumulated taint margin through this level.
    pub margin: i64,
    pub uncovered_fraction: f64,
    pub cubes: usize,
    pub dirty_cubes: usize,
    pub fresh_rects: usize,
    /// Augmentations per refine pass, indexed by tree level.
    pub flips: Vec<usize>,
    pub changed: PhaseFractions,
    /// Unmatched A-cells over A-cells, on the core of the whole run.
    pub unmatched_fraction: f64,
    pub unmatched_a_core: usize,
    pub a_core: usize,
    /// Max and mean of D(Q) = ||A∩Q| − |B∩Q|| over the cubes.
    pub max_cube_discrepancy: usize,
    pub mean_cube_discrepancy: f64,
    pub max_cube_unmatched: usize,
    /// Cubes with unmatched cells of both kinds.
    pub one_part_violations: usize,
    /// Cubes whose unmatched count exceeds D(Q).
    pub over_bound_cubes: usize,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Tie-break greedy passes by absolute coordinates (non-equivariant on purpose).
    pub mutant: bool,
    pub check_invariants: bool,
    pub deadline: Option<Instant>,
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub matching: Matching,
    pub reports: Vec<IterationReport>,
    /// Per window cell, the last level at which its partner changed.
    pub stable_since: Vec<u8>,
    pub margin: i64,
    pub core: Rect,
    /// Set when a deadline cut the run short; reports cover the finished levels.
    pub aborted: Option<String>,
}

/// Parameters of the whole construction, as used by the equivariance harness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueParams {
    pub ladder: Vec<i64>,
    pub levels: usize,
    #[serde(default)]
    pub mutant: bool,
    #[serde(default = "yes")]
    pub check_invariants: bool,
}

fn yes() -> bool {
    true
}

struct CubeCount {
    na: usize,
    nb: usize,
    matched: usize,
}

fn cube_counts(win: &CosetWindow, m: &Matching, dom: &GridDomain) -> Vec<CubeCount> {
    let w = &win.window;
    dom.cubes
        .par_iter()
        .map(|q| {
            let mut cc = CubeCount { na: 0, nb: 0, matched: 0 };
            let mut c = vec![0; w.dim()];
            for j in 0..q.rect.volume() {
                q.rect.coords_into(j, &mut c);
                let i = w.index_unchecked(&c);
                cc.na += win.a_bits.get(i) as usize;
                cc.nb += win.b_bits.get(i) as usize;
                cc.matched += (m.a_pieces()[i] != NONE) as usize;
            }
            cc
        })
        .collect()
}

/// Exact per-level invariants: valid matching, edges inside cubes, no augmenting path of length
/// at most the cube side inside any cube.
fn check_level(win: &CosetWindow, m: &Matching, dom: &GridDomain) -> Result<()> {
    m.validate(&win.a_bits, &win.b_bits)?;
    if let Some((i, j)) = m.edges().find(|&(i, j)| !dom.same_cube(i, j)) {
        return Err(Error::invariant(format!(
            "level {} edge {:?} -> {:?} leaves its cube",
            dom.level,
            dom.window.coords(i),
            dom.window.coords(j)
        )));
    }
    let g = TranslationGraph::from_window(win);
    let bad = dom.cubes.par_iter().find_any(|q| {
        let mut lg = g.local(&q.rect);
        load_matching(&mut lg, m);
        let starts = lg.free_a_cells(&q.rect);
        lg.shortest_path(&starts, q.rect.sides[0] as usize).is_some()
    });
    if let Some(q) = bad {
        return Err(Error::invariant(format!(
            "cube at {:?} still has an augmenting path of length at most {}",
            q.rect.low, q.rect.sides[0]
        )));
    }
    Ok(())
}

fn fraction(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        n as f64 / total as f64
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    win: &CosetWindow,
    sch: &GridSchedule,
    level: usize,
    dom: &GridDomain,
    m: &Matching,
    core: &Rect,
    changed: PhaseFractions,
    dirty: usize,
    fresh_rects: usize,
    flips: Vec<usize>,
) -> IterationReport {
    let counts = cube_counts(win, m, dom);
    let mut rep = IterationReport {
        level,
        n_cube: dom.n_cube,
        seeds: sch.seeds[level].count(),
        fallback: sch.is_fallback(level),
        margin: sch.margin(level, win.m_cap() as i64),
        uncovered_fraction: fraction(dom.uncovered.count(), win.window.volume()),
        cubes: dom.cubes.len(),
        dirty_cubes: dirty,
        fresh_rects,
        flips,
        changed,
        unmatched_fraction: 0.0,
        unmatched_a_core: 0,
        a_core: 0,
        max_cube_discrepancy: 0,
        mean_cube_discrepancy: 0.0,
        max_cube_unmatched: 0,
        one_part_violations: 0,
        over_bound_cubes: 0,
    };
    let mut sum_disc = 0;
    for cc in &counts {
        let disc = cc.na.abs_diff(cc.nb);
        let (ua, ub) = (cc.na - cc.matched, cc.nb - cc.matched);
        rep.max_cube_discrepancy = rep.max_cube_discrepancy.max(disc);
        rep.max_cube_unmatched = rep.max_cube_unmatched.max(ua + ub);
        rep.one_part_violations += (ua > 0 && ub > 0) as usize;
        rep.over_bound_cubes += (ua + ub > disc) as usize;
        sum_disc += disc;
    }
    rep.mean_cube_discrepancy = fraction(sum_disc, counts.len());
    let w = &win.window;
    for c in core.cells() {
        let i = w.index_unchecked(&c);
        if win.a_bits.get(i) {
            rep.a_core += 1;
            rep.unmatched_a_core += (m.a_pieces()[i] == NONE) as usize;
        }
    }
    rep.unmatched_fraction = fraction(rep.unmatched_a_core, rep.a_core);
    rep
}

fn domain(sch: &GridSchedule, level: usize, w: &Rect) -> Result<GridDomain> {
    let vor = integer_voronoi(&sch.seeds[level], w)?;
    grid_domain(level, sch.ladder[level], &vor)
}

/// Runs M₀ and then levels 1..=I of the schedule.
pub fn run_pipeline(win: &CosetWindow, sch: &GridSchedule, opts: &PipelineOptions) -> Result<PipelineRun> {
    let w = &win.window;
    let m_cap = win.m_cap() as i64;
    let levels = sch.levels() - 1;
    let margin = sch.margin(levels, m_cap);
    let core = w.shrink(margin).ok_or_else(|| {
        Error::arg(format!(
            "window side {} is too small for the taint margin {margin} accumulated through level {levels}",
            w.min_side()
        ))
    })?;
    let vol = w.volume();
    let mut stable_since = vec![0u8; vol];

    let mut dom_prev = domain(sch, 0, w)?;
    let mut m = phases::init_m0_with(win, &dom_prev, opts.mutant);
    if opts.check_invariants {
        check_level(win, &m, &dom_prev)?;
    }
    let init = fraction(m.changed_cells(&Matching::new(w.clone(), m.m_cap())).count(), vol);
    let changed = PhaseFractions { init, total: init, ..Default::default() };
    let mut reports = vec![report(win, sch, 0, &dom_prev, &m, &core, changed, 0, 0, vec![])];
    log::info!("level 0: unmatched fraction {:.5}", reports[0].unmatched_fraction);

    for i in 1..=levels {
        if let Some(dl) = opts.deadline {
            if Instant::now() > dl {
                let aborted = Some(format!("deadline reached before level {i}"));
                return Ok(PipelineRun { matching: m, reports, stable_since, margin, core, aborted });
            }
        }
        let dom = domain(sch, i, w)?;
        let (m1, _) = prune_cross_cube(&m, &dom);
        let (m2, dirty) = phases::rematch_with(win, &m1, &dom, &dom_prev, opts.mutant);

        let n_prev = sch.ladder[i - 1];
        let outcomes: Vec<RefineOutcome> = dom
            .cubes
            .par_iter()
            .zip(&dirty)
            .filter(|(_, &d)| !d)
            .map(|(q, _)| {
                let k = dom_prev.cube_of[w.index_unchecked(&q.rect.low)] as usize;
                let tree = build_rect_tree(&q.rect, &dom_prev.cubes[k].rect.low, n_prev)?;
                Ok(phases::refine_cube_with(win, &m2, &tree, opts.mutant))
            })
            .collect::<Result<_>>()?;
        let mut m3 = m2.clone();
        m3.retain(|a, _| dom.cube_of[a] == NO_CUBE || dirty[dom.cube_of[a] as usize]);
        let mut fresh_rects = 0;
        let mut flips = Vec::new();
        for out in outcomes {
            fresh_rects += out.fresh_rects;
            if flips.len() < out.flips.len() {
                flips.resize(out.flips.len(), 0);
            }
            for (t, f) in out.flips.iter().enumerate() {
                flips[t] += f;
            }
            for (a, b) in out.pairs {
                m3.insert_indices(a, b);
            }
        }

        let ch_prune = m.changed_cells(&m1);
        let ch_rematch = m1.changed_cells(&m2);
        let ch_refine = m2.changed_cells(&m3);
        let ch_total = m.changed_cells(&m3);
        let union = ch_prune.union(&ch_rematch).union(&ch_refine);
        if ch_total.difference(&union).count() != 0 {
            return Err(Error::invariant(format!("level {i}: change set escapes the three phase change sets")));
        }
        if opts.check_invariants {
            check_level(win, &m3, &dom)?;
        }
        for c in ch_total.iter_indices() {
            stable_since[c] = i as u8;
        }
        let changed = PhaseFractions {
            init: 0.0,
            prune: fraction(ch_prune.count(), vol),
            rematch: fraction(ch_rematch.count(), vol),
            refine: fraction(ch_refine.count(), vol),
            total: fraction(ch_total.count(), vol),
        };
        let n_dirty = dirty.iter().filter(|&&d| d).count();
        let rep = report(win, sch, i, &dom, &m3, &core, changed, n_dirty, fresh_rects, flips);
        log::info!("level {i}: unmatched fraction {:.5}", rep.unmatched_fraction);
        reports.push(rep);
        m = m3;
        dom_prev = dom;
    }
    Ok(PipelineRun { matching: m, reports, stable_since, margin, core, aborted: None })
}

/// Builds the schedule and runs the pipeline.
pub fn run_lebesgue(win: &CosetWindow, params: &LebesgueParams, deadline: Option<Instant>) -> Result<PipelineRun> {
    let sch = build_schedule(win, &params.ladder, params.levels)?;
    let opts = PipelineOptions { mutant: params.mutant, check_invariants: params.check_invariants, deadline };
    run_pipeline(win, &sch, &opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub shift: Vec<i64>,
    pub equal: bool,
    pub compared: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<Vec<i64>>,
}

/// Runs the pipeline from `u` and from `u + shift·x` and compares the matchings cell by cell on
/// the overlap of the two untainted cores: run 2 at n must equal run 1 at n + shift.
pub fn equivariance_check(
    shape_a: &Shape,
    shape_b: &Shape,
    sys: &FreeVectorSystem,
    u: &TorusPoint,
    shift: &[i64],
    window: &Rect,
    params: &LebesgueParams,
) -> Result<EquivarianceReport> {
    if shift.len() != sys.d {
        return Err(Error::DimensionMismatch { expected: sys.d, got: shift.len() });
    }
    let win1 = extract_window(shape_a, shape_b, sys, u, window)?;
    let u2 = coset_point(u, shift, sys)?;
    let win2 = extract_window(shape_a, shape_b, sys, &u2, window)?;
    let r1 = run_lebesgue(&win1, params, None)?;
    let r2 = run_lebesgue(&win2, params, None)?;
    let back: Vec<i64> = shift.iter().map(|s| -s).collect();
    let overlap = r1
        .core
        .intersect(&r1.core.translate(&back))
        .ok_or_else(|| Error::arg("shifted cores do not overlap"))?;
    let w = &win1.window;
    let mut rep = EquivarianceReport { shift: shift.to_vec(), equal: true, compared: 0, mismatches: 0, first_mismatch: None };
    let mut moved = vec![0; w.dim()];
    for n in overlap.cells() {
        for a in 0..n.len() {
            moved[a] = n[a] + shift[a];
        }
        let (i2, i1) = (w.index_unchecked(&n), w.index_unchecked(&moved));
        rep.compared += 1;
        let same = r2.matching.a_pieces()[i2] == r1.matching.a_pieces()[i1]
            && r2.matching.b_pieces()[i2] == r1.matching.b_pieces()[i1];
        if !same {
            rep.mismatches += 1;
            rep.first_mismatch.get_or_insert(n);
        }
    }
    rep.equal = rep.mismatches == 0;
    Ok(rep)
}

/// Cells of the window that are A-cells and unmatched, restricted to a rectangle.
pub fn unmatched_a(win: &CosetWindow, m: &Matching, r: &Rect) -> CellSet {
    CellSet::from_fn(win.window.clone(), |c| {
        r.contains(c) && {
            let i = win.window.index_unchecked(c);
            win.a_bits.get(i) && m.a_pieces()[i] == NONE
        }
    })
}

#[cfg(test)]
mod tests;
