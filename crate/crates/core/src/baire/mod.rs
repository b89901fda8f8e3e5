//! Greedy matching along sparse nets, with extension feasibility checked on finite balls.

pub mod extend;
pub mod greedy;
pub mod holes;
pub mod nets;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use extend::{extendable_oracle, extension_certificate};
pub use greedy::{greedy_step, ExtendFailure, StepOutcome};
pub use holes::{fill_hole, hole_analysis, private_set_audit, FillOutcome, Hole, HoleReport, HoleSummary, PrivateSet, PrivateSetAudit};
pub use nets::{build_nets, condition_sums, part_of_level, NetLevel, SparseNetLadder};

use crate::error::{Error, Result};
use crate::lattice::Rect;
use crate::matching::{one_side_cover, HallCertificate, Matching, Side};
use crate::window::{build_sparse_coloring, CosetWindow};

fn default_candidates() -> usize {
    16
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaireParams {
    pub radii: Vec<i64>,
    /// Oracle horizon per level; 2·r_i when absent.
    #[serde(default)]
    pub horizons: Option<Vec<i64>>,
    /// Torus centres tried per level.
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub hall_check: bool,
}

impl BaireParams {
    pub fn horizons(&self) -> Vec<i64> {
        self.horizons.clone().unwrap_or_else(|| self.radii.iter().map(|r| 2 * r).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HallCheck {
    pub region: Rect,
    pub required_a: usize,
    pub required_b: usize,
    pub feasible: bool,
    pub certificate: Option<HallCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaireLevelReport {
    pub level: usize,
    pub part: Side,
    pub radius: i64,
    pub horizon: i64,
    pub ball_radius: f64,
    pub net_cells: usize,
    pub added: usize,
    pub oracle_calls: usize,
    pub min_edge_distance: Option<i64>,
    pub condition: f64,
    pub condition_holds: bool,
    pub matched: usize,
    pub hall: Option<HallCheck>,
    pub failure: Option<ExtendFailure>,
}

#[derive(Clone, Debug)]
pub struct BaireRun {
    pub matching: Matching,
    pub nets: SparseNetLadder,
    pub reports: Vec<BaireLevelReport>,
    pub warnings: Vec<String>,
    pub aborted: Option<String>,
}

impl BaireRun {
    pub fn failures(&self) -> impl Iterator<Item = &ExtendFailure> {
        self.reports.iter().filter_map(|r| r.failure.as_ref())
    }
}

/// Whether the matched edges of `m` extend to a matching covering every free cell of the window
/// shrunk by 2M, using free cells anywhere in the window.
pub fn core_hall_check(win: &CosetWindow, m: &Matching) -> Result<HallCheck> {
    let w = &win.window;
    let mc = win.m_cap() as i64;
    let region = w.shrink(2 * mc).ok_or_else(|| Error::arg("window too small for a Hall check"))?;
    let a_free = |c: &[i64]| {
        let i = w.index_unchecked(c);
        win.a_bits.get(i) && m.partner_of_a(i).is_none()
    };
    let b_free = |c: &[i64]| {
        let i = w.index_unchecked(c);
        win.b_bits.get(i) && m.partner_of_b(i).is_none()
    };
    let required_a = region.cells().filter(|c| a_free(c)).count();
    let required_b = region.cells().filter(|c| b_free(c)).count();
    let mut certificate = None;
    if let Err((set, neighbourhood)) = one_side_cover(w, mc, |c| region.contains(c) && a_free(c), b_free) {
        certificate = Some(HallCertificate { side: Side::A, set, neighbourhood });
    } else if let Err((set, neighbourhood)) = one_side_cover(w, mc, |c| region.contains(c) && b_free(c), a_free) {
        certificate = Some(HallCertificate { side: Side::B, set, neighbourhood });
    }
    Ok(HallCheck { region, required_a, required_b, feasible: certificate.is_none(), certificate })
}

/// Builds the nets and runs one greedy level per radius. A level with an extendability failure
/// ends the run; so does an infeasible Hall check on a level whose radii satisfy the summability
/// condition.
pub fn run_baire(win: &CosetWindow, params: &BaireParams, deadline: Option<Instant>) -> Result<BaireRun> {
    let horizons = params.horizons();
    let nets = build_nets(win, &params.radii, &horizons, params.candidates, params.seed)?;
    let mc = win.m_cap() as i64;
    let chi = build_sparse_coloring(&win.sys, (2 * mc) as u64)?;
    let mut warnings = Vec::new();
    let mut m = Matching::new(win.window.clone(), win.m_cap());
    let mut reports = Vec::with_capacity(nets.levels.len());
    let mut aborted = None;
    for (l, net) in nets.levels.iter().enumerate() {
        if deadline.is_some_and(|d| Instant::now() > d) {
            aborted = Some(format!("deadline reached before level {}", net.level));
            break;
        }
        let condition = nets.condition[l];
        let condition_holds = condition <= nets.condition_bound;
        if !condition_holds {
            let msg = format!(
                "level {}: radius sum {condition:.4} exceeds 4^(1-d) = {:.4}; extendability is not guaranteed",
                net.level, nets.condition_bound
            );
            log::debug!("{msg}");
            warnings.push(msg);
        }
        if net.eligible.is_none() {
            let msg = format!("level {}: horizon {} leaves no eligible cells in the window", net.level, net.horizon);
            log::debug!("{msg}");
            warnings.push(msg);
        }
        let step = greedy_step(win, &m, net, &chi, net.horizon)?;
        m = step.matching;
        let failed = step.failure.is_some();
        let hall = if params.hall_check && !failed { Some(core_hall_check(win, &m)?) } else { None };
        log::info!(
            "baire level {}: {} net cells, {} added, hall {:?}",
            net.level,
            net.cells.len(),
            step.added.len(),
            hall.as_ref().map(|h| h.feasible)
        );
        let hall_failed = hall.as_ref().is_some_and(|h| !h.feasible);
        reports.push(BaireLevelReport {
            level: net.level,
            part: net.part,
            radius: net.radius,
            horizon: net.horizon,
            ball_radius: net.ball_radius,
            net_cells: net.cells.len(),
            added: step.added.len(),
            oracle_calls: step.oracle_calls,
            min_edge_distance: step.min_edge_distance,
            condition,
            condition_holds,
            matched: m.size(),
            hall,
            failure: step.failure,
        });
        if failed {
            aborted = Some(format!("extendability failure at level {}", net.level));
            break;
        }
        if hall_failed {
            if condition_holds {
                return Err(Error::invariant(format!("level {}: matching is not extendable on the core", net.level)));
            }
            let msg = format!("level {}: Hall check failed on the core", net.level);
            log::debug!("{msg}");
            warnings.push(msg);
        }
    }
    m.validate(&win.a_bits, &win.b_bits)?;
    Ok(BaireRun { matching: m, nets, reports, warnings, aborted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_free_system, Shape, TorusPoint};
    use crate::lattice::{linf, Rect};
    use crate::window::extract_window;

    fn win(side: i64, m: u32) -> CosetWindow {
        let sys = sample_free_system(7, 2, 2, m).unwrap();
        let a = Shape::disk(vec![0.5, 0.5], (0.15f64 / std::f64::consts::PI).sqrt());
        let b = Shape::square(vec![0.1, 0.2], 0.15f64.sqrt());
        extract_window(&a, &b, &sys, &TorusPoint::new(vec![0.25, 0.6]), &Rect::centered_cube(2, side)).unwrap()
    }

    #[test]
    fn small_run_matches_every_net_cell() {
        let w = win(200, 6);
        let p = BaireParams { radii: vec![12, 24], horizons: None, candidates: 40, seed: 5, hall_check: true };
        let run = run_baire(&w, &p, None).unwrap();
        assert_eq!(run.failures().count(), 0, "{:?}", run.failures().collect::<Vec<_>>());
        assert!(run.aborted.is_none());
        assert_eq!(run.reports.len(), 2);
        let total: usize = run.reports.iter().map(|r| r.added).sum();
        assert_eq!(total, run.matching.size());
        assert!(total > 0);
        for (r, net) in run.reports.iter().zip(&run.nets.levels) {
            assert_eq!(r.added, r.net_cells);
            for c in &net.cells {
                let i = w.window.index_unchecked(c);
                let p = if net.part == Side::A { run.matching.partner_of_a(i) } else { run.matching.partner_of_b(i) };
                assert!(linf(&w.window.coords(p.unwrap()), c) <= 6);
            }
            assert!(r.hall.as_ref().unwrap().feasible);
        }
        // (6/12)^{1/2} > 1/4.
        assert!(!run.warnings.is_empty());
        let again = run_baire(&w, &p, None).unwrap();
        assert_eq!(again.matching, run.matching);
    }

    #[test]
    fn empty_nets_are_a_no_op() {
        let sys = sample_free_system(7, 2, 2, 2).unwrap();
        let w = extract_window(&Shape::empty(2), &Shape::empty(2), &sys, &TorusPoint::zero(2), &Rect::centered_cube(2, 64)).unwrap();
        let p = BaireParams { radii: vec![4], horizons: None, candidates: 4, seed: 1, hall_check: true };
        let run = run_baire(&w, &p, None).unwrap();
        assert_eq!(run.matching.size(), 0);
        assert!(run.reports[0].hall.as_ref().unwrap().feasible);
    }

    #[test]
    fn horizons_default_to_twice_the_radius() {
        let p: BaireParams = serde_json::from_str(r#"{"radii":[3,5]}"#).unwrap();
        assert_eq!(p.horizons(), vec![6, 10]);
        assert_eq!(p.candidates, 16);
        assert!(p.hall_check);
    }
}
