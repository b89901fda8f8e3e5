use serde::{Deserialize, Serialize};

use super::extend::{as_edge, extension_certificate};
use super::holes::{hole_analysis, HoleSummary};
use super::nets::NetLevel;
use crate::error::{Error, Result};
use crate::lattice::{ell_components, linf, offsets_row_major, CellSet};
use crate::matching::{HallCertificate, Matching, Side};
use crate::window::{CosetWindow, SparseColoring};

/// A net cell none of whose free neighbours passed the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendFailure {
    pub level: usize,
    pub cell: Vec<i64>,
    pub part: Side,
    pub horizon: i64,
    pub candidates: usize,
    /// Certificate of the first rejected candidate.
    pub certificate: Option<HallCertificate>,
    /// Holes of the largest 2M-component of that certificate.
    pub holes: Option<HoleSummary>,
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub matching: Matching,
    /// Added edges as (net cell, partner).
    pub added: Vec<(Vec<i64>, Vec<i64>)>,
    pub oracle_calls: usize,
    /// Smallest L∞ distance between endpoints of two added edges.
    pub min_edge_distance: Option<i64>,
    pub failure: Option<ExtendFailure>,
}

fn color(win: &CosetWindow, chi: &SparseColoring, c: &[i64]) -> u128 {
    let mut p = vec![0.0; win.sys.k];
    win.sys.coset_coords_into(win.base.coords(), c, &mut p);
    chi.color_of(&p)
}

fn edge_distance(e: &(Vec<i64>, Vec<i64>), f: &(Vec<i64>, Vec<i64>)) -> i64 {
    linf(&e.0, &f.0).min(linf(&e.0, &f.1)).min(linf(&e.1, &f.0)).min(linf(&e.1, &f.1))
}

fn summarize(win: &CosetWindow, cert: &HallCertificate, r: i64) -> Option<HoleSummary> {
    let m = win.m_cap() as i64;
    let cells: Vec<&[i64]> = cert.set.iter().map(|c| c.as_slice()).collect();
    if cells.is_empty() {
        return None;
    }
    let x = CellSet::from_cells(win.window.clone(), cells);
    let parts = ell_components(&x, 2 * m);
    let big = (0..parts.len()).max_by_key(|&k| (parts.sizes[k], std::cmp::Reverse(k)))?;
    hole_analysis(&parts.component(big as u32), m, r).ok().map(|h| h.summary())
}

/// One level of the greedy: net cells in (χ, row-major) order, each matched to the free neighbour
/// of least (χ, row-major) that passes the extension oracle at horizon `j`. The first cell without
/// such a neighbour stops the level and is returned as a failure.
pub fn greedy_step(
    win: &CosetWindow,
    m_prev: &Matching,
    net: &NetLevel,
    chi: &SparseColoring,
    j: i64,
) -> Result<StepOutcome> {
    let w = &win.window;
    let mc = win.m_cap() as i64;
    let side = net.part;
    let (own, other) = match side {
        Side::A => (&win.a_bits, &win.b_bits),
        Side::B => (&win.b_bits, &win.a_bits),
    };
    let mut order: Vec<(u128, usize)> = net
        .cells
        .iter()
        .map(|c| {
            let i = w.index_of(c).ok_or_else(|| Error::arg(format!("net cell {c:?} outside window")))?;
            if !own.get(i) {
                return Err(Error::arg(format!("net cell {c:?} is not on its part")));
            }
            Ok((color(win, chi, c), i))
        })
        .collect::<Result<_>>()?;
    order.sort_unstable();
    let offsets = offsets_row_major(win.d(), mc);
    let partner_of = |m: &Matching, i: usize| match side {
        Side::A => m.partner_of_a(i),
        Side::B => m.partner_of_b(i),
    };
    let mut m = m_prev.clone();
    let mut added: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
    let mut calls = 0;
    for &(_, xi) in &order {
        if partner_of(&m, xi).is_some() {
            continue;
        }
        let x = w.coords(xi);
        let mut cands: Vec<(u128, usize, Vec<i64>)> = offsets
            .iter()
            .filter_map(|o| {
                let y: Vec<i64> = x.iter().zip(o).map(|(a, b)| a + b).collect();
                let yi = w.index_of(&y)?;
                let free = match side {
                    Side::A => m.partner_of_b(yi).is_none(),
                    Side::B => m.partner_of_a(yi).is_none(),
                };
                (other.get(yi) && free).then(|| (color(win, chi, &y), yi, y))
            })
            .collect();
        cands.sort_unstable();
        let mut first_cert = None;
        let mut chosen = None;
        for (_, _, y) in &cands {
            calls += 1;
            match extension_certificate(win, &m, side, &x, y, j)? {
                None => {
                    chosen = Some(y.clone());
                    break;
                }
                Some(c) => {
                    first_cert.get_or_insert(c);
                }
            }
        }
        let Some(y) = chosen else {
            let holes = first_cert.as_ref().and_then(|c| summarize(win, c, net.radius));
            let failure = ExtendFailure {
                level: net.level,
                cell: x,
                part: side,
                horizon: j,
                candidates: cands.len(),
                certificate: first_cert,
                holes,
            };
            log::warn!("level {}: net cell {:?} has no extendable partner", net.level, failure.cell);
            return Ok(StepOutcome { matching: m, added, oracle_calls: calls, min_edge_distance: None, failure: Some(failure) });
        };
        let (a, b) = as_edge(side, &x, &y);
        m.insert(a, b)?;
        added.push((x, y));
    }

    let mut min_edge_distance = None;
    for s in 0..added.len() {
        for t in s + 1..added.len() {
            let dd = edge_distance(&added[s], &added[t]);
            min_edge_distance = Some(min_edge_distance.map_or(dd, |v: i64| v.min(dd)));
            if dd <= net.radius + 2 * mc {
                return Err(Error::invariant(format!("added edges at distance {dd} ≤ r + 2M")));
            }
        }
    }
    for (x, y) in &added {
        // m_prev ⊆ the matching the choice was made against, so the oracle must still accept.
        calls += 1;
        if extension_certificate(win, m_prev, side, x, y, j)?.is_some() {
            return Err(Error::invariant(format!("added edge at {x:?} is not extendable over the previous matching")));
        }
    }
    for c in &net.cells {
        if partner_of(&m, w.index_unchecked(c)).is_none() {
            return Err(Error::invariant(format!("net cell {c:?} left unmatched")));
        }
    }
    Ok(StepOutcome { matching: m, added, oracle_calls: calls, min_edge_distance, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_free_system, TorusPoint};
    use crate::lattice::Rect;
    use crate::window::build_sparse_coloring;

    fn synthetic(a: CellSet, b: CellSet) -> CosetWindow {
        let sys = sample_free_system(1, 2, 2, 1).unwrap();
        CosetWindow::from_bits(TorusPoint::zero(2), sys, a, b).unwrap()
    }

    fn level(part: Side, cells: Vec<Vec<i64>>) -> NetLevel {
        NetLevel { level: 1, radius: 2, horizon: 3, part, ball_radius: 0.0, centers: vec![], eligible: None, cells }
    }

    #[test]
    fn empty_net_is_a_no_op() {
        let w = Rect::cube(vec![0, 0], 12);
        let win = synthetic(CellSet::full(w.clone()), CellSet::full(w.clone()));
        let chi = build_sparse_coloring(&win.sys, 2).unwrap();
        let mut m = Matching::new(w.clone(), 1);
        m.insert(&[0, 0], &[1, 1]).unwrap();
        let out = greedy_step(&win, &m, &level(Side::B, vec![]), &chi, 3).unwrap();
        assert_eq!(out.matching, m);
        assert!(out.added.is_empty() && out.failure.is_none());
    }

    #[test]
    fn unique_neighbour_is_taken() {
        let w = Rect::cube(vec![0, 0], 13);
        let a = CellSet::from_cells(w.clone(), [&[6i64, 6][..]]);
        let b = CellSet::from_cells(w.clone(), [&[7i64, 5][..]]);
        let win = synthetic(a, b);
        let chi = build_sparse_coloring(&win.sys, 2).unwrap();
        let m = Matching::new(w.clone(), 1);
        let out = greedy_step(&win, &m, &level(Side::A, vec![vec![6, 6]]), &chi, 3).unwrap();
        assert_eq!(out.added, vec![(vec![6, 6], vec![7, 5])]);
        assert_eq!(out.matching.size(), 1);
        let out = greedy_step(&win, &m, &level(Side::B, vec![vec![7, 5]]), &chi, 3).unwrap();
        assert_eq!(out.added, vec![(vec![7, 5], vec![6, 6])]);
    }

    #[test]
    fn blocked_cell_reports_failure() {
        // Two A-cells share one B-neighbour: matching one to it leaves the other uncoverable.
        let w = Rect::cube(vec![0, 0], 13);
        let a = CellSet::from_cells(w.clone(), [&[5i64, 6][..], &[7, 6][..]]);
        let b = CellSet::from_cells(w.clone(), [&[6i64, 6][..]]);
        let win = synthetic(a, b);
        let chi = build_sparse_coloring(&win.sys, 2).unwrap();
        let m = Matching::new(w.clone(), 1);
        let out = greedy_step(&win, &m, &level(Side::B, vec![vec![6, 6]]), &chi, 3).unwrap();
        let f = out.failure.unwrap();
        assert_eq!(f.cell, vec![6, 6]);
        assert_eq!(f.candidates, 2);
        assert!(f.certificate.is_some());
    }
}
