use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{boundary, dist_ball, ell_components, linf, perimeter, CellSet, Partition, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub label: u32,
    pub representative: Vec<i64>,
    pub cells: usize,
    /// Boundary pairs between the hole and X₁.
    pub perimeter: u64,
    pub rich: bool,
    pub infinite: bool,
}

/// Grid hulls and holes of a 2M-connected set.
#[derive(Clone, Debug)]
pub struct HoleReport {
    /// Per-axis minima o(X); the M/2-grid is anchored here.
    pub reference: Vec<i64>,
    pub grid: i64,
    pub region: Rect,
    pub x1: CellSet,
    pub x2: CellSet,
    pub holes: Vec<Hole>,
    pub partition: Partition,
    pub x1_perimeter: u64,
    pub radius: i64,
    pub rich_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleSummary {
    pub reference: Vec<i64>,
    pub grid: i64,
    pub x1_cells: usize,
    pub x2_cells: usize,
    pub x1_perimeter: u64,
    pub rich_threshold: f64,
    pub holes: Vec<Hole>,
}

impl HoleReport {
    pub fn finite_holes(&self) -> impl Iterator<Item = &Hole> {
        self.holes.iter().filter(|h| !h.infinite)
    }

    pub fn hole_cells(&self, label: u32) -> CellSet {
        self.partition.component(label)
    }

    pub fn summary(&self) -> HoleSummary {
        HoleSummary {
            reference: self.reference.clone(),
            grid: self.grid,
            x1_cells: self.x1.count(),
            x2_cells: self.x2.count(),
            x1_perimeter: self.x1_perimeter,
            rich_threshold: self.rich_threshold,
            holes: self.holes.clone(),
        }
    }
}

fn grid_cube(c: &[i64], o: &[i64], g: i64) -> Vec<i64> {
    c.iter().zip(o).map(|(x, y)| (x - y).div_euclid(g)).collect()
}

/// Holes of X: 2M-components of the complement of X₁ inside a frame around X₂; the one touching
/// the frame is the infinite hole. Hole perimeters are checked to add up to p(X₁).
pub fn hole_analysis(x: &CellSet, m: i64, r: i64) -> Result<HoleReport> {
    if m < 1 {
        return Err(Error::arg("grid scale M must be at least 1"));
    }
    let Some(bbox) = x.bounding_box() else {
        return Err(Error::arg("hole analysis needs a non-empty set"));
    };
    if ell_components(x, 2 * m).len() != 1 {
        return Err(Error::arg("set is not 2M-connected"));
    }
    let d = x.dim();
    let g = (m / 2).max(1);
    let reference = bbox.low.clone();
    let region = bbox.grow(2 * g + 2 * m + 2);
    let cubes: HashSet<Vec<i64>> = x.iter_cells().map(|c| grid_cube(&c, &reference, g)).collect();
    let mut cubes2 = cubes.clone();
    for q in &cubes {
        for a in 0..d {
            for s in [-1, 1] {
                let mut n = q.clone();
                n[a] += s;
                cubes2.insert(n);
            }
        }
    }
    let x1 = CellSet::from_fn(region.clone(), |c| cubes.contains(&grid_cube(c, &reference, g)));
    let x2 = CellSet::from_fn(region.clone(), |c| cubes2.contains(&grid_cube(c, &reference, g)));
    let partition = ell_components(&x1.complement(), 2 * m);
    let e = (d as f64 - 1.0) / d as f64;
    let rich_threshold = (r as f64 / m as f64).powf(e);
    let frame_label = partition.label_of(&region.low).expect("frame cell lies outside X₁");
    let mut holes = Vec::with_capacity(partition.len());
    for k in 0..partition.len() as u32 {
        let hc = partition.component(k);
        let mut p = 0;
        for (_, out) in boundary(&hc) {
            if x1.contains(&out) {
                p += 1;
            } else if region.contains(&out) {
                return Err(Error::invariant("hole boundary meets another hole"));
            }
        }
        let infinite = k == frame_label;
        holes.push(Hole {
            label: k,
            representative: partition.representatives[k as usize].clone(),
            cells: partition.sizes[k as usize],
            perimeter: p,
            rich: p as f64 >= rich_threshold,
            infinite,
        });
    }
    let x1_perimeter = perimeter(&x1);
    let total: u64 = holes.iter().map(|h| h.perimeter).sum();
    if total != x1_perimeter {
        return Err(Error::invariant(format!("hole perimeters sum to {total}, p(X₁) = {x1_perimeter}")));
    }
    Ok(HoleReport { reference, grid: g, region, x1, x2, holes, partition, x1_perimeter, radius: r, rich_threshold })
}

fn same_cells(a: &CellSet, b: &CellSet) -> bool {
    a.count() == b.count() && a.iter_cells().all(|c| b.contains(&c))
}

#[derive(Clone, Debug)]
pub struct FillOutcome {
    pub x_new: CellSet,
    pub report: HoleReport,
    pub reference_kept: bool,
    pub x1_is_union: bool,
    pub hole_gone: bool,
    pub connected: bool,
}

/// X′ = X ∪ (A ∩ dist_{≤M}(H)) for a finite non-rich hole H, with the three claimed properties
/// of X′ measured.
pub fn fill_hole(x: &CellSet, rep: &HoleReport, label: u32, a: &CellSet, m: i64) -> Result<FillOutcome> {
    let hole = rep.holes.get(label as usize).ok_or_else(|| Error::arg(format!("no hole {label}")))?;
    if hole.infinite {
        return Err(Error::arg("the infinite hole cannot be filled"));
    }
    if hole.rich {
        return Err(Error::arg("rich holes are not filled"));
    }
    let h = rep.hole_cells(label);
    let near = dist_ball(&h, m);
    let x_new = CellSet::from_fn(rep.region.clone(), |c| x.contains(c) || (a.contains(c) && near.contains(c)));
    let report = hole_analysis(&x_new, m, rep.radius)?;
    let reference_kept = report.reference == rep.reference;
    let union = rep.x1.union(&h);
    let x1_is_union = reference_kept && same_cells(&report.x1, &union);
    let old: Vec<CellSet> = rep.finite_holes().filter(|o| o.label != label).map(|o| rep.hole_cells(o.label)).collect();
    let new: Vec<CellSet> = report.finite_holes().map(|o| report.hole_cells(o.label)).collect();
    let hole_gone = old.len() == new.len() && new.iter().all(|n| old.iter().any(|o| same_cells(n, o)));
    let connected = ell_components(&x_new, 2 * m).len() == 1;
    Ok(FillOutcome { x_new, report, reference_kept, x1_is_union, hole_gone, connected })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivateSet {
    pub edge: (Vec<i64>, Vec<i64>),
    pub size: usize,
    /// Elements per shell of width 2M around the edge.
    pub shells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivateSetAudit {
    pub reach: f64,
    pub sets: Vec<PrivateSet>,
    pub disjoint: bool,
}

/// P_j(e): boundary pairs of X₁ whose inner cell is within r_j/2 + M of an endpoint of e.
pub fn private_set_audit(x1: &CellSet, edges: &[(Vec<i64>, Vec<i64>)], r_j: i64, m: i64) -> Result<PrivateSetAudit> {
    let dist = |e: &(Vec<i64>, Vec<i64>), c: &[i64]| linf(&e.0, c).min(linf(&e.1, c));
    for s in 0..edges.len() {
        for t in s + 1..edges.len() {
            let e = &edges[t];
            if dist(&edges[s], &e.0).min(dist(&edges[s], &e.1)) <= r_j + 2 * m {
                return Err(Error::arg("net edges must be (r_j + 2M)-sparse"));
            }
        }
    }
    let reach = r_j as f64 / 2.0 + m as f64;
    let n_shells = (reach / (2 * m) as f64).ceil() as usize;
    let bd = boundary(x1);
    let mut owner: Vec<Option<usize>> = vec![None; bd.len()];
    let mut disjoint = true;
    let mut sets = Vec::with_capacity(edges.len());
    for (s, e) in edges.iter().enumerate() {
        let mut shells = vec![0; n_shells.max(1)];
        let mut size = 0;
        for (k, (inner, _)) in bd.iter().enumerate() {
            let dd = dist(e, inner);
            if dd as f64 > reach {
                continue;
            }
            size += 1;
            let sh = if dd == 0 { 0 } else { ((dd - 1) / (2 * m)) as usize };
            let last = shells.len() - 1;
            shells[sh.min(last)] += 1;
            if owner[k].replace(s).is_some() {
                disjoint = false;
            }
        }
        sets.push(PrivateSet { edge: e.clone(), size, shells });
    }
    Ok(PrivateSetAudit { reach, sets, disjoint })
}
