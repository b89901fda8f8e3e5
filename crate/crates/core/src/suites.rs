//! Seeded property suites behind `eqdc lemma-tests`: each compares a fast routine or an
//! inequality against brute force on many small instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_free_system, Shape, TorusPoint};
use crate::lattice::{internal_boundary, isoperimetry_check, perimeter, CellSet, Rect};
use crate::lebesgue::{equivariance_check, LebesgueParams};
use crate::matching::{bounded_augmenting_path, flip, hall_deficiency, Matching, TranslationGraph};
use crate::oracle::{brute_force_cover, shortest_augmenting_length, ExplicitGraph};
use crate::rng::substream;

pub const SUITES: [&str; 5] = ["isoperimetry", "internal-perimeter", "augmenting-path", "hall", "equivariance"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.into(), cases: 0, violations: 0, first_violation: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult> {
    match name {
        "isoperimetry" => Ok(isoperimetry(seed)),
        "internal-perimeter" => Ok(internal_perimeter(seed)),
        "augmenting-path" => Ok(augmenting_path(seed)),
        "hall" => Ok(hall(seed)),
        "equivariance" => equivariance(seed),
        _ => Err(Error::arg(format!("unknown suite `{name}`; known: {}", SUITES.join(", ")))),
    }
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteResult>> {
    SUITES.iter().map(|s| run_suite(s, seed)).collect()
}

fn random_subset(rng: &mut impl Rng, r: &Rect, p: f64) -> CellSet {
    let bits: Vec<bool> = (0..r.volume()).map(|_| rng.random::<f64>() < p).collect();
    CellSet::from_index_fn(r.clone(), |i| bits[i])
}

/// Loomis–Whitney on every non-empty subset of a 3×3 square and on random subsets of a 4³ cube.
fn isoperimetry(seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("isoperimetry");
    let sq = Rect::cube(vec![0, 0], 3);
    for mask in 1u32..512 {
        let x = CellSet::from_index_fn(sq.clone(), |i| mask >> i & 1 == 1);
        let ok = isoperimetry_check(&x).map(|c| c.ok).unwrap_or(false);
        res.record(ok, || format!("3×3 mask {mask:#b}"));
    }
    let cube = Rect::cube(vec![0, 0, 0], 4);
    let mut rng = substream(seed, "suite-isoperimetry");
    let mut done = 0;
    while done < 10_000 {
        let p = rng.random_range(0.02..1.0);
        let x = random_subset(&mut rng, &cube, p);
        if x.is_empty() {
            continue;
        }
        done += 1;
        let ok = isoperimetry_check(&x).map(|c| c.ok).unwrap_or(false);
        res.record(ok, || format!("4³ subset {:?}", x.iter_cells().collect::<Vec<_>>()));
    }
    res
}

fn random_balanced_rect(rng: &mut impl Rng, d: usize, max_side: i64) -> Rect {
    loop {
        let sides: Vec<i64> = (0..d).map(|_| rng.random_range(1..=max_side)).collect();
        let low: Vec<i64> = (0..d).map(|_| rng.random_range(-5..5)).collect();
        let r = Rect::new(low, sides).unwrap();
        if r.balance() <= 3.0 {
            return r;
        }
    }
}

/// Random X ⊆ R: a Bernoulli set, a sub-box, or a random-walk blob.
fn random_inner_set(rng: &mut impl Rng, r: &Rect) -> CellSet {
    let d = r.dim();
    match rng.random_range(0..3) {
        0 => {
            let p = rng.random_range(0.05..0.95);
            random_subset(rng, r, p)
        }
        1 => {
            let low: Vec<i64> = (0..d).map(|a| rng.random_range(r.low[a]..r.high(a))).collect();
            let sides: Vec<i64> = (0..d).map(|a| rng.random_range(1..=r.high(a) - low[a])).collect();
            let b = Rect::new(low, sides).unwrap();
            CellSet::from_fn(r.clone(), |c| b.contains(c))
        }
        _ => {
            let mut x = CellSet::new(r.clone());
            let mut c: Vec<i64> = (0..d).map(|a| rng.random_range(r.low[a]..r.high(a))).collect();
            for _ in 0..rng.random_range(1..=r.volume()) {
                x.insert(&c);
                let a = rng.random_range(0..d);
                c[a] = (c[a] + if rng.random::<bool>() { 1 } else { -1 }).clamp(r.low[a], r.high(a) - 1);
            }
            x
        }
    }
}

/// p^R(X) ≥ p(X)/(3dρ) · |R∖X|/|R| for ρ-balanced R, ρ ≤ 3, d ∈ {2, 3}.
fn internal_perimeter(seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("internal-perimeter");
    let mut rng = substream(seed, "suite-internal-perimeter");
    for t in 0..10_000 {
        let d = 2 + t % 2;
        let r = random_balanced_rect(&mut rng, d, if d == 2 { 16 } else { 7 });
        let x = random_inner_set(&mut rng, &r);
        let rho = r.balance();
        let pr = internal_boundary(&x, &r).unwrap() as f64;
        let p = perimeter(&x) as f64;
        let outside = (r.volume() - x.count()) as f64 / r.volume() as f64;
        let bound = p / (3.0 * d as f64 * rho) * outside;
        res.record(pr >= bound - 1e-9, || format!("R = {r:?}, |X| = {}, p^R = {pr}, bound = {bound}", x.count()));
    }
    res
}

fn explicit_mates(eg: &ExplicitGraph, m: &Matching) -> Vec<Option<usize>> {
    let w = m.window();
    eg.a_cells
        .iter()
        .map(|c| m.partner_of_a(w.index_of(c).unwrap()).map(|j| eg.b_index(&w.coords(j)).unwrap()))
        .collect()
}

/// Bounded BFS against an uncapped alternating search on random 10×10 instances.
fn augmenting_path(seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("augmenting-path");
    let mut rng = substream(seed, "suite-augmenting-path");
    let w = Rect::cube(vec![0, 0], 10);
    for _ in 0..1000 {
        let (pa, pb) = (rng.random_range(0.1..0.5), rng.random_range(0.1..0.5));
        let a = random_subset(&mut rng, &w, pa);
        let b = random_subset(&mut rng, &w, pb);
        let g = TranslationGraph::new(&a, &b, 1).unwrap();
        let mut m = Matching::new(w.clone(), 1);
        for _ in 0..rng.random_range(0..30) {
            match bounded_augmenting_path(&g, &w, &m, rng.random_range(1..8)) {
                Some(p) => m = flip(&g, &m, &p).unwrap(),
                None => break,
            }
        }
        let eg = ExplicitGraph::induced(&a, &b, 1, &w);
        let truth = shortest_augmenting_length(&eg, &explicit_mates(&eg, &m));
        let cap = rng.random_range(1..20);
        let found = bounded_augmenting_path(&g, &w, &m, cap).map(|p| p.len());
        let want = truth.filter(|&l| l <= cap);
        res.record(found == want, || format!("cap {cap}: found {found:?}, oracle {want:?}"));
    }
    res
}

/// Hall feasibility against subset enumeration on instances with at most 12 edges.
fn hall(seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("hall");
    let mut rng = substream(seed, "suite-hall");
    let w = Rect::cube(vec![0, 0], 10);
    while res.cases < 1000 {
        let a = random_subset(&mut rng, &w, 0.05);
        let b = random_subset(&mut rng, &w, 0.05);
        let eg = ExplicitGraph::induced(&a, &b, 1, &w);
        if eg.edge_count() > 12 {
            continue;
        }
        let g = TranslationGraph::new(&a, &b, 1).unwrap();
        let req_a: Vec<bool> = eg.a_cells.iter().map(|_| rng.random::<f64>() < 0.6).collect();
        let req_b: Vec<bool> = eg.b_cells.iter().map(|_| rng.random::<f64>() < 0.6).collect();
        let ra = CellSet::from_cells(w.clone(), eg.a_cells.iter().zip(&req_a).filter(|x| *x.1).map(|x| &x.0[..]));
        let rb = CellSet::from_cells(w.clone(), eg.b_cells.iter().zip(&req_b).filter(|x| *x.1).map(|x| &x.0[..]));
        let cert = hall_deficiency(&g, &w, &ra, &rb);
        let truth = brute_force_cover(&eg, &req_a, &req_b);
        let sound = cert.as_ref().is_none_or(|c| c.neighbourhood.len() < c.set.len());
        res.record(cert.is_none() == truth && sound, || format!("A = {:?}, B = {:?}", eg.a_cells, eg.b_cells));
    }
    res
}

/// Two base shifts must give identical matchings on the shared core; the window-coordinate
/// tie-break variant must be caught.
fn equivariance(seed: u64) -> Result<SuiteResult> {
    let mut res = SuiteResult::new("equivariance");
    let sys = sample_free_system(seed, 2, 2, 3)?;
    let a = Shape::disk(vec![0.5, 0.5], (0.15f64 / std::f64::consts::PI).sqrt());
    let b = Shape::square(vec![0.1, 0.2], 0.15f64.sqrt());
    let u = TorusPoint::new(vec![0.25, 0.6]);
    let window = Rect::centered_cube(2, 256);
    let mut params = LebesgueParams { ladder: vec![4, 8, 16, 32], levels: 1, mutant: false, check_invariants: true };
    for shift in [[3i64, -2], [-7, 5]] {
        let rep = equivariance_check(&a, &b, &sys, &u, &shift, &window, &params)?;
        res.record(rep.equal, || format!("shift {shift:?}: {} of {} cells differ", rep.mismatches, rep.compared));
    }
    params.mutant = true;
    let rep = equivariance_check(&a, &b, &sys, &u, &[3, -2], &window, &params)?;
    res.record(!rep.equal, || "mutant tie-break went undetected".into());
    Ok(res)
}
