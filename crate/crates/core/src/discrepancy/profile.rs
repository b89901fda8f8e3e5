use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sat::SummedArea;
use crate::error::{Error, Result};
use crate::geometry::least_squares_slope;
use crate::lattice::{CellSet, Rect};

/// Max over stride-1 cubes of side `s` inside the table's rect of | |X∩Q| − δ·s^d |.
fn scan_cubes(sat: &SummedArea, delta: f64, s: i64) -> f64 {
    let rect = sat.rect();
    let d = rect.dim();
    let expected = delta * (s as f64).powi(d as i32);
    let corners = sat.cube_corners(s as usize);
    let strides = sat.strides().to_vec();
    let positions: Vec<i64> = rect.sides.iter().map(|&side| side - s + 1).collect();
    let inner: usize = positions[1..].iter().map(|&p| p as usize).product();
    (0..positions[0] as usize)
        .into_par_iter()
        .map(|first| {
            let mut best = 0.0f64;
            let mut c = vec![0usize; d];
            c[0] = first;
            for rest in 0..inner {
                let mut r = rest;
                for a in (1..d).rev() {
                    c[a] = r % positions[a] as usize;
                    r /= positions[a] as usize;
                }
                let base: usize = (0..d).map(|a| c[a] * strides[a]).sum();
                let count: i64 = corners.iter().map(|&(off, sg)| sg * sat.at(base + off)).sum();
                best = best.max((count as f64 - expected).abs());
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

pub fn cube_discrepancy(x: &CellSet, delta: f64, i: u32, window: &Rect) -> Result<f64> {
    let s = 1i64 << i;
    if s > window.min_side() {
        return Err(Error::arg(format!("cube side {s} exceeds window side {}", window.min_side())));
    }
    let sat = SummedArea::from_cellset(x, window);
    Ok(scan_cubes(&sat, delta, s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyProfile {
    pub delta: f64,
    pub scales: Vec<u64>,
    pub max_dev: Vec<f64>,
    /// Slope of log₂ max_dev against i; absent when fewer than two usable points.
    pub fitted_exponent: Option<f64>,
    pub fit_range: (u32, u32),
}

impl DiscrepancyProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,max_dev\n");
        for (sc, dev) in self.scales.iter().zip(&self.max_dev) {
            s.push_str(&format!("{sc},{dev}\n"));
        }
        s
    }
}

pub fn profile(x: &CellSet, delta: f64, window: &Rect, i_max: u32) -> Result<DiscrepancyProfile> {
    if i_max >= 63 || (1i64 << i_max) > window.min_side() {
        return Err(Error::arg(format!(
            "largest scale 2^{i_max} exceeds window side {}",
            window.min_side()
        )));
    }
    let sat = SummedArea::from_cellset(x, window);
    let scales: Vec<u64> = (0..=i_max).map(|i| 1u64 << i).collect();
    let max_dev: Vec<f64> = scales.iter().map(|&s| scan_cubes(&sat, delta, s as i64)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (2..=i_max)
        .filter(|&i| max_dev[i as usize] > 0.0)
        .map(|i| (i as f64, max_dev[i as usize].log2()))
        .unzip();
    let fitted_exponent = (xs.len() >= 2).then(|| least_squares_slope(&xs, &ys).0);
    Ok(DiscrepancyProfile { delta, scales, max_dev, fitted_exponent, fit_range: (2, i_max) })
}

/// Density δ with a tabulated Ψ; Φ(2^i) = 2^i·Ψ(2^i).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityBudget {
    pub delta: f64,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
}

impl UniformityBudget {
    pub fn new(delta: f64, psi: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::arg("density must lie in (0, 1)"));
        }
        let phi = psi.iter().enumerate().map(|(i, p)| p * (1u64 << i) as f64).collect();
        Ok(UniformityBudget { delta, psi, phi })
    }

    /// Budget read off a measured profile: Φ is the measured deviation, Ψ = Φ/2^i.
    pub fn from_profile(p: &DiscrepancyProfile) -> Result<Self> {
        let psi = p.max_dev.iter().enumerate().map(|(i, v)| v / (1u64 << i) as f64).collect();
        UniformityBudget::new(p.delta, psi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub psi_partial: Vec<f64>,
    pub phi_partial: Vec<f64>,
    pub psi_tail_monotone: bool,
    pub phi_tail_monotone: bool,
}

fn tail_decreasing(partial: &[f64]) -> bool {
    if partial.len() < 4 {
        return false;
    }
    let n = partial.len();
    let inc: Vec<f64> = (n - 3..n).map(|i| partial[i] - partial[i - 1]).collect();
    inc[1] < inc[0] && inc[2] < inc[1]
}

pub fn summability_report(budget: &UniformityBudget, d: u32, horizon: u32) -> Result<SummabilityReport> {
    if horizon as usize >= budget.psi.len() {
        return Err(Error::arg(format!("horizon {horizon} beyond tabulated range {}", budget.psi.len() - 1)));
    }
    let mut psi_partial = Vec::new();
    let mut phi_partial = Vec::new();
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..=horizon as i32 {
        a += budget.psi[i as usize] / 2f64.powi((d as i32 - 2) * i);
        b += budget.phi[i as usize] / 2f64.powi((d as i32 - 1) * i);
        psi_partial.push(a);
        phi_partial.push(b);
    }
    Ok(SummabilityReport {
        psi_tail_monotone: tail_decreasing(&psi_partial),
        phi_tail_monotone: tail_decreasing(&phi_partial),
        psi_partial,
        phi_partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &CellSet, delta: f64, s: i64, w: &Rect) -> f64 {
        let mut best = 0.0f64;
        for p0 in w.low[0]..=w.high(0) - s {
            for p1 in w.low[1]..=w.high(1) - s {
                let q = Rect::cube(vec![p0, p1], s);
                let c = x.count_in(&q) as f64;
                best = best.max((c - delta * (s * s) as f64).abs());
            }
        }
        best
    }

    #[test]
    fn examples() {
        let w = Rect::cube(vec![0, 0], 16);
        let empty = CellSet::new(w.clone());
        assert_eq!(cube_discrepancy(&empty, 0.5, 2, &w).unwrap(), 8.0);
        assert_eq!(cube_discrepancy(&CellSet::full(w.clone()), 0.5, 2, &w).unwrap(), 8.0);
        let checker = CellSet::from_fn(w.clone(), |c| (c[0] + c[1]) % 2 == 0);
        assert_eq!(cube_discrepancy(&checker, 0.5, 1, &w).unwrap(), 0.0);
        assert!(cube_discrepancy(&checker, 0.5, 5, &w).is_err());
    }

    #[test]
    fn matches_naive_loop() {
        use rand::Rng;
        let mut rng = crate::rng::substream(3, "sat-naive");
        let w = Rect::cube(vec![-16, -16], 32);
        for _ in 0..100 {
            let p: f64 = rng.random();
            let bits: Vec<bool> = (0..w.volume()).map(|_| rng.random::<f64>() < p).collect();
            let x = CellSet::from_index_fn(w.clone(), |i| bits[i]);
            for i in 0..=5 {
                let fast = cube_discrepancy(&x, 0.3, i, &w).unwrap();
                assert!((fast - naive(&x, 0.3, 1 << i, &w)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn complement_symmetry() {
        use rand::Rng;
        let mut rng = crate::rng::substream(4, "complement");
        let w = Rect::cube(vec![0, 0], 32);
        let bits: Vec<bool> = (0..w.volume()).map(|_| rng.random::<bool>()).collect();
        let x = CellSet::from_index_fn(w.clone(), |i| bits[i]);
        for i in 0..=5 {
            let a = cube_discrepancy(&x, 0.4, i, &w).unwrap();
            let b = cube_discrepancy(&x.complement(), 0.6, i, &w).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_set_has_exponent_d() {
        let w = Rect::cube(vec![0, 0], 64);
        let p = profile(&CellSet::new(w.clone()), 0.5, &w, 6).unwrap();
        assert_eq!(p.fitted_exponent, Some(2.0));
        assert_eq!(p.max_dev[0], 0.5);
        let w3 = Rect::cube(vec![0, 0, 0], 16);
        let p = profile(&CellSet::new(w3.clone()), 0.25, &w3, 4).unwrap();
        assert_eq!(p.fitted_exponent, Some(3.0));
    }

    #[test]
    fn striped_set_grows_at_most_linearly() {
        let w = Rect::cube(vec![0, 0], 64);
        let stripes = CellSet::from_fn(w.clone(), |c| c[1] % 2 == 0);
        let p = profile(&stripes, 0.5, &w, 6).unwrap();
        for (s, dev) in p.scales.iter().zip(&p.max_dev) {
            assert!(*dev <= *s as f64);
        }
        // Even scales have zero deviation, so the fit may have too few points.
        assert!(p.fitted_exponent.is_none_or(|a| a <= 1.0 + 1e-9));
        assert!(p.to_csv().starts_with("scale,max_dev\n1,0.5\n"));
    }

    #[test]
    fn summability_examples() {
        let psi: Vec<f64> = (0..=10).map(|i| 2f64.powi(i)).collect();
        let b = UniformityBudget::new(0.5, psi).unwrap();
        for i in 0..=10 {
            assert_eq!(b.phi[i], b.psi[i] * (1u64 << i) as f64);
        }
        let r = summability_report(&b, 4, 10).unwrap();
        let last = *r.psi_partial.last().unwrap();
        assert!((last - (2.0 - 2f64.powi(-10))).abs() < 1e-12);
        assert!(r.psi_tail_monotone);
        let c = UniformityBudget::new(0.5, vec![3.0; 8]).unwrap();
        let r = summability_report(&c, 2, 7).unwrap();
        assert_eq!(r.psi_partial[7], 24.0);
        assert!(!r.psi_tail_monotone);
        assert!(summability_report(&c, 2, 8).is_err());
    }
}
