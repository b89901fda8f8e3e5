use crate::error::{Error, Result};
use crate::lattice::CellSet;
use crate::window::{build_sparse_coloring, greedy_sparse_net, CosetWindow};

/// Scale ladder and per-level seed sets.
#[derive(Clone, Debug)]
pub struct GridSchedule {
    pub ladder: Vec<i64>,
    pub seeds: Vec<CellSet>,
    /// Sparsity N_{i+2} of the seed set, or `None` when the level uses the single-seed fallback.
    pub sparsity: Vec<Option<i64>>,
    /// Partial sums of N_i² / N_{i+1}.
    pub summability: Vec<f64>,
}

impl GridSchedule {
    pub fn levels(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_fallback(&self, i: usize) -> bool {
        self.sparsity[i].is_none()
    }

    /// Taint added by level i: seed sparsity, cube side and one edge length.
    pub fn level_margin(&self, i: usize, m: i64) -> i64 {
        self.sparsity[i].unwrap_or(0) + self.ladder[i] + m
    }

    /// Accumulated margin through level i.
    pub fn margin(&self, i: usize, m: i64) -> i64 {
        (0..=i).map(|l| self.level_margin(l, m)).sum()
    }
}

pub fn validate_ladder(ladder: &[i64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::arg("ladder must not be empty"));
    }
    for &n in ladder {
        if n < 1 || n & (n - 1) != 0 {
            return Err(Error::arg(format!("ladder entry {n} is not a power of two")));
        }
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg("ladder must be strictly increasing"));
    }
    Ok(())
}

pub fn summability_partial_sums(ladder: &[i64]) -> Vec<f64> {
    ladder
        .windows(2)
        .scan(0.0, |acc, w| {
            *acc += (w[0] as f64).powi(2) / w[1] as f64;
            Some(*acc)
        })
        .collect()
}

/// Seeds for levels 0..=levels. Level i uses a maximal N_{i+2}-sparse net when N_{i+2} exists and
/// is smaller than the window, and otherwise the single cell at the window centre.
pub fn build_schedule(win: &CosetWindow, ladder: &[i64], levels: usize) -> Result<GridSchedule> {
    validate_ladder(ladder)?;
    if levels >= ladder.len() {
        return Err(Error::arg(format!("{} levels need a ladder of length {}", levels + 1, levels + 1)));
    }
    let w = &win.window;
    let mut seeds = Vec::with_capacity(levels + 1);
    let mut sparsity = Vec::with_capacity(levels + 1);
    for i in 0..=levels {
        match ladder.get(i + 2) {
            Some(&r) if r < w.min_side() => {
                let coloring = build_sparse_coloring(&win.sys, r as u64)?;
                seeds.push(greedy_sparse_net(win, &coloring, r as u64)?);
                sparsity.push(Some(r));
            }
            _ => {
                let mut s = CellSet::new(w.clone());
                s.insert(&w.center_cell());
                seeds.push(s);
                sparsity.push(None);
            }
        }
    }
    Ok(GridSchedule {
        ladder: ladder[..=levels].to_vec(),
        seeds,
        sparsity,
        summability: summability_partial_sums(ladder),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_free_system, Shape, TorusPoint};
    use crate::lattice::{linf, Rect};
    use crate::window::extract_window;

    #[test]
    fn ladder_validation() {
        assert!(validate_ladder(&[8, 32, 128]).is_ok());
        assert!(validate_ladder(&[8, 24]).is_err());
        assert!(validate_ladder(&[8, 8]).is_err());
        assert!(validate_ladder(&[]).is_err());
    }

    #[test]
    fn partial_sums() {
        let s = summability_partial_sums(&[8, 32, 128]);
        assert_eq!(s, vec![2.0, 10.0]);
    }

    #[test]
    fn seeds_sparse_and_fallback() {
        let sys = sample_free_system(3, 2, 2, 4).unwrap();
        let disk = Shape::disk(vec![0.5, 0.5], 0.2);
        let win = extract_window(&disk, &disk, &sys, &TorusPoint::new(vec![0.0, 0.0]), &Rect::centered_cube(2, 128)).unwrap();
        let sch = build_schedule(&win, &[4, 8, 16, 32], 2).unwrap();
        assert_eq!(sch.sparsity, vec![Some(16), Some(32), None]);
        for i in 0..2 {
            let cells: Vec<Vec<i64>> = sch.seeds[i].iter_cells().collect();
            for x in 0..cells.len() {
                for y in x + 1..cells.len() {
                    assert!(linf(&cells[x], &cells[y]) > sch.sparsity[i].unwrap());
                }
            }
        }
        assert_eq!(sch.seeds[2].iter_cells().collect::<Vec<_>>(), vec![win.window.center_cell()]);
        assert_eq!(sch.margin(2, 4), (16 + 4 + 4) + (32 + 8 + 4) + (16 + 4));
        assert!(build_schedule(&win, &[4, 8], 2).is_err());
    }
}
