//! Slow, independent reference implementations used to cross-check the fast algorithms.

use std::collections::VecDeque;

use crate::lattice::{linf, CellSet, Rect};

/// Explicit bipartite graph: A-cells, B-cells and edges as index pairs.
#[derive(Clone, Debug)]
pub struct ExplicitGraph {
    pub a_cells: Vec<Vec<i64>>,
    pub b_cells: Vec<Vec<i64>>,
    pub adj: Vec<Vec<usize>>,
}

impl ExplicitGraph {
    /// G[R,R] built by comparing every A/B pair directly.
    pub fn induced(a: &CellSet, b: &CellSet, m: i64, r: &Rect) -> Self {
        let a_cells: Vec<Vec<i64>> = r.cells().filter(|c| a.contains(c)).collect();
        let b_cells: Vec<Vec<i64>> = r.cells().filter(|c| b.contains(c)).collect();
        let adj = a_cells
            .iter()
            .map(|x| (0..b_cells.len()).filter(|&j| linf(x, &b_cells[j]) <= m).collect())
            .collect();
        ExplicitGraph { a_cells, b_cells, adj }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|v| v.len()).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj.iter().enumerate().flat_map(|(i, v)| v.iter().map(move |&j| (i, j))).collect()
    }

    pub fn a_index(&self, c: &[i64]) -> Option<usize> {
        self.a_cells.iter().position(|x| x == c)
    }

    pub fn b_index(&self, c: &[i64]) -> Option<usize> {
        self.b_cells.iter().position(|x| x == c)
    }
}

/// Maximum matching size by repeated depth-first augmentation (Kuhn), recursive.
pub fn max_matching_size(g: &ExplicitGraph) -> usize {
    fn try_kuhn(v: usize, g: &ExplicitGraph, seen: &mut [bool], mate_b: &mut [Option<usize>]) -> bool {
        for &u in &g.adj[v] {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            if mate_b[u].is_none() || try_kuhn(mate_b[u].unwrap(), g, seen, mate_b) {
                mate_b[u] = Some(v);
                return true;
            }
        }
        false
    }
    let mut mate_b = vec![None; g.b_cells.len()];
    let mut size = 0;
    for v in 0..g.a_cells.len() {
        let mut seen = vec![false; g.b_cells.len()];
        if try_kuhn(v, g, &mut seen, &mut mate_b) {
            size += 1;
        }
    }
    size
}

/// Length of a shortest augmenting path, without any cap. `mate_a[i]` is the B partner of A-cell i.
pub fn shortest_augmenting_length(g: &ExplicitGraph, mate_a: &[Option<usize>]) -> Option<usize> {
    let mut mate_b = vec![None; g.b_cells.len()];
    for (i, m) in mate_a.iter().enumerate() {
        if let Some(j) = m {
            mate_b[*j] = Some(i);
        }
    }
    // Vertices 0..nA are A, nA.. are B; BFS over the alternating orientation.
    let na = g.a_cells.len();
    let mut dist = vec![usize::MAX; na + g.b_cells.len()];
    let mut q = VecDeque::new();
    for i in 0..na {
        if mate_a[i].is_none() {
            dist[i] = 0;
            q.push_back(i);
        }
    }
    while let Some(v) = q.pop_front() {
        if v < na {
            for &j in &g.adj[v] {
                if mate_a[v] == Some(j) || dist[na + j] != usize::MAX {
                    continue;
                }
                dist[na + j] = dist[v] + 1;
                match mate_b[j] {
                    None => return Some(dist[na + j]),
                    Some(_) => q.push_back(na + j),
                }
            }
        } else {
            let j = v - na;
            let i = mate_b[j].unwrap();
            if dist[i] == usize::MAX {
                dist[i] = dist[v] + 1;
                q.push_back(i);
            }
        }
    }
    None
}

/// Whether some matching covers all required vertices, by enumerating every edge subset.
pub fn brute_force_cover(g: &ExplicitGraph, required_a: &[bool], required_b: &[bool]) -> bool {
    let edges = g.edges();
    assert!(edges.len() <= 20, "brute force limited to small graphs");
    if required_a.iter().any(|&r| r) && edges.is_empty() {
        return false;
    }
    'subsets: for mask in 0u32..(1 << edges.len()) {
        let mut used_a = vec![false; g.a_cells.len()];
        let mut used_b = vec![false; g.b_cells.len()];
        for (k, &(i, j)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if used_a[i] || used_b[j] {
                    continue 'subsets;
                }
                used_a[i] = true;
                used_b[j] = true;
            }
        }
        let ok_a = required_a.iter().zip(&used_a).all(|(r, u)| !r || *u);
        let ok_b = required_b.iter().zip(&used_b).all(|(r, u)| !r || *u);
        if ok_a && ok_b {
            return true;
        }
    }
    false
}

/// Owner of every window cell by comparing against every seed.
pub fn naive_voronoi(seeds: &[Vec<i64>], window: &Rect) -> Vec<Option<usize>> {
    window
        .cells()
        .map(|c| {
            let dists: Vec<i64> = seeds.iter().map(|s| linf(s, &c)).collect();
            let best = *dists.iter().min()?;
            let winners: Vec<usize> = (0..seeds.len()).filter(|&i| dists[i] == best).collect();
            (winners.len() == 1).then(|| winners[0])
        })
        .collect()
}

/// Perimeter by looking at every cell of the grown frame.
pub fn naive_perimeter(x: &CellSet) -> u64 {
    let frame = x.rect().grow(1);
    let d = x.dim();
    let mut p = 0;
    for c in frame.cells() {
        if !x.contains(&c) {
            continue;
        }
        for a in 0..d {
            for s in [-1, 1] {
                let mut n = c.clone();
                n[a] += s;
                if !x.contains(&n) {
                    p += 1;
                }
            }
        }
    }
    p
}
