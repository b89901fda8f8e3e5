//! Padded per-region bipartite graph used by every matching algorithm.
//!
//! The region is stored with a margin of M cells on each side, so neighbour lookups are
//! plain index additions. Cells outside the active mask never take part in a search.

use crate::lattice::{offsets_row_major, Rect};

pub(crate) const NIL: u32 = u32::MAX;
const DEAD: u32 = u32::MAX - 1;

pub(crate) struct LocalGraph {
    pub region: Rect,
    pub prect: Rect,
    pub is_a: Vec<bool>,
    pub is_b: Vec<bool>,
    pub mate_a: Vec<u32>,
    pub mate_b: Vec<u32>,
    deltas: Vec<isize>,
    mask: Vec<bool>,
    mask_rect: Option<Rect>,
    epoch: u32,
    mark_a: Vec<u32>,
    mark_b: Vec<u32>,
    layer: Vec<u32>,
    parent_a: Vec<u32>,
    parent_b: Vec<u32>,
}

impl LocalGraph {
    /// `flags(c)` gives (is A-cell, is B-cell) for a region cell in window coordinates.
    pub fn new(region: &Rect, m: i64, flags: impl Fn(&[i64]) -> (bool, bool)) -> Self {
        let prect = region.grow(m);
        let n = prect.volume();
        let pstrides = prect.strides();
        let deltas = offsets_row_major(region.dim(), m)
            .iter()
            .map(|o| o.iter().zip(&pstrides).map(|(&x, &s)| x as isize * s as isize).sum())
            .collect();
        let mut g = LocalGraph {
            region: region.clone(),
            prect,
            is_a: vec![false; n],
            is_b: vec![false; n],
            mate_a: vec![NIL; n],
            mate_b: vec![NIL; n],
            deltas,
            mask: vec![false; n],
            mask_rect: None,
            epoch: 0,
            mark_a: vec![0; n],
            mark_b: vec![0; n],
            layer: vec![0; n],
            parent_a: vec![NIL; n],
            parent_b: vec![NIL; n],
        };
        let mut c = vec![0; region.dim()];
        for i in 0..region.volume() {
            region.coords_into(i, &mut c);
            let (a, b) = flags(&c);
            let p = g.prect.index_unchecked(&c);
            g.is_a[p] = a;
            g.is_b[p] = b;
        }
        g.set_mask(&region.clone());
        g
    }

    #[inline]
    pub fn pidx(&self, c: &[i64]) -> u32 {
        self.prect.index_unchecked(c) as u32
    }

    pub fn coords(&self, p: u32) -> Vec<i64> {
        self.prect.coords(p as usize)
    }

    /// Padded indices of the cells of `r` (window coordinates, inside the region), row-major.
    pub fn cells_in(&self, r: &Rect) -> Vec<u32> {
        let mut c = vec![0; r.dim()];
        (0..r.volume())
            .map(|i| {
                r.coords_into(i, &mut c);
                self.pidx(&c)
            })
            .collect()
    }

    pub fn set_mask(&mut self, r: &Rect) {
        if let Some(old) = self.mask_rect.take() {
            for p in self.cells_in(&old) {
                self.mask[p as usize] = false;
            }
        }
        for p in self.cells_in(r) {
            self.mask[p as usize] = true;
        }
        self.mask_rect = Some(r.clone());
    }

    #[inline]
    fn b_ok(&self, b: usize) -> bool {
        self.is_b[b] && self.mask[b]
    }

    pub fn add_edge(&mut self, a: u32, b: u32) {
        debug_assert!(self.mate_a[a as usize] == NIL && self.mate_b[b as usize] == NIL);
        self.mate_a[a as usize] = b;
        self.mate_b[b as usize] = a;
    }

    /// Removes all edges touching cells of `r`.
    pub fn clear_rect(&mut self, r: &Rect) {
        for p in self.cells_in(r) {
            let p = p as usize;
            let b = self.mate_a[p];
            if b != NIL {
                self.mate_b[b as usize] = NIL;
                self.mate_a[p] = NIL;
            }
            let a = self.mate_b[p];
            if a != NIL {
                self.mate_a[a as usize] = NIL;
                self.mate_b[p] = NIL;
            }
        }
    }

    pub fn a_cells(&self, r: &Rect) -> Vec<u32> {
        self.cells_in(r).into_iter().filter(|&p| self.is_a[p as usize]).collect()
    }

    pub fn free_a_cells(&self, r: &Rect) -> Vec<u32> {
        self.cells_in(r)
            .into_iter()
            .filter(|&p| self.is_a[p as usize] && self.mate_a[p as usize] == NIL)
            .collect()
    }

    /// First free B neighbour in row-major offset order (rotated by `rotate`).
    pub fn greedy(&mut self, left: &[u32], rotate: usize) {
        let n = self.deltas.len();
        for &a in left {
            if self.mate_a[a as usize] != NIL {
                continue;
            }
            for k in 0..n {
                let b = (a as isize + self.deltas[(k + rotate) % n]) as usize;
                if self.b_ok(b) && self.mate_b[b] == NIL {
                    self.add_edge(a, b as u32);
                    break;
                }
            }
        }
    }

    /// Hopcroft–Karp phases from the current matching; returns the number of augmentations.
    pub fn hopcroft_karp(&mut self, left: &[u32]) -> usize {
        let mut total = 0;
        let mut queue: Vec<u32> = Vec::new();
        // (vertex, next offset index, chosen B)
        let mut stack: Vec<(u32, u32, u32)> = Vec::new();
        loop {
            self.epoch += 1;
            let ep = self.epoch;
            queue.clear();
            for &a in left {
                if self.mate_a[a as usize] == NIL {
                    self.mark_a[a as usize] = ep;
                    self.layer[a as usize] = 0;
                    queue.push(a);
                }
            }
            if queue.is_empty() {
                break;
            }
            let mut limit = u32::MAX;
            let mut qi = 0;
            while qi < queue.len() {
                let a = queue[qi] as usize;
                qi += 1;
                let da = self.layer[a];
                if da >= limit {
                    continue;
                }
                for &dl in &self.deltas {
                    let b = (a as isize + dl) as usize;
                    if !self.b_ok(b) {
                        continue;
                    }
                    let a2 = self.mate_b[b];
                    if a2 == NIL {
                        if limit == u32::MAX {
                            limit = da + 1;
                        }
                    } else if self.mark_a[a2 as usize] != ep {
                        self.mark_a[a2 as usize] = ep;
                        self.layer[a2 as usize] = da + 1;
                        queue.push(a2);
                    }
                }
            }
            if limit == u32::MAX {
                break;
            }
            let mut phase = 0;
            let n_off = self.deltas.len() as u32;
            for &a0 in left {
                if self.mate_a[a0 as usize] != NIL || self.mark_a[a0 as usize] != ep || self.layer[a0 as usize] != 0 {
                    continue;
                }
                stack.clear();
                stack.push((a0, 0, NIL));
                while let Some(&(a, k, _)) = stack.last() {
                    let au = a as usize;
                    let da = self.layer[au];
                    let mut advanced = false;
                    let mut kk = k;
                    while kk < n_off {
                        let b = (au as isize + self.deltas[kk as usize]) as usize;
                        kk += 1;
                        if !self.b_ok(b) {
                            continue;
                        }
                        let a2 = self.mate_b[b];
                        if a2 == NIL {
                            if da + 1 == limit {
                                let top = stack.last_mut().unwrap();
                                top.1 = kk;
                                top.2 = b as u32;
                                for &(x, _, y) in stack.iter() {
                                    self.mate_a[x as usize] = y;
                                    self.mate_b[y as usize] = x;
                                }
                                stack.clear();
                                phase += 1;
                                advanced = true;
                                break;
                            }
                        } else {
                            let a2u = a2 as usize;
                            if self.mark_a[a2u] == ep && self.layer[a2u] == da + 1 && da + 1 < limit {
                                let top = stack.last_mut().unwrap();
                                top.1 = kk;
                                top.2 = b as u32;
                                stack.push((a2, 0, NIL));
                                advanced = true;
                                break;
                            }
                        }
                    }
                    if !advanced {
                        self.layer[au] = DEAD;
                        stack.pop();
                    }
                }
            }
            if phase == 0 {
                break;
            }
            total += phase;
        }
        total
    }

    /// Canonical maximum matching of the cells of `r`: greedy initialisation then augmentation.
    pub fn canonical(&mut self, r: &Rect, rotate: usize) {
        self.clear_rect(r);
        self.set_mask(r);
        let left = self.a_cells(r);
        self.greedy(&left, rotate);
        self.hopcroft_karp(&left);
    }

    /// Shortest augmenting path of length ≤ max_len from the given free A-cells (breadth-first,
    /// starts and neighbours in the given orders). Returned as [a0, b0, a1, b1, ...].
    pub fn shortest_path(&mut self, starts: &[u32], max_len: usize) -> Option<Vec<u32>> {
        if max_len == 0 {
            return None;
        }
        let max_layer = ((max_len - 1) / 2) as u32;
        self.epoch += 1;
        let ep = self.epoch;
        let mut queue: Vec<u32> = Vec::with_capacity(starts.len());
        for &a in starts {
            let au = a as usize;
            if self.mate_a[au] == NIL && self.mark_a[au] != ep {
                self.mark_a[au] = ep;
                self.layer[au] = 0;
                self.parent_a[au] = NIL;
                queue.push(a);
            }
        }
        let mut qi = 0;
        while qi < queue.len() {
            let a = queue[qi] as usize;
            qi += 1;
            for &dl in &self.deltas {
                let b = (a as isize + dl) as usize;
                if !self.b_ok(b) || self.mark_b[b] == ep {
                    continue;
                }
                self.mark_b[b] = ep;
                self.parent_b[b] = a as u32;
                let a2 = self.mate_b[b];
                if a2 == NIL {
                    return Some(self.trace(b as u32));
                }
                let a2u = a2 as usize;
                if self.layer[a] < max_layer && self.mark_a[a2u] != ep {
                    self.mark_a[a2u] = ep;
                    self.layer[a2u] = self.layer[a] + 1;
                    self.parent_a[a2u] = b as u32;
                    queue.push(a2);
                }
            }
        }
        None
    }

    fn trace(&self, end_b: u32) -> Vec<u32> {
        let mut rev = vec![end_b];
        let mut b = end_b;
        loop {
            let a = self.parent_b[b as usize];
            rev.push(a);
            let pb = self.parent_a[a as usize];
            if pb == NIL {
                break;
            }
            rev.push(pb);
            b = pb;
        }
        rev.reverse();
        rev
    }

    pub fn flip(&mut self, path: &[u32]) {
        for pair in path.chunks(2) {
            self.mate_a[pair[0] as usize] = pair[1];
            self.mate_b[pair[1] as usize] = pair[0];
        }
    }

    /// Alternating-reachable sets from free `left` vertices (A side, B side), in discovery order.
    pub fn koenig_sets(&mut self, left: &[u32]) -> (Vec<u32>, Vec<u32>) {
        self.epoch += 1;
        let ep = self.epoch;
        let mut za = Vec::new();
        let mut zb = Vec::new();
        for &a in left {
            if self.mate_a[a as usize] == NIL {
                self.mark_a[a as usize] = ep;
                za.push(a);
            }
        }
        let mut qi = 0;
        while qi < za.len() {
            let a = za[qi] as usize;
            qi += 1;
            for &dl in &self.deltas {
                let b = (a as isize + dl) as usize;
                if !self.b_ok(b) || self.mark_b[b] == ep {
                    continue;
                }
                self.mark_b[b] = ep;
                zb.push(b as u32);
                let a2 = self.mate_b[b];
                if a2 != NIL && self.mark_a[a2 as usize] != ep {
                    self.mark_a[a2 as usize] = ep;
                    za.push(a2);
                }
            }
        }
        (za, zb)
    }

    /// Matched pairs (A-cell, B-cell) with the A-cell in `r`, in window coordinates.
    pub fn pairs_in(&self, r: &Rect) -> Vec<(Vec<i64>, Vec<i64>)> {
        self.cells_in(r)
            .into_iter()
            .filter(|&p| self.mate_a[p as usize] != NIL)
            .map(|p| (self.coords(p), self.coords(self.mate_a[p as usize])))
            .collect()
    }
}
