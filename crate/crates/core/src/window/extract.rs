use crate::error::{Error, Result};
use crate::geometry::{FreeVectorSystem, Shape, TorusPoint};
use crate::lattice::{CellSet, Rect};

/// Default cap on window volume: a 4096² window.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 24;

/// Lattice window of the coset fibers A_u and B_u.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetWindow {
    pub base: TorusPoint,
    pub sys: FreeVectorSystem,
    pub window: Rect,
    pub a_bits: CellSet,
    pub b_bits: CellSet,
    /// Width of the boundary-tainted band.
    pub buffer: i64,
}

impl CosetWindow {
    /// Window with explicit bit grids; used for synthetic instances and by the loader.
    pub fn from_bits(base: TorusPoint, sys: FreeVectorSystem, a_bits: CellSet, b_bits: CellSet) -> Result<Self> {
        if a_bits.rect() != b_bits.rect() {
            return Err(Error::arg("A and B grids must share the window rectangle"));
        }
        if a_bits.dim() != sys.d {
            return Err(Error::DimensionMismatch { expected: sys.d, got: a_bits.dim() });
        }
        if base.dim() != sys.k {
            return Err(Error::DimensionMismatch { expected: sys.k, got: base.dim() });
        }
        let window = a_bits.rect().clone();
        Ok(CosetWindow { base, sys, window, a_bits, b_bits, buffer: 0 })
    }

    pub fn d(&self) -> usize {
        self.sys.d
    }

    pub fn m_cap(&self) -> u32 {
        self.sys.m_cap
    }

    /// Torus point of the window cell with row-major index `idx`.
    pub fn point_of_index(&self, idx: usize, out: &mut [f64]) {
        let c = self.window.coords(idx);
        self.sys.coset_coords_into(self.base.coords(), &c, out);
    }

    /// Cells farther than `buffer` from the window edge.
    pub fn core(&self) -> Option<Rect> {
        self.window.shrink(self.buffer)
    }
}

pub fn extract_window(
    shape_a: &Shape,
    shape_b: &Shape,
    sys: &FreeVectorSystem,
    u: &TorusPoint,
    window: &Rect,
) -> Result<CosetWindow> {
    extract_window_with_cap(shape_a, shape_b, sys, u, window, DEFAULT_MEMORY_CAP)
}

pub fn extract_window_with_cap(
    shape_a: &Shape,
    shape_b: &Shape,
    sys: &FreeVectorSystem,
    u: &TorusPoint,
    window: &Rect,
    cap: usize,
) -> Result<CosetWindow> {
    if window.dim() != sys.d {
        return Err(Error::DimensionMismatch { expected: sys.d, got: window.dim() });
    }
    if u.dim() != sys.k {
        return Err(Error::DimensionMismatch { expected: sys.k, got: u.dim() });
    }
    for s in [shape_a, shape_b] {
        if s.dim() != sys.k {
            return Err(Error::DimensionMismatch { expected: sys.k, got: s.dim() });
        }
        s.validate()?;
    }
    let volume = window.sides.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s as usize));
    match volume {
        Some(v) if v <= cap => {}
        _ => {
            return Err(Error::Resource(format!(
                "window {:?} exceeds the memory cap of {cap} cells",
                window.sides
            )))
        }
    }
    let eval = |shape: &Shape| {
        CellSet::from_index_fn(window.clone(), |i| {
            let c = window.coords(i);
            let mut p = vec![0.0; sys.k];
            sys.coset_coords_into(u.coords(), &c, &mut p);
            shape.contains(&p)
        })
    };
    let a_bits = eval(shape_a);
    let b_bits = eval(shape_b);
    Ok(CosetWindow { base: u.clone(), sys: sys.clone(), window: window.clone(), a_bits, b_bits, buffer: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_free_system;
    use rand::Rng;

    #[test]
    fn full_and_empty_shapes() {
        let sys = sample_free_system(7, 2, 2, 8).unwrap();
        let w = Rect::centered_cube(2, 32);
        let win = extract_window(&Shape::full(2), &Shape::empty(2), &sys, &TorusPoint::zero(2), &w).unwrap();
        assert_eq!(win.a_bits.count(), 1024);
        assert_eq!(win.b_bits.count(), 0);
    }

    #[test]
    fn disk_density_matches_area() {
        let sys = sample_free_system(7, 2, 2, 8).unwrap();
        let r = (0.2 / std::f64::consts::PI).sqrt();
        let disk = Shape::disk(vec![0.5, 0.5], r);
        let w = Rect::centered_cube(2, 256);
        let mut rng = crate::rng::substream(1, "bases");
        for _ in 0..10 {
            let u = TorusPoint::new(vec![rng.random(), rng.random()]);
            let win = extract_window(&disk, &disk, &sys, &u, &w).unwrap();
            let frac = win.a_bits.count() as f64 / 65536.0;
            assert!((frac - 0.2).abs() < 0.02, "{frac}");
        }
    }

    #[test]
    fn extraction_is_pure_and_capped() {
        let sys = sample_free_system(3, 2, 2, 4).unwrap();
        let disk = Shape::disk(vec![0.2, 0.7], 0.2);
        let sq = Shape::square(vec![0.1, 0.1], 0.3);
        let w = Rect::centered_cube(2, 64);
        let u = TorusPoint::new(vec![0.25, 0.5]);
        let a = extract_window(&disk, &sq, &sys, &u, &w).unwrap();
        let b = extract_window(&disk, &sq, &sys, &u, &w).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            extract_window_with_cap(&disk, &sq, &sys, &u, &w, 1000),
            Err(Error::Resource(_))
        ));
    }
}
