use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::torus::{centered, wrap, TorusPoint};
use crate::discrepancy::sat::SummedArea;
use crate::error::{Error, Result};
use crate::lattice::Rect;

/// A measurable subset of the torus with a total membership predicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Disk { center: TorusPoint, radius: f64 },
    #[serde(rename = "square")]
    AxisSquare { corner: TorusPoint, side: f64 },
    Polygon { vertices: Vec<TorusPoint> },
    Bitmap(Bitmap),
}

/// Pixel grid over [0,1)^k; pixel index of a point is floor(p·R) per axis, axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Bitmap {
    pub resolution: usize,
    pub k: usize,
    pub bits: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct BitmapRepr {
    resolution: usize,
    k: usize,
    /// Packed LSB-first, hex encoded.
    bits: String,
}

impl Serialize for Bitmap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        BitmapRepr { resolution: self.resolution, k: self.k, bits: hex::encode(bytes) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bitmap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = BitmapRepr::deserialize(d)?;
        let bytes = hex::decode(&r.bits).map_err(D::Error::custom)?;
        let n = r
            .resolution
            .checked_pow(r.k as u32)
            .ok_or_else(|| D::Error::custom("bitmap too large"))?;
        if bytes.len() != n.div_ceil(8) {
            return Err(D::Error::custom(format!("bitmap needs {} bytes, got {}", n.div_ceil(8), bytes.len())));
        }
        let bits = (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(Bitmap { resolution: r.resolution, k: r.k, bits })
    }
}

impl Bitmap {
    pub fn new(resolution: usize, k: usize, bits: Vec<bool>) -> Result<Self> {
        if resolution == 0 || k == 0 {
            return Err(Error::arg("bitmap resolution and dimension must be positive"));
        }
        let n = resolution
            .checked_pow(k as u32)
            .ok_or_else(|| Error::Resource("bitmap too large".into()))?;
        if bits.len() != n {
            return Err(Error::arg(format!("bitmap needs {n} bits, got {}", bits.len())));
        }
        Ok(Bitmap { resolution, k, bits })
    }

    fn pixel(&self, c: f64) -> usize {
        ((c * self.resolution as f64) as usize).min(self.resolution - 1)
    }

    fn index(&self, p: &[f64]) -> usize {
        p.iter().fold(0, |acc, &c| acc * self.resolution + self.pixel(c))
    }
}

impl Shape {
    pub fn disk(center: Vec<f64>, radius: f64) -> Self {
        Shape::Disk { center: TorusPoint::new(center), radius }
    }

    pub fn square(corner: Vec<f64>, side: f64) -> Self {
        Shape::AxisSquare { corner: TorusPoint::new(corner), side }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Self {
        Shape::Polygon { vertices: vertices.into_iter().map(|v| TorusPoint::new(v.to_vec())).collect() }
    }

    /// The whole torus, as a one-pixel bitmap.
    pub fn full(k: usize) -> Self {
        Shape::Bitmap(Bitmap { resolution: 1, k, bits: vec![true] })
    }

    pub fn empty(k: usize) -> Self {
        Shape::Bitmap(Bitmap { resolution: 1, k, bits: vec![false] })
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Disk { center, .. } => center.dim(),
            Shape::AxisSquare { corner, .. } => corner.dim(),
            Shape::Polygon { .. } => 2,
            Shape::Bitmap(b) => b.k,
        }
    }

    /// Checks parameters and the diameter restriction (< 1) that keeps wrap-around unambiguous.
    /// Polygons are held to extent < 1/2 because they are unwrapped around their first vertex.
    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Disk { radius, .. } => {
                if !(radius.is_finite() && *radius >= 0.0 && *radius < 0.5) {
                    return Err(Error::arg(format!("disk radius must lie in [0, 1/2), got {radius}")));
                }
            }
            Shape::AxisSquare { side, .. } => {
                if !(side.is_finite() && *side >= 0.0 && *side < 1.0) {
                    return Err(Error::arg(format!("square side must lie in [0, 1), got {side}")));
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::arg("polygon needs at least 3 vertices"));
                }
                for v in vertices {
                    if v.dim() != 2 {
                        return Err(Error::DimensionMismatch { expected: 2, got: v.dim() });
                    }
                }
                let local = self.polygon_local(vertices);
                for axis in 0..2 {
                    let lo = local.iter().map(|v| v[axis]).fold(f64::INFINITY, f64::min);
                    let hi = local.iter().map(|v| v[axis]).fold(f64::NEG_INFINITY, f64::max);
                    if hi - lo >= 0.5 {
                        return Err(Error::arg("polygon extent must stay below 1/2 per axis"));
                    }
                }
            }
            Shape::Bitmap(b) => {
                Bitmap::new(b.resolution, b.k, b.bits.clone())?;
            }
        }
        Ok(())
    }

    /// Vertices unwrapped into a common chart around the first vertex.
    fn polygon_local(&self, vertices: &[TorusPoint]) -> Vec<[f64; 2]> {
        let o = vertices[0].coords();
        vertices
            .iter()
            .map(|v| {
                let c = v.coords();
                [o[0] + centered(c[0] - o[0]), o[1] + centered(c[1] - o[1])]
            })
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Shape::Disk { center, radius } => {
                let c = center.coords();
                let mut d2 = 0.0;
                let mut first_nonzero = 0.0;
                for (x, y) in p.iter().zip(c) {
                    let dlt = centered(x - y);
                    if first_nonzero == 0.0 {
                        first_nonzero = dlt;
                    }
                    d2 += dlt * dlt;
                }
                let r2 = radius * radius;
                d2 < r2 || (d2 == r2 && first_nonzero < 0.0)
            }
            Shape::AxisSquare { corner, side } => {
                p.iter().zip(corner.coords()).all(|(x, c)| wrap(x - c) < *side)
            }
            Shape::Polygon { vertices } => {
                let local = self.polygon_local(vertices);
                let o = local[0];
                let q = [o[0] + centered(p[0] - o[0]), o[1] + centered(p[1] - o[1])];
                let mut inside = false;
                let n = local.len();
                for i in 0..n {
                    let a = local[i];
                    let b = local[(i + 1) % n];
                    if (a[1] > q[1]) != (b[1] > q[1]) {
                        let t = (q[1] - a[1]) / (b[1] - a[1]);
                        let x = a[0] + t * (b[0] - a[0]);
                        if q[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            Shape::Bitmap(b) => b.bits[b.index(p)],
        }
    }

    /// Lebesgue measure of the shape.
    pub fn measure(&self) -> f64 {
        match self {
            Shape::Disk { center, radius } => ball_volume(center.dim(), *radius),
            Shape::AxisSquare { corner, side } => side.powi(corner.dim() as i32),
            Shape::Polygon { vertices } => {
                let v = self.polygon_local(vertices);
                let n = v.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let a = v[i];
                        let b = v[(i + 1) % n];
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum();
                twice.abs() / 2.0
            }
            Shape::Bitmap(b) => {
                b.bits.iter().filter(|&&x| x).count() as f64 / b.bits.len() as f64
            }
        }
    }
}

/// Volume of the Euclidean k-ball of radius r.
pub fn ball_volume(k: usize, r: f64) -> f64 {
    let unit = match k {
        0 => 1.0,
        1 => 2.0,
        _ => {
            let mut v = if k % 2 == 0 { 1.0 } else { 2.0 };
            let mut j = if k % 2 == 0 { 2 } else { 3 };
            while j <= k {
                v *= 2.0 * std::f64::consts::PI / j as f64;
                j += 2;
            }
            v
        }
    };
    unit * r.powi(k as i32)
}

/// Precomputed data for "is p within ε of the boundary" queries.
pub(crate) enum BoundaryProbe<'a> {
    Exact(&'a Shape),
    Pixels { bitmap: &'a Bitmap, sat: SummedArea },
}

impl<'a> BoundaryProbe<'a> {
    pub fn new(shape: &'a Shape) -> Self {
        match shape {
            Shape::Bitmap(b) => {
                let rect = Rect::cube(vec![0; b.k], b.resolution as i64);
                let sat = SummedArea::from_fn(&rect, |i| b.bits[i]);
                BoundaryProbe::Pixels { bitmap: b, sat }
            }
            s => BoundaryProbe::Exact(s),
        }
    }

    pub fn near(&self, p: &[f64], eps: f64) -> bool {
        match self {
            BoundaryProbe::Exact(shape) => exact_boundary_distance(shape, p) <= eps,
            BoundaryProbe::Pixels { bitmap, sat } => {
                let r = bitmap.resolution as i64;
                // Split each axis range into at most two non-wrapping pieces.
                let mut pieces: Vec<Vec<(i64, i64)>> = Vec::with_capacity(bitmap.k);
                let mut total: u64 = 1;
                for &c in p {
                    let lo = ((c - eps) * r as f64).floor() as i64;
                    let hi = ((c + eps) * r as f64).floor() as i64;
                    let len = (hi - lo + 1).min(r);
                    total *= len as u64;
                    let start = lo.rem_euclid(r);
                    if start + len <= r {
                        pieces.push(vec![(start, len)]);
                    } else {
                        pieces.push(vec![(start, r - start), (0, start + len - r)]);
                    }
                }
                let mut ones: u64 = 0;
                let mut choice = vec![0usize; bitmap.k];
                let mut low = vec![0i64; bitmap.k];
                let mut sides = vec![0i64; bitmap.k];
                'outer: loop {
                    for a in 0..bitmap.k {
                        let (s, l) = pieces[a][choice[a]];
                        low[a] = s;
                        sides[a] = l;
                    }
                    ones += sat.box_count(&low, &sides);
                    for a in (0..bitmap.k).rev() {
                        choice[a] += 1;
                        if choice[a] < pieces[a].len() {
                            continue 'outer;
                        }
                        choice[a] = 0;
                    }
                    break;
                }
                ones > 0 && ones < total
            }
        }
    }
}

fn exact_boundary_distance(shape: &Shape, p: &[f64]) -> f64 {
    match shape {
        Shape::Disk { center, radius } => {
            let d2: f64 = p.iter().zip(center.coords()).map(|(x, y)| centered(x - y).powi(2)).sum();
            (d2.sqrt() - radius).abs()
        }
        Shape::AxisSquare { corner, side } => {
            let h = side / 2.0;
            let q: Vec<f64> = p
                .iter()
                .zip(corner.coords())
                .map(|(x, c)| centered(x - (c + h)).abs())
                .collect();
            if q.iter().all(|&v| v <= h) {
                q.iter().map(|&v| h - v).fold(f64::INFINITY, f64::min)
            } else {
                q.iter().map(|&v| (v - h).max(0.0).powi(2)).sum::<f64>().sqrt()
            }
        }
        Shape::Polygon { vertices } => {
            let v = shape.polygon_local(vertices);
            let o = v[0];
            let q = [o[0] + centered(p[0] - o[0]), o[1] + centered(p[1] - o[1])];
            let n = v.len();
            (0..n)
                .map(|i| segment_distance(q, v[i], v[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
        Shape::Bitmap(_) => unreachable!("bitmaps use the pixel probe"),
    }
}

fn segment_distance(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = [q[0] - a[0], q[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 { 0.0 } else { ((aq[0] * ab[0] + aq[1] * ab[1]) / len2).clamp(0.0, 1.0) };
    let dx = aq[0] - t * ab[0];
    let dy = aq[1] - t * ab[1];
    (dx * dx + dy * dy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn disk_boundary_tie_rule() {
        let d = Shape::disk(vec![0.5, 0.5], 0.125);
        assert!(d.contains(&[0.375, 0.5]));
        assert!(!d.contains(&[0.625, 0.5]));
        assert!(d.contains(&[0.5, 0.375]));
        assert!(!d.contains(&[0.5, 0.625]));
        assert!(d.contains(&[0.5, 0.5]));
    }

    #[test]
    fn square_is_half_open_and_wraps() {
        let s = Shape::square(vec![0.9, 0.9], 0.25);
        assert!(s.contains(&[0.9, 0.9]));
        assert!(s.contains(&[0.05, 0.1]));
        assert!(!s.contains(&[0.15, 0.1]));
        assert!(!s.contains(&[0.89, 0.95]));
        assert!((s.measure() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn polygon_membership_and_area() {
        let tri = Shape::polygon(vec![[0.1, 0.1], [0.4, 0.1], [0.1, 0.4]]);
        tri.validate().unwrap();
        assert!(tri.contains(&[0.15, 0.15]));
        assert!(!tri.contains(&[0.35, 0.35]));
        assert!((tri.measure() - 0.045).abs() < 1e-12);
        let wrapped = Shape::polygon(vec![[0.9, 0.9], [0.1, 0.9], [0.1, 0.1], [0.9, 0.1]]);
        wrapped.validate().unwrap();
        assert!(wrapped.contains(&[0.0, 0.0]));
        assert!(!wrapped.contains(&[0.5, 0.5]));
        assert!((wrapped.measure() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_large_shapes() {
        assert!(Shape::disk(vec![0.5, 0.5], 0.5).validate().is_err());
        assert!(Shape::square(vec![0.0, 0.0], 1.0).validate().is_err());
        // 0.55 unwraps to -0.45 next to the first vertex, so x spans [-0.45, 0.3].
        assert!(Shape::polygon(vec![[0.0, 0.0], [0.3, 0.0], [0.55, 0.1]]).validate().is_err());
        assert!(Shape::disk(vec![0.5, 0.5], 0.2).validate().is_ok());
    }

    #[test]
    fn json_forms() {
        let s: Shape = serde_json::from_str(r#"{"type":"disk","center":[0.5,0.5],"radius":0.2}"#).unwrap();
        assert_eq!(s, Shape::disk(vec![0.5, 0.5], 0.2));
        let q: Shape = serde_json::from_str(r#"{"type":"square","corner":[0.1,0.2],"side":0.3}"#).unwrap();
        assert_eq!(q, Shape::square(vec![0.1, 0.2], 0.3));
        let b = Shape::Bitmap(Bitmap::new(3, 2, vec![true, false, true, false, true, false, true, true, false]).unwrap());
        let txt = serde_json::to_string(&b).unwrap();
        assert_eq!(serde_json::from_str::<Shape>(&txt).unwrap(), b);
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(2, 1.0) - std::f64::consts::PI).abs() < 1e-12);
        assert!((ball_volume(3, 1.0) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((ball_volume(4, 1.0) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_and_square_of_equal_area_agree_in_frequency() {
        let r = (0.125 / std::f64::consts::PI).sqrt();
        let disk = Shape::disk(vec![0.3, 0.6], r);
        let sq = Shape::square(vec![0.1, 0.2], 0.125f64.sqrt());
        let mut rng = substream(11, "membership");
        let n = 1_000_000;
        let (mut a, mut b) = (0u64, 0u64);
        for _ in 0..n {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            a += disk.contains(&p) as u64;
            b += sq.contains(&p) as u64;
        }
        let sd = (n as f64 * 0.125 * 0.875).sqrt() * 2f64.sqrt();
        assert!(((a as f64) - (b as f64)).abs() < 3.0 * sd, "{a} vs {b}");
    }

    #[test]
    fn pixel_probe_detects_edges() {
        let mut bits = vec![false; 16];
        bits[5] = true;
        let b = Shape::Bitmap(Bitmap::new(4, 2, bits).unwrap());
        let probe = BoundaryProbe::new(&b);
        assert!(!probe.near(&[0.3, 0.3], 0.01));
        assert!(probe.near(&[0.26, 0.3], 0.02));
        assert!(!probe.near(&[0.8, 0.8], 0.01));
        assert!(probe.near(&[0.99, 0.99], 0.3));
    }
}
