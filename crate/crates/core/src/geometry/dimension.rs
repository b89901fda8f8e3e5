use rand::Rng;
use serde::{Deserialize, Serialize};

use super::shape::{BoundaryProbe, Shape};
use crate::error::{Error, Result};
use crate::rng::{substream, STREAM_DIMENSION};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxDimensionEstimate {
    pub eps_ladder: Vec<f64>,
    pub neighborhood_measures: Vec<f64>,
    pub fitted_dimension: f64,
    pub std_error: f64,
}

/// Least-squares fit y = a + b·x; returns (b, standard error of b).
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if x.len() <= 2 {
        return (slope, 0.0);
    }
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, (ssr / (n - 2.0) / sxx).sqrt())
}

/// Monte-Carlo Minkowski estimate: all ε share one sample set, so the measures are monotone.
pub fn boundary_dimension_estimate(
    shape: &Shape,
    eps_ladder: &[f64],
    samples: usize,
    seed: u64,
) -> Result<BoxDimensionEstimate> {
    if eps_ladder.len() < 2 {
        return Err(Error::arg("need at least two ε values"));
    }
    if eps_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::arg("ε ladder must be strictly decreasing"));
    }
    if eps_ladder.iter().any(|&e| !(e > 0.0 && e < 0.25)) {
        return Err(Error::arg("ε values must lie in (0, 1/4)"));
    }
    if samples < 10_000 {
        return Err(Error::arg("need at least 10^4 samples"));
    }
    shape.validate()?;
    let k = shape.dim();
    let probe = BoundaryProbe::new(shape);
    let mut rng = substream(seed, STREAM_DIMENSION);
    let mut hits = vec![0u64; eps_ladder.len()];
    let mut p = vec![0.0; k];
    for _ in 0..samples {
        for c in p.iter_mut() {
            *c = rng.random::<f64>();
        }
        // Ladder is decreasing, so once a sample misses it misses all smaller ε.
        for (i, &e) in eps_ladder.iter().enumerate() {
            if probe.near(&p, e) {
                hits[i] += 1;
            } else {
                break;
            }
        }
    }
    let measures: Vec<f64> = hits.iter().map(|&h| h as f64 / samples as f64).collect();
    if measures.iter().any(|&m| m == 0.0) {
        return Err(Error::Degenerate(
            "boundary neighborhood has zero estimated measure (shape empty or full?)".into(),
        ));
    }
    let x: Vec<f64> = eps_ladder.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = measures.iter().map(|m| m.ln()).collect();
    let (slope, se) = least_squares_slope(&x, &y);
    Ok(BoxDimensionEstimate {
        eps_ladder: eps_ladder.to_vec(),
        neighborhood_measures: measures,
        fitted_dimension: k as f64 - slope,
        std_error: se,
    })
}
