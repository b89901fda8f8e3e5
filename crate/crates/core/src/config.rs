//! JSON run configuration shared by the CLI commands; echoed into every manifest.

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baire::BaireParams;
use crate::error::{Error, Result};
use crate::geometry::{sample_free_system, FreeVectorSystem, Shape, TorusPoint};
use crate::lattice::Rect;
use crate::lebesgue::LebesgueParams;
use crate::rng::{substream, STREAM_BASE};
use crate::window::{extract_window, CosetWindow};

fn two() -> usize {
    2
}

fn eight() -> u32 {
    8
}

fn side() -> i64 {
    1024
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shape_a: Shape,
    #[serde(default)]
    pub shape_b: Option<Shape>,
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default = "two")]
    pub d: usize,
    #[serde(default = "eight")]
    pub m_cap: u32,
    #[serde(default)]
    pub seed: u64,
    /// Side L of the centred window.
    #[serde(default = "side")]
    pub window: i64,
    /// Base point u; drawn from the seed when absent.
    #[serde(default)]
    pub base: Option<TorusPoint>,
    #[serde(default)]
    pub ladder: Option<Vec<i64>>,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub radii: Option<Vec<i64>>,
    /// Explicit oracle horizons; 2·r_i when absent.
    #[serde(default)]
    pub horizons: Option<Vec<i64>>,
    #[serde(default)]
    pub candidates: Option<usize>,
    /// Largest dyadic scale of the discrepancy profile.
    #[serde(default)]
    pub i_max: Option<u32>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s).map_err(|e| Error::arg(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.d < 2 || self.m_cap < 1 {
            return Err(Error::arg("need k ≥ 1, d ≥ 2 and M ≥ 1"));
        }
        if self.window < 1 {
            return Err(Error::arg("window side must be positive"));
        }
        for s in [Some(&self.shape_a), self.shape_b.as_ref()].into_iter().flatten() {
            if s.dim() != self.k {
                return Err(Error::DimensionMismatch { expected: self.k, got: s.dim() });
            }
            s.validate()?;
        }
        if let Some(b) = &self.base {
            if b.dim() != self.k {
                return Err(Error::DimensionMismatch { expected: self.k, got: b.dim() });
            }
        }
        if let Some(r) = &self.radii {
            if r.is_empty() || r[0] < 1 || r.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::arg("radii must be positive and non-decreasing"));
            }
            if let Some(h) = &self.horizons {
                if h.len() != r.len() {
                    return Err(Error::arg("one horizon per radius"));
                }
            }
        }
        if self.threads == Some(0) {
            return Err(Error::arg("thread count must be positive"));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<FreeVectorSystem> {
        sample_free_system(self.seed, self.k, self.d, self.m_cap)
    }

    pub fn base_point(&self) -> TorusPoint {
        self.base.clone().unwrap_or_else(|| {
            let mut rng = substream(self.seed, STREAM_BASE);
            TorusPoint::new((0..self.k).map(|_| rng.random::<f64>()).collect())
        })
    }

    pub fn window_rect(&self) -> Rect {
        Rect::centered_cube(self.d, self.window)
    }

    pub fn shape_b(&self) -> Result<&Shape> {
        self.shape_b.as_ref().ok_or_else(|| Error::arg("this command needs shape_b"))
    }

    pub fn extract(&self) -> Result<CosetWindow> {
        extract_window(&self.shape_a, self.shape_b()?, &self.system()?, &self.base_point(), &self.window_rect())
    }

    pub fn lebesgue_params(&self) -> Result<LebesgueParams> {
        let ladder = self.ladder.clone().ok_or_else(|| Error::arg("this command needs a ladder"))?;
        let levels = self.levels.unwrap_or(ladder.len().saturating_sub(1).min(2));
        Ok(LebesgueParams { ladder, levels, mutant: false, check_invariants: true })
    }

    pub fn baire_params(&self) -> Result<BaireParams> {
        let radii = self.radii.clone().ok_or_else(|| Error::arg("this command needs radii"))?;
        Ok(BaireParams {
            radii,
            horizons: self.horizons.clone(),
            candidates: self.candidates.unwrap_or(16),
            seed: self.seed,
            hall_check: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(r#"{"shape_a":{"type":"disk","center":[0.5,0.5],"radius":0.2}}"#).unwrap();
        assert_eq!((c.k, c.d, c.m_cap, c.window), (2, 2, 8, 1024));
        assert_eq!(c.base_point(), c.base_point());
        assert!(c.shape_b().is_err());
        assert!(c.lebesgue_params().is_err());
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(RunConfig::from_json("{").is_err());
        assert!(RunConfig::from_json(r#"{"shape_a":{"type":"disk","center":[0.5,0.5],"radius":0.2},"bogus":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"shape_a":{"type":"disk","center":[0.5],"radius":0.2}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"shape_a":{"type":"disk","center":[0.5,0.5],"radius":0.2},"radii":[8,4]}"#).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::from_json(
            r#"{"shape_a":{"type":"disk","center":[0.5,0.5],"radius":0.2},"shape_b":{"type":"square","corner":[0.1,0.2],"side":0.3},"ladder":[8,32,128],"levels":2,"seed":3}"#,
        )
        .unwrap();
        let again: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(c.lebesgue_params().unwrap().levels, 2);
    }
}
