use serde::{Deserialize, Serialize};

/// Numerical knobs shared by every pipeline. A fixed seed makes every
/// report reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub starts: usize,
    /// Singular values below `rank_tol * sigma_max` count as zero.
    pub rank_tol: f64,
    /// Chordal radius for identifying solutions.
    pub dedup_radius: f64,
    /// Chordal radius for identifying roots on P^1.
    pub root_cluster: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            starts: 0,
            rank_tol: 1e-9,
            dedup_radius: 1e-6,
            root_cluster: 1e-6,
        }
    }
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        RunConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("dedup_radius", self.dedup_radius),
            ("root_cluster", self.root_cluster),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}
