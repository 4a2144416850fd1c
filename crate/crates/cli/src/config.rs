//! Experiment configuration: a flat JSON document with validation that
//! names the offending field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("could not parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("could not read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Interval,
    Square,
    Lshape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsSpec {
    /// L2 projection of the constant one function.
    ConstantOne,
    /// The k-th discrete eigenfunction (1-indexed).
    Eigenfunction { k: usize },
    /// Seeded uniform [-1, 1] components, M-normalized.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundsSpec {
    /// Power/inverse iteration with a multiplicative safety factor.
    Auto { safety: f64 },
    /// Fixed interval, e.g. the values quoted in published experiments.
    Manual { lambda_lo_sq: f64, lambda_hi_sq: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: Domain,
    /// Divisions per unit length.
    pub n: usize,
    /// Polynomial order, 1 or 2.
    pub order: usize,
    pub rhs: RhsSpec,
    pub s_list: Vec<f64>,
    pub r_max: usize,
    pub bounds: BoundsSpec,
    /// Relative tolerance for iterative solves.
    #[serde(default = "default_solver_tol")]
    pub solver_rel_tol: f64,
    /// Lucky-breakdown drop tolerance for the snapshot basis.
    #[serde(default = "default_drop_tol")]
    pub drop_tol: f64,
}

fn default_solver_tol() -> f64 {
    1e-12
}

fn default_drop_tol() -> f64 {
    1e-10
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field: &'static str, reason: String| Err(ConfigError::Invalid { field, reason });
        if self.n < 2 {
            return fail("n", format!("must be at least 2, got {}", self.n));
        }
        if self.domain == Domain::Lshape && self.n % 2 != 0 {
            return fail("n", format!("must be even on the L-shape, got {}", self.n));
        }
        if !(self.order == 1 || self.order == 2) {
            return fail("order", format!("must be 1 or 2, got {}", self.order));
        }
        if self.order == 2 && self.domain == Domain::Interval {
            return fail("order", "P2 is not supported on the interval".into());
        }
        if self.s_list.is_empty() {
            return fail("s_list", "must not be empty".into());
        }
        for &s in &self.s_list {
            if !(s > 0.0 && s < 1.0) {
                return fail("s_list", format!("all entries must lie in (0, 1), got {s}"));
            }
        }
        if self.r_max < 1 {
            return fail("r_max", format!("must be at least 1, got {}", self.r_max));
        }
        match self.bounds {
            BoundsSpec::Auto { safety } => {
                if !(safety >= 1.0) {
                    return fail("bounds.safety", format!("must be >= 1, got {safety}"));
                }
            }
            BoundsSpec::Manual {
                lambda_lo_sq,
                lambda_hi_sq,
            } => {
                if !(lambda_lo_sq > 0.0 && lambda_hi_sq > lambda_lo_sq) {
                    return fail(
                        "bounds",
                        format!("manual bounds need 0 < lambda_lo_sq < lambda_hi_sq, got [{lambda_lo_sq}, {lambda_hi_sq}]"),
                    );
                }
            }
        }
        if let RhsSpec::Eigenfunction { k } = self.rhs {
            if k == 0 {
                return fail("rhs.k", "eigenfunction index is 1-based; got 0".into());
            }
        }
        if !(self.solver_rel_tol > 0.0 && self.solver_rel_tol < 1e-3) {
            return fail(
                "solver_rel_tol",
                format!("must lie in (0, 1e-3), got {}", self.solver_rel_tol),
            );
        }
        if !(self.drop_tol > 0.0 && self.drop_tol < 1e-3) {
            return fail(
                "drop_tol",
                format!("must lie in (0, 1e-3), got {}", self.drop_tol),
            );
        }
        Ok(())
    }

    /// Replaces the random seed, if the rhs is the seeded one.
    pub fn override_seed(&mut self, seed: u64) {
        if let RhsSpec::Random { seed: s } = &mut self.rhs {
            *s = seed;
        }
    }

    /// Replaces the safety factor, if bounds are automatic.
    pub fn override_safety(&mut self, safety: f64) {
        if let BoundsSpec::Auto { safety: s } = &mut self.bounds {
            *s = safety;
        }
    }
}
