//! Experiment configuration documents (JSON).

use serde::{Deserialize, Serialize};

use crate::bounds::BetaSource;
use crate::chaining::FiniteMetricSpace;
use crate::erm::{Activation, PerceptronParams, PerceptronSpec};
use crate::error::{Error, Result};
use crate::mixing::MarkovChainSpec;

/// Which evaluation of the main inequality supplies the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    #[default]
    Compact,
    Decomposed,
}

/// Built-in Lipschitz loss family for the concentration experiment:
/// `g(z, θ) = (v(z) − θ)²` over a uniform θ grid, with `v` mapping states to
/// reals (state index by default).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarLossFamily {
    pub theta_min: f64,
    pub theta_max: f64,
    pub points: usize,
    #[serde(default)]
    pub state_values: Option<Vec<f64>>,
}

impl ScalarLossFamily {
    pub fn validate(&self, num_states: usize) -> Result<()> {
        if self.points < 1 || self.points > 10_000 {
            return Err(Error::Invalid(format!(
                "theta grid must have 1..=10000 points, got {}",
                self.points
            )));
        }
        if !(self.theta_min.is_finite() && self.theta_max.is_finite())
            || self.theta_min > self.theta_max
        {
            return Err(Error::Invalid(format!(
                "invalid theta range [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        if let Some(values) = &self.state_values {
            if values.len() != num_states {
                return Err(Error::Invalid(format!(
                    "state_values has {} entries for a {num_states}-state chain",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("state_values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.theta_min];
        }
        let step = (self.theta_max - self.theta_min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.theta_min + i as f64 * step).collect()
    }

    pub fn values(&self, num_states: usize) -> Vec<f64> {
        self.state_values
            .clone()
            .unwrap_or_else(|| (0..num_states).map(|x| x as f64).collect())
    }
}

/// Bound inputs of the concentration experiment; `n` comes either explicitly
/// or through the effective-sample-size rule, and ε₁ either explicitly or
/// calibrated so the nominal failure probability hits `target_prob`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationBoundConfig {
    pub alpha: f64,
    pub c_theta: f64,
    pub c_z: f64,
    pub r: f64,
    pub s: f64,
    pub gamma2: f64,
    pub gamma_alpha: f64,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub zeta_for_n: Option<f64>,
    #[serde(default)]
    pub eps1: Option<f64>,
    #[serde(default)]
    pub target_prob: Option<f64>,
    pub eps2: f64,
    pub beta: BetaSource,
    #[serde(default)]
    pub form: BoundForm,
}

/// Concentration-dominance experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    pub chain: MarkovChainSpec,
    pub t_grid: Vec<u64>,
    pub replications: u64,
    pub g: ScalarLossFamily,
    pub bound: ConcentrationBoundConfig,
}

impl ConcentrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Invalid("replication count must be >= 1".into()));
        }
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("T grid must be nonempty and strictly sorted".into()));
        }
        self.g.validate(self.chain.num_states())?;
        if self.bound.n.is_none() && self.bound.zeta_for_n.is_none() {
            return Err(Error::Invalid("bound config needs n or zeta_for_n".into()));
        }
        if self.bound.eps1.is_none() && self.bound.target_prob.is_none() {
            return Err(Error::Invalid("bound config needs eps1 or target_prob".into()));
        }
        if let Some(p) = self.bound.target_prob {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Invalid(format!("target_prob must be in (0,1), got {p}")));
            }
        }
        Ok(())
    }
}

/// Basic-inequality check configuration of the ERM experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BasicCheckConfig {
    pub points_per_axis: usize,
    pub draws: usize,
}

/// ERM oracle-inequality experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErmConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    pub phi: f64,
    pub sigma: f64,
    pub noise_sd: f64,
    pub k: usize,
    pub d: usize,
    pub activation: Activation,
    pub c_theta: f64,
    /// Teacher parameters; drawn at random inside Θ when omitted.
    #[serde(default)]
    pub teacher: Option<PerceptronParams>,
    pub t_grid: Vec<u64>,
    pub replications: u64,
    pub restarts: usize,
    pub steps: usize,
    #[serde(default)]
    pub step0: Option<f64>,
    pub risk_draws: usize,
    /// Oracle-risk sample = oracle_factor × max(T grid), restarts scaled the
    /// same way.
    pub oracle_factor: usize,
    pub oracle_draws: usize,
    pub zeta: f64,
    pub bound_c: f64,
    #[serde(default)]
    pub basic_check: Option<BasicCheckConfig>,
}

impl ErmConfig {
    pub fn spec(&self) -> Result<PerceptronSpec> {
        PerceptronSpec::new(self.k, self.d, self.activation, self.c_theta)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.replications < 1 {
            return Err(Error::Invalid("replication count must be >= 1".into()));
        }
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("T grid must be nonempty and strictly sorted".into()));
        }
        if self.restarts == 0 || self.steps == 0 {
            return Err(Error::Invalid("training needs restarts >= 1 and steps >= 1".into()));
        }
        if self.oracle_factor == 0 {
            return Err(Error::Invalid("oracle_factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// β-profile: exact coefficients of a chain over lags 0..=lmax.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaProfileConfig {
    #[serde(flatten)]
    pub chain: MarkovChainSpec,
    #[serde(default = "default_lmax")]
    pub lmax: u64,
}

fn default_lmax() -> u64 {
    20
}

/// Metric space input: an explicit distance matrix or a Euclidean cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceConfig {
    Points(Vec<Vec<f64>>),
    Dist(Vec<Vec<f64>>),
}

impl SpaceConfig {
    pub fn build(&self) -> Result<FiniteMetricSpace> {
        match self {
            SpaceConfig::Points(points) => FiniteMetricSpace::from_euclidean(points),
            SpaceConfig::Dist(rows) => FiniteMetricSpace::new(rows.clone()),
        }
    }
}

/// γ-profile: greedy and entropy-integral functionals (plus the exact value
/// on spaces of at most 6 points) for a list of tail orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaProfileConfig {
    pub space: SpaceConfig,
    pub alphas: Vec<f64>,
}

/// Trajectory generator for the `simulate` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorConfig {
    Markov { spec: MarkovChainSpec },
    Ar1 { phi: f64, sigma: f64, d: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    pub generator: GeneratorConfig,
    pub t: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_loss_family_grid_and_defaults() {
        let g = ScalarLossFamily {
            theta_min: -1.0,
            theta_max: 1.0,
            points: 5,
            state_values: None,
        };
        g.validate(2).unwrap();
        assert_eq!(g.theta_grid(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.values(3), vec![0.0, 1.0, 2.0]);
        let bad = ScalarLossFamily {
            theta_min: 1.0,
            theta_max: -1.0,
            points: 5,
            state_values: None,
        };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn beta_profile_config_parses_flat_chain_keys() {
        let cfg: BetaProfileConfig =
            serde_json::from_str(r#"{"P": [[0.7, 0.3], [0.3, 0.7]], "lmax": 5}"#).unwrap();
        assert_eq!(cfg.lmax, 5);
        assert_eq!(cfg.chain.num_states(), 2);
        let defaulted: BetaProfileConfig =
            serde_json::from_str(r#"{"P": [[0.5, 0.5], [0.5, 0.5]]}"#).unwrap();
        assert_eq!(defaulted.lmax, 20);
    }

    #[test]
    fn space_config_builds_both_input_kinds() {
        let points: GammaProfileConfig = serde_json::from_str(
            r#"{"space": {"points": [[0.0], [1.0]]}, "alphas": [2.0]}"#,
        )
        .unwrap();
        assert_eq!(points.space.build().unwrap().len(), 2);
        let dist: GammaProfileConfig = serde_json::from_str(
            r#"{"space": {"dist": [[0.0, 1.0], [1.0, 0.0]]}, "alphas": [1.0]}"#,
        )
        .unwrap();
        assert_eq!(dist.space.build().unwrap().diameter(), 1.0);
    }
}
