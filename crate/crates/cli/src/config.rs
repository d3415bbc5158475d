//! JSON experiment configuration: a fixed, fail-closed schema (unknown keys
//! are errors) mapping onto the library's problem generators and solver
//! configurations.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use exgrad::directions::DirectionKind;
use exgrad::linops::tseng_hat;
use exgrad::problems::{
    gen_logit_ambiguous, gen_matrix_game, gen_quad_minimax, make_known_solution_inclusion,
    EigenMode, GameFamily, LogitAmbiguousSpec, LogitSource, MatrixGameSpec, QuadMinimaxSpec,
};
use exgrad::solvers::{EtaChoice, SolverConfig, SolverFamily};
use exgrad::{DenseMatrix, ForwardMap, Point, Resolvent};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithms: Vec<AlgoSpec>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub mode: AxisMode,
    /// Solve `0 ∈ Fx + Tx` with an equation solver through the Tseng
    /// operator at this probe stepsize.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_lambda: Option<f64>,
    /// Stepsize candidates for the `grid` command (per-algorithm override in
    /// [`AlgoSpec::eta_grid`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub eta_grid_scale: GridScale,
    #[serde(default = "default_grid_iters")]
    pub grid_iters: usize,
    /// Starting point `c * ones(p)`; defaults to 0.01 for quadratic problems
    /// and 0.5 for games and logistic regression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_instances() -> usize {
    1
}
fn default_max_iters() -> usize {
    5000
}
fn default_record_every() -> usize {
    1
}
fn default_grid_iters() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisMode {
    #[default]
    Iterations,
    Fevals,
}

/// How `eta_grid` values are interpreted: multiples of `1/L`, or absolute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScale {
    #[default]
    InverseLipschitz,
    Absolute,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    QuadMinimax {
        p1: usize,
        p2: usize,
        eigen_mode: EigenModeSpec,
        #[serde(default)]
        constrained: bool,
        #[serde(default)]
        with_solution: bool,
    },
    MatrixGame {
        family: GameFamilyName,
        q: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_theta")]
        theta: f64,
    },
    Logit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset: Option<PathBuf>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_features")]
        features: usize,
        copies: usize,
        #[serde(default = "default_noise")]
        noise_scale: f64,
        gamma: f64,
    },
    KnownSolution {
        p1: usize,
        p2: usize,
    },
}

fn default_alpha() -> f64 {
    1.0
}
fn default_theta() -> f64 {
    0.005
}
fn default_samples() -> usize {
    100
}
fn default_features() -> usize {
    20
}
fn default_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenModeSpec {
    Clip(f64),
    Uniform(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameFamilyName {
    Family1,
    Family2,
    Burglar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgoSpec {
    pub label: String,
    pub family: FamilyName,
    #[serde(default)]
    pub direction: DirectionSpec,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub eta: EtaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Per-algorithm iteration budget (falls back to the experiment's).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<Vec<f64>>,
}

fn default_beta() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Fw,
    Fbs,
    Geg,
    Geg2,
    Gfbfs2,
    Rfbs2,
    Gr2,
}

impl FamilyName {
    pub fn to_family(self) -> SolverFamily {
        match self {
            FamilyName::Fw => SolverFamily::Forward,
            FamilyName::Fbs => SolverFamily::ForwardBackward,
            FamilyName::Geg => SolverFamily::Geg,
            FamilyName::Geg2 => SolverFamily::Geg2,
            FamilyName::Gfbfs2 => SolverFamily::Gfbfs2,
            FamilyName::Rfbs2 => SolverFamily::Rfbs2,
            FamilyName::Gr2 => SolverFamily::Gr2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DirectionSpec {
    #[default]
    Eg,
    Past,
    Affine {
        alpha1: f64,
        alpha2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
}

impl DirectionSpec {
    pub fn to_kind(self) -> Result<DirectionKind> {
        Ok(match self {
            DirectionSpec::Eg => DirectionKind::Extragradient,
            DirectionSpec::Past => DirectionKind::PastExtragradient,
            DirectionSpec::Affine { alpha1, alpha2, c } => match c {
                Some(c) => DirectionKind::affine_with_c(alpha1, alpha2, c)?,
                None => DirectionKind::affine(alpha1, alpha2),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Auto(AutoTag),
    Fixed(f64),
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutoTag {
    Auto,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("invalid experiment configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            bail!("config needs at least one algorithm");
        }
        if self.instances == 0 {
            bail!("instances must be >= 1");
        }
        if self.record_every == 0 {
            bail!("record_every must be >= 1");
        }
        if let Some(lambda) = self.reduction_lambda {
            if !(lambda > 0.0) {
                bail!("reduction_lambda must be positive");
            }
        }
        let problem_has_t = self.problem.has_multivalued_part();
        for algo in &self.algorithms {
            let family = algo.family.to_family();
            let effective_t = problem_has_t && self.reduction_lambda.is_none();
            if family.needs_resolvent() && !effective_t {
                bail!(
                    "algorithm {:?}: family {:?} needs a multivalued part, but the problem \
                     has none (or it was reduced away)",
                    algo.label,
                    algo.family
                );
            }
            if !family.needs_resolvent() && problem_has_t && self.reduction_lambda.is_none() {
                bail!(
                    "algorithm {:?}: equation solver on a constrained problem requires \
                     reduction_lambda",
                    algo.label
                );
            }
            if let EtaSpec::Fixed(v) = algo.eta {
                if !(v > 0.0) {
                    bail!("algorithm {:?}: fixed eta must be positive", algo.label);
                }
            }
        }
        Ok(())
    }
}

impl ProblemSpec {
    pub fn has_multivalued_part(&self) -> bool {
        match self {
            ProblemSpec::QuadMinimax { constrained, .. } => *constrained,
            ProblemSpec::MatrixGame { .. } => true,
            ProblemSpec::Logit { .. } => true,
            ProblemSpec::KnownSolution { .. } => true,
        }
    }

    fn default_x0(&self) -> f64 {
        match self {
            ProblemSpec::QuadMinimax { .. } | ProblemSpec::KnownSolution { .. } => 0.01,
            ProblemSpec::MatrixGame { .. } | ProblemSpec::Logit { .. } => 0.5,
        }
    }
}

/// Data for the `gen` snapshot command.
pub enum Snapshot {
    Affine { matrix: DenseMatrix, offset: Point },
    Payoff(DenseMatrix),
    Logit { rows: Vec<Vec<f64>>, labels: Vec<f64> },
}

/// A problem instantiated at a concrete seed.
pub struct BuiltProblem {
    pub forward: ForwardMap,
    pub resolvent: Option<Resolvent>,
    pub x_star: Option<Point>,
    pub x0: Point,
    pub dim: usize,
    pub snapshot: Snapshot,
}

pub fn build_problem(
    spec: &ProblemSpec,
    seed: u64,
    x0_constant: Option<f64>,
) -> Result<BuiltProblem> {
    let x0c = x0_constant.unwrap_or_else(|| spec.default_x0());
    let built = match spec {
        ProblemSpec::QuadMinimax {
            p1,
            p2,
            eigen_mode,
            constrained,
            with_solution,
        } => {
            let mode = match eigen_mode {
                EigenModeSpec::Clip(lower) => EigenMode::Clip { lower: *lower },
                EigenModeSpec::Uniform(lo, hi) => EigenMode::Uniform { lo: *lo, hi: *hi },
            };
            let gen_spec = QuadMinimaxSpec {
                p1: *p1,
                p2: *p2,
                eigen_mode: mode,
                seed,
            };
            let prob = gen_quad_minimax(&gen_spec, *constrained, *with_solution)?;
            let dim = p1 + p2;
            BuiltProblem {
                snapshot: Snapshot::Affine {
                    matrix: prob.affine.matrix().clone(),
                    offset: prob.affine.offset().clone(),
                },
                forward: prob.forward,
                resolvent: prob.resolvent,
                x_star: prob.x_star,
                x0: Point::constant(dim, x0c),
                dim,
            }
        }
        ProblemSpec::MatrixGame {
            family,
            q,
            alpha,
            theta,
        } => {
            let fam = match family {
                GameFamilyName::Family1 => GameFamily::Family1 { alpha: *alpha },
                GameFamilyName::Family2 => GameFamily::Family2 { alpha: *alpha },
                GameFamilyName::Burglar => GameFamily::Burglar { theta: *theta },
            };
            let prob = gen_matrix_game(&MatrixGameSpec {
                family: fam,
                q: *q,
                seed,
            })?;
            BuiltProblem {
                snapshot: Snapshot::Payoff(prob.payoff),
                forward: prob.forward,
                resolvent: Some(prob.resolvent),
                x_star: None,
                x0: Point::constant(prob.dim, x0c),
                dim: prob.dim,
            }
        }
        ProblemSpec::Logit {
            dataset,
            samples,
            features,
            copies,
            noise_scale,
            gamma,
        } => {
            let source = match dataset {
                Some(path) => LogitSource::Libsvm(path.clone()),
                None => LogitSource::Synthetic {
                    samples: *samples,
                    features: *features,
                },
            };
            let prob = gen_logit_ambiguous(&LogitAmbiguousSpec {
                source,
                copies: *copies,
                noise_scale: *noise_scale,
                gamma: *gamma,
                seed,
            })?;
            let rows = prob
                .data
                .features
                .iter()
                .flat_map(|copies| copies.iter().cloned())
                .collect();
            let labels = prob.data.labels.clone();
            BuiltProblem {
                snapshot: Snapshot::Logit { rows, labels },
                x0: Point::constant(prob.dim, x0c),
                dim: prob.dim,
                forward: prob.forward,
                resolvent: Some(prob.resolvent),
                x_star: None,
            }
        }
        ProblemSpec::KnownSolution { p1, p2 } => {
            let prob = make_known_solution_inclusion(*p1, *p2, seed)?;
            let dim = p1 + p2;
            BuiltProblem {
                snapshot: Snapshot::Affine {
                    matrix: prob.affine.matrix().clone(),
                    offset: prob.affine.offset().clone(),
                },
                forward: prob.forward,
                resolvent: Some(prob.resolvent),
                x_star: Some(prob.x_star),
                x0: Point::constant(dim, x0c),
                dim,
            }
        }
    };
    Ok(built)
}

/// Applies the Tseng reduction, turning an inclusion problem into an
/// equation problem for the NE solver families.
///
/// The reduced operator gets the conservative Lipschitz bound
/// `1 + lambda L + (1 + lambda L)^2` when the base constant is known.
pub fn reduce_problem(problem: BuiltProblem, lambda: f64) -> Result<BuiltProblem> {
    let resolvent = match problem.resolvent {
        Some(r) => r,
        None => bail!("reduction_lambda set, but the problem has no multivalued part"),
    };
    let mut hat = tseng_hat(&problem.forward, &resolvent, lambda);
    if let Some(l) = problem.forward.lipschitz() {
        let ll = lambda * l;
        hat = hat.with_lipschitz(1.0 + ll + (1.0 + ll) * (1.0 + ll));
    }
    Ok(BuiltProblem {
        forward: hat,
        resolvent: None,
        ..problem
    })
}

impl AlgoSpec {
    pub fn solver_config(&self, exp: &ExperimentConfig) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.family.to_family());
        cfg.direction = self.direction.to_kind()?;
        cfg.beta = self.beta;
        cfg.eta = match self.eta {
            EtaSpec::Fixed(v) => EtaChoice::Fixed(v),
            EtaSpec::Auto(_) => EtaChoice::Auto {
                safety: self.safety.unwrap_or(0.9),
            },
        };
        cfg.tau = self.tau;
        cfg.max_iters = self.max_iters.unwrap_or(exp.max_iters);
        cfg.tolerance = exp.tolerance;
        cfg.record_every = exp.record_every;
        Ok(cfg)
    }
}
