//! Iteration engines with stopping rules, per-iteration traces, and
//! Lyapunov-certificate diagnostics.

pub mod certify;
pub mod lyapunov;
pub mod steps;
mod trace;

pub use trace::{fmt17, ResidualMetric, StopStatus, Trace, TraceRecord};

use std::time::Instant;

use crate::directions::{DirectionKind, DirectionRule};
use crate::error::{Error, Result};
use crate::linops::{residual_fb, residual_ne, ForwardMap, Point, Resolvent};
use crate::stepsizes::{
    best_iterate_range, golden_ratio, upper_stepsize, Family, ProblemConstants,
};
use lyapunov::{lyapunov_p, lyapunov_v_gr_weighted, lyapunov_v_rfbs, potential_weights};
use steps::{step_fbs, step_fw, step_geg, step_geg2, step_gfbfs2, step_gr2, step_rfbs2};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Relative residual above which a run is declared diverged.
pub const DIVERGENCE_CAP: f64 = 1e12;

/// The iteration families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverFamily {
    /// `x+ = x - eta F x` (baseline; divergent on skew problems).
    Forward,
    /// `x+ = J_{eta T}(x - eta F x)` (baseline).
    ForwardBackward,
    /// Generalized extragradient for equations.
    Geg,
    /// Generalized extragradient for inclusions (two resolvents per step).
    Geg2,
    /// Generalized forward-backward-forward for inclusions (one resolvent).
    Gfbfs2,
    /// Reflected forward-backward splitting.
    Rfbs2,
    /// Golden-ratio scheme.
    Gr2,
}

impl SolverFamily {
    pub fn needs_resolvent(&self) -> bool {
        matches!(
            self,
            SolverFamily::ForwardBackward
                | SolverFamily::Geg2
                | SolverFamily::Gfbfs2
                | SolverFamily::Rfbs2
                | SolverFamily::Gr2
        )
    }

    pub fn uses_direction(&self) -> bool {
        matches!(
            self,
            SolverFamily::Geg | SolverFamily::Geg2 | SolverFamily::Gfbfs2
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverFamily::Forward => "fw",
            SolverFamily::ForwardBackward => "fbs",
            SolverFamily::Geg => "geg",
            SolverFamily::Geg2 => "geg2",
            SolverFamily::Gfbfs2 => "gfbfs2",
            SolverFamily::Rfbs2 => "rfbs2",
            SolverFamily::Gr2 => "gr2",
        }
    }
}

/// Fixed stepsize, or the family's certified upper bound scaled by a safety
/// factor in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    Fixed(f64),
    Auto { safety: f64 },
}

impl Default for EtaChoice {
    fn default() -> Self {
        EtaChoice::Auto { safety: 0.9 }
    }
}

/// Configuration of a single solver run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub family: SolverFamily,
    pub direction: DirectionKind,
    pub beta: f64,
    pub eta: EtaChoice,
    pub tau: Option<f64>,
    /// Assumed weak-Minty modulus used only by the auto stepsize.
    pub rho: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(family: SolverFamily) -> Self {
        SolverConfig {
            family,
            direction: DirectionKind::Extragradient,
            beta: 1.0,
            eta: EtaChoice::default(),
            tau: None,
            rho: 0.0,
            max_iters: 1000,
            tolerance: 1e-10,
            record_every: 1,
        }
    }

    pub fn validate(&self, has_resolvent: bool) -> Result<()> {
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be positive"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid("beta must lie in (0, 1]"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::invalid("tolerance must be nonnegative"));
        }
        match (self.family, self.tau) {
            (SolverFamily::Gr2, Some(tau)) => {
                if !(tau > 1.0 && tau < 1.0 + 3.0_f64.sqrt()) {
                    return Err(Error::invalid(format!(
                        "tau must lie in (1, 1+sqrt3), got {tau}"
                    )));
                }
            }
            (SolverFamily::Gr2, None) => {
                return Err(Error::invalid("the golden-ratio family requires tau"))
            }
            (_, Some(_)) => {
                return Err(Error::invalid("tau is only meaningful for the gr2 family"))
            }
            _ => {}
        }
        if self.family.needs_resolvent() != has_resolvent {
            return Err(Error::invalid(if has_resolvent {
                "resolvent supplied to a family that does not use one"
            } else {
                "family requires a resolvent"
            }));
        }
        if let EtaChoice::Fixed(v) = self.eta {
            if !(v > 0.0) {
                return Err(Error::invalid("fixed stepsize must be positive"));
            }
        }
        if let EtaChoice::Auto { safety } = self.eta {
            if !(safety > 0.0 && safety < 1.0) {
                return Err(Error::invalid("auto safety factor must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// Resolves the concrete stepsize, using the operator's Lipschitz
    /// estimate for the auto choice.
    ///
    /// The forward baselines have no certified bound; auto uses `safety / L`
    /// as a convention.
    pub fn resolve_eta(&self, f: &ForwardMap) -> Result<f64> {
        match self.eta {
            EtaChoice::Fixed(v) => Ok(v),
            EtaChoice::Auto { safety } => {
                let l = f
                    .lipschitz()
                    .ok_or_else(|| {
                        Error::invalid("auto stepsize requires a Lipschitz estimate on F")
                    })?;
                if l <= 0.0 {
                    return Err(Error::invalid("auto stepsize requires L > 0"));
                }
                let bound = match self.family {
                    SolverFamily::Forward | SolverFamily::ForwardBackward => 1.0 / l,
                    SolverFamily::Geg | SolverFamily::Gfbfs2 => {
                        let (k1, k2) = self.direction.kappas();
                        let pc = ProblemConstants::new(l, self.rho, self.beta, k1, k2)?;
                        best_iterate_range(&pc)?.eta_hi
                    }
                    SolverFamily::Geg2 => {
                        let (k1, k2) = self.direction.kappas();
                        let pc = ProblemConstants::new(l, self.rho, self.beta, k1, k2)?;
                        upper_stepsize(&pc, Family::Geg2NiBest, None)?
                    }
                    SolverFamily::Rfbs2 => (SQRT2 - 1.0) / l,
                    SolverFamily::Gr2 => {
                        let tau = self.tau.expect("validated");
                        let pc = ProblemConstants::new(l, self.rho, 1.0, 0.0, 0.0)?;
                        let family = if tau <= golden_ratio() {
                            Family::Gr2Low
                        } else {
                            Family::Gr2High
                        };
                        upper_stepsize(&pc, family, Some(tau))?
                    }
                };
                Ok(safety * bound)
            }
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: StopStatus,
    pub x: Point,
    pub trace: Trace,
    pub eta: f64,
}

struct Recorder {
    res0: f64,
    record_every: usize,
    records: Vec<TraceRecord>,
    last_pushed_k: Option<u64>,
    start: Instant,
}

impl Recorder {
    fn rel(&self, res: f64) -> f64 {
        if self.res0 > 0.0 {
            res / self.res0
        } else if res == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn push(
        &mut self,
        k: u64,
        fevals: u64,
        revals: u64,
        res: f64,
        p: Option<f64>,
        v: Option<f64>,
    ) {
        if self.last_pushed_k == Some(k) {
            return;
        }
        self.records.push(TraceRecord {
            k,
            fevals,
            revals,
            residual: res,
            rel_residual: self.rel(res),
            elapsed_ns: self.start.elapsed().as_nanos(),
            lyapunov_p: p,
            lyapunov_v: v,
        });
        self.last_pushed_k = Some(k);
    }

    fn due(&self, k: u64) -> bool {
        k % self.record_every as u64 == 0
    }
}

/// Runs the configured scheme from `x0`.
///
/// Stops at relative residual below the tolerance, at the iteration budget,
/// or on divergence (non-finite iterate or relative residual above
/// [`DIVERGENCE_CAP`]); divergence is reported in the status, not as an
/// error. When `x_star` is supplied the family's potential value is recorded
/// alongside each trace row.
///
/// The run forks the operator handles, so the trace's evaluation counts are
/// exactly this run's consumption.
pub fn run(
    cfg: &SolverConfig,
    f: &ForwardMap,
    j: Option<&Resolvent>,
    x0: &Point,
    x_star: Option<&Point>,
) -> Result<RunResult> {
    cfg.validate(j.is_some())?;
    if !x0.is_finite() {
        return Err(Error::invalid("starting point has non-finite coordinates"));
    }
    let f = f.fork();
    let j = j.map(Resolvent::fork);
    let eta = cfg.resolve_eta(&f)?;
    let metric = match &j {
        Some(_) => ResidualMetric::ForwardBackward { eta },
        None => ResidualMetric::OperatorNorm,
    };
    let residual = |x: &Point| -> f64 {
        match &j {
            Some(j) => residual_fb(&f, j, x, eta),
            None => residual_ne(&f, x),
        }
    };

    let lipschitz = f.lipschitz();
    let (kappa1, kappa2) = cfg.direction.kappas();
    let p_weights = (cfg.family.uses_direction() && x_star.is_some())
        .then(|| lipschitz.map(|l| potential_weights(kappa1, kappa2, l, eta)))
        .flatten();
    let gr_weight = cfg.tau.map(|tau| {
        if tau <= golden_ratio() {
            0.5 * tau * (tau - 1.0)
        } else {
            let psi = (2.0 * tau + 2.0 - tau * tau) / tau;
            0.5 * psi * (tau - 1.0)
        }
    });

    let mut rec = Recorder {
        res0: residual(x0),
        record_every: cfg.record_every,
        records: Vec::new(),
        last_pushed_k: None,
        start: Instant::now(),
    };

    // Row 0: collapsed history means every potential reduces to a squared
    // distance (scaled by tau for the golden-ratio family).
    let p0 = match (x_star, &p_weights) {
        (Some(xs), Some(_)) => Some(x0.dist_sq(xs)),
        _ => None,
    };
    let v0 = x_star.and_then(|xs| match cfg.family {
        SolverFamily::Rfbs2 => Some(x0.dist_sq(xs)),
        SolverFamily::Gr2 => Some(cfg.tau.unwrap() * x0.dist_sq(xs)),
        _ => None,
    });
    let first_res = rec.res0;
    rec.push(0, f.eval_count(), j.as_ref().map_or(0, Resolvent::eval_count), first_res, p0, v0);

    if rec.res0 == 0.0 {
        return Ok(RunResult {
            status: StopStatus::Converged,
            x: x0.clone(),
            trace: Trace {
                records: rec.records,
                status: StopStatus::Converged,
                metric,
                eta,
            },
            eta,
        });
    }

    let mut x = x0.clone();
    let mut rule = DirectionRule::new(cfg.direction);
    // Family-specific history for potentials and the reflected/golden steps.
    let mut x_prev = x0.clone();
    let mut y_prev = x0.clone();
    let mut status = StopStatus::MaxIters;

    for k in 0..cfg.max_iters {
        let k_next = (k + 1) as u64;
        let (x_next, y_k) = match cfg.family {
            SolverFamily::Forward => (step_fw(&f, &x, eta), None),
            SolverFamily::ForwardBackward => {
                (step_fbs(&f, j.as_ref().unwrap(), &x, eta), None)
            }
            SolverFamily::Geg => {
                let s = step_geg(&f, &mut rule, &x, eta, cfg.beta)?;
                (s.x_next, Some(s.y))
            }
            SolverFamily::Geg2 => {
                let s = step_geg2(&f, j.as_ref().unwrap(), &mut rule, &x, eta, cfg.beta)?;
                (s.x_next, Some(s.y))
            }
            SolverFamily::Gfbfs2 => {
                let s = step_gfbfs2(&f, j.as_ref().unwrap(), &mut rule, &x, eta, cfg.beta)?;
                (s.x_next, Some(s.y))
            }
            SolverFamily::Rfbs2 => {
                let s = step_rfbs2(&f, j.as_ref().unwrap(), &x, &x_prev, eta);
                (s.x_next, Some(s.y))
            }
            SolverFamily::Gr2 => {
                let s = step_gr2(
                    &f,
                    j.as_ref().unwrap(),
                    &x,
                    &y_prev,
                    eta,
                    cfg.tau.unwrap(),
                );
                (s.x_next, Some(s.y))
            }
        };

        let fevals = f.eval_count();
        let revals = j.as_ref().map_or(0, Resolvent::eval_count);

        if !x_next.is_finite() {
            status = StopStatus::Diverged;
            rec.push(k_next, fevals, revals, f64::INFINITY, None, None);
            break;
        }

        // Pure-budget runs (tolerance 0) only need the residual on recorded
        // rows; with a positive tolerance the stopping rule checks every
        // iterate.
        let is_last = k + 1 == cfg.max_iters;
        if cfg.tolerance == 0.0 && !rec.due(k_next) && !is_last {
            x_prev = x;
            y_prev = y_k.unwrap_or_else(|| x_prev.clone());
            x = x_next;
            continue;
        }

        let res = residual(&x_next);
        let y_k = y_k.unwrap_or_else(|| x.clone());
        let p_val = match (x_star, &p_weights) {
            (Some(xs), Some(w)) => Some(lyapunov_p(&x_next, &y_k, &x, xs, w)),
            _ => None,
        };
        let v_val = x_star.and_then(|xs| match cfg.family {
            SolverFamily::Rfbs2 => {
                lipschitz.map(|l| lyapunov_v_rfbs(&x_next, &x, &y_k, xs, &f, eta, l))
            }
            SolverFamily::Gr2 => {
                let tau = cfg.tau.unwrap();
                let y_next = x_next.add_scaled(1.0 / tau, &y_k.sub(&x_next));
                Some(lyapunov_v_gr_weighted(
                    &y_next,
                    &x_next,
                    &x,
                    xs,
                    tau,
                    gr_weight.unwrap(),
                ))
            }
            _ => None,
        });

        let rel = rec.rel(res);
        let stopping = !res.is_finite() || rel > DIVERGENCE_CAP || rel <= cfg.tolerance;
        if rec.due(k_next) || stopping || is_last {
            rec.push(k_next, fevals, revals, res, p_val, v_val);
        }

        x_prev = x;
        y_prev = y_k;
        x = x_next;

        if !res.is_finite() || rel > DIVERGENCE_CAP {
            status = StopStatus::Diverged;
            break;
        }
        if rel <= cfg.tolerance {
            status = StopStatus::Converged;
            break;
        }
    }

    Ok(RunResult {
        status,
        x,
        trace: Trace {
            records: rec.records,
            status,
            metric,
            eta,
        },
        eta,
    })
}
