//! Certificate drivers: run a scheme on a known-solution instance and check
//! its convergence inequalities at every iteration.
//!
//! Each check reports the worst observed slack (normalized as documented on
//! the check) so a failure names the iteration and magnitude of the
//! violation rather than just a boolean.

use crate::directions::{DirectionKind, DirectionRule};
use crate::error::{Error, Result};
use crate::linops::{ForwardMap, Point, Resolvent};
use crate::solvers::lyapunov::{
    lyapunov_p, lyapunov_v_gr_weighted, lyapunov_v_rfbs, potential_weights,
};
use crate::solvers::steps::{step_geg, step_geg2, step_gfbfs2, step_gr2, step_rfbs2};
use crate::stepsizes::{constants_at, golden_ratio, CertifiedConstants, Family, ProblemConstants};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// One checked inequality family.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst observed slack in the check's normalization.
    pub worst_slack: f64,
    /// Tolerance the slack was compared against.
    pub threshold: f64,
    /// Iteration attaining the worst slack.
    pub worst_iter: Option<usize>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{}: {} (worst slack {:.3e} vs tol {:.3e}{})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_slack,
            self.threshold,
            match self.worst_iter {
                Some(k) => format!(" at k={k}"),
                None => String::new(),
            }
        )
    }
}

/// Collection of checks from one certified run.
#[derive(Debug, Clone, Default)]
pub struct CertifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, tracker: SlackTracker, threshold: f64) {
        let worst = tracker.worst.max(0.0);
        self.checks.push(CheckOutcome {
            name: name.into(),
            passed: worst <= threshold,
            worst_slack: worst,
            threshold,
            worst_iter: tracker.at,
        });
    }
}

#[derive(Debug, Clone, Copy)]
struct SlackTracker {
    worst: f64,
    at: Option<usize>,
}

impl SlackTracker {
    fn new() -> Self {
        SlackTracker {
            worst: f64::NEG_INFINITY,
            at: None,
        }
    }

    fn observe(&mut self, slack: f64, k: usize) {
        if slack > self.worst {
            self.worst = slack;
            self.at = Some(k);
        }
    }
}

fn running_min_bound_check(
    tracker: &mut SlackTracker,
    running_min: &mut f64,
    value_sq: f64,
    bound_at_k: f64,
    k: usize,
) {
    if value_sq < *running_min {
        *running_min = value_sq;
    }
    // Relative violation of min <= bound.
    tracker.observe((*running_min - bound_at_k) / bound_at_k, k);
}

/// Certifies a generalized extragradient run on an equation with known root.
///
/// Checks, where applicable at the given constants: the potential decrease,
/// the best-iterate bounds on `||u^k||^2` and `||F x^k||^2`, plain-rule
/// distance monotonicity, the last-iterate monotone quantity, and the
/// plain-rule per-step residual decrease.
#[allow(clippy::too_many_arguments)]
pub fn certify_geg_ne(
    f: &ForwardMap,
    x0: &Point,
    x_star: &Point,
    kind: DirectionKind,
    beta: f64,
    eta: f64,
    iters: usize,
    rho: f64,
    tol: f64,
) -> Result<CertifyReport> {
    let f = f.fork();
    let l = f
        .lipschitz()
        .ok_or_else(|| Error::invalid("certification requires a Lipschitz estimate"))?;
    let (kappa1, kappa2) = kind.kappas();
    let pc = ProblemConstants::new(l, rho, beta, kappa1, kappa2)?;
    let consts = constants_at(&pc, eta, Family::GegNe, None)?;
    let (c1, gamma, omega, psi_eg) = match consts {
        CertifiedConstants::GegNe {
            c1,
            gamma,
            omega,
            psi_eg,
            ..
        } => (c1, gamma, omega, psi_eg),
        _ => unreachable!(),
    };
    let weights = potential_weights(kappa1, kappa2, l, eta);
    let d0 = x0.dist_sq(x_star);
    let p0 = d0;

    let mut report = CertifyReport::default();
    let mut potential = SlackTracker::new();
    let mut u_bound = SlackTracker::new();
    let mut fx_bound = SlackTracker::new();
    let mut distance = SlackTracker::new();
    let mut last_iterate = SlackTracker::new();
    let mut eg_decrease = SlackTracker::new();

    let mut rule = DirectionRule::new(kind);
    let mut x = x0.clone();
    let mut p_prev = p0;
    let mut fx = f.eval_untracked(x0);
    let mut min_u_sq = f64::INFINITY;
    let mut min_fx_sq = fx.norm_sq();
    let mut m_prev = fx.norm_sq(); // omega term vanishes at k = 0
    fx_bound.observe((min_fx_sq - gamma * d0) / (gamma * d0), 0);

    for k in 0..iters {
        let step = step_geg(&f, &mut rule, &x, eta, beta)?;
        if !step.x_next.is_finite() {
            return Err(Error::Diverged { iter: k });
        }

        // Potential decrease: P_{k+1} <= P_k, slack normalized by 1 + P_0.
        let p_next = lyapunov_p(&step.x_next, &step.y, &x, x_star, &weights);
        potential.observe((p_next - p_prev) / (1.0 + p0), k);

        // Best-iterate bounds hold for every budget K.
        let kf = (k + 1) as f64;
        if c1 > 0.0 {
            running_min_bound_check(
                &mut u_bound,
                &mut min_u_sq,
                step.u.norm_sq(),
                beta * beta * d0 / (c1 * eta * eta * kf),
                k,
            );
        }
        let fx_next = f.eval_untracked(&step.x_next);
        running_min_bound_check(
            &mut fx_bound,
            &mut min_fx_sq,
            fx_next.norm_sq(),
            gamma * d0 / (kf + 1.0),
            k,
        );

        if kappa1 == 0.0 && kappa2 == 0.0 {
            let slack = step.x_next.dist(x_star) - x.dist(x_star);
            distance.observe(slack / (1.0 + x_star.norm()), k);
        }
        if let Some(omega) = omega {
            let m_next = fx_next.norm_sq() + omega * fx_next.sub(&step.fy).norm_sq();
            last_iterate.observe((m_next - m_prev) / (1.0 + m_prev), k);
            m_prev = m_next;
        }
        if let Some(psi) = psi_eg {
            let lhs = fx_next.norm_sq();
            let rhs = fx.norm_sq() - psi * fx.sub(&step.fy).norm_sq();
            eg_decrease.observe((lhs - rhs) / (1.0 + fx.norm_sq()), k);
        }

        p_prev = p_next;
        fx = fx_next;
        x = step.x_next;
    }

    report.push("potential-nonincreasing", potential, tol);
    if c1 > 0.0 {
        report.push("best-iterate-direction-bound", u_bound, tol);
    }
    report.push("best-iterate-operator-bound", fx_bound, tol);
    if kappa1 == 0.0 && kappa2 == 0.0 {
        report.push("distance-nonincreasing", distance, tol);
    }
    if omega.is_some() {
        report.push("last-iterate-monotonicity", last_iterate, tol);
    }
    if psi_eg.map_or(false, |p| p >= 0.0) {
        report.push("plain-rule-residual-decrease", eg_decrease, tol);
    }
    Ok(report)
}

/// Certifies a two-resolvent inclusion run: potential decrease, the
/// best-iterate bound on the reconstructed residual `||F x^k + xi^k||`, and
/// (under the last-iterate hypotheses) the monotone `w`-quantity.
#[allow(clippy::too_many_arguments)]
pub fn certify_geg2(
    f: &ForwardMap,
    j: &Resolvent,
    x0: &Point,
    x_star: &Point,
    kind: DirectionKind,
    beta: f64,
    eta: f64,
    iters: usize,
    tol: f64,
) -> Result<CertifyReport> {
    let f = f.fork();
    let j = j.fork();
    let l = f
        .lipschitz()
        .ok_or_else(|| Error::invalid("certification requires a Lipschitz estimate"))?;
    let (kappa1, kappa2) = kind.kappas();
    let pc = ProblemConstants::new(l, 0.0, beta, kappa1, kappa2)?;
    let lambda = match constants_at(&pc, eta, Family::Geg2NiBest, None)? {
        CertifiedConstants::Geg2Best { lambda, .. } => lambda,
        _ => unreachable!(),
    };
    let omega = if beta == 1.0 && kappa2 == 0.0 {
        match constants_at(&pc, eta, Family::Geg2NiLast, None)? {
            CertifiedConstants::Geg2Last { omega, .. } => Some(omega),
            _ => unreachable!(),
        }
    } else {
        None
    };
    let weights = potential_weights(kappa1, kappa2, l, eta);
    let d0 = x0.dist_sq(x_star);

    let mut report = CertifyReport::default();
    let mut potential = SlackTracker::new();
    let mut w_bound = SlackTracker::new();
    let mut w_monotone = SlackTracker::new();

    let mut rule = DirectionRule::new(kind);
    let mut x = x0.clone();
    let mut p_prev = d0;
    let mut min_w_sq = f64::INFINITY;
    // (w^k, Fx^k - Fy^{k-1}) become available from k = 1 on.
    let mut m_prev: Option<f64> = None;

    for k in 0..iters {
        let step = step_geg2(&f, &j, &mut rule, &x, eta, beta)?;
        if !step.x_next.is_finite() {
            return Err(Error::Diverged { iter: k });
        }
        let p_next = lyapunov_p(&step.x_next, &step.y, &x, x_star, &weights);
        potential.observe((p_next - p_prev) / (1.0 + d0), k);

        let fx_next = f.eval_untracked(&step.x_next);
        let w_next = fx_next.add(&step.xi_next);
        let kf = (k + 1) as f64;
        running_min_bound_check(
            &mut w_bound,
            &mut min_w_sq,
            w_next.norm_sq(),
            lambda * d0 / (eta * eta * kf),
            k,
        );

        if let Some(omega) = omega {
            let m_next = w_next.norm_sq() + omega * fx_next.sub(&step.fy).norm_sq();
            if let Some(m) = m_prev {
                w_monotone.observe((m_next - m) / (1.0 + m), k);
            }
            m_prev = Some(m_next);
        }

        p_prev = p_next;
        x = step.x_next;
    }

    report.push("potential-nonincreasing", potential, tol);
    report.push("best-iterate-residual-bound", w_bound, tol);
    if omega.is_some() {
        report.push("w-monotonicity", w_monotone, tol);
    }
    Ok(report)
}

/// Certifies a single-resolvent forward-backward-forward run: potential
/// decrease and the best-iterate bound on `||F y^k + zeta^k||`.
#[allow(clippy::too_many_arguments)]
pub fn certify_gfbfs2(
    f: &ForwardMap,
    j: &Resolvent,
    x0: &Point,
    x_star: &Point,
    kind: DirectionKind,
    beta: f64,
    eta: f64,
    iters: usize,
    tol: f64,
) -> Result<CertifyReport> {
    let f = f.fork();
    let j = j.fork();
    let l = f
        .lipschitz()
        .ok_or_else(|| Error::invalid("certification requires a Lipschitz estimate"))?;
    let (kappa1, kappa2) = kind.kappas();
    let pc = ProblemConstants::new(l, 0.0, beta, kappa1, kappa2)?;
    let lambda = match constants_at(&pc, eta, Family::GegNe, None)? {
        CertifiedConstants::GegNe { lambda, .. } => lambda,
        _ => unreachable!(),
    };
    let weights = potential_weights(kappa1, kappa2, l, eta);
    let d0 = x0.dist_sq(x_star);

    let mut report = CertifyReport::default();
    let mut potential = SlackTracker::new();
    let mut fw_bound = SlackTracker::new();

    let mut rule = DirectionRule::new(kind);
    let mut x = x0.clone();
    let mut p_prev = d0;
    let mut min_sq = f64::INFINITY;

    for k in 0..iters {
        let step = step_gfbfs2(&f, &j, &mut rule, &x, eta, beta)?;
        if !step.x_next.is_finite() {
            return Err(Error::Diverged { iter: k });
        }
        let p_next = lyapunov_p(&step.x_next, &step.y, &x, x_star, &weights);
        potential.observe((p_next - p_prev) / (1.0 + d0), k);

        if lambda > 0.0 {
            let forward = step.fy.add(&step.zeta);
            let kf = (k + 1) as f64;
            running_min_bound_check(
                &mut fw_bound,
                &mut min_sq,
                forward.norm_sq(),
                d0 / (lambda * eta * eta * kf),
                k,
            );
        }

        p_prev = p_next;
        x = step.x_next;
    }

    report.push("potential-nonincreasing", potential, tol);
    if lambda > 0.0 {
        report.push("best-iterate-forward-bound", fw_bound, tol);
    }
    Ok(report)
}

/// Certifies a reflected forward-backward run: the potential decrease with
/// its explicit per-step decrement, and the monotone `w`-quantity.
pub fn certify_rfbs2(
    f: &ForwardMap,
    j: &Resolvent,
    x0: &Point,
    x_star: &Point,
    eta: f64,
    iters: usize,
    tol: f64,
) -> Result<CertifyReport> {
    let f = f.fork();
    let j = j.fork();
    let l = f
        .lipschitz()
        .ok_or_else(|| Error::invalid("certification requires a Lipschitz estimate"))?;
    let pc = ProblemConstants::new(l, 0.0, 1.0, 0.0, 0.0)?;
    let omega = match constants_at(&pc, eta, Family::Rfbs2, None)? {
        CertifiedConstants::Rfbs2 { omega, .. } => omega,
        _ => unreachable!(),
    };
    let decrement = 1.0 - (1.0 + SQRT2) * l * eta;
    let v0 = x0.dist_sq(x_star);

    let mut report = CertifyReport::default();
    let mut potential = SlackTracker::new();
    let mut w_monotone = SlackTracker::new();

    let mut x = x0.clone();
    let mut x_prev = x0.clone();
    let mut y_prev = x0.clone();
    let mut v_prev = v0;
    let mut m_prev: Option<f64> = None;

    for k in 0..iters {
        let step = step_rfbs2(&f, &j, &x, &x_prev, eta);
        if !step.x_next.is_finite() {
            return Err(Error::Diverged { iter: k });
        }
        let v_next = lyapunov_v_rfbs(&step.x_next, &x, &step.y, x_star, &f, eta, l);
        let drop = decrement * (step.y.dist_sq(&x) + x.dist_sq(&y_prev));
        // The k = 0 instance of the decrease presumes -Fx^0 ∈ Tx^0 (the
        // reconstructed multiplier convention); it only holds from k >= 1
        // for a generic starting point.
        if k >= 1 {
            potential.observe((v_next + drop - v_prev) / (1.0 + v0), k);
        }

        let fx_next = f.eval_untracked(&step.x_next);
        let w_next = fx_next.add(&step.xi_next);
        let m_next = w_next.norm_sq() + omega * fx_next.sub(&step.fy).norm_sq();
        if let Some(m) = m_prev {
            w_monotone.observe((m_next - m) / (1.0 + m), k);
        }
        m_prev = Some(m_next);

        v_prev = v_next;
        x_prev = x;
        y_prev = step.y;
        x = step.x_next;
    }

    report.push("potential-decrease-with-decrement", potential, tol);
    report.push("w-monotonicity", w_monotone, tol);
    Ok(report)
}

/// Certifies a golden-ratio run in either ratio regime: the potential
/// decrease with the regime's explicit decrement terms.
pub fn certify_gr2(
    f: &ForwardMap,
    j: &Resolvent,
    x0: &Point,
    x_star: &Point,
    eta: f64,
    tau: f64,
    iters: usize,
    tol: f64,
) -> Result<CertifyReport> {
    let f = f.fork();
    let j = j.fork();
    let l = f
        .lipschitz()
        .ok_or_else(|| Error::invalid("certification requires a Lipschitz estimate"))?;
    let pc = ProblemConstants::new(l, 0.0, 1.0, 0.0, 0.0)?;
    let low_regime = tau <= golden_ratio();
    // Regime-specific potential weight and per-step decrement coefficients.
    let (second_weight, coeff_xy, coeff_xx) = if low_regime {
        let phi = match constants_at(&pc, eta, Family::Gr2Low, Some(tau))? {
            CertifiedConstants::Gr2Low { phi, .. } => phi,
            _ => unreachable!(),
        };
        (0.5 * tau * (tau - 1.0), tau * (tau - 1.0), (tau - 1.0) * phi)
    } else {
        let (psi, kappa) = match constants_at(&pc, eta, Family::Gr2High, Some(tau))? {
            CertifiedConstants::Gr2High { psi, kappa, .. } => (psi, kappa),
            _ => unreachable!(),
        };
        (0.5 * psi * (tau - 1.0), psi * (tau - 1.0), (tau - 1.0) * kappa)
    };
    let v0 = tau * x0.dist_sq(x_star);

    let mut report = CertifyReport::default();
    let mut potential = SlackTracker::new();

    let mut x = x0.clone();
    let mut x_prev = x0.clone();
    let mut y_prev = x0.clone();
    let mut v_prev = v0;

    for k in 0..iters {
        let step = step_gr2(&f, &j, &x, &y_prev, eta, tau);
        if !step.x_next.is_finite() {
            return Err(Error::Diverged { iter: k });
        }
        // V_{k+1} needs y^{k+1}, reproducible from (x^{k+1}, y^k).
        let y_next = step.x_next.add_scaled(1.0 / tau, &step.y.sub(&step.x_next));
        let v_next =
            lyapunov_v_gr_weighted(&y_next, &step.x_next, &x, x_star, tau, second_weight);
        let drop = coeff_xy * x.dist_sq(&step.y) + coeff_xx * x.dist_sq(&x_prev);
        // As for the reflected scheme, k = 0 presumes -Fx^0 ∈ Tx^0; the
        // three-cycle argument is genuine from k >= 1.
        if k >= 1 {
            potential.observe((v_next + drop - v_prev) / (1.0 + v0), k);
        }

        v_prev = v_next;
        x_prev = x;
        y_prev = step.y;
        x = step.x_next;
    }

    report.push("potential-decrease-with-decrement", potential, tol);
    Ok(report)
}
