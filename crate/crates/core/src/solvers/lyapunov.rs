//! Lyapunov/potential functions evaluated along runs, used as
//! runtime-checkable convergence certificates.

use crate::linops::{ForwardMap, Point};
use crate::stepsizes::r_of;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Weights of the history terms in the extragradient potential.
#[derive(Debug, Clone, Copy)]
pub struct PotentialWeights {
    pub w_y: f64,
    pub w_x: f64,
}

/// Weights `kappa_i (1 + r) L eta / r` of the potential (the `gamma = L eta`
/// normalization); both vanish for the plain extragradient rule.
pub fn potential_weights(kappa1: f64, kappa2: f64, lipschitz: f64, eta: f64) -> PotentialWeights {
    let r = r_of(kappa1);
    let weight = |kappa: f64| {
        if kappa == 0.0 {
            0.0
        } else {
            debug_assert!(r > 0.0, "nonzero kappa requires r > 0");
            kappa * (1.0 + r) * lipschitz * eta / r
        }
    };
    PotentialWeights {
        w_y: weight(kappa1),
        w_x: weight(kappa2),
    }
}

/// Extragradient potential
/// `P_k = ||x - x*||^2 + w_y ||x - y_prev||^2 + w_x ||x - x_prev||^2`.
///
/// Under the initialization convention `x^{-1} = y^{-1} = x^0` this evaluates
/// to `||x^0 - x*||^2` at `k = 0`.
pub fn lyapunov_p(
    x: &Point,
    y_prev: &Point,
    x_prev: &Point,
    x_star: &Point,
    weights: &PotentialWeights,
) -> f64 {
    x.dist_sq(x_star) + weights.w_y * x.dist_sq(y_prev) + weights.w_x * x.dist_sq(x_prev)
}

/// Reflected-splitting potential
/// `V_k = ||x - x*||^2 + 2 ||x - x_prev||^2 + (1 - sqrt2 L eta) ||x - y_prev||^2
///        + 2 eta <F y_prev - F x*, x - x_prev>`.
///
/// Uses untracked evaluations of `f` at `y_prev` and `x*`.
pub fn lyapunov_v_rfbs(
    x: &Point,
    x_prev: &Point,
    y_prev: &Point,
    x_star: &Point,
    f: &ForwardMap,
    eta: f64,
    lipschitz: f64,
) -> f64 {
    let fy_prev = f.eval_untracked(y_prev);
    let fx_star = f.eval_untracked(x_star);
    x.dist_sq(x_star)
        + 2.0 * x.dist_sq(x_prev)
        + (1.0 - SQRT2 * lipschitz * eta) * x.dist_sq(y_prev)
        + 2.0 * eta * fy_prev.sub(&fx_star).dot(&x.sub(x_prev))
}

/// Golden-ratio potential `V_k = tau ||y - x*||^2 + w ||x - x_prev||^2` with
/// an explicit second weight (the two ratio regimes certify different
/// weights).
pub fn lyapunov_v_gr_weighted(
    y: &Point,
    x: &Point,
    x_prev: &Point,
    x_star: &Point,
    tau: f64,
    second_weight: f64,
) -> f64 {
    tau * y.dist_sq(x_star) + second_weight * x.dist_sq(x_prev)
}

/// Golden-ratio potential with the low-regime weight `tau (tau - 1) / 2`.
pub fn lyapunov_v_gr(y: &Point, x: &Point, x_prev: &Point, x_star: &Point, tau: f64) -> f64 {
    lyapunov_v_gr_weighted(y, x, x_prev, x_star, tau, 0.5 * tau * (tau - 1.0))
}
