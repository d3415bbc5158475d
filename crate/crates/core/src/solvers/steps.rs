//! Single-iteration updates of every scheme, as plain functions over points.
//!
//! The step functions own the operator-evaluation discipline: every counted
//! evaluation per iteration is made here (and only here), so per-step costs
//! match the documented accounting for each family.

use crate::directions::DirectionRule;
use crate::error::Result;
use crate::linops::{ForwardMap, Point, Resolvent};

/// Outcome of a generalized extragradient step
/// `y = x - (eta/beta) u`, `x+ = x - eta F y`.
#[derive(Debug, Clone)]
pub struct GegStep {
    pub u: Point,
    pub y: Point,
    pub fy: Point,
    pub fx: Option<Point>,
    pub x_next: Point,
}

/// Lazily initializes the rule's history (the past rule pays one extra
/// evaluation of `F x^0`; the others seed for free from the step's own
/// `F x^k`), then forms `u^k` and advances.
fn direction_with_init(
    f: &ForwardMap,
    rule: &mut DirectionRule,
    x: &Point,
) -> Result<(Option<Point>, Point)> {
    let fx = if rule.needs_current_fx() {
        Some(f.eval(x))
    } else {
        None
    };
    if !rule.is_initialized() {
        let seed = match &fx {
            Some(v) => v.clone(),
            None => f.eval(x),
        };
        rule.reset(seed);
    }
    let u = rule.direction(fx.as_ref())?;
    Ok((fx, u))
}

pub fn step_geg(
    f: &ForwardMap,
    rule: &mut DirectionRule,
    x: &Point,
    eta: f64,
    beta: f64,
) -> Result<GegStep> {
    let (fx, u) = direction_with_init(f, rule, x)?;
    let y = x.sub_scaled(eta / beta, &u);
    let fy = f.eval(&y);
    let x_next = x.sub_scaled(eta, &fy);
    rule.advance(fx.clone(), fy.clone());
    Ok(GegStep {
        u,
        y,
        fy,
        fx,
        x_next,
    })
}

/// Outcome of the two-resolvent inclusion step
/// `y = J_{(eta/beta) T}(x - (eta/beta) u)`, `x+ = J_{eta T}(x - eta F y)`,
/// with the implied multiplier `xi+ = (x - eta F y - x+) / eta ∈ T x+`.
#[derive(Debug, Clone)]
pub struct Geg2Step {
    pub u: Point,
    pub y: Point,
    pub fy: Point,
    pub fx: Option<Point>,
    pub x_next: Point,
    pub xi_next: Point,
}

pub fn step_geg2(
    f: &ForwardMap,
    j: &Resolvent,
    rule: &mut DirectionRule,
    x: &Point,
    eta: f64,
    beta: f64,
) -> Result<Geg2Step> {
    let (fx, u) = direction_with_init(f, rule, x)?;
    let scaled = eta / beta;
    let y = j.apply(&x.sub_scaled(scaled, &u), scaled);
    let fy = f.eval(&y);
    let arg = x.sub_scaled(eta, &fy);
    let x_next = j.apply(&arg, eta);
    let xi_next = arg.sub(&x_next).scale(1.0 / eta);
    rule.advance(fx.clone(), fy.clone());
    Ok(Geg2Step {
        u,
        y,
        fy,
        fx,
        x_next,
        xi_next,
    })
}

/// Outcome of the single-resolvent forward-backward-forward step
/// `y = J_{(eta/beta) T}(x - (eta/beta) u)`,
/// `x+ = beta y + (1 - beta) x - eta (F y - u)`,
/// with `zeta = (beta/eta)(x - y) - u ∈ T y`.
#[derive(Debug, Clone)]
pub struct Gfbfs2Step {
    pub u: Point,
    pub y: Point,
    pub fy: Point,
    pub fx: Option<Point>,
    pub x_next: Point,
    pub zeta: Point,
}

pub fn step_gfbfs2(
    f: &ForwardMap,
    j: &Resolvent,
    rule: &mut DirectionRule,
    x: &Point,
    eta: f64,
    beta: f64,
) -> Result<Gfbfs2Step> {
    let (fx, u) = direction_with_init(f, rule, x)?;
    let scaled = eta / beta;
    let y = j.apply(&x.sub_scaled(scaled, &u), scaled);
    let fy = f.eval(&y);
    let x_next = Point::new(
        y.as_slice()
            .iter()
            .zip(x.as_slice())
            .zip(fy.as_slice().iter().zip(u.as_slice()))
            .map(|((yi, xi), (fyi, ui))| beta * yi + (1.0 - beta) * xi - eta * (fyi - ui))
            .collect(),
    );
    let zeta = x.sub(&y).scale(beta / eta).sub(&u);
    rule.advance(fx.clone(), fy.clone());
    Ok(Gfbfs2Step {
        u,
        y,
        fy,
        fx,
        x_next,
        zeta,
    })
}

/// Outcome of the reflected step `y = 2x - x_prev`,
/// `x+ = J_{eta T}(x - eta F y)`, with `xi+ = (x - eta F y - x+)/eta ∈ T x+`.
#[derive(Debug, Clone)]
pub struct Rfbs2Step {
    pub y: Point,
    pub fy: Point,
    pub x_next: Point,
    pub xi_next: Point,
}

pub fn step_rfbs2(
    f: &ForwardMap,
    j: &Resolvent,
    x: &Point,
    x_prev: &Point,
    eta: f64,
) -> Rfbs2Step {
    let y = x.lin_comb(2.0, -1.0, x_prev);
    let fy = f.eval(&y);
    let arg = x.sub_scaled(eta, &fy);
    let x_next = j.apply(&arg, eta);
    let xi_next = arg.sub(&x_next).scale(1.0 / eta);
    Rfbs2Step {
        y,
        fy,
        x_next,
        xi_next,
    }
}

/// Outcome of the golden-ratio step `y = x + (y_prev - x)/tau`,
/// `x+ = J_{eta T}(y - eta F x)`, with `xi+ = (y - eta F x - x+)/eta ∈ T x+`.
///
/// The averaging is computed as `x + (y_prev - x)/tau` so the first step
/// reproduces `y^0 = x^0` exactly under the convention `y^{-1} = x^0`.
#[derive(Debug, Clone)]
pub struct Gr2Step {
    pub y: Point,
    pub fx: Point,
    pub x_next: Point,
    pub xi_next: Point,
}

pub fn step_gr2(
    f: &ForwardMap,
    j: &Resolvent,
    x: &Point,
    y_prev: &Point,
    eta: f64,
    tau: f64,
) -> Gr2Step {
    let y = x.add_scaled(1.0 / tau, &y_prev.sub(x));
    let fx = f.eval(x);
    let arg = y.sub_scaled(eta, &fx);
    let x_next = j.apply(&arg, eta);
    let xi_next = arg.sub(&x_next).scale(1.0 / eta);
    Gr2Step {
        y,
        fx,
        x_next,
        xi_next,
    }
}

/// Forward (fixed-point) step `x+ = x - eta F x`.
pub fn step_fw(f: &ForwardMap, x: &Point, eta: f64) -> Point {
    let fx = f.eval(x);
    x.sub_scaled(eta, &fx)
}

/// Forward-backward step `x+ = J_{eta T}(x - eta F x)`.
pub fn step_fbs(f: &ForwardMap, j: &Resolvent, x: &Point, eta: f64) -> Point {
    let fx = f.eval(x);
    j.apply(&x.sub_scaled(eta, &fx), eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::DirectionKind;
    use crate::prox::simplex_resolvent;

    fn rotation() -> ForwardMap {
        ForwardMap::new(2, |x: &Point| Point::new(vec![x[1], -x[0]]))
    }

    #[test]
    fn geg_rotation_hand_arithmetic() {
        let f = rotation();
        let mut rule = DirectionRule::new(DirectionKind::Extragradient);
        let step = step_geg(&f, &mut rule, &Point::new(vec![1.0, 0.0]), 0.5, 1.0).unwrap();
        assert_eq!(step.y.as_slice(), &[1.0, 0.5]);
        assert_eq!(step.x_next.as_slice(), &[0.75, 0.5]);
        assert!((step.x_next.norm_sq() - 0.8125).abs() < 1e-15);
    }

    #[test]
    fn geg_fixed_point_stays() {
        let f = ForwardMap::new(2, |x: &Point| {
            Point::new(vec![x[0] - 1.0, x[1] - 2.0])
        });
        let x_star = Point::new(vec![1.0, 2.0]);
        for kind in [
            DirectionKind::Extragradient,
            DirectionKind::PastExtragradient,
            DirectionKind::affine(1.35, -0.25),
        ] {
            let mut rule = DirectionRule::new(kind);
            let step = step_geg(&f, &mut rule, &x_star, 0.3, 0.9).unwrap();
            assert_eq!(step.y.as_slice(), x_star.as_slice());
            assert_eq!(step.x_next.as_slice(), x_star.as_slice());
        }
    }

    #[test]
    fn geg_plus_doubles_the_probe_step() {
        // beta = 0.5 with u = Fx: y = x - 2 eta Fx.
        let f = rotation();
        let mut rule = DirectionRule::new(DirectionKind::Extragradient);
        let x = Point::new(vec![1.0, 0.0]);
        let step = step_geg(&f, &mut rule, &x, 0.5, 0.5).unwrap();
        assert_eq!(step.y.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn geg_eval_accounting() {
        let f = rotation();
        let x0 = Point::new(vec![1.0, 0.0]);
        for (kind, per_step, extra) in [
            (DirectionKind::Extragradient, 2, 0),
            (DirectionKind::PastExtragradient, 1, 1),
            (DirectionKind::affine(1.35, -0.25), 2, 0),
        ] {
            let g = f.fork();
            let mut rule = DirectionRule::new(kind);
            let mut x = x0.clone();
            let steps = 7u64;
            for _ in 0..steps {
                x = step_geg(&g, &mut rule, &x, 0.1, 1.0).unwrap().x_next;
            }
            assert_eq!(g.eval_count(), per_step * steps + extra, "{kind:?}");
        }
    }

    #[test]
    fn geg2_with_simplex_projects_both_stages() {
        let f = ForwardMap::new(2, |x: &Point| Point::zeros(x.dim()));
        let j = simplex_resolvent(2);
        let mut rule = DirectionRule::new(DirectionKind::Extragradient);
        let x = Point::new(vec![2.0, 0.0]);
        let step = step_geg2(&f, &j, &mut rule, &x, 0.7, 1.0).unwrap();
        assert!((step.y[0] - 1.0).abs() < 1e-15 && step.y[1] == 0.0);
        assert!((step.x_next[0] - 1.0).abs() < 1e-15 && step.x_next[1] == 0.0);
        assert_eq!(j.eval_count(), 2);
    }

    #[test]
    fn geg2_multiplier_reconstruction_is_consistent() {
        // x+ + eta xi+ must reproduce the resolvent argument exactly.
        let f = rotation();
        let j = simplex_resolvent(2);
        let mut rule = DirectionRule::new(DirectionKind::Extragradient);
        let x = Point::new(vec![0.4, 0.6]);
        let eta = 0.3;
        let step = step_geg2(&f, &j, &mut rule, &x, eta, 1.0).unwrap();
        let lhs = step.x_next.add_scaled(eta, &step.xi_next);
        let rhs = x.sub_scaled(eta, &step.fy);
        assert!(lhs.dist(&rhs) <= 1e-15);
    }

    #[test]
    fn gfbfs2_tseng_form_on_rotation() {
        let f = rotation();
        let j = Resolvent::identity(2);
        let mut rule = DirectionRule::new(DirectionKind::Extragradient);
        let step =
            step_gfbfs2(&f, &j, &mut rule, &Point::new(vec![1.0, 0.0]), 0.5, 1.0).unwrap();
        assert_eq!(step.y.as_slice(), &[1.0, 0.5]);
        assert_eq!(step.x_next.as_slice(), &[0.75, 0.5]);
        assert_eq!(j.eval_count(), 1);
    }

    #[test]
    fn gfbfs2_fixed_point_stays() {
        // 0 ∈ Fx* + Tx* at the simplex center for F = 0.
        let f = ForwardMap::new(2, |x: &Point| Point::zeros(x.dim()));
        let j = simplex_resolvent(2);
        let mut rule = DirectionRule::new(DirectionKind::Extragradient);
        let x_star = Point::new(vec![0.5, 0.5]);
        let step = step_gfbfs2(&f, &j, &mut rule, &x_star, 0.4, 0.8).unwrap();
        assert!(step.y.dist(&x_star) <= 1e-15);
        assert!(step.x_next.dist(&x_star) <= 1e-15);
    }

    #[test]
    fn rfbs2_scalar_recursion() {
        let f = ForwardMap::new(1, |x: &Point| x.clone());
        let j = Resolvent::identity(1);
        let eta = 0.5;
        let mut x_prev = Point::new(vec![1.0]);
        let mut x = Point::new(vec![1.0]);
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for _ in 0..3 {
            let step = step_rfbs2(&f, &j, &x, &x_prev, eta);
            ys.push(step.y[0]);
            xs.push(step.x_next[0]);
            x_prev = x;
            x = step.x_next;
        }
        assert_eq!(ys, vec![1.0, 0.0, 0.5]);
        assert_eq!(xs, vec![0.5, 0.5, 0.25]);
    }

    #[test]
    fn gr2_scalar_recursion() {
        let f = ForwardMap::new(1, |x: &Point| x.clone());
        let j = Resolvent::identity(1);
        let (eta, tau) = (0.5, 2.0);
        let mut y_prev = Point::new(vec![1.0]);
        let mut x = Point::new(vec![1.0]);
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for _ in 0..3 {
            let step = step_gr2(&f, &j, &x, &y_prev, eta, tau);
            ys.push(step.y[0]);
            xs.push(step.x_next[0]);
            y_prev = step.y;
            x = step.x_next;
        }
        // First step has y^0 = x^0 exactly by the y^{-1} = x^0 convention.
        assert_eq!(ys, vec![1.0, 0.75, 0.625]);
        assert_eq!(xs, vec![0.5, 0.5, 0.375]);
    }

    #[test]
    fn fw_identities() {
        let rot = rotation();
        let x = Point::new(vec![1.0, 0.0]);
        let eta = 0.5;
        let x1 = step_fw(&rot, &x, eta);
        assert!((x1.norm_sq() - (1.0 + eta * eta) * x.norm_sq()).abs() < 1e-15);
        let id = ForwardMap::new(1, |x: &Point| x.clone());
        let mut z = Point::new(vec![1.0]);
        for k in 1..=6 {
            z = step_fw(&id, &z, 0.5);
            assert_eq!(z[0], (2.0_f64).powi(-k));
        }
    }

    #[test]
    fn fbs_with_zero_operator_equals_fw() {
        let f = rotation();
        let j = Resolvent::identity(2);
        let x = Point::new(vec![0.3, -0.8]);
        let a = step_fw(&f, &x, 0.25);
        let b = step_fbs(&f, &j, &x, 0.25);
        assert_eq!(a.as_slice(), b.as_slice());
    }
}
