//! Search-direction rules producing `u^k` for the generalized extragradient
//! schemes, together with certified constants `(kappa1, kappa2)` bounding
//! `||Fx^k - u^k||^2` by `kappa1 ||Fx^k - Fy^{k-1}||^2 + kappa2 ||Fx^k - Fx^{k-1}||^2`.

use crate::error::{Error, Result};
use crate::linops::Point;

/// The direction recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionKind {
    /// `u^k = Fx^k` — the extragradient choice; `(kappa1, kappa2) = (0, 0)`.
    Extragradient,
    /// `u^k = Fy^{k-1}` — the past-extragradient (optimistic) choice;
    /// `(kappa1, kappa2) = (1, 0)`.
    PastExtragradient,
    /// `u^k = a1 Fx^k + a2 Fy^{k-1} + (1 - a1 - a2) Fx^{k-1}` with the
    /// Young-inequality constants `kappa1 = (1 + c) a2^2`,
    /// `kappa2 = (1 + 1/c) (1 - a1 - a2)^2` for the stored `c > 0`.
    Affine { alpha1: f64, alpha2: f64, c: f64 },
}

/// `1 - a1 - a2`, with round-off snapped to an exact zero so coefficient
/// pairs meant to sum to one (like `0.7 + 0.3`) certify `kappa2 = 0`.
fn affine_rest(alpha1: f64, alpha2: f64) -> f64 {
    let rest = 1.0 - alpha1 - alpha2;
    if rest.abs() <= 1e-12 * (1.0 + alpha1.abs() + alpha2.abs()) {
        0.0
    } else {
        rest
    }
}

impl DirectionKind {
    /// Affine rule with the default balancing `c = |1 - a1 - a2| / |a2|`
    /// (falling back to `c = 1` when either quantity vanishes).
    pub fn affine(alpha1: f64, alpha2: f64) -> DirectionKind {
        let rest = affine_rest(alpha1, alpha2);
        let c = if alpha2 != 0.0 && rest != 0.0 {
            (rest / alpha2).abs()
        } else {
            1.0
        };
        DirectionKind::Affine { alpha1, alpha2, c }
    }

    pub fn affine_with_c(alpha1: f64, alpha2: f64, c: f64) -> Result<DirectionKind> {
        if c <= 0.0 {
            return Err(Error::invalid("affine direction requires c > 0"));
        }
        Ok(DirectionKind::Affine { alpha1, alpha2, c })
    }

    /// Certified constants of the direction condition.
    pub fn kappas(&self) -> (f64, f64) {
        match *self {
            DirectionKind::Extragradient => (0.0, 0.0),
            DirectionKind::PastExtragradient => (1.0, 0.0),
            DirectionKind::Affine { alpha1, alpha2, c } => {
                let rest = affine_rest(alpha1, alpha2);
                ((1.0 + c) * alpha2 * alpha2, (1.0 + 1.0 / c) * rest * rest)
            }
        }
    }

    /// Whether forming `u^k` reads `Fx^k` (false only for the past rule,
    /// which is what saves it one operator evaluation per iteration).
    pub fn needs_current_fx(&self) -> bool {
        !matches!(self, DirectionKind::PastExtragradient)
    }

    /// Whether the rule reads history at all (false for plain extragradient).
    pub fn needs_history(&self) -> bool {
        !matches!(self, DirectionKind::Extragradient)
    }
}

/// A direction rule plus its rolling history `(Fx^{k-1}, Fy^{k-1})`.
///
/// Initialization uses the convention `x^{-1} = y^{-1} := x^0`, i.e. both
/// slots start at `Fx^0`. One rule instance belongs to one solver run.
#[derive(Debug, Clone)]
pub struct DirectionRule {
    kind: DirectionKind,
    prev_fx: Option<Point>,
    prev_fy: Option<Point>,
}

impl DirectionRule {
    pub fn new(kind: DirectionKind) -> Self {
        DirectionRule {
            kind,
            prev_fx: None,
            prev_fy: None,
        }
    }

    pub fn kind(&self) -> DirectionKind {
        self.kind
    }

    pub fn kappas(&self) -> (f64, f64) {
        self.kind.kappas()
    }

    pub fn needs_current_fx(&self) -> bool {
        self.kind.needs_current_fx()
    }

    pub fn is_initialized(&self) -> bool {
        !self.kind.needs_history() || self.prev_fy.is_some()
    }

    /// Seeds both history slots with `Fx^0`.
    pub fn reset(&mut self, fx0: Point) {
        self.prev_fx = Some(fx0.clone());
        self.prev_fy = Some(fx0);
    }

    /// Produces `u^k` from the current `Fx^k` (ignored by the past rule) and
    /// the stored history. Does not mutate history.
    pub fn direction(&self, fx_k: Option<&Point>) -> Result<Point> {
        match self.kind {
            DirectionKind::Extragradient => fx_k
                .cloned()
                .ok_or_else(|| Error::invalid("extragradient direction requires Fx^k")),
            DirectionKind::PastExtragradient => {
                self.prev_fy.clone().ok_or(Error::UninitializedHistory)
            }
            DirectionKind::Affine { alpha1, alpha2, .. } => {
                let fx = fx_k.ok_or_else(|| Error::invalid("affine direction requires Fx^k"))?;
                let (fy_prev, fx_prev) = match (&self.prev_fy, &self.prev_fx) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(Error::UninitializedHistory),
                };
                let rest = affine_rest(alpha1, alpha2);
                Ok(Point::new(
                    fx.as_slice()
                        .iter()
                        .zip(fy_prev.as_slice())
                        .zip(fx_prev.as_slice())
                        .map(|((a, b), c)| alpha1 * a + alpha2 * b + rest * c)
                        .collect(),
                ))
            }
        }
    }

    /// Rotates history: the slots now hold `(Fx^k, Fy^k)`.
    ///
    /// `fx_k` may be omitted by callers that never evaluated `Fx^k` (the past
    /// rule); the slot is then left untouched, which is sound because no rule
    /// reads `Fx^{k-1}` without also requiring `Fx^k`.
    pub fn advance(&mut self, fx_k: Option<Point>, fy_k: Point) {
        if let Some(fx) = fx_k {
            self.prev_fx = Some(fx);
        }
        self.prev_fy = Some(fy_k);
    }

    /// Stored history `(Fx^{k-1}, Fy^{k-1})`, for tests and certificates.
    pub fn history(&self) -> (Option<&Point>, Option<&Point>) {
        (self.prev_fx.as_ref(), self.prev_fy.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    #[test]
    fn eg_returns_current_value() {
        let rule = DirectionRule::new(DirectionKind::Extragradient);
        let u = rule.direction(Some(&p(&[1.0, 2.0]))).unwrap();
        assert_eq!(u.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn affine_with_alpha1_one_collapses_to_eg() {
        let mut rule = DirectionRule::new(DirectionKind::affine(1.0, 0.0));
        rule.reset(p(&[9.0, 9.0]));
        let u = rule.direction(Some(&p(&[1.0, 2.0]))).unwrap();
        assert_eq!(u.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn affine_hand_arithmetic() {
        let mut rule = DirectionRule::new(DirectionKind::affine(1.35, -0.25));
        rule.reset(p(&[0.0, 0.0]));
        rule.advance(Some(p(&[1.0, 1.0])), p(&[0.0, 1.0]));
        let u = rule.direction(Some(&p(&[1.0, 0.0]))).unwrap();
        // 1.35 (1,0) - 0.25 (0,1) - 0.10 (1,1) = (1.25, -0.35)
        assert!((u[0] - 1.25).abs() <= 1e-15);
        assert!((u[1] + 0.35).abs() <= 1e-15);
    }

    #[test]
    fn kappa_certificates() {
        assert_eq!(DirectionKind::Extragradient.kappas(), (0.0, 0.0));
        assert_eq!(DirectionKind::PastExtragradient.kappas(), (1.0, 0.0));
        let k = DirectionKind::affine(1.35, -0.25);
        let (k1, k2) = k.kappas();
        // c = |-0.1| / |-0.25| = 0.4
        assert!((k1 - 1.4 * 0.0625).abs() <= 1e-15);
        assert!((k2 - 3.5 * 0.01).abs() <= 1e-14);
    }

    #[test]
    fn default_c_falls_back_to_one() {
        match DirectionKind::affine(0.7, 0.3) {
            DirectionKind::Affine { c, .. } => assert_eq!(c, 1.0),
            _ => unreachable!(),
        }
        match DirectionKind::affine(1.0, 0.0) {
            DirectionKind::Affine { c, .. } => assert_eq!(c, 1.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn reset_seeds_both_slots() {
        let mut rule = DirectionRule::new(DirectionKind::PastExtragradient);
        assert!(rule.direction(None).is_err());
        rule.reset(p(&[3.0]));
        let (fx, fy) = rule.history();
        assert_eq!(fx.unwrap().as_slice(), &[3.0]);
        assert_eq!(fy.unwrap().as_slice(), &[3.0]);
        assert_eq!(rule.direction(None).unwrap().as_slice(), &[3.0]);
    }

    #[test]
    fn advance_then_past_readout() {
        let mut rule = DirectionRule::new(DirectionKind::PastExtragradient);
        rule.reset(p(&[0.0]));
        rule.advance(Some(p(&[1.0])), p(&[2.0]));
        assert_eq!(rule.direction(None).unwrap().as_slice(), &[2.0]);
    }

    #[test]
    fn scripted_affine_replay_matches_hand_recursion() {
        // Three-step scripted trace replayed against the recursion done by hand.
        let (a1, a2) = (0.8, 0.5);
        let rest = 1.0 - a1 - a2;
        let mut rule = DirectionRule::new(DirectionKind::affine(a1, a2));
        let fx0 = p(&[1.0, -1.0]);
        rule.reset(fx0.clone());
        let script = [
            (p(&[1.0, -1.0]), p(&[0.5, 0.0])),
            (p(&[0.3, 0.2]), p(&[0.1, 0.1])),
            (p(&[-0.2, 0.4]), p(&[0.0, 0.3])),
        ];
        let mut prev_fx = fx0.clone();
        let mut prev_fy = fx0;
        for (fx, fy) in script {
            let got = rule.direction(Some(&fx)).unwrap();
            let want = fx.scale(a1).add(&prev_fy.scale(a2)).add(&prev_fx.scale(rest));
            for i in 0..2 {
                assert!((got[i] - want[i]).abs() <= 1e-15);
            }
            rule.advance(Some(fx.clone()), fy.clone());
            prev_fx = fx;
            prev_fy = fy;
        }
    }
}
