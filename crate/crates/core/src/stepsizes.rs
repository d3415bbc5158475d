//! Admissible stepsize intervals and certified convergence constants for the
//! generalized extragradient family, as pure calculators.
//!
//! The raw formulas contain removable `0/0` singularities; the limit
//! conventions adopted here are:
//!
//! * `kappa2 = 0` forces `mu = 1` and drops the second eta-interval;
//! * `r = 0` with `kappa2 > 0` yields threshold `Delta = 0` (no admissible
//!   stepsize for any positive co-hypomonotonicity modulus).

use crate::error::{Error, Result};
use crate::rng::Stream;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Problem-and-direction constants the stepsize theory consumes.
#[derive(Debug, Clone, Copy)]
pub struct ProblemConstants {
    /// Lipschitz constant of the single-valued part.
    pub lipschitz: f64,
    /// Weak-Minty / co-hypomonotonicity modulus (0 in the monotone case).
    pub rho: f64,
    /// Scaling factor in `(0, 1]`; `1` is only admissible when `kappa2 = 0`.
    pub beta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl ProblemConstants {
    pub fn new(lipschitz: f64, rho: f64, beta: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        if !(lipschitz >= 0.0) || !(rho >= 0.0) || !(kappa1 >= 0.0) || !(kappa2 >= 0.0) {
            return Err(Error::invalid(
                "L, rho, kappa1, kappa2 must be finite and nonnegative",
            ));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta must lie in (0, 1]"));
        }
        if beta == 1.0 && kappa2 > 0.0 {
            return Err(Error::invalid("beta = 1 requires kappa2 = 0"));
        }
        Ok(ProblemConstants {
            lipschitz,
            rho,
            beta,
            kappa1,
            kappa2,
        })
    }

    /// Monotone problem (`rho = 0`) with the given direction constants.
    pub fn monotone(lipschitz: f64, beta: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        ProblemConstants::new(lipschitz, 0.0, beta, kappa1, kappa2)
    }

    /// `r = (kappa1 + sqrt(kappa1^2 + 4 kappa1)) / 2`.
    pub fn r(&self) -> f64 {
        r_of(self.kappa1)
    }

    /// `mu = r / (r + 2 kappa2)`, with `mu = 1` when `kappa2 = 0`.
    pub fn mu(&self) -> f64 {
        if self.kappa2 == 0.0 {
            1.0
        } else {
            let r = self.r();
            r / (r + 2.0 * self.kappa2)
        }
    }

    /// `alpha = (1 + r) / r` when `r > 0`.
    pub fn alpha(&self) -> Option<f64> {
        let r = self.r();
        (r > 0.0).then(|| (1.0 + r) / r)
    }
}

pub fn r_of(kappa1: f64) -> f64 {
    0.5 * (kappa1 + (kappa1 * kappa1 + 4.0 * kappa1).sqrt())
}

/// Threshold on `L * rho` below which the best-iterate interval is nonempty:
/// `Delta = min{ (1 + 2 kappa2 / r) beta^2, (1 - beta)^2 r (r + 2 kappa2) / kappa2^2 } / (16 (1 + r))`.
pub fn delta_threshold(pc: &ProblemConstants) -> f64 {
    let r = pc.r();
    if pc.kappa2 == 0.0 {
        return pc.beta * pc.beta / (16.0 * (1.0 + r));
    }
    if r == 0.0 {
        // kappa2 > 0 with kappa1 = 0: the theory admits no positive rho.
        return 0.0;
    }
    let first = (1.0 + 2.0 * pc.kappa2 / r) * pc.beta * pc.beta;
    let one_minus_beta = 1.0 - pc.beta;
    let second = one_minus_beta * one_minus_beta * r * (r + 2.0 * pc.kappa2)
        / (pc.kappa2 * pc.kappa2);
    first.min(second) / (16.0 * (1.0 + r))
}

/// Last-iterate constants: `m = sqrt((1 + sqrt 2)(kappa1 + sqrt 2))` and its
/// threshold `Delta_hat = 1 / (16 m)`.
pub fn m_of(kappa1: f64) -> f64 {
    ((1.0 + SQRT2) * (kappa1 + SQRT2)).sqrt()
}

/// The last-iterate interval data attached to a [`StepRange`].
#[derive(Debug, Clone, Copy)]
pub struct HatInterval {
    pub m: f64,
    pub delta_hat: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
}

/// Admissible stepsize interval(s) with the derived theory constants.
///
/// `eta_lo..eta_hi` is the best-iterate interval (open at endpoints attained
/// with strict inequalities, i.e. whenever `rho = 0`); `hat`, when present,
/// carries the closed last-iterate interval.
#[derive(Debug, Clone, Copy)]
pub struct StepRange {
    pub r: f64,
    pub alpha: Option<f64>,
    pub mu: f64,
    pub delta: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub hat: Option<HatInterval>,
}

impl StepRange {
    /// Intersection of the best- and last-iterate intervals, when the latter
    /// is present and the overlap is nonempty.
    pub fn intersection(&self) -> Option<(f64, f64)> {
        let hat = self.hat?;
        let lo = self.eta_lo.max(hat.eta_lo);
        let hi = self.eta_hi.min(hat.eta_hi);
        (lo <= hi).then_some((lo, hi))
    }
}

/// Best-iterate admissible interval `[eta_lo, eta_hi]`.
///
/// Requires `L > 0` and `L * rho <= Delta`; the interval is then nonempty.
pub fn best_iterate_range(pc: &ProblemConstants) -> Result<StepRange> {
    if pc.lipschitz <= 0.0 {
        return Err(Error::invalid("best_iterate_range requires L > 0"));
    }
    let delta = delta_threshold(pc);
    let lrho = pc.lipschitz * pc.rho;
    if lrho > delta {
        return Err(Error::NoAdmissibleStepsize {
            lrho,
            threshold: delta,
        });
    }
    let r = pc.r();
    let mu = pc.mu();
    let l = pc.lipschitz;
    if pc.kappa2 > 0.0 && r == 0.0 {
        // Delta = 0 forces rho = 0 here, but the second interval still
        // degenerates to {0}: no positive stepsize is admissible.
        return Err(Error::NoAdmissibleStepsize {
            lrho,
            threshold: 0.0,
        });
    }

    let disc1 = pc.beta * pc.beta - 16.0 * (1.0 + r) * mu * l * pc.rho;
    let sqrt1 = disc1.max(0.0).sqrt();
    let denom1 = 2.0 * (1.0 + r) * l;
    let (mut lo, mut hi) = ((pc.beta - sqrt1) / denom1, (pc.beta + sqrt1) / denom1);

    if pc.kappa2 > 0.0 {
        let alpha = (1.0 + r) / r;
        let one_minus_beta = 1.0 - pc.beta;
        let disc2 = one_minus_beta * one_minus_beta
            - 8.0 * alpha * (1.0 - mu) * pc.kappa2 * l * pc.rho;
        let sqrt2 = disc2.max(0.0).sqrt();
        let denom2 = 2.0 * alpha * pc.kappa2 * l;
        lo = lo.max((one_minus_beta - sqrt2) / denom2);
        hi = hi.min((one_minus_beta + sqrt2) / denom2);
    }

    if lo > hi {
        return Err(Error::NoAdmissibleStepsize {
            lrho,
            threshold: delta,
        });
    }
    Ok(StepRange {
        r,
        alpha: pc.alpha(),
        mu,
        delta,
        eta_lo: lo,
        eta_hi: hi,
        hat: None,
    })
}

/// Last-iterate admissible interval, under the last-iterate hypotheses
/// `beta = 1` and `kappa2 = 0`.
///
/// The returned `StepRange` carries the best-iterate interval in
/// `eta_lo..eta_hi` and the closed last-iterate interval in `hat`; their
/// intersection is verified nonempty.
pub fn last_iterate_range(pc: &ProblemConstants) -> Result<StepRange> {
    if pc.beta != 1.0 || pc.kappa2 != 0.0 {
        return Err(Error::invalid(
            "last_iterate_range requires beta = 1 and kappa2 = 0",
        ));
    }
    let m = m_of(pc.kappa1);
    let delta_hat = 1.0 / (16.0 * m);
    let lrho = pc.lipschitz * pc.rho;
    if lrho > delta_hat {
        return Err(Error::NoAdmissibleStepsize {
            lrho,
            threshold: delta_hat,
        });
    }
    let mut range = best_iterate_range(pc)?;
    let l = pc.lipschitz;
    let disc = 1.0 - 16.0 * m * lrho;
    let sqrt_d = disc.max(0.0).sqrt();
    let hat = HatInterval {
        m,
        delta_hat,
        eta_lo: (1.0 - sqrt_d) / (2.0 * m * l),
        eta_hi: (1.0 + sqrt_d) / (2.0 * m * l),
    };
    range.hat = Some(hat);
    if range.intersection().is_none() {
        return Err(Error::NoAdmissibleStepsize {
            lrho,
            threshold: delta_hat.min(range.delta),
        });
    }
    Ok(range)
}

/// Sharper last-iterate interval specific to the plain extragradient rule
/// (`kappa1 = 0`): `[ (1 - s)/(2 sqrt2 L), (1 + s)/(2 sqrt2 L) ]` with
/// `s = sqrt(1 - 16 sqrt2 L rho)`, admissible while `L rho <= 1/(16 sqrt2)`.
pub fn eg_last_iterate_interval(lipschitz: f64, rho: f64) -> Result<(f64, f64)> {
    let lrho = lipschitz * rho;
    let threshold = 1.0 / (16.0 * SQRT2);
    if lrho > threshold {
        return Err(Error::NoAdmissibleStepsize { lrho, threshold });
    }
    let s = (1.0 - 16.0 * SQRT2 * lrho).max(0.0).sqrt();
    let denom = 2.0 * SQRT2 * lipschitz;
    Ok(((1.0 - s) / denom, (1.0 + s) / denom))
}

/// Per-iterate decrease coefficient of the plain extragradient rule:
/// `psi = 1 - 4 rho / eta - (1 + 4 rho / eta) L^2 eta^2`.
pub fn eg_decrease_coefficient(lipschitz: f64, rho: f64, eta: f64) -> f64 {
    let a = 4.0 * rho / eta;
    1.0 - a - (1.0 + a) * lipschitz * lipschitz * eta * eta
}

/// Which guarantee a set of certified constants belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Equations: the generalized extragradient scheme.
    GegNe,
    /// Inclusions, best-iterate guarantee of the two-resolvent scheme.
    Geg2NiBest,
    /// Inclusions, last-iterate guarantee (`beta = 1`, `kappa2 = 0`).
    Geg2NiLast,
    /// Inclusions, single-resolvent forward-backward-forward scheme.
    Gfbfs2,
    /// Reflected forward-backward splitting.
    Rfbs2,
    /// Golden-ratio scheme, ratio in `(1, (1+sqrt5)/2]`.
    Gr2Low,
    /// Golden-ratio scheme, ratio in `((1+sqrt5)/2, 1+sqrt3)`.
    Gr2High,
}

/// Constants certified at a concrete stepsize.
#[derive(Debug, Clone, Copy)]
pub enum CertifiedConstants {
    GegNe {
        c1: f64,
        c2: f64,
        lambda: f64,
        gamma: f64,
        /// Last-iterate weight, present under the last-iterate hypotheses.
        omega: Option<f64>,
        /// Extragradient-specific decrease coefficient (`kappa1 = 0` only).
        psi_eg: Option<f64>,
    },
    Geg2Best {
        c1: f64,
        c2: f64,
        lambda: f64,
    },
    Geg2Last {
        c1: f64,
        lambda: f64,
        s: f64,
        omega: f64,
        gamma: f64,
    },
    Gfbfs2 {
        c1: f64,
        c2: f64,
        lambda: f64,
        gamma: f64,
    },
    Rfbs2 {
        omega: f64,
        c0: f64,
    },
    Gr2Low {
        phi: f64,
        c0: f64,
    },
    Gr2High {
        psi: f64,
        kappa: f64,
        c0_hat: f64,
    },
}

pub fn golden_ratio() -> f64 {
    0.5 * (1.0 + 5.0_f64.sqrt())
}

/// Upper stepsize bound for each family at the given constants (the quantity
/// the solvers' "auto" stepsize scales down by a safety factor).
pub fn upper_stepsize(pc: &ProblemConstants, family: Family, tau: Option<f64>) -> Result<f64> {
    let l = pc.lipschitz;
    if l <= 0.0 {
        return Err(Error::invalid("upper_stepsize requires L > 0"));
    }
    match family {
        Family::GegNe | Family::Gfbfs2 => Ok(best_iterate_range(pc)?.eta_hi),
        Family::Geg2NiBest => {
            let r = pc.r();
            let mut hi = pc.beta / ((1.0 + r) * l);
            if pc.kappa2 > 0.0 {
                if r == 0.0 {
                    return Err(Error::NoAdmissibleStepsize {
                        lrho: 0.0,
                        threshold: 0.0,
                    });
                }
                hi = hi.min((1.0 - pc.beta) * r / (pc.kappa2 * (1.0 + r) * l));
            }
            Ok(hi)
        }
        Family::Geg2NiLast => {
            if pc.kappa2 != 0.0 {
                return Err(Error::invalid("last-iterate constants require kappa2 = 0"));
            }
            Ok(pc.beta / ((1.0 + pc.r()) * l))
        }
        Family::Rfbs2 => Ok((SQRT2 - 1.0) / l),
        Family::Gr2Low => {
            let tau = tau.ok_or_else(|| Error::invalid("golden-ratio family requires tau"))?;
            check_tau_low(tau)?;
            Ok(tau / (2.0 * l))
        }
        Family::Gr2High => {
            let tau = tau.ok_or_else(|| Error::invalid("golden-ratio family requires tau"))?;
            check_tau_high(tau)?;
            let psi = (2.0 * tau + 2.0 - tau * tau) / tau;
            Ok(psi / (2.0 * l))
        }
    }
}

fn check_tau_low(tau: f64) -> Result<()> {
    if !(tau > 1.0 && tau <= golden_ratio()) {
        return Err(Error::invalid(format!(
            "low-ratio regime requires 1 < tau <= (1+sqrt5)/2, got {tau}"
        )));
    }
    Ok(())
}

fn check_tau_high(tau: f64) -> Result<()> {
    if !(tau > golden_ratio() && tau < 1.0 + 3.0_f64.sqrt()) {
        return Err(Error::invalid(format!(
            "high-ratio regime requires (1+sqrt5)/2 < tau < 1+sqrt3, got {tau}"
        )));
    }
    Ok(())
}

fn ensure_in_range(eta: f64, bound: f64, constraint: &'static str) -> Result<()> {
    if !(eta > 0.0) || eta > bound {
        return Err(Error::StepsizeOutOfRange {
            eta,
            bound,
            constraint,
        });
    }
    Ok(())
}

/// Evaluates the certified constants of `family` at stepsize `eta`.
///
/// Fails if `eta` lies outside the family's admissible range, naming the
/// violated bound; nonnegativity of the returned `C` constants is asserted.
pub fn constants_at(
    pc: &ProblemConstants,
    eta: f64,
    family: Family,
    tau: Option<f64>,
) -> Result<CertifiedConstants> {
    let l = pc.lipschitz;
    let r = pc.r();
    match family {
        Family::GegNe | Family::Gfbfs2 => {
            let range = best_iterate_range(pc)?;
            ensure_in_range(eta, range.eta_hi, "eta <= best-iterate upper endpoint")?;
            if eta < range.eta_lo * (1.0 - 1e-12) {
                return Err(Error::StepsizeOutOfRange {
                    eta,
                    bound: range.eta_lo,
                    constraint: "eta >= best-iterate lower endpoint",
                });
            }
            let mu = range.mu;
            let c1 = pc.beta - (1.0 + r) * l * eta - 4.0 * mu * pc.rho / eta;
            let c2 = if pc.kappa2 == 0.0 {
                1.0 - pc.beta
            } else {
                1.0 - pc.beta
                    - range.alpha.unwrap() * pc.kappa2 * l * eta
                    - 2.0 * (1.0 - mu) * pc.rho / eta
            };
            check_nonnegative(c1, "C1")?;
            check_nonnegative(c2, "C2")?;
            let lambda = 0.5 * (c1 + 2.0 * c2);
            let gamma = 2.0 * l * l / c1 + 2.0 / (lambda * eta * eta);
            let omega = (pc.beta == 1.0 && pc.kappa2 == 0.0)
                .then(|| {
                    let t = (1.0 + SQRT2) * pc.kappa1 * l * l * eta * eta;
                    (t < 1.0).then(|| 2.0 * t / (1.0 - t))
                })
                .flatten();
            let psi_eg =
                (pc.kappa1 == 0.0).then(|| eg_decrease_coefficient(l, pc.rho, eta));
            Ok(CertifiedConstants::GegNe {
                c1,
                c2,
                lambda,
                gamma,
                omega,
                psi_eg,
            })
        }
        Family::Geg2NiBest => {
            let hi = upper_stepsize(pc, Family::Geg2NiBest, None)?;
            ensure_in_range(eta, hi, "eta <= min{beta/((1+r)L), (1-beta)r/(kappa2(1+r)L)}")?;
            let c1 = pc.beta - (1.0 + r) * l * eta;
            let c2 = if pc.kappa2 == 0.0 {
                1.0 - pc.beta
            } else {
                1.0 - pc.beta - pc.kappa2 * (1.0 + r) * l * eta / r
            };
            check_nonnegative(c1, "C1")?;
            check_nonnegative(c2, "C2")?;
            let le2 = l * l * eta * eta;
            let lambda =
                3.0 * (3.0 * c1 + 2.0 * (c1 + 3.0 * c2) * le2) / (3.0 * c1 * (c1 + 3.0 * c2));
            Ok(CertifiedConstants::Geg2Best { c1, c2, lambda })
        }
        Family::Geg2NiLast => {
            let hi = upper_stepsize(pc, Family::Geg2NiLast, None)?;
            ensure_in_range(eta, hi, "eta < beta/((1+r)L)")?;
            let c1 = pc.beta - (1.0 + r) * l * eta;
            check_nonnegative(c1, "C1")?;
            let le2 = l * l * eta * eta;
            let lambda = 3.0 * (3.0 * c1 + 2.0 * c1 * le2) / (3.0 * c1 * c1);
            let (s, omega) = if pc.kappa1 == 0.0 {
                (0.0, 0.0)
            } else {
                let k1 = pc.kappa1;
                let a = (1.0 + r) * (1.0 + r) - 2.0 * k1 - 1.0;
                let s = (a + (a * a - 4.0 * k1 * (1.0 + k1)).max(0.0).sqrt())
                    / (2.0 * (1.0 + k1));
                let denom = s - (1.0 + s) * k1 * le2;
                if denom <= 0.0 {
                    return Err(Error::StepsizeOutOfRange {
                        eta,
                        bound: hi,
                        constraint: "(1+s) kappa1 L^2 eta^2 < s",
                    });
                }
                (s, k1 * (s + (1.0 + s) * le2) / denom)
            };
            let gamma = lambda / (eta * eta) + l * l * omega / c1;
            Ok(CertifiedConstants::Geg2Last {
                c1,
                lambda,
                s,
                omega,
                gamma,
            })
        }
        Family::Rfbs2 => {
            let hi = (SQRT2 - 1.0) / l;
            ensure_in_range(eta, hi, "eta < (sqrt2 - 1)/L")?;
            let le2 = l * l * eta * eta;
            let omega = 2.0 * le2 / (1.0 - 2.0 * le2);
            let c0 = (5.0 * le2 + 3.0) / (3.0 * eta * eta * (1.0 - (1.0 + SQRT2) * l * eta));
            Ok(CertifiedConstants::Rfbs2 { omega, c0 })
        }
        Family::Gr2Low => {
            let tau = tau.ok_or_else(|| Error::invalid("golden-ratio family requires tau"))?;
            check_tau_low(tau)?;
            let hi = tau / (2.0 * l);
            ensure_in_range(eta, hi, "eta < tau/(2L)")?;
            let le2 = l * l * eta * eta;
            let phi = (tau * tau - 4.0 * le2) / (2.0 * tau);
            let c0 = (tau * tau - 2.0 * le2) * tau
                / ((tau * tau - 4.0 * le2) * eta * eta * (tau - 1.0));
            Ok(CertifiedConstants::Gr2Low { phi, c0 })
        }
        Family::Gr2High => {
            let tau = tau.ok_or_else(|| Error::invalid("golden-ratio family requires tau"))?;
            check_tau_high(tau)?;
            let psi = (2.0 * tau + 2.0 - tau * tau) / tau;
            let hi = psi / (2.0 * l);
            ensure_in_range(eta, hi, "eta < psi/(2L)")?;
            let le2 = l * l * eta * eta;
            let kappa = (psi * psi - 4.0 * le2) / (2.0 * psi);
            let c0_hat = (psi * psi - 2.0 * le2 * (2.0 * tau * tau - psi * psi)) * tau
                / ((tau - 1.0) * (psi * psi - 4.0 * le2) * eta * eta * psi);
            Ok(CertifiedConstants::Gr2High {
                psi,
                kappa,
                c0_hat,
            })
        }
    }
}

fn check_nonnegative(value: f64, name: &'static str) -> Result<()> {
    if value < -1e-12 {
        return Err(Error::CertificateViolation(format!(
            "{name} = {value:e} is negative inside the admissible range"
        )));
    }
    Ok(())
}

/// Outcome of the randomized interval/constant lemma checker.
#[derive(Debug, Clone, Copy, Default)]
pub struct LemmaReport {
    pub trials: usize,
    pub interval_pass: usize,
    pub constants_pass: usize,
    pub intersection_pass: usize,
    /// Branch coverage over the interval-ordering cases:
    /// `beta <= r/(r+kappa2)`, `beta >= r/(r+kappa2)`, and `kappa2 = 0`.
    pub case_a: usize,
    pub case_b: usize,
    pub case_c: usize,
}

/// Randomized check of the interval lemmas: for admissible draws the
/// best-iterate interval is nonempty with nonnegative `C1, C2` throughout,
/// and under the last-iterate hypotheses the two intervals intersect.
pub fn check_interval_lemmas(trials: usize, seed: u64) -> Result<LemmaReport> {
    assert!(trials >= 1);
    let mut stream = Stream::new(seed, 0);
    let mut report = LemmaReport {
        trials,
        ..LemmaReport::default()
    };
    for trial in 0..trials {
        let kappa1 = if stream.uniform01() < 0.15 {
            0.0
        } else {
            stream.uniform(0.0, 3.0)
        };
        let kappa2 = if kappa1 == 0.0 || stream.uniform01() < 0.4 {
            0.0
        } else {
            stream.uniform(0.0, 2.0)
        };
        let beta = if kappa2 == 0.0 && stream.uniform01() < 0.5 {
            1.0
        } else {
            stream.uniform(0.05, 0.999_999)
        };
        let lipschitz = (stream.uniform((0.1_f64).ln(), (10.0_f64).ln())).exp();
        let pc0 = ProblemConstants::new(lipschitz, 0.0, beta, kappa1, kappa2)?;
        let delta = delta_threshold(&pc0);
        let rho = stream.uniform01() * delta / lipschitz;
        let pc = ProblemConstants::new(lipschitz, rho, beta, kappa1, kappa2)?;

        let r = pc.r();
        if kappa2 == 0.0 {
            report.case_c += 1;
        } else if beta <= r / (r + kappa2) {
            report.case_a += 1;
        } else {
            report.case_b += 1;
        }

        let range = best_iterate_range(&pc).map_err(|e| {
            Error::CertificateViolation(format!("trial {trial}: interval lemma failed: {e} (pc {pc:?})"))
        })?;
        if range.eta_lo > range.eta_hi {
            return Err(Error::CertificateViolation(format!(
                "trial {trial}: empty interval for {pc:?}"
            )));
        }
        report.interval_pass += 1;

        let mut ok = true;
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            // clamp: lo + t*(hi - lo) can overshoot hi by an ulp
            let eta = (range.eta_lo + t * (range.eta_hi - range.eta_lo)).min(range.eta_hi);
            if eta <= 0.0 {
                continue;
            }
            match constants_at(&pc, eta, Family::GegNe, None) {
                Ok(CertifiedConstants::GegNe { c1, c2, .. }) => {
                    if c1 < -1e-12 || c2 < -1e-12 {
                        ok = false;
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            return Err(Error::CertificateViolation(format!(
                "trial {trial}: negative constants inside the interval for {pc:?}"
            )));
        }
        report.constants_pass += 1;

        if beta == 1.0 && kappa2 == 0.0 {
            let m = m_of(kappa1);
            let cap = delta.min(1.0 / (16.0 * m));
            let rho_hat = stream.uniform01() * cap / lipschitz;
            let pc_hat = ProblemConstants::new(lipschitz, rho_hat, 1.0, kappa1, 0.0)?;
            let range = last_iterate_range(&pc_hat).map_err(|e| {
                Error::CertificateViolation(format!(
                    "trial {trial}: last-iterate interval failed: {e} (pc {pc_hat:?})"
                ))
            })?;
            if range.intersection().is_none() {
                return Err(Error::CertificateViolation(format!(
                    "trial {trial}: empty intersection for {pc_hat:?}"
                )));
            }
            report.intersection_pass += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc(l: f64, rho: f64, beta: f64, k1: f64, k2: f64) -> ProblemConstants {
        ProblemConstants::new(l, rho, beta, k1, k2).unwrap()
    }

    #[test]
    fn delta_for_plain_eg_is_one_sixteenth() {
        assert!((delta_threshold(&pc(1.0, 0.0, 1.0, 0.0, 0.0)) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn delta_for_past_eg_matches_closed_form() {
        // 1 / (8 (3 + sqrt 5))
        let d = delta_threshold(&pc(1.0, 0.0, 1.0, 1.0, 0.0));
        let want = 1.0 / (8.0 * (3.0 + 5.0_f64.sqrt()));
        assert!((d - want).abs() < 1e-15);
    }

    #[test]
    fn delta_general_matches_min_of_branches() {
        let p = pc(1.0, 0.0, 0.5, 1.0, 1.0);
        let r = p.r();
        assert!((r - 0.5 * (1.0 + 5.0_f64.sqrt())).abs() < 1e-15);
        let first = (1.0 + 2.0 / r) * 0.25;
        let second = 0.25 * r * (r + 2.0);
        let want = first.min(second) / (16.0 * (1.0 + r));
        assert!((delta_threshold(&p) - want).abs() < 1e-15);
        // brute scan confirms which branch is active
        assert!(first < second);
    }

    #[test]
    fn monotone_interval_upper_endpoints() {
        let range = best_iterate_range(&pc(1.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(range.eta_lo, 0.0);
        assert_eq!(range.eta_hi, 1.0);
        let range = best_iterate_range(&pc(1.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((range.eta_hi - 2.0 / (3.0 + 5.0_f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn degenerate_interval_at_the_threshold() {
        // beta = 1, L = 1, rho = 1/16: discriminant zero, point {1/2}.
        let range = best_iterate_range(&pc(1.0, 1.0 / 16.0, 1.0, 0.0, 0.0)).unwrap();
        assert!((range.eta_lo - 0.5).abs() < 1e-12);
        assert!((range.eta_hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn above_threshold_is_rejected() {
        let err = best_iterate_range(&pc(1.0, 1.0 / 16.0 * 1.01, 1.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NoAdmissibleStepsize { .. }));
    }

    #[test]
    fn kappa2_without_kappa1_has_no_stepsize() {
        let err = best_iterate_range(&pc(1.0, 0.0, 0.5, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NoAdmissibleStepsize { .. }));
    }

    #[test]
    fn last_iterate_endpoints_match_closed_forms() {
        let range = last_iterate_range(&pc(1.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        let hat = range.hat.unwrap();
        assert!((hat.eta_hi - 1.0 / (2.0 + SQRT2).sqrt()).abs() < 1e-15);
        let range = last_iterate_range(&pc(1.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        let hat = range.hat.unwrap();
        assert!((hat.eta_hi - 1.0 / (1.0 + SQRT2)).abs() < 1e-15);
        assert!(range.intersection().is_some());
    }

    #[test]
    fn last_iterate_requires_its_hypotheses() {
        assert!(last_iterate_range(&pc(1.0, 0.0, 0.9, 1.0, 0.0)).is_err());
        let p = ProblemConstants::new(1.0, 0.0, 0.5, 1.0, 0.5).unwrap();
        assert!(last_iterate_range(&p).is_err());
    }

    #[test]
    fn eg_specialized_interval_degenerates_at_its_threshold() {
        let (lo, hi) = eg_last_iterate_interval(1.0, 1.0 / (16.0 * SQRT2)).unwrap();
        assert!((lo - 1.0 / (2.0 * SQRT2)).abs() < 1e-12);
        assert!((hi - 1.0 / (2.0 * SQRT2)).abs() < 1e-12);
    }

    #[test]
    fn geg_ne_constants_hand_example() {
        let p = pc(1.0, 0.0, 1.0, 0.0, 0.0);
        match constants_at(&p, 0.5, Family::GegNe, None).unwrap() {
            CertifiedConstants::GegNe {
                c1,
                c2,
                lambda,
                gamma,
                ..
            } => {
                assert!((c1 - 0.5).abs() < 1e-15);
                assert_eq!(c2, 0.0);
                assert!((lambda - 0.25).abs() < 1e-15);
                assert!((gamma - 36.0).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rfbs2_constants_hand_example() {
        let p = pc(1.0, 0.0, 1.0, 0.0, 0.0);
        match constants_at(&p, 0.2, Family::Rfbs2, None).unwrap() {
            CertifiedConstants::Rfbs2 { omega, c0 } => {
                assert!((omega - 0.08 / 0.92).abs() < 1e-15);
                let want = (5.0 * 0.04 + 3.0) / (3.0 * 0.04 * (1.0 - (1.0 + SQRT2) * 0.2));
                assert!((c0 - want).abs() < 1e-10);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn gr2_high_psi_hand_example() {
        let p = pc(1.0, 0.0, 1.0, 0.0, 0.0);
        match constants_at(&p, 0.2, Family::Gr2High, Some(2.0)).unwrap() {
            CertifiedConstants::Gr2High { psi, .. } => assert!((psi - 1.0).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gr2_regime_boundaries_are_enforced() {
        let p = pc(1.0, 0.0, 1.0, 0.0, 0.0);
        assert!(constants_at(&p, 0.1, Family::Gr2Low, Some(2.0)).is_err());
        assert!(constants_at(&p, 0.1, Family::Gr2High, Some(1.5)).is_err());
        assert!(constants_at(&p, 0.1, Family::Gr2High, Some(2.8)).is_err());
        assert!(constants_at(&p, 0.1, Family::Gr2Low, Some(golden_ratio())).is_ok());
    }

    #[test]
    fn out_of_range_eta_names_the_bound() {
        let p = pc(1.0, 0.0, 1.0, 0.0, 0.0);
        let err = constants_at(&p, 1.5, Family::GegNe, None).unwrap_err();
        assert!(matches!(err, Error::StepsizeOutOfRange { .. }));
    }

    #[test]
    fn omega_is_finite_on_the_last_iterate_interval() {
        // (1 + sqrt2) kappa1 L^2 eta^2 < 1 across the returned interval.
        for &k1 in &[0.25, 1.0, 2.0] {
            let p = pc(2.0, 0.0, 1.0, k1, 0.0);
            let range = last_iterate_range(&p).unwrap();
            let hat = range.hat.unwrap();
            for i in 1..=20 {
                let eta = hat.eta_hi * i as f64 / 20.0;
                let t = (1.0 + SQRT2) * k1 * 4.0 * eta * eta;
                assert!(t < 1.0, "kappa1 {k1} eta {eta}");
            }
        }
    }

    #[test]
    fn lemma_checker_passes_with_fixed_seed() {
        let report = check_interval_lemmas(1000, 2024).unwrap();
        assert_eq!(report.trials, 1000);
        assert_eq!(report.interval_pass, 1000);
        assert_eq!(report.constants_pass, 1000);
        assert!(report.intersection_pass > 0);
        assert!(report.case_a > 0 && report.case_b > 0 && report.case_c > 0);
    }

    #[test]
    fn beta_one_needs_zero_kappa2() {
        assert!(ProblemConstants::new(1.0, 0.0, 1.0, 1.0, 0.5).is_err());
    }
}
