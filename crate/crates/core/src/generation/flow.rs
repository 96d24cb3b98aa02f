use serde::Serialize;

use crate::error::{Error, Result};
use crate::reaction::ReactionSpec;

/// Flow of the reaction ODE `Y' = f(Y)`, integrated together with
/// `q = int f'(Y)` (so `Y_xi = e^q`) and `A = int e^q f''(Y)`.
#[derive(Debug, Clone)]
pub struct OdeFlow {
    pub reaction: ReactionSpec,
    pub tolerance: f64,
    pub max_step: f64,
}

/// State of the augmented flow at some time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub y: f64,
    pub y_xi: f64,
    pub a: f64,
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl OdeFlow {
    pub fn new(reaction: ReactionSpec) -> Self {
        Self { reaction, tolerance: 1e-11, max_step: 0.25 }
    }

    fn bound(&self) -> f64 {
        2.0 * self.reaction.c0 + 1.0
    }

    fn rhs(&self, s: [f64; 3]) -> [f64; 3] {
        let (f, df, ddf) = self.reaction.eval_all(s[0]);
        [f, df, s[1].exp() * ddf]
    }

    /// Integrates the augmented state from `(xi, 0, 0)` to time `tau`.
    pub fn integrate(&self, tau: f64, xi: f64) -> Result<FlowState> {
        let window = 2.0 * self.reaction.c0;
        if !(xi.abs() <= window) {
            return Err(Error::FlowEscaped { value: xi, bound: window });
        }
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("flow time must be nonnegative, got {tau}")));
        }
        let mut s = [xi, 0.0, 0.0];
        let mut t = 0.0;
        let mut h = self.max_step.min(tau).max(1e-12);
        while t < tau {
            if t + h > tau {
                h = tau - t;
            }
            let mut k = [[0.0; 3]; 7];
            for i in 0..7 {
                let mut st = s;
                for (j, kj) in k.iter().enumerate().take(i) {
                    for d in 0..3 {
                        st[d] += h * A[i][j] * kj[d];
                    }
                }
                k[i] = self.rhs(st);
            }
            let mut next = s;
            let mut err = 0.0_f64;
            for d in 0..3 {
                let mut hi = 0.0;
                let mut lo = 0.0;
                for i in 0..7 {
                    hi += B5[i] * k[i][d];
                    lo += B4[i] * k[i][d];
                }
                next[d] = s[d] + h * hi;
                let sc = self.tolerance * (1.0 + s[d].abs().max(next[d].abs()));
                err = err.max((h * (hi - lo)).abs() / sc);
            }
            if !err.is_finite() || next.iter().any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }
            if err <= 1.0 || h < 1e-12 {
                t += h;
                s = next;
                if s[0].abs() > self.bound() || !s[0].is_finite() {
                    return Err(Error::FlowEscaped { value: s[0], bound: self.bound() });
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(self.max_step);
        }
        Ok(FlowState { y: s[0], y_xi: s[1].exp(), a: s[2] })
    }

    /// `Y(tau, xi)`.
    pub fn flow_y(&self, tau: f64, xi: f64) -> Result<f64> {
        Ok(self.integrate(tau, xi)?.y)
    }

    /// `Y_xi(tau, xi) = exp(int_0^tau f'(Y))`.
    pub fn flow_y_xi(&self, tau: f64, xi: f64) -> Result<f64> {
        Ok(self.integrate(tau, xi)?.y_xi)
    }

    /// `A(tau, xi) = Y_xixi / Y_xi = int_0^tau Y_xi f''(Y)`.
    pub fn flow_a(&self, tau: f64, xi: f64) -> Result<f64> {
        Ok(self.integrate(tau, xi)?.a)
    }

    /// Earliest `tau` with `done(Y(tau, xi))`, assuming the predicate stays
    /// true once reached.
    pub fn hitting_time(&self, xi: f64, done: impl Fn(f64) -> bool) -> Result<f64> {
        if done(xi) {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while !done(self.flow_y(hi, xi)?) {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::InvalidParameter(format!("flow from {xi} never reaches the target")));
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-10 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if done(self.flow_y(mid, xi)?) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Measured threshold times of the reaction flow and their rates per
/// `|log eps|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdReport {
    pub eps: f64,
    /// From `a_0 + eps^alpha` up to `a_+ - eta`.
    pub escape_time: f64,
    /// From `a_+ - eta` up to `a_+ - eps^kappa`.
    pub approach_time: f64,
    /// Worst case over `[a_0 + eps^alpha, 2 C0]` to land within `eps^kappa`
    /// of `a_+`.
    pub worst_time: f64,
    pub escape_rate: f64,
    pub approach_rate: f64,
    pub worst_rate: f64,
}

pub fn ode_threshold_times(flow: &OdeFlow, eps: f64, alpha: f64, kappa: f64, eta: f64) -> Result<ThresholdReport> {
    let r = &flow.reaction;
    let (a0, ap) = (r.a_zero, r.a_plus);
    let ek = eps.powf(kappa);
    let start = a0 + eps.powf(alpha);
    let escape = flow.hitting_time(start, |y| y >= ap - eta)?;
    let approach = flow.hitting_time(ap - eta, |y| y >= ap - ek)?;
    let top = 2.0 * r.c0;
    let n = 200;
    let mut worst = 0.0_f64;
    for i in 0..=n {
        let xi = start + (top - start) * i as f64 / n as f64;
        worst = worst.max(flow.hitting_time(xi, |y| (y - ap).abs() <= ek)?);
    }
    let l = eps.ln().abs();
    Ok(ThresholdReport {
        eps,
        escape_time: escape,
        approach_time: approach,
        worst_time: worst,
        escape_rate: escape / l,
        approach_rate: approach / l,
        worst_rate: worst / l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(tau: f64, xi: f64) -> f64 {
        xi * tau.exp() / (1.0 + xi * xi * ((2.0 * tau).exp() - 1.0)).sqrt()
    }

    #[test]
    fn fixed_points() {
        let fl = OdeFlow::new(ReactionSpec::cubic());
        for tau in [0.0, 0.5, 3.0, 10.0] {
            assert_eq!(fl.flow_y(tau, 0.0).unwrap(), 0.0);
            assert!((fl.flow_y(tau, 1.0).unwrap() - 1.0).abs() < 1e-14);
            assert!((fl.flow_y_xi(tau, 0.0).unwrap() - tau.exp()).abs() < 1e-9 * tau.exp());
            assert_eq!(fl.flow_a(tau, 0.0).unwrap(), 0.0);
        }
        assert_eq!(fl.flow_y_xi(0.0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn matches_closed_form() {
        let fl = OdeFlow::new(ReactionSpec::cubic());
        let tau = 100f64.ln();
        for xi in [-1.9, -0.4, 0.1, 0.7, 1.5, 2.0] {
            assert!((fl.flow_y(tau, xi).unwrap() - exact(tau, xi)).abs() < 1e-9);
        }
    }

    #[test]
    fn escape_is_reported() {
        let fl = OdeFlow::new(ReactionSpec::cubic());
        assert!(matches!(fl.flow_y(1.0, 2.5), Err(Error::FlowEscaped { .. })));
    }
}
