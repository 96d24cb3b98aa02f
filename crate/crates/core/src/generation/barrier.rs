use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Field, Grid1D};
use crate::spde::initial::c_mu;

/// Parameters of the barrier `h = phi + eps^kappa psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub eps: f64,
    pub kappa: f64,
    pub kappa_bar: f64,
    pub beta: f64,
    /// Start of the exponential tails of `phi`.
    pub k: f64,
    pub c0: f64,
    pub mu: f64,
    /// Time constant of the window `[0, c1 eps |log eps|]`.
    pub c1: f64,
    /// Width of the cubic pieces of `psi` next to `±1`.
    pub psi_delta: f64,
}

impl BarrierParams {
    pub fn new(eps: f64, c0: f64, mu: f64) -> Self {
        Self { eps, kappa: 1.5, kappa_bar: 1.25, beta: 0.2, k: 2.0, c0, mu, c1: 0.25 / mu, psi_delta: 0.5 }
    }

    /// Plateau value of `phi` on `[-1, 1]`.
    pub fn plateau(&self) -> f64 {
        1.05 * (4.0 * self.c0 * self.c0 + self.c0) / self.mu
    }
}

/// Even piecewise `C^2` function given on `x >= 0`.
#[derive(Debug, Clone, Copy)]
struct Phi {
    amp: f64,
    rate: f64,
    k: f64,
    ramp: f64,
    plateau: f64,
    /// Magnitude of the flat part of `phi''` on the bridge.
    curv: f64,
    /// Width of the linear parts of the trapezoid on the bridge.
    taper: f64,
}

impl Phi {
    fn new(p: &BarrierParams) -> Result<Self> {
        let rate = p.eps.powf(-p.beta);
        let ramp = p.eps.powf(2.0 * p.beta);
        let len = p.k - ramp - 1.0;
        if !(len > 0.0) {
            return Err(Error::BarrierRejected(format!("K = {} leaves no room for the bridge", p.k)));
        }
        let taper = 0.25 * len;
        // phi(1) = amp * (1 + eps^beta + eps^{2 beta}/3 + (eps^-beta + 1/2) len / 2)
        let unit = 1.0 + 1.0 / rate + ramp / 3.0 + (rate + 0.5) * len / 2.0;
        let plateau = p.plateau();
        let amp = plateau / unit;
        let curv = amp * (rate + 0.5) / (len - taper);
        Ok(Self { amp, rate, k: p.k, ramp, plateau, curv, taper })
    }

    /// `(phi, phi', phi'')` at `x >= 0`.
    fn eval_pos(&self, x: f64) -> (f64, f64, f64) {
        let a = self.amp;
        if x >= self.k {
            let v = a * (-self.rate * (x - self.k)).exp();
            return (v, -self.rate * v, self.rate * self.rate * v);
        }
        let inner = self.k - self.ramp;
        if x >= inner {
            let s = self.k - x;
            let r2 = self.rate * self.rate;
            let w = self.ramp;
            let v = a + a * self.rate * s + a * r2 * (s * s / 2.0 - s * s * s / (6.0 * w));
            let d = -a * self.rate - a * r2 * (s - s * s / (2.0 * w));
            let dd = a * r2 * (1.0 - s / w);
            return (v, d, dd);
        }
        if x <= 1.0 {
            return (self.plateau, 0.0, 0.0);
        }
        // Concave bridge on [1, inner]: phi'' is a trapezoid of depth curv.
        let y = x - 1.0;
        let len = inner - 1.0;
        let (c, d) = (self.curv, self.taper);
        // Antiderivatives of the trapezoid g(y) >= 0 (phi'' = -g).
        let g = |y: f64| -> f64 {
            if y < d {
                c * y / d
            } else if y > len - d {
                c * (len - y) / d
            } else {
                c
            }
        };
        let g1 = |y: f64| -> f64 {
            if y < d {
                c * y * y / (2.0 * d)
            } else if y > len - d {
                let z = len - y;
                c * (len - d) - c * z * z / (2.0 * d)
            } else {
                c * d / 2.0 + c * (y - d)
            }
        };
        let g2 = |y: f64| -> f64 {
            if y < d {
                c * y * y * y / (6.0 * d)
            } else if y > len - d {
                let z = len - y;
                let at = c * d * d / 6.0 + c * d / 2.0 * (len - 2.0 * d) + c * (len - 2.0 * d).powi(2) / 2.0;
                at + c * (len - d) * (d - z) - c * (d * d * d - z * z * z) / (6.0 * d)
            } else {
                c * d * d / 6.0 + c * d / 2.0 * (y - d) + c * (y - d) * (y - d) / 2.0
            }
        };
        (self.plateau - g2(y), -g1(y), -g(y))
    }

    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (v, d, dd) = self.eval_pos(x.abs());
        (v, x.signum() * d, dd)
    }
}

#[derive(Debug, Clone, Copy)]
struct Psi {
    sq: f64,
    delta: f64,
    c3: f64,
    quart: (f64, f64, f64),
    p: (f64, f64, f64),
}

impl Psi {
    fn new(mu: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::BarrierRejected(format!("psi transition width {delta} not in (0, 1)")));
        }
        let sq = mu.sqrt();
        let p0 = (-sq / 2.0).exp();
        let p1 = -sq / 2.0 * p0;
        let p2 = mu / 4.0 * p0;
        let c3 = p2 / (6.0 * delta);
        // Value and slope of the cubic at 1 - delta.
        let s = -delta;
        let v = p0 + p1 * s + p2 / 2.0 * s * s + c3 * s * s * s;
        let d = p1 + p2 * s + 3.0 * c3 * s * s;
        let x0 = 1.0 - delta;
        let a = -d / (8.0 * x0 * x0 * x0);
        let b = -6.0 * a * x0 * x0;
        let c = v - a * x0.powi(4) - b * x0 * x0;
        Ok(Self { sq, delta, c3, quart: (a, b, c), p: (p0, p1, p2) })
    }

    fn eval_pos(&self, x: f64) -> (f64, f64, f64) {
        if x >= 1.0 {
            let v = (-self.sq * x / 2.0).exp();
            return (v, -self.sq / 2.0 * v, self.sq * self.sq / 4.0 * v);
        }
        if x >= 1.0 - self.delta {
            let s = x - 1.0;
            let (p0, p1, p2) = self.p;
            let c3 = self.c3;
            return (
                p0 + p1 * s + p2 / 2.0 * s * s + c3 * s * s * s,
                p1 + p2 * s + 3.0 * c3 * s * s,
                p2 + 6.0 * c3 * s,
            );
        }
        let (a, b, c) = self.quart;
        (a * x.powi(4) + b * x * x + c, 4.0 * a * x.powi(3) + 2.0 * b * x, 12.0 * a * x * x + 2.0 * b)
    }

    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (v, d, dd) = self.eval_pos(x.abs());
        (v, x.signum() * d, dd)
    }
}

/// Sampled barrier with its components and derivatives.
#[derive(Debug, Clone)]
pub struct BarrierFunction {
    pub params: BarrierParams,
    pub grid: Grid1D,
    pub h: Field,
    pub dh: Field,
    pub d2h: Field,
    pub phi: Field,
    /// `eps^kappa psi`.
    pub psi_part: Field,
    /// Amplitude of the exponential tails of `phi`.
    pub tail_amplitude: f64,
}

impl BarrierFunction {
    /// Same barrier multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            h: self.h.scale(s),
            dh: self.dh.scale(s),
            d2h: self.d2h.scale(s),
            phi: self.phi.scale(s),
            psi_part: self.psi_part.scale(s),
            tail_amplitude: s * self.tail_amplitude,
            ..self.clone()
        }
    }

    /// `phi` at an arbitrary point, for checks off the grid.
    pub fn phi_at(&self, x: f64) -> f64 {
        Phi::new(&self.params).map(|p| p.eval(x).0).unwrap_or(f64::NAN)
    }
}

/// Assembles `h = phi + eps^kappa psi` on `grid`.
pub fn build_barrier(params: &BarrierParams, grid: &Grid1D) -> Result<BarrierFunction> {
    let p = params;
    if !(p.k > 1.0) || !(p.kappa > p.kappa_bar && p.kappa_bar > 0.0) || !(p.beta > 0.0) {
        return Err(Error::BarrierRejected("need K > 1, kappa > kappa_bar > 0 and beta > 0".into()));
    }
    if !(p.c1 * p.mu > 0.0 && p.c1 * p.mu < 1.0) || !(p.beta < (1.0 - p.c1 * p.mu) / 2.0) {
        return Err(Error::BarrierRejected(format!("need 0 < c1 mu < 1 and beta < (1 - c1 mu) / 2, got c1 = {}", p.c1)));
    }
    if !(p.eps > 0.0 && p.eps < 1.0) || !(p.c0 > 0.0) || !(p.mu > 0.0) {
        return Err(Error::BarrierRejected("need 0 < eps < 1, c0 > 0 and mu > 0".into()));
    }
    let phi = Phi::new(p)?;
    let psi = Psi::new(p.mu, p.psi_delta)?;
    let e = p.eps.powf(p.kappa);
    let mut vals = [Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for i in 0..grid.len() {
        let x = grid.x(i);
        let (a, da, dda) = phi.eval(x);
        let (b, db, ddb) = psi.eval(x);
        vals[0].push(a + e * b);
        vals[1].push(da + e * db);
        vals[2].push(dda + e * ddb);
        vals[3].push(a);
        vals[4].push(e * b);
    }
    let [h, dh, d2h, ph, ps] = vals;
    if h.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::BarrierRejected("h is not positive".into()));
    }
    Ok(BarrierFunction {
        params: *p,
        grid: *grid,
        h: Field::from_values(*grid, h)?,
        dh: Field::from_values(*grid, dh)?,
        d2h: Field::from_values(*grid, d2h)?,
        phi: Field::from_values(*grid, ph)?,
        psi_part: Field::from_values(*grid, ps)?,
        tail_amplitude: phi.amp,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst margin (gradient, laplacian), smallest admissible tail
    /// constant `C`, or `(eps^{1 - c1 mu} - eps) |h|_inf`.
    pub value: f64,
    pub at_x: f64,
    pub at_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierReport {
    pub checks: Vec<BarrierCheck>,
    pub t_max: f64,
}

impl BarrierReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// First and second differences of a sampled field.
pub fn differences(u: &Field) -> (Field, Field) {
    let d1 = u.gradient();
    let mut d2 = u.laplacian();
    let n = d2.len();
    if n >= 4 {
        let h2 = u.grid.dx() * u.grid.dx();
        let v = &u.values;
        d2.values[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        d2.values[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    }
    (d1, d2)
}

/// Checks the five barrier conditions on all nodes and `n_times` samples
/// of `[0, c1 eps |log eps|]`.
pub fn verify_barrier(b: &BarrierFunction, u0: &Field, c1: f64, eps: f64, n_times: usize) -> Result<BarrierReport> {
    if u0.grid != b.grid {
        return Err(Error::InvalidParameter("initial datum and barrier on different grids".into()));
    }
    let mu = b.params.mu;
    let t_max = c1 * eps * eps.ln().abs();
    let (du, d2u) = differences(u0);
    let mut c1_check = BarrierCheck { name: "gradient", passed: true, value: f64::INFINITY, at_x: 0.0, at_t: 0.0 };
    let mut c2_check = BarrierCheck { name: "laplacian", passed: true, value: f64::INFINITY, at_x: 0.0, at_t: 0.0 };
    for k in 0..=n_times {
        let t = t_max * k as f64 / n_times.max(1) as f64;
        let a = eps * ((mu * t / eps).exp() - 1.0);
        for i in 0..u0.len() {
            let h = b.h.values[i];
            let g = du.values[i] + a * b.dh.values[i];
            let m1 = mu * h - g * g;
            let m2 = m1 - (d2u.values[i] + a * b.d2h.values[i]);
            if m1 < c1_check.value {
                c1_check = BarrierCheck { value: m1, at_x: b.grid.x(i), at_t: t, ..c1_check };
            }
            if m2 < c2_check.value {
                c2_check = BarrierCheck { value: m2, at_x: b.grid.x(i), at_t: t, ..c2_check };
            }
        }
    }
    c1_check.passed = c1_check.value >= 0.0;
    c2_check.passed = c2_check.value >= 0.0;

    let growth = eps.powf(1.0 - c1 * mu) - eps;
    let ek = eps.powf(b.params.kappa);
    let cm = c_mu(mu);
    let tail = |right: bool| {
        let mut worst = (0.0_f64, 0.0);
        for i in 0..u0.len() {
            let x = b.grid.x(i);
            let inside = if right { x >= b.params.k } else { x <= -b.params.k };
            if !inside {
                continue;
            }
            let env = (-mu.sqrt() * x.abs() / 2.0).exp();
            let need = (ek * cm * env + b.h.values[i] * growth) / (ek * env);
            if need > worst.0 {
                worst = (need, x);
            }
        }
        worst
    };
    let (cr, xr) = tail(true);
    let (cl, xl) = tail(false);
    let limit = growth * b.h.sup_norm();
    Ok(BarrierReport {
        checks: vec![
            c1_check,
            c2_check,
            BarrierCheck { name: "right tail", passed: cr.is_finite(), value: cr, at_x: xr, at_t: 0.0 },
            BarrierCheck { name: "left tail", passed: cl.is_finite(), value: cl, at_x: xl, at_t: 0.0 },
            BarrierCheck { name: "vanishing growth", passed: limit <= b.params.c0, value: limit, at_x: 0.0, at_t: t_max },
        ],
        t_max,
    })
}

/// `(eps^{1 - c1 mu} - eps) |h|_inf` for each `eps`, with the barrier
/// rebuilt at that `eps`.
pub fn growth_sequence(base: &BarrierParams, grid: &Grid1D, c1: f64, eps_list: &[f64]) -> Result<Vec<f64>> {
    eps_list
        .iter()
        .map(|&eps| {
            let p = BarrierParams { eps, ..*base };
            let b = build_barrier(&p, grid)?;
            Ok((eps.powf(1.0 - c1 * p.mu) - eps) * b.h.sup_norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(f64) -> (f64, f64, f64), xs: &[f64]) {
        let h = 1e-6;
        for &x in xs {
            let (_, d, dd) = f(x);
            let fd = (f(x + h).0 - f(x - h).0) / (2.0 * h);
            let fdd = (f(x + h).1 - f(x - h).1) / (2.0 * h);
            assert!((d - fd).abs() < 1e-5 * (1.0 + d.abs()), "x={x}: {d} vs {fd}");
            assert!((dd - fdd).abs() < 1e-4 * (1.0 + dd.abs()), "x={x}: {dd} vs {fdd}");
        }
    }

    #[test]
    fn phi_is_c2() {
        let p = BarrierParams::new(0.01, 1.0, 1.0);
        let phi = Phi::new(&p).unwrap();
        let k = p.k;
        let inner = k - phi.ramp;
        let xs = [0.3, 1.0 + 1e-3, 1.1, 1.3, 1.5, inner - 0.05, inner - 1e-4, inner + 1e-4, k - 1e-4, k + 1e-4, k + 0.3];
        fd_check(|x| phi.eval(x), &xs);
        // Continuity across the joints.
        for &j in &[1.0, inner, k] {
            let (a, b) = (phi.eval(j - 1e-9), phi.eval(j + 1e-9));
            assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6 && (a.2 - b.2).abs() < 1e-5, "{j}: {a:?} {b:?}");
        }
        assert!((phi.eval(1.0).0 - p.plateau()).abs() < 1e-12);
        let tail = phi.eval(k + p.eps.powf(p.beta)).0;
        assert!((tail - phi.amp * (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn psi_is_c2_and_positive() {
        let psi = Psi::new(1.0, 0.5).unwrap();
        fd_check(|x| psi.eval(x), &[0.1, 0.4, 0.49, 0.51, 0.8, 0.99, 1.01, 2.0, -0.7]);
        for &j in &[0.5, 1.0] {
            let (a, b) = (psi.eval(j - 1e-9), psi.eval(j + 1e-9));
            assert!((a.0 - b.0).abs() < 1e-7 && (a.1 - b.1).abs() < 1e-7 && (a.2 - b.2).abs() < 1e-6);
        }
        for i in 0..100 {
            assert!(psi.eval(-3.0 + 0.06 * i as f64).0 > 0.0);
        }
    }
}
