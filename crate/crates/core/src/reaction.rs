//! Bistable reaction terms and their shifted variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CubicSpline;

/// Direction of a shifted reaction: `Plus` dominates `f` from above,
/// `Minus` from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    fn factor(self) -> f64 {
        match self {
            ShiftSign::Plus => 1.0,
            ShiftSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ReactionKind {
    /// `f(u) = u - u^3`.
    Cubic,
    /// `f(u) = slope * u`; not bistable, used for heat-equation runs.
    Linear { slope: f64 },
    Tabulated { spline: CubicSpline },
    Shifted(Box<ShiftedParts>),
}

/// `g(u) = f(u - sign * delta * s(u)) + sign * rho(u)` where the switch
/// `s` is `+1` on the outer decreasing branches of `f` and `-1` on the
/// middle increasing one.
#[derive(Debug, Clone)]
pub struct ShiftedParts {
    pub base: ReactionSpec,
    pub delta: f64,
    pub sign: ShiftSign,
    /// Local minimum and maximum of the base reaction.
    pub extrema: [f64; 2],
    pub width: f64,
    /// Bump heights at the two extrema.
    pub bumps: [f64; 2],
}

/// A scalar reaction term together with its zeros and rate constants.
#[derive(Debug, Clone)]
pub struct ReactionSpec {
    pub kind: ReactionKind,
    pub a_minus: f64,
    pub a_zero: f64,
    pub a_plus: f64,
    pub p: f64,
    pub mu: f64,
    pub c_f: f64,
    pub c0: f64,
    /// Every sign change of `f` found on `[-2 C0, 2 C0]`.
    pub zeros: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub p: f64,
    pub mu: f64,
    pub c_f: f64,
}

fn smoothstep(z: f64) -> (f64, f64, f64) {
    if z <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if z >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let z2 = z * z;
        (
            z2 * z * (10.0 - 15.0 * z + 6.0 * z2),
            30.0 * z2 * (1.0 - z) * (1.0 - z),
            60.0 * z * (1.0 - z) * (1.0 - 2.0 * z),
        )
    }
}

impl ShiftedParts {
    /// Switch value and its first two derivatives.
    fn switch(&self, u: f64) -> (f64, f64, f64) {
        let w = self.width;
        let [lo, hi] = self.extrema;
        let (a, da, dda) = smoothstep((u - (lo - w)) / (2.0 * w));
        let (b, db, ddb) = smoothstep((u - (hi - w)) / (2.0 * w));
        let k = 1.0 / (2.0 * w);
        (1.0 - 2.0 * a + 2.0 * b, 2.0 * k * (db - da), 2.0 * k * k * (ddb - dda))
    }

    /// Plateau bump of height 1 on `|d| <= w`, zero beyond `2w`.
    fn plateau(&self, d: f64) -> (f64, f64, f64) {
        let w = self.width;
        let ad = d.abs();
        if ad <= w {
            return (1.0, 0.0, 0.0);
        }
        let (s, ds, dds) = smoothstep((ad - w) / w);
        let sg = d.signum();
        (1.0 - s, -sg * ds / w, -dds / (w * w))
    }

    fn bump(&self, u: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for (c, h) in self.extrema.iter().zip(&self.bumps) {
            let (v, d, dd) = self.plateau(u - c);
            out.0 += h * v;
            out.1 += h * d;
            out.2 += h * dd;
        }
        out
    }

    fn eval_all(&self, u: f64) -> (f64, f64, f64) {
        let sg = self.sign.factor();
        let (s, ds, dds) = self.switch(u);
        let g = u - sg * self.delta * s;
        let dg = 1.0 - sg * self.delta * ds;
        let ddg = -sg * self.delta * dds;
        let (f, df, ddf) = self.base.eval_all(g);
        let (r, dr, ddr) = self.bump(u);
        (f + sg * r, df * dg + sg * dr, ddf * dg * dg + df * ddg + sg * ddr)
    }
}

impl ReactionSpec {
    /// The builtin `u - u^3` with `C0 = 1`.
    pub fn cubic() -> Self {
        Self::cubic_with_c0(1.0)
    }

    pub fn cubic_with_c0(c0: f64) -> Self {
        let mut r = Self::bare(ReactionKind::Cubic, c0);
        r.finish_zeros();
        r
    }

    pub fn linear(slope: f64) -> Self {
        let mut r = Self::bare(ReactionKind::Linear { slope }, 1.0);
        r.finish_zeros();
        r
    }

    /// Natural cubic spline through `(u_i, f_i)`.
    pub fn tabulated(u: Vec<f64>, f: Vec<f64>, c0: f64) -> Result<Self> {
        let spline = CubicSpline::new(u, f)?;
        let mut r = Self::bare(ReactionKind::Tabulated { spline }, c0);
        r.finish_zeros();
        Ok(r)
    }

    fn bare(kind: ReactionKind, c0: f64) -> Self {
        Self {
            kind,
            a_minus: f64::NAN,
            a_zero: f64::NAN,
            a_plus: f64::NAN,
            p: f64::NAN,
            mu: f64::NAN,
            c_f: f64::NAN,
            c0,
            zeros: Vec::new(),
        }
    }

    /// Locates zeros and fills the rate constants. With anything other
    /// than three zeros the outer ones are used and validation reports it.
    fn finish_zeros(&mut self) {
        let zeros = match self.kind {
            ReactionKind::Cubic => vec![-1.0, 0.0, 1.0],
            _ => self.scan_zeros(),
        };
        if !zeros.is_empty() {
            self.a_minus = zeros[0];
            self.a_plus = *zeros.last().unwrap();
            self.a_zero = zeros[zeros.len() / 2];
        } else {
            self.a_minus = 0.0;
            self.a_zero = 0.0;
            self.a_plus = 0.0;
        }
        self.zeros = zeros;
        self.p = -self.df(self.a_plus);
        self.mu = self.df(self.a_zero);
        self.c_f = self.max_slope();
    }

    fn scan_zeros(&self) -> Vec<f64> {
        let (lo, hi) = self.window();
        let n = 8000;
        let h = (hi - lo) / n as f64;
        let mut out = Vec::new();
        let mut u0 = lo;
        let mut f0 = self.f(u0);
        for i in 1..=n {
            let u1 = lo + h * i as f64;
            let f1 = self.f(u1);
            if f0 == 0.0 {
                out.push(u0);
            } else if f0 * f1 < 0.0 {
                out.push(self.bisect(u0, u1));
            }
            u0 = u1;
            f0 = f1;
        }
        if f0 == 0.0 {
            out.push(u0);
        }
        out
    }

    fn bisect(&self, mut a: f64, mut b: f64) -> f64 {
        let fa = self.f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.f(m);
            if fm == 0.0 {
                return m;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Analysis window `[-2 C0, 2 C0]`.
    pub fn window(&self) -> (f64, f64) {
        (-2.0 * self.c0, 2.0 * self.c0)
    }

    fn max_slope(&self) -> f64 {
        let (lo, hi) = self.window();
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let (mut best, mut arg) = (f64::NEG_INFINITY, lo);
        for i in 0..=n {
            let u = lo + h * i as f64;
            let d = self.df(u);
            if d > best {
                best = d;
                arg = u;
            }
        }
        // Golden-section polish around the best sample.
        let (mut a, mut b) = ((arg - h).max(lo), (arg + h).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.df(c) > self.df(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.max(self.df(0.5 * (a + b)))
    }

    /// `(f, f', f'')` at `u`.
    pub fn eval_all(&self, u: f64) -> (f64, f64, f64) {
        match &self.kind {
            ReactionKind::Cubic => (u - u * u * u, 1.0 - 3.0 * u * u, -6.0 * u),
            ReactionKind::Linear { slope } => (slope * u, *slope, 0.0),
            ReactionKind::Tabulated { spline } => spline.eval_all(u),
            ReactionKind::Shifted(parts) => parts.eval_all(u),
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self.kind {
            ReactionKind::Cubic => u - u * u * u,
            _ => self.eval_all(u).0,
        }
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        match self.kind {
            ReactionKind::Cubic => 1.0 - 3.0 * u * u,
            _ => self.eval_all(u).1,
        }
    }

    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        self.eval_all(u).2
    }

    pub fn is_cubic(&self) -> bool {
        matches!(self.kind, ReactionKind::Cubic)
    }

    /// `p`, `mu`, `c_f`; fails unless both rates are positive.
    pub fn constants(&self) -> Result<Constants> {
        if !(self.p > 0.0) || !(self.mu > 0.0) {
            return Err(Error::NotBistable(format!("p = {}, mu = {}", self.p, self.mu)));
        }
        Ok(Constants { p: self.p, mu: self.mu, c_f: self.c_f })
    }

    /// Local minimum of `f` in `(a_-, a_0)` and local maximum in `(a_0, a_+)`.
    pub fn extrema(&self) -> Result<[f64; 2]> {
        if self.is_cubic() {
            let r = 1.0 / 3f64.sqrt();
            return Ok([-r, r]);
        }
        self.constants()?;
        let argext = |a: f64, b: f64, sign: f64| {
            let n = 4000;
            let h = (b - a) / n as f64;
            let mut best = (f64::NEG_INFINITY, a);
            for i in 1..n {
                let u = a + h * i as f64;
                let v = sign * self.f(u);
                if v > best.0 {
                    best = (v, u);
                }
            }
            let (mut lo, mut hi) = (best.1 - h, best.1 + h);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if sign * self.df(m) > 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        };
        Ok([argext(self.a_minus, self.a_zero, -1.0), argext(self.a_zero, self.a_plus, 1.0)])
    }

    /// `sup` (`Plus`) or `inf` (`Minus`) of `f(u + v)` over `|v| <= delta`.
    pub fn window_extremum(&self, u: f64, delta: f64, sign: ShiftSign, extrema: &[f64; 2]) -> f64 {
        let sg = sign.factor();
        let n = 64;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            let v = -delta + 2.0 * delta * i as f64 / n as f64;
            best = best.max(sg * self.f(u + v));
        }
        for &c in extrema {
            if (c - u).abs() <= delta {
                best = best.max(sg * self.f(c));
            }
        }
        sg * best
    }

    /// Shifted reaction `f_+^delta` / `f_-^delta` with zeros
    /// `{a_- ± delta, ∓delta, a_+ ± delta}` that dominates `f` over every
    /// `delta`-window. `delta = 0` returns a copy of `self`.
    pub fn shifted(&self, delta: f64, sign: ShiftSign) -> Result<ReactionSpec> {
        if delta == 0.0 {
            return Ok(self.clone());
        }
        self.constants()?;
        let half_gap = 0.5 * (self.a_plus - self.a_zero).min(self.a_zero - self.a_minus);
        if !(delta > 0.0 && delta < half_gap) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, {half_gap}), got {delta}")));
        }
        let extrema = self.extrema()?;
        let mut parts = ShiftedParts { base: self.clone(), delta, sign, extrema, width: 2.0 * delta, bumps: [0.0; 2] };
        let sg = sign.factor();
        // Bump heights: worst deficit of the pure shift inside each plateau.
        for (k, &c) in extrema.iter().enumerate() {
            let n = 2000;
            let mut worst = 0.0_f64;
            for i in 0..=n {
                let u = c - parts.width + 2.0 * parts.width * i as f64 / n as f64;
                let target = self.window_extremum(u, delta, sign, &extrema);
                let (s, _, _) = parts.switch(u);
                let shifted = self.f(u - sg * delta * s);
                worst = worst.max(sg * (target - shifted));
            }
            parts.bumps[k] = worst * 1.02 + 1e-9;
        }
        let mut out = Self::bare(ReactionKind::Shifted(Box::new(parts)), self.c0);
        out.a_minus = self.a_minus + sg * delta;
        out.a_zero = self.a_zero - sg * delta;
        out.a_plus = self.a_plus + sg * delta;
        out.zeros = vec![out.a_minus, out.a_zero, out.a_plus];
        out.p = -out.df(out.a_plus);
        out.mu = out.df(out.a_zero);
        out.c_f = out.max_slope();
        let margin = out.domination_margin(self, delta, sign, 10_000);
        if margin.1 < -1e-12 {
            return Err(Error::DominationFailed { u: margin.0, margin: margin.1 });
        }
        Ok(out)
    }

    /// Worst sampled value of `±(g(u) - window_extremum(f, u))` and where it
    /// occurs.
    pub fn domination_margin(&self, base: &ReactionSpec, delta: f64, sign: ShiftSign, samples: usize) -> (f64, f64) {
        let extrema = base.extrema().unwrap_or([f64::NAN; 2]);
        let (lo, hi) = base.window();
        let sg = sign.factor();
        let mut worst = (lo, f64::INFINITY);
        for i in 0..samples {
            let u = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let m = sg * (self.f(u) - base.window_extremum(u, delta, sign, &extrema));
            if m < worst.1 {
                worst = (u, m);
            }
        }
        worst
    }

    /// Per-condition check by dense sampling on `[-2 C0, 2 C0]`.
    pub fn validate_conditions(&self) -> ConditionReport {
        let (lo, hi) = self.window();
        let n = 10_000;
        let us: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let mut checks = Vec::new();
        let three = self.zeros.len() == 3;
        checks.push(Check::new("three zeros", three, format!("found {} sign changes", self.zeros.len())));
        let slopes = three && self.p > 0.0 && self.mu > 0.0 && self.df(self.a_minus) < 0.0;
        checks.push(Check::new(
            "slope signs",
            slopes,
            format!("f'(a-) = {:.4}, f'(a0) = {:.4}, f'(a+) = {:.4}", self.df(self.a_minus), self.mu, -self.p),
        ));
        let growth = us.iter().map(|&u| self.f(u) / (1.0 + u.abs().powi(3))).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::new("growth bound", growth.is_finite(), format!("sup f/(1+|u|^3) = {growth:.4}")));
        checks.push(Check::new("derivative bound", self.c_f.is_finite(), format!("sup f' = {:.4}", self.c_f)));
        if self.is_cubic() {
            let odd = us.iter().all(|&u| self.f(-u) == -self.f(u));
            checks.push(Check::new("oddness", odd, "exact on samples".into()));
        }
        let mut worst = f64::INFINITY;
        for &u in us.iter().filter(|&&u| u >= self.a_plus) {
            worst = worst.min(-self.p * (u - self.a_plus) - self.f(u));
        }
        let lin = !three || worst >= -1e-12;
        checks.push(Check::new(
            "linear domination",
            three && lin,
            format!("min of -p(u-a+) - f(u) over u >= a+: {worst:.4e}"),
        ));
        ConditionReport { checks }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub checks: Vec<Check>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Serializable description of a reaction for experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReactionConfig {
    Cubic {
        #[serde(default = "default_c0")]
        c0: f64,
    },
    Tabulated {
        u: Vec<f64>,
        f: Vec<f64>,
        #[serde(default = "default_c0")]
        c0: f64,
    },
    Shifted {
        base: Box<ReactionConfig>,
        delta: f64,
        sign: ShiftSign,
    },
}

fn default_c0() -> f64 {
    1.0
}

impl Default for ReactionConfig {
    fn default() -> Self {
        ReactionConfig::Cubic { c0: 1.0 }
    }
}

impl ReactionConfig {
    pub fn build(&self) -> Result<ReactionSpec> {
        match self {
            ReactionConfig::Cubic { c0 } => Ok(ReactionSpec::cubic_with_c0(*c0)),
            ReactionConfig::Tabulated { u, f, c0 } => ReactionSpec::tabulated(u.clone(), f.clone(), *c0),
            ReactionConfig::Shifted { base, delta, sign } => base.build()?.shifted(*delta, *sign),
        }
    }
}
