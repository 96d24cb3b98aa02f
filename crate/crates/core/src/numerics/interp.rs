use crate::error::{Error, Result};

/// Natural cubic spline through strictly increasing knots. Beyond the
/// knots the end polynomials are continued.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidParameter("spline needs at least 3 matching knots".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("spline knots must be strictly increasing".into()));
        }
        // Second derivatives with natural end conditions.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let piv = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / piv;
            r[i] = (rhs - h0 * r[i - 1]) / piv;
        }
        for i in (1..n - 1).rev() {
            m[i] = r[i] - c[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value, first and second derivative at `t`.
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

/// Cubic Hermite interpolation of `(y, y')` tabulated on a uniform grid.
/// Arguments outside the table are clamped to the end values with zero
/// slope.
#[derive(Debug, Clone)]
pub struct UniformHermite {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl UniformHermite {
    pub fn new(x0: f64, h: f64, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if y.len() < 2 || dy.len() != y.len() || !(h > 0.0) {
            return Err(Error::InvalidParameter("hermite table needs >= 2 points and h > 0".into()));
        }
        Ok(Self { x0, h, y, dy })
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    /// Value and derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.y.len();
        if t <= self.x0 {
            return (self.y[0], 0.0);
        }
        let s = (t - self.x0) / self.h;
        if s >= (n - 1) as f64 {
            return (self.y[n - 1], 0.0);
        }
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.dy[i] * self.h, self.dy[i + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let v = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dv = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * d0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * d1)
            / self.h;
        (v, dv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubic_interior() {
        let x: Vec<f64> = (0..=200).map(|i| -2.0 + 0.02 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|u| u - u * u * u).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for &t in &[-1.0, -0.3, 0.0, 0.77, 1.0] {
            let (v, d, dd) = s.eval_all(t);
            assert!((v - (t - t * t * t)).abs() < 1e-6);
            assert!((d - (1.0 - 3.0 * t * t)).abs() < 1e-4);
            assert!((dd + 6.0 * t).abs() < 1e-2);
        }
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let h = 0.1;
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let df = |x: f64| 6.0 * x * x - 1.0;
        let xs: Vec<f64> = (0..21).map(|i| -1.0 + h * i as f64).collect();
        let t = UniformHermite::new(-1.0, h, xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| df(x)).collect())
            .unwrap();
        for &x in &[-0.95, -0.31, 0.0, 0.44, 0.999] {
            let (v, d) = t.eval(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d - df(x)).abs() < 1e-10);
        }
    }
}
