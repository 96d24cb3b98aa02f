//! Two-sample statistics on per-slice interface positions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::PathRecord;

/// Minimum valid points per ensemble for a KS test on a slice.
pub const MIN_KS_POINTS: usize = 50;

/// Per-slice KS significance level.
pub const KS_LEVEL: f64 = 0.01;

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic survival function of the Kolmogorov distribution,
/// `2 sum_k (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        s += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// `(D, p)` with the small-sample correction of Stephens on the effective
/// size `n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d = ks_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let s = ne.sqrt();
    (d, kolmogorov_survival((s + 0.12 + 0.11 / s) * d))
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 { x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, v)
}

/// Linear-interpolated empirical quantile of a sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceStats {
    pub t: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    /// 5%, 25%, 50%, 75%, 95% quantiles of the first ensemble.
    pub quantiles_a: [f64; 5],
    pub quantiles_b: [f64; 5],
    pub ks_statistic: Option<f64>,
    pub ks_p_value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStats {
    pub slices: Vec<SliceStats>,
    pub ks_level: f64,
}

impl EnsembleStats {
    /// Slices that carry a KS test.
    pub fn tested(&self) -> impl Iterator<Item = &SliceStats> {
        self.slices.iter().filter(|s| s.ks_p_value.is_some())
    }

    /// Fraction of tested slices with `p > ks_level`.
    pub fn ks_pass_fraction(&self) -> f64 {
        let n = self.tested().count();
        if n == 0 {
            return 0.0;
        }
        self.tested().filter(|s| s.ks_p_value.unwrap() > self.ks_level).count() as f64 / n as f64
    }

    /// Largest `|var_a / var_b - 1|` over tested slices with `var_b > 0`.
    pub fn max_variance_mismatch(&self) -> f64 {
        self.tested().filter(|s| s.var_b > 0.0).map(|s| (s.var_a / s.var_b - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Positions relative to each path's first point, which is dropped, so
/// that the comparison is on increments.
pub fn increments(paths: &[PathRecord]) -> Vec<PathRecord> {
    paths
        .iter()
        .map(|p| {
            let x0 = p.points.first().filter(|q| q.valid).map(|q| q.position).unwrap_or(f64::NAN);
            let mut q = p.clone();
            q.points = q.points.split_off(1.min(q.points.len()));
            for pt in &mut q.points {
                pt.position -= x0;
                pt.valid = pt.valid && x0.is_finite();
            }
            q
        })
        .collect()
}

/// Slice-by-slice comparison of two ensembles on a common time lattice.
pub fn compare_path_laws(a: &[PathRecord], b: &[PathRecord]) -> Result<EnsembleStats> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("each ensemble needs at least 2 paths".into()));
    }
    let lattice = a[0].times();
    let same = |t: &[f64]| t.len() == lattice.len() && t.iter().zip(&lattice).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + y.abs()));
    if !a.iter().chain(b).all(|p| same(&p.times())) {
        return Err(Error::LatticeMismatch);
    }
    let column = |ps: &[PathRecord], k: usize| -> Vec<f64> {
        let mut v: Vec<f64> = ps.iter().map(|p| p.points[k]).filter(|q| q.valid && q.position.is_finite()).map(|q| q.position).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let qs = |v: &[f64]| [0.05, 0.25, 0.5, 0.75, 0.95].map(|q| quantile(v, q));
    let slices = lattice
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let (xa, xb) = (column(a, k), column(b, k));
            let (mean_a, var_a) = mean_var(&xa);
            let (mean_b, var_b) = mean_var(&xb);
            let ks = (xa.len() >= MIN_KS_POINTS && xb.len() >= MIN_KS_POINTS).then(|| ks_two_sample(&xa, &xb));
            SliceStats {
                t,
                n_a: xa.len(),
                n_b: xb.len(),
                mean_a,
                mean_b,
                var_a,
                var_b,
                quantiles_a: qs(&xa),
                quantiles_b: qs(&xb),
                ks_statistic: ks.map(|k| k.0),
                ks_p_value: ks.map(|k| k.1),
            }
        })
        .collect();
    Ok(EnsembleStats { slices, ks_level: KS_LEVEL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::PathPoint;

    #[test]
    fn ks_known_values() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.5, 3.5]) - 0.5).abs() < 1e-15);
        // Q_KS(1.36) is the classical 5% point.
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&v, 0.5), 1.5);
        assert_eq!(quantile(&v, 1.0), 3.0);
    }

    #[test]
    fn lattice_mismatch() {
        let mk = |dt: f64| {
            let mut p = PathRecord::new(0);
            p.points = (0..3).map(|k| PathPoint::new(k as f64 * dt, 0.0)).collect();
            p
        };
        let a = vec![mk(0.1), mk(0.1)];
        let b = vec![mk(0.2), mk(0.2)];
        assert!(matches!(compare_path_laws(&a, &b), Err(Error::LatticeMismatch)));
    }
}
