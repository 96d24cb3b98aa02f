use crate::error::{Error, Result};

/// LU factors of a tridiagonal matrix, ready for repeated Thomas solves.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_mod: Vec<f64>,
}

impl TridiagonalLu {
    /// `lower[i]` multiplies `x[i-1]` in row `i` (entry 0 unused);
    /// `upper[i]` multiplies `x[i+1]` (last entry unused).
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n || n == 0 {
            return Err(Error::InvalidParameter("tridiagonal bands have mismatched lengths".into()));
        }
        let mut inv_pivot = vec![0.0; n];
        let mut upper_mod = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let piv = diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            if piv.abs() < 1e-300 {
                return Err(Error::InvalidParameter(format!("zero pivot in row {i}")));
            }
            inv_pivot[i] = 1.0 / piv;
            upper_mod[i] = upper[i] * inv_pivot[i];
            prev = upper_mod[i];
        }
        Ok(Self { lower: lower.to_vec(), inv_pivot, upper_mod })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples `i` and `i+1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if e.len() + 1 != d.len() {
            return Err(Error::InvalidParameter("off-diagonal must have n-1 entries".into()));
        }
        Ok(Self { d, e })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let qq = if q == 0.0 { f64::EPSILON * (self.e[i - 1].abs() + 1.0) } else { q };
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / qq;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        while hi - lo > 4.0 * f64::EPSILON * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.d[i] * v[i];
            if i > 0 {
                s += self.e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.e[i] * v[i + 1];
            }
            out[i] = s;
        }
    }

    /// Eigenvector for an eigenvalue estimate `lambda`, by inverse
    /// iteration on the slightly shifted matrix. Returned with unit
    /// Euclidean norm.
    pub fn eigenvector(&self, lambda: f64, start: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = lambda.abs().max(1.0);
        let shift = lambda - 1e-10 * scale;
        let diag: Vec<f64> = self.d.iter().map(|d| d - shift).collect();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        lower[1..].copy_from_slice(&self.e);
        upper[..n - 1].copy_from_slice(&self.e);
        let lu = TridiagonalLu::factor(&lower, &diag, &upper)?;
        let mut v = start.to_vec();
        normalize(&mut v);
        for _ in 0..4 {
            lu.solve(&mut v);
            normalize(&mut v);
        }
        Ok(v)
    }

    /// Lowest `k` eigenpairs. Vectors have unit Euclidean norm and are
    /// re-orthogonalized by modified Gram-Schmidt.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("cannot extract {k} modes from a {n}x{n} matrix")));
        }
        let mut values = Vec::with_capacity(k);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        for j in 0..k {
            let lambda = self.eigenvalue(j);
            // Deterministic start vector with components along every mode.
            let start: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (j as f64 + 1.3) * 0.618).sin())
                .collect();
            let mut v = self.eigenvector(lambda, &start)?;
            for u in &vectors {
                let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= p * ui;
                }
            }
            normalize(&mut v);
            values.push(lambda);
            vectors.push(v);
        }
        Ok((values, vectors))
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v {
            *x /= n;
        }
    }
}
