use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the truncated domain `[-L, L]` with `n_cells + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub half_width: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, n_cells: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!("half width must be positive, got {half_width}")));
        }
        if n_cells < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 cells, got {n_cells}")));
        }
        Ok(Self { half_width, n_cells })
    }

    /// Grid on `[-L, L]` whose spacing does not exceed `max_dx`. The cell
    /// count is rounded up to an even number so that `x = 0` is a node.
    pub fn with_max_spacing(half_width: f64, max_dx: f64) -> Result<Self> {
        if !(max_dx > 0.0) {
            return Err(Error::InvalidParameter(format!("max spacing must be positive, got {max_dx}")));
        }
        let mut n = (2.0 * half_width / max_dx).ceil() as usize;
        if n % 2 == 1 {
            n += 1;
        }
        Self::new(half_width, n.max(2))
    }

    /// Default simulation grid for a given `eps`: the interface layer of
    /// width `sqrt(eps)` gets at least 16 cells.
    pub fn for_eps(half_width: f64, eps: f64) -> Result<Self> {
        Self::with_max_spacing(half_width, eps.sqrt() / 8.0)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        // Symmetric evaluation keeps x(i) == -x(n - i) bit for bit.
        let n = self.n_cells as f64;
        self.half_width * (2.0 * i as f64 - n) / n
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let r = ((x + self.half_width) / self.dx()).round();
        r.clamp(0.0, self.n_cells as f64) as usize
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_cells {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }
}

/// Scalar profile sampled on the nodes of a [`Grid1D`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: (0..grid.len()).map(|i| f(grid.x(i))).collect() }
    }

    pub fn from_values(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Weighted L² inner product.
    pub fn inner(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.grid.weight(i) * a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    pub fn h1_norm(&self) -> f64 {
        h1_norm(self)
    }

    /// Central-difference gradient, second-order one-sided at the ends.
    pub fn gradient(&self) -> Field {
        let v = &self.values;
        let n = v.len();
        let h = self.grid.dx();
        let mut g = vec![0.0; n];
        if n >= 3 {
            g[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            g[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        }
        for i in 1..n - 1 {
            g[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        Field { grid: self.grid, values: g }
    }

    /// Second difference on interior nodes; the two end values copy their
    /// neighbours.
    pub fn laplacian(&self) -> Field {
        let v = &self.values;
        let n = v.len();
        let h2 = self.grid.dx() * self.grid.dx();
        let mut l = vec![0.0; n];
        for i in 1..n - 1 {
            l[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        l[0] = l[1];
        l[n - 1] = l[n - 2];
        Field { grid: self.grid, values: l }
    }

    /// CSV with a one-line JSON header block carrying the grid metadata.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.grid)?)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([self.grid.x(i).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sqrt(sum v_i^2 w_i)` with trapezoid weights.
pub fn l2_norm(f: &Field) -> f64 {
    f.inner(f).sqrt()
}

/// `||f|| + ||f'||` with the gradient from [`Field::gradient`].
pub fn h1_norm(f: &Field) -> f64 {
    l2_norm(f) + l2_norm(&f.gradient())
}
