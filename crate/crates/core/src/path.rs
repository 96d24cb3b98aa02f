//! Time-indexed interface positions shared by the SPDE extraction and the
//! SDE simulator.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    /// Rescaled time.
    pub t: f64,
    pub position: f64,
    pub distance: Option<f64>,
    pub h1_remainder: Option<f64>,
    pub valid: bool,
}

impl PathPoint {
    pub fn new(t: f64, position: f64) -> Self {
        Self { t, position, distance: None, h1_remainder: None, valid: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_id: u64,
    pub points: Vec<PathPoint>,
}

impl PathRecord {
    pub fn new(path_id: u64) -> Self {
        Self { path_id, points: Vec::new() }
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.position).collect()
    }

    pub fn all_valid(&self) -> bool {
        self.points.iter().all(|p| p.valid)
    }
}

/// CSV with columns `path_id, t, xi, distance, h1_remainder, valid`.
pub fn write_paths_csv<W: Write>(paths: &[PathRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_id", "t", "xi", "distance", "h1_remainder", "valid"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in paths {
        for q in &p.points {
            w.write_record([
                p.path_id.to_string(),
                q.t.to_string(),
                q.position.to_string(),
                opt(q.distance),
                opt(q.h1_remainder),
                q.valid.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
