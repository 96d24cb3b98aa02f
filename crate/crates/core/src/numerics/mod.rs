//! Grids, norms, random streams and the small linear-algebra kit shared by
//! the solvers.

pub mod grid;
pub mod interp;
pub mod linalg;
pub mod noise;
pub mod quad;

pub use grid::{h1_norm, l2_norm, Field, Grid1D};
pub use interp::{CubicSpline, UniformHermite};
pub use linalg::{SymTridiagonal, TridiagonalLu};
pub use noise::{sample_white_noise_increment, Noise, RngStream};
