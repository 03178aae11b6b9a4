//! Utility over a barycentric grid of the probability triangle.

use crate::error::{PeuError, Result};
use crate::lottery::simplex_to_sphere;
use crate::peu::{utility, PayoffMatrix};

/// One grid point `(p1, p2, p3)` with its utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePoint {
    pub p: [f64; 3],
    pub utility: f64,
}

/// Number of grid points at `resolution` subdivisions: `(r+1)(r+2)/2`.
pub fn grid_size(resolution: usize) -> usize {
    (resolution + 1) * (resolution + 2) / 2
}

/// Evaluates `u` at every point `(i, j, r − i − j) / r` of the 2-simplex.
///
/// Rows are ordered by `i` (the weight on the first outcome), then `j`.
/// Each point is lifted to the sphere with amplitudes `√p` before
/// evaluation.
pub fn triangle_raster(u: &PayoffMatrix, resolution: usize) -> Result<Vec<TrianglePoint>> {
    if u.dim() != 3 {
        return Err(PeuError::DimensionMismatch {
            context: "triangle raster needs a 3x3 payoff matrix",
            expected: 3,
            found: u.dim(),
        });
    }
    if resolution < 2 {
        return Err(PeuError::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let r = resolution as f64;
    let mut out = Vec::with_capacity(grid_size(resolution));
    for i in 0..=resolution {
        for j in 0..=(resolution - i) {
            let k = resolution - i - j;
            let p = [i as f64 / r, j as f64 / r, k as f64 / r];
            let x = simplex_to_sphere(&p)?;
            out.push(TrianglePoint {
                p,
                utility: utility(u, &x)?,
            });
        }
    }
    Ok(out)
}
