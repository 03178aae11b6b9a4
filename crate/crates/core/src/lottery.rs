//! Lotteries as points on the nonnegative orthant of the unit sphere.
//!
//! A lottery over `n` outcomes is a unit vector `x` with `x_i >= 0`; the
//! probability of outcome `i` is `x_i²`. Measured against any other
//! orthonormal basis `z`, the same lottery induces the risk profile
//! `⟨x|z_k⟩²`.

use crate::error::{PeuError, Result};
use crate::linalg::{check_orthonormal_rows, dot};

/// Accepted drift of `Σ x_i²` from 1 before a lottery is renormalized.
pub const NORM_EXACT_TOL: f64 = 1e-12;
/// Drift beyond this is an error rather than rounding noise.
pub const NORM_REPAIR_TOL: f64 = 1e-9;
/// Tolerance on the total mass of probability vectors.
pub const PROB_SUM_TOL: f64 = 1e-10;

/// A unit vector with nonnegative amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    amplitudes: Vec<f64>,
}

impl Lottery {
    /// Validates `amplitudes`.
    ///
    /// Vectors whose squared norm is within [`NORM_REPAIR_TOL`] of 1 are
    /// rescaled onto the sphere; anything further out is rejected.
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(PeuError::Empty { context: "lottery" });
        }
        for (index, &value) in amplitudes.iter().enumerate() {
            if !value.is_finite() {
                return Err(PeuError::NonFinite {
                    context: "lottery",
                    index,
                    value,
                });
            }
            if value < 0.0 {
                return Err(PeuError::NegativeEntry {
                    context: "lottery",
                    index,
                    value,
                });
            }
        }
        let sq = dot(&amplitudes, &amplitudes);
        let drift = (sq - 1.0).abs();
        if drift <= NORM_EXACT_TOL {
            Ok(Self { amplitudes })
        } else if drift <= NORM_REPAIR_TOL {
            let nrm = sq.sqrt();
            Ok(Self {
                amplitudes: amplitudes.into_iter().map(|a| a / nrm).collect(),
            })
        } else {
            Err(PeuError::NotNormalized {
                context: "lottery (sum of squared amplitudes)",
                value: sq,
            })
        }
    }

    /// The degenerate lottery paying outcome `k` for sure.
    pub fn degenerate(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(PeuError::IndexOutOfRange { index: k, dim: n });
        }
        let mut a = vec![0.0; n];
        a[k] = 1.0;
        Ok(Self { amplitudes: a })
    }

    /// Equal probability on every outcome.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(PeuError::Empty { context: "lottery" });
        }
        Self::new(vec![(1.0 / n as f64).sqrt(); n])
    }

    /// Equal probability on outcomes `i` and `j` only.
    pub fn equiprobable_pair(n: usize, i: usize, j: usize) -> Result<Self> {
        for k in [i, j] {
            if k >= n {
                return Err(PeuError::IndexOutOfRange { index: k, dim: n });
            }
        }
        if i == j {
            return Err(PeuError::SameIndex(i));
        }
        let mut a = vec![0.0; n];
        a[i] = 0.5f64.sqrt();
        a[j] = 0.5f64.sqrt();
        Self::new(a)
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Outcome probabilities `x_i²`.
    pub fn probabilities(&self) -> Vec<f64> {
        sphere_to_simplex(self)
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amplitudes
    }
}

/// An orthonormal basis of `R^n`, stored as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    vectors: Vec<Vec<f64>>,
}

impl Basis {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        check_orthonormal_rows(&vectors)?;
        Ok(Self { vectors })
    }

    /// The natural (identity) basis.
    pub fn natural(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { vectors }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// A probability vector over the elements of some basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskProfile {
    probs: Vec<f64>,
}

impl RiskProfile {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probability_vector(&probs, "risk profile")?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `Σ_k payoffs_k · p_k`, the expected payoff of this profile.
    pub fn expectation(&self, payoffs: &[f64]) -> Result<f64> {
        crate::linalg::inner(&self.probs, payoffs)
    }
}

pub(crate) fn check_probability_vector(p: &[f64], context: &'static str) -> Result<()> {
    if p.is_empty() {
        return Err(PeuError::Empty { context });
    }
    for (index, &value) in p.iter().enumerate() {
        if !value.is_finite() {
            return Err(PeuError::NonFinite {
                context,
                index,
                value,
            });
        }
        if value < 0.0 {
            return Err(PeuError::NegativeEntry {
                context,
                index,
                value,
            });
        }
        if value > 1.0 + PROB_SUM_TOL {
            return Err(PeuError::NotNormalized { context, value });
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(PeuError::NotNormalized {
            context,
            value: total,
        });
    }
    Ok(())
}

/// Maps a point of the probability simplex to the lottery with amplitudes `√p_i`.
pub fn simplex_to_sphere(p: &[f64]) -> Result<Lottery> {
    check_probability_vector(p, "probability vector")?;
    Lottery::new(p.iter().map(|v| v.sqrt()).collect())
}

/// Componentwise square of the amplitudes.
pub fn sphere_to_simplex(x: &Lottery) -> Vec<f64> {
    x.amplitudes.iter().map(|a| a * a).collect()
}

/// Born-rule probabilities of `x` against the basis `z`: `⟨x|z_k⟩²`.
pub fn risk_profile(x: &Lottery, z: &Basis) -> Result<RiskProfile> {
    born_profile(x.amplitudes(), z, "risk profile")
}

/// `⟨v|z_k⟩²` for an arbitrary unit vector `v`.
pub(crate) fn born_profile(v: &[f64], z: &Basis, context: &'static str) -> Result<RiskProfile> {
    if v.len() != z.dim() {
        return Err(PeuError::DimensionMismatch {
            context,
            expected: z.dim(),
            found: v.len(),
        });
    }
    let probs = z
        .vectors
        .iter()
        .map(|zk| {
            let c = dot(v, zk);
            c * c
        })
        .collect();
    RiskProfile::new(probs)
}

/// `a·p + (1 − a)·q`.
pub fn mix_profiles(a: f64, p: &RiskProfile, q: &RiskProfile) -> Result<RiskProfile> {
    if !(0.0..=1.0).contains(&a) {
        return Err(PeuError::InvalidWeight(a));
    }
    if p.len() != q.len() {
        return Err(PeuError::DimensionMismatch {
            context: "profile mixture",
            expected: p.len(),
            found: q.len(),
        });
    }
    let probs = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(x, y)| a * x + (1.0 - a) * y)
        .collect();
    RiskProfile::new(probs)
}
