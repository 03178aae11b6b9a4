//! Acts under subjective uncertainty.
//!
//! An act assigns a lottery to every state of Nature. Given a belief `π` over
//! states and a payoff matrix `U`, its utility is `Σ_s π(s) f_s' U f_s`:
//! quadratic in each state's lottery, linear in the belief.

use crate::error::{PeuError, Result};
use crate::linalg::{dot, norm, SymMatrix};
use crate::lottery::{born_profile, check_probability_vector, Basis, Lottery, RiskProfile};
use crate::peu::{utility, PayoffMatrix};

/// Tolerance on `‖V f_s‖` and on the norm of act mixtures.
pub const SPHERE_TOL: f64 = 1e-9;
/// Embedding columns must be unit vectors to this tolerance.
pub const EMBEDDING_TOL: f64 = 1e-10;

/// Finite, nonempty set of distinctly labelled states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(PeuError::Empty {
                context: "state space",
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(PeuError::DuplicateState(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Subjective probability over states. Null states are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probability_vector(&probs, "belief")?;
        Ok(Self { probs })
    }

    pub fn uniform(states: usize) -> Result<Self> {
        if states == 0 {
            return Err(PeuError::Empty { context: "belief" });
        }
        Self::new(vec![1.0 / states as f64; states])
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

    /// `a·self + (1 − a)·other`.
    pub fn mix(&self, a: f64, other: &Belief) -> Result<Belief> {
        if !(0.0..=1.0).contains(&a) {
            return Err(PeuError::InvalidWeight(a));
        }
        if self.len() != other.len() {
            return Err(PeuError::DimensionMismatch {
                context: "belief mixture",
                expected: self.len(),
                found: other.len(),
            });
        }
        Belief::new(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| a * p + (1.0 - a) * q)
                .collect(),
        )
    }
}

/// An `m × n` matrix sending each objective outcome to a unit vector of
/// subjective consequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    rows: Vec<Vec<f64>>,
    n: usize,
}

impl Embedding {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(PeuError::Empty {
                context: "embedding",
            });
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(PeuError::Empty {
                context: "embedding row",
            });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(PeuError::DimensionMismatch {
                    context: "embedding row length",
                    expected: n,
                    found: r.len(),
                });
            }
            if let Some((k, v)) = r.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(PeuError::NonFinite {
                    context: "embedding",
                    index: i * n + k,
                    value: *v,
                });
            }
        }
        if m < n {
            return Err(PeuError::DimensionMismatch {
                context: "embedding rows (need m >= n)",
                expected: n,
                found: m,
            });
        }
        for column in 0..n {
            let nrm = rows
                .iter()
                .map(|r| r[column] * r[column])
                .sum::<f64>()
                .sqrt();
            if (nrm - 1.0).abs() > EMBEDDING_TOL {
                return Err(PeuError::EmbeddingColumn { column, norm: nrm });
            }
        }
        Ok(Self { rows, n })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: Basis::natural(n).vectors().to_vec(),
            n,
        }
    }

    /// Number of subjective consequences.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of objective outcomes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }
}

/// One lottery per state, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Act {
    lotteries: Vec<Lottery>,
}

impl Act {
    pub fn new(lotteries: Vec<Lottery>) -> Result<Self> {
        let first = lotteries
            .first()
            .ok_or(PeuError::Empty { context: "act" })?;
        let n = first.dim();
        if let Some(bad) = lotteries.iter().find(|x| x.dim() != n) {
            return Err(PeuError::DimensionMismatch {
                context: "act lottery",
                expected: n,
                found: bad.dim(),
            });
        }
        Ok(Self { lotteries })
    }

    /// The act returning `x` in each of `states` states.
    pub fn constant(x: Lottery, states: usize) -> Result<Self> {
        Self::new(vec![x; states])
    }

    pub fn lotteries(&self) -> &[Lottery] {
        &self.lotteries
    }

    pub fn states(&self) -> usize {
        self.lotteries.len()
    }

    /// Outcome dimension of every lottery.
    pub fn dim(&self) -> usize {
        self.lotteries[0].dim()
    }
}

/// Per-state risk profiles over subjective consequences.
#[derive(Debug, Clone, PartialEq)]
pub struct ActProfile {
    profiles: Vec<RiskProfile>,
}

impl ActProfile {
    pub fn profiles(&self) -> &[RiskProfile] {
        &self.profiles
    }
}

/// `profile_s(j) = ⟨z_j | V f_s⟩²`.
pub fn act_profile(f: &Act, v: &Embedding, z: &Basis) -> Result<ActProfile> {
    if v.n() != f.dim() {
        return Err(PeuError::DimensionMismatch {
            context: "embedding columns vs act dimension",
            expected: v.n(),
            found: f.dim(),
        });
    }
    if z.dim() != v.m() {
        return Err(PeuError::DimensionMismatch {
            context: "basis vs embedding rows",
            expected: v.m(),
            found: z.dim(),
        });
    }
    let profiles = f
        .lotteries
        .iter()
        .enumerate()
        .map(|(state, x)| {
            let image = v.apply(x.amplitudes());
            let nrm = norm(&image);
            if (nrm - 1.0).abs() > SPHERE_TOL {
                return Err(PeuError::UnnormalizedEmbedding { state, norm: nrm });
            }
            born_profile(&image, z, "act profile")
        })
        .collect::<Result<_>>()?;
    Ok(ActProfile { profiles })
}

/// `Σ_s π(s) f_s' U f_s`.
pub fn act_utility(pi: &Belief, u: &PayoffMatrix, f: &Act) -> Result<f64> {
    if pi.len() != f.states() {
        return Err(PeuError::DimensionMismatch {
            context: "belief vs act states",
            expected: f.states(),
            found: pi.len(),
        });
    }
    let mut total = 0.0;
    for (p, x) in pi.probs.iter().zip(&f.lotteries) {
        total += p * utility(u, x)?;
    }
    Ok(total)
}

/// `true` iff the eigenvalue spread of `U` exceeds `tol`.
///
/// A payoff matrix with constant eigenvalues is a multiple of the identity
/// and ranks every act equally.
pub fn check_nonconstant_eigenvalues(u: &PayoffMatrix, tol: f64) -> Result<bool> {
    let d = u.decompose()?;
    let l = d.eigenvalues();
    Ok(l[0] - l[l.len() - 1] > tol)
}

/// Statewise `a·f_s + (1 − a)·g_s`.
///
/// The result must stay on the unit sphere in every state; a mixture of
/// distinct lotteries generally does not, and is rejected.
pub fn mix_acts(a: f64, f: &Act, g: &Act) -> Result<Act> {
    if !(0.0..=1.0).contains(&a) {
        return Err(PeuError::InvalidWeight(a));
    }
    if f.states() != g.states() {
        return Err(PeuError::DimensionMismatch {
            context: "act mixture states",
            expected: f.states(),
            found: g.states(),
        });
    }
    if f.dim() != g.dim() {
        return Err(PeuError::DimensionMismatch {
            context: "act mixture dimension",
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let lotteries = f
        .lotteries
        .iter()
        .zip(&g.lotteries)
        .enumerate()
        .map(|(state, (x, y))| {
            let v: Vec<f64> = x
                .amplitudes()
                .iter()
                .zip(y.amplitudes())
                .map(|(p, q)| a * p + (1.0 - a) * q)
                .collect();
            let nrm = norm(&v);
            if (nrm - 1.0).abs() > SPHERE_TOL {
                return Err(PeuError::NonSphericalMixture { state, norm: nrm });
            }
            Lottery::new(v)
        })
        .collect::<Result<_>>()?;
    Ok(Act { lotteries })
}

/// The two-urn Ellsberg setup with outcomes (Win, Lose).
#[derive(Debug, Clone)]
pub struct EllsbergScenario {
    pub alpha: f64,
    pub states: StateSpace,
    pub belief: Belief,
    pub payoff: PayoffMatrix,
    /// Sure win.
    pub w: Lottery,
    /// Sure loss.
    pub l: Lottery,
    /// Win with probability 1/3.
    pub r: Lottery,
    /// Win with probability 2/3.
    pub r_bar: Lottery,
    /// Constant act `r`.
    pub bet_r: Act,
    /// Constant act `r̄`.
    pub bet_r_bar: Act,
    /// `Urn1 ↦ r̄, Urn2 ↦ l`.
    pub bet_g: Act,
    /// `Urn1 ↦ r, Urn2 ↦ w`.
    pub bet_g_bar: Act,
}

pub fn ellsberg_scenario(alpha: f64) -> EllsbergScenario {
    let lottery = |v: Vec<f64>| Lottery::new(v).expect("unit vector");
    let w = lottery(vec![1.0, 0.0]);
    let l = lottery(vec![0.0, 1.0]);
    let r = lottery(vec![(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()]);
    let r_bar = lottery(vec![(2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()]);
    let act = |v: Vec<Lottery>| Act::new(v).expect("two states, same dimension");
    EllsbergScenario {
        alpha,
        states: StateSpace::new(["Urn1", "Urn2"]).expect("distinct labels"),
        belief: Belief::uniform(2).expect("two states"),
        payoff: PayoffMatrix::new(SymMatrix::from_upper_fn(2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 1) => 0.0,
            _ => alpha,
        })),
        bet_r: act(vec![r.clone(), r.clone()]),
        bet_r_bar: act(vec![r_bar.clone(), r_bar.clone()]),
        bet_g: act(vec![r_bar.clone(), l.clone()]),
        bet_g_bar: act(vec![r.clone(), w.clone()]),
        w,
        l,
        r,
        r_bar,
    }
}

impl EllsbergScenario {
    pub fn act_utility(&self, f: &Act) -> f64 {
        act_utility(&self.belief, &self.payoff, f).expect("scenario acts match the belief")
    }

    pub fn lottery_utility(&self, x: &Lottery) -> f64 {
        utility(&self.payoff, x).expect("scenario lotteries are two-dimensional")
    }
}
