//! Utility of lotteries under a symmetric payoff matrix.
//!
//! Preferences over lotteries are represented by `u(x) = x' U x`. Writing
//! `U = P' D P` with `P` orthonormal, the same number is the expected payoff
//! `Σ_k d_k ⟨x|p_k⟩²` over the eigenbasis, so the eigenvalues act as the
//! payoffs of the preferred outcomes and the eigenvectors as those outcomes.

use std::fmt;
use std::str::FromStr;

use crate::error::{PeuError, Result};
use crate::linalg::{eigh, SpectralDecomposition, SymMatrix};
use crate::lottery::{Basis, Lottery};

/// Default tolerance for attitude classification and vNM checks.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// A symmetric payoff matrix `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    u: SymMatrix,
}

impl PayoffMatrix {
    pub fn new(u: SymMatrix) -> Self {
        Self { u }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::new(rows).map(Self::new)
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.u.get(i, j)
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        eigh(&self.u)
    }

    /// `x' U x`.
    pub fn utility(&self, x: &Lottery) -> Result<f64> {
        utility(self, x)
    }
}

impl From<SymMatrix> for PayoffMatrix {
    fn from(u: SymMatrix) -> Self {
        Self::new(u)
    }
}

/// `x' U x`.
pub fn utility(u: &PayoffMatrix, x: &Lottery) -> Result<f64> {
    if x.dim() != u.dim() {
        return Err(PeuError::DimensionMismatch {
            context: "utility",
            expected: u.dim(),
            found: x.dim(),
        });
    }
    Ok(u.u.quadratic_form_unchecked(x.amplitudes()))
}

/// `U = P' diag(payoffs) P` where the rows of `P` are the basis vectors.
pub fn from_spectrum(payoffs: &[f64], basis: &Basis) -> Result<PayoffMatrix> {
    let decomposition = SpectralDecomposition::new(payoffs.to_vec(), basis.vectors().to_vec())?;
    Ok(PayoffMatrix::new(crate::linalg::reconstruct(
        &decomposition,
    )))
}

/// The premium (or discount) `U_ij` on the equiprobable mix of outcomes `i` and `j`.
///
/// Cross-checked in debug builds against
/// `u(e_ij) − ½(u(e_i) + u(e_j))`.
pub fn premium(u: &PayoffMatrix, i: usize, j: usize) -> Result<f64> {
    let n = u.dim();
    for k in [i, j] {
        if k >= n {
            return Err(PeuError::IndexOutOfRange { index: k, dim: n });
        }
    }
    if i == j {
        return Err(PeuError::SameIndex(i));
    }
    let value = u.entry(i, j);
    debug_assert!({
        let direct = premium_by_evaluation(u, i, j)?;
        (direct - value).abs() <= 1e-10 * 1f64.max(u.matrix().max_abs())
    });
    Ok(value)
}

/// `u(e_ij) − ½(u(e_i) + u(e_j))` evaluated through lottery utilities.
pub fn premium_by_evaluation(u: &PayoffMatrix, i: usize, j: usize) -> Result<f64> {
    let n = u.dim();
    let mixed = utility(u, &Lottery::equiprobable_pair(n, i, j)?)?;
    let ui = utility(u, &Lottery::degenerate(n, i)?)?;
    let uj = utility(u, &Lottery::degenerate(n, j)?)?;
    Ok(mixed - 0.5 * (ui + uj))
}

/// Risk attitude read off the payoff matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attitude {
    /// Diagonal `U`: classical expected utility.
    VnmDiagonal,
    /// All eigenvalues positive; `x'Ux` is convex, so risk is preferred to uncertainty.
    RiskPreferring,
    /// All eigenvalues negative; concave, uncertainty preferred to risk.
    UncertaintyPreferring,
    Indefinite,
}

impl Attitude {
    pub fn as_str(&self) -> &'static str {
        match self {
            Attitude::VnmDiagonal => "vnm-diagonal",
            Attitude::RiskPreferring => "risk-preferring",
            Attitude::UncertaintyPreferring => "uncertainty-preferring",
            Attitude::Indefinite => "indefinite",
        }
    }
}

impl fmt::Display for Attitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attitude {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vnm-diagonal" => Ok(Attitude::VnmDiagonal),
            "risk-preferring" => Ok(Attitude::RiskPreferring),
            "uncertainty-preferring" => Ok(Attitude::UncertaintyPreferring),
            "indefinite" => Ok(Attitude::Indefinite),
            other => Err(format!("unknown attitude {other:?}")),
        }
    }
}

pub fn classify(u: &PayoffMatrix, tol: f64) -> Result<Attitude> {
    if is_vnm_equivalent(u, tol) {
        return Ok(Attitude::VnmDiagonal);
    }
    let d = u.decompose()?;
    Ok(classify_eigenvalues(d.eigenvalues(), tol))
}

pub(crate) fn classify_eigenvalues(eigenvalues: &[f64], tol: f64) -> Attitude {
    if eigenvalues.iter().all(|&l| l > tol) {
        Attitude::RiskPreferring
    } else if eigenvalues.iter().all(|&l| l < -tol) {
        Attitude::UncertaintyPreferring
    } else {
        Attitude::Indefinite
    }
}

/// `true` iff every off-diagonal entry is at most `tol` in magnitude.
pub fn is_vnm_equivalent(u: &PayoffMatrix, tol: f64) -> bool {
    u.u.is_diagonal(tol)
}

/// Outcome of comparing two utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preference {
    Prefers,
    Indifferent,
    Disprefers,
}

/// Absolute tolerance under which two utilities count as equal.
pub const INDIFFERENCE_TOL: f64 = 1e-12;

/// Compares `lhs` against `rhs`, treating differences within `tol` as indifference.
pub fn compare(lhs: f64, rhs: f64, tol: f64) -> Preference {
    if lhs - rhs > tol {
        Preference::Prefers
    } else if rhs - lhs > tol {
        Preference::Disprefers
    } else {
        Preference::Indifferent
    }
}

impl Preference {
    /// The relation symbol placed between the two options.
    pub fn symbol(&self) -> &'static str {
        match self {
            Preference::Prefers => "≻",
            Preference::Indifferent => "~",
            Preference::Disprefers => "≺",
        }
    }
}

/// The four Allais lotteries over the prizes (4000, 3000, 0) and a payoff
/// matrix with a mild aversion to mixing in the zero prize.
#[derive(Debug, Clone)]
pub struct AllaisScenario {
    pub payoff: PayoffMatrix,
    /// 4000 with probability 0.2.
    pub a: Lottery,
    /// 3000 with probability 0.25.
    pub b: Lottery,
    /// 4000 with probability 0.8.
    pub c: Lottery,
    /// 3000 for sure.
    pub d: Lottery,
}

impl AllaisScenario {
    pub fn new() -> Self {
        let payoff = PayoffMatrix::from_rows(vec![
            vec![13.0, 0.0, -1.0],
            vec![0.0, 10.0, -1.0],
            vec![-1.0, -1.0, 0.0],
        ])
        .expect("Allais matrix is symmetric");
        let lottery =
            |p: [f64; 3]| crate::lottery::simplex_to_sphere(&p).expect("valid simplex point");
        Self {
            payoff,
            a: lottery([0.2, 0.0, 0.8]),
            b: lottery([0.0, 0.25, 0.75]),
            c: lottery([0.8, 0.0, 0.2]),
            d: lottery([0.0, 1.0, 0.0]),
        }
    }

    /// `[u(a), u(b), u(c), u(d)]`.
    pub fn utilities(&self) -> [f64; 4] {
        let u = |x: &Lottery| utility(&self.payoff, x).expect("dimensions agree");
        [u(&self.a), u(&self.b), u(&self.c), u(&self.d)]
    }
}

impl Default for AllaisScenario {
    fn default() -> Self {
        Self::new()
    }
}
