//! Finite games between players with quadratic-form preferences.
//!
//! Player `i` owns one symmetric payoff matrix per pure action profile of
//! its opponents. Opponents' strategies enter through the action
//! probabilities they induce, which weight those matrices linearly; the
//! player's own lottery enters through the quadratic form. A best response
//! therefore maximizes `x' M x` over the nonnegative part of the unit sphere.
//!
//! A strategy is either a single lottery (objective randomization only) or a
//! weighted mixture of lotteries (subjective uncertainty about which lottery
//! is played). The payoff of a mixture is the weighted average of its
//! components' quadratic forms. Mixtures are needed because the set of best
//! responses can consist of isolated lotteries on different faces, and some
//! games have no equilibrium in single lotteries.

use std::collections::BTreeMap;

use crate::error::{PeuError, Result};
use crate::linalg::{dot, eigh, norm, solve_dense, SymMatrix};
use crate::lottery::{simplex_to_sphere, Lottery, PROB_SUM_TOL};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_DAMPING: f64 = 0.5;

/// Candidates with an entry below this are not on the nonnegative orthant.
const SUPPORT_NEG_TOL: f64 = 1e-12;
/// Slack in the first-order condition `(Mx)_k <= 0` off the support.
const FOC_TOL: f64 = 1e-9;
/// Candidate values this close are treated as tied.
const TIE_TOL: f64 = 1e-12;
/// Negative amplitudes or weights beyond this reject a polished profile.
const COMPONENT_TOL: f64 = 1e-9;
/// Components lighter than this are dropped from a polished mixture.
const MIN_WEIGHT: f64 = 1e-12;
/// Iterations between attempts to polish the current play into an exact equilibrium.
const POLISH_EVERY: usize = 25;
/// Step sizes never shrink below this fraction of the initial damping.
const MIN_STEP_FRACTION: f64 = 1.0 / 64.0;
/// A coordinate counts as played in the recent window above this probability.
const WINDOW_SUPPORT_TOL: f64 = 1e-6;
const NEWTON_MAX_ITER: usize = 60;
const NEWTON_FD_STEP: f64 = 1e-7;

/// Payoff matrices for every player and every opponent pure profile.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    actions: Vec<usize>,
    /// `payoffs[i][k]`: player `i`'s matrix when opponents play the profile
    /// with linear index `k` (see [`FiniteGame::opponent_index`]).
    payoffs: Vec<Vec<SymMatrix>>,
}

impl FiniteGame {
    /// `payoffs[i]` lists player `i`'s matrices in opponent-profile order:
    /// opponents by increasing player index, the last one varying fastest.
    pub fn new(actions: Vec<usize>, payoffs: Vec<Vec<SymMatrix>>) -> Result<Self> {
        if actions.len() < 2 {
            return Err(PeuError::InvalidGame(format!(
                "need at least two players, got {}",
                actions.len()
            )));
        }
        if let Some(i) = actions.iter().position(|&a| a == 0) {
            return Err(PeuError::InvalidGame(format!("player {i} has no actions")));
        }
        if payoffs.len() != actions.len() {
            return Err(PeuError::InvalidGame(format!(
                "payoffs given for {} players, game has {}",
                payoffs.len(),
                actions.len()
            )));
        }
        let game = Self { actions, payoffs };
        for i in 0..game.players() {
            let expected = game.opponent_profile_count(i);
            if game.payoffs[i].len() != expected {
                return Err(PeuError::InvalidGame(format!(
                    "player {i} has {} payoff matrices, expected one per opponent profile ({expected})",
                    game.payoffs[i].len()
                )));
            }
            for (k, m) in game.payoffs[i].iter().enumerate() {
                if m.dim() != game.actions[i] {
                    return Err(PeuError::InvalidGame(format!(
                        "player {i}, opponent profile {:?}: matrix is {}x{}, expected {}x{}",
                        game.opponent_profile(i, k),
                        m.dim(),
                        m.dim(),
                        game.actions[i],
                        game.actions[i]
                    )));
                }
            }
        }
        Ok(game)
    }

    /// Builds a game from `f(player, opponent_profile)`.
    pub fn from_fn(
        actions: Vec<usize>,
        mut f: impl FnMut(usize, &[usize]) -> SymMatrix,
    ) -> Result<Self> {
        let shell = Self {
            actions: actions.clone(),
            payoffs: Vec::new(),
        };
        if actions.len() < 2 || actions.contains(&0) {
            return Self::new(actions, Vec::new());
        }
        let payoffs = (0..actions.len())
            .map(|i| {
                (0..shell.opponent_profile_count(i))
                    .map(|k| f(i, &shell.opponent_profile(i, k)))
                    .collect()
            })
            .collect();
        Self::new(actions, payoffs)
    }

    /// Two-player game where player 0 picks rows and player 1 columns,
    /// each with diagonal (classical expected-utility) payoffs taken from
    /// the bimatrix `(a, b)`.
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        if b.len() != rows || a.iter().chain(b).any(|r| r.len() != cols) {
            return Err(PeuError::InvalidGame("bimatrix shapes differ".into()));
        }
        Self::from_fn(vec![rows, cols], |player, opp| {
            if player == 0 {
                SymMatrix::diagonal(&(0..rows).map(|r| a[r][opp[0]]).collect::<Vec<_>>())
            } else {
                SymMatrix::diagonal(&(0..cols).map(|c| b[opp[0]][c]).collect::<Vec<_>>())
            }
        })
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn opponent_profile_count(&self, i: usize) -> usize {
        self.actions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &a)| a)
            .product()
    }

    /// Decodes linear index `k` into the opponents' actions (increasing player order).
    pub fn opponent_profile(&self, i: usize, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.players() - 1];
        let opponents: Vec<usize> = (0..self.players()).filter(|&j| j != i).collect();
        for (slot, &j) in opponents.iter().enumerate().rev() {
            out[slot] = k % self.actions[j];
            k /= self.actions[j];
        }
        out
    }

    /// Inverse of [`FiniteGame::opponent_profile`].
    pub fn opponent_index(&self, i: usize, profile: &[usize]) -> Result<usize> {
        if profile.len() != self.players() - 1 {
            return Err(PeuError::DimensionMismatch {
                context: "opponent profile length",
                expected: self.players() - 1,
                found: profile.len(),
            });
        }
        let mut k = 0;
        for (slot, j) in (0..self.players()).filter(|&j| j != i).enumerate() {
            let a = profile[slot];
            if a >= self.actions[j] {
                return Err(PeuError::IndexOutOfRange {
                    index: a,
                    dim: self.actions[j],
                });
            }
            k = k * self.actions[j] + a;
        }
        Ok(k)
    }

    pub fn payoff(&self, i: usize, opponent_profile: &[usize]) -> Result<&SymMatrix> {
        let k = self.opponent_index(i, opponent_profile)?;
        Ok(&self.payoffs[i][k])
    }

    /// All of player `i`'s matrices in linear opponent-profile order.
    pub fn payoffs(&self, i: usize) -> &[SymMatrix] {
        &self.payoffs[i]
    }

    /// Largest absolute payoff entry, at least 1.
    fn payoff_scale(&self) -> f64 {
        self.payoffs
            .iter()
            .flatten()
            .fold(1.0, |m: f64, u| m.max(u.max_abs()))
    }

    /// `M_i` from raw per-player action probabilities; row `i` of `probs` is ignored.
    pub(crate) fn expected_matrix_from_probs(&self, i: usize, probs: &[Vec<f64>]) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.actions[i]);
        for (k, u) in self.payoffs[i].iter().enumerate() {
            let weight: f64 = self
                .opponent_profile(i, k)
                .iter()
                .zip((0..self.players()).filter(|&j| j != i))
                .map(|(&a, j)| probs[j][a])
                .product();
            if weight != 0.0 {
                m.add_scaled(weight, u).expect("validated dimensions");
            }
        }
        m
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.len() != self.players() {
            return Err(PeuError::DimensionMismatch {
                context: "strategy profile players",
                expected: self.players(),
                found: profile.len(),
            });
        }
        for (x, &n) in profile.strategies().iter().zip(&self.actions) {
            if x.dim() != n {
                return Err(PeuError::DimensionMismatch {
                    context: "strategy dimension",
                    expected: n,
                    found: x.dim(),
                });
            }
        }
        Ok(())
    }
}

/// A lottery, or a weighted mixture of lotteries over the same actions.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    components: Vec<(f64, Lottery)>,
}

impl Strategy {
    pub fn single(x: Lottery) -> Self {
        Self {
            components: vec![(1.0, x)],
        }
    }

    /// Validates weights (nonnegative, summing to 1) and dimensions.
    /// Zero-weight components are dropped.
    pub fn mixture(components: Vec<(f64, Lottery)>) -> Result<Self> {
        let weights: Vec<f64> = components.iter().map(|(w, _)| *w).collect();
        crate::lottery::check_probability_vector(&weights, "strategy weights")?;
        let n = components[0].1.dim();
        if let Some((_, bad)) = components.iter().find(|(_, x)| x.dim() != n) {
            return Err(PeuError::DimensionMismatch {
                context: "strategy component",
                expected: n,
                found: bad.dim(),
            });
        }
        let components: Vec<(f64, Lottery)> =
            components.into_iter().filter(|(w, _)| *w > 0.0).collect();
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, Lottery)] {
        &self.components
    }

    /// The lottery, when the strategy involves no subjective mixing.
    pub fn as_single(&self) -> Option<&Lottery> {
        match self.components.as_slice() {
            [(_, x)] => Some(x),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }

    /// Probability of each action as seen by the opponents: `Σ_t w_t x_t²`.
    pub fn action_probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        for (w, x) in &self.components {
            for (pk, a) in p.iter_mut().zip(x.amplitudes()) {
                *pk += w * a * a;
            }
        }
        p
    }

    /// `Σ_t w_t x_t' M x_t`.
    pub fn payoff(&self, m: &SymMatrix) -> Result<f64> {
        self.components
            .iter()
            .map(|(w, x)| Ok(w * m.quadratic_form(x.amplitudes())?))
            .sum()
    }
}

impl From<Lottery> for Strategy {
    fn from(x: Lottery) -> Self {
        Self::single(x)
    }
}

/// One strategy per player.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    strategies: Vec<Strategy>,
}

impl StrategyProfile {
    /// Each player plays one lottery.
    pub fn new(lotteries: Vec<Lottery>) -> Self {
        Self {
            strategies: lotteries.into_iter().map(Strategy::single).collect(),
        }
    }

    pub fn from_strategies(strategies: Vec<Strategy>) -> Self {
        Self { strategies }
    }

    /// Every player mixes uniformly over actions within a single lottery.
    pub fn uniform(game: &FiniteGame) -> Self {
        Self::new(
            game.actions()
                .iter()
                .map(|&n| Lottery::uniform(n).expect("n > 0"))
                .collect(),
        )
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn strategy(&self, i: usize) -> &Strategy {
        &self.strategies[i]
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    /// Induced action probabilities of every player.
    pub fn probabilities(&self) -> Vec<Vec<f64>> {
        self.strategies
            .iter()
            .map(Strategy::action_probabilities)
            .collect()
    }
}

/// `M_i = Σ_{a_{-i}} Π_{j≠i} P_j(a_j) · U_i^{a_{-i}}`, where `P_j` are the
/// action probabilities induced by player `j`'s strategy.
///
/// Player `i`'s own entry in `profile` is ignored.
pub fn expected_payoff_matrix(
    g: &FiniteGame,
    i: usize,
    profile: &StrategyProfile,
) -> Result<SymMatrix> {
    if i >= g.players() {
        return Err(PeuError::IndexOutOfRange {
            index: i,
            dim: g.players(),
        });
    }
    g.check_profile(profile)?;
    Ok(g.expected_matrix_from_probs(i, &profile.probabilities()))
}

/// A maximizer of `x' M x` over nonnegative unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub lottery: Lottery,
    pub value: f64,
    /// Coordinates where the maximizer is nonzero.
    pub support: Vec<usize>,
}

/// Maximizes `x' M x` subject to `‖x‖ = 1, x >= 0` by support enumeration.
///
/// On a support `K` the maximizer restricted to that face is the leading
/// eigenvector of `M_KK`. Candidates must be nonnegative and satisfy the
/// first-order condition `(Mx)_k <= 0` off the support. Among feasible
/// candidates the largest value wins, ties going to the lexicographically
/// smallest support.
///
/// The enumeration visits `2^n − 1` supports, so this is meant for the
/// action counts of desk-sized games.
pub fn best_response(m: &SymMatrix) -> Result<BestResponse> {
    let n = m.dim();
    assert!(
        n < usize::BITS as usize,
        "too many actions for support enumeration"
    );
    let scale = 1f64.max(m.max_abs());

    let mut best: Option<BestResponse> = None;
    // Nonnegative candidates failing the first-order test, kept in case
    // rounding rejects every candidate.
    let mut fallback: Option<BestResponse> = None;

    for mask in 1usize..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let sub = m.principal_submatrix(&support);
        let d = eigh(&sub)?;
        let mut v = d.eigenvectors()[0].clone();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
        if v.iter().any(|&c| c < -SUPPORT_NEG_TOL) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (&k, c) in support.iter().zip(&v) {
            x[k] = c.max(0.0);
        }
        let lottery = Lottery::new(x)?;
        let value = m.quadratic_form_unchecked(lottery.amplitudes());
        let mx = m.mul_vec(lottery.amplitudes())?;
        let first_order_ok = (0..n)
            .filter(|k| mask & (1 << k) == 0)
            .all(|k| mx[k] <= FOC_TOL * scale);

        let candidate = BestResponse {
            support: (0..n).filter(|&k| lottery.amplitudes()[k] > 0.0).collect(),
            lottery,
            value,
        };
        let slot = if first_order_ok {
            &mut best
        } else {
            &mut fallback
        };
        if improves(&candidate, slot.as_ref(), scale) {
            *slot = Some(candidate);
        }
    }
    Ok(best
        .or(fallback)
        .expect("singleton supports always yield nonnegative candidates"))
}

fn improves(candidate: &BestResponse, incumbent: Option<&BestResponse>, scale: f64) -> bool {
    match incumbent {
        None => true,
        Some(b) => {
            let tie = TIE_TOL * scale;
            candidate.value > b.value + tie
                || ((candidate.value - b.value).abs() <= tie && candidate.support < b.support)
        }
    }
}

/// Player `i`'s payoff: its strategy evaluated against [`expected_payoff_matrix`].
pub fn peu_payoff(g: &FiniteGame, profile: &StrategyProfile, i: usize) -> Result<f64> {
    let m = expected_payoff_matrix(g, i, profile)?;
    profile.strategy(i).payoff(&m)
}

/// Per-player improvement available by deviating to a best response.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub is_equilibrium: bool,
    /// Best-response value minus current payoff, clamped at zero.
    pub gains: Vec<f64>,
}

impl Verification {
    pub fn residual(&self) -> f64 {
        self.gains.iter().fold(0.0, |m: f64, g| m.max(*g))
    }
}

pub fn verify(g: &FiniteGame, profile: &StrategyProfile, tol: f64) -> Result<Verification> {
    g.check_profile(profile)?;
    let probs = profile.probabilities();
    let gains = (0..g.players())
        .map(|i| {
            let m = g.expected_matrix_from_probs(i, &probs);
            let br = best_response(&m)?;
            let current = profile.strategy(i).payoff(&m)?;
            Ok((br.value - current).max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Verification {
        is_equilibrium: gains.iter().all(|&x| x <= tol),
        gains,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest accepted best-response gain.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step toward the best response, in `(0, 1]`.
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            damping: DEFAULT_DAMPING,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(PeuError::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(PeuError::InvalidParameter(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    /// Number of profile updates performed.
    pub iterations: usize,
    /// Largest best-response gain at `profile`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] PeuError),

    #[error("no equilibrium within {iterations} iterations (residual {residual:e})")]
    NotConverged {
        profile: StrategyProfile,
        residual: f64,
        iterations: usize,
    },
}

/// Damped best-response iteration from the uniform profile.
pub fn solve(g: &FiniteGame, opts: SolveOptions) -> Result<EquilibriumResult, SolveError> {
    solve_from(g, StrategyProfile::uniform(g), opts)
}

/// Damped best-response iteration from `initial`.
///
/// Every player simultaneously moves to the normalized point
/// `(1 − s_i)·x_i + s_i·br_i`. Each step size `s_i` starts at
/// `opts.damping` and is halved, down to a floor, whenever the player's
/// direction of travel reverses.
///
/// When every player's best response stays on the same face for two
/// consecutive iterations, the profile of best responses itself is tried.
///
/// Play that circles an equilibrium only approaches it at a rate tied to
/// the step size, so every few iterations the solver also tries to
/// polish the recent play into an exact equilibrium: Newton's method on the
/// first-order conditions over the supports and best-response faces
/// visited lately, first with one lottery per player and then with a
/// subjective mixture over the distinct best responses seen. A polished
/// profile is only accepted if [`verify`] passes at `opts.tol`.
///
/// Mixed entries of `initial` start from the single lottery with the same
/// action probabilities.
pub fn solve_from(
    g: &FiniteGame,
    initial: StrategyProfile,
    opts: SolveOptions,
) -> Result<EquilibriumResult, SolveError> {
    opts.validate()?;
    g.check_profile(&initial)?;
    let players = g.players();
    let mut xs: Vec<Vec<f64>> = initial
        .strategies()
        .iter()
        .map(|s| match s.as_single() {
            Some(x) => Ok(x.amplitudes().to_vec()),
            None => Ok(simplex_to_sphere(&s.action_probabilities())?.into_amplitudes()),
        })
        .collect::<Result<_>>()?;
    let min_step = opts.damping * MIN_STEP_FRACTION;
    let mut steps = vec![opts.damping; players];
    let mut last_dir: Vec<Option<Vec<f64>>> = vec![None; players];
    let mut window = Window::new(&xs);
    let mut last_supports: Option<Vec<Vec<usize>>> = None;
    let mut snapped_at: Option<Vec<Vec<usize>>> = None;
    let mut iterations = 0;

    loop {
        let probs: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| x.iter().map(|a| a * a).collect())
            .collect();
        let mut residual: f64 = 0.0;
        let mut responses = Vec::with_capacity(players);
        let mut matrices = Vec::with_capacity(players);
        for i in 0..players {
            let m = g.expected_matrix_from_probs(i, &probs);
            let br = best_response(&m)?;
            residual = residual.max(br.value - m.quadratic_form_unchecked(&xs[i]));
            window.record_response(i, &br, &probs[i]);
            responses.push(br);
            matrices.push(m);
        }
        let residual = residual.max(0.0);
        if residual <= opts.tol {
            return Ok(EquilibriumResult {
                profile: single_profile(&xs)?,
                iterations,
                residual,
            });
        }
        // Play heading for the same faces twice in a row: try jumping there.
        let supports: Vec<Vec<usize>> = responses.iter().map(|b| b.support.clone()).collect();
        if last_supports.as_ref() == Some(&supports) && snapped_at.as_ref() != Some(&supports) {
            let target =
                StrategyProfile::new(responses.iter().map(|b| b.lottery.clone()).collect());
            let v = verify(g, &target, opts.tol)?;
            if v.is_equilibrium {
                return Ok(EquilibriumResult {
                    profile: target,
                    iterations,
                    residual: v.residual(),
                });
            }
            snapped_at = Some(supports.clone());
        }
        last_supports = Some(supports);
        if iterations > 0 && iterations % POLISH_EVERY == 0 {
            if let Some((profile, residual)) = polish(g, &xs, &matrices, &window, opts.tol)? {
                return Ok(EquilibriumResult {
                    profile,
                    iterations,
                    residual,
                });
            }
            window = Window::new(&xs);
        }
        if iterations >= opts.max_iter {
            return Err(SolveError::NotConverged {
                profile: single_profile(&xs)?,
                residual,
                iterations,
            });
        }

        for (i, br) in responses.into_iter().enumerate() {
            let x = &xs[i];
            let dir: Vec<f64> = br
                .lottery
                .amplitudes()
                .iter()
                .zip(x)
                .map(|(b, a)| b - a)
                .collect();
            if let Some(prev) = &last_dir[i] {
                if dot(prev, &dir) < 0.0 {
                    steps[i] = (steps[i] * 0.5).max(min_step);
                }
            }
            let s = steps[i];
            let moved: Vec<f64> = x
                .iter()
                .zip(&dir)
                .map(|(a, d)| (a + s * d).max(0.0))
                .collect();
            let nrm = norm(&moved);
            xs[i] = moved.into_iter().map(|c| c / nrm).collect();
            last_dir[i] = Some(dir);
        }
        window.record_state(&xs);
        iterations += 1;
    }
}

fn single_profile(xs: &[Vec<f64>]) -> Result<StrategyProfile> {
    Ok(StrategyProfile::new(
        xs.iter()
            .map(|x| Lottery::new(x.clone()))
            .collect::<Result<_>>()?,
    ))
}

/// What each player did since the last polish attempt.
struct Window {
    /// Largest probability each action reached.
    max_probs: Vec<Vec<f64>>,
    /// Latest best response seen on each support.
    responses: Vec<BTreeMap<Vec<usize>, Vec<f64>>>,
    prob_sums: Vec<Vec<f64>>,
    samples: usize,
}

impl Window {
    fn new(xs: &[Vec<f64>]) -> Self {
        let probs: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| x.iter().map(|a| a * a).collect())
            .collect();
        Self {
            prob_sums: probs.iter().map(|p| vec![0.0; p.len()]).collect(),
            max_probs: probs,
            responses: vec![BTreeMap::new(); xs.len()],
            samples: 0,
        }
    }

    fn record_response(&mut self, i: usize, br: &BestResponse, probs: &[f64]) {
        self.responses[i].insert(br.support.clone(), br.lottery.amplitudes().to_vec());
        for (s, p) in self.prob_sums[i].iter_mut().zip(probs) {
            *s += p;
        }
        if i == 0 {
            self.samples += 1;
        }
    }

    fn record_state(&mut self, xs: &[Vec<f64>]) {
        for (m, x) in self.max_probs.iter_mut().zip(xs) {
            for (mk, a) in m.iter_mut().zip(x) {
                *mk = mk.max(a * a);
            }
        }
    }

    fn mean_probs(&self, i: usize) -> Vec<f64> {
        let n = self.samples.max(1) as f64;
        self.prob_sums[i].iter().map(|s| s / n).collect()
    }
}

/// One lottery of a strategy being polished.
#[derive(Debug, Clone)]
struct Component {
    support: Vec<usize>,
    /// Amplitudes on `support`.
    x: Vec<f64>,
    value: f64,
    weight: f64,
}

fn polish(
    g: &FiniteGame,
    xs: &[Vec<f64>],
    matrices: &[SymMatrix],
    window: &Window,
    tol: f64,
) -> Result<Option<(StrategyProfile, f64)>> {
    let players = g.players();

    // One lottery per player on the coordinates played lately.
    let singles: Option<Vec<Vec<Component>>> = (0..players)
        .map(|i| {
            let support: Vec<usize> = (0..g.actions[i])
                .filter(|&k| window.max_probs[i][k] > WINDOW_SUPPORT_TOL)
                .collect();
            let x: Vec<f64> = support.iter().map(|&k| xs[i][k]).collect();
            let nrm = norm(&x);
            if nrm == 0.0 {
                return None;
            }
            let x: Vec<f64> = x.into_iter().map(|c| c / nrm).collect();
            let value = matrices[i]
                .principal_submatrix(&support)
                .quadratic_form_unchecked(&x);
            Some(vec![Component {
                support,
                x,
                value,
                weight: 1.0,
            }])
        })
        .collect();

    // A mixture over the distinct best responses seen lately.
    let mixtures: Vec<Vec<Component>> = (0..players)
        .map(|i| {
            let responses = &window.responses[i];
            let squares: Vec<Vec<f64>> = responses
                .values()
                .map(|b| b.iter().map(|a| a * a).collect())
                .collect();
            let weights = fit_weights(&squares, &window.mean_probs(i));
            responses
                .iter()
                .zip(weights)
                .map(|((support, b), weight)| {
                    let x: Vec<f64> = support.iter().map(|&k| b[k]).collect();
                    Component {
                        value: matrices[i].quadratic_form_unchecked(b),
                        support: support.clone(),
                        x,
                        weight,
                    }
                })
                .collect()
        })
        .collect();

    for structure in singles.into_iter().chain(std::iter::once(mixtures)) {
        if let Some(profile) = newton(g, structure)? {
            let v = verify(g, &profile, tol)?;
            if v.is_equilibrium {
                return Ok(Some((profile, v.residual())));
            }
        }
    }
    Ok(None)
}

/// Least-squares weights `w >= 0.01`, `Σ w = 1`, with `Σ_c w_c squares_c ≈ target`.
fn fit_weights(squares: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let c = squares.len();
    if c == 1 {
        return vec![1.0];
    }
    // Rows: one per action plus the sum-to-one constraint.
    let rows: Vec<Vec<f64>> = (0..target.len())
        .map(|k| squares.iter().map(|s| s[k]).collect())
        .chain(std::iter::once(vec![1.0; c]))
        .collect();
    let rhs: Vec<f64> = target.iter().copied().chain(std::iter::once(1.0)).collect();
    let normal: Vec<Vec<f64>> = (0..c)
        .map(|a| {
            (0..c)
                .map(|b| {
                    rows.iter().map(|r| r[a] * r[b]).sum::<f64>() + if a == b { 1e-12 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let aty: Vec<f64> = (0..c)
        .map(|a| rows.iter().zip(&rhs).map(|(r, y)| r[a] * y).sum())
        .collect();
    let w = solve_dense(normal, aty).unwrap_or_else(|| vec![1.0 / c as f64; c]);
    let w: Vec<f64> = w.into_iter().map(|v| v.max(0.01)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Unknowns per player: for each component its amplitudes on the support
/// and its value, then all weights but the last.
fn pack(structure: &[Vec<Component>]) -> Vec<f64> {
    let mut z = Vec::new();
    for comps in structure {
        for c in comps {
            z.extend(&c.x);
            z.push(c.value);
        }
        z.extend(comps[..comps.len() - 1].iter().map(|c| c.weight));
    }
    z
}

fn unpack(structure: &mut [Vec<Component>], z: &[f64]) {
    let mut o = 0;
    for comps in structure.iter_mut() {
        for c in comps.iter_mut() {
            let k = c.support.len();
            c.x.copy_from_slice(&z[o..o + k]);
            c.value = z[o + k];
            o += k + 1;
        }
        let last = comps.len() - 1;
        let mut total = 0.0;
        for c in comps[..last].iter_mut() {
            c.weight = z[o];
            total += z[o];
            o += 1;
        }
        comps[last].weight = 1.0 - total;
    }
}

/// Per component: `M_KK x − λ x` and `(‖x‖² − 1)/2`; per extra component
/// `λ_c − λ_0`, so every component is equally good.
fn first_order_residual(g: &FiniteGame, structure: &[Vec<Component>]) -> Vec<f64> {
    let probs: Vec<Vec<f64>> = structure
        .iter()
        .enumerate()
        .map(|(i, comps)| {
            let mut p = vec![0.0; g.actions[i]];
            for c in comps {
                for (&k, a) in c.support.iter().zip(&c.x) {
                    p[k] += c.weight * a * a;
                }
            }
            p
        })
        .collect();
    let mut r = Vec::new();
    for (i, comps) in structure.iter().enumerate() {
        let m = g.expected_matrix_from_probs(i, &probs);
        for c in comps {
            for (a, &ka) in c.support.iter().enumerate() {
                let row: f64 = c
                    .support
                    .iter()
                    .zip(&c.x)
                    .map(|(&kb, xb)| m.get(ka, kb) * xb)
                    .sum();
                r.push(row - c.value * c.x[a]);
            }
            r.push(0.5 * (dot(&c.x, &c.x) - 1.0));
        }
        for c in &comps[1..] {
            r.push(c.value - comps[0].value);
        }
    }
    r
}

fn newton(g: &FiniteGame, mut structure: Vec<Vec<Component>>) -> Result<Option<StrategyProfile>> {
    let scale = g.payoff_scale();
    let mut z = pack(&structure);
    let eval = |structure: &mut Vec<Vec<Component>>, z: &[f64]| {
        unpack(structure, z);
        first_order_residual(g, structure)
    };

    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let f = eval(&mut structure, &z);
        let err = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !err.is_finite() {
            return Ok(None);
        }
        if err <= 1e-14 * scale {
            converged = true;
            break;
        }
        let n = z.len();
        let mut jac = vec![vec![0.0; n]; n];
        for col in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[col] += NEWTON_FD_STEP;
            zm[col] -= NEWTON_FD_STEP;
            let fp = eval(&mut structure, &zp);
            let fm = eval(&mut structure, &zm);
            for row in 0..n {
                jac[row][col] = (fp[row] - fm[row]) / (2.0 * NEWTON_FD_STEP);
            }
        }
        let Some(dz) = solve_dense(jac, f.iter().map(|v| -v).collect()) else {
            return Ok(None);
        };
        for (zi, d) in z.iter_mut().zip(dz) {
            *zi += d;
        }
    }
    if !converged {
        let f = eval(&mut structure, &z);
        if f.iter().any(|v| !(v.abs() <= 1e-10 * scale)) {
            return Ok(None);
        }
    }
    unpack(&mut structure, &z);

    let mut strategies = Vec::with_capacity(structure.len());
    for (i, comps) in structure.iter().enumerate() {
        let mut parts = Vec::with_capacity(comps.len());
        for c in comps {
            if c.weight < -COMPONENT_TOL || c.x.iter().any(|&a| a < -COMPONENT_TOL) {
                return Ok(None);
            }
            let mut full = vec![0.0; g.actions[i]];
            for (&k, a) in c.support.iter().zip(&c.x) {
                full[k] = a.max(0.0);
            }
            let nrm = norm(&full);
            if nrm == 0.0 {
                return Ok(None);
            }
            full.iter_mut().for_each(|a| *a /= nrm);
            parts.push((c.weight.max(0.0), Lottery::new(full)?));
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if !(total > PROB_SUM_TOL) {
            return Ok(None);
        }
        let parts: Vec<(f64, Lottery)> = parts
            .into_iter()
            .filter(|(w, _)| *w / total > MIN_WEIGHT)
            .collect();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let parts = parts.into_iter().map(|(w, x)| (w / total, x)).collect();
        strategies.push(Strategy::mixture(parts)?);
    }
    Ok(Some(StrategyProfile::from_strategies(strategies)))
}
