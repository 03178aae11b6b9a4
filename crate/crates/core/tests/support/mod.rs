//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use peu_core::SymMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries uniform in `[-bound, bound]`.
pub fn random_symmetric(rng: &mut impl Rng, n: usize, bound: f64) -> SymMatrix {
    SymMatrix::from_upper_fn(n, |_, _| rng.gen_range(-bound..=bound))
}

/// Uniformly random point of the nonnegative orthant of the unit sphere.
pub fn random_nonneg_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let g: f64 = gaussian(rng);
                g.abs()
            })
            .collect();
        let s = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if s > 1e-6 {
            return v.into_iter().map(|c| c / s).collect();
        }
    }
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|_| -rng.gen_range(f64::EPSILON..1.0).ln())
        .collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|c| c / s).collect()
}

pub fn quad(m: &SymMatrix, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[i] * m.get(i, j) * x[j];
        }
    }
    s
}

/// Real roots of `λ³ + aλ² + bλ + c` with three real roots, descending.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    assert!(p < 0.0, "cubic must have three real roots");
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, root) in roots.iter_mut().enumerate() {
        *root = r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - a / 3.0;
    }
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    roots
}

/// Point of the nonnegative unit sphere from hyperspherical angles in `[0, π/2]`.
pub fn from_angles(theta: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(theta.len() + 1);
    let mut s = 1.0;
    for t in theta {
        x.push(s * t.cos());
        s *= t.sin();
    }
    x.push(s);
    x
}

fn grid_points(d: usize, per_axis: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = per_axis.pow(d as u32);
    (0..total).map(move |mut k| {
        let mut idx = vec![0; d];
        for slot in idx.iter_mut() {
            *slot = k % per_axis;
            k /= per_axis;
        }
        idx
    })
}

/// Maximum of `x' M x` over the nonnegative unit sphere by grid search in
/// hyperspherical angles.
///
/// A uniform coarse grid picks the most promising cells, each of which is
/// then searched by nested local grids whose spacing shrinks by a factor
/// of four per level until it drops below `resolution`.
pub fn grid_max(m: &SymMatrix, resolution: f64) -> f64 {
    let n = m.dim();
    if n == 1 {
        return m.get(0, 0);
    }
    let d = n - 1;
    let coarse = 32;
    let h0 = FRAC_PI_2 / coarse as f64;
    let mut seeds: Vec<(f64, Vec<f64>)> = grid_points(d, coarse + 1)
        .map(|idx| {
            let theta: Vec<f64> = idx.iter().map(|&k| k as f64 * h0).collect();
            (quad(m, &from_angles(&theta)), theta)
        })
        .collect();
    seeds.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    seeds.truncate(8);

    let mut best = f64::NEG_INFINITY;
    for (mut value, mut theta) in seeds {
        let mut h = h0;
        while h > resolution {
            h /= 4.0;
            let centre = theta.clone();
            for idx in grid_points(d, 9) {
                let t: Vec<f64> = centre
                    .iter()
                    .zip(&idx)
                    .map(|(c, &k)| (c + (k as f64 - 4.0) * h).clamp(0.0, FRAC_PI_2))
                    .collect();
                let v = quad(m, &from_angles(&t));
                if v > value {
                    value = v;
                    theta = t;
                }
            }
        }
        best = best.max(value);
    }
    best
}

/// Payoff matrices for player `i` written out as nested loops over every
/// full action profile, independent of the library's opponent indexing.
pub fn brute_expected_matrix(
    actions: &[usize],
    payoff: impl Fn(usize, &[usize]) -> SymMatrix,
    i: usize,
    probs: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let n = actions[i];
    let mut out = vec![vec![0.0; n]; n];
    let total: usize = actions.iter().product();
    for mut k in 0..total {
        let mut full = vec![0; actions.len()];
        for (slot, &a) in full.iter_mut().zip(actions).rev() {
            *slot = k % a;
            k /= a;
        }
        // Each opponent profile appears once per own action; count it once.
        if full[i] != 0 {
            continue;
        }
        let opp: Vec<usize> = full
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &a)| a)
            .collect();
        let w: f64 = full
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &a)| probs[j][a])
            .product();
        let u = payoff(i, &opp);
        for r in 0..n {
            for c in 0..n {
                out[r][c] += w * u.get(r, c);
            }
        }
    }
    out
}

/// Largest gain from a pure deviation in a bimatrix game at mixed play
/// `(p, q)`.
pub fn bimatrix_gain(a: &[Vec<f64>], b: &[Vec<f64>], p: &[f64], q: &[f64]) -> f64 {
    let rows = a.len();
    let cols = a[0].len();
    let row_payoff: Vec<f64> = (0..rows)
        .map(|r| (0..cols).map(|c| a[r][c] * q[c]).sum())
        .collect();
    let col_payoff: Vec<f64> = (0..cols)
        .map(|c| (0..rows).map(|r| b[r][c] * p[r]).sum())
        .collect();
    let current_row: f64 = (0..rows).map(|r| p[r] * row_payoff[r]).sum();
    let current_col: f64 = (0..cols).map(|c| q[c] * col_payoff[c]).sum();
    let best_row = row_payoff.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best_col = col_payoff.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (best_row - current_row).max(best_col - current_col)
}

/// All Nash equilibria of a nondegenerate 2×2 bimatrix game, as
/// `(P(row 0), P(col 0))`.
pub fn bimatrix_2x2_equilibria(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            if a[r][c] >= a[1 - r][c] && b[r][c] >= b[r][1 - c] {
                out.push((
                    if r == 0 { 1.0 } else { 0.0 },
                    if c == 0 { 1.0 } else { 0.0 },
                ));
            }
        }
    }
    // Interior: each player makes the other indifferent.
    let da = a[0][0] - a[1][0] - a[0][1] + a[1][1];
    let db = b[0][0] - b[0][1] - b[1][0] + b[1][1];
    if da != 0.0 && db != 0.0 {
        let q = (a[1][1] - a[0][1]) / da;
        let p = (b[1][1] - b[1][0]) / db;
        if (0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q) {
            out.push((p, q));
        }
    }
    out
}
