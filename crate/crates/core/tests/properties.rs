use peu_core::{
    act_profile, act_utility, eigh, mix_profiles, peu_payoff, reconstruct, risk_profile,
    sphere_to_simplex, utility, Act, Basis, Belief, Embedding, FiniteGame, Lottery, PayoffMatrix,
    RiskProfile, StrategyProfile, SymMatrix,
};
use proptest::collection::vec;
use proptest::prelude::*;

fn sym_matrix_of(n: usize, bound: f64) -> impl Strategy<Value = SymMatrix> {
    vec(-bound..=bound, n * n).prop_map(move |v| SymMatrix::from_upper_fn(n, |i, j| v[i * n + j]))
}

fn sym_matrix(max_n: usize, bound: f64) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n).prop_flat_map(move |n| sym_matrix_of(n, bound))
}

fn unit_vector(n: usize) -> impl Strategy<Value = Lottery> {
    vec(0.0f64..1.0, n)
        .prop_filter("nonzero", |v| v.iter().any(|&c| c > 1e-3))
        .prop_map(|v| {
            let s = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            Lottery::new(v.into_iter().map(|c| c / s).collect()).unwrap()
        })
}

fn matrix_and_lottery() -> impl Strategy<Value = (SymMatrix, Lottery)> {
    sym_matrix(8, 10.0).prop_flat_map(|m| {
        let n = m.dim();
        (Just(m), unit_vector(n))
    })
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|c| c / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigh_invariants(m in sym_matrix(8, 10.0)) {
        let d = eigh(&m).unwrap();
        prop_assert!(reconstruct(&d).max_abs_diff(&m) <= 1e-9);
        let sum: f64 = d.eigenvalues().iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-9);
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn born_normalization_in_eigenbases((m, x) in matrix_and_lottery()) {
        let d = eigh(&m).unwrap();
        let z = Basis::new(d.eigenvectors().to_vec()).unwrap();
        let p = risk_profile(&x, &z).unwrap();
        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-10);

        let natural = risk_profile(&x, &Basis::natural(m.dim())).unwrap();
        let simplex_point = sphere_to_simplex(&x);
        prop_assert_eq!(natural.probs(), simplex_point.as_slice());

        // Utility through the eigenbasis profile.
        let expansion: f64 = d.eigenvalues().iter().zip(p.probs()).map(|(l, q)| l * q).sum();
        let direct = utility(&PayoffMatrix::new(m), &x).unwrap();
        prop_assert!((direct - expansion).abs() <= 1e-9);
    }

    #[test]
    fn profile_mixtures_stay_valid(
        (p, q) in (1usize..6).prop_flat_map(|n| (simplex(n), simplex(n))),
        a in 0.0f64..=1.0,
    ) {
        let p = RiskProfile::new(p).unwrap();
        let q = RiskProfile::new(q).unwrap();
        let mixed = mix_profiles(a, &p, &q).unwrap();
        prop_assert!(RiskProfile::new(mixed.probs().to_vec()).is_ok());
    }

    #[test]
    fn premium_identity(m in sym_matrix(6, 10.0)) {
        let u = PayoffMatrix::new(m.clone());
        let n = m.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                let by_eval = peu_core::peu::premium_by_evaluation(&u, i, j).unwrap();
                prop_assert!((by_eval - m.get(i, j)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn act_utility_is_linear_in_beliefs(
        (m, acts, pi, pi2) in (1usize..5, 1usize..5).prop_flat_map(|(n, s)| (
            sym_matrix_of(n, 10.0),
            vec(unit_vector(n), s),
            simplex(s),
            simplex(s),
        )),
        a in 0.0f64..=1.0,
    ) {
        let u = PayoffMatrix::new(m);
        let f = Act::new(acts).unwrap();
        let pi = Belief::new(pi).unwrap();
        let pi2 = Belief::new(pi2).unwrap();
        let mixed = pi.mix(a, &pi2).unwrap();
        let lhs = act_utility(&mixed, &u, &f).unwrap();
        let rhs = a * act_utility(&pi, &u, &f).unwrap()
            + (1.0 - a) * act_utility(&pi2, &u, &f).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));

        let profile = act_profile(&f, &Embedding::identity(u.dim()), &Basis::natural(u.dim())).unwrap();
        for row in profile.profiles() {
            prop_assert!((row.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn payoff_is_affine_in_opponent_probabilities(
        entries in vec(-1.0f64..=1.0, 2 * 6 * 3),
        own in unit_vector(2),
        a in simplex(3),
        b in simplex(3),
        t in 0.0f64..=1.0,
    ) {
        // Player 0 has two actions, player 1 three.
        let game = FiniteGame::from_fn(vec![2, 3], |i, opp| {
            let n = [2, 3][i];
            let base = (i * 3 + opp[0]) * 6;
            SymMatrix::from_upper_fn(n, |r, c| entries[base + r * n + c])
        }).unwrap();
        let at = |p: &[f64]| {
            let profile = StrategyProfile::new(vec![
                own.clone(),
                peu_core::simplex_to_sphere(p).unwrap(),
            ]);
            peu_payoff(&game, &profile, 0).unwrap()
        };
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let interpolated = t * at(&a) + (1.0 - t) * at(&b);
        prop_assert!((at(&mid) - interpolated).abs() <= 1e-12);
    }
}
