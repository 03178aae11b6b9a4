use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use peu_cli::doc::{self, ActDoc, BeliefDoc, GameDoc, LotteryDoc, MatrixDoc, ProfileDoc};
use peu_core::{
    ellsberg_scenario, verify, AllaisScenario, FiniteGame, Lottery, Strategy, StrategyProfile,
    SymMatrix,
};
use tempfile::TempDir;

fn peu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn path_str(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn allais_table() {
    let o = peu(&["allais"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "u(a) = 1.8\nu(b) = 1.63397459622\nu(c) = 9.6\nu(d) = 10\nA ≻ B, D ≻ C\n"
    );
}

#[test]
fn ellsberg_patterns() {
    let o = peu(&["ellsberg", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("R ≻ G, R̄ ≻ Ḡ\n"), "{}", stdout(&o));

    let o = peu(&["ellsberg", "--alpha", "0"]);
    let text = stdout(&o);
    assert!(text.contains("u(G) = 0.333333333333\n"));
    assert!(text.ends_with("R ~ G, R̄ ~ Ḡ\n"), "{text}");

    let o = peu(&["ellsberg", "--alpha", "-1"]);
    assert!(stdout(&o).ends_with("R ≺ G, R̄ ≺ Ḡ\n"));
}

#[test]
fn scenario_output_is_byte_stable() {
    for args in [
        vec!["allais"],
        vec!["ellsberg", "--alpha", "0.5"],
        vec!["ellsberg", "--alpha", "0"],
    ] {
        let first = peu(&args);
        let second = peu(&args);
        assert_eq!(first.stdout, second.stdout);
        assert_eq!(first.stderr, second.stderr);
    }
}

#[test]
fn eval_lottery_and_act() {
    let o = peu(&["eval", &data("allais_matrix.json"), &data("allais_a.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1.8\n");

    let dir = TempDir::new().unwrap();
    let emit = path_str(dir.path().join("e"));
    assert!(peu(&["ellsberg", "--alpha", "0", "--emit", &emit])
        .status
        .success());
    let file = |n: &str| path_str(dir.path().join("e").join(n));
    let o = peu(&[
        "eval",
        &file("matrix.json"),
        &file("act_G.json"),
        "--belief",
        &file("belief.json"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "0.333333333333\n");

    // Uniform belief when none is given.
    let o = peu(&["eval", &file("matrix.json"), &file("act_G.json")]);
    assert_eq!(stdout(&o), "0.333333333333\n");
}

#[test]
fn eval_rejects_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let two = write(
        &dir,
        "u.json",
        r#"{"version": 1, "n": 2, "entries": [[1, 0], [0, 1]]}"#,
    );
    let o = peu(&["eval", &two, &data("allais_a.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension mismatch"));
}

#[test]
fn eval_warns_on_constant_spectrum_for_acts() {
    let dir = TempDir::new().unwrap();
    let id = write(
        &dir,
        "u.json",
        r#"{"version": 1, "n": 2, "entries": [[1, 0], [0, 1]]}"#,
    );
    let act = write(
        &dir,
        "f.json",
        r#"{"version": 1, "states": ["s"], "lotteries": [{"probabilities": [0.5, 0.5]}]}"#,
    );
    let o = peu(&["eval", &id, &act]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
    assert!(stderr(&o).starts_with("warning:"));
}

#[test]
fn schema_errors_exit_1_with_field_paths() {
    let dir = TempDir::new().unwrap();
    let u = data("allais_matrix.json");
    let cases = [
        (
            r#"{"version": 1, "amplitudes": [1, 0, 0], "probabilities": [1, 0, 0]}"#,
            "not both",
        ),
        (r#"{"version": 1}"#, "missing"),
        (r#"{"version": 2, "amplitudes": [1, 0, 0]}"#, "version"),
        (
            r#"{"version": 1, "amplitudes": [1, 0, 0], "extra": 1}"#,
            "extra",
        ),
        (
            "{\"version\": 1,\n \"amplitudes\": [1, \"0\", 0]}",
            "line 2",
        ),
        (r#"{"version": 1, "amplitudes": [1, 0, 0]"#, "EOF"),
    ];
    for (k, (text, needle)) in cases.iter().enumerate() {
        let x = write(&dir, &format!("x{k}.json"), text);
        let o = peu(&["eval", &u, &x]);
        assert_eq!(o.status.code(), Some(1), "case {k}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "case {k}: {}", stderr(&o));
    }
    let o = peu(&["eval", &u, &path_str(dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invariant_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let u = data("allais_matrix.json");
    let lotteries = [
        r#"{"version": 1, "amplitudes": [1, 1, 0]}"#,
        r#"{"version": 1, "amplitudes": [-1, 0, 0]}"#,
        r#"{"version": 1, "probabilities": [0.5, 0.6, 0]}"#,
    ];
    for (k, text) in lotteries.iter().enumerate() {
        let x = write(&dir, &format!("x{k}.json"), text);
        assert_eq!(peu(&["eval", &u, &x]).status.code(), Some(2), "case {k}");
    }
    let matrices = [
        (
            r#"{"version": 1, "n": 2, "entries": [[1, 2], [3, 1]]}"#,
            "entries",
        ),
        (
            r#"{"version": 1, "n": 3, "entries": [[1, 0], [0, 1]]}"#,
            "entries",
        ),
        (
            r#"{"version": 1, "n": 2, "entries": [[1, 0], [0]]}"#,
            "entries",
        ),
    ];
    for (k, (text, needle)) in matrices.iter().enumerate() {
        let m = write(&dir, &format!("m{k}.json"), text);
        let o = peu(&["decompose", &m]);
        assert_eq!(o.status.code(), Some(2), "case {k}");
        assert!(stderr(&o).contains(needle));
    }
}

#[test]
fn decompose_reports() {
    let dir = TempDir::new().unwrap();
    let d = write(
        &dir,
        "d.json",
        r#"{"version": 1, "n": 3, "entries": [[13, 0, 0], [0, 10, 0], [0, 0, 0]]}"#,
    );
    let text = stdout(&peu(&["decompose", &d]));
    assert!(text.starts_with("eigenvalues: 13 10 0\n"), "{text}");
    assert!(text.contains("attitude: vnm-diagonal\n"));

    let emit = path_str(dir.path().join("e"));
    assert!(peu(&["ellsberg", "--alpha", "1", "--emit", &emit])
        .status
        .success());
    let text = stdout(&peu(&[
        "decompose",
        &path_str(dir.path().join("e/matrix.json")),
    ]));
    assert!(text.contains("attitude: indefinite\n"));

    let text = stdout(&peu(&["decompose", &data("allais_matrix.json")]));
    assert!(text.contains("reconstruction: PASS"));
    assert!(text.contains("eigenvalues: 13.0784094403 10.0957844179 -0.174193858153\n"));
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p1,p2,p3,utility"));
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn triangle_rasters() {
    let dir = TempDir::new().unwrap();
    let d = write(
        &dir,
        "d.json",
        r#"{"version": 1, "n": 3, "entries": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}"#,
    );
    let o = peu(&["triangle", &d, "--resolution", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 6);
    for row in &r {
        assert!((row[3] - row[0]).abs() <= 1e-11);
        assert!((row[0] + row[1] + row[2] - 1.0).abs() <= 1e-11);
    }

    for res in [2usize, 3, 7, 10] {
        let out = path_str(dir.path().join(format!("t{res}.csv")));
        let o = peu(&[
            "triangle",
            &data("allais_matrix.json"),
            "--resolution",
            &res.to_string(),
            "--output",
            &out,
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        let r = rows(&fs::read_to_string(&out).unwrap());
        assert_eq!(r.len(), (res + 1) * (res + 2) / 2);
        for row in &r {
            for (vertex, u) in [
                ([1.0, 0.0, 0.0], 13.0),
                ([0.0, 1.0, 0.0], 10.0),
                ([0.0, 0.0, 1.0], 0.0),
            ] {
                if row[..3] == vertex {
                    assert_eq!(row[3], u);
                }
            }
        }
    }

    let two = write(
        &dir,
        "u.json",
        r#"{"version": 1, "n": 2, "entries": [[1, 0], [0, 1]]}"#,
    );
    assert_eq!(peu(&["triangle", &two]).status.code(), Some(2));
    assert_eq!(
        peu(&["triangle", &d, "--resolution", "1"]).status.code(),
        Some(2)
    );
}

fn probabilities(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix("probabilities: "))
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn solve_examples() {
    let o = peu(&["solve", &data("matching_pennies.json")]);
    assert_eq!(o.status.code(), Some(0));
    for p in probabilities(&stdout(&o)) {
        assert!((p[0] - 0.5).abs() <= 1e-6 && (p[1] - 0.5).abs() <= 1e-6);
    }

    let o = peu(&["solve", &data("coordination.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(probabilities(&text), vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
    assert!(text.contains("residual: 0\n"));

    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "g.json",
        r#"{"version": 1, "players": 2, "actions": [2, 2]"#,
    );
    assert_eq!(peu(&["solve", &bad]).status.code(), Some(1));
}

#[test]
fn solve_non_convergence_exits_3_with_last_profile() {
    let o = peu(&["solve", &data("mixing_game.json"), "--max-iter", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert_eq!(probabilities(&text).len(), 2);
    assert!(text.contains("residual: "));
    assert!(text.contains("iterations: 3\n"));
    assert!(stderr(&o).contains("no equilibrium"));
}

#[test]
fn solve_rejects_bad_options() {
    for args in [["--damping", "0"], ["--damping", "1.5"], ["--tol", "-1"]] {
        let mut all = vec!["solve", "data"];
        let game = data("matching_pennies.json");
        all[1] = &game;
        all.extend(args);
        assert_eq!(peu(&all).status.code(), Some(2));
    }
}

#[test]
fn solved_profile_document_verifies() {
    let dir = TempDir::new().unwrap();
    let out = path_str(dir.path().join("profile.json"));
    let o = peu(&["solve", &data("mixing_game.json"), "--output", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("subjective mixture"));
    let game = doc::load::<GameDoc>(Path::new(&data("mixing_game.json")))
        .unwrap()
        .to_game()
        .unwrap();
    let profile_doc = doc::load::<ProfileDoc>(Path::new(&out)).unwrap();
    let profile = profile_doc.to_profile().unwrap();
    let v = verify(&game, &profile, 1e-8).unwrap();
    assert!(v.is_equilibrium);
    assert!(profile_doc.residual.unwrap() <= 1e-8);
}

#[test]
fn game_document_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        // Profile listed twice.
        r#"{"version": 1, "players": 2, "actions": [1, 1], "payoffs": [
            [{"opponents": [0], "entries": [[1]]}, {"opponents": [0], "entries": [[1]]}],
            [{"opponents": [0], "entries": [[1]]}]]}"#,
        // Missing player 1's matrix.
        r#"{"version": 1, "players": 2, "actions": [1, 1], "payoffs": [
            [{"opponents": [0], "entries": [[1]]}], []]}"#,
        // Opponent action out of range.
        r#"{"version": 1, "players": 2, "actions": [1, 1], "payoffs": [
            [{"opponents": [1], "entries": [[1]]}],
            [{"opponents": [0], "entries": [[1]]}]]}"#,
        // Player count disagrees with actions.
        r#"{"version": 1, "players": 3, "actions": [1, 1], "payoffs": [[], []]}"#,
        // Wrong matrix size.
        r#"{"version": 1, "players": 2, "actions": [1, 1], "payoffs": [
            [{"opponents": [0], "entries": [[1, 0], [0, 1]]}],
            [{"opponents": [0], "entries": [[1]]}]]}"#,
    ];
    for (k, text) in cases.iter().enumerate() {
        let g = write(&dir, &format!("g{k}.json"), text);
        let o = peu(&["solve", &g]);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", stderr(&o));
        assert!(
            stderr(&o).contains("payoffs") || stderr(&o).contains("actions"),
            "case {k}"
        );
    }
}

#[test]
fn emitted_documents_round_trip() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let e = dir.path().join("e");
    assert!(peu(&["allais", "--emit", &path_str(a.clone())])
        .status
        .success());
    assert!(
        peu(&["ellsberg", "--alpha", "0.3", "--emit", &path_str(e.clone())])
            .status
            .success()
    );

    let s = AllaisScenario::new();
    let u = doc::load::<MatrixDoc>(&a.join("matrix.json"))
        .unwrap()
        .to_payoff()
        .unwrap();
    assert_eq!(u, s.payoff);
    for (name, x) in [("a", &s.a), ("b", &s.b), ("c", &s.c), ("d", &s.d)] {
        let loaded = doc::load::<LotteryDoc>(&a.join(format!("{name}.json")))
            .unwrap()
            .to_lottery()
            .unwrap();
        assert_eq!(&loaded, x);
    }

    let s = ellsberg_scenario(0.3);
    let u = doc::load::<MatrixDoc>(&e.join("matrix.json"))
        .unwrap()
        .to_payoff()
        .unwrap();
    assert_eq!(u, s.payoff);
    let pi = doc::load::<BeliefDoc>(&e.join("belief.json"))
        .unwrap()
        .to_belief()
        .unwrap();
    assert_eq!(pi, s.belief);
    for (name, f) in [
        ("R", &s.bet_r),
        ("R_bar", &s.bet_r_bar),
        ("G", &s.bet_g),
        ("G_bar", &s.bet_g_bar),
    ] {
        let (states, loaded) = doc::load::<ActDoc>(&e.join(format!("act_{name}.json")))
            .unwrap()
            .to_act()
            .unwrap();
        assert_eq!(&loaded, f);
        assert_eq!(states, s.states);
    }
}

#[test]
fn game_and_profile_documents_round_trip() {
    let g = FiniteGame::from_fn(vec![2, 3, 2], |i, opp| {
        let n = [2, 3, 2][i];
        let seed = (i * 7 + opp.iter().sum::<usize>()) as f64;
        SymMatrix::from_upper_fn(n, |r, c| (seed + 0.1 * (r * 3 + c) as f64).sin() / 3.0)
    })
    .unwrap();
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.json");
    doc::save(&path, &GameDoc::from_game(&g)).unwrap();
    assert_eq!(doc::load::<GameDoc>(&path).unwrap().to_game().unwrap(), g);

    let profile = StrategyProfile::from_strategies(vec![
        Strategy::single(Lottery::new(vec![0.6, 0.8]).unwrap()),
        Strategy::mixture(vec![
            (0.1 + 0.2, Lottery::degenerate(3, 0).unwrap()),
            (0.7, Lottery::uniform(3).unwrap()),
        ])
        .unwrap(),
        Strategy::single(Lottery::new(vec![1.0 / 3f64.sqrt(), (2.0f64 / 3.0).sqrt()]).unwrap()),
    ]);
    let path = dir.path().join("p.json");
    doc::save(&path, &ProfileDoc::from_profile(&profile, None)).unwrap();
    assert_eq!(
        doc::load::<ProfileDoc>(&path)
            .unwrap()
            .to_profile()
            .unwrap(),
        profile
    );
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(peu(&["--help"]).status.code(), Some(0));
    assert_eq!(peu(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(peu(&["eval"]).status.code(), Some(1));
}
