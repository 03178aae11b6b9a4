//! Command-line front end: evaluation, decomposition, the two paradox
//! tables, triangle rasters and game solving.

pub mod doc;
pub mod error;
pub mod format;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use peu_core::peu::{DEFAULT_CLASSIFY_TOL, INDIFFERENCE_TOL};
use peu_core::{
    act_utility, check_nonconstant_eigenvalues, classify, compare, ellsberg_scenario, reconstruct,
    solve, triangle_raster, utility, AllaisScenario, Belief, PayoffMatrix, SolveError,
    SolveOptions, StrategyProfile,
};

use crate::doc::{ActDoc, BeliefDoc, Evaluand, GameDoc, LotteryDoc, MatrixDoc, ProfileDoc};
pub use crate::error::{CliError, CliResult, ErrorKind};
use crate::format::{num, nums};

/// Largest reconstruction error, relative to the largest entry, reported as PASS.
const RECONSTRUCTION_TOL: f64 = 1e-9;
const EIGENVALUE_SPREAD_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "peu", version, about = "Projective expected utility toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Utility of a lottery, or of an act under a belief.
    Eval {
        /// Payoff matrix document.
        matrix: PathBuf,
        /// Lottery or act document.
        target: PathBuf,
        /// Belief over the act's states; uniform when omitted.
        #[arg(long)]
        belief: Option<PathBuf>,
    },
    /// Eigenvalues, eigenvectors and risk attitude of a payoff matrix.
    Decompose { matrix: PathBuf },
    /// The Allais lotteries and their preference pattern.
    Allais {
        /// Write the scenario's matrix and lotteries as documents into this directory.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// The Ellsberg bets and their preference pattern.
    Ellsberg {
        /// Off-diagonal payoff entry.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        alpha: f64,
        /// Write the scenario's matrix, belief and acts as documents into this directory.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Utilities over a barycentric grid of the probability triangle, as CSV.
    Triangle {
        /// 3×3 payoff matrix document.
        matrix: PathBuf,
        /// Subdivisions per triangle edge.
        #[arg(long, default_value_t = 20)]
        resolution: usize,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Equilibrium of a finite game by damped best-response iteration.
    Solve {
        /// Game document.
        game: PathBuf,
        #[arg(long, default_value_t = peu_core::equilibrium::DEFAULT_TOL, allow_hyphen_values = true)]
        tol: f64,
        #[arg(long, default_value_t = peu_core::equilibrium::DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = peu_core::equilibrium::DEFAULT_DAMPING, allow_hyphen_values = true)]
        damping: f64,
        /// Write the resulting profile as a document.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Runs one command. Results go to `out`, warnings to `err`.
pub fn run(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Eval {
            matrix,
            target,
            belief,
        } => cmd_eval(matrix, target, belief.as_deref(), out, err),
        Command::Decompose { matrix } => cmd_decompose(matrix, out, err),
        Command::Allais { emit } => cmd_allais(emit.as_deref(), out),
        Command::Ellsberg { alpha, emit } => cmd_ellsberg(*alpha, emit.as_deref(), out),
        Command::Triangle {
            matrix,
            resolution,
            output,
        } => cmd_triangle(matrix, *resolution, output.as_deref(), out),
        Command::Solve {
            game,
            tol,
            max_iter,
            damping,
            output,
        } => cmd_solve(
            game,
            SolveOptions {
                tol: *tol,
                max_iter: *max_iter,
                damping: *damping,
            },
            output.as_deref(),
            out,
        ),
    }
}

pub fn load_matrix(path: &Path) -> CliResult<PayoffMatrix> {
    doc::load::<MatrixDoc>(path)?
        .to_payoff()
        .map_err(|e| e.context(path.display()))
}

fn warn_if_degenerate(u: &PayoffMatrix, err: &mut dyn Write) -> CliResult<()> {
    if !check_nonconstant_eigenvalues(u, EIGENVALUE_SPREAD_TOL)? {
        writeln!(
            err,
            "warning: all eigenvalues of the payoff matrix are equal; every lottery has the same utility"
        )?;
    }
    Ok(())
}

pub fn cmd_eval(
    matrix: &Path,
    target: &Path,
    belief: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let u = load_matrix(matrix)?;
    let value = match doc::load_evaluand(target)? {
        Evaluand::Lottery(x) => {
            if belief.is_some() {
                return Err(CliError::schema("a belief only applies to acts"));
            }
            utility(&u, &x)?
        }
        Evaluand::Act(states, f) => {
            warn_if_degenerate(&u, err)?;
            let pi = match belief {
                Some(path) => doc::load::<BeliefDoc>(path)?
                    .to_belief()
                    .map_err(|e| e.context(path.display()))?,
                None => Belief::uniform(states.len())?,
            };
            act_utility(&pi, &u, &f)?
        }
    };
    writeln!(out, "{}", num(value))?;
    Ok(())
}

pub fn cmd_decompose(matrix: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let u = load_matrix(matrix)?;
    warn_if_degenerate(&u, err)?;
    let d = u.decompose()?;
    writeln!(out, "eigenvalues: {}", nums(d.eigenvalues()))?;
    writeln!(out, "eigenvectors:")?;
    for (k, z) in d.eigenvectors().iter().enumerate() {
        writeln!(out, "  z{}: {}", k + 1, nums(z))?;
    }
    writeln!(out, "attitude: {}", classify(&u, DEFAULT_CLASSIFY_TOL)?)?;
    let error = reconstruct(&d).max_abs_diff(u.matrix());
    let verdict = if error <= RECONSTRUCTION_TOL * u.matrix().max_abs().max(1.0) {
        "PASS"
    } else {
        "FAIL"
    };
    writeln!(out, "reconstruction: {verdict} (max error {})", num(error))?;
    Ok(())
}

fn emit_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))
}

pub fn cmd_allais(emit: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let s = AllaisScenario::new();
    let [a, b, c, d] = s.utilities();
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        writeln!(out, "u({name}) = {}", num(v))?;
    }
    writeln!(
        out,
        "A {} B, D {} C",
        compare(a, b, INDIFFERENCE_TOL).symbol(),
        compare(d, c, INDIFFERENCE_TOL).symbol()
    )?;
    if let Some(dir) = emit {
        emit_dir(dir)?;
        doc::save(&dir.join("matrix.json"), &MatrixDoc::from_payoff(&s.payoff))?;
        for (name, x) in [("a", &s.a), ("b", &s.b), ("c", &s.c), ("d", &s.d)] {
            doc::save(
                &dir.join(format!("{name}.json")),
                &LotteryDoc::from_lottery(x),
            )?;
        }
    }
    Ok(())
}

pub fn cmd_ellsberg(alpha: f64, emit: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    if !alpha.is_finite() {
        return Err(CliError::invariant(format!(
            "alpha must be finite, got {alpha}"
        )));
    }
    let s = ellsberg_scenario(alpha);
    writeln!(out, "alpha = {}", num(alpha))?;
    for (name, x) in [("w", &s.w), ("l", &s.l), ("r", &s.r), ("r̄", &s.r_bar)] {
        writeln!(out, "u({name}) = {}", num(s.lottery_utility(x)))?;
    }
    let (g, g_bar) = (s.act_utility(&s.bet_g), s.act_utility(&s.bet_g_bar));
    writeln!(out, "u(G) = {}", num(g))?;
    writeln!(out, "u(Ḡ) = {}", num(g_bar))?;
    let r = s.act_utility(&s.bet_r);
    let r_bar = s.act_utility(&s.bet_r_bar);
    writeln!(
        out,
        "R {} G, R̄ {} Ḡ",
        compare(r, g, INDIFFERENCE_TOL).symbol(),
        compare(r_bar, g_bar, INDIFFERENCE_TOL).symbol()
    )?;
    if let Some(dir) = emit {
        emit_dir(dir)?;
        doc::save(&dir.join("matrix.json"), &MatrixDoc::from_payoff(&s.payoff))?;
        doc::save(&dir.join("belief.json"), &BeliefDoc::from_belief(&s.belief))?;
        for (name, f) in [
            ("R", &s.bet_r),
            ("R_bar", &s.bet_r_bar),
            ("G", &s.bet_g),
            ("G_bar", &s.bet_g_bar),
        ] {
            doc::save(
                &dir.join(format!("act_{name}.json")),
                &ActDoc::from_act(&s.states, f),
            )?;
        }
    }
    Ok(())
}

pub fn triangle_csv(u: &PayoffMatrix, resolution: usize) -> CliResult<String> {
    let mut csv = String::from("p1,p2,p3,utility\n");
    for pt in triangle_raster(u, resolution)? {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            num(pt.p[0]),
            num(pt.p[1]),
            num(pt.p[2]),
            num(pt.utility)
        ));
    }
    Ok(csv)
}

pub fn cmd_triangle(
    matrix: &Path,
    resolution: usize,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let u = load_matrix(matrix)?;
    let csv = triangle_csv(&u, resolution)?;
    match output {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn write_profile(profile: &StrategyProfile, out: &mut dyn Write) -> CliResult<()> {
    for (i, s) in profile.strategies().iter().enumerate() {
        match s.as_single() {
            Some(x) => {
                writeln!(out, "player {i}")?;
                writeln!(out, "  amplitudes: {}", nums(x.amplitudes()))?;
            }
            None => {
                writeln!(
                    out,
                    "player {i} (subjective mixture of {} lotteries)",
                    s.components().len()
                )?;
                for (w, x) in s.components() {
                    writeln!(
                        out,
                        "  weight {}: amplitudes {}",
                        num(*w),
                        nums(x.amplitudes())
                    )?;
                }
            }
        }
        writeln!(out, "  probabilities: {}", nums(&s.action_probabilities()))?;
    }
    Ok(())
}

pub fn cmd_solve(
    game: &Path,
    opts: SolveOptions,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let g = doc::load::<GameDoc>(game)?
        .to_game()
        .map_err(|e| e.context(game.display()))?;
    let (profile, residual, iterations, converged) = match solve(&g, opts) {
        Ok(res) => (res.profile, res.residual, res.iterations, true),
        Err(SolveError::NotConverged {
            profile,
            residual,
            iterations,
        }) => (profile, residual, iterations, false),
        Err(SolveError::Invalid(e)) => return Err(e.into()),
    };
    write_profile(&profile, out)?;
    writeln!(out, "residual: {}", num(residual))?;
    writeln!(out, "iterations: {iterations}")?;
    if let Some(path) = output {
        doc::save(path, &ProfileDoc::from_profile(&profile, Some(residual)))?;
    }
    if converged {
        Ok(())
    } else {
        Err(CliError {
            kind: ErrorKind::NotConverged,
            message: format!(
                "no equilibrium within {iterations} iterations; last residual {}",
                num(residual)
            ),
        })
    }
}
