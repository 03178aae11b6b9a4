//! Versioned JSON documents and their conversion to model types.
//!
//! Every document carries `"version": 1`. Loading checks the schema first
//! (exit code 1) and then rebuilds the model value, which re-runs all of its
//! invariant checks (exit code 2). Errors name the file and the offending
//! field.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use peu_core::{
    simplex_to_sphere, Act, Belief, FiniteGame, Lottery, PayoffMatrix, StateSpace, Strategy,
    StrategyProfile, SymMatrix,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub version: u32,
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

/// A lottery given by exactly one of its two coordinatizations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotterySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotteryDoc {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActDoc {
    pub version: u32,
    pub states: Vec<String>,
    pub lotteries: Vec<LotterySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefDoc {
    pub version: u32,
    pub probs: Vec<f64>,
}

/// One payoff matrix of a player, for one action profile of the opponents
/// (listed in increasing player order, 0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffEntry {
    pub opponents: Vec<usize>,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub version: u32,
    pub players: usize,
    pub actions: Vec<usize>,
    /// `payoffs[i]` lists player `i`'s matrices.
    pub payoffs: Vec<Vec<PayoffEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub weight: f64,
    pub amplitudes: Vec<f64>,
}

/// A strategy profile; each player's strategy is a list of weighted lotteries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub version: u32,
    pub strategies: Vec<Vec<ComponentDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// Anything with a `version` field.
pub trait Versioned {
    fn version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn version(&self) -> u32 {
                self.version
            }
        })*
    };
}
versioned!(MatrixDoc, LotteryDoc, ActDoc, BeliefDoc, GameDoc, ProfileDoc);

/// Parses a document, reporting the JSON path and line of any schema error.
pub fn parse<T: DeserializeOwned + Versioned>(text: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::schema(inner.to_string())
        } else {
            CliError::schema(format!("field `{path}`: {inner}"))
        }
    })?;
    de.end().map_err(|e| CliError::schema(e.to_string()))?;
    if doc.version() != SCHEMA_VERSION {
        return Err(CliError::schema(format!(
            "field `version`: unsupported schema version {} (expected {SCHEMA_VERSION})",
            doc.version()
        )));
    }
    Ok(doc)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> CliResult<T> {
    parse(&read_text(path)?).map_err(|e| e.context(path.display()))
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn save<T: Serialize>(path: &Path, doc: &T) -> CliResult<()> {
    fs::write(path, to_json(doc)).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn field(name: &str) -> impl Fn(peu_core::PeuError) -> CliError + '_ {
    move |e| CliError::from(e).context(format_args!("field `{name}`"))
}

fn rows_to_matrix(rows: &[Vec<f64>], n: usize, name: &str) -> CliResult<SymMatrix> {
    if rows.len() != n {
        return Err(CliError::invariant(format!(
            "field `{name}`: expected {n} rows, found {}",
            rows.len()
        )));
    }
    SymMatrix::new(rows.to_vec()).map_err(field(name))
}

impl MatrixDoc {
    pub fn from_payoff(u: &PayoffMatrix) -> Self {
        Self {
            version: SCHEMA_VERSION,
            n: u.dim(),
            entries: u.matrix().rows(),
        }
    }

    pub fn to_payoff(&self) -> CliResult<PayoffMatrix> {
        Ok(PayoffMatrix::new(rows_to_matrix(
            &self.entries,
            self.n,
            "entries",
        )?))
    }
}

impl LotterySpec {
    pub fn from_lottery(x: &Lottery) -> Self {
        Self {
            amplitudes: Some(x.amplitudes().to_vec()),
            probabilities: None,
        }
    }

    /// `name` locates the lottery within its document for error messages.
    pub fn to_lottery(&self, name: &str) -> CliResult<Lottery> {
        match (&self.amplitudes, &self.probabilities) {
            (Some(a), None) => Lottery::new(a.clone()).map_err(field(&format!("{name}amplitudes"))),
            (None, Some(p)) => simplex_to_sphere(p).map_err(field(&format!("{name}probabilities"))),
            (Some(_), Some(_)) => Err(CliError::schema(format!(
                "{}give either `amplitudes` or `probabilities`, not both",
                location(name)
            ))),
            (None, None) => Err(CliError::schema(format!(
                "{}missing `amplitudes` or `probabilities`",
                location(name)
            ))),
        }
    }
}

fn location(prefix: &str) -> String {
    if prefix.is_empty() {
        String::new()
    } else {
        format!("field `{}`: ", prefix.trim_end_matches('.'))
    }
}

impl LotteryDoc {
    pub fn from_lottery(x: &Lottery) -> Self {
        Self {
            version: SCHEMA_VERSION,
            amplitudes: Some(x.amplitudes().to_vec()),
            probabilities: None,
        }
    }

    pub fn to_lottery(&self) -> CliResult<Lottery> {
        LotterySpec {
            amplitudes: self.amplitudes.clone(),
            probabilities: self.probabilities.clone(),
        }
        .to_lottery("")
    }
}

impl ActDoc {
    pub fn from_act(states: &StateSpace, f: &Act) -> Self {
        Self {
            version: SCHEMA_VERSION,
            states: states.labels().to_vec(),
            lotteries: f
                .lotteries()
                .iter()
                .map(LotterySpec::from_lottery)
                .collect(),
        }
    }

    pub fn to_act(&self) -> CliResult<(StateSpace, Act)> {
        let states = StateSpace::new(self.states.iter().cloned()).map_err(field("states"))?;
        if self.lotteries.len() != states.len() {
            return Err(CliError::invariant(format!(
                "field `lotteries`: {} states but {} lotteries",
                states.len(),
                self.lotteries.len()
            )));
        }
        let lotteries = self
            .lotteries
            .iter()
            .enumerate()
            .map(|(s, spec)| spec.to_lottery(&format!("lotteries[{s}].")))
            .collect::<CliResult<Vec<_>>>()?;
        let act = Act::new(lotteries).map_err(field("lotteries"))?;
        Ok((states, act))
    }
}

impl BeliefDoc {
    pub fn from_belief(pi: &Belief) -> Self {
        Self {
            version: SCHEMA_VERSION,
            probs: pi.probs().to_vec(),
        }
    }

    pub fn to_belief(&self) -> CliResult<Belief> {
        Belief::new(self.probs.clone()).map_err(field("probs"))
    }
}

impl GameDoc {
    pub fn from_game(g: &FiniteGame) -> Self {
        Self {
            version: SCHEMA_VERSION,
            players: g.players(),
            actions: g.actions().to_vec(),
            payoffs: (0..g.players())
                .map(|i| {
                    g.payoffs(i)
                        .iter()
                        .enumerate()
                        .map(|(k, u)| PayoffEntry {
                            opponents: g.opponent_profile(i, k),
                            entries: u.rows(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_game(&self) -> CliResult<FiniteGame> {
        if self.actions.len() != self.players {
            return Err(CliError::invariant(format!(
                "field `actions`: {} players but {} action counts",
                self.players,
                self.actions.len()
            )));
        }
        if self.payoffs.len() != self.players {
            return Err(CliError::invariant(format!(
                "field `payoffs`: {} players but {} payoff lists",
                self.players,
                self.payoffs.len()
            )));
        }
        // An empty shell game only supplies the opponent indexing.
        let shell = FiniteGame::from_fn(self.actions.clone(), |i, _| {
            SymMatrix::zeros(self.actions[i])
        })
        .map_err(field("actions"))?;

        let mut payoffs = Vec::with_capacity(self.players);
        for (i, list) in self.payoffs.iter().enumerate() {
            let mut slots: BTreeMap<usize, SymMatrix> = BTreeMap::new();
            for (k, entry) in list.iter().enumerate() {
                let at = format!("payoffs[{i}][{k}]");
                let idx = shell
                    .opponent_index(i, &entry.opponents)
                    .map_err(field(&format!("{at}.opponents")))?;
                let m = rows_to_matrix(&entry.entries, self.actions[i], &format!("{at}.entries"))?;
                if slots.insert(idx, m).is_some() {
                    return Err(CliError::invariant(format!(
                        "field `{at}.opponents`: profile {:?} listed twice",
                        entry.opponents
                    )));
                }
            }
            let expected = shell.opponent_profile_count(i);
            if slots.len() != expected {
                let missing = (0..expected)
                    .find(|k| !slots.contains_key(k))
                    .expect("fewer slots than profiles");
                return Err(CliError::invariant(format!(
                    "field `payoffs[{i}]`: no matrix for opponent profile {:?}",
                    shell.opponent_profile(i, missing)
                )));
            }
            payoffs.push(slots.into_values().collect());
        }
        FiniteGame::new(self.actions.clone(), payoffs).map_err(field("payoffs"))
    }
}

impl ProfileDoc {
    pub fn from_profile(profile: &StrategyProfile, residual: Option<f64>) -> Self {
        Self {
            version: SCHEMA_VERSION,
            strategies: profile
                .strategies()
                .iter()
                .map(|s| {
                    s.components()
                        .iter()
                        .map(|(w, x)| ComponentDoc {
                            weight: *w,
                            amplitudes: x.amplitudes().to_vec(),
                        })
                        .collect()
                })
                .collect(),
            residual,
        }
    }

    pub fn to_profile(&self) -> CliResult<StrategyProfile> {
        let strategies = self
            .strategies
            .iter()
            .enumerate()
            .map(|(i, comps)| {
                if comps.is_empty() {
                    return Err(CliError::invariant(format!(
                        "field `strategies[{i}]`: no lotteries"
                    )));
                }
                let parts = comps
                    .iter()
                    .enumerate()
                    .map(|(t, c)| {
                        Lottery::new(c.amplitudes.clone())
                            .map(|x| (c.weight, x))
                            .map_err(field(&format!("strategies[{i}][{t}].amplitudes")))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Strategy::mixture(parts).map_err(field(&format!("strategies[{i}]")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(StrategyProfile::from_strategies(strategies))
    }
}

/// A file passed where either a lottery or an act is accepted.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluand {
    Lottery(Lottery),
    Act(StateSpace, Act),
}

pub fn load_evaluand(path: &Path) -> CliResult<Evaluand> {
    let text = read_text(path)?;
    let is_act = serde_json::from_str::<serde_json::Value>(&text)
        .map(|v| v.get("states").is_some() || v.get("lotteries").is_some())
        .unwrap_or(false);
    let parsed = if is_act {
        parse::<ActDoc>(&text)
            .and_then(|d| d.to_act())
            .map(|(s, f)| Evaluand::Act(s, f))
    } else {
        parse::<LotteryDoc>(&text)
            .and_then(|d| d.to_lottery())
            .map(Evaluand::Lottery)
    };
    parsed.map_err(|e| e.context(path.display()))
}
