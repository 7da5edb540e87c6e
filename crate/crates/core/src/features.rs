//! Wide per-race feature table.
//!
//! Column names follow `Name<i>_<n>_<m>_<r>` for cost-matrix entries
//! (`Prog`, `Bound`, `Prox`; player `i`, one-based row `n` and column `m`,
//! round `r`) and `State<i>_<var>_<r>` for vehicle states. States are logged
//! before the round's decision.

use std::fmt;
use std::io::Write;

use crate::sim::cost::OBJECTIVES;
use crate::sim::{RaceRecord, VehicleState};

pub const COST_NAMES: [&str; OBJECTIVES] = ["Prog", "Bound", "Prox"];
pub const STATE_VARS: [&str; 5] = ["x", "y", "v", "phi", "beta"];
pub const PLAYERS: usize = 2;

/// Per-race columns preceding the round features.
pub const META_COLUMNS: [&str; 13] = [
    "race",
    "scenario",
    "method",
    "theta1",
    "theta2",
    "theta3",
    "passed",
    "pass_round",
    "out_of_bounds",
    "collided",
    "min_distance",
    "lead_fraction",
    "adjusted_rounds",
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    Meta(&'static str),
    Cost {
        /// Index into [`COST_NAMES`].
        cost: usize,
        player: usize,
        row: usize,
        col: usize,
        round: usize,
    },
    State {
        player: usize,
        /// Index into [`STATE_VARS`].
        var: usize,
        round: usize,
    },
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Meta(name) => f.write_str(name),
            Column::Cost {
                cost,
                player,
                row,
                col,
                round,
            } => write!(f, "{}{player}_{row}_{col}_{round}", COST_NAMES[*cost]),
            Column::State { player, var, round } => write!(f, "State{player}_{}_{round}", STATE_VARS[*var]),
        }
    }
}

impl std::str::FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(name) = META_COLUMNS.iter().find(|&&m| m == s) {
            return Ok(Column::Meta(name));
        }
        let bad = || format!("unrecognized column `{s}`");
        let number = |t: &str| -> Result<usize, String> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) || t.starts_with('0') {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        if let Some(rest) = s.strip_prefix("State") {
            let parts: Vec<&str> = rest.split('_').collect();
            let [player, var, round] = parts[..] else {
                return Err(bad());
            };
            let var = STATE_VARS.iter().position(|&v| v == var).ok_or_else(bad)?;
            return Ok(Column::State {
                player: number(player)?,
                var,
                round: number(round)?,
            });
        }
        let cost = COST_NAMES.iter().position(|c| s.starts_with(c)).ok_or_else(bad)?;
        let parts: Vec<&str> = s[COST_NAMES[cost].len()..].split('_').collect();
        let [player, row, col, round] = parts[..] else {
            return Err(bad());
        };
        Ok(Column::Cost {
            cost,
            player: number(player)?,
            row: number(row)?,
            col: number(col)?,
            round: number(round)?,
        })
    }
}

/// Every column for races of `rounds` rounds over `n x m` games.
pub fn columns(rounds: usize, n: usize, m: usize) -> Vec<Column> {
    let mut out: Vec<Column> = META_COLUMNS.iter().map(|&c| Column::Meta(c)).collect();
    for round in 1..=rounds {
        for player in 1..=PLAYERS {
            for var in 0..STATE_VARS.len() {
                out.push(Column::State { player, var, round });
            }
        }
        for cost in 0..OBJECTIVES {
            for player in 1..=PLAYERS {
                for row in 1..=n {
                    for col in 1..=m {
                        out.push(Column::Cost {
                            cost,
                            player,
                            row,
                            col,
                            round,
                        });
                    }
                }
            }
        }
    }
    out
}

fn state_value(s: &VehicleState, var: usize) -> f64 {
    [s.x, s.y, s.v, s.heading, s.slip][var]
}

/// Value of `column` for a race; empty when the race has no such round.
pub fn cell(index: usize, record: &RaceRecord, column: &Column) -> String {
    match column {
        Column::Meta(name) => {
            let c = &record.config;
            match *name {
                "race" => index.to_string(),
                "scenario" => c.scenario.name().to_string(),
                "method" => c.method.name().to_string(),
                "theta1" => fmt_f64(c.attacker_weights[0]),
                "theta2" => fmt_f64(c.attacker_weights[1]),
                "theta3" => fmt_f64(c.attacker_weights[2]),
                "passed" => (record.passed as u8).to_string(),
                "pass_round" => record.pass_round.map(|r| r.to_string()).unwrap_or_default(),
                "out_of_bounds" => (record.out_of_bounds as u8).to_string(),
                "collided" => (record.collided as u8).to_string(),
                "min_distance" => fmt_f64(record.min_distance),
                "lead_fraction" => fmt_f64(record.lead_fraction),
                "adjusted_rounds" => record.adjusted_rounds.to_string(),
                other => unreachable!("meta column {other}"),
            }
        }
        Column::State { player, var, round } => record
            .rounds
            .get(round - 1)
            .map(|r| {
                let s = if *player == 1 { &r.attacker } else { &r.defender };
                fmt_f64(state_value(s, *var))
            })
            .unwrap_or_default(),
        Column::Cost {
            cost,
            player,
            row,
            col,
            round,
        } => record
            .rounds
            .get(round - 1)
            .and_then(|r| {
                let t = if *player == 1 { &r.attacker_costs } else { &r.defender_costs };
                let (n, m) = t.shape();
                (*row <= n && *col <= m).then(|| fmt_f64(t.objective(*cost).get(row - 1, col - 1)))
            })
            .unwrap_or_default(),
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes the header and one row per record.
pub fn write_feature_csv<W: Write>(records: &[RaceRecord], out: W) -> csv::Result<()> {
    let rounds = records.iter().map(|r| r.config.physics.rounds).max().unwrap_or(0);
    let (n, m) = records
        .iter()
        .flat_map(|r| r.rounds.first())
        .map(|r| r.attacker_costs.shape())
        .next()
        .unwrap_or((9, 9));
    let cols = columns(rounds, n, m);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(cols.iter().map(|c| c.to_string()))?;
    for (i, rec) in records.iter().enumerate() {
        w.write_record(cols.iter().map(|c| cell(i + 1, rec, c)))?;
    }
    w.flush()?;
    Ok(())
}
