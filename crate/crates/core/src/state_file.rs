//! JSON initial-state files.
//!
//! ```json
//! {"graph": "c4-prime", "radius": 4,
//!  "amplitudes": [{"cell": 0, "coin": 3, "re": 1.0, "im": 0.0},
//!                 {"cell": 0, "coin": 4, "re": 0.0, "im": 1.0}]}
//! ```
//!
//! `coin` is a local label `0..=9` or, on the tailed cycle, a tail arc
//! `"a->b"` (walker at tail vertex `a`, moving away from `b`; `b = 0` stands
//! for the cycle vertex the tail is attached to). `cell` is only meaningful
//! on the periodic chain and defaults to 0. The amplitudes are normalized on
//! load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arc_graph::{ArcLabel, GraphKind};
use crate::presets::InitialState;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoinRef {
    Index(u8),
    Tail(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<i64>,
    pub coin: CoinRef,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub graph: String,
    pub radius: usize,
    pub amplitudes: Vec<AmplitudeEntry>,
}

/// A parsed state file.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedState {
    pub state: InitialState,
    pub radius: usize,
    /// Norm of the amplitudes as written; the state is divided by it.
    pub normalization: f64,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::StateFile(msg.into())
}

fn parse_tail(s: &str) -> Result<ArcLabel> {
    let (a, b) = s
        .split_once("->")
        .ok_or_else(|| bad(format!("tail arc {s:?} is not of the form a->b")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<i64>()
            .map_err(|_| bad(format!("bad tail vertex {x:?} in {s:?}")))
    };
    let (from, to) = (parse(a)?, parse(b)?);
    if from == 0 {
        return Err(bad(format!(
            "tail arc {s:?} starts on the cycle; use coin 0 or 9"
        )));
    }
    Ok(ArcLabel::Tail { from, to })
}

impl StateFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn resolve(&self) -> Result<LoadedState> {
        let kind = GraphKind::from_name(&self.graph)
            .ok_or_else(|| bad(format!("unknown graph {:?}", self.graph)))?;
        let mut entries = Vec::with_capacity(self.amplitudes.len());
        for e in &self.amplitudes {
            let label = match (&e.coin, kind) {
                (CoinRef::Index(c), _) if *c > 9 => {
                    return Err(bad(format!("coin {c} out of range 0..=9")))
                }
                (CoinRef::Index(_), GraphKind::TildeC4) if e.cell.unwrap_or(0) != 0 => {
                    return Err(bad("cells other than 0 only exist on c4-prime"))
                }
                (CoinRef::Index(c), _) => ArcLabel::Coin {
                    cell: e.cell.unwrap_or(0),
                    coin: *c,
                },
                (CoinRef::Tail(_), GraphKind::C4Prime) => {
                    return Err(bad("c4-prime has no tail arcs"))
                }
                (CoinRef::Tail(s), GraphKind::TildeC4) => {
                    if e.cell.is_some() {
                        return Err(bad("tail arcs take no cell"));
                    }
                    parse_tail(s)?
                }
            };
            entries.push((label, C64::new(e.re, e.im)));
        }
        let (state, normalization) =
            InitialState::new(kind, entries).map_err(|e| bad(e.to_string()))?;
        if state.support_radius() > self.radius {
            return Err(bad(format!(
                "amplitudes reach radius {} beyond the declared radius {}",
                state.support_radius(),
                self.radius
            )));
        }
        Ok(LoadedState {
            state,
            radius: self.radius,
            normalization,
        })
    }

    /// Describes a state; `radius` is raised to cover its support if needed.
    pub fn from_state(state: &InitialState, radius: usize) -> Self {
        let amplitudes = state
            .entries()
            .iter()
            .map(|&(label, a)| {
                let (cell, coin) = match label {
                    ArcLabel::Coin { cell, coin } => (
                        (state.kind() == GraphKind::C4Prime).then_some(cell),
                        CoinRef::Index(coin),
                    ),
                    ArcLabel::Tail { from, to } => (None, CoinRef::Tail(format!("{from}->{to}"))),
                };
                AmplitudeEntry {
                    cell,
                    coin,
                    re: a.re,
                    im: a.im,
                }
            })
            .collect();
        StateFile {
            graph: state.kind().name().to_string(),
            radius: radius.max(state.support_radius()),
            amplitudes,
        }
    }
}

pub fn load_state(path: &Path) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path)?;
    StateFile::from_json(&text)?.resolve()
}

pub fn save_state(path: &Path, state: &InitialState, radius: usize) -> Result<()> {
    std::fs::write(path, StateFile::from_state(state, radius).to_json()? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fig3b() {
        let text = r#"{"graph": "c4-prime", "radius": 2, "amplitudes": [
            {"cell": 0, "coin": 3, "re": 1.0, "im": 0.0},
            {"cell": 0, "coin": 4, "re": 0.0, "im": 1.0}]}"#;
        let loaded = StateFile::from_json(text).unwrap().resolve().unwrap();
        assert!((loaded.normalization - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(loaded.state, crate::presets::Preset::Fig3b.state().unwrap());
    }

    #[test]
    fn parses_tail_arcs() {
        let text = r#"{"graph": "tilde-c4", "radius": 3, "amplitudes": [
            {"coin": "-1->-2", "re": 2.0, "im": 0.0}]}"#;
        let loaded = StateFile::from_json(text).unwrap().resolve().unwrap();
        assert_eq!(loaded.state, crate::presets::Preset::CaseI.state().unwrap());
        assert_eq!(loaded.normalization, 2.0);
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            "{",
            r#"{"graph": "c5", "radius": 1, "amplitudes": [{"coin": 1, "re": 1, "im": 0}]}"#,
            r#"{"graph": "c4-prime", "radius": 1, "amplitudes": [{"coin": 10, "re": 1, "im": 0}]}"#,
            r#"{"graph": "c4-prime", "radius": 1, "amplitudes": [{"coin": "1->2", "re": 1, "im": 0}]}"#,
            r#"{"graph": "c4-prime", "radius": 1, "amplitudes": [{"cell": 3, "coin": 1, "re": 1, "im": 0}]}"#,
            r#"{"graph": "c4-prime", "radius": 1, "amplitudes": []}"#,
            r#"{"graph": "tilde-c4", "radius": 1, "amplitudes": [{"coin": "0->1", "re": 1, "im": 0}]}"#,
            r#"{"graph": "tilde-c4", "radius": 1, "amplitudes": [{"coin": "1->3", "re": 1, "im": 0}]}"#,
            r#"{"graph": "tilde-c4", "radius": 1, "amplitudes": [{"cell": 1, "coin": 1, "re": 1, "im": 0}]}"#,
            r#"{"graph": "c4-prime", "radius": 1, "amplitudes": [{"coin": 1, "re": 1, "im": 0, "x": 1}]}"#,
        ] {
            let r = StateFile::from_json(text).and_then(|f| f.resolve());
            assert!(matches!(r, Err(Error::StateFile(_))), "{text}");
        }
    }

    proptest! {
        #[test]
        fn round_trip(
            entries in proptest::collection::btree_map((-3i64..=3, 0u8..10), (0.1f64..1.0, -1.0f64..1.0), 1..8)
        ) {
            let labels = entries
                .iter()
                .map(|(&(cell, coin), &(re, im))| (ArcLabel::Coin { cell, coin }, C64::new(re, im)))
                .collect();
            let (state, _) = InitialState::new(GraphKind::C4Prime, labels).unwrap();
            let file = StateFile::from_state(&state, 3);
            let back = StateFile::from_json(&file.to_json().unwrap()).unwrap().resolve().unwrap();
            prop_assert!((back.normalization - 1.0).abs() < 1e-12);
            prop_assert_eq!(back.state.entries().len(), state.entries().len());
            for ((la, a), (lb, b)) in state.entries().iter().zip(back.state.entries()) {
                prop_assert_eq!(la, lb);
                prop_assert!((a - b).norm() < 1e-15);
            }
        }
    }
}
