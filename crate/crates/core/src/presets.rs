//! Initial states given by arc labels, independent of any window, and the
//! named states used throughout the analysis.

use std::fmt;
use std::str::FromStr;

use crate::arc_graph::{ArcLabel, ArcSpace, GraphKind, WalkState};
use crate::evolution::required_radius;
use crate::spectral::CellState;
use crate::{Error, Result, C64};

/// A normalized, finitely supported state described by arc labels.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    kind: GraphKind,
    entries: Vec<(ArcLabel, C64)>,
}

fn label_radius(label: ArcLabel) -> usize {
    match label {
        ArcLabel::Coin { cell, .. } => cell.unsigned_abs() as usize,
        ArcLabel::Tail { from, to } => from.unsigned_abs().max(to.unsigned_abs()) as usize,
    }
}

impl InitialState {
    /// Normalizes the amplitudes and returns the state with its prior norm.
    ///
    /// Labels must name distinct arcs of `kind`.
    pub fn new(kind: GraphKind, entries: Vec<(ArcLabel, C64)>) -> Result<(Self, f64)> {
        if entries
            .iter()
            .any(|(_, a)| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let radius = entries
            .iter()
            .map(|&(l, _)| label_radius(l))
            .max()
            .unwrap_or(0)
            + 1;
        let probe = ArcSpace::build(kind, radius)?;
        let mut seen = std::collections::HashSet::new();
        for &(label, _) in &entries {
            let id = probe
                .find(label)
                .ok_or_else(|| Error::InvalidState(format!("{label:?} is not an arc of {kind}")))?;
            if !seen.insert(id) {
                return Err(Error::InvalidState(format!("{label:?} listed twice")));
            }
        }
        let norm = entries
            .iter()
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("initial state has zero norm".into()));
        }
        let entries = entries.into_iter().map(|(l, a)| (l, a / norm)).collect();
        Ok((InitialState { kind, entries }, norm))
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn entries(&self) -> &[(ArcLabel, C64)] {
        &self.entries
    }

    /// Largest cell or tail coordinate touched by the state.
    pub fn support_radius(&self) -> usize {
        self.entries
            .iter()
            .map(|&(l, _)| label_radius(l))
            .max()
            .unwrap_or(0)
    }

    /// A window that holds `t_max` steps without overflow.
    pub fn window(&self, t_max: usize) -> Result<ArcSpace> {
        ArcSpace::build(self.kind, required_radius(t_max, self.support_radius()))
    }

    pub fn embed<'a>(&self, space: &'a ArcSpace) -> Result<WalkState<'a>> {
        if space.kind() != self.kind {
            return Err(Error::InvalidState(format!(
                "state lives on {}, window is {}",
                self.kind,
                space.kind()
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); space.num_arcs()];
        for &(label, a) in &self.entries {
            let id = space
                .find(label)
                .ok_or_else(|| Error::InvalidState(format!("{label:?} outside the window")))?;
            amps[id] = a;
        }
        WalkState::new(space, amps)
    }

    pub fn cell_state(&self) -> Result<CellState> {
        if self.kind != GraphKind::C4Prime {
            return Err(Error::InvalidArgument(
                "Bloch analysis needs the periodic chain".into(),
            ));
        }
        let mut out = CellState::new();
        for &(label, a) in &self.entries {
            if let ArcLabel::Coin { cell, coin } = label {
                out.set(cell, coin, a);
            }
        }
        Ok(out)
    }

    /// The ten-coin state of cell 0 of `kind`.
    pub fn from_coins(kind: GraphKind, coins: &[(u8, C64)]) -> Result<Self> {
        let entries = coins
            .iter()
            .map(|&(coin, a)| (ArcLabel::Coin { cell: 0, coin }, a))
            .collect();
        Ok(Self::new(kind, entries)?.0)
    }
}

/// Named initial conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Tailed cycle, walker on the left tail heading for the cycle.
    CaseI,
    /// Tailed cycle, walker on the cycle arc `(0', u)`.
    CaseII,
    /// Periodic chain, `(|7> + |8> + |9>)/√3` in cell 0.
    Fig3a,
    /// Periodic chain, `(|3> + i|4>)/√2` in cell 0.
    Fig3b,
    /// Periodic chain, one of the ten coins of cell 0 chosen uniformly.
    Uniform,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::CaseI,
        Preset::CaseII,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CaseI => "case-i",
            Preset::CaseII => "case-ii",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Uniform => "uniform",
        }
    }

    pub fn graph(self) -> GraphKind {
        match self {
            Preset::CaseI | Preset::CaseII => GraphKind::TildeC4,
            _ => GraphKind::C4Prime,
        }
    }

    /// The state with probability weights; a single state unless uniform.
    pub fn ensemble(self) -> Vec<(f64, InitialState)> {
        let one = C64::new(1.0, 0.0);
        let single = |s: Result<InitialState>| vec![(1.0, s.expect("preset states are valid"))];
        match self {
            Preset::CaseI => single(
                InitialState::new(
                    GraphKind::TildeC4,
                    vec![(ArcLabel::Tail { from: -1, to: -2 }, one)],
                )
                .map(|s| s.0),
            ),
            Preset::CaseII => single(InitialState::from_coins(GraphKind::TildeC4, &[(2, one)])),
            Preset::Fig3a => single(InitialState::from_coins(
                GraphKind::C4Prime,
                &[(7, one), (8, one), (9, one)],
            )),
            Preset::Fig3b => single(InitialState::from_coins(
                GraphKind::C4Prime,
                &[(3, one), (4, C64::i())],
            )),
            Preset::Uniform => (0..10u8)
                .map(|coin| {
                    let s = InitialState::from_coins(GraphKind::C4Prime, &[(coin, one)]);
                    (0.1, s.expect("single coins are valid"))
                })
                .collect(),
        }
    }

    /// The single state of a non-ensemble preset.
    pub fn state(self) -> Option<InitialState> {
        match self {
            Preset::Uniform => None,
            p => p.ensemble().pop().map(|(_, s)| s),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {s:?}")))
    }
}
