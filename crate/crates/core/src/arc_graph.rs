//! Finite windows of the two 4-cycle graphs as arc spaces, and the Grover
//! evolution acting on them.
//!
//! Both graphs share the same local picture: a 4-cycle on `{0', u, d, 0}`
//! whose two degree-3 vertices `0'` and `0` carry one extra edge each. On
//! `TildeC4` those extra edges lead into the half lines `-1, -2, ...` and
//! `1, 2, ...`; on `C4Prime` they are bridges to the neighbouring cells.
//!
//! Arcs `(a, b)` follow the convention `<δ_f, U δ_e> != 0` only when
//! `o(e) = t(f)`: the amplitude on `(a, b)` sits at `a` and its next move is
//! away from `b`.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result, C64};

/// Threshold above which amplitude on a leaky boundary arc counts as overflow.
pub const OVERFLOW_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphKind {
    /// The 4-cycle with two semi-infinite tails.
    TildeC4,
    /// The Z-periodic chain of 4-cycles joined by bridges.
    C4Prime,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::TildeC4 => "tilde-c4",
            GraphKind::C4Prime => "c4-prime",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "tilde-c4" => Some(GraphKind::TildeC4),
            "c4-prime" => Some(GraphKind::C4Prime),
            _ => None,
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the four vertices of a 4-cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    ZeroPrime,
    Up,
    Down,
    Zero,
}

impl Site {
    /// Ordering used by the Bloch matrices: `(0', u, d, 0)`.
    pub const ALL: [Site; 4] = [Site::ZeroPrime, Site::Up, Site::Down, Site::Zero];

    pub fn index(self) -> usize {
        match self {
            Site::ZeroPrime => 0,
            Site::Up => 1,
            Site::Down => 2,
            Site::Zero => 3,
        }
    }

    /// Degree in the infinite graph (the same on both graphs).
    pub fn degree(self) -> u8 {
        match self {
            Site::ZeroPrime | Site::Zero => 3,
            Site::Up | Site::Down => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Site::ZeroPrime => "0'",
            Site::Up => "u",
            Site::Down => "d",
            Site::Zero => "0",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    /// A cycle vertex; `cell` is always 0 on `TildeC4`.
    Cycle { cell: i64, site: Site },
    /// A half-line vertex `j != 0` of `TildeC4`.
    Tail(i64),
}

impl VertexId {
    pub fn cycle(cell: i64, site: Site) -> Self {
        VertexId::Cycle { cell, site }
    }

    /// Infinite-graph degree.
    pub fn degree(self) -> u8 {
        match self {
            VertexId::Cycle { site, .. } => site.degree(),
            VertexId::Tail(_) => 2,
        }
    }

    /// Position label `j` used by `X_t`: the tail coordinate, or the cell.
    pub fn position(self) -> i64 {
        match self {
            VertexId::Cycle { cell, .. } => cell,
            VertexId::Tail(j) => j,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Cycle { cell, site } => write!(f, "{}[{}]", site.label(), cell),
            VertexId::Tail(j) => write!(f, "{j}"),
        }
    }
}

/// Terminus of a local coin arc relative to its cell.
#[derive(Clone, Copy, Debug)]
enum LocalTarget {
    Site(Site),
    /// The extra edge at `0'`: tail `-1` or the `0` of the previous cell.
    Back,
    /// The extra edge at `0`: tail `1` or the `0'` of the next cell.
    Forward,
}

/// Origins and termini of the ten local coin states `|0> .. |9>`.
///
/// The cycle `c = (|2>, |4>, |8>, |6>) = ((0',u), (u,0), (0,d), (d,0'))` and
/// its reverse `c̄ = (|1>, |5>, |7>, |3>)`.
const COIN_TABLE: [(Site, LocalTarget); 10] = [
    (Site::ZeroPrime, LocalTarget::Back),
    (Site::ZeroPrime, LocalTarget::Site(Site::Down)),
    (Site::ZeroPrime, LocalTarget::Site(Site::Up)),
    (Site::Up, LocalTarget::Site(Site::ZeroPrime)),
    (Site::Up, LocalTarget::Site(Site::Zero)),
    (Site::Down, LocalTarget::Site(Site::Zero)),
    (Site::Down, LocalTarget::Site(Site::ZeroPrime)),
    (Site::Zero, LocalTarget::Site(Site::Up)),
    (Site::Zero, LocalTarget::Site(Site::Down)),
    (Site::Zero, LocalTarget::Forward),
];

/// Origin site of local coin state `coin`.
pub fn coin_origin(coin: u8) -> Site {
    COIN_TABLE[coin as usize].0
}

/// Local coin state reached by reversing `coin`, within the same cell when
/// the reversed arc lies in the cell. Bridges map `|0>` to `|9>` of the
/// previous cell and `|9>` to `|0>` of the next one.
pub fn coin_reverse(coin: u8) -> u8 {
    match coin {
        0 => 9,
        1 => 6,
        2 => 3,
        3 => 2,
        4 => 7,
        5 => 8,
        6 => 1,
        7 => 4,
        8 => 5,
        9 => 0,
        _ => panic!("coin label out of range: {coin}"),
    }
}

/// Coin labels of the oriented cycle `c` and of its reverse `c̄`.
pub const CYCLE_COINS: [u8; 4] = [2, 4, 8, 6];
pub const REVERSE_CYCLE_COINS: [u8; 4] = [1, 5, 7, 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub id: usize,
    pub origin: VertexId,
    pub terminus: VertexId,
    pub reverse: usize,
}

/// Label of an arc independent of any window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcLabel {
    /// Local coin state `coin` in `cell` (`cell = 0` on `TildeC4`).
    Coin { cell: i64, coin: u8 },
    /// A half-line arc `(from, to)` on `TildeC4`, both nonzero.
    Tail { from: i64, to: i64 },
}

/// Immutable finite window of one of the two graphs.
#[derive(Clone, Debug)]
pub struct ArcSpace {
    kind: GraphKind,
    radius: usize,
    vertices: Vec<VertexId>,
    vertex_index: HashMap<VertexId, usize>,
    /// `arc_start[v]..arc_start[v + 1]` are the arcs with origin `v`.
    arc_start: Vec<usize>,
    arcs: Vec<Arc>,
    origin_vertex: Vec<usize>,
    reverse: Vec<usize>,
    /// `2 / deg(v)` in the infinite graph.
    coin_weight: Vec<f64>,
    labels: Vec<ArcLabel>,
    label_index: HashMap<ArcLabel, usize>,
    /// Arcs leaving vertices whose window degree is below their true degree.
    leaky: Vec<usize>,
}

impl ArcSpace {
    /// Builds the window of the given radius: tail vertices `±1..±N` for
    /// `TildeC4`, cells `-J..=J` for `C4Prime`. Only complete edges are kept.
    pub fn build(kind: GraphKind, radius: usize) -> Result<Self> {
        if radius == 0 && kind == GraphKind::TildeC4 {
            return Err(Error::InvalidRadius(radius));
        }
        let r = radius as i64;
        let mut vertices = Vec::new();
        match kind {
            GraphKind::TildeC4 => {
                vertices.extend((1..=r).rev().map(|j| VertexId::Tail(-j)));
                vertices.extend(Site::ALL.iter().map(|&s| VertexId::cycle(0, s)));
                vertices.extend((1..=r).map(VertexId::Tail));
            }
            GraphKind::C4Prime => {
                for cell in -r..=r {
                    vertices.extend(Site::ALL.iter().map(|&s| VertexId::cycle(cell, s)));
                }
            }
        }
        let vertex_index: HashMap<VertexId, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

        let mut arc_start = Vec::with_capacity(vertices.len() + 1);
        let mut pending: Vec<(VertexId, VertexId, ArcLabel)> = Vec::new();
        let mut leaky_vertices = Vec::new();
        for &v in &vertices {
            arc_start.push(pending.len());
            let before = pending.len();
            for (from, to, label) in outgoing(kind, v) {
                if vertex_index.contains_key(&to) {
                    pending.push((from, to, label));
                }
            }
            if pending.len() - before < v.degree() as usize {
                leaky_vertices.push(v);
            }
        }
        arc_start.push(pending.len());

        let by_ends: HashMap<(VertexId, VertexId), usize> = pending
            .iter()
            .enumerate()
            .map(|(i, &(o, t, _))| ((o, t), i))
            .collect();
        let mut arcs = Vec::with_capacity(pending.len());
        let mut labels = Vec::with_capacity(pending.len());
        for (id, &(origin, terminus, label)) in pending.iter().enumerate() {
            let reverse = by_ends[&(terminus, origin)];
            arcs.push(Arc {
                id,
                origin,
                terminus,
                reverse,
            });
            labels.push(label);
        }
        let origin_vertex = arcs.iter().map(|a| vertex_index[&a.origin]).collect();
        let reverse = arcs.iter().map(|a| a.reverse).collect();
        let coin_weight = vertices.iter().map(|v| 2.0 / v.degree() as f64).collect();
        let label_index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let leaky = arcs
            .iter()
            .filter(|a| leaky_vertices.contains(&a.origin))
            .map(|a| a.id)
            .collect();

        Ok(ArcSpace {
            kind,
            radius,
            vertices,
            vertex_index,
            arc_start,
            arcs,
            origin_vertex,
            reverse,
            coin_weight,
            labels,
            label_index,
            leaky,
        })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &Arc {
        &self.arcs[id]
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: VertexId) -> Option<usize> {
        self.vertex_index.get(&v).copied()
    }

    /// Degree of `v` in the infinite graph (the degree the coin uses).
    pub fn degree(&self, v: VertexId) -> u8 {
        v.degree()
    }

    pub fn reverse(&self, id: usize) -> usize {
        self.reverse[id]
    }

    pub fn label(&self, id: usize) -> ArcLabel {
        self.labels[id]
    }

    pub fn find(&self, label: ArcLabel) -> Option<usize> {
        self.label_index.get(&label).copied()
    }

    /// Arc carrying local coin state `coin` of `cell`.
    pub fn coin_arc(&self, cell: i64, coin: u8) -> Option<usize> {
        self.find(ArcLabel::Coin { cell, coin })
    }

    /// Arc from `origin` to `terminus`, if both ends lie in the window.
    pub fn arc_between(&self, origin: VertexId, terminus: VertexId) -> Option<usize> {
        let v = self.vertex_index(origin)?;
        (self.arc_start[v]..self.arc_start[v + 1]).find(|&a| self.arcs[a].terminus == terminus)
    }

    /// Arcs whose origin is `v`.
    pub fn arcs_from(&self, v: usize) -> std::ops::Range<usize> {
        self.arc_start[v]..self.arc_start[v + 1]
    }

    /// Vertex index of the origin of `arc`.
    pub fn origin_index(&self, arc: usize) -> usize {
        self.origin_vertex[arc]
    }

    /// Cells present in the window (`[0]` for `TildeC4`).
    pub fn cells(&self) -> Vec<i64> {
        match self.kind {
            GraphKind::TildeC4 => vec![0],
            GraphKind::C4Prime => (-(self.radius as i64)..=self.radius as i64).collect(),
        }
    }

    /// Arcs whose amplitude would leave the window on the next step.
    pub fn leaky_arcs(&self) -> &[usize] {
        &self.leaky
    }

    /// `<δ_f, U δ_e> = (2 / deg o(e) - [e = f̄]) · [o(e) = t(f)]`.
    pub fn grover_matrix_element(&self, f: usize, e: usize) -> f64 {
        let (fa, ea) = (&self.arcs[f], &self.arcs[e]);
        if ea.origin != fa.terminus {
            return 0.0;
        }
        let back = if ea.reverse == f { 1.0 } else { 0.0 };
        2.0 / ea.origin.degree() as f64 - back
    }

    /// Writes `U ψ` into `out`.
    ///
    /// For every vertex `v` with incoming amplitude sum `S_v`, each arc `e`
    /// leaving `v` feeds `(Uψ)(ē) = (2/deg v) S_v - ψ(e)`.
    pub fn evolve_into(&self, input: &[C64], out: &mut [C64]) -> Result<()> {
        assert_eq!(input.len(), self.arcs.len());
        assert_eq!(out.len(), self.arcs.len());
        if let Some(&arc) = self
            .leaky
            .iter()
            .find(|&&a| input[a].norm() > OVERFLOW_TOLERANCE)
        {
            return Err(Error::WindowOverflow {
                step: None,
                vertex: self.arcs[arc].origin.to_string(),
            });
        }
        for v in 0..self.vertices.len() {
            let range = self.arc_start[v]..self.arc_start[v + 1];
            let sum: C64 = input[range.clone()].iter().sum();
            let scaled = sum * self.coin_weight[v];
            for e in range {
                out[self.reverse[e]] = scaled - input[e];
            }
        }
        Ok(())
    }
}

/// All arcs leaving `v` in the infinite graph, in coin order for cycle
/// vertices and inward-first for tail vertices.
fn outgoing(kind: GraphKind, v: VertexId) -> Vec<(VertexId, VertexId, ArcLabel)> {
    match v {
        VertexId::Cycle { cell, site } => COIN_TABLE
            .iter()
            .enumerate()
            .filter(|(_, (origin, _))| *origin == site)
            .map(|(coin, &(_, target))| {
                let to = match (kind, target) {
                    (_, LocalTarget::Site(s)) => VertexId::cycle(cell, s),
                    (GraphKind::TildeC4, LocalTarget::Back) => VertexId::Tail(-1),
                    (GraphKind::TildeC4, LocalTarget::Forward) => VertexId::Tail(1),
                    (GraphKind::C4Prime, LocalTarget::Back) => {
                        VertexId::cycle(cell - 1, Site::Zero)
                    }
                    (GraphKind::C4Prime, LocalTarget::Forward) => {
                        VertexId::cycle(cell + 1, Site::ZeroPrime)
                    }
                };
                (
                    v,
                    to,
                    ArcLabel::Coin {
                        cell,
                        coin: coin as u8,
                    },
                )
            })
            .collect(),
        VertexId::Tail(j) => {
            let step = j.signum();
            let inward = if j.abs() == 1 {
                let site = if j < 0 { Site::ZeroPrime } else { Site::Zero };
                VertexId::cycle(0, site)
            } else {
                VertexId::Tail(j - step)
            };
            let outward = VertexId::Tail(j + step);
            [inward, outward]
                .into_iter()
                .map(|to| {
                    let label = match to {
                        VertexId::Tail(t) => ArcLabel::Tail { from: j, to: t },
                        VertexId::Cycle { .. } => ArcLabel::Tail { from: j, to: 0 },
                    };
                    (v, to, label)
                })
                .collect()
        }
    }
}

/// Unit-norm amplitude vector over the arcs of a window at time `t`.
#[derive(Clone, Debug)]
pub struct WalkState<'a> {
    space: &'a ArcSpace,
    time: usize,
    amplitudes: Vec<C64>,
}

impl<'a> WalkState<'a> {
    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn new(space: &'a ArcSpace, amplitudes: Vec<C64>) -> Result<Self> {
        Self::normalized(space, amplitudes).map(|(s, _)| s)
    }

    /// Like [`WalkState::new`], also returning the norm before scaling.
    pub fn normalized(space: &'a ArcSpace, mut amplitudes: Vec<C64>) -> Result<(Self, f64)> {
        if amplitudes.len() != space.num_arcs() {
            return Err(Error::InvalidState(format!(
                "expected {} amplitudes, got {}",
                space.num_arcs(),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState(
                "state has zero or non-finite norm".into(),
            ));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok((
            WalkState {
                space,
                time: 0,
                amplitudes,
            },
            norm,
        ))
    }

    /// Unit vector on a single arc.
    pub fn delta(space: &'a ArcSpace, arc: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); space.num_arcs()];
        amplitudes[arc] = C64::new(1.0, 0.0);
        WalkState {
            space,
            time: 0,
            amplitudes,
        }
    }

    pub fn space(&self) -> &'a ArcSpace {
        self.space
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Advances one step in place, reusing `scratch` as the output buffer.
    pub fn step_with(&mut self, scratch: &mut Vec<C64>) -> Result<()> {
        scratch.resize(self.amplitudes.len(), C64::new(0.0, 0.0));
        self.space
            .evolve_into(&self.amplitudes, scratch)
            .map_err(|e| e.at_step(self.time + 1))?;
        std::mem::swap(&mut self.amplitudes, scratch);
        self.time += 1;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let mut scratch = Vec::new();
        self.step_with(&mut scratch)
    }
}

/// `U ψ` as a new state at time `t + 1`.
pub fn apply_evolution<'a>(psi: &WalkState<'a>) -> Result<WalkState<'a>> {
    let mut next = psi.clone();
    next.step()?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn arc_counts() {
        let s = ArcSpace::build(GraphKind::TildeC4, 1).unwrap();
        assert_eq!(s.num_arcs(), 12);
        let s = ArcSpace::build(GraphKind::TildeC4, 5).unwrap();
        assert_eq!(s.num_arcs(), 8 + 4 * 5);
        let s = ArcSpace::build(GraphKind::C4Prime, 0).unwrap();
        assert_eq!(s.num_arcs(), 8);
        let s = ArcSpace::build(GraphKind::C4Prime, 2).unwrap();
        assert_eq!(s.num_arcs(), 48);
    }

    #[test]
    fn rejects_zero_radius() {
        assert!(matches!(
            ArcSpace::build(GraphKind::TildeC4, 0),
            Err(Error::InvalidRadius(0))
        ));
    }

    #[test]
    fn degree_three_exactly_at_zero_and_zero_prime() {
        let s = ArcSpace::build(GraphKind::TildeC4, 3).unwrap();
        let threes: Vec<_> = s.vertices().iter().filter(|v| v.degree() == 3).collect();
        assert_eq!(threes.len(), 2);
        let s = ArcSpace::build(GraphKind::C4Prime, 3).unwrap();
        for v in s.vertices() {
            let VertexId::Cycle { site, .. } = v else {
                panic!()
            };
            let expect = matches!(site, Site::Zero | Site::ZeroPrime);
            assert_eq!(v.degree() == 3, expect);
        }
    }

    #[test]
    fn reversal_invariants() {
        for (kind, r) in [(GraphKind::TildeC4, 4), (GraphKind::C4Prime, 3)] {
            let s = ArcSpace::build(kind, r).unwrap();
            for a in s.arcs() {
                assert_ne!(a.reverse, a.id);
                assert_eq!(s.arc(a.reverse).reverse, a.id);
                assert_eq!(s.arc(a.reverse).origin, a.terminus);
            }
        }
    }

    #[test]
    fn coin_labels_match_cycle() {
        let s = ArcSpace::build(GraphKind::C4Prime, 1).unwrap();
        for cell in -1..=1 {
            let cyc: Vec<_> = CYCLE_COINS
                .iter()
                .map(|&c| s.arc(s.coin_arc(cell, c).unwrap()))
                .collect();
            for w in 0..4 {
                assert_eq!(cyc[w].terminus, cyc[(w + 1) % 4].origin);
            }
            assert_eq!(cyc[0].origin, VertexId::cycle(cell, Site::ZeroPrime));
            assert_eq!(cyc[0].terminus, VertexId::cycle(cell, Site::Up));
            for coin in 0..10u8 {
                if let Some(a) = s.coin_arc(cell, coin) {
                    let rev = s.label(s.reverse(a));
                    let expect_cell = match coin {
                        0 => cell - 1,
                        9 => cell + 1,
                        _ => cell,
                    };
                    assert_eq!(
                        rev,
                        ArcLabel::Coin {
                            cell: expect_cell,
                            coin: coin_reverse(coin)
                        }
                    );
                }
            }
        }
        // bridges leaving the window are absent
        assert!(s.coin_arc(-1, 0).is_none());
        assert!(s.coin_arc(1, 9).is_none());
    }

    #[test]
    fn matrix_elements() {
        let s = ArcSpace::build(GraphKind::TildeC4, 4).unwrap();
        let t = |a: i64, b: i64| s.find(ArcLabel::Tail { from: a, to: b }).unwrap();
        // walker at 2 that came from 3 continues to 1
        assert_eq!(s.grover_matrix_element(t(1, 2), t(2, 3)), 1.0);
        assert_eq!(s.grover_matrix_element(t(3, 2), t(2, 3)), 0.0);
        let e = s.coin_arc(0, 0).unwrap(); // (0', -1)
        let back = s.reverse(e);
        assert!((s.grover_matrix_element(back, e) + 1.0 / 3.0).abs() < 1e-15);
        let up_in = s.coin_arc(0, 3).unwrap(); // (u, 0')
        assert!((s.grover_matrix_element(up_in, e) - 2.0 / 3.0).abs() < 1e-15);
        // not adjacent
        assert_eq!(s.grover_matrix_element(t(3, 4), e), 0.0);
    }

    #[test]
    fn tail_transparency() {
        let s = ArcSpace::build(GraphKind::TildeC4, 6).unwrap();
        let t = |a: i64, b: i64| s.find(ArcLabel::Tail { from: a, to: b }).unwrap();
        let next = apply_evolution(&WalkState::delta(&s, t(2, 1))).unwrap();
        assert_eq!(next.amplitudes()[t(3, 2)], c(1.0));
        let next = apply_evolution(&WalkState::delta(&s, t(1, 2))).unwrap();
        let into_zero = s.coin_arc(0, 9).unwrap();
        assert_eq!(next.amplitudes()[into_zero], c(1.0));
    }

    #[test]
    fn overflow_detected() {
        let s = ArcSpace::build(GraphKind::TildeC4, 3).unwrap();
        let t = |a: i64, b: i64| s.find(ArcLabel::Tail { from: a, to: b }).unwrap();
        let mut psi = WalkState::delta(&s, t(1, 0));
        psi.step().unwrap();
        psi.step().unwrap();
        match psi.step() {
            Err(Error::WindowOverflow { step: Some(3), .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn grover_rows_are_unit_vectors() {
        let s = ArcSpace::build(GraphKind::C4Prime, 1).unwrap();
        for f in 0..s.num_arcs() {
            let t = s.arc(f).terminus;
            if s.arcs().iter().filter(|e| e.origin == t).count() < t.degree() as usize {
                continue;
            }
            let row: f64 = (0..s.num_arcs())
                .map(|e| s.grover_matrix_element(f, e).powi(2))
                .sum();
            assert!((row - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn evolve_matches_matrix_elements() {
        let s = ArcSpace::build(GraphKind::C4Prime, 1).unwrap();
        let n = s.num_arcs();
        let psi: Vec<C64> = (0..n)
            .map(|i| {
                let interior = !s.leaky_arcs().contains(&i);
                if interior {
                    C64::new((i as f64).sin(), (i as f64 * 0.3).cos())
                } else {
                    c(0.0)
                }
            })
            .collect();
        let mut out = vec![c(0.0); n];
        s.evolve_into(&psi, &mut out).unwrap();
        for f in 0..n {
            let expect: C64 = (0..n).map(|e| psi[e] * s.grover_matrix_element(f, e)).sum();
            assert!((out[f] - expect).norm() < 1e-14);
        }
    }
}
