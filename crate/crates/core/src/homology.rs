//! Cycle eigenvectors of the Grover walk and the trapped mass.
//!
//! For the oriented 4-cycle `c` of a cell and its reverse `c̄`, the vector
//! `w_m(c) - w_m(c̄)` with `w_m(p) = Σ_j e^{2πimj/n} δ_{e_j}` is an
//! eigenvector of `U` with eigenvalue `i^m`. Their span over all cells is
//! exactly the point spectrum; the squared projection of the initial state
//! onto it is the mass `Δ` that never leaves.

use std::f64::consts::PI;

use serde::Serialize;

use crate::arc_graph::{ArcSpace, WalkState, CYCLE_COINS};
use crate::evolution::LemmaCoefficients;
use crate::{Error, Result, C64};

/// `Δ > LOCALIZATION_TOLERANCE` counts as localization.
pub const LOCALIZATION_TOLERANCE: f64 = 1e-12;

/// `Σ_{j=1}^n e^{2πimj/n} δ_{e_j}` for a closed path of arcs.
pub fn path_functional(space: &ArcSpace, path: &[usize], m: i64) -> Result<Vec<C64>> {
    check_closed_path(space, path)?;
    let n = path.len();
    let mut out = vec![C64::new(0.0, 0.0); space.num_arcs()];
    for (pos, &arc) in path.iter().enumerate() {
        let j = (pos + 1) as f64;
        out[arc] += C64::from_polar(1.0, 2.0 * PI * m as f64 * j / n as f64);
    }
    Ok(out)
}

/// The inverse closed path: arcs reversed and traversed in reverse order.
pub fn reverse_path(space: &ArcSpace, path: &[usize]) -> Vec<usize> {
    path.iter().rev().map(|&a| space.reverse(a)).collect()
}

fn check_closed_path(space: &ArcSpace, path: &[usize]) -> Result<()> {
    if path.is_empty() {
        return Err(Error::InvalidPath("empty path".into()));
    }
    for (i, &a) in path.iter().enumerate() {
        if a >= space.num_arcs() {
            return Err(Error::InvalidPath(format!("arc {a} outside the window")));
        }
        let next = path[(i + 1) % path.len()];
        if next >= space.num_arcs() || space.arc(a).terminus != space.arc(next).origin {
            return Err(Error::InvalidPath(format!(
                "arc {} does not continue into arc {}",
                i,
                (i + 1) % path.len()
            )));
        }
    }
    Ok(())
}

/// Normalized `(1/√8)(w_m(c_j) - w_m(c̄_j))`, stored sparsely.
#[derive(Clone, Debug)]
pub struct CycleFunctional {
    m: u8,
    cell: i64,
    entries: Vec<(usize, C64)>,
}

impl CycleFunctional {
    pub fn new(space: &ArcSpace, cell: i64, m: u8) -> Result<Self> {
        if m > 3 {
            return Err(Error::InvalidArgument(format!("m must be 0..=3, got {m}")));
        }
        let cycle: Vec<usize> = CYCLE_COINS
            .iter()
            .map(|&coin| {
                space
                    .coin_arc(cell, coin)
                    .ok_or_else(|| Error::InvalidArgument(format!("cell {cell} not in window")))
            })
            .collect::<Result<_>>()?;
        let forward = path_functional(space, &cycle, m as i64)?;
        let backward = path_functional(space, &reverse_path(space, &cycle), m as i64)?;
        let scale = 1.0 / 8f64.sqrt();
        let entries = forward
            .iter()
            .zip(&backward)
            .enumerate()
            .filter_map(|(i, (f, b))| {
                let v = (f - b) * scale;
                (v.norm_sqr() > 0.0).then_some((i, v))
            })
            .collect();
        Ok(CycleFunctional { m, cell, entries })
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn cell(&self) -> i64 {
        self.cell
    }

    pub fn entries(&self) -> &[(usize, C64)] {
        &self.entries
    }

    /// Eigenvalue `i^m`.
    pub fn eigenvalue(&self) -> C64 {
        C64::i().powu(self.m as u32)
    }

    /// `<η, ψ>`, antilinear in `η`.
    pub fn overlap(&self, psi: &[C64]) -> C64 {
        self.entries.iter().map(|&(i, v)| v.conj() * psi[i]).sum()
    }

    pub fn dense(&self, len: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); len];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn to_state<'a>(&self, space: &'a ArcSpace) -> WalkState<'a> {
        WalkState::new(space, self.dense(space.num_arcs())).expect("cycle functional is normalized")
    }
}

/// All `η_{m;j}` for `m ∈ 0..4` and every cell of the window.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    functionals: Vec<CycleFunctional>,
}

impl HomologyBasis {
    pub fn new(space: &ArcSpace) -> Result<Self> {
        let mut functionals = Vec::new();
        for cell in space.cells() {
            for m in 0..4 {
                functionals.push(CycleFunctional::new(space, cell, m)?);
            }
        }
        Ok(HomologyBasis { functionals })
    }

    pub fn iter(&self) -> impl Iterator<Item = &CycleFunctional> {
        self.functionals.iter()
    }

    pub fn get(&self, m: u8, cell: i64) -> Option<&CycleFunctional> {
        self.functionals.iter().find(|f| f.m == m && f.cell == cell)
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Overlap {
    pub m: u8,
    pub cell: i64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Projection {
    pub delta: f64,
    pub overlaps: Vec<Overlap>,
}

/// `Δ = Σ_j Σ_m |<η_{m;j}, ψ>|²` together with every nonzero term.
pub fn homological_projection(psi: &WalkState<'_>) -> Result<Projection> {
    let basis = HomologyBasis::new(psi.space())?;
    Ok(project(&basis, psi.amplitudes()))
}

/// Overlaps below this are rounding noise and are not reported.
const NEGLIGIBLE_WEIGHT: f64 = 1e-30;

pub fn project(basis: &HomologyBasis, psi: &[C64]) -> Projection {
    let overlaps: Vec<Overlap> = basis
        .iter()
        .map(|f| Overlap {
            m: f.m,
            cell: f.cell,
            weight: f.overlap(psi).norm_sqr(),
        })
        .filter(|o| o.weight > NEGLIGIBLE_WEIGHT)
        .collect();
    let delta = overlaps.iter().map(|o| o.weight).sum();
    Projection { delta, overlaps }
}

/// Whether any mass stays trapped, with the trapped mass `Δ`.
pub fn localization_predicate(psi: &WalkState<'_>) -> Result<(bool, f64)> {
    let p = homological_projection(psi)?;
    Ok((p.delta > LOCALIZATION_TOLERANCE, p.delta))
}

/// `‖Π_{Γ_m} Ψ_0‖²` for a state on the ten fundamental arcs of the tailed
/// cycle, where `Γ_m` is the eigenspace of eigenvalue `i^m`:
/// `(1/8)|(a2-a1) + i^{-m}(a4-a5) + i^{-2m}(a8-a7) + i^{-3m}(a6-a3)|²`.
pub fn cell_projector_formula(coeffs: &LemmaCoefficients, m: u8) -> f64 {
    let a = |i: usize| coeffs.get(i);
    let diffs = [a(2) - a(1), a(4) - a(5), a(8) - a(7), a(6) - a(3)];
    let phase = C64::i().powu(((4 - m as u32 % 4) % 4) as u32);
    let mut acc = C64::new(0.0, 0.0);
    let mut w = C64::new(1.0, 0.0);
    for d in diffs {
        acc += w * d;
        w *= phase;
    }
    acc.norm_sqr() / 8.0
}

/// `ψ_0 = (a2-a1, a4-a5, a8-a7, a6-a3)`; half its squared norm is the
/// total trapped mass.
pub fn cycle_difference_vector(coeffs: &LemmaCoefficients) -> [C64; 4] {
    let a = |i: usize| coeffs.get(i);
    [a(2) - a(1), a(4) - a(5), a(8) - a(7), a(6) - a(3)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc_graph::{ArcLabel, GraphKind};

    fn tilde() -> ArcSpace {
        ArcSpace::build(GraphKind::TildeC4, 4).unwrap()
    }

    fn cycle(space: &ArcSpace) -> Vec<usize> {
        CYCLE_COINS
            .iter()
            .map(|&c| space.coin_arc(0, c).unwrap())
            .collect()
    }

    #[test]
    fn path_functional_phases() {
        let s = tilde();
        let c = cycle(&s);
        let w0 = path_functional(&s, &c, 0).unwrap();
        for &a in &c {
            assert!((w0[a] - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(w0.iter().filter(|z| z.norm() > 0.0).count(), 4);

        let w2 = path_functional(&s, &c, 2).unwrap();
        let expect = [-1.0, 1.0, -1.0, 1.0];
        for (&a, e) in c.iter().zip(expect) {
            assert!((w2[a] - C64::new(e, 0.0)).norm() < 1e-15);
        }

        let w1 = path_functional(&s, &c, 1).unwrap();
        let expect = [C64::i(), C64::new(-1.0, 0.0), -C64::i(), C64::new(1.0, 0.0)];
        for (&a, e) in c.iter().zip(expect) {
            assert!((w1[a] - e).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_open_path() {
        let s = tilde();
        let c = cycle(&s);
        assert!(matches!(
            path_functional(&s, &c[..3], 0),
            Err(Error::InvalidPath(_))
        ));
        let tail = s.find(ArcLabel::Tail { from: 2, to: 3 }).unwrap();
        assert!(path_functional(&s, &[c[0], tail], 1).is_err());
    }

    #[test]
    fn reverse_cycle_coins() {
        let s = tilde();
        let rev = reverse_path(&s, &cycle(&s));
        let coins: Vec<_> = rev
            .iter()
            .map(|&a| match s.label(a) {
                ArcLabel::Coin { coin, .. } => coin,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(coins, crate::arc_graph::REVERSE_CYCLE_COINS);
    }

    #[test]
    fn eigen_residuals_and_orthonormality() {
        for space in [tilde(), ArcSpace::build(GraphKind::C4Prime, 3).unwrap()] {
            let basis = HomologyBasis::new(&space).unwrap();
            let n = space.num_arcs();
            for f in basis.iter() {
                // boundary cells of the periodic window touch leaky arcs
                if space.kind() == GraphKind::C4Prime && f.cell().unsigned_abs() == 3 {
                    continue;
                }
                let v = f.dense(n);
                let mut out = vec![C64::new(0.0, 0.0); n];
                space.evolve_into(&v, &mut out).unwrap();
                let res: f64 = out
                    .iter()
                    .zip(&v)
                    .map(|(u, x)| (u - f.eigenvalue() * x).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-12, "m={} cell={} residual {res}", f.m(), f.cell());
                for g in basis.iter() {
                    let ip = g.overlap(&v);
                    let expect = if g.m() == f.m() && g.cell() == f.cell() {
                        1.0
                    } else {
                        0.0
                    };
                    assert!((ip - C64::new(expect, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn delta_examples() {
        let s = ArcSpace::build(GraphKind::C4Prime, 6).unwrap();
        let mut a = vec![C64::new(0.0, 0.0); s.num_arcs()];
        for coin in [7, 8, 9] {
            a[s.coin_arc(0, coin).unwrap()] = C64::new(1.0, 0.0);
        }
        let p = homological_projection(&WalkState::new(&s, a).unwrap()).unwrap();
        assert!(p.delta < 1e-14);

        let mut a = vec![C64::new(0.0, 0.0); s.num_arcs()];
        a[s.coin_arc(0, 3).unwrap()] = C64::new(1.0, 0.0);
        a[s.coin_arc(0, 4).unwrap()] = C64::new(0.0, 1.0);
        let p = homological_projection(&WalkState::new(&s, a).unwrap()).unwrap();
        assert!((p.delta - 0.5).abs() < 1e-12);

        let basis = HomologyBasis::new(&s).unwrap();
        let eta = basis.get(3, 5).unwrap().to_state(&s);
        let p = homological_projection(&eta).unwrap();
        assert!((p.delta - 1.0).abs() < 1e-14);
        assert_eq!(p.overlaps.len(), 1);
        assert_eq!((p.overlaps[0].m, p.overlaps[0].cell), (3, 5));
    }

    #[test]
    fn localization_examples() {
        let s = ArcSpace::build(GraphKind::TildeC4, 6).unwrap();
        let tail = s.find(ArcLabel::Tail { from: -3, to: -4 }).unwrap();
        let (loc, _) = localization_predicate(&WalkState::delta(&s, tail)).unwrap();
        assert!(!loc);

        let psi = LemmaCoefficients::unit(1).state(&s).unwrap();
        let (loc, delta) = localization_predicate(&psi).unwrap();
        assert!(loc);
        assert!((delta - 0.5).abs() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = [C64::new(0.0, 0.0); 10];
        a[1] = C64::new(h, 0.0);
        a[2] = C64::new(h, 0.0);
        let psi = LemmaCoefficients::new(a).unwrap().state(&s).unwrap();
        let (loc, delta) = localization_predicate(&psi).unwrap();
        assert!(!loc, "delta {delta}");
    }

    #[test]
    fn projector_formula_examples() {
        for m in 0..4 {
            assert!((cell_projector_formula(&LemmaCoefficients::unit(2), m) - 0.125).abs() < 1e-15);
        }
        let a4 = LemmaCoefficients::unit(4);
        assert!((cell_projector_formula(&a4, 0) - 0.125).abs() < 1e-15);
        assert!((cell_projector_formula(&a4, 2) - 0.125).abs() < 1e-15);
    }
}
