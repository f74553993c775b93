//! Running the walk: vertex and position distributions, scattering rates on
//! the tailed cycle, and the closed-form single-site probabilities that serve
//! as an independent oracle for the stepping kernel.

use std::collections::BTreeMap;

use crate::arc_graph::{ArcSpace, GraphKind, Site, VertexId, WalkState};
use crate::{Error, Result, C64};

/// Probability `μ_t(v) = Σ_{o(e)=v} |ψ(e)|²`, indexed like `space.vertices()`.
#[derive(Clone, Debug)]
pub struct VertexDistribution<'a> {
    space: &'a ArcSpace,
    probs: Vec<f64>,
}

impl VertexDistribution<'_> {
    pub fn get(&self, v: VertexId) -> f64 {
        self.space.vertex_index(v).map_or(0.0, |i| self.probs[i])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mass on the four cycle vertices of `cell`.
    pub fn cycle_mass(&self, cell: i64) -> f64 {
        Site::ALL
            .iter()
            .map(|&s| self.get(VertexId::cycle(cell, s)))
            .sum()
    }
}

pub fn vertex_distribution<'a>(psi: &WalkState<'a>) -> VertexDistribution<'a> {
    let space = psi.space();
    let amps = psi.amplitudes();
    let probs = (0..space.vertices().len())
        .map(|v| space.arcs_from(v).map(|a| amps[a].norm_sqr()).sum())
        .collect();
    VertexDistribution { space, probs }
}

/// Law of `X_t` on Z.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    time: usize,
    offset: i64,
    probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn time(&self) -> usize {
        self.time
    }

    pub fn get(&self, j: i64) -> f64 {
        let idx = j - self.offset;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// `(j, ρ_t(j))` over the window, in increasing `j`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Largest `|j|` with `ρ_t(j) > threshold`.
    pub fn max_abs_position(&self, threshold: f64) -> i64 {
        self.iter()
            .filter(|&(_, p)| p > threshold)
            .map(|(j, _)| j.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn mass_below(&self, j: i64) -> f64 {
        self.iter().filter(|&(i, _)| i < j).map(|(_, p)| p).sum()
    }

    pub fn mass_above(&self, j: i64) -> f64 {
        self.iter().filter(|&(i, _)| i > j).map(|(_, p)| p).sum()
    }

    /// Pointwise average of several distributions at the same time.
    pub fn average(dists: &[PositionDistribution]) -> Option<PositionDistribution> {
        let w = 1.0 / dists.len() as f64;
        Self::mixture(dists.iter().map(|d| (w, d)))
    }

    /// `Σ p_i ρ^{(i)}`, stamped with the time of the first part.
    pub fn mixture<'a>(
        parts: impl IntoIterator<Item = (f64, &'a PositionDistribution)>,
    ) -> Option<PositionDistribution> {
        let parts: Vec<_> = parts.into_iter().collect();
        let first = parts.first()?.1;
        let lo = parts.iter().map(|(_, d)| d.offset).min()?;
        let hi = parts
            .iter()
            .map(|(_, d)| d.offset + d.probs.len() as i64)
            .max()?;
        let probs = (lo..hi)
            .map(|j| parts.iter().map(|(p, d)| p * d.get(j)).sum())
            .collect();
        Some(PositionDistribution {
            time: first.time,
            offset: lo,
            probs,
        })
    }
}

/// Aggregates `μ_t` into `ρ_t(j) = Σ_{v ∈ V_j} μ_t(v)`.
pub fn position_distribution(psi: &WalkState<'_>) -> PositionDistribution {
    let space = psi.space();
    let mu = vertex_distribution(psi);
    let r = space.radius() as i64;
    let offset = -r;
    let mut probs = vec![0.0; (2 * r + 1) as usize];
    for (v, p) in space.vertices().iter().zip(mu.probs()) {
        probs[(v.position() - offset) as usize] += p;
    }
    PositionDistribution {
        time: psi.time(),
        offset,
        probs,
    }
}

/// Largest `|j|` among arcs with nonzero amplitude.
pub fn support_radius(psi: &WalkState<'_>) -> usize {
    let space = psi.space();
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, _)| space.arc(i).origin.position().unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

/// Window radius that keeps `t_max` steps from any state of the given
/// support radius clear of the boundary.
pub fn required_radius(t_max: usize, support: usize) -> usize {
    t_max + support + 2
}

/// Evolves `psi0` for `t_max` steps and returns `ρ_0, ..., ρ_{t_max}`.
pub fn run(psi0: &WalkState<'_>, t_max: usize) -> Result<Vec<PositionDistribution>> {
    let mut out = Vec::with_capacity(t_max + 1);
    run_with(psi0, t_max, |psi| out.push(position_distribution(psi)))?;
    Ok(out)
}

/// Evolves `psi0` for `t_max` steps, calling `visit` on every state
/// including the initial one.
pub fn run_with<'a>(
    psi0: &WalkState<'a>,
    t_max: usize,
    mut visit: impl FnMut(&WalkState<'a>),
) -> Result<WalkState<'a>> {
    let mut psi = psi0.clone();
    let mut scratch = Vec::with_capacity(psi.amplitudes().len());
    visit(&psi);
    for _ in 0..t_max {
        psi.step_with(&mut scratch)?;
        visit(&psi);
    }
    Ok(psi)
}

/// `E[(X_t/t)^r]` (unscaled at `t = 0`).
pub fn empirical_moment(dist: &PositionDistribution, r: u32) -> f64 {
    let scale = if dist.time == 0 {
        1.0
    } else {
        dist.time as f64
    };
    dist.iter()
        .map(|(j, p)| p * (j as f64 / scale).powi(r as i32))
        .sum()
}

/// Amplitudes `a_0..a_9` on the ten fundamental arcs of the tailed cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaCoefficients([C64; 10]);

impl LemmaCoefficients {
    /// Accepts coefficients whose squared norm is 1 within `1e-12`.
    pub fn new(a: [C64; 10]) -> Result<Self> {
        let n: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "coefficients have norm² {n}"
            )));
        }
        Ok(LemmaCoefficients(a))
    }

    pub fn normalized(mut a: [C64; 10]) -> Result<Self> {
        let n: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("zero coefficient vector".into()));
        }
        a.iter_mut().for_each(|x| *x /= n);
        Ok(LemmaCoefficients(a))
    }

    /// Single nonzero coefficient `a_i = 1`.
    pub fn unit(i: usize) -> Self {
        let mut a = [C64::new(0.0, 0.0); 10];
        a[i] = C64::new(1.0, 0.0);
        LemmaCoefficients(a)
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn as_array(&self) -> &[C64; 10] {
        &self.0
    }

    /// The state `Σ a_i |i>` on a tailed-cycle window.
    pub fn state<'a>(&self, space: &'a ArcSpace) -> Result<WalkState<'a>> {
        if space.kind() != GraphKind::TildeC4 {
            return Err(Error::InvalidArgument(
                "coefficients live on tilde-c4".into(),
            ));
        }
        let mut amps = vec![C64::new(0.0, 0.0); space.num_arcs()];
        for (coin, &a) in self.0.iter().enumerate() {
            let arc = space
                .coin_arc(0, coin as u8)
                .expect("fundamental arcs are always present");
            amps[arc] = a;
        }
        WalkState::new(space, amps)
    }
}

/// Which tail vertex adjacent to the cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSide {
    /// Vertex `-1`, attached to `0'`.
    Negative,
    /// Vertex `1`, attached to `0`.
    Positive,
}

/// Exact `μ_n(∓1)` for the initial state `Σ a_i |i>`.
///
/// Two of the eight branches use `|a_7 + a_8 + 4a_9|²`, the mirror image of
/// the `|4a_0 + a_1 + a_2|²` branches under `0 ↔ 0'`.
pub fn lemma_mu(coeffs: &LemmaCoefficients, n: usize, side: TailSide) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("lemma_mu needs n >= 1".into()));
    }
    let a = |i: usize| coeffs.get(i);
    let sq = |z: C64| z.norm_sqr();
    let four = C64::new(4.0, 0.0);
    let two = C64::new(2.0, 0.0);
    // Terms shared by both sides.
    let from_zero_prime = sq(four * a(0) + a(1) + a(2));
    let from_zero = sq(a(7) + a(8) + four * a(9));
    let into_zero = sq(a(4) + a(5));
    let into_zero_prime = sq(a(3) + a(6));

    let value = match side {
        TailSide::Negative => match n {
            1 => sq(a(0) - two * a(1) - two * a(2)) / 9.0,
            2 => 4.0 / 9.0 * into_zero,
            3 => 4.0 / 81.0 * from_zero,
            4 => 4.0 / 81.0 * into_zero_prime,
            _ => {
                let m = ((n - 1) / 4) as i32;
                let odd = 4.0 / 9f64.powi(2 * m + 1);
                let even = 4.0 / 9f64.powi(2 * m + 2);
                match (n - 1) % 4 {
                    0 => odd * from_zero_prime,
                    1 => odd * into_zero,
                    2 => even * from_zero,
                    _ => even * into_zero_prime,
                }
            }
        },
        TailSide::Positive => match n {
            1 => sq(two * a(7) + two * a(8) - a(9)) / 9.0,
            2 => 4.0 / 9.0 * into_zero_prime,
            3 => 4.0 / 81.0 * from_zero_prime,
            4 => 4.0 / 81.0 * into_zero,
            _ => {
                let m = ((n - 1) / 4) as i32;
                let odd = 4.0 / 9f64.powi(2 * m + 1);
                let even = 4.0 / 9f64.powi(2 * m + 2);
                match (n - 1) % 4 {
                    0 => odd * from_zero,
                    1 => odd * into_zero_prime,
                    2 => even * from_zero_prime,
                    _ => even * into_zero,
                }
            }
        },
    };
    Ok(value)
}

/// Limits of `μ_{4n+j}(v)` for `v` on the cycle and phase `j ∈ 1..=4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaLimits {
    /// Indexed `[site.index()][j - 1]`.
    table: [[f64; 4]; 4],
}

impl LemmaLimits {
    pub fn get(&self, site: Site, phase: usize) -> f64 {
        assert!((1..=4).contains(&phase), "phase must be 1..=4");
        self.table[site.index()][phase - 1]
    }

    /// Total trapped mass at a given phase.
    pub fn total(&self, phase: usize) -> f64 {
        Site::ALL.iter().map(|&s| self.get(s, phase)).sum()
    }
}

/// The trapped component circulates with period 4: at `t ≡ 0 (mod 4)` the
/// mass at `0'` is `|a_1 - a_2|²/2`, one step later `|a_4 - a_5|²/2`, and so
/// on around the cycle; `0` runs half a period behind and `u`, `d` share
/// the odd steps evenly.
pub fn lemma_limits(coeffs: &LemmaCoefficients) -> LemmaLimits {
    let d = |i: usize, j: usize| (coeffs.get(i) - coeffs.get(j)).norm_sqr();
    let (d12, d45, d78, d36) = (d(1, 2), d(4, 5), d(7, 8), d(3, 6));
    let side_odd = 0.25 * (d36 + d45);
    let side_even = 0.25 * (d12 + d78);
    let mut table = [[0.0; 4]; 4];
    table[Site::ZeroPrime.index()] = [0.5 * d45, 0.5 * d78, 0.5 * d36, 0.5 * d12];
    table[Site::Zero.index()] = [0.5 * d36, 0.5 * d12, 0.5 * d45, 0.5 * d78];
    table[Site::Up.index()] = [side_even, side_odd, side_even, side_odd];
    table[Site::Down.index()] = table[Site::Up.index()];
    LemmaLimits { table }
}

/// Reflected, trapped and transmitted mass on the tailed cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringRates {
    pub reflected: f64,
    pub origin: f64,
    pub transmitted: f64,
    /// Time at which the rates were read off.
    pub steps: usize,
    pub converged: bool,
}

impl ScatteringRates {
    fn from_distribution(d: &PositionDistribution) -> Self {
        ScatteringRates {
            reflected: d.mass_below(0),
            origin: d.get(0),
            transmitted: d.mass_above(0),
            steps: d.time(),
            converged: false,
        }
    }

    fn max_change(&self, other: &Self) -> f64 {
        (self.reflected - other.reflected)
            .abs()
            .max((self.origin - other.origin).abs())
            .max((self.transmitted - other.transmitted).abs())
    }
}

/// Change across one period of 4 below which the rates count as converged.
pub const RATE_TOLERANCE: f64 = 1e-10;

/// Runs until the rates change by less than [`RATE_TOLERANCE`] over a
/// period of four steps, or `t_max` steps have been taken.
///
/// The state must live on a tailed-cycle window; the walk is re-embedded in
/// a window large enough for `t_max` steps.
pub fn scattering_rates(psi0: &WalkState<'_>, t_max: usize) -> Result<ScatteringRates> {
    let src = psi0.space();
    if src.kind() != GraphKind::TildeC4 {
        return Err(Error::InvalidArgument(
            "scattering rates are defined on tilde-c4".into(),
        ));
    }
    let r0 = support_radius(psi0);
    let space = ArcSpace::build(
        GraphKind::TildeC4,
        required_radius(t_max, r0).max(src.radius()),
    )?;
    let mut amps = vec![C64::new(0.0, 0.0); space.num_arcs()];
    for (i, &a) in psi0.amplitudes().iter().enumerate() {
        if a.norm_sqr() > 0.0 {
            let id = space
                .find(src.label(i))
                .expect("larger window contains the smaller");
            amps[id] = a;
        }
    }
    let mut psi = WalkState::new(&space, amps)?;
    let mut history = vec![ScatteringRates::from_distribution(&position_distribution(
        &psi,
    ))];
    let min_steps = 2 * r0 + 8;
    let mut scratch = Vec::new();
    while psi.time() < t_max {
        psi.step_with(&mut scratch)?;
        let current = ScatteringRates::from_distribution(&position_distribution(&psi));
        let t = psi.time();
        history.push(current);
        if t >= min_steps && current.max_change(&history[t - 4]) < RATE_TOLERANCE {
            return Ok(ScatteringRates {
                converged: true,
                ..current
            });
        }
    }
    Ok(*history.last().expect("history starts non-empty"))
}

/// Per-vertex limits observed along a simulated trajectory, keyed by phase.
pub fn simulated_cycle_masses(
    psi0: &WalkState<'_>,
    times: &[usize],
) -> Result<BTreeMap<usize, [f64; 4]>> {
    let t_max = times.iter().copied().max().unwrap_or(0);
    let mut out = BTreeMap::new();
    run_with(psi0, t_max, |psi| {
        if times.contains(&psi.time()) {
            let mu = vertex_distribution(psi);
            let mut row = [0.0; 4];
            for s in Site::ALL {
                row[s.index()] = mu.get(VertexId::cycle(0, s));
            }
            out.insert(psi.time(), row);
        }
    })?;
    Ok(out)
}
