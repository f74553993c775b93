//! Weak limit of `X_t / t` on the periodic chain.
//!
//! The law is `Δ δ_0 + f(x) dx` with
//! `f`'s distribution function `Σ_{j,l} ∫ 1{x_{j,l}(k) ≤ x} w_{j,l}(k) dk/2π`
//! and `w_{j,l}(k) = |<v_{j,l}(k), ψ̂_0(k)>|²`. Everything is integrated in
//! the wave-number picture on a midpoint grid, which never lands on a
//! critical point when the grid size is even.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::evolution::PositionDistribution;
use crate::spectral::{
    amplitude, band_lambda, gamma, jacobian_rational, point_eigenvector, velocity,
    velocity_derivative, walk_eigenvector, Branch, CellState, CoinVector,
};
use crate::{Error, Result};

/// Default number of wave numbers per branch.
pub const DEFAULT_GRID: usize = 1 << 14;

/// Largest tolerated `|Δ + ∫f - 1|` before a grid counts as too coarse.
pub const MASS_DEFICIT_LIMIT: f64 = 1e-4;

pub fn edge0() -> f64 {
    1.0 / 10f64.sqrt()
}

pub const EDGE1: f64 = 2.0 / 7.0;

/// `w_{j,l}(k)`; the eigenvector phase drops out.
pub fn branch_weight(b: Branch, k: f64, psi_hat: &CoinVector) -> Result<f64> {
    Ok(walk_eigenvector(k, b)?.dotc(psi_hat).norm_sqr())
}

/// `Σ_m |<η_m, ψ̂(k)>|²`, the weight on the constant eigenvalues.
pub fn point_weight(psi_hat: &CoinVector) -> f64 {
    (0..4)
        .map(|m| point_eigenvector(m).dotc(psi_hat).norm_sqr())
        .sum()
}

/// Trapped mass of a cell state, computed exactly cell by cell.
pub fn trapped_mass(state: &CellState) -> f64 {
    let etas: Vec<CoinVector> = (0..4).map(point_eigenvector).collect();
    state
        .cells()
        .map(|(_, coins)| {
            let v = CoinVector::from_column_slice(coins);
            etas.iter().map(|e| e.dotc(&v).norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// Midpoint nodes `-π + (i + 1/2) 2π/n`.
fn midpoints(start: f64, len: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let h = len / n as f64;
    (0..n).map(move |i| start + (i as f64 + 0.5) * h)
}

fn check_grid(n: usize) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be even and at least 8, got {n}"
        )));
    }
    Ok(())
}

/// A weighted mixture of initial states; a single state has weight one.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(f64, CellState)>,
}

impl Ensemble {
    pub fn single(state: CellState) -> Self {
        Ensemble {
            members: vec![(1.0, state)],
        }
    }

    pub fn new(members: Vec<(f64, CellState)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if members.is_empty()
            || members.iter().any(|(p, _)| *p < 0.0)
            || (total - 1.0).abs() > 1e-12
        {
            return Err(Error::InvalidArgument(
                "ensemble weights must be a probability vector".into(),
            ));
        }
        Ok(Ensemble { members })
    }

    /// Each of the ten coin states of cell 0 with probability 1/10.
    pub fn uniform() -> Self {
        let members = (0..10u8)
            .map(|coin| {
                let mut s = CellState::new();
                s.set(0, coin, crate::C64::new(1.0, 0.0));
                (0.1, s)
            })
            .collect();
        Ensemble { members }
    }

    pub fn members(&self) -> &[(f64, CellState)] {
        &self.members
    }

    /// Averaged `w_{j,l}(k)` over the ensemble.
    pub fn branch_weight(&self, b: Branch, k: f64) -> Result<f64> {
        let v = walk_eigenvector(k, b)?;
        Ok(self
            .members
            .iter()
            .map(|(p, s)| p * v.dotc(&s.fourier(k)).norm_sqr())
            .sum())
    }

    pub fn trapped_mass(&self) -> f64 {
        self.members.iter().map(|(p, s)| p * trapped_mass(s)).sum()
    }
}

/// Which limit-density curve a sample set belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveTag {
    /// `C_0^{(l)}`, support `(-1/√10, 1/√10)`.
    Rho0(u8),
    /// `C_1^{(l)}`, support `(-2/7, 2/7)`.
    Rho1(u8),
    Nu0,
    Nu1,
}

impl CurveTag {
    pub fn name(self) -> String {
        match self {
            CurveTag::Rho0(l) => format!("rho0_{l}"),
            CurveTag::Rho1(l) => format!("rho1_{l}"),
            CurveTag::Nu0 => "nu0".into(),
            CurveTag::Nu1 => "nu1".into(),
        }
    }

    pub fn support(self) -> (f64, f64) {
        match self {
            CurveTag::Rho0(_) | CurveTag::Nu0 => (-edge0(), edge0()),
            CurveTag::Rho1(_) | CurveTag::Nu1 => (-EDGE1, EDGE1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub k: f64,
    pub x: f64,
    pub rho: f64,
    /// `|dx/dk|` at the sample.
    pub jacobian: f64,
}

/// A sampled parametric curve `k ↦ (x(k), ρ(k))`, ordered by `k`.
#[derive(Clone, Debug, Serialize)]
pub struct DensityCurve {
    pub tag: CurveTag,
    /// Spacing of the (uniform, midpoint) parameter grid.
    pub step: f64,
    pub samples: Vec<CurveSample>,
}

impl DensityCurve {
    fn sample<F>(tag: CurveTag, start: f64, len: f64, n: usize, point: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<CurveSample> + Sync + Send,
    {
        let samples = midpoints(start, len, n)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(point)
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityCurve {
            tag,
            step: len / n as f64,
            samples,
        })
    }

    /// `∫ρ dx`, integrated along the parameter.
    pub fn mass(&self) -> f64 {
        self.samples.iter().map(|s| s.rho * s.jacobian).sum::<f64>() * self.step
    }

    /// `∫_{-∞}^x ρ`, integrated along the parameter.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.x <= x)
            .map(|s| s.rho * s.jacobian)
            .sum::<f64>()
            * self.step
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.x), hi.max(s.x))
            })
    }
}

fn tau(j: u8, k: f64) -> f64 {
    velocity_derivative(Branch::new(j, 0), k).abs()
}

/// The four curves `C_0^{(l)}`, `C_1^{(l)}` whose sum is `f`, each on `n`
/// parameter samples.
///
/// On `C_0^{(l)}` the branch `(0, l)` at `k` and the branch `(1, 1-l)` at
/// `k - π` reach the same `x`; on `C_1^{(l)}` the branch `(2, l)` at `k` and
/// at `π - k` do.
pub fn parametric_curves(ensemble: &Ensemble, n: usize) -> Result<Vec<DensityCurve>> {
    check_grid(n)?;
    let mut curves = Vec::with_capacity(4);
    for l in 0..2u8 {
        curves.push(DensityCurve::sample(
            CurveTag::Rho0(l),
            0.0,
            2.0 * PI,
            n,
            |k| {
                let w = ensemble.branch_weight(Branch::new(0, l), k)?
                    + ensemble.branch_weight(Branch::new(1, 1 - l), k - PI)?;
                let jacobian = tau(0, k);
                let x = velocity(Branch::new(0, l), k);
                Ok(CurveSample {
                    k,
                    x,
                    rho: w / (2.0 * PI * jacobian),
                    jacobian,
                })
            },
        )?);
    }
    for l in 0..2u8 {
        curves.push(DensityCurve::sample(
            CurveTag::Rho1(l),
            -PI / 2.0,
            PI,
            n,
            |k| {
                let w = ensemble.branch_weight(Branch::new(2, l), k)?
                    + ensemble.branch_weight(Branch::new(2, l), PI - k)?;
                let jacobian = tau(2, k);
                let x = velocity(Branch::new(2, l), k);
                Ok(CurveSample {
                    k,
                    x,
                    rho: w / (2.0 * PI * jacobian),
                    jacobian,
                })
            },
        )?);
    }
    let mass: f64 = curves.iter().map(DensityCurve::mass).sum::<f64>() + ensemble.trapped_mass();
    let norm: f64 = ensemble
        .members()
        .iter()
        .map(|(p, s)| p * s.norm_sqr())
        .sum();
    let deficit = (mass - norm).abs();
    if deficit > MASS_DEFICIT_LIMIT {
        return Err(Error::GridTooCoarse { deficit });
    }
    Ok(curves)
}

/// `ν_0(x) = 1/(3π|dx_{0,0}/dk|)` and `ν_1(x) = 1/(3π|dx_{2,0}/dk|)`; the
/// uniform-initial limit density is `(2/5)δ_0 + (3/5)(ν_0 + ν_1)`.
#[derive(Clone, Debug, Serialize)]
pub struct UniformCurves {
    pub nu0: DensityCurve,
    pub nu1: DensityCurve,
    pub delta: f64,
}

pub fn uniform_initial_curves(n: usize) -> Result<UniformCurves> {
    check_grid(n)?;
    let curve = |tag, j: u8, start, len| {
        DensityCurve::sample(tag, start, len, n, |k| {
            let jacobian = tau(j, k);
            let x = velocity(Branch::new(j, 0), k);
            Ok(CurveSample {
                k,
                x,
                rho: 1.0 / (3.0 * PI * jacobian),
                jacobian,
            })
        })
    };
    Ok(UniformCurves {
        nu0: curve(CurveTag::Nu0, 0, 0.0, 2.0 * PI)?,
        nu1: curve(CurveTag::Nu1, 2, -PI / 2.0, PI)?,
        delta: Ensemble::uniform().trapped_mass(),
    })
}

/// Per-wave-number data of one branch on the full grid.
#[derive(Clone, Debug)]
pub struct BranchSamples {
    pub branch: Branch,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

/// `Δ δ_0 + f`, represented by its atoms in the wave-number picture.
#[derive(Clone, Debug)]
pub struct LimitLaw {
    grid: usize,
    delta: f64,
    branches: Vec<BranchSamples>,
    /// `(x, cumulative weight up to and including x)`, sorted by `x`.
    cumulative: Vec<(f64, f64)>,
}

impl LimitLaw {
    pub fn new(ensemble: &Ensemble, n: usize) -> Result<Self> {
        check_grid(n)?;
        let ks: Vec<f64> = midpoints(-PI, 2.0 * PI, n).collect();
        let rows = ks
            .par_iter()
            .map(|&k| {
                let mut out = [(0.0, 0.0); 6];
                for (slot, b) in out.iter_mut().zip(Branch::ALL) {
                    *slot = (velocity(b, k), ensemble.branch_weight(b, k)?);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let branches = Branch::ALL
            .iter()
            .enumerate()
            .map(|(bi, &branch)| BranchSamples {
                branch,
                x: rows.iter().map(|r| r[bi].0).collect(),
                w: rows.iter().map(|r| r[bi].1).collect(),
            })
            .collect();
        let mut atoms: Vec<(f64, f64)> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&(x, w)| (x, w / n as f64)))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let cumulative = atoms
            .into_iter()
            .map(|(x, w)| {
                acc += w;
                (x, acc)
            })
            .collect();
        Ok(LimitLaw {
            grid: n,
            delta: ensemble.trapped_mass(),
            branches,
            cumulative,
        })
    }

    pub fn from_state(state: &CellState, n: usize) -> Result<Self> {
        Self::new(&Ensemble::single(state.clone()), n)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(&Ensemble::uniform(), n)
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn branches(&self) -> &[BranchSamples] {
        &self.branches
    }

    /// `∫ f`.
    pub fn continuous_mass(&self) -> f64 {
        self.cumulative.last().map_or(0.0, |&(_, c)| c)
    }

    /// `lim P(X_t/t ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&(y, _)| y <= x);
        let continuous = if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1].1
        };
        continuous + if x >= 0.0 { self.delta } else { 0.0 }
    }

    /// `lim E[(X_t/t)^r]`.
    pub fn moment(&self, r: u32) -> f64 {
        let n = self.grid as f64;
        let continuous: f64 = self
            .branches
            .iter()
            .map(|b| {
                b.x.iter()
                    .zip(&b.w)
                    .map(|(x, w)| x.powi(r as i32) * w)
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n;
        continuous + if r == 0 { self.delta } else { 0.0 }
    }
}

pub fn limit_cdf(law: &LimitLaw, x: f64) -> f64 {
    law.cdf(x)
}

pub fn limit_moment(law: &LimitLaw, r: u32) -> f64 {
    law.moment(r)
}

/// Distribution function of `X_t / t` for a simulated distribution.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    /// `(j/t, P(X_t ≤ j))`, sorted.
    steps: Vec<(f64, f64)>,
}

impl EmpiricalCdf {
    pub fn new(dist: &PositionDistribution) -> Self {
        let t = dist.time().max(1) as f64;
        let mut acc = 0.0;
        let steps = dist
            .iter()
            .map(|(j, p)| {
                acc += p;
                (j as f64 / t, acc)
            })
            .collect();
        EmpiricalCdf { steps }
    }

    pub fn at(&self, x: f64) -> f64 {
        let idx = self.steps.partition_point(|&(y, _)| y <= x);
        if idx == 0 {
            0.0
        } else {
            self.steps[idx - 1].1
        }
    }

    fn left_limit(&self, x: f64) -> f64 {
        let idx = self.steps.partition_point(|&(y, _)| y < x);
        if idx == 0 {
            0.0
        } else {
            self.steps[idx - 1].1
        }
    }
}

/// `sup |F_emp - F|` over `x` outside `[c - radius, c + radius]` for every
/// excluded centre `c`.
///
/// Between atoms the empirical function is flat while the limit rises, so
/// the supremum is attained at atoms (from either side) or at the borders of
/// excluded windows.
pub fn kolmogorov_distance(
    law: &LimitLaw,
    dist: &PositionDistribution,
    excluded: &[f64],
    radius: f64,
) -> f64 {
    let emp = EmpiricalCdf::new(dist);
    let allowed = |x: f64| excluded.iter().all(|c| (x - c).abs() > radius);
    let mut probes: Vec<f64> = emp.steps.iter().map(|&(x, _)| x).collect();
    for c in excluded {
        probes.push(c - radius - 1e-12);
        probes.push(c + radius + 1e-12);
    }
    let below = |x: f64| {
        let idx = law.cumulative.partition_point(|&(y, _)| y < x);
        let c = if idx == 0 {
            0.0
        } else {
            law.cumulative[idx - 1].1
        };
        c + if x > 0.0 { law.delta } else { 0.0 }
    };
    probes
        .into_iter()
        .filter(|&x| allowed(x))
        .map(|x| {
            let right = (emp.at(x) - law.cdf(x)).abs();
            let left = (emp.left_limit(x) - below(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
}

/// Result of comparing the spectral `λ`-parametrization of the uniform
/// density with the wave-number curves `ν_0`, `ν_1`.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaCheck {
    pub samples: usize,
    /// `max ||x_λ| - |x(k)||` at the matched wave number.
    pub max_x_deviation: f64,
    /// Least-squares constant `c` with `ρ_λ ≈ c ν`.
    pub fitted_scale: f64,
    /// `max |ρ_λ / (c ν) - 1|`.
    pub max_relative_deviation: f64,
}

/// `(|x|, ρ)` at `λ` from
/// `x² = (γ² - λ²) η(λ) / (1 - λ²)`, `ρ = 7√21 / (|G(λ)| √(1 - λ²))`,
/// `η(λ) = (A² - cos²(3 arccos(λ/γ))) / (9 sin²(3 arccos(λ/γ)))`,
/// `G(λ) = F(λ/γ)`.
pub fn lambda_curve_point(lambda: f64) -> (f64, f64) {
    let g = gamma();
    let a = amplitude();
    let theta = 3.0 * (lambda / g).acos();
    let eta = (a * a - theta.cos().powi(2)) / (9.0 * theta.sin().powi(2));
    let one_minus = 1.0 - lambda * lambda;
    let x = ((g * g - lambda * lambda) * eta / one_minus)
        .max(0.0)
        .sqrt();
    let rho = 7.0 * 21f64.sqrt() / (jacobian_rational(lambda / g).abs() * one_minus.sqrt());
    (x, rho)
}

/// Interior points of the bands of `spec(P)` kept `margin` away from
/// `{±1, ±2/3, ±1/3, 0}`, as `(band, λ)`.
pub fn interior_lambdas(per_piece: usize, margin: f64) -> Vec<(u8, f64)> {
    let pieces: [(u8, f64, f64); 4] = [
        (0, 2.0 / 3.0, 1.0),
        (1, -1.0, -2.0 / 3.0),
        (2, -1.0 / 3.0, 0.0),
        (2, 0.0, 1.0 / 3.0),
    ];
    pieces
        .iter()
        .flat_map(|&(j, lo, hi)| {
            let (lo, hi) = (lo + margin, hi - margin);
            (0..per_piece).map(move |i| (j, lo + (hi - lo) * (i as f64 + 0.5) / per_piece as f64))
        })
        .collect()
}

/// Maps every interior `λ` to the wave number `k ∈ (0, π)` with
/// `λ_j(k) = λ` (`cos k = (9λ³ - 7λ)/2`), and compares both descriptions.
pub fn lambda_parametrization_check(per_piece: usize, margin: f64) -> Result<LambdaCheck> {
    let mut pairs = Vec::new();
    let mut max_x_deviation: f64 = 0.0;
    for (j, lambda) in interior_lambdas(per_piece, margin) {
        let k = ((9.0 * lambda.powi(3) - 7.0 * lambda) / 2.0)
            .clamp(-1.0, 1.0)
            .acos();
        if (band_lambda(j, k) - lambda).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "λ = {lambda} not on band {j}"
            )));
        }
        let (x, rho) = lambda_curve_point(lambda);
        let xk = velocity(Branch::new(j, 0), k).abs();
        max_x_deviation = max_x_deviation.max((x - xk).abs());
        pairs.push((rho, 1.0 / (3.0 * PI * tau(j, k))));
    }
    // minimize Σ (ρ_λ/ν - c)² relative residuals
    let ratios: Vec<f64> = pairs.iter().map(|(r, n)| r / n).collect();
    let fitted_scale = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_relative_deviation = ratios
        .iter()
        .map(|r| (r / fitted_scale - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(LambdaCheck {
        samples: pairs.len(),
        max_x_deviation,
        fitted_scale,
        max_relative_deviation,
    })
}
