//! Bloch analysis of the periodic chain of 4-cycles.
//!
//! The fundamental domain is one cell with its ten coin states; the bridge
//! `|9> = (0, 0')` carries the one-form `θ = k` and `|0> = (0', 0)` carries
//! `θ = -k`. With the transform `ψ̂(k) = Σ_x e^{-ikx} ψ(x)`, the fiber walk
//! is `(Û(k)ψ)(f) = e^{iθ(f)} Σ_{o(e)=t(f)} (2/deg o(e) - δ_{e,f̄}) ψ(e)`.
//!
//! Its spectrum is two copies of the twisted random walk's spectrum lifted
//! through `φ(ν) = (ν + ν⁻¹)/2`, plus the constant eigenvalues `±1, ±i` of
//! the cycle eigenvectors. The three non-constant random-walk eigenvalues
//! solve `9λ³ - 7λ - 2cos k = 0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};

use crate::arc_graph::{
    coin_origin, coin_reverse, ArcLabel, ArcSpace, GraphKind, Site, WalkState, CYCLE_COINS,
    REVERSE_CYCLE_COINS,
};
use crate::{Error, Result, C64};

pub type CoinVector = SVector<C64, 10>;
pub type CoinMatrix = SMatrix<C64, 10, 10>;

/// `A = 9√3 / (7√7)`, the amplitude of `cos k` inside the band formula.
pub fn amplitude() -> f64 {
    9.0 * 3f64.sqrt() / (7.0 * 7f64.sqrt())
}

/// `γ = √(28/27) = 2√7 / (3√3)`, the prefactor of the band formula.
pub fn gamma() -> f64 {
    (28.0f64 / 27.0).sqrt()
}

/// Stationary measure `π` in the order `(0', u, d, 0)`.
pub const STATIONARY: [f64; 4] = [0.3, 0.2, 0.2, 0.3];

/// Band index `j ∈ {0,1,2}` and lift sign `l ∈ {0,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub j: u8,
    pub l: u8,
}

impl Branch {
    pub const ALL: [Branch; 6] = [
        Branch { j: 0, l: 0 },
        Branch { j: 0, l: 1 },
        Branch { j: 1, l: 0 },
        Branch { j: 1, l: 1 },
        Branch { j: 2, l: 0 },
        Branch { j: 2, l: 1 },
    ];

    pub fn new(j: u8, l: u8) -> Self {
        assert!(j < 3 && l < 2, "branch ({j}, {l}) out of range");
        Branch { j, l }
    }

    fn sign(self) -> f64 {
        if self.l == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Bloch matrix of the twisted simple random walk on one cell.
///
/// `matrix[(v, w)]` is the probability of the step `w → v` (columns sum to
/// one at `k = 0`), with the bridge phase `e^{ik}` in row `0'`, column `0`.
#[derive(Clone, Debug)]
pub struct BlochRandomWalk {
    pub k: f64,
    pub matrix: Matrix4<C64>,
}

impl BlochRandomWalk {
    /// Transition probability `p(e) = 1/deg o(e)` of a local coin arc.
    pub fn transition(coin: u8) -> f64 {
        1.0 / coin_origin(coin).degree() as f64
    }

    /// `D_π^{-1/2} P D_π^{1/2}`, which is self-adjoint.
    pub fn symmetrized(&self) -> Matrix4<C64> {
        Matrix4::from_fn(|v, w| self.matrix[(v, w)] * (STATIONARY[w] / STATIONARY[v]).sqrt())
    }

    /// `det(λ - P(k)) = (λ/9)(9λ³ - 7λ - 2cos k)`.
    pub fn characteristic(&self, lambda: f64) -> f64 {
        lambda / 9.0 * (9.0 * lambda.powi(3) - 7.0 * lambda - 2.0 * self.k.cos())
    }
}

pub fn build_p(k: f64) -> BlochRandomWalk {
    let z = C64::new(0.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let third = C64::new(1.0 / 3.0, 0.0);
    let bridge = C64::from_polar(1.0 / 3.0, k);
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        z,             half, half, bridge,
        third,         z,    z,    third,
        third,         z,    z,    third,
        bridge.conj(), half, half, z,
    );
    BlochRandomWalk { k, matrix }
}

/// `λ_j(k) = γ cos{(1/3) arccos(A cos k) + 2jπ/3}`.
pub fn band_lambda(j: u8, k: f64) -> f64 {
    gamma() * xi(j, k).cos()
}

/// `ξ_j(k) = (1/3) arccos(A cos k) + 2jπ/3`.
pub fn xi(j: u8, k: f64) -> f64 {
    let arg = (amplitude() * k.cos()).clamp(-1.0, 1.0);
    arg.acos() / 3.0 + 2.0 * j as f64 * PI / 3.0
}

/// `1 - λ_j(k)²`, evaluated through the factorizations
/// `(λ-1)(9λ²+9λ+2) = 2cos k - 2` and `(λ+1)(9λ²-9λ+2) = 2cos k + 2`
/// so it keeps full relative precision next to `λ = ±1`.
pub fn band_gap(j: u8, k: f64) -> f64 {
    let lambda = band_lambda(j, k);
    if lambda > 0.0 {
        let s = (0.5 * k).sin();
        let one_minus = 4.0 * s * s / (9.0 * lambda * lambda + 9.0 * lambda + 2.0);
        one_minus * (1.0 + lambda)
    } else {
        let c = (0.5 * k).cos();
        let one_plus = 4.0 * c * c / (9.0 * lambda * lambda - 9.0 * lambda + 2.0);
        one_plus * (1.0 - lambda)
    }
}

/// `dλ_j/dk = -2 sin k / (27λ² - 7)`, from differentiating the cubic.
pub fn band_lambda_derivative(j: u8, k: f64) -> f64 {
    let lambda = band_lambda(j, k);
    -2.0 * k.sin() / (27.0 * lambda * lambda - 7.0)
}

/// `ν = λ + (-1)^l i√(1-λ²)`, the preimage of `λ` under `φ(ν) = (ν+ν⁻¹)/2`.
pub fn spectral_map(lambda: f64, l: u8) -> Result<C64> {
    if lambda.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "|λ| = {} exceeds 1",
            lambda.abs()
        )));
    }
    let root = (1.0 - lambda * lambda).max(0.0).sqrt();
    let sign = if l == 0 { 1.0 } else { -1.0 };
    Ok(C64::new(lambda, sign * root))
}

/// `ν_{j,l}(k)`, with the imaginary part taken from [`band_gap`].
pub fn walk_eigenvalue(b: Branch, k: f64) -> C64 {
    C64::new(
        band_lambda(b.j, k),
        b.sign() * band_gap(b.j, k).max(0.0).sqrt(),
    )
}

/// `θ(f)` on the local coin arcs.
pub fn one_form(coin: u8, k: f64) -> f64 {
    match coin {
        9 => k,
        0 => -k,
        _ => 0.0,
    }
}

fn coin_terminus(coin: u8) -> Site {
    coin_origin(coin_reverse(coin))
}

/// The 10 × 10 fiber walk `Û(k)`.
pub fn bloch_walk_operator(k: f64) -> CoinMatrix {
    CoinMatrix::from_fn(|f, e| {
        let (f, e) = (f as u8, e as u8);
        let t = coin_terminus(f);
        if coin_origin(e) != t {
            return C64::new(0.0, 0.0);
        }
        let back = if e == coin_reverse(f) { 1.0 } else { 0.0 };
        C64::from_polar(1.0, one_form(f, k)) * (2.0 / t.degree() as f64 - back)
    })
}

/// `A δ_v = Σ_{o(e)=v} √p(e) δ_e`.
pub fn lift_a(f: &Vector4<C64>) -> CoinVector {
    CoinVector::from_fn(|e, _| {
        let site = coin_origin(e as u8);
        f[site.index()] * BlochRandomWalk::transition(e as u8).sqrt()
    })
}

/// Twisted flip `(S_θ ψ)(f) = e^{iθ(f)} ψ(f̄)`; `Û(k) = S_θ (2AA* - 1)`.
pub fn twisted_flip(psi: &CoinVector, k: f64) -> CoinVector {
    CoinVector::from_fn(|f, _| {
        C64::from_polar(1.0, one_form(f as u8, k)) * psi[coin_reverse(f as u8) as usize]
    })
}

/// `A* S_θ A`, the self-adjoint fiber matrix whose spectrum is that of the
/// twisted random walk.
pub fn fiber_matrix(k: f64) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for coin in 0..10u8 {
        let v = coin_origin(coin).index();
        let w = coin_terminus(coin).index();
        let weight = (BlochRandomWalk::transition(coin)
            * BlochRandomWalk::transition(coin_reverse(coin)))
        .sqrt();
        out[(v, w)] += C64::from_polar(weight, one_form(coin, k));
    }
    out
}

/// Closed-form null vector of `fiber_matrix(k) - λ` for a root of the cubic:
/// `(1 + λe^{-ik}, s, s, 3λ² - 1)` with `s = (3λ + e^{-ik})/√6`.
///
/// It is symmetric in `u, d`, hence orthogonal to the constant `λ = 0`
/// eigenvector `(0, 1, -1, 0)` even where a band crosses zero.
pub fn vertex_eigenvector(k: f64, lambda: f64) -> Vector4<C64> {
    let phase = C64::from_polar(1.0, -k);
    let s = (phase + 3.0 * lambda) / 6f64.sqrt();
    Vector4::new(
        1.0 + lambda * phase,
        s,
        s,
        C64::new(3.0 * lambda * lambda - 1.0, 0.0),
    )
}

/// `A f - ν S_θ A f`, the walk eigenvector of eigenvalue `ν` above `f`.
pub fn lift(k: f64, f: &Vector4<C64>, nu: C64) -> CoinVector {
    let af = lift_a(f);
    af - twisted_flip(&af, k) * nu
}

/// `1 - λ²` below this counts as a band edge where the two lifts coincide.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

/// Normalized eigenvector `v_{j,l}(k)` of `Û(k)` for eigenvalue `ν_{j,l}(k)`.
pub fn walk_eigenvector(k: f64, b: Branch) -> Result<CoinVector> {
    let gap = band_gap(b.j, k);
    if gap < DEGENERACY_TOLERANCE {
        return Err(Error::DegeneratePoint { k, gap });
    }
    let lambda = band_lambda(b.j, k);
    let nu = walk_eigenvalue(b, k);
    let w = lift(k, &vertex_eigenvector(k, lambda), nu);
    Ok(w.unscale(w.norm()))
}

/// Cycle eigenvectors restricted to one cell: `η_m` with eigenvalue `i^m`,
/// independent of `k`.
pub fn point_eigenvector(m: u8) -> CoinVector {
    let mut v = CoinVector::zeros();
    let scale = 1.0 / 8f64.sqrt();
    for (pos, (&fwd, &bwd)) in CYCLE_COINS.iter().zip(&REVERSE_CYCLE_COINS).enumerate() {
        let phase = C64::from_polar(scale, 2.0 * PI * m as f64 * (pos + 1) as f64 / 4.0);
        v[fwd as usize] += phase;
        v[bwd as usize] -= phase;
    }
    v
}

/// Formally critical wave numbers of `x_{j,l}` in `[-π, π)`.
pub fn critical_points(j: u8) -> &'static [f64] {
    match j {
        0 => &[0.0],
        1 => &[-PI],
        _ => &[-PI / 2.0, PI / 2.0],
    }
}

/// Distance from `k` to the nearest critical point of band `j`, mod 2π.
pub fn distance_to_critical(j: u8, k: f64) -> f64 {
    critical_points(j)
        .iter()
        .map(|&c| {
            let d = (k - c).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Group velocity `x_{j,l}(k) = iν'/ν = (-1)^l λ'_j / √(1-λ_j²)`.
///
/// At the band edges of `j = 0` (`k = 0`) and `j = 1` (`k = -π`) the value
/// jumps; there the limit from the right is returned.
pub fn velocity(b: Branch, k: f64) -> f64 {
    let gap = band_gap(b.j, k);
    if b.j < 2 && distance_to_critical(b.j, k) < 1e-12 {
        let edge = 1.0 / 10f64.sqrt();
        return if b.j == 0 {
            -b.sign() * edge
        } else {
            b.sign() * edge
        };
    }
    b.sign() * band_lambda_derivative(b.j, k) / gap.sqrt()
}

/// The trigonometric form
/// `-(-1)^l (2 sin k / 7√(1-A²cos²k)) · sin ξ / √(1 - (28/27)cos²ξ)`.
pub fn velocity_trig(b: Branch, k: f64) -> f64 {
    let a = amplitude();
    let x = xi(b.j, k);
    let c = k.cos();
    -b.sign() * 2.0 * k.sin() / (7.0 * (1.0 - a * a * c * c).sqrt()) * x.sin()
        / (1.0 - 28.0 / 27.0 * x.cos().powi(2)).sqrt()
}

/// `F(x) = -2x(28x² + 33) / (9(4x² - 1)³)`.
pub fn jacobian_rational(x: f64) -> f64 {
    -2.0 * x * (28.0 * x * x + 33.0) / (9.0 * (4.0 * x * x - 1.0).powi(3))
}

/// `dx_{j,l}/dk = -(-1)^l (A/21) F(cos ξ_j) √(1 - (28/27)cos²ξ_j)`.
pub fn velocity_derivative(b: Branch, k: f64) -> f64 {
    let root = band_gap(b.j, k).max(0.0).sqrt();
    -b.sign() * amplitude() / 21.0 * jacobian_rational(xi(b.j, k).cos()) * root
}

/// A finitely supported state on `Z × {|0>..|9>}` of the periodic chain.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellState {
    cells: BTreeMap<i64, [C64; 10]>,
}

impl CellState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, cell: i64, coin: u8, value: C64) {
        self.cells.entry(cell).or_insert([C64::new(0.0, 0.0); 10])[coin as usize] = value;
    }

    pub fn get(&self, cell: i64, coin: u8) -> C64 {
        self.cells
            .get(&cell)
            .map_or(C64::new(0.0, 0.0), |c| c[coin as usize])
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, &[C64; 10])> {
        self.cells.iter().map(|(&c, v)| (c, v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.cells
            .values()
            .flat_map(|c| c.iter())
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for c in self.cells.values_mut() {
                c.iter_mut().for_each(|a| *a /= n);
            }
        }
        n
    }

    /// Largest `|cell|` carrying amplitude.
    pub fn support_radius(&self) -> usize {
        self.cells
            .iter()
            .filter(|(_, v)| v.iter().any(|a| a.norm_sqr() > 0.0))
            .map(|(c, _)| c.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Reads the coin amplitudes of a periodic-chain window.
    pub fn from_walk(psi: &WalkState<'_>) -> Result<Self> {
        let space = psi.space();
        if space.kind() != GraphKind::C4Prime {
            return Err(Error::InvalidArgument(
                "Bloch analysis needs the periodic chain".into(),
            ));
        }
        let mut out = CellState::new();
        for (i, &a) in psi.amplitudes().iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                if let ArcLabel::Coin { cell, coin } = space.label(i) {
                    out.set(cell, coin, a);
                }
            }
        }
        Ok(out)
    }

    /// Places the state in a window; fails when a cell falls outside it.
    pub fn to_walk<'a>(&self, space: &'a ArcSpace) -> Result<WalkState<'a>> {
        let mut amps = vec![C64::new(0.0, 0.0); space.num_arcs()];
        for (cell, coins) in self.cells() {
            for (coin, &a) in coins.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let id = space.coin_arc(cell, coin as u8).ok_or_else(|| {
                    Error::InvalidState(format!("coin {coin} of cell {cell} outside the window"))
                })?;
                amps[id] = a;
            }
        }
        WalkState::new(space, amps)
    }

    /// `ψ̂(k) = Σ_x e^{-ikx} ψ(x)`.
    pub fn fourier(&self, k: f64) -> CoinVector {
        let mut out = CoinVector::zeros();
        for (&x, coins) in &self.cells {
            let phase = C64::from_polar(1.0, -k * x as f64);
            for (i, &a) in coins.iter().enumerate() {
                out[i] += phase * a;
            }
        }
        out
    }
}

/// Alias matching the operation name: the Fourier transform of a finitely
/// supported initial state, evaluated exactly at `k`.
pub fn fourier_initial(state: &CellState, k: f64) -> CoinVector {
    state.fourier(k)
}
