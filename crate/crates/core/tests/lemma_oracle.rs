//! Checks the closed-form tail and cycle probabilities on the tailed cycle
//! against a direct Grover walk written here from scratch: vertices and
//! neighbour lists only, no shared code with the library's arc space.

use std::collections::BTreeMap;

use cycle_walk::arc_graph::Site;
use cycle_walk::evolution::{lemma_limits, lemma_mu, LemmaCoefficients, TailSide};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum V {
    Tail(i64),
    ZeroPrime,
    Up,
    Down,
    Zero,
}

const TAIL: i64 = 90;

fn neighbours(v: V) -> Vec<V> {
    match v {
        V::ZeroPrime => vec![V::Tail(-1), V::Up, V::Down],
        V::Zero => vec![V::Tail(1), V::Up, V::Down],
        V::Up | V::Down => vec![V::ZeroPrime, V::Zero],
        V::Tail(-1) => vec![V::ZeroPrime, V::Tail(-2)],
        V::Tail(1) => vec![V::Zero, V::Tail(2)],
        V::Tail(n) if n.abs() == TAIL => vec![V::Tail(n - n.signum())],
        V::Tail(n) => vec![V::Tail(n - 1), V::Tail(n + 1)],
    }
}

/// `(at, came_from)` for the ten labelled arcs.
const COINS: [(V, V); 10] = [
    (V::ZeroPrime, V::Tail(-1)),
    (V::ZeroPrime, V::Down),
    (V::ZeroPrime, V::Up),
    (V::Up, V::ZeroPrime),
    (V::Up, V::Zero),
    (V::Down, V::Zero),
    (V::Down, V::ZeroPrime),
    (V::Zero, V::Up),
    (V::Zero, V::Down),
    (V::Zero, V::Tail(1)),
];

type State = BTreeMap<(V, V), C64>;

fn step(psi: &State) -> State {
    let mut by_vertex: BTreeMap<V, Vec<(V, C64)>> = BTreeMap::new();
    for (&(at, from), &a) in psi {
        by_vertex.entry(at).or_default().push((from, a));
    }
    let mut out = State::new();
    for (v, incoming) in by_vertex {
        let nb = neighbours(v);
        let total: C64 = incoming.iter().map(|(_, a)| a).sum();
        let coin = total * (2.0 / nb.len() as f64);
        for w in nb {
            let own = incoming
                .iter()
                .find(|(f, _)| *f == w)
                .map_or(C64::new(0.0, 0.0), |(_, a)| *a);
            *out.entry((w, v)).or_default() += coin - own;
        }
    }
    out
}

fn mass_at(psi: &State, v: V) -> f64 {
    psi.iter()
        .filter(|((at, _), _)| *at == v)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

fn coefficients() -> impl Strategy<Value = [C64; 10]> {
    proptest::array::uniform10((-1.0f64..1.0, -1.0f64..1.0))
        .prop_map(|a| a.map(|(re, im)| C64::new(re, im)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tail_and_cycle_probabilities(raw in coefficients()) {
        prop_assume!(raw.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let coeffs = LemmaCoefficients::normalized(raw).unwrap();
        let mut psi: State = COINS.iter().zip(coeffs.as_array()).map(|(&arc, &a)| (arc, a)).collect();
        let limits = lemma_limits(&coeffs);
        for n in 1..=80usize {
            psi = step(&psi);
            for (side, v) in [(TailSide::Negative, V::Tail(-1)), (TailSide::Positive, V::Tail(1))] {
                let exact = lemma_mu(&coeffs, n, side).unwrap();
                prop_assert!((mass_at(&psi, v) - exact).abs() < 1e-13, "n={n} {side:?}");
            }
            if n >= 64 {
                let phase = (n - 1) % 4 + 1;
                for (site, v) in [(Site::ZeroPrime, V::ZeroPrime), (Site::Up, V::Up), (Site::Down, V::Down), (Site::Zero, V::Zero)] {
                    prop_assert!((mass_at(&psi, v) - limits.get(site, phase)).abs() < 1e-12, "n={n} {site:?}");
                }
            }
        }
        let norm: f64 = psi.values().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_arc_cycle_limits() {
    // a_1 = 1: half the mass stays on the cycle, and 0' holds all of it
    // exactly at t ≡ 0 (mod 4).
    let mut psi: State = [(COINS[1], C64::new(1.0, 0.0))].into_iter().collect();
    for _ in 0..64 {
        psi = step(&psi);
    }
    assert!((mass_at(&psi, V::ZeroPrime) - 0.5).abs() < 1e-12);
    psi = step(&psi);
    assert!(mass_at(&psi, V::ZeroPrime) < 1e-12);
    let limits = lemma_limits(&LemmaCoefficients::unit(1));
    assert_eq!(limits.get(Site::ZeroPrime, 4), 0.5);
    assert_eq!(limits.get(Site::ZeroPrime, 1), 0.0);
}
