use cycle_walk::arc_graph::{CYCLE_COINS, REVERSE_CYCLE_COINS};
use cycle_walk::density::{Ensemble, LimitLaw};
use cycle_walk::evolution::{position_distribution, run_with};
use cycle_walk::homology::{homological_projection, LOCALIZATION_TOLERANCE};
use cycle_walk::presets::{InitialState, Preset};
use cycle_walk::{ArcLabel, ArcSpace, GraphKind, WalkState, C64};
use proptest::prelude::*;

fn cell0_state<'a>(space: &'a ArcSpace, coins: &[(u8, C64)]) -> WalkState<'a> {
    let mut amps = vec![C64::new(0.0, 0.0); space.num_arcs()];
    for &(c, a) in coins {
        amps[space.coin_arc(0, c).unwrap()] = a;
    }
    let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= n);
    WalkState::new(space, amps).unwrap()
}

/// With no overlap on the cycle eigenvectors, the probability at every
/// position decays. The peak rides the ballistic front `|j| ≈ t/√10`, where
/// the group velocity is stationary, and falls off only like `t^{-2/3}`, so
/// at t = 2000 it is still of order `5e-2`; behind the front ρ_t ≈ ρ(j/t)/t.
#[test]
fn no_point_spectrum_means_spreading() {
    let t = 2000;
    let space = ArcSpace::build(GraphKind::C4Prime, t + 3).unwrap();
    let front = 1.0 / 10f64.sqrt();
    // Equal amplitudes on each pair of cycle arcs at a vertex kill every
    // overlap.
    let states = [
        vec![(0, C64::new(1.0, 0.0))],
        vec![
            (0, C64::new(0.3, 0.1)),
            (9, C64::new(-0.2, 0.4)),
            (1, C64::new(0.5, 0.0)),
            (2, C64::new(0.5, 0.0)),
            (4, C64::new(0.0, -0.7)),
            (5, C64::new(0.0, -0.7)),
        ],
    ];
    for coins in states {
        let psi = cell0_state(&space, &coins);
        assert!(homological_projection(&psi).unwrap().delta < LOCALIZATION_TOLERANCE);
        let mut peaks = Vec::new();
        let mut at_origin = 1.0;
        run_with(&psi, t, |s| {
            if s.time() % 500 == 0 && s.time() > 0 {
                let d = position_distribution(s);
                peaks.push(
                    d.iter()
                        .fold((0, 0.0), |a, (j, p)| if p > a.1 { (j, p) } else { a }),
                );
                at_origin = d.get(0);
            }
        })
        .unwrap();
        assert!(
            peaks.windows(2).all(|w| w[1].1 < w[0].1),
            "{coins:?}: {peaks:?}"
        );
        assert!(peaks[3].1 < 0.7 * peaks[0].1, "{coins:?}: {peaks:?}");
        let (j, _) = peaks[3];
        assert!(
            ((j.abs() as f64 / t as f64) - front).abs() < 0.01,
            "{coins:?}: peak at {j}"
        );
        assert!(at_origin < 1e-3, "{coins:?}: {at_origin}");
    }
}

#[test]
fn trapped_mass_of_a_pure_cycle_state_is_one() {
    let space = ArcSpace::build(GraphKind::C4Prime, 2).unwrap();
    // The cycle functionals weigh each cycle arc against the other one at
    // the same vertex.
    let coins: Vec<_> = CYCLE_COINS
        .iter()
        .zip(REVERSE_CYCLE_COINS)
        .enumerate()
        .flat_map(|(i, (&c, r))| {
            let z = C64::from_polar(0.5, std::f64::consts::FRAC_PI_2 * i as f64);
            [(c, z), (r, -z)]
        })
        .collect();
    let psi = cell0_state(&space, &coins);
    let delta = homological_projection(&psi).unwrap().delta;
    assert!((delta - 1.0).abs() < 1e-12, "{delta}");
}

#[test]
fn preset_limit_laws_are_distributions() {
    for p in [Preset::Fig3a, Preset::Fig3b, Preset::Uniform] {
        let members = p
            .ensemble()
            .into_iter()
            .map(|(w, s)| (w, s.cell_state().unwrap()))
            .collect();
        let law = LimitLaw::new(&Ensemble::new(members).unwrap(), 1 << 12).unwrap();
        assert!(
            (law.delta() + law.continuous_mass() - 1.0).abs() < 1e-9,
            "{p}"
        );
        assert!(
            law.cdf(-1.0) < 1e-12 && (law.cdf(1.0) - 1.0).abs() < 1e-9,
            "{p}"
        );
        let xs: Vec<f64> = (-400..=400).map(|i| i as f64 / 1000.0).collect();
        assert!(
            xs.windows(2)
                .all(|w| law.cdf(w[1]) >= law.cdf(w[0]) - 1e-15),
            "{p}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolution_is_unitary(
        raw in proptest::collection::btree_map((-2i64..=2, 0u8..10), (-1.0f64..1.0, -1.0f64..1.0), 1..12),
        steps in 1usize..40,
    ) {
        let entries: Vec<_> = raw
            .iter()
            .map(|(&(cell, coin), &(re, im))| (ArcLabel::Coin { cell, coin }, C64::new(re, im)))
            .collect();
        let Ok((state, _)) = InitialState::new(GraphKind::C4Prime, entries) else { return Ok(()) };
        let space = state.window(steps).unwrap();
        let mut drift = 0.0f64;
        run_with(&state.embed(&space).unwrap(), steps, |s| drift = drift.max((s.norm_sqr() - 1.0).abs())).unwrap();
        prop_assert!(drift < 1e-12);

        // The trapped mass is conserved by the walk.
        let before = homological_projection(&state.embed(&space).unwrap()).unwrap().delta;
        let big = state.window(steps + 2).unwrap();
        let mut after = 0.0;
        run_with(&state.embed(&big).unwrap(), steps, |s| {
            if s.time() == steps {
                after = homological_projection(s).unwrap().delta;
            }
        }).unwrap();
        prop_assert!((before - after).abs() < 1e-12, "{before} vs {after}");
    }
}
