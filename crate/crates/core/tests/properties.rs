use std::f64::consts::PI;

use mbqc_core::budget::{purcell, t2_compose, CavityParams};
use mbqc_core::erasure::{enumerate_heralds, ideal_attempt, lossy_attempt, ApparatusParams, MatterState, Scheme};
use mbqc_core::graph::{GraphRegister, LocalClifford};
use mbqc_core::growth::{simulate_branch_growth, BranchGrowthConfig, LinkModel};
use mbqc_core::lu::lc_equivalent_to_graph;
use mbqc_core::mbqc::{
    compile_circuit, compile_rotation, rotation_unitary, run_all_branches, run_pattern, CircuitSpec, Execution, Gate,
    OutcomeSource,
};
use mbqc_core::seed::trial_rng;
use mbqc_core::statevec::{gates, reduced_density, Basis, DensityState, Pauli, PureState};
use mbqc_core::verify::{broker_farm_trial, random_clifford_trial};
use num_complex::Complex64;
use proptest::prelude::*;

fn state_strategy(n: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| PureState::from_unnormalized(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn clifford_strategy() -> impl Strategy<Value = LocalClifford> {
    (0u8..24).prop_map(|i| LocalClifford::from_index(i).unwrap())
}

fn gate_strategy(wires: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (0..wires, -PI..PI).prop_map(|(wire, angle)| Gate::Rz { wire, angle }),
        (0..wires).prop_map(|wire| Gate::H { wire }),
        (0..wires, 1..wires).prop_map(move |(a, d)| Gate::Cz { a, b: (a + d) % wires }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_norm(psi in state_strategy(3), q in 0usize..3, c in clifford_strategy(), phi in -PI..PI) {
        let mut s = psi.clone();
        s.apply_1q(q, &c.matrix()).unwrap();
        s.apply_1q((q + 1) % 3, &gates::phase(phi)).unwrap();
        s.apply_cz(q, (q + 2) % 3).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcome_probabilities_sum_to_one(psi in state_strategy(3), q in 0usize..3, phi in -PI..PI, axis in 0usize..3) {
        for basis in [Basis::Pauli(Pauli::ALL[axis]), Basis::Equatorial(phi)] {
            let p = psi.outcome_probabilities(q, basis).unwrap();
            prop_assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible(psi in state_strategy(3), seed in any::<u64>()) {
        let a = psi.measure(1, Basis::Pauli(Pauli::X), &mut trial_rng(seed, 0)).unwrap();
        let b = psi.measure(1, Basis::Pauli(Pauli::X), &mut trial_rng(seed, 0)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cz_commutes_with_gates_on_a_third_qubit(psi in state_strategy(3), c in clifford_strategy(), phi in -PI..PI) {
        let u = gates::matmul(&c.matrix(), &gates::phase(phi));
        let mut first = psi.clone();
        first.apply_cz(0, 1).unwrap();
        first.apply_1q(2, &u).unwrap();
        let mut second = psi.clone();
        second.apply_1q(2, &u).unwrap();
        second.apply_cz(0, 1).unwrap();
        prop_assert!(first.equal_up_to_global_phase(&second, 1e-12).unwrap());
    }

    #[test]
    fn z_measurement_only_deletes_edges(
        edges in prop::collection::vec((0u32..6, 0u32..6), 0..12),
        v in 0u32..6,
        seed in any::<u64>(),
    ) {
        let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let mut g = GraphRegister::from_edges(6, &edges).unwrap();
        let before: Vec<_> = g.edges().into_iter().filter(|&(a, b)| a != v && b != v).collect();
        g.measure_pauli(v, Pauli::Z, &mut trial_rng(seed, 0)).unwrap();
        prop_assert_eq!(g.edges(), before);
    }

    #[test]
    fn add_cz_toggles_one_edge_between_identity_vertices(
        edges in prop::collection::vec((0u32..5, 0u32..5), 0..8),
        a in 0u32..5,
        d in 1u32..5,
    ) {
        let edges: Vec<_> = edges.into_iter().filter(|(x, y)| x != y).collect();
        let mut g = GraphRegister::from_edges(5, &edges).unwrap();
        let b = (a + d) % 5;
        let (had, count) = (g.has_edge(a, b), g.num_edges());
        g.add_cz(a, b).unwrap();
        prop_assert_eq!(g.has_edge(a, b), !had);
        prop_assert_eq!(g.num_edges(), if had { count - 1 } else { count + 1 });
    }

    #[test]
    fn y_on_a_chain_interior_joins_its_neighbours(outcome in 0u8..2, len in 3u32..7, pick in 0u32..100) {
        let edges: Vec<_> = (0..len - 1).map(|i| (i, i + 1)).collect();
        let mut g = GraphRegister::from_edges(len, &edges).unwrap();
        let v = 1 + pick % (len - 2);
        g.measure_pauli_forced(v, Pauli::Y, outcome).unwrap();
        prop_assert!(g.has_edge(v - 1, v + 1));
        let mut pair = GraphRegister::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        pair.measure_pauli_forced(1, Pauli::Y, outcome).unwrap();
        prop_assert!(lc_equivalent_to_graph(&pair.to_dense().unwrap(), &[(0, 1)]).unwrap());
    }

    #[test]
    fn random_clifford_sequences_match_dense(n in 2usize..=12, seed in any::<u64>()) {
        prop_assert!(random_clifford_trial(n, 30, &mut trial_rng(seed, 0), false).is_ok());
    }

    #[test]
    fn herald_probabilities_sum_to_one(
        eta in 0.0f64..=1.0,
        dark_prob in 0.0f64..0.2,
        scheme in 0usize..3,
        epsilon in 0.05f64..1.0,
        number_resolving in any::<bool>(),
    ) {
        let scheme = [Scheme::IdealSingleClick, Scheme::WeakExcitation { epsilon }, Scheme::TwoPhoton][scheme];
        let params = ApparatusParams { eta, dark_prob, scheme, number_resolving };
        let records = enumerate_heralds(&scheme.default_input().unwrap(), 1, 0, &params).unwrap();
        let total: f64 = records.iter().map(|r| r.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for r in &records {
            prop_assert!(r.accepted || r.false_fraction == 0.0);
        }
    }

    #[test]
    fn single_clicks_are_maximally_entangled(seed in any::<u64>()) {
        let plus = PureState::init_plus(2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let r = ideal_attempt(&plus, &mut rng).unwrap();
        if r.clicks_left + r.clicks_right == 1 {
            let MatterState::Pure(psi) = r.post_state else { panic!("ideal attempts are pure") };
            for ev in reduced_density(&psi, &[0]).unwrap().eigenvalues() {
                prop_assert!((ev - 0.5).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lossless_noiseless_attempts_replay_ideal_ones(seed in any::<u64>(), theta in 0.1f64..3.0) {
        let one = PureState::single(Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0)).unwrap();
        let input = one.append(&PureState::init_plus(1).unwrap()).unwrap();
        let ideal = ideal_attempt(&input, &mut trial_rng(seed, 1)).unwrap();
        let lossy = lossy_attempt(&input, &ApparatusParams::ideal(), &mut trial_rng(seed, 1)).unwrap();
        prop_assert_eq!(&ideal.rounds, &lossy.rounds);
        prop_assert_eq!(ideal.accepted, lossy.accepted);
        let MatterState::Pure(psi) = &ideal.post_state else { panic!("ideal attempts are pure") };
        prop_assert!((lossy.post_state.fidelity(psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_patterns_are_deterministic(a in -PI..PI, b in -PI..PI, c in -PI..PI, seed in any::<u64>()) {
        let pattern = compile_rotation([a, b, c]);
        let mut rng = trial_rng(seed, 0);
        let input = PureState::single(
            Complex64::new(0.6, 0.0),
            Complex64::from_polar(0.8, rand::Rng::random_range(&mut rng, 0.0..2.0 * PI)),
        ).unwrap();
        let mut target = input.clone();
        target.apply_1q(0, &rotation_unitary([a, b, c])).unwrap();
        for run in run_all_branches(&pattern.blueprint().unwrap(), &pattern, &input, Execution::Eager).unwrap() {
            prop_assert!(1.0 - run.output.fidelity(&target).unwrap() < 1e-10);
        }
    }

    #[test]
    fn frame_depends_only_on_outcomes(a in -PI..PI, b in -PI..PI, c in -PI..PI, bits in 0u8..8) {
        let pattern = compile_rotation([a, b, c]);
        let forced: Vec<u8> = (0..3).map(|k| (bits >> k) & 1).collect();
        let g = pattern.blueprint().unwrap();
        let mut frames = Vec::new();
        for input in [PureState::zero(1).unwrap(), PureState::init_plus(1).unwrap()] {
            if let Ok(run) = run_pattern(&g, &pattern, &input, Execution::Lazy, OutcomeSource::Forced(&forced)) {
                prop_assert_eq!(&run.frame, &pattern.frame(&forced));
                frames.push(run.frame);
            }
        }
        prop_assert!(frames.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn lazy_and_eager_runs_agree(gates in prop::collection::vec(gate_strategy(2), 0..6), seed in any::<u64>()) {
        let circuit = CircuitSpec { wires: 2, gates };
        let (g, p) = compile_circuit(&circuit).unwrap();
        prop_assume!(g.len() <= 14);
        let input = PureState::init_plus(2).unwrap();
        let target = circuit.simulate(&input).unwrap();
        let eager = run_pattern(&g, &p, &input, Execution::Eager, OutcomeSource::Sampled(&mut trial_rng(seed, 0))).unwrap();
        let lazy = run_pattern(&g, &p, &input, Execution::Lazy, OutcomeSource::Sampled(&mut trial_rng(seed, 0))).unwrap();
        prop_assert_eq!(&eager.outcomes, &lazy.outcomes);
        prop_assert!(lazy.peak_qubits <= eager.peak_qubits);
        for run in [eager, lazy] {
            prop_assert!(run.output.equal_up_to_global_phase(&target, 1e-10).unwrap());
        }
    }

    #[test]
    fn t2_never_exceeds_twice_t1(t1 in 1e-9f64..1e3, tpd in 1e-9f64..1e3) {
        prop_assert!(t2_compose(t1, tpd).unwrap() <= 2.0 * t1);
    }

    #[test]
    fn purcell_scales_inversely_with_volume(q in 1.0f64..1e6, v in 0.1f64..100.0, n in 1.0f64..4.0, j in -8i32..8) {
        let k = 2f64.powi(j);
        let base = CavityParams { quality_factor: q, mode_volume: v, refractive_index: n };
        let scaled = CavityParams { mode_volume: v * k, ..base };
        prop_assert_eq!(purcell(&scaled).unwrap(), purcell(&base).unwrap() / k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn broker_failures_leave_clients_alone(seed in any::<u64>(), p in 0.1f64..0.6) {
        let link = LinkModel::new(p, 1e-9).unwrap();
        let r = broker_farm_trial(4, 30, &link, &mut trial_rng(seed, 0)).unwrap();
        prop_assert!(r.max_client_drift <= 1e-12);
        prop_assert_eq!(r.certified_edges as u64, r.successes);
    }

    #[test]
    fn model_time_is_attempts_times_attempt_time(p in 0.05f64..1.0, steps in 1usize..300, t in 1e-10f64..1e-6) {
        let cfg = BranchGrowthConfig { link: LinkModel::new(p, t).unwrap(), steps, trials: 3, initial_length: None, trace_every: None };
        for s in simulate_branch_growth(&cfg, 5).unwrap().stats {
            prop_assert_eq!(s.model_time, s.attempts as f64 * t);
        }
    }
}

#[test]
fn unheralded_single_click_mixture_is_separable() {
    let left = PureState::from_labels(&[("01", Complex64::new(1.0, 0.0)), ("10", Complex64::new(0.0, 1.0))]).unwrap();
    let right = PureState::from_labels(&[("01", Complex64::new(0.0, 1.0)), ("10", Complex64::new(1.0, 0.0))]).unwrap();
    let mix = DensityState::mix(&[
        (0.5, DensityState::from_pure(&left).unwrap()),
        (0.5, DensityState::from_pure(&right).unwrap()),
    ])
    .unwrap();
    assert!(mix.min_partial_transpose_eigenvalue(&[0]).unwrap() > -1e-10);
    assert!(DensityState::from_pure(&left).unwrap().min_partial_transpose_eigenvalue(&[0]).unwrap() < -0.4);
}

#[test]
fn lossy_click_frequencies_match_enumeration() {
    const ATTEMPTS: usize = 40_000;
    let params = ApparatusParams { eta: 0.6, dark_prob: 0.05, scheme: Scheme::IdealSingleClick, number_resolving: false };
    let input = PureState::init_plus(2).unwrap();
    let records = enumerate_heralds(&input, 1, 0, &params).unwrap();
    let mut rng = trial_rng(11, 0);
    let mut counts = vec![0usize; records.len()];
    for _ in 0..ATTEMPTS {
        let r = lossy_attempt(&input, &params, &mut rng).unwrap();
        let k = records.iter().position(|e| e.rounds == r.rounds).expect("sampled record is enumerated");
        counts[k] += 1;
    }
    for (rec, &k) in records.iter().zip(&counts) {
        let f = k as f64 / ATTEMPTS as f64;
        let se = (rec.probability * (1.0 - rec.probability) / ATTEMPTS as f64).sqrt();
        assert!((f - rec.probability).abs() <= 4.0 * se + 1e-12, "{:?}: {f} vs {}", rec.rounds, rec.probability);
    }
}
