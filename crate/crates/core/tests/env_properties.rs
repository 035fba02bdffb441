mod common;

use std::collections::HashSet;

use common::*;
use proptest::prelude::*;
use qarl_core::env::{
    ActionTable, CircuitEnv, GaussianFeaturizer, HybridAction, Observation, RewardEngine,
    RewardParams,
};
use qarl_core::hamiltonian::{exact_diagonalize, HamiltonianFamily};
use qarl_core::sim::{Gate, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_env(rng: &mut ChaCha8Rng, n: usize, t: usize, j: usize) -> CircuitEnv {
    let rs = [1.0, 1.5, 2.0];
    let family = HamiltonianFamily::new(
        1.0,
        2.0,
        rs.iter().map(|&r| (r, random_pauli_sum(n, 5, 1.0, rng))).collect(),
    )
    .unwrap();
    let bits: String = (0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
    CircuitEnv::new(&family, &bits, t, GaussianFeaturizer::new(j, 1.0, 2.0).unwrap()).unwrap()
}

fn random_action(rng: &mut ChaCha8Rng, env: &CircuitEnv) -> HybridAction {
    HybridAction {
        d: rng.gen_range(0..env.actions().len()),
        c: rng.gen_range(-3.1..3.1),
    }
}

fn check_observation(env: &CircuitEnv, obs: &Observation, t: usize, r: f64) {
    let n = env.n_qubits();
    let dim = 1 << n;
    let v = obs.as_slice();
    assert_eq!(v.len(), Observation::size(n, env.featurizer().len()));
    let norm: f64 = v[..2 * dim].iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-9, "amplitude block norm {norm}");
    let slot = t as f64 / (env.max_gates() - 1).max(1) as f64;
    assert_eq!(v[2 * dim], if env.max_gates() > 1 { slot } else { 0.0 });
    assert_eq!(&v[2 * dim + 1..], env.featurizer().featurize(r).as_slice());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observations_stay_normalized(seed in any::<u64>(), n in 2usize..=4, t in 1usize..=12, j in 0usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut env = random_env(&mut rng, n, t, j);
        let r = [1.0, 1.5, 2.0][rng.gen_range(0..3)];
        let obs = env.reset(r).unwrap();
        check_observation(&env, &obs, 0, r);
        let mut steps = 0;
        loop {
            let tr = env.step(random_action(&mut rng, &env)).unwrap();
            steps += 1;
            check_observation(&env, &tr.next_obs, steps, r);
            prop_assert_eq!(tr.done, steps == t);
            if tr.done {
                break;
            }
        }
        prop_assert_eq!(steps, t);
        prop_assert!(env.step(random_action(&mut rng, &env)).is_err());
    }

    #[test]
    fn replaying_actions_reproduces_transitions(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut env = random_env(&mut rng, n, 8, 3);
        let r = 1.5;
        env.reset(r).unwrap();
        let mut first = Vec::new();
        while !env.is_done() {
            first.push(env.step(random_action(&mut rng, &env)).unwrap());
        }
        env.reset(r).unwrap();
        for tr in &first {
            let again = env.step(tr.action).unwrap();
            prop_assert_eq!(&again, tr);
        }
    }

    #[test]
    fn telescoping_with_frozen_engine(
        seed in any::<u64>(),
        m in 1usize..6,
        k in 1usize..6,
        sigma_min in 0.3f64..3.0,
        c_exp in 0.0f64..5.0,
        c_lin in 0.0f64..2.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut engine = RewardEngine::new(RewardParams { m, k, sigma_min, c_exp, c_lin, e0: 0.5 }).unwrap();
        for _ in 0..rng.gen_range(0..30) {
            engine.observe(1.0, rng.gen_range(-2.0..2.0));
        }
        let energies: Vec<f64> = (0..=rng.gen_range(1..15)).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let total: f64 = energies.windows(2).map(|w| engine.reward_for(1.0, w[0], w[1])).sum();
        let expected = engine.potential(1.0, *energies.last().unwrap()) - engine.potential(1.0, energies[0]);
        prop_assert!((total - expected).abs() <= 1e-12, "{} vs {}", total, expected);
    }

    #[test]
    fn buffers_stay_ordered(seed in any::<u64>(), m in 1usize..8, k in 1usize..8, count in 0usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut engine = RewardEngine::new(RewardParams { m, k, sigma_min: 0.01, c_exp: 5.0, c_lin: 1.0, e0: 1.0 }).unwrap();
        let mut seen = vec![1.0];
        for _ in 0..count {
            // Coarse values make ties common.
            let e = (rng.gen_range(-20..20) as f64) * 0.1;
            engine.observe(0.0, e);
            seen.push(e);
            let (low, next) = engine.buffers(0.0);
            let max_low = low.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min_next = next.iter().copied().fold(f64::INFINITY, f64::min);
            if engine.pool(0.0).len() > m {
                prop_assert!(max_low <= min_next);
            }
            let (_, sigma) = engine.center_scale(0.0);
            prop_assert!(sigma > 0.0);
        }
        seen.sort_by(f64::total_cmp);
        seen.truncate(m + k);
        prop_assert_eq!(engine.pool(0.0), seen.as_slice());
    }
}

#[test]
fn reward_examples() {
    let mut engine = RewardEngine::new(RewardParams {
        m: 1,
        k: 1,
        sigma_min: 0.5,
        c_exp: 5.0,
        c_lin: 0.0,
        e0: 0.0,
    })
    .unwrap();
    engine.observe(0.0, -1.0);
    let (mu, sigma) = engine.center_scale(0.0);
    assert_eq!((mu, sigma), (-1.0, 1.5));
    let r = engine.reward_for(0.0, mu, mu - sigma);
    assert!((r - 5.0 * (std::f64::consts::E - 1.0)).abs() < 1e-12);
    assert!((r - 8.5914).abs() < 1e-4);
    assert_eq!(engine.reward_for(0.0, 0.3, 0.3), 0.0);
    let vanishing = engine.reward_for(0.0, mu, mu + 200.0 * sigma);
    assert!((vanishing + engine.f_exp(0.0, mu) * 5.0).abs() < 1e-12);
}

#[test]
fn every_placement_has_exactly_one_index() {
    for (n, size) in [(2, 8), (3, 15), (4, 24), (7, 63)] {
        let table = ActionTable::new(n).unwrap();
        assert_eq!(table.len(), size);
        let mut seen = HashSet::new();
        for d in 0..table.len() {
            let g = table.decode(HybridAction { d, c: 0.5 }).unwrap();
            let key = (g.kind.name(), g.control, g.target);
            assert!(seen.insert(key), "duplicate placement {key:?}");
            assert_eq!(table.is_cnot(d), g.kind == GateKind::Cnot);
        }
        let mut expected = HashSet::new();
        for t in 0..n {
            for c in 0..n {
                if c != t {
                    expected.insert((GateKind::Cnot.name(), Some(c), t));
                }
            }
            for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
                expected.insert((kind.name(), None, t));
            }
        }
        assert_eq!(seen, expected);
        assert!(table.decode(HybridAction { d: size, c: 0.0 }).is_err());
    }
}

#[test]
fn decoded_rotation_uses_the_action_angle() {
    let table = ActionTable::new(2).unwrap();
    for d in 0..table.len() {
        let g = table.decode(HybridAction { d, c: -1.25 }).unwrap();
        if g.kind.is_rotation() {
            assert_eq!(g, Gate::rotation(g.kind, g.target, -1.25));
        }
    }
}

#[test]
fn energies_never_undercut_the_ground_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.gen_range(2..=3);
        let h = random_pauli_sum(n, 6, 1.0, &mut rng);
        let e0 = exact_diagonalize(&h).unwrap().0;
        let family = HamiltonianFamily::single(0.0, h).unwrap();
        let mut env = CircuitEnv::new(&family, &"0".repeat(n), 12, GaussianFeaturizer::new(0, 0.0, 1.0).unwrap()).unwrap();
        env.reset(0.0).unwrap();
        while !env.is_done() {
            let e = env.step(random_action(&mut rng, &env)).unwrap().e_after;
            assert!(e >= e0 - 1e-9);
        }
    }
}
