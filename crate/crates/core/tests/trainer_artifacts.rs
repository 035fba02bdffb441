mod common;

use common::{synthetic_family, synthetic_hamiltonian};
use proptest::prelude::*;
use qarl_core::hamiltonian::{exact_diagonalize, HamiltonianFamily};
use qarl_core::sim::Circuit;
use qarl_core::trainer::{
    asymmetric_spread, build_env, grid_for, load_agent, mean_abs_error, moving_average, predict_pec,
    read_episode_log, read_pec, save_checkpoint, train, write_pec, EpisodeLog, EpisodeRecord, PecResult,
    RunConfig, Trainer,
};

const SMALL_RUN: &str = r#"
seed = 0
[system]
family = "synthetic"
initial_state = "00"
prediction_step = 0.05
[training]
episodes = 80
max_gates = 3
runs = 1
[sac]
batch_size = 16
buffer_capacity = 1000
random_steps = 60
update_every = 10
[network]
actor_hidden = [16]
critic_hidden = [16]
[reward]
e0 = 0.8
[featurization]
count = 2
interval = [0.0, 1.0]
"#;

fn setup() -> (RunConfig, HamiltonianFamily) {
    (
        RunConfig::from_toml(SMALL_RUN).unwrap(),
        synthetic_family(&[0.0, 0.5, 1.0]),
    )
}

fn trained(seed: u64) -> (Trainer, Vec<EpisodeRecord>) {
    let (cfg, family) = setup();
    let mut records = Vec::new();
    let trainer = train(&cfg, &family, seed, |_, rec| {
        records.push(rec.clone());
        Ok(())
    })
    .unwrap();
    (trainer, records)
}

fn curve(trainer: &Trainer) -> PecResult {
    let (cfg, family) = setup();
    let grid = grid_for(&family, cfg.system.prediction_step).unwrap();
    let mut env = build_env(&cfg, &family).unwrap();
    predict_pec(trainer.agent(), &mut env, &family, &grid, None).unwrap()
}

#[test]
fn same_seed_reproduces_the_run() {
    let (a, rec_a) = trained(3);
    let (b, rec_b) = trained(3);
    assert_eq!(rec_a.len(), 80);
    assert_eq!(rec_a, rec_b);
    assert_eq!(a.agent().network_texts(), b.agent().network_texts());
    assert!(a.updates_done() > 0);
    let (c, _) = trained(4);
    assert_ne!(a.agent().network_texts(), c.agent().network_texts());
}

#[test]
fn checkpoint_round_trip_restores_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let (original, _) = trained(5);
    save_checkpoint(dir.path(), &original).unwrap();

    let (cfg, family) = setup();
    let mut fresh = Trainer::new(&cfg, &family, 99).unwrap();
    assert_ne!(fresh.agent().network_texts(), original.agent().network_texts());
    let episodes = load_agent(dir.path(), fresh.agent_mut()).unwrap();
    assert_eq!(episodes, 80);
    assert_eq!(fresh.agent().network_texts(), original.agent().network_texts());
    assert_eq!(fresh.agent().temps.log_alpha_discrete, original.agent().temps.log_alpha_discrete);
    assert_eq!(fresh.agent().temps.log_alpha_continuous, original.agent().temps.log_alpha_continuous);
    assert_eq!(curve(&fresh), curve(&original));
}

#[test]
fn checkpoint_rejects_mismatched_networks() {
    let dir = tempfile::tempdir().unwrap();
    let (original, _) = trained(6);
    save_checkpoint(dir.path(), &original).unwrap();
    let (mut cfg, family) = setup();
    cfg.network.actor_hidden = vec![8];
    let mut other = Trainer::new(&cfg, &family, 0).unwrap();
    assert!(load_agent(dir.path(), other.agent_mut()).is_err());
    assert!(load_agent(&dir.path().join("missing"), other.agent_mut()).is_err());
}

#[test]
fn episode_log_appends_and_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("episodes.csv");
    let (_, records) = trained(7);
    let mut log = EpisodeLog::create(&path).unwrap();
    for rec in &records[..50] {
        log.record(rec).unwrap();
    }
    drop(log);
    let mut log = EpisodeLog::append_to(&path).unwrap();
    for rec in &records[50..] {
        log.record(rec).unwrap();
    }
    drop(log);
    let rows = read_episode_log(&path).unwrap();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(&records) {
        assert_eq!(row.index, rec.index);
        assert_eq!(row.r, rec.r);
        assert_eq!(row.final_energy, rec.final_energy());
        assert_eq!(row.ret, rec.ret);
        assert_eq!(row.eval, rec.eval);
    }
    assert!(EpisodeLog::append_to(&dir.path().join("absent.csv")).is_err());
}

#[test]
fn pec_files_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let (trainer, _) = trained(8);
    let pec = curve(&trainer);
    write_pec(dir.path(), &pec).unwrap();
    let rows = read_pec(&dir.path().join("pec.csv")).unwrap();
    assert_eq!(rows.len(), pec.points.len());
    for (row, p) in rows.iter().zip(&pec.points) {
        assert_eq!((row.r, row.energy, row.exact, row.fidelity), (p.r, p.energy, p.exact, p.fidelity));
        assert_eq!(row.seen, p.seen);
        assert_eq!(row.abs_error, p.exact.map(|e| (p.energy - e).abs()));
        let text = std::fs::read_to_string(dir.path().join(&row.circuit)).unwrap();
        assert_eq!(Circuit::parse(&text).unwrap(), p.circuit);
    }
}

#[test]
fn predicted_curve_respects_grid_and_variational_bound() {
    let (trainer, _) = trained(9);
    let pec = curve(&trainer);
    assert_eq!(pec.points.len(), 21);
    for p in &pec.points {
        let seen = [0.0, 0.5, 1.0].iter().any(|s| (s - p.r).abs() < 1e-9);
        assert_eq!(p.seen, seen, "r = {}", p.r);
        assert_eq!(p.nearest_fallback, !seen);
        let exact = p.exact.unwrap();
        assert!(p.energy >= exact - 1e-9);
        assert!(p.circuit.gates.len() <= 3);
        let fid = p.fidelity.unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&fid));
    }
    // With an evaluation family every point is scored on its own Hamiltonian.
    let (cfg, family) = setup();
    let grid = grid_for(&family, cfg.system.prediction_step).unwrap();
    let eval = synthetic_family(&grid);
    let mut env = build_env(&cfg, &family).unwrap();
    let scored = predict_pec(trainer.agent(), &mut env, &family, &grid, Some(&eval)).unwrap();
    for p in &scored.points {
        assert!(!p.nearest_fallback);
        assert_eq!(p.exact, Some(exact_diagonalize(&synthetic_hamiltonian(p.r)).unwrap().0));
    }
    assert!(predict_pec(trainer.agent(), &mut env, &family, &[1.5], None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn spread_is_bounded_and_equivariant(
        xs in prop::collection::vec(-100.0f64..100.0, 1..40),
        shift in -10.0f64..10.0,
        scale in 0.1f64..10.0,
    ) {
        let s = asymmetric_spread(&xs).unwrap();
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        prop_assert!(s.mean >= lo - 1e-9 && s.mean <= hi + 1e-9);
        prop_assert!(s.minus >= 0.0 && s.plus >= 0.0);
        let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
        let t = asymmetric_spread(&moved).unwrap();
        prop_assert!((t.mean - (scale * s.mean + shift)).abs() < 1e-8);
        prop_assert!((t.minus - scale * s.minus).abs() < 1e-8);
        prop_assert!((t.plus - scale * s.plus).abs() < 1e-8);
    }

    #[test]
    fn moving_average_stays_within_window_range(
        xs in prop::collection::vec(-50.0f64..50.0, 1..60),
        window in 1usize..10,
    ) {
        prop_assume!(window <= xs.len());
        let avg = moving_average(&xs, window).unwrap();
        prop_assert_eq!(avg.len(), xs.len() - window + 1);
        for (i, a) in avg.iter().enumerate() {
            let w = &xs[i..i + window];
            let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assert!(*a >= lo - 1e-9 && *a <= hi + 1e-9);
        }
    }

    #[test]
    fn mean_abs_error_is_a_mean_of_distances(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..30),
    ) {
        let (p, r): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let e = mean_abs_error(&p, &r).unwrap();
        let max = p.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(e >= 0.0 && e <= max + 1e-12);
        prop_assert_eq!(mean_abs_error(&r, &r).unwrap(), 0.0);
        prop_assert!(mean_abs_error(&p[1..], &r).is_err());
    }
}
