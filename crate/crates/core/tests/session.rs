use std::sync::Arc;

use semint_core::corpus::synth_clusters;
use semint_core::rng;
use semint_core::session::Session;
use semint_core::sim::{simulate_batch, SimConfig};
use semint_core::{Error, Pipeline, PipelineConfig};

fn run(session: &mut Session, sim: &SimConfig, analyst: &mut rng::EngineRng, steps: usize) {
    for _ in 0..steps {
        let b = simulate_batch(session.corpus(), sim, analyst).unwrap();
        session.submit(b.batch).unwrap();
        session.update_now().unwrap();
    }
}

#[test]
fn save_and_resume_matches_uninterrupted_run() {
    let corpus = Arc::new(synth_clusters(3, 15, 16, 0.3, 4).unwrap());
    let sim = SimConfig { seed: 9, ..Default::default() };
    for p in [Pipeline::DeepSi, Pipeline::NeuralSi] {
        for warm in [false, true] {
            let cfg = PipelineConfig { seed: 9, mds_warm_start: warm, ..Default::default() };
            let mut straight = Session::create("a", "c", Arc::clone(&corpus), p, cfg.clone()).unwrap();
            let mut analyst = rng::derived(sim.seed, 40);
            run(&mut straight, &sim, &mut analyst, 6);

            let mut first = Session::create("a", "c", Arc::clone(&corpus), p, cfg.clone()).unwrap();
            let mut analyst = rng::derived(sim.seed, 40);
            run(&mut first, &sim, &mut analyst, 3);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("s.json");
            first.save(&path).unwrap();
            drop(first);
            let mut resumed = Session::load(&path).unwrap();
            run(&mut resumed, &sim, &mut analyst, 3);

            assert_eq!(resumed, straight, "{p} warm={warm}");
            assert_eq!(resumed.replay().unwrap(), straight.history().iter().map(|h| h.projection.clone()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn identical_sessions_start_identically() {
    let corpus = Arc::new(synth_clusters(3, 10, 8, 0.3, 2).unwrap());
    let a = Session::create("a", "c", Arc::clone(&corpus), Pipeline::NeuralSi, PipelineConfig::default()).unwrap();
    let b = Session::create("b", "c", corpus, Pipeline::NeuralSi, PipelineConfig::default()).unwrap();
    assert_eq!(a.latest(), b.latest());
    assert!(a.latest().positions.iter().all(|v| (-1.0..=1.0).contains(v)));
}

#[test]
fn fresh_session_round_trips_through_a_file() {
    let corpus = Arc::new(synth_clusters(2, 5, 4, 0.3, 0).unwrap());
    let s = Session::create("x", "c", corpus, Pipeline::DeepSi, PipelineConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    s.save(&path).unwrap();
    assert_eq!(Session::load(&path).unwrap(), s);

    std::fs::write(&path, b"{\"format_version\":1,\"session\":{\"id\":").unwrap();
    assert!(matches!(Session::load(&path), Err(Error::Json(_))));
    assert!(matches!(Session::load(dir.path().join("missing.json")), Err(Error::Io(_))));
}
