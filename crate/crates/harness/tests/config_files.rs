use phototaxis_harness::config::BackendChoice;
use phototaxis_harness::{HarnessError, RunConfig};
use proptest::prelude::*;

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        1e-4..1e-1f64,
        1usize..100_000,
        1u64..u64::MAX,
        prop::collection::vec(0.0..1.0f64, 1..8),
        any::<bool>(),
        0.5..20.0f64,
        2usize..64,
    )
        .prop_map(|(dt, n, seed, chis, direct, decay, tangents)| {
            let mut c = RunConfig::default();
            c.integration.dt = dt;
            c.integration.backend = if direct { BackendChoice::Direct } else { BackendChoice::Grid };
            c.run.n_particles = n;
            c.run.seed = seed;
            c.run.chi_list = chis;
            c.run.n_tangent = tangents;
            c.light.decay = decay;
            c
        })
}

proptest! {
    #[test]
    fn serialized_configs_parse_back_unchanged(cfg in arb_config()) {
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn load_reports_the_file_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[run]\nn_particles = \"many\"\n").unwrap();
    match RunConfig::load(&path) {
        Err(HarnessError::Config(m)) => assert!(m.contains("bad.toml"), "{m}"),
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = RunConfig::load(std::path::Path::new("/nonexistent/run.toml")).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
}
