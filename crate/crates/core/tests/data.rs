use std::fs;
use std::path::Path;

use dispatch_core::data::{
    generate_synthetic, ingest_dir, quantize_location, sample_condition, synthesize, write_dataset,
    ConditionName, ExperimentCondition, GeneratorConfig, Manifest, INCIDENTS_FILE, MANIFEST_FILE,
    RESPONSES_FILE, VEHICLES_FILE,
};
use dispatch_core::roadnet::{load_graph, EDGES_FILE, NODES_FILE, PROFILES_FILE};
use proptest::prelude::*;

const ALL_FILES: [&str; 7] = [
    NODES_FILE,
    EDGES_FILE,
    PROFILES_FILE,
    INCIDENTS_FILE,
    RESPONSES_FILE,
    VEHICLES_FILE,
    MANIFEST_FILE,
];

fn small_city() -> GeneratorConfig {
    GeneratorConfig {
        grid_cols: 20,
        grid_rows: 20,
        arterial_every: 5,
        vehicles: 10,
        days: 60,
        incidents_per_day: 12.0,
        ..GeneratorConfig::default()
    }
}

fn same_files(a: &Path, b: &Path) -> bool {
    ALL_FILES
        .iter()
        .all(|f| fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn quantize_invariants(e in 0.0f64..1e7, n in 0.0f64..1e7) {
        let p = quantize_location(e, n).unwrap();
        prop_assert_eq!(quantize_location(p.easting, p.northing).unwrap(), p);
        prop_assert_eq!(p.easting % 100.0, 0.0);
        prop_assert_eq!(p.northing % 100.0, 0.0);
        let moved = ((p.easting - e).powi(2) + (p.northing - n).powi(2)).sqrt();
        prop_assert!(moved <= 50.0 * std::f64::consts::SQRT_2 + 1e-9);
    }
}

#[test]
fn generator_is_deterministic() {
    let cfg = small_city();
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    generate_synthetic(&cfg, 11, a.path()).unwrap();
    generate_synthetic(&cfg, 11, b.path()).unwrap();
    generate_synthetic(&cfg, 12, c.path()).unwrap();
    assert!(same_files(a.path(), b.path()));
    assert!(!same_files(a.path(), c.path()));
}

#[test]
fn ingest_round_trips_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    let written = generate_synthetic(&small_city(), 3, dir.path()).unwrap();
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest, written);

    let graph = load_graph(dir.path()).unwrap();
    let ds = ingest_dir(dir.path()).unwrap();
    assert_eq!(graph.node_count(), manifest.nodes);
    assert_eq!(graph.edge_count(), manifest.edges);
    assert_eq!(ds.incidents().len(), manifest.incidents);
    assert_eq!(ds.response_records.len(), manifest.responses);
    assert_eq!(ds.vehicles().len(), manifest.vehicles);
    assert_eq!(ds.vehicle_records.len(), manifest.idle_windows);
    assert_eq!(
        ds.incidents().len() - ds.first_responses().len(),
        manifest.unanswered_incidents
    );

    let out = tempfile::tempdir().unwrap();
    write_dataset(&ds, out.path()).unwrap();
    for f in [INCIDENTS_FILE, RESPONSES_FILE, VEHICLES_FILE] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(out.path().join(f)).unwrap(),
            "{f}"
        );
    }
    // in-memory and ingested datasets agree
    let mem = synthesize(&small_city(), 3).unwrap();
    assert_eq!(mem.dataset.incidents(), ds.incidents());
}

#[test]
fn incident_count_within_poisson_bounds() {
    for seed in 0..5 {
        let cfg = GeneratorConfig {
            grid_cols: 10,
            grid_rows: 10,
            vehicles: 30,
            days: 100,
            incidents_per_day: 25.0,
            ..GeneratorConfig::default()
        };
        let m = synthesize(&cfg, seed).unwrap().manifest;
        let expected = 2500.0;
        assert!(
            (m.incidents as f64 - expected).abs() <= 3.0 * expected.sqrt(),
            "seed {seed}: {} incidents",
            m.incidents
        );
    }
}

#[test]
fn sampling_is_uniform() {
    let data = synthesize(
        &GeneratorConfig {
            grid_cols: 10,
            grid_rows: 10,
            days: 31,
            incident_count: Some(80),
            ..GeneratorConfig::default()
        },
        1,
    )
    .unwrap();
    let ds = &data.dataset;
    let mut cond = ExperimentCondition::resolve(ConditionName::OneMonthAllCcgs, ds, 0).unwrap();
    let population: Vec<_> = ds
        .incidents()
        .iter()
        .filter(|i| cond.matches(i))
        .map(|i| i.id)
        .collect();
    let k = population.len();
    assert!(k > 30);
    cond.sample_size = 1;
    let draws = 10_000;
    let mut counts = vec![0usize; k];
    for seed in 0..draws {
        cond.seed = seed;
        let s = sample_condition(ds, &cond).unwrap();
        counts[population.binary_search(&s[0].id).unwrap()] += 1;
    }
    let expected = draws as f64 / k as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (k - 1) as f64;
    // chi-square with k-1 degrees of freedom: mean k-1, variance 2(k-1)
    assert!(
        (chi2 - dof).abs() <= 3.0 * (2.0 * dof).sqrt(),
        "chi2 {chi2} dof {dof}"
    );
    let sd = (draws as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt();
    for &c in &counts {
        assert!((c as f64 - expected).abs() <= 4.0 * sd);
    }

    cond.sample_size = k;
    assert_eq!(sample_condition(ds, &cond).unwrap().len(), k);
}

#[test]
fn samples_respect_condition_filters() {
    let data = synthesize(&small_city(), 8).unwrap();
    let ds = &data.dataset;
    for name in ConditionName::ALL {
        let mut cond = ExperimentCondition::resolve(name, ds, 0).unwrap();
        cond.sample_size = 20;
        for seed in 0..10 {
            cond.seed = seed;
            for inc in sample_condition(ds, &cond).unwrap() {
                assert!(inc.category.is_category_a());
                assert!(cond.matches(&inc));
                if let Some(ccgs) = &cond.ccgs {
                    assert!(ccgs.contains(&inc.ccg));
                }
            }
        }
    }
}
