mod common;

use common::*;
use dtp_core::experiment::{
    run_experiment, trial_csv, write_experiment_csv, Constants, ExperimentConfig, Grid, Protocol, RowKind,
};

#[test]
fn reruns_are_byte_identical() {
    assert!(rerun_mismatches(51).is_empty());
}

#[test]
fn seeds_change_trials() {
    let cfg = |seed| ExperimentConfig {
        protocol: Protocol::Closeness,
        grid: Grid { n: vec![200], m: vec![], t: vec![274], eps: vec![1.0], k: vec![1] },
        trials: 8,
        seed,
        constants: Constants::default(),
    };
    let csv = |seed| trial_csv(&run_experiment(&cfg(seed)).unwrap(), Protocol::Closeness);
    assert_ne!(csv(1), csv(2));
}

#[test]
fn infeasible_cells_are_skipped_with_reason() {
    let cfg = ExperimentConfig {
        protocol: Protocol::Closeness,
        grid: Grid { n: vec![100], m: vec![], t: vec![10, 2000], eps: vec![1.0], k: vec![1] },
        trials: 2,
        seed: 3,
        constants: Constants::default(),
    };
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows[0].kind, RowKind::Skipped);
    assert!(rows[0].reason.contains("below the sample precondition"));
    assert_eq!(rows.iter().filter(|r| r.kind == RowKind::Summary).count(), 2);
    let mut buf = Vec::new();
    write_experiment_csv(&rows, Protocol::Closeness, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + rows.len());
    assert!(
        text.starts_with("cell,n,m,t,eps,k,kind,trial,instance,verdict,success,plaintext_bits,secure_bits,reason\n")
    );
}
