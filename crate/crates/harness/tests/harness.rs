use ssg_core::DenseVector;
use ssg_harness::config::Method;
use ssg_harness::experiment::{mark_winners, Cell, CellResult, RunRecord};
use ssg_harness::metrics::{read_rows, write_rows};
use ssg_harness::plot::{emit_plots, PlotInput, XAxis};
use ssg_harness::{run_experiment, ExperimentConfig, HarnessError, MetricsRow, HEADER};
use std::path::Path;

fn l1_config(out: &Path, stationarity: bool) -> ExperimentConfig {
    let text = format!(
        r#"
name = "grid"
seed = 11
output_dir = "{}"

[problem]
kind = "l1-disk"
a = [2.0, 2.0]
outer = 3.0

[run]
iterations = 400
checkpoints = 20

[stationarity]
enabled = {stationarity}
inner_iters = 200
subsample = 4

[[solver]]
method = "ssg"
label = "SSG"
tolerance = {{ rule = "constant", values = [1e-4, 1e-3] }}
step = {{ rule = "constant", values = [0.01, 0.05] }}
"#,
        out.display()
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

fn row(iteration: usize, t: f64, objective: f64) -> MetricsRow {
    MetricsRow {
        run_id: "r".into(),
        seed: 1,
        iteration,
        wall_clock_s: t,
        objective,
        infeasibility: 0.0,
        near_stationarity: None,
    }
}

fn record(index: usize, final_objective: f64) -> RunRecord {
    RunRecord {
        cell: Cell {
            index,
            solver: 0,
            label: "SSG".into(),
            method: Method::Ssg,
            run_id: format!("SSG-{index:03}"),
            tolerance: 1e-3,
            step: 0.1,
            rho_hat_mult: None,
            replicate: 0,
        },
        seed: 1,
        rho_hat: None,
        rho_tilde: None,
        outcome: Ok(CellResult {
            rows: vec![row(0, 0.0, 1.0), row(9, 0.1, final_objective)],
            iterates: Vec::new(),
            initial_objective: 1.0,
            cpu_seconds: 0.1,
            zero_subgradient_events: 0,
            output_iteration: None,
            output_point: Some(DenseVector::zeros(1)),
        }),
        winner: false,
        stationarity_evaluated: 0,
        stationarity_failures: 0,
    }
}

#[test]
fn two_by_two_grid_writes_four_runs_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&l1_config(dir.path(), false)).unwrap();
    assert_eq!(outcome.run_csvs.len(), 4);
    for p in &outcome.run_csvs {
        let rows = read_rows(p).unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].iteration, 19);
        assert_eq!(rows.last().unwrap().iteration, 399);
    }
    let summary = std::fs::read_to_string(&outcome.summary).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert_eq!(summary.lines().filter(|l| l.contains(",true,")).count(), 1);
}

#[test]
fn winner_is_smallest_final_objective() {
    let mut runs = vec![record(0, 0.5), record(1, 0.4)];
    mark_winners(&mut runs);
    assert!(!runs[0].winner);
    assert!(runs[1].winner);
}

#[test]
fn winner_can_be_recomputed_from_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&l1_config(dir.path(), true)).unwrap();
    let mut best: Option<(f64, String)> = None;
    for p in &outcome.run_csvs {
        let last = read_rows(p).unwrap().pop().unwrap();
        if best.as_ref().is_none_or(|b| last.objective < b.0) {
            best = Some((last.objective, last.run_id));
        }
    }
    let winner = outcome.winner("SSG").unwrap();
    assert_eq!(best.unwrap().1, winner.cell.run_id);

    let rows = read_rows(&outcome.output_dir.join("runs").join(format!("{}.csv", winner.cell.run_id))).unwrap();
    assert_eq!(rows.iter().filter(|r| r.near_stationarity.is_some()).count(), 4);
    assert!(outcome.plots.iter().any(|p| p.to_string_lossy().contains("near_stationarity")));
}

#[test]
fn empty_csv_is_rejected_by_plot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, HEADER.join(",") + "\n").unwrap();
    let err = emit_plots(&[PlotInput { label: "x".into(), path }], dir.path(), "t", XAxis::Iterations, false).unwrap_err();
    assert!(matches!(err, HarnessError::EmptyCsv(_)));
}

#[test]
fn single_run_plot_has_one_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    write_rows(&path, &[row(0, 0.0, 3.0), row(1, 0.5, 2.0), row(2, 1.0, 1.0)]).unwrap();
    let plots = emit_plots(&[PlotInput { label: "one".into(), path }], dir.path(), "t", XAxis::Iterations, false).unwrap();
    let objective = plots.iter().find(|p| p.to_string_lossy().contains("objective-iterations")).unwrap();
    let svg = std::fs::read_to_string(objective).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    // near_stationarity is empty, so only two metrics are drawn
    assert_eq!(plots.len(), 2);
}

#[test]
fn cpu_time_axis_reads_wall_clock_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_rows(&path, &[row(0, 2.0, 3.0), row(1, 4.0, 1.0)]).unwrap();
    let plots = emit_plots(&[PlotInput { label: "c".into(), path }], dir.path(), "t", XAxis::CpuTime, false).unwrap();
    let svg = std::fs::read_to_string(plots.iter().find(|p| p.to_string_lossy().contains("objective-cpu-time")).unwrap()).unwrap();
    assert!(svg.contains("CPU time (s)"));
    // x ticks span the wall-clock range, not the iteration indices
    assert!(svg.contains(">2.5<") || svg.contains(">3<"));
}
