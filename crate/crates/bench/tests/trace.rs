use vradmm_bench::trace::{read_trace_csv, write_trace_csv, CSV_COLUMNS};
use vradmm_core::admm::{run, HyperParams, Silent, SolverKind};

mod common;

#[test]
fn empty_trace_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_trace_csv(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", CSV_COLUMNS.join(",")));
    assert!(read_trace_csv(&path).unwrap().is_empty());
}

#[test]
fn round_trip_preserves_every_value() {
    let problem = common::small_graph_problem();
    for stationarity in [false, true] {
        let hp = HyperParams {
            iterations: 40,
            stationarity,
            ..HyperParams::default()
        };
        let trace = run(&problem, &hp, SolverKind::Spider, &mut Silent).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&trace.records, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 9, "{line}");
        }
        let rows = read_trace_csv(&path).unwrap();
        assert_eq!(rows.len(), trace.records.len());
        for (row, rec) in rows.iter().zip(&trace.records) {
            assert_eq!(row.iter, rec.iter);
            assert_eq!(row.epoch, rec.epoch);
            assert_eq!(row.objective.to_bits(), rec.objective.to_bits());
            assert_eq!(row.aug_lagrangian.to_bits(), rec.aug_lagrangian.to_bits());
            assert_eq!(row.residual.to_bits(), rec.residual.to_bits());
            assert_eq!(row.theta.to_bits(), rec.theta.to_bits());
            assert_eq!(row.stationarity.map(f64::to_bits), rec.stationarity.map(f64::to_bits));
            assert_eq!(row.ifo, rec.ifo);
            assert_eq!(row.seconds.to_bits(), rec.seconds.to_bits());
        }
        let ifo: Vec<u64> = rows.iter().map(|r| r.ifo).collect();
        assert!(ifo.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn unwritable_path_is_reported() {
    let err = write_trace_csv(&[], "/nonexistent/dir/t.csv").unwrap_err().to_string();
    assert!(err.contains("/nonexistent/dir/t.csv"), "{err}");
}
