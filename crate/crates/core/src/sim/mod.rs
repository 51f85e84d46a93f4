//! Simulation-based evaluation: a simulated analyst, kNN layout scoring,
//! learning curves and the update-latency benchmark.

mod analyst;
mod bench;
mod curve;
mod export;
mod knn;

pub use analyst::{simulate_batch, AnchorLayout, SimConfig, SimulatedBatch};
pub use bench::{
    loglog_exponent, run_timing_benchmark, BenchReport, StageBreakdown, TimingRow, TimingTable,
};
pub use curve::{run_learning_curve, LearningCurve};
pub use export::{
    export_results, read_curve_csv, read_curve_json, read_table_csv, read_table_json,
    ExportFormat, Results,
};
pub use knn::{knn_accuracy, knn_accuracy_points};
