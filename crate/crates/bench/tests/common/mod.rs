#![allow(dead_code)]

use std::path::Path;

use vradmm_bench::builders::build_graph_problem;
use vradmm_bench::config::{ExperimentConfig, SolverSpec};
use vradmm_bench::graph::build_fusion_graph;
use vradmm_bench::synth::{binary_dataset, BinarySpec};
use vradmm_core::admm::{CompositeProblem, SolverKind};
use vradmm_core::losses::SigmoidLoss;

pub fn small_graph_problem() -> CompositeProblem<SigmoidLoss> {
    let (set, _) = binary_dataset(&BinarySpec::new(120, 8, 2)).unwrap();
    let e = build_fusion_graph(&set, 0.5).unwrap();
    build_graph_problem(set, &e, 1e-5, 1.0).unwrap()
}

/// Synthetic graph sweep with the given solvers and seeds, writing to `out`.
pub fn sweep(out: &Path, solvers: &[SolverKind], seeds: &[u64], iterations: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::example_graph(150, 8);
    cfg.solvers = solvers.iter().map(|&k| SolverSpec::new(k)).collect();
    cfg.seeds = seeds.to_vec();
    cfg.defaults.iterations = Some(iterations);
    cfg.out_dir = out.to_path_buf();
    cfg
}
