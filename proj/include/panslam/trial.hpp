#pragma once

#include <string>
#include <vector>

#include "panslam/config.hpp"
#include "panslam/io.hpp"
#include "panslam/metrics.hpp"
#include "panslam/pose_graph.hpp"

namespace panslam::sim {

struct TrialOutput {
  metrics::TrialRecord record;
  graph::PoseGraph graph;
  ClassGrid final_map;
  ClassGrid ground_truth;
  std::vector<io::EstimateTraceRow> estimate_trace;
};

/// One closed-loop trial: sense -> estimate -> (merge) -> map/graph -> plan ->
/// control -> step, until the duration elapses or exploration completes.
/// Deterministic under (cfg, seed).
TrialOutput run_trial(const cfg::ExperimentConfig& cfg, std::uint64_t seed);
TrialOutput run_trial(const cfg::ExperimentConfig& cfg, std::uint64_t seed,
                      const world::Environment& env);

struct BatchCell {
  ctrl::PlatformMode mode;
  bool merged = true;
};

std::string method_name(const BatchCell& cell);

struct CellResult {
  BatchCell cell;
  std::vector<metrics::TrialRecord> trials;  // in seed order, failures included
  metrics::SummaryRow summary;               // over successful trials
};

struct BatchResult {
  std::vector<CellResult> cells;
};

/// Run every cell with the shared seed list base, base+1, ... All cells use
/// the same start pose and the same ordered seed list; each cell keeps the
/// first n_trials successes (up to 2*n_trials attempts, mirroring the
/// "successful trials" protocol).
BatchResult run_batch(const cfg::ExperimentConfig& cfg,
                      const std::vector<BatchCell>& cells);

/// Run a batch and write per-trial CSVs plus summary.csv into cfg.out_dir.
BatchResult run_batch_to_dir(const cfg::ExperimentConfig& cfg,
                             const std::vector<BatchCell>& cells);

}  // namespace panslam::sim
