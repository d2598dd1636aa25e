#pragma once

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"
#include "obcs/io.hpp"
#include "obcs/pipeline.hpp"
#include "obcs/solvers.hpp"

#include <filesystem>
#include <functional>
#include <vector>

// Monte Carlo harnesses and metrics: error-vs-measurements sweeps, the
// error-vs-stages decay check, and the block-image experiment. Every run is
// reproducible bit-for-bit from (config, master seed) independent of the
// worker-thread count.
namespace obcs {

struct ExperimentConfig {
  Index n = 32;
  Index N = 64;
  int s = 3;  // signal degrees of freedom; the support has size N - n + s
  double r_multiplier = 2.0;
  std::vector<Index> m_grid;        // error-vs-m sweep (sorted ascending)
  int T = 5;                        // stage count for the m sweep
  Index m = 8000;                   // total measurements for the T sweep
  std::vector<int> T_grid{1, 2, 3, 4, 5};
  int trials = 50;
  std::uint64_t master_seed = 1;
  DictionaryKind dictionary = DictionaryKind::random_tight;
  double dither_scale_multiplier = 1.0;
  SolverParams solver;
  int threads = 0;                // 0 = hardware concurrency
  bool record_wall_time = true;   // false zeroes the wall_ms column (byte-stable output)
  bool mean_in_db = false;        // aggregate means in dB instead of linear
  Index min_block_size = 0;       // floor on q for the T sweep; 0 means n

  void validate_common() const;
  void validate_for_m_sweep() const;
  void validate_for_T_sweep() const;
};

struct TrialResult {
  Index m = 0;
  int T = 0;
  int trial = 0;
  double r = 0.0;
  double signal_norm = 0.0;
  double norm_error = 0.0;
  std::vector<double> stage_errors;  // ||f - f_i|| / ||f||, i = 1..T
  long long wall_ms = 0;
  long long solver_iterations = 0;
  bool failed = false;
  double max_feasibility_violation = 0.0;
  double max_budget_violation = 0.0;
  int residual_sparsity_violations = 0;  // soft 4s-effective-sparsity property
};

struct SummaryRow {
  Index m = 0;
  int T = 0;
  int trials = 0;
  int failed = 0;
  double mean_error = 0.0;    // linear or dB per config
  double median_error = 0.0;  // always linear
};

/// Per m in the grid, per trial: fresh dictionary, exactly sparse signal via
/// the null-space construction, fresh measurement matrix, then sample +
/// recover. Stage failures flag the row; the sweep never aborts.
std::vector<TrialResult> run_error_vs_m(const ExperimentConfig& config);

/// Fixed m, varying stage count. The dictionary, signal, and measurement
/// matrix are shared across the T grid within a trial so rows pair up.
std::vector<TrialResult> run_error_vs_T(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, bool mean_in_db);

/// Least-squares slope of log2(median error) against T.
double fitted_log2_slope(const std::vector<SummaryRow>& summary);

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialResult>& trials);
std::vector<TrialResult> read_trials_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

double mean(const std::vector<double>& xs);
double median(std::vector<double> xs);

/// 20 log10(||X||_inf * 256 / ||X - X_hat||_F); +infinity on exact equality.
double psnr(const Matrix& X, const Matrix& X_hat);

/// Deterministic rasterization of the standard ten-ellipse head phantom on
/// [-1,1]^2, values in [0,1]. side >= 16.
Matrix phantom_image(Index side);

struct ImageExperimentConfig {
  Index image_side = 64;
  Index block_side = 16;
  Index m_per_block = 4000;  // 0 forces the all-zero reconstruction
  int T = 8;
  int s_budget = 64;  // analysis-l1 budget parameter per block
  std::uint64_t seed = 1;
  double r_multiplier = 2.0;
  double dither_scale_multiplier = 1.0;
  SolverParams solver;
  int threads = 0;

  void validate() const;
};

struct BlockResult {
  Index row0 = 0;
  Index col0 = 0;
  bool skipped_zero = false;  // all-zero block, pipeline not run
  bool failed = false;
  double norm_error = 0.0;
  long long solver_iterations = 0;
  double max_feasibility_violation = 0.0;
  double max_budget_violation = 0.0;
};

struct ImageExperimentResult {
  Matrix truth;
  Matrix reconstruction;
  double psnr_db = 0.0;
  std::vector<BlockResult> blocks;
};

/// Blocks of the phantom are vectorized, sampled and recovered independently
/// with the 2-D Haar dictionary, then reassembled. Failed blocks fall back to
/// the zero estimate.
ImageExperimentResult run_image_experiment(const ImageExperimentConfig& config);

void write_block_stats_csv(const std::filesystem::path& path,
                           const std::vector<BlockResult>& blocks);

/// Runs fn(0..count-1) on a small worker pool; results must be written to
/// per-index slots so the outcome is schedule-independent.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Strictly-validated config file loaders (unknown keys are errors).
ExperimentConfig load_error_vs_m_config(const io::KeyValueConfig& kv);
ExperimentConfig load_error_vs_T_config(const io::KeyValueConfig& kv);
ImageExperimentConfig load_image_config(const io::KeyValueConfig& kv);

}  // namespace obcs
