#pragma once

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"
#include "obcs/solvers.hpp"

#include <filesystem>
#include <memory>
#include <utility>
#include <vector>

// Adaptive one-bit sampling and recovery: threshold generation, block-wise
// binary sampling, and the per-stage solve/add/project recovery step.
namespace obcs {

/// Gaussian measurement matrix with a T-block row partition. Block i covers
/// rows [i*q, (i+1)*q) with q = floor(m/T); rows beyond T*q are unused.
struct MeasurementEnsemble {
  Matrix A;  // m x n
  int stages = 1;

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }
  Index block_size() const { return A.rows() / stages; }
  Eigen::Ref<const Matrix> block(int i) const;  // i in [0, stages)

  void validate() const;  // q >= 1
};

/// Per-stage one-bit samples and thresholds, plus the model scalars needed
/// to replay recovery. Dither noise is not stored; recovery re-derives it.
struct SamplingRecord {
  Matrix bits;        // T x q, entries +1/-1
  Matrix thresholds;  // T x q
  double r = 0.0;
  int s = 0;
  int stages = 0;

  Index block_size() const { return bits.cols(); }
  void validate() const;
};

/// Both solves of one stage plus the failure flag; a failed stage keeps the
/// previous estimate.
struct StageReport {
  SolveReport delta;       // sign-constrained analysis-l1 solve
  SolveReport projection;  // analysis-l1-ball projection
  bool failed = false;
  double budget_violation = 0.0;  // max(0, ||D^T f_i||_1 - sqrt(s) r)
};

/// Estimates f_0 = 0, f_1, ..., f_T with the per-stage solver reports.
struct StageTrace {
  std::vector<Vector> estimates;
  std::vector<StageReport> stages;

  long long total_iterations() const;
  double max_feasibility_violation() const;  // over converged solves
  double max_budget_violation() const;
  bool any_stage_failed() const;
};

/// Radius bound, sparsity budget, stage count, and solver settings shared by
/// sampling and recovery.
struct RecoveryConfig {
  double r = 0.0;
  int s = 0;
  int stages = 1;
  double dither_scale_multiplier = 1.0;  // scales sigma_i = 2^{1-i} r
  SolverParams solver;

  void validate() const;
};

/// Per-stage prefactorized normal-equation matrices for one (ensemble, D)
/// pair; immutable and shareable between sampling and recovery.
class StageFactorizationCache {
 public:
  StageFactorizationCache(const MeasurementEnsemble& ensemble, const Dictionary& dict);
  const SignSolveFactorization& stage(int i) const { return *factors_[i]; }

 private:
  std::vector<std::unique_ptr<SignSolveFactorization>> factors_;
};

/// Threshold generator: tau ~ N(0, sigma^2 I_q), phi = A_block f_hat + tau.
/// Returns (phi, tau).
std::pair<Vector, Vector> hdtg(Eigen::Ref<const Matrix> A_block, Index q, double sigma,
                               const Vector& f_hat, const RngStream& rng);

/// sign(A_block f - phi), componentwise in {+1,-1}.
Vector one_bit_measure(Eigen::Ref<const Matrix> A_block, const Vector& f, const Vector& phi);

/// Single step recovery: solve for the residual under the stored signs with
/// dither-only thresholds tau and radius bound, add it to the previous
/// estimate, and project onto the analysis-l1 ball sqrt(s) r.
std::pair<Vector, StageReport> ssr(Eigen::Ref<const Matrix> A_block, const Dictionary& dict,
                                   const Vector& bits, const Vector& tau, const Vector& prev,
                                   double radius, int s, double r, const SolverParams& params,
                                   const SignSolveFactorization* factorization = nullptr);

/// Adaptive sampling: per stage, thresholds centered at the running estimate
/// with dither scale sigma_i = 2^{1-i} r, one-bit samples, and an SSR update.
/// Requires ||f||_2 <= r. Returns the record (bits and thresholds) and trace.
std::pair<SamplingRecord, StageTrace> adaptive_sample(
    const MeasurementEnsemble& ensemble, const Vector& f, const Dictionary& dict,
    const RecoveryConfig& config, const RngStream& rng,
    const StageFactorizationCache* cache = nullptr);

/// Adaptive recovery: replays the stages from the stored bits and thresholds,
/// re-deriving each stage's dither as phi - A_block f_{i-1}. Reproduces the
/// sampler's internal estimates exactly.
std::pair<Vector, StageTrace> adaptive_recover(const MeasurementEnsemble& ensemble,
                                               const Dictionary& dict,
                                               const SamplingRecord& record,
                                               const RecoveryConfig& config,
                                               const StageFactorizationCache* cache = nullptr);

/// Record file: comment header carrying T, q, r, s, then the bits and
/// threshold matrices in the repo-wide text format.
void write_record_file(const std::filesystem::path& path, const SamplingRecord& record);
SamplingRecord read_record_file(const std::filesystem::path& path);

}  // namespace obcs
