#include "obcs/pipeline.hpp"

#include "obcs/io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace obcs {

Eigen::Ref<const Matrix> MeasurementEnsemble::block(int i) const {
  if (i < 0 || i >= stages) throw std::out_of_range("MeasurementEnsemble: bad block index");
  return A.middleRows(static_cast<Index>(i) * block_size(), block_size());
}

void MeasurementEnsemble::validate() const {
  if (stages < 1) throw std::invalid_argument("MeasurementEnsemble: stages must be >= 1");
  if (A.rows() < stages) {
    throw std::invalid_argument("MeasurementEnsemble: fewer rows than stages (q = 0)");
  }
  require_finite(A, "MeasurementEnsemble");
}

void SamplingRecord::validate() const {
  if (stages < 1 || bits.rows() != stages || thresholds.rows() != stages ||
      bits.cols() != thresholds.cols() || bits.cols() < 1) {
    throw std::invalid_argument("SamplingRecord: inconsistent dimensions");
  }
  if (!(r > 0.0) || s < 1) {
    throw std::invalid_argument("SamplingRecord: need r > 0 and s >= 1");
  }
  for (Index i = 0; i < bits.rows(); ++i) {
    for (Index j = 0; j < bits.cols(); ++j) {
      if (bits(i, j) != 1.0 && bits(i, j) != -1.0) {
        throw std::invalid_argument("SamplingRecord: bits must be +1 or -1");
      }
    }
  }
  require_finite(thresholds, "SamplingRecord thresholds");
}

long long StageTrace::total_iterations() const {
  long long total = 0;
  for (const auto& st : stages) total += st.delta.iterations + st.projection.iterations;
  return total;
}

double StageTrace::max_feasibility_violation() const {
  double worst = 0.0;
  for (const auto& st : stages) {
    if (st.delta.converged) worst = std::max(worst, st.delta.feasibility_violation);
    if (st.projection.converged) worst = std::max(worst, st.projection.feasibility_violation);
  }
  return worst;
}

double StageTrace::max_budget_violation() const {
  double worst = 0.0;
  for (const auto& st : stages) worst = std::max(worst, st.budget_violation);
  return worst;
}

bool StageTrace::any_stage_failed() const {
  for (const auto& st : stages) {
    if (st.failed) return true;
  }
  return false;
}

void RecoveryConfig::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("RecoveryConfig: r must be positive");
  if (s < 1) throw std::invalid_argument("RecoveryConfig: s must be >= 1");
  if (stages < 1) throw std::invalid_argument("RecoveryConfig: stages must be >= 1");
  if (!(dither_scale_multiplier >= 0.0)) {
    throw std::invalid_argument("RecoveryConfig: dither multiplier must be >= 0");
  }
  solver.validate();
}

StageFactorizationCache::StageFactorizationCache(const MeasurementEnsemble& ensemble,
                                                 const Dictionary& dict) {
  factors_.reserve(ensemble.stages);
  for (int i = 0; i < ensemble.stages; ++i) {
    factors_.push_back(std::make_unique<SignSolveFactorization>(dict, ensemble.block(i)));
  }
}

std::pair<Vector, Vector> hdtg(Eigen::Ref<const Matrix> A_block, Index q, double sigma,
                               const Vector& f_hat, const RngStream& rng) {
  if (A_block.rows() != q || A_block.cols() != f_hat.size()) {
    throw std::invalid_argument("hdtg: dimension mismatch");
  }
  if (sigma < 0.0) throw std::invalid_argument("hdtg: sigma must be >= 0");
  Vector tau = Vector::Zero(q);
  if (sigma > 0.0) tau = sigma * gaussian_vector(q, rng);
  Vector phi = A_block * f_hat + tau;
  return {std::move(phi), std::move(tau)};
}

Vector one_bit_measure(Eigen::Ref<const Matrix> A_block, const Vector& f, const Vector& phi) {
  if (A_block.cols() != f.size() || A_block.rows() != phi.size()) {
    throw std::invalid_argument("one_bit_measure: dimension mismatch");
  }
  return sign_vector(A_block * f - phi);
}

std::pair<Vector, StageReport> ssr(Eigen::Ref<const Matrix> A_block, const Dictionary& dict,
                                   const Vector& bits, const Vector& tau, const Vector& prev,
                                   double radius, int s, double r, const SolverParams& params,
                                   const SignSolveFactorization* factorization) {
  if (!(radius > 0.0)) throw std::invalid_argument("ssr: radius must be positive");
  StageReport report;
  const double budget = std::sqrt(static_cast<double>(s)) * r;

  try {
    SignConstraintSet cons{A_block, tau, bits, radius};
    report.delta = solve_sign_constrained_l1(dict, cons, params, nullptr, factorization);
    if (report.delta.converged) {
      const Vector f_tmp = prev + report.delta.solution;
      report.projection = project_analysis_l1(f_tmp, dict, budget, params);
      report.failed = !report.projection.converged;
    } else {
      report.failed = true;
    }
  } catch (const InfeasibleProblemError&) {
    report.failed = true;
  }

  Vector estimate = report.failed ? prev : report.projection.solution;
  report.budget_violation = std::max(0.0, dict.analyze(estimate).lpNorm<1>() - budget);
  return {std::move(estimate), std::move(report)};
}

namespace {

// One recovery stage shared verbatim by sampling and recovery so that both
// run the identical floating-point sequence. The stage dither is re-derived
// from the stored threshold: tau = phi - A_block f_prev.
std::pair<Vector, StageReport> replay_stage(const MeasurementEnsemble& ensemble,
                                            const Dictionary& dict, const RecoveryConfig& config,
                                            int stage_index, const Vector& bits,
                                            const Vector& phi, const Vector& prev,
                                            const StageFactorizationCache* cache) {
  const auto block = ensemble.block(stage_index);
  const Vector tau = phi - block * prev;
  const double radius = std::ldexp(config.r, -stage_index);  // 2^{1-i} r, i = stage_index + 1
  const SignSolveFactorization* fact = cache != nullptr ? &cache->stage(stage_index) : nullptr;
  return ssr(block, dict, bits, tau, prev, radius, config.s, config.r, config.solver, fact);
}

}  // namespace

std::pair<SamplingRecord, StageTrace> adaptive_sample(const MeasurementEnsemble& ensemble,
                                                      const Vector& f, const Dictionary& dict,
                                                      const RecoveryConfig& config,
                                                      const RngStream& rng,
                                                      const StageFactorizationCache* cache) {
  ensemble.validate();
  config.validate();
  require_finite(f, "adaptive_sample signal");
  if (f.size() != ensemble.n() || dict.n() != ensemble.n()) {
    throw std::invalid_argument("adaptive_sample: dimension mismatch");
  }
  if (ensemble.stages != config.stages) {
    throw std::invalid_argument("adaptive_sample: ensemble/config stage count mismatch");
  }
  if (f.norm() > config.r) {
    throw std::invalid_argument("adaptive_sample: ||f||_2 exceeds the radius bound r");
  }

  const Index q = ensemble.block_size();
  SamplingRecord record;
  record.bits.resize(config.stages, q);
  record.thresholds.resize(config.stages, q);
  record.r = config.r;
  record.s = config.s;
  record.stages = config.stages;

  StageTrace trace;
  trace.estimates.push_back(Vector::Zero(ensemble.n()));
  trace.stages.reserve(config.stages);

  for (int i = 0; i < config.stages; ++i) {
    const Vector& prev = trace.estimates.back();
    const auto block = ensemble.block(i);
    const double sigma = config.dither_scale_multiplier * std::ldexp(config.r, -i);
    auto [phi, tau] = hdtg(block, q, sigma, prev, rng.child(static_cast<std::uint64_t>(i + 1)));
    const Vector bits = one_bit_measure(block, f, phi);

    record.bits.row(i) = bits.transpose();
    record.thresholds.row(i) = phi.transpose();

    auto [estimate, report] = replay_stage(ensemble, dict, config, i, bits, phi, prev, cache);
    trace.estimates.push_back(std::move(estimate));
    trace.stages.push_back(std::move(report));
  }

  return {std::move(record), std::move(trace)};
}

std::pair<Vector, StageTrace> adaptive_recover(const MeasurementEnsemble& ensemble,
                                               const Dictionary& dict,
                                               const SamplingRecord& record,
                                               const RecoveryConfig& config,
                                               const StageFactorizationCache* cache) {
  ensemble.validate();
  config.validate();
  record.validate();
  if (dict.n() != ensemble.n()) {
    throw std::invalid_argument("adaptive_recover: dictionary/ensemble mismatch");
  }
  if (ensemble.stages != config.stages) {
    throw std::invalid_argument("adaptive_recover: ensemble/config stage count mismatch");
  }
  if (record.stages != config.stages || record.block_size() != ensemble.block_size() ||
      record.r != config.r || record.s != config.s) {
    throw std::invalid_argument("adaptive_recover: record inconsistent with configuration");
  }

  StageTrace trace;
  trace.estimates.push_back(Vector::Zero(ensemble.n()));
  trace.stages.reserve(config.stages);

  for (int i = 0; i < config.stages; ++i) {
    const Vector& prev = trace.estimates.back();
    const Vector bits = record.bits.row(i).transpose();
    const Vector phi = record.thresholds.row(i).transpose();
    auto [estimate, report] = replay_stage(ensemble, dict, config, i, bits, phi, prev, cache);
    trace.estimates.push_back(std::move(estimate));
    trace.stages.push_back(std::move(report));
  }

  return {trace.estimates.back(), std::move(trace)};
}

void write_record_file(const std::filesystem::path& path, const SamplingRecord& record) {
  record.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "# one-bit sampling record\n";
  os << "# T: " << record.stages << '\n';
  os << "# q: " << record.block_size() << '\n';
  os << "# r: " << io::format_double(record.r) << '\n';
  os << "# s: " << record.s << '\n';
  io::write_matrix(os, record.bits);
  io::write_matrix(os, record.thresholds);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

SamplingRecord read_record_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::string> comments;
  SamplingRecord record;
  record.bits = io::read_matrix(is, &comments);
  record.thresholds = io::read_matrix(is);

  bool have_t = false, have_r = false, have_s = false;
  for (const auto& c : comments) {
    const auto colon = c.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = c.substr(0, colon);
    const std::string value = c.substr(colon + 1);
    if (key == "T") {
      record.stages = std::stoi(value);
      have_t = true;
    } else if (key == "r") {
      record.r = std::strtod(value.c_str(), nullptr);
      have_r = true;
    } else if (key == "s") {
      record.s = std::stoi(value);
      have_s = true;
    }
  }
  if (!have_t || !have_r || !have_s) {
    throw std::runtime_error("record file missing T/r/s header: " + path.string());
  }
  record.validate();
  return record;
}

}  // namespace obcs
