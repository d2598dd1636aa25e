#include "obcs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace obcs {

namespace {

namespace stream_key {
constexpr std::uint64_t dictionary = 1;
constexpr std::uint64_t support = 2;
constexpr std::uint64_t coefficients = 3;
constexpr std::uint64_t measurement = 4;
constexpr std::uint64_t sampling = 5;
}  // namespace stream_key

// Tolerance on the soft residual-effective-sparsity property (<= 4s + tol).
constexpr double kResidualSparsityTol = 1e-6;

Dictionary build_dictionary(DictionaryKind kind, Index n, Index N, const RngStream& stream) {
  switch (kind) {
    case DictionaryKind::identity:
      if (N != n) throw std::invalid_argument("identity dictionary requires N == n");
      return identity_dictionary(n);
    case DictionaryKind::random_tight:
      return random_tight_dictionary(n, N, stream);
    case DictionaryKind::haar2d: {
      if (N != n) throw std::invalid_argument("haar-2d dictionary requires N == n");
      const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
      if (side * side != n) throw std::invalid_argument("haar-2d dictionary requires square n");
      return haar_dictionary_2d(side);
    }
    case DictionaryKind::custom:
      throw std::invalid_argument("experiments cannot build a 'custom' dictionary");
  }
  throw std::logic_error("unreachable dictionary kind");
}

struct TrialProblem {
  Dictionary dict;
  Vector f;
  double r = 0.0;
  int s_budget = 0;
};

TrialProblem make_problem(const ExperimentConfig& config, const RngStream& trial_stream) {
  TrialProblem p;
  p.dict = build_dictionary(config.dictionary, config.n, config.N,
                            trial_stream.child(stream_key::dictionary));
  const auto support = analysis_sparse_support(config.n, config.N, config.s,
                                               trial_stream.child(stream_key::support));
  p.f = exact_sparse_signal(p.dict,
                            {support, trial_stream.child(stream_key::coefficients)});
  const double norm = p.f.norm();
  if (norm == 0.0) throw std::runtime_error("degenerate zero signal draw");
  p.r = config.r_multiplier * norm;
  p.s_budget = static_cast<int>(support.size());
  return p;
}

TrialResult run_one_trial(const ExperimentConfig& config, const TrialProblem& problem,
                          Index m, int T, const RngStream& trial_stream) {
  const auto t0 = std::chrono::steady_clock::now();

  Matrix A = gaussian_matrix(m, config.n, trial_stream.child(stream_key::measurement));
  MeasurementEnsemble ensemble{std::move(A), T};
  const StageFactorizationCache cache(ensemble, problem.dict);

  RecoveryConfig rc;
  rc.r = problem.r;
  rc.s = problem.s_budget;
  rc.stages = T;
  rc.dither_scale_multiplier = config.dither_scale_multiplier;
  rc.solver = config.solver;

  auto [record, sample_trace] = adaptive_sample(ensemble, problem.f, problem.dict, rc,
                                                trial_stream.child(stream_key::sampling), &cache);
  auto [f_hat, recover_trace] = adaptive_recover(ensemble, problem.dict, record, rc, &cache);

  TrialResult result;
  result.m = m;
  result.T = T;
  result.r = problem.r;
  result.signal_norm = problem.f.norm();
  result.norm_error = normalized_error(problem.f, f_hat);
  result.stage_errors.reserve(T);
  for (int i = 1; i <= T; ++i) {
    result.stage_errors.push_back((problem.f - recover_trace.estimates[i]).norm() /
                                  result.signal_norm);
  }
  result.solver_iterations =
      sample_trace.total_iterations() + recover_trace.total_iterations();
  result.failed = sample_trace.any_stage_failed() || recover_trace.any_stage_failed();
  result.max_feasibility_violation = std::max(sample_trace.max_feasibility_violation(),
                                              recover_trace.max_feasibility_violation());
  result.max_budget_violation =
      std::max(sample_trace.max_budget_violation(), recover_trace.max_budget_violation());

  for (int i = 0; i < T; ++i) {
    const Vector residual = problem.f - recover_trace.estimates[i];
    const double eff = effective_sparsity(residual, problem.dict.D);
    if (eff > 4.0 * problem.s_budget + kResidualSparsityTol) {
      ++result.residual_sparsity_violations;
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  if (config.record_wall_time) {
    result.wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  }
  return result;
}

void require_sorted_positive(const std::vector<Index>& grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + ": empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) throw std::invalid_argument(std::string(what) + ": entries must be >= 1");
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw std::invalid_argument(std::string(what) + ": grid must be sorted ascending");
    }
  }
}

}  // namespace

void ExperimentConfig::validate_common() const {
  if (n < 1 || N < n) throw std::invalid_argument("ExperimentConfig: need 1 <= n <= N");
  if (s < 1 || s > n) throw std::invalid_argument("ExperimentConfig: need 1 <= s <= n");
  if (!(r_multiplier > 0.0)) throw std::invalid_argument("ExperimentConfig: r_multiplier > 0");
  if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (!(dither_scale_multiplier >= 0.0)) {
    throw std::invalid_argument("ExperimentConfig: dither multiplier must be >= 0");
  }
  solver.validate();
}

void ExperimentConfig::validate_for_m_sweep() const {
  validate_common();
  require_sorted_positive(m_grid, "m_grid");
  if (T < 1) throw std::invalid_argument("ExperimentConfig: T must be >= 1");
  if (m_grid.front() < T) throw std::invalid_argument("ExperimentConfig: smallest m < T");
}

void ExperimentConfig::validate_for_T_sweep() const {
  validate_common();
  if (T_grid.empty()) throw std::invalid_argument("ExperimentConfig: empty T_grid");
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    if (T_grid[i] < 1) throw std::invalid_argument("ExperimentConfig: T_grid entries >= 1");
    if (i > 0 && T_grid[i] <= T_grid[i - 1]) {
      throw std::invalid_argument("ExperimentConfig: T_grid must be sorted ascending");
    }
  }
  const Index floor = min_block_size > 0 ? min_block_size : n;
  if (m / T_grid.back() < floor) {
    throw std::invalid_argument(
        "ExperimentConfig: m too small, q = m/T_max is below the block-size floor");
  }
}

std::vector<TrialResult> run_error_vs_m(const ExperimentConfig& config) {
  config.validate_for_m_sweep();
  const RngStream root(config.master_seed);

  const std::size_t total = config.m_grid.size() * static_cast<std::size_t>(config.trials);
  std::vector<TrialResult> results(total);

  parallel_for(total, config.threads, [&](std::size_t task) {
    const std::size_t m_index = task / static_cast<std::size_t>(config.trials);
    const int trial = static_cast<int>(task % static_cast<std::size_t>(config.trials));
    const RngStream trial_stream =
        root.child(static_cast<std::uint64_t>(m_index)).child(static_cast<std::uint64_t>(trial));
    const TrialProblem problem = make_problem(config, trial_stream);
    TrialResult r =
        run_one_trial(config, problem, config.m_grid[m_index], config.T, trial_stream);
    r.trial = trial;
    results[task] = std::move(r);
  });

  return results;
}

std::vector<TrialResult> run_error_vs_T(const ExperimentConfig& config) {
  config.validate_for_T_sweep();
  const RngStream root(config.master_seed);

  const std::size_t total = config.T_grid.size() * static_cast<std::size_t>(config.trials);
  std::vector<TrialResult> results(total);

  parallel_for(total, config.threads, [&](std::size_t task) {
    const std::size_t t_index = task / static_cast<std::size_t>(config.trials);
    const int trial = static_cast<int>(task % static_cast<std::size_t>(config.trials));
    // Problem construction is keyed by trial only, so the T grid shares the
    // dictionary, signal, and measurement matrix within each trial.
    const RngStream trial_stream = root.child(0).child(static_cast<std::uint64_t>(trial));
    const TrialProblem problem = make_problem(config, trial_stream);
    TrialResult r =
        run_one_trial(config, problem, config.m, config.T_grid[t_index], trial_stream);
    r.trial = trial;
    results[task] = std::move(r);
  });

  return results;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty set");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty set");
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[mid];
  return 0.5 * (xs[mid - 1] + xs[mid]);
}

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, bool mean_in_db) {
  std::vector<SummaryRow> rows;
  std::vector<std::pair<Index, int>> seen;
  for (const auto& t : trials) {
    const std::pair<Index, int> key{t.m, t.T};
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
  }
  for (const auto& [m, T] : seen) {
    std::vector<double> errors;
    int failed = 0;
    for (const auto& t : trials) {
      if (t.m != m || t.T != T) continue;
      errors.push_back(t.norm_error);
      if (t.failed) ++failed;
    }
    SummaryRow row;
    row.m = m;
    row.T = T;
    row.trials = static_cast<int>(errors.size());
    row.failed = failed;
    if (mean_in_db) {
      std::vector<double> db;
      db.reserve(errors.size());
      for (double e : errors) db.push_back(20.0 * std::log10(std::max(e, 1e-300)));
      row.mean_error = mean(db);
    } else {
      row.mean_error = mean(errors);
    }
    row.median_error = median(errors);
    rows.push_back(row);
  }
  return rows;
}

double fitted_log2_slope(const std::vector<SummaryRow>& summary) {
  if (summary.size() < 2) throw std::invalid_argument("fitted_log2_slope: need >= 2 rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(summary.size());
  for (const auto& row : summary) {
    const double x = static_cast<double>(row.T);
    const double y = std::log2(std::max(row.median_error, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fitted_log2_slope: degenerate T values");
  return (count * sxy - sx * sy) / denom;
}

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialResult>& trials) {
  int max_T = 0;
  for (const auto& t : trials) max_T = std::max(max_T, t.T);

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "m,T,trial,norm_error";
  for (int i = 1; i <= max_T; ++i) os << ",stage_err_" << i;
  os << ",wall_ms\n";
  for (const auto& t : trials) {
    os << t.m << ',' << t.T << ',' << t.trial << ',' << io::format_double(t.norm_error);
    for (int i = 0; i < max_T; ++i) {
      os << ',';
      if (i < static_cast<int>(t.stage_errors.size())) {
        os << io::format_double(t.stage_errors[static_cast<std::size_t>(i)]);
      }
    }
    os << ',' << t.wall_ms << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<TrialResult> read_trials_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty trials CSV");

  std::vector<TrialResult> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) throw std::runtime_error("trials CSV: short row");
    TrialResult t;
    t.m = std::stoll(cells[0]);
    t.T = std::stoi(cells[1]);
    t.trial = std::stoi(cells[2]);
    t.norm_error = std::strtod(cells[3].c_str(), nullptr);
    for (std::size_t i = 4; i + 1 < cells.size(); ++i) {
      if (!cells[i].empty()) t.stage_errors.push_back(std::strtod(cells[i].c_str(), nullptr));
    }
    t.wall_ms = std::stoll(cells.back());
    out.push_back(std::move(t));
  }
  return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "m,T,trials,failed,mean_error,median_error\n";
  for (const auto& row : rows) {
    os << row.m << ',' << row.T << ',' << row.trials << ',' << row.failed << ','
       << io::format_double(row.mean_error) << ',' << io::format_double(row.median_error)
       << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

double psnr(const Matrix& X, const Matrix& X_hat) {
  if (X.rows() != X_hat.rows() || X.cols() != X_hat.cols()) {
    throw std::invalid_argument("psnr: shape mismatch");
  }
  const double diff = (X - X_hat).norm();
  if (diff == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = X.cwiseAbs().maxCoeff();
  return 20.0 * std::log10(peak * 256.0 / diff);
}

Matrix phantom_image(Index side) {
  if (side < 16) throw std::invalid_argument("phantom_image: side must be >= 16");
  // intensity, x-semiaxis, y-semiaxis, x0, y0, rotation (degrees)
  constexpr double table[10][6] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.98, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.02, 0.1100, 0.3100, 0.22, 0.0, -18.0},
      {-0.02, 0.1600, 0.4100, -0.22, 0.0, 18.0},
      {0.01, 0.2100, 0.2500, 0.0, 0.35, 0.0},
      {0.01, 0.0460, 0.0460, 0.0, 0.1, 0.0},
      {0.01, 0.0460, 0.0460, 0.0, -0.1, 0.0},
      {0.01, 0.0460, 0.0230, -0.08, -0.605, 0.0},
      {0.01, 0.0230, 0.0230, 0.0, -0.606, 0.0},
      {0.01, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  };
  constexpr double pi = 3.14159265358979323846;
  Matrix image = Matrix::Zero(side, side);
  for (Index i = 0; i < side; ++i) {
    const double y = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(side);
    for (Index j = 0; j < side; ++j) {
      const double x = -1.0 + (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(side);
      double value = 0.0;
      for (const auto& e : table) {
        const double theta = e[5] * pi / 180.0;
        const double ct = std::cos(theta), st = std::sin(theta);
        const double dx = x - e[3], dy = y - e[4];
        const double u = dx * ct + dy * st;
        const double v = -dx * st + dy * ct;
        if ((u * u) / (e[1] * e[1]) + (v * v) / (e[2] * e[2]) <= 1.0) value += e[0];
      }
      image(i, j) = value;
    }
  }
  return image;
}

void ImageExperimentConfig::validate() const {
  if (image_side < 16) throw std::invalid_argument("image config: image_side >= 16");
  if (block_side < 2 || image_side % block_side != 0) {
    throw std::invalid_argument("image config: block_side must divide image_side");
  }
  if ((block_side & (block_side - 1)) != 0) {
    throw std::invalid_argument("image config: block_side must be a power of two");
  }
  if (T < 1) throw std::invalid_argument("image config: T >= 1");
  if (m_per_block > 0 && m_per_block < T) {
    throw std::invalid_argument("image config: m_per_block < T gives empty blocks");
  }
  if (s_budget < 1) throw std::invalid_argument("image config: s_budget >= 1");
  if (!(r_multiplier > 0.0)) throw std::invalid_argument("image config: r_multiplier > 0");
  solver.validate();
}

ImageExperimentResult run_image_experiment(const ImageExperimentConfig& config) {
  config.validate();

  ImageExperimentResult result;
  result.truth = phantom_image(config.image_side);
  result.reconstruction = Matrix::Zero(config.image_side, config.image_side);

  const Index blocks_per_side = config.image_side / config.block_side;
  const std::size_t block_count = static_cast<std::size_t>(blocks_per_side * blocks_per_side);
  result.blocks.resize(block_count);

  const Index bs = config.block_side;
  const Index n = bs * bs;
  const Dictionary dict = haar_dictionary_2d(bs);
  const RngStream root(config.seed);

  std::vector<Matrix> recovered(block_count);

  parallel_for(block_count, config.threads, [&](std::size_t idx) {
    const Index by = static_cast<Index>(idx) / blocks_per_side;
    const Index bx = static_cast<Index>(idx) % blocks_per_side;
    BlockResult& stat = result.blocks[idx];
    stat.row0 = by * bs;
    stat.col0 = bx * bs;

    Vector f(n);
    for (Index r = 0; r < bs; ++r) {
      for (Index c = 0; c < bs; ++c) {
        f[r * bs + c] = result.truth(stat.row0 + r, stat.col0 + c);
      }
    }

    recovered[idx] = Matrix::Zero(bs, bs);
    const double f_norm = f.norm();
    if (config.m_per_block == 0 || f_norm == 0.0) {
      stat.skipped_zero = true;
      stat.norm_error = f_norm == 0.0 ? 0.0 : 1.0;
      return;
    }

    const RngStream block_stream = root.child(static_cast<std::uint64_t>(idx));
    Matrix A =
        gaussian_matrix(config.m_per_block, n, block_stream.child(stream_key::measurement));
    MeasurementEnsemble ensemble{std::move(A), config.T};
    const StageFactorizationCache cache(ensemble, dict);

    RecoveryConfig rc;
    rc.r = config.r_multiplier * f_norm;
    rc.s = config.s_budget;
    rc.stages = config.T;
    rc.dither_scale_multiplier = config.dither_scale_multiplier;
    rc.solver = config.solver;

    auto [record, sample_trace] =
        adaptive_sample(ensemble, f, dict, rc, block_stream.child(stream_key::sampling), &cache);
    auto [f_hat, recover_trace] = adaptive_recover(ensemble, dict, record, rc, &cache);

    stat.failed = sample_trace.any_stage_failed() || recover_trace.any_stage_failed();
    stat.norm_error = normalized_error(f, f_hat);
    stat.solver_iterations =
        sample_trace.total_iterations() + recover_trace.total_iterations();
    stat.max_feasibility_violation = std::max(sample_trace.max_feasibility_violation(),
                                              recover_trace.max_feasibility_violation());
    stat.max_budget_violation =
        std::max(sample_trace.max_budget_violation(), recover_trace.max_budget_violation());

    for (Index r = 0; r < bs; ++r) {
      for (Index c = 0; c < bs; ++c) {
        recovered[idx](r, c) = f_hat[r * bs + c];
      }
    }
  });

  for (std::size_t idx = 0; idx < block_count; ++idx) {
    const auto& stat = result.blocks[idx];
    result.reconstruction.block(stat.row0, stat.col0, bs, bs) = recovered[idx];
  }
  result.psnr_db = psnr(result.truth, result.reconstruction);
  return result;
}

void write_block_stats_csv(const std::filesystem::path& path,
                           const std::vector<BlockResult>& blocks) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "row0,col0,skipped_zero,failed,norm_error,solver_iterations,"
        "max_feasibility_violation,max_budget_violation\n";
  for (const auto& b : blocks) {
    os << b.row0 << ',' << b.col0 << ',' << (b.skipped_zero ? 1 : 0) << ','
       << (b.failed ? 1 : 0) << ',' << io::format_double(b.norm_error) << ','
       << b.solver_iterations << ',' << io::format_double(b.max_feasibility_violation) << ','
       << io::format_double(b.max_budget_violation) << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  unsigned worker_count = threads > 0 ? static_cast<unsigned>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  worker_count = std::min<unsigned>(worker_count, static_cast<unsigned>(count));

  if (worker_count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (unsigned i = 0; i < worker_count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

const std::vector<std::string> kSolverKeys = {
    "rho", "max_iterations", "primal_tol", "dual_tol", "constraint_tol",
    "over_relaxation", "adaptive_rho"};

SolverParams solver_from_config(const io::KeyValueConfig& kv) {
  SolverParams p;
  p.rho = kv.get_double_or("rho", p.rho);
  p.max_iterations = static_cast<int>(kv.get_int_or("max_iterations", p.max_iterations));
  p.primal_tol = kv.get_double_or("primal_tol", p.primal_tol);
  p.dual_tol = kv.get_double_or("dual_tol", p.dual_tol);
  p.constraint_tol = kv.get_double_or("constraint_tol", p.constraint_tol);
  p.over_relaxation = kv.get_double_or("over_relaxation", p.over_relaxation);
  p.adaptive_rho = kv.get_bool_or("adaptive_rho", p.adaptive_rho);
  return p;
}

const std::vector<std::string> kCommonKeys = {
    "n", "N", "s", "trials", "master_seed", "dictionary", "r_multiplier",
    "dither_scale_multiplier", "threads", "record_wall_time", "mean_in_db"};

ExperimentConfig common_from_config(const io::KeyValueConfig& kv) {
  ExperimentConfig c;
  c.n = kv.get_int_or("n", c.n);
  c.N = kv.get_int_or("N", c.N);
  c.s = static_cast<int>(kv.get_int_or("s", c.s));
  c.trials = static_cast<int>(kv.get_int_or("trials", c.trials));
  c.master_seed = kv.get_uint64_or("master_seed", c.master_seed);
  if (kv.has("dictionary")) c.dictionary = parse_dictionary_kind(kv.get_string("dictionary"));
  c.r_multiplier = kv.get_double_or("r_multiplier", c.r_multiplier);
  c.dither_scale_multiplier =
      kv.get_double_or("dither_scale_multiplier", c.dither_scale_multiplier);
  c.threads = static_cast<int>(kv.get_int_or("threads", c.threads));
  c.record_wall_time = kv.get_bool_or("record_wall_time", c.record_wall_time);
  c.mean_in_db = kv.get_bool_or("mean_in_db", c.mean_in_db);
  c.solver = solver_from_config(kv);
  return c;
}

std::vector<std::string> concat_keys(std::initializer_list<std::vector<std::string>> lists) {
  std::vector<std::string> out;
  for (const auto& list : lists) out.insert(out.end(), list.begin(), list.end());
  return out;
}

}  // namespace

ExperimentConfig load_error_vs_m_config(const io::KeyValueConfig& kv) {
  kv.require_known_keys(concat_keys({kCommonKeys, kSolverKeys, {"m_grid", "T"}}));
  ExperimentConfig c = common_from_config(kv);
  for (long long m : kv.get_int_list("m_grid")) c.m_grid.push_back(m);
  c.T = static_cast<int>(kv.get_int_or("T", c.T));
  c.validate_for_m_sweep();
  return c;
}

ExperimentConfig load_error_vs_T_config(const io::KeyValueConfig& kv) {
  kv.require_known_keys(concat_keys({kCommonKeys, kSolverKeys, {"m", "T_grid", "min_block_size"}}));
  ExperimentConfig c = common_from_config(kv);
  c.m = kv.get_int_or("m", c.m);
  if (kv.has("T_grid")) {
    c.T_grid.clear();
    for (long long t : kv.get_int_list("T_grid")) c.T_grid.push_back(static_cast<int>(t));
  }
  c.min_block_size = kv.get_int_or("min_block_size", c.min_block_size);
  c.validate_for_T_sweep();
  return c;
}

ImageExperimentConfig load_image_config(const io::KeyValueConfig& kv) {
  kv.require_known_keys(concat_keys(
      {kSolverKeys,
       {"image_side", "block_side", "m_per_block", "T", "s_budget", "seed", "r_multiplier",
        "dither_scale_multiplier", "threads"}}));
  ImageExperimentConfig c;
  c.image_side = kv.get_int_or("image_side", c.image_side);
  c.block_side = kv.get_int_or("block_side", c.block_side);
  c.m_per_block = kv.get_int_or("m_per_block", c.m_per_block);
  c.T = static_cast<int>(kv.get_int_or("T", c.T));
  c.s_budget = static_cast<int>(kv.get_int_or("s_budget", c.s_budget));
  c.seed = kv.get_uint64_or("seed", c.seed);
  c.r_multiplier = kv.get_double_or("r_multiplier", c.r_multiplier);
  c.dither_scale_multiplier =
      kv.get_double_or("dither_scale_multiplier", c.dither_scale_multiplier);
  c.threads = static_cast<int>(kv.get_int_or("threads", c.threads));
  c.solver = solver_from_config(kv);
  c.validate();
  return c;
}

}  // namespace obcs
