#include "obcs/cli.hpp"

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"
#include "obcs/experiments.hpp"
#include "obcs/io.hpp"
#include "obcs/pipeline.hpp"
#include "obcs/solvers.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace obcs::cli {

const char* const kVersion = "0.1.0";

namespace {

void add_solver_flags(CLI::App* cmd, SolverParams& params) {
  cmd->add_option("--rho", params.rho, "ADMM penalty parameter");
  cmd->add_option("--max-iterations", params.max_iterations, "solver iteration cap");
  cmd->add_option("--primal-tol", params.primal_tol, "primal residual tolerance");
  cmd->add_option("--dual-tol", params.dual_tol, "dual residual tolerance");
  cmd->add_option("--constraint-tol", params.constraint_tol, "feasibility tolerance");
}

struct SampleArgs {
  std::string a_path, dict_path, signal_path, out_path, solver_log;
  double r = 0.0;
  int s = 0;
  int stages = 0;
  std::uint64_t seed = 0;
  double dither_multiplier = 1.0;
  SolverParams solver;
};

int do_sample(const SampleArgs& args) {
  const Matrix A = io::read_matrix_file(args.a_path);
  const Dictionary dict = read_dictionary_file(args.dict_path);
  const Vector f = io::read_vector_file(args.signal_path);

  MeasurementEnsemble ensemble{A, args.stages};
  RecoveryConfig config;
  config.r = args.r;
  config.s = args.s;
  config.stages = args.stages;
  config.dither_scale_multiplier = args.dither_multiplier;
  config.solver = args.solver;

  std::ofstream log_stream;
  if (!args.solver_log.empty()) {
    log_stream.open(args.solver_log);
    if (!log_stream) throw std::runtime_error("cannot open solver log: " + args.solver_log);
    config.solver.iteration_log = &log_stream;
  }

  auto [record, trace] = adaptive_sample(ensemble, f, dict, config, RngStream(args.seed));
  write_record_file(args.out_path, record);

  if (trace.any_stage_failed()) {
    std::cerr << "warning: one or more stages did not converge; record written anyway\n";
    return 2;
  }
  return 0;
}

struct RecoverArgs {
  std::string a_path, dict_path, record_path, out_path, trace_path, truth_path, solver_log;
  SolverParams solver;
};

int do_recover(const RecoverArgs& args) {
  const Matrix A = io::read_matrix_file(args.a_path);
  const Dictionary dict = read_dictionary_file(args.dict_path);
  const SamplingRecord record = read_record_file(args.record_path);

  MeasurementEnsemble ensemble{A, record.stages};
  if (ensemble.block_size() != record.block_size()) {
    throw std::runtime_error(
        "record/ensemble dimension mismatch: record blocks are " +
        std::to_string(record.block_size()) + " wide but A provides q = " +
        std::to_string(ensemble.block_size()) + " rows per stage");
  }

  RecoveryConfig config;
  config.r = record.r;
  config.s = record.s;
  config.stages = record.stages;
  config.solver = args.solver;

  std::ofstream log_stream;
  if (!args.solver_log.empty()) {
    log_stream.open(args.solver_log);
    if (!log_stream) throw std::runtime_error("cannot open solver log: " + args.solver_log);
    config.solver.iteration_log = &log_stream;
  }

  auto [f_hat, trace] = adaptive_recover(ensemble, dict, record, config);
  io::write_vector_file(args.out_path, f_hat);

  if (!args.trace_path.empty()) {
    Vector truth;
    bool have_truth = false;
    if (!args.truth_path.empty()) {
      truth = io::read_vector_file(args.truth_path);
      have_truth = true;
    }
    std::ofstream os(args.trace_path);
    if (!os) throw std::runtime_error("cannot open trace file: " + args.trace_path);
    os << "stage,error,solver_iterations,feasibility_violation\n";
    for (int i = 0; i < record.stages; ++i) {
      const auto& st = trace.stages[static_cast<std::size_t>(i)];
      os << (i + 1) << ',';
      if (have_truth) {
        os << io::format_double((truth - trace.estimates[static_cast<std::size_t>(i) + 1]).norm());
      }
      os << ',' << (st.delta.iterations + st.projection.iterations) << ','
         << io::format_double(std::max(st.delta.feasibility_violation,
                                       st.projection.feasibility_violation))
         << '\n';
    }
  }

  if (trace.any_stage_failed()) {
    std::cerr << "warning: one or more stages did not converge; estimate written anyway\n";
    return 2;
  }
  return 0;
}

struct DictExportArgs {
  std::string kind = "random-tight";
  Index n = 0, N = 0, side = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_path;
};

int do_dict_export(const DictExportArgs& args) {
  Dictionary dict;
  const DictionaryKind kind = parse_dictionary_kind(args.kind);
  switch (kind) {
    case DictionaryKind::identity:
      dict = identity_dictionary(args.n);
      break;
    case DictionaryKind::random_tight:
      if (!args.seed_given) throw std::runtime_error("dict export random-tight requires --seed");
      dict = random_tight_dictionary(args.n, args.N > 0 ? args.N : args.n, RngStream(args.seed));
      break;
    case DictionaryKind::haar2d:
      dict = haar_dictionary_2d(args.side);
      break;
    case DictionaryKind::custom:
      throw std::runtime_error("dict export cannot generate a 'custom' dictionary");
  }
  write_dictionary_file(args.out_path, dict);
  return 0;
}

int do_dict_import(const std::string& in_path) {
  const Dictionary dict = read_dictionary_file(in_path);
  if (dict.kind != DictionaryKind::custom && !dict.is_tight(1e-10)) {
    throw std::runtime_error("dictionary of kind '" + to_string(dict.kind) +
                             "' fails the tight-frame check (D D^T != I within 1e-10)");
  }
  std::cout << "kind=" << to_string(dict.kind) << " n=" << dict.n() << " N=" << dict.N()
            << " tightness_defect=" << io::format_double(dict.tightness_defect()) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string config_path;
  std::string trials_out = "trials.csv";
  std::string summary_out = "summary.csv";
  std::string image_out = "reconstruction.pgm";
  std::string truth_out;
  std::string blocks_out = "blocks.csv";
};

int do_experiment_sweep(const ExperimentArgs& args, bool vs_T) {
  const auto kv = io::KeyValueConfig::parse_file(args.config_path);
  const ExperimentConfig config =
      vs_T ? load_error_vs_T_config(kv) : load_error_vs_m_config(kv);
  const auto trials = vs_T ? run_error_vs_T(config) : run_error_vs_m(config);
  write_trials_csv(args.trials_out, trials);
  const auto summary = summarize(trials, config.mean_in_db);
  write_summary_csv(args.summary_out, summary);
  if (vs_T && summary.size() >= 2) {
    std::cout << "fitted_log2_slope=" << io::format_double(fitted_log2_slope(summary)) << '\n';
  }
  int failed = 0;
  for (const auto& t : trials) failed += t.failed ? 1 : 0;
  std::cout << "trials=" << trials.size() << " failed=" << failed << '\n';
  return 0;
}

int do_experiment_image(const ExperimentArgs& args) {
  const auto kv = io::KeyValueConfig::parse_file(args.config_path);
  const ImageExperimentConfig config = load_image_config(kv);
  const ImageExperimentResult result = run_image_experiment(config);
  io::write_pgm(args.image_out, result.reconstruction);
  if (!args.truth_out.empty()) io::write_pgm(args.truth_out, result.truth);
  write_block_stats_csv(args.blocks_out, result.blocks);
  std::cout << "psnr_db=" << io::format_double(result.psnr_db) << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"adaptive one-bit compressed sensing of dictionary-sparse signals"};
  app.require_subcommand(1);
  int exit_code = 0;

  auto* version_cmd = app.add_subcommand("version", "print version and RNG identifier");
  version_cmd->callback([]() {
    std::cout << "obcs " << kVersion << " rng=" << RngStream::algorithm_id() << '\n';
  });

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "adaptive one-bit sampling of a signal");
  sample_cmd->add_option("--A", sample_args.a_path, "measurement matrix file")->required();
  sample_cmd->add_option("--dict", sample_args.dict_path, "dictionary file")->required();
  sample_cmd->add_option("--signal", sample_args.signal_path, "signal vector file")->required();
  sample_cmd->add_option("--r", sample_args.r, "radius bound (||f||_2 <= r)")->required();
  sample_cmd->add_option("--s", sample_args.s, "sparsity budget")->required();
  sample_cmd->add_option("--stages", sample_args.stages, "stage count T")->required();
  sample_cmd->add_option("--seed", sample_args.seed, "dither master seed")->required();
  sample_cmd->add_option("--out", sample_args.out_path, "output record file")->required();
  sample_cmd->add_option("--dither-multiplier", sample_args.dither_multiplier,
                         "scale applied to the per-stage dither sigma");
  sample_cmd->add_option("--solver-log", sample_args.solver_log, "per-iteration CSV log");
  add_solver_flags(sample_cmd, sample_args.solver);
  sample_cmd->callback([&]() { exit_code = do_sample(sample_args); });

  RecoverArgs recover_args;
  auto* recover_cmd = app.add_subcommand("recover", "recover a signal from a record");
  recover_cmd->add_option("--A", recover_args.a_path, "measurement matrix file")->required();
  recover_cmd->add_option("--dict", recover_args.dict_path, "dictionary file")->required();
  recover_cmd->add_option("--record", recover_args.record_path, "record file")->required();
  recover_cmd->add_option("--out", recover_args.out_path, "output estimate file")->required();
  recover_cmd->add_option("--trace", recover_args.trace_path, "per-stage trace CSV");
  recover_cmd->add_option("--truth", recover_args.truth_path,
                          "ground-truth vector for trace errors");
  recover_cmd->add_option("--solver-log", recover_args.solver_log, "per-iteration CSV log");
  add_solver_flags(recover_cmd, recover_args.solver);
  recover_cmd->callback([&]() { exit_code = do_recover(recover_args); });

  auto* dict_cmd = app.add_subcommand("dict", "dictionary utilities");
  dict_cmd->require_subcommand(1);

  DictExportArgs dict_export_args;
  auto* dict_export_cmd = dict_cmd->add_subcommand("export", "generate a dictionary file");
  dict_export_cmd
      ->add_option("--kind", dict_export_args.kind, "identity | random-tight | haar-2d")
      ->required();
  dict_export_cmd->add_option("--n", dict_export_args.n, "signal dimension");
  dict_export_cmd->add_option("--N", dict_export_args.N, "analysis dimension (random-tight)");
  auto* seed_opt = dict_export_cmd->add_option("--seed", dict_export_args.seed,
                                               "seed (random-tight)");
  dict_export_cmd->add_option("--side", dict_export_args.side, "image side (haar-2d)");
  dict_export_cmd->add_option("--out", dict_export_args.out_path, "output file")->required();
  dict_export_cmd->callback([&, seed_opt]() {
    dict_export_args.seed_given = seed_opt->count() > 0;
    exit_code = do_dict_export(dict_export_args);
  });

  std::string dict_import_path;
  auto* dict_import_cmd = dict_cmd->add_subcommand("import", "validate a dictionary file");
  dict_import_cmd->add_option("--in", dict_import_path, "dictionary file")->required();
  dict_import_cmd->callback([&]() { exit_code = do_dict_import(dict_import_path); });

  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo experiment harnesses");
  exp_cmd->require_subcommand(1);

  ExperimentArgs vs_m_args;
  auto* vs_m_cmd = exp_cmd->add_subcommand("error-vs-m", "error against measurement count");
  vs_m_cmd->add_option("--config", vs_m_args.config_path, "config file")->required();
  vs_m_cmd->add_option("--trials-out", vs_m_args.trials_out, "per-trial CSV path");
  vs_m_cmd->add_option("--summary-out", vs_m_args.summary_out, "summary CSV path");
  vs_m_cmd->callback([&]() { exit_code = do_experiment_sweep(vs_m_args, false); });

  ExperimentArgs vs_T_args;
  auto* vs_T_cmd = exp_cmd->add_subcommand("error-vs-T", "error against stage count");
  vs_T_cmd->add_option("--config", vs_T_args.config_path, "config file")->required();
  vs_T_cmd->add_option("--trials-out", vs_T_args.trials_out, "per-trial CSV path");
  vs_T_cmd->add_option("--summary-out", vs_T_args.summary_out, "summary CSV path");
  vs_T_cmd->callback([&]() { exit_code = do_experiment_sweep(vs_T_args, true); });

  ExperimentArgs image_args;
  auto* image_cmd = exp_cmd->add_subcommand("image", "block-wise phantom reconstruction");
  image_cmd->add_option("--config", image_args.config_path, "config file")->required();
  image_cmd->add_option("--image-out", image_args.image_out, "reconstruction PGM path");
  image_cmd->add_option("--truth-out", image_args.truth_out, "ground-truth PGM path");
  image_cmd->add_option("--blocks-out", image_args.blocks_out, "per-block stats CSV path");
  image_cmd->callback([&]() { exit_code = do_experiment_image(image_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}

}  // namespace obcs::cli
