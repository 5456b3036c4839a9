// Command-line front end: synthetic data generation, solving, evaluation,
// separation-oracle inspection and benchmarking. All file formats live here
// or in the library writers; coordinates are one-based in files and flags.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaugetc/dense.hpp"
#include "gaugetc/experiments.hpp"
#include "gaugetc/lp_export.hpp"
#include "gaugetc/numfmt.hpp"
#include "gaugetc/rng.hpp"
#include "gaugetc/samples.hpp"
#include "gaugetc/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNotConverged = 4;
constexpr int kExitInconclusive = 5;

gaugetc::Shape parse_shape(const std::string& text) {
  std::vector<int> dims;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    dims.push_back(static_cast<int>(gaugetc::parse_int(part, "shape")));
  }
  return gaugetc::Shape(dims);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for '" + path + "'");
}

struct GenArgs {
  std::string shape;
  int terms = 10;
  int64_t n = 1000;
  double noise_std = 0.0;
  uint64_t seed = 0;
  std::string out_model = "truth.json";
  std::string out_samples = "samples.csv";
};

int cmd_gen(const GenArgs& args, bool verbose) {
  const gaugetc::Shape shape = parse_shape(args.shape);
  const gaugetc::AtomicModel truth =
      gaugetc::generate_truth(shape, args.terms, gaugetc::mix64(args.seed, 1));
  const std::vector<gaugetc::SampleRow> rows =
      gaugetc::draw_observations(truth, args.n, args.noise_std, gaugetc::mix64(args.seed, 2));
  gaugetc::save_model(truth, args.out_model);
  gaugetc::write_samples_csv_file(shape, rows, args.out_samples);
  if (verbose) {
    std::cerr << "gen: wrote " << args.out_model << " (" << truth.term_count()
              << " terms) and " << args.out_samples << " (" << rows.size()
              << " rows)\n";
  }
  return kExitOk;
}

struct SolveArgs {
  std::string samples;
  std::string shape;
  gaugetc::SolverConfig config;
  std::string out_model = "model.json";
  std::string out_trace;
};

int cmd_solve(const SolveArgs& args, bool verbose) {
  const gaugetc::Shape shape = parse_shape(args.shape);
  const gaugetc::SampleSet samples = gaugetc::read_samples_csv_file(shape, args.samples);
  const gaugetc::SolveResult result = gaugetc::solve(samples, args.config);
  gaugetc::save_model(result.model, args.out_model);
  if (!args.out_trace.empty()) {
    write_text_file(args.out_trace, gaugetc::trace_to_jsonl(result.diagnostics.trace));
  }
  const gaugetc::Diagnostics& diag = result.diagnostics;
  if (verbose || diag.status != gaugetc::SolveStatus::converged) {
    std::cerr << "solve: status="
              << (diag.status == gaugetc::SolveStatus::converged        ? "converged"
                  : diag.status == gaugetc::SolveStatus::iteration_limit ? "iteration-limit"
                                                                         : "oracle-inconclusive")
              << " iterations=" << diag.iterations << " oracle_calls=" << diag.oracle_calls
              << " phi=" << gaugetc::format_double(diag.final_phi)
              << " objective=" << gaugetc::format_double(diag.final_objective)
              << " terms=" << result.model.term_count() << "\n";
  }
  switch (diag.status) {
    case gaugetc::SolveStatus::converged:
      return kExitOk;
    case gaugetc::SolveStatus::iteration_limit:
      return kExitNotConverged;
    case gaugetc::SolveStatus::oracle_inconclusive:
      return kExitInconclusive;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string truth;
  bool check_dense = false;
  std::string out_metrics;
};

int cmd_eval(const EvalArgs& args) {
  const gaugetc::AtomicModel model = gaugetc::load_model(args.model);
  const gaugetc::AtomicModel truth = gaugetc::load_model(args.truth);
  const double value = gaugetc::nmse(model, truth);
  std::printf("%.12g\n", value);

  std::ostringstream metrics;
  metrics << "metric,value\n";
  metrics << "nmse," << gaugetc::format_double(value) << "\n";
  if (args.check_dense) {
    const std::vector<double> dense_model = gaugetc::materialize_dense(
        [&](const gaugetc::EntryIndex& x) { return model.entry(x); }, model.shape());
    const std::vector<double> dense_truth = gaugetc::materialize_dense(
        [&](const gaugetc::EntryIndex& x) { return truth.entry(x); }, truth.shape());
    double err = 0.0;
    double norm = 0.0;
    for (size_t i = 0; i < dense_truth.size(); ++i) {
      const double d = dense_model[i] - dense_truth[i];
      err += d * d;
      norm += dense_truth[i] * dense_truth[i];
    }
    const double dense_value = err / norm;
    std::printf("dense %.12g\n", dense_value);
    metrics << "dense_nmse," << gaugetc::format_double(dense_value) << "\n";
  }
  if (!args.out_metrics.empty()) {
    write_text_file(args.out_metrics, metrics.str());
  }
  return kExitOk;
}

struct OracleArgs {
  std::string samples;
  std::string model;
  std::string shape;
  double phi = 1.0;
  double accuracy_k = 2.0;
  std::string mode = "solve";
  std::string out_lp = "separation.lp";
  int am_restarts = 5;
  int am_pass_cap = 10;
  int64_t node_budget = int64_t{1} << 33;
  uint64_t seed = 0;
};

int cmd_oracle(const OracleArgs& args) {
  const gaugetc::AtomicModel model = gaugetc::load_model(args.model);
  const gaugetc::SampleSet samples =
      gaugetc::read_samples_csv_file(model.shape(), args.samples);

  // Oracle runs at the gradient of the fit objective at the model's iterate.
  const std::vector<double> psi = model.project(samples.unique_indices());
  const std::vector<double> grad = gaugetc::gradient(psi, samples);
  gaugetc::SeparationRequest req;
  req.shape = model.shape();
  req.lambda = model.lambda() > 0 ? model.lambda() : 1.0;
  req.indices = samples.unique_indices();
  req.c = grad;
  req.psi = psi;
  req.phi = args.phi;
  req.accuracy_k = args.accuracy_k;

  if (args.mode == "export") {
    gaugetc::export_milp_file(req, args.out_lp);
    std::printf("wrote %s\n", args.out_lp.c_str());
    return kExitOk;
  }
  gaugetc::OracleOptions options;
  options.am_restarts = args.am_restarts;
  options.am_pass_cap = args.am_pass_cap;
  options.node_budget = args.node_budget;
  options.seed = args.seed;
  try {
    const gaugetc::SeparationResult result = gaugetc::weak_separation_oracle(req, options);
    if (const auto* sep = std::get_if<gaugetc::Separated>(&result)) {
      std::printf("separated gap %.12g via %s\n", sep->gap,
                  sep->via_search ? "search" : "heuristic");
      for (int k = 0; k < req.shape.order(); ++k) {
        std::printf("mode %d:", k + 1);
        for (int j = 0; j < req.shape.dim(k); ++j) {
          std::printf(" %+d", sep->vertex.sign(k, j));
        }
        std::printf("\n");
      }
    } else {
      std::printf("no separation, certified bound %.12g\n",
                  std::get<gaugetc::NoSeparation>(result).certified_bound);
    }
  } catch (const gaugetc::OracleInconclusive& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitInconclusive;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string spec;
  std::string out_dir = ".";
  int threads = 0;  // 0 = use spec value
  uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_bench(const BenchArgs& args, bool verbose) {
  gaugetc::ExperimentSpec spec = gaugetc::load_spec(args.spec);
  if (args.threads > 0) spec.threads = args.threads;
  if (args.seed_set) spec.seed = args.seed;
  const std::vector<gaugetc::TrialResult> trials = gaugetc::run_benchmark(spec);
  std::filesystem::create_directories(args.out_dir);
  const std::string trials_path =
      (std::filesystem::path(args.out_dir) / "trials.csv").string();
  const std::string agg_path =
      (std::filesystem::path(args.out_dir) / "aggregates.csv").string();
  write_text_file(trials_path, gaugetc::trials_to_csv(trials));
  write_text_file(agg_path,
                  gaugetc::aggregates_to_csv(gaugetc::aggregate_results(trials)));
  if (verbose) {
    std::cerr << "bench: wrote " << trials_path << " and " << agg_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor completion over the sign-vertex gauge ball"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  int threads = 1;
  app.add_flag("--verbose", verbose, "chatty progress output on stderr");
  CLI::Option* threads_opt =
      app.add_option("--threads", threads, "worker threads (bench only)")
          ->check(CLI::PositiveNumber);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic truth and samples");
  gen_cmd->add_option("--shape", gen.shape, "mode sizes, e.g. 5,5,5")->required();
  gen_cmd->add_option("--terms", gen.terms, "ground-truth term count")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n", gen.n, "sample count")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--noise-std", gen.noise_std, "observation noise std");
  gen_cmd->add_option("--seed", gen.seed, "rng seed");
  gen_cmd->add_option("--out-model", gen.out_model, "truth model json path");
  gen_cmd->add_option("--out-samples", gen.out_samples, "samples csv path");

  SolveArgs solve_args;
  CLI::App* solve_cmd = app.add_subcommand("solve", "fit a model to samples");
  solve_cmd->add_option("--samples", solve_args.samples, "samples csv")->required();
  solve_cmd->add_option("--shape", solve_args.shape, "mode sizes, e.g. 5,5,5")->required();
  solve_cmd->add_option("--lambda", solve_args.config.lambda, "gauge-ball radius")
      ->required();
  solve_cmd->add_option("--epsilon", solve_args.config.epsilon, "target duality gap");
  solve_cmd->add_option("--k", solve_args.config.accuracy_k, "oracle accuracy (>= 1)");
  solve_cmd->add_option("--max-iterations", solve_args.config.max_iterations, "");
  solve_cmd->add_option("--am-restarts", solve_args.config.am_restarts, "");
  solve_cmd->add_option("--am-pass-cap", solve_args.config.am_pass_cap, "");
  solve_cmd->add_option("--bnb-budget", solve_args.config.bnb_node_budget, "");
  solve_cmd->add_option("--seed", solve_args.config.seed, "rng seed");
  solve_cmd->add_option("--out-model", solve_args.out_model, "fitted model json path");
  solve_cmd->add_option("--out-trace", solve_args.out_trace, "jsonl iteration trace path");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "normalized error of a model");
  eval_cmd->add_option("--model", eval_args.model, "estimate model json")->required();
  eval_cmd->add_option("--truth", eval_args.truth, "truth model json")->required();
  eval_cmd->add_flag("--check-dense", eval_args.check_dense,
                     "also compare against dense evaluation (small shapes)");
  eval_cmd->add_option("--out-metrics", eval_args.out_metrics, "metrics csv path");

  OracleArgs oracle_args;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "run or export one separation problem");
  oracle_cmd->add_option("--samples", oracle_args.samples, "samples csv")->required();
  oracle_cmd->add_option("--model", oracle_args.model, "model json (iterate)")->required();
  oracle_cmd->add_option("--phi", oracle_args.phi, "gap estimate")->required();
  oracle_cmd->add_option("--k", oracle_args.accuracy_k, "oracle accuracy (>= 1)");
  oracle_cmd->add_option("--mode", oracle_args.mode, "solve | export")
      ->check(CLI::IsMember({"solve", "export"}));
  oracle_cmd->add_option("--out-lp", oracle_args.out_lp, "lp file path (export mode)");
  oracle_cmd->add_option("--am-restarts", oracle_args.am_restarts, "");
  oracle_cmd->add_option("--bnb-budget", oracle_args.node_budget, "");
  oracle_cmd->add_option("--seed", oracle_args.seed, "rng seed");

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench", "replicated benchmark runs");
  bench_cmd->add_option("--spec", bench_args.spec, "benchmark spec json")->required();
  bench_cmd->add_option("--out-dir", bench_args.out_dir, "output directory");
  CLI::Option* bench_seed_opt =
      bench_cmd->add_option("--seed", bench_args.seed, "override the spec's base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, verbose);
    if (solve_cmd->parsed()) return cmd_solve(solve_args, verbose);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_args);
    if (bench_cmd->parsed()) {
      if (threads_opt->count() > 0) bench_args.threads = threads;
      bench_args.seed_set = bench_seed_opt->count() > 0;
      return cmd_bench(bench_args, verbose);
    }
  } catch (const std::invalid_argument& err) {
    // Content problems in input files are I/O failures; everything else at
    // this level is a usage mistake.
    const std::string what = err.what();
    std::fprintf(stderr, "error: %s\n", what.c_str());
    for (const char* prefix : {"samples csv", "model json", "benchmark spec", "ingest"}) {
      if (what.rfind(prefix, 0) == 0) return kExitIo;
    }
    return kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitIo;
  }
  return kExitUsage;
}
