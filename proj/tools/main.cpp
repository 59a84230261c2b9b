// droboost command-line front end: train, predict, evaluate, calibrate-delta, benchmark.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "droboost/adaboost.hpp"
#include "droboost/benchmark.hpp"
#include "droboost/boost.hpp"
#include "droboost/calibrate.hpp"
#include "droboost/data.hpp"
#include "droboost/errors.hpp"
#include "droboost/metrics.hpp"
#include "droboost/model_io.hpp"

namespace {

using namespace droboost;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::string path;
  std::string schema = "generic";
  std::string label_column = "label";
  std::string positive_value = "1";
  int skip_rows = 1;

  void add(CLI::App& cmd) {
    cmd.add_option("--data", path, "CSV file")->required();
    cmd.add_option("--schema", schema, "uci or generic")->check(CLI::IsMember({"uci", "generic"}));
    cmd.add_option("--label-column", label_column, "label column name (generic schema)");
    cmd.add_option("--positive-value", positive_value, "label value mapped to +1 (generic schema)");
    cmd.add_option("--skip-rows", skip_rows, "header rows to skip (2 for the raw UCI export)");
  }

  Dataset load() const {
    Schema s = schema == "uci" ? Schema{UciCreditSchema{}} : Schema{GenericSchema{label_column, positive_value}};
    return load_csv(path, s, {skip_rows});
  }
};

struct ModelFlags {
  std::string loss = "exp";
  std::string delta = "auto";
  double confidence = 0.9;
  int dim_t = 30;
  int depth = 5;
  int min_leaf = 1;
  int iters = 100;
  std::string line_search = "exact";
  double line_tolerance = 1e-6;
  double stall = 1e-9;
  std::uint64_t seed = 0;

  void add(CLI::App& cmd) {
    cmd.add_option("--loss", loss, "exp or logistic")->check(CLI::IsMember({"exp", "logistic"}));
    cmd.add_option("--delta", delta, "KL radius: a number >= 0, 'auto' (calibrated) or 'adaboost'");
    cmd.add_option("--confidence", confidence, "confidence level for --delta auto");
    cmd.add_option("--dim-T", dim_t, "dimension T for --delta auto");
    cmd.add_option("--depth", depth, "tree depth");
    cmd.add_option("--min-leaf", min_leaf, "minimum rows per leaf");
    cmd.add_option("--iters", iters, "boosting iterations");
    cmd.add_option("--line-search", line_search, "exact or fixed")->check(CLI::IsMember({"exact", "fixed"}));
    cmd.add_option("--line-tolerance", line_tolerance, "line-search bracket tolerance");
    cmd.add_option("--stall", stall, "relative improvement below which training stops");
    cmd.add_option("--seed", seed, "random seed");
  }

  TrainConfig config() const {
    TrainConfig c;
    c.loss = parse_loss_kind(loss);
    if (delta == "auto") {
      c.radius = RadiusRule::calibrated_delta(confidence, dim_t);
    } else if (delta == "adaboost") {
      c.radius = RadiusRule::adaboost_radius();
    } else {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(delta, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != delta.size()) throw UsageError("--delta expects a number, 'auto' or 'adaboost'");
      c.radius = RadiusRule::fixed_delta(value);
    }
    c.tree = {depth, min_leaf};
    c.max_iters = iters;
    c.line_search.mode = line_search == "exact" ? LineSearchMode::exact_robust : LineSearchMode::fixed_weights;
    c.line_search.tolerance = line_tolerance;
    c.stall_tolerance = stall;
    c.seed = seed;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

int cmd_train(const DataFlags& data_flags, const ModelFlags& model_flags, const std::string& algorithm,
              const std::string& out, std::string trace_path) {
  TrainConfig config = model_flags.config();
  Dataset data = data_flags.load();
  Model model;
  model.algorithm = algorithm;
  model.loss = config.loss;
  if (algorithm == "dro") {
    auto result = train(data, config);
    model.delta = result.trace.delta;
    model.ensemble = std::move(result.ensemble);
    if (trace_path.empty()) trace_path = out + ".trace.tsv";
    std::ofstream trace(trace_path);
    if (!trace) throw DataError("cannot write " + trace_path);
    write_trace(trace, result.trace);
    std::cerr << "delta=" << format_real(result.trace.delta) << " terms=" << model.ensemble.size()
              << " robust_loss=" << format_real(result.trace.records.back().robust_loss) << '\n';
  } else if (algorithm == "adaboost") {
    model.loss = LossKind::exponential;
    model.delta = std::nan("");
    model.ensemble = train_adaboost(data, config.tree, config.max_iters).ensemble;
  } else {
    model.delta = 0.0;
    model.ensemble = train_gradient_boost(data, config.loss, config.tree, config.max_iters, config.stall_tolerance).ensemble;
  }
  save_model(out, model);
  return 0;
}

int cmd_predict(const DataFlags& data_flags, const std::string& model_path) {
  Model model = load_model(model_path);
  Dataset data = data_flags.load();
  if (model.ensemble.size() > 0 && model.ensemble.n_features() != data.n_features()) {
    throw DataError("model expects " + std::to_string(model.ensemble.n_features()) + " features, data has " +
                    std::to_string(data.n_features()));
  }
  std::cout << "prediction\tscore\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    double f = model.ensemble.evaluate(data.row(i));
    std::cout << (f >= 0.0 ? 1 : -1) << '\t' << format_real(f) << '\n';
  }
  return 0;
}

int cmd_evaluate(const DataFlags& data_flags, const std::string& model_path, const std::string& format) {
  Model model = load_model(model_path);
  Dataset data = data_flags.load();
  Metrics m;
  try {
    m = evaluate(model.ensemble, data);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  if (format != "table") std::cout << format_key_values(m);
  if (format != "kv") std::cout << format_table(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust boosting over KL uncertainty sets"};
  app.require_subcommand(1);

  DataFlags train_data;
  ModelFlags train_model;
  std::string algorithm = "dro";
  std::string out = "model.txt";
  std::string trace_path;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_data.add(*train_cmd);
  train_model.add(*train_cmd);
  train_cmd->add_option("--algorithm", algorithm, "dro, adaboost or gradboost")
      ->check(CLI::IsMember({"dro", "adaboost", "gradboost"}));
  train_cmd->add_option("--out", out, "model file");
  train_cmd->add_option("--trace", trace_path, "trace file (default <out>.trace.tsv)");

  DataFlags predict_data;
  std::string predict_model;
  auto* predict_cmd = app.add_subcommand("predict", "print sgn(F(x)) and F(x) per row");
  predict_data.add(*predict_cmd);
  predict_cmd->add_option("--model", predict_model, "model file")->required();

  DataFlags eval_data;
  std::string eval_model;
  std::string eval_format = "both";
  auto* eval_cmd = app.add_subcommand("evaluate", "accuracy, class rates and average exponential loss");
  eval_data.add(*eval_cmd);
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--format", eval_format, "kv, table or both")->check(CLI::IsMember({"kv", "table", "both"}));

  int cal_dim = 30;
  double cal_conf = 0.9;
  std::size_t cal_n = 3000;
  auto* cal_cmd = app.add_subcommand("calibrate-delta", "KL radius chi2_T quantile / (2N)");
  cal_cmd->add_option("--dim-T", cal_dim, "dimension T");
  cal_cmd->add_option("--confidence", cal_conf, "confidence level");
  cal_cmd->add_option("--n", cal_n, "training sample size");

  DataFlags bench_data;
  ModelFlags bench_model;
  int reps = 10;
  std::size_t train_size = 3000;
  int threads = 0;
  bool with_gb = false;
  auto* bench_cmd = app.add_subcommand("benchmark", "repeated train/test comparison against AdaBoost");
  bench_data.add(*bench_cmd);
  bench_model.add(*bench_cmd);
  bench_cmd->add_option("--reps", reps, "repetitions");
  bench_cmd->add_option("--train-size", train_size, "training rows per split");
  bench_cmd->add_option("--threads", threads, "worker threads (default DROBOOST_THREADS or 1)");
  bench_cmd->add_flag("--gradboost", with_gb, "add an empirical-risk gradient boosting column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_data, train_model, algorithm, out, trace_path);
    if (*predict_cmd) return cmd_predict(predict_data, predict_model);
    if (*eval_cmd) return cmd_evaluate(eval_data, eval_model, eval_format);
    if (*cal_cmd) {
      CalibrationSpec spec{cal_conf, cal_dim, cal_n};
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      std::cout << "quantile=" << format_real(chi2_quantile(cal_dim, cal_conf)) << '\n'
                << "delta=" << format_real(select_delta(spec)) << '\n';
      return 0;
    }
    if (*bench_cmd) {
      BenchmarkConfig config;
      config.dro = bench_model.config();
      config.adaboost_rounds = bench_model.iters;
      config.repetitions = reps;
      config.train_size = train_size;
      config.seed = bench_model.seed;
      config.threads = threads;
      config.gradient_boost_baseline = with_gb;
      Dataset data = bench_data.load();
      std::cout << format_benchmark(run_benchmark(data, config));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::range_error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
