#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quantbench/advisory.hpp"
#include "quantbench/config.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/eval.hpp"
#include "quantbench/model_io.hpp"
#include "quantbench/train.hpp"

namespace quantbench {

// Exit codes: 0 ok, 1 config error, 2 data error, 3 training/numeric failure.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitData = 2, kExitTrain = 3 };

namespace cli_detail {

struct CommonFlags {
  std::string config_path;
  std::string output_dir;
  std::string arch;
  std::int64_t seed = -1;
  std::int64_t epochs = -1;
  std::int64_t window = -1;
  std::int64_t horizon = -1;
  std::int64_t units = -1;
  std::int64_t layers = -1;
};

inline void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", flags.config_path, "JSON config file");
  if (config_required) opt->required();
  cmd->add_option("--output-dir", flags.output_dir, "override output directory");
  cmd->add_option("--arch", flags.arch, "override architecture");
  cmd->add_option("--seed", flags.seed, "override model and train seed");
  cmd->add_option("--epochs", flags.epochs, "override training epochs");
  cmd->add_option("--window", flags.window, "override input window length");
  cmd->add_option("--horizon", flags.horizon, "override prediction horizon");
  cmd->add_option("--units", flags.units, "override LSTM units per layer");
  cmd->add_option("--layers", flags.layers, "override LSTM layer count");
}

// Config file first, flags override.
inline RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg = flags.config_path.empty() ? RunConfig{} : load_run_config(flags.config_path);
  if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
  if (!flags.arch.empty()) cfg.spec.architecture = architecture_from_string(flags.arch);
  if (flags.seed >= 0) {
    cfg.spec.seed = static_cast<std::uint64_t>(flags.seed);
    cfg.train.seed = static_cast<std::uint64_t>(flags.seed);
  }
  if (flags.epochs > 0) cfg.train.epochs = static_cast<std::size_t>(flags.epochs);
  if (flags.window > 0) cfg.spec.window = static_cast<std::size_t>(flags.window);
  if (flags.horizon > 0) cfg.spec.horizon = static_cast<std::size_t>(flags.horizon);
  if (flags.units > 0) cfg.spec.units = static_cast<std::size_t>(flags.units);
  if (flags.layers > 0) cfg.spec.layers = static_cast<std::size_t>(flags.layers);
  cfg.spec.validate();
  cfg.train.validate();
  return cfg;
}

inline std::filesystem::path ensure_output_dir(const RunConfig& cfg) {
  std::filesystem::path dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output dir '" + dir.string() + "'");
  return dir;
}

inline void write_loss_csv(const std::vector<double>& history,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << (i + 1) << ',' << detail::csv_double(history[i]) << "\n";
  }
}

// The training pipeline shared by `train` and `predict`: chronological
// split, scaler fitted on the train partition only.
struct PreparedData {
  FeatureMatrix features;
  FeatureMatrix train_scaled;
  ScalerState scaler;
};

inline PreparedData prepare_training_data(const RunConfig& cfg) {
  PreparedData prep;
  prep.features = load_configured_features(cfg.data);
  if (cfg.spec.features > prep.features.features()) {
    throw ConfigError("spec expects " + std::to_string(cfg.spec.features) +
                      " features but the data pipeline produced " +
                      std::to_string(prep.features.features()) +
                      " (add data.news for a sentiment column)");
  }
  const FeatureMatrix sub = detail::take_features(prep.features, cfg.spec.features);
  auto [train_fm, test_fm] = split_train_test(sub, cfg.eval.train_fraction);
  prep.scaler = fit_minmax(train_fm);
  prep.train_scaled = transform(prep.scaler, train_fm);
  return prep;
}

inline int cmd_train(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const auto out_dir = ensure_output_dir(cfg);
  const PreparedData prep = prepare_training_data(cfg);
  const WindowedDataset ds = make_windows(prep.train_scaled, cfg.spec.window, cfg.spec.horizon);

  TrainResult result = train(cfg.spec, ds, cfg.train);
  save_model(cfg.spec, result.params, out_dir / "model.qbnn");
  write_loss_csv(result.loss_history, out_dir / "loss.csv");

  std::printf("trained %s on %zu windows for %zu epochs (final loss %.6g)\n",
              to_string(cfg.spec.architecture), ds.size(), cfg.train.epochs,
              result.loss_history.back());
  std::printf("wrote %s and %s\n", (out_dir / "model.qbnn").string().c_str(),
              (out_dir / "loss.csv").string().c_str());
  return kExitOk;
}

inline int cmd_predict(const CommonFlags& flags, const std::string& model_path) {
  const RunConfig cfg = resolve_config(flags);
  const auto out_dir = ensure_output_dir(cfg);
  const std::filesystem::path model_file =
      model_path.empty() ? out_dir / "model.qbnn" : std::filesystem::path(model_path);
  const LoadedModel model = load_model(model_file);

  const FeatureMatrix features = load_configured_features(cfg.data);
  if (model.spec.features > features.features()) {
    throw ConfigError("model expects " + std::to_string(model.spec.features) +
                      " features but the data pipeline produced " +
                      std::to_string(features.features()));
  }
  const FeatureMatrix sub = detail::take_features(features, model.spec.features);
  auto [train_fm, test_fm] = split_train_test(sub, cfg.eval.train_fraction);
  const ScalerState scaler = fit_minmax(train_fm);
  const FeatureMatrix scaled = transform(scaler, sub);

  if (scaled.steps() < model.spec.window) throw DataError("series shorter than the model window");
  Matrix window(model.spec.window, model.spec.features);
  const std::size_t offset = scaled.steps() - model.spec.window;
  for (std::size_t t = 0; t < model.spec.window; ++t)
    for (std::size_t j = 0; j < model.spec.features; ++j) {
      window(t, j) = scaled.values(offset + t, j);
    }

  const Matrix pred = predict(model.spec, model.params, {window});
  std::ofstream out(out_dir / "predictions.csv");
  if (!out) throw DataError("cannot write predictions.csv");
  out << "step,predicted_close\n";
  std::printf("forecast from %s over the last %zu rows:\n", model_file.string().c_str(),
              model.spec.window);
  for (std::size_t k = 0; k < model.spec.horizon; ++k) {
    const double price = inverse_transform_close(scaler, pred(0, k));
    out << (k + 1) << ',' << detail::csv_double(price) << "\n";
    std::printf("  step %zu: %.4f\n", k + 1, price);
  }
  std::printf("wrote %s\n", (out_dir / "predictions.csv").string().c_str());
  return kExitOk;
}

inline int cmd_benchmark(const CommonFlags& flags, bool with_sweep) {
  const RunConfig cfg = resolve_config(flags);
  const auto out_dir = ensure_output_dir(cfg);
  const FeatureMatrix features = load_configured_features(cfg.data);

  std::vector<ModelSpec> specs;
  for (Architecture arch : {Architecture::Vanilla, Architecture::Bidirectional,
                            Architecture::Seq2Seq, Architecture::TwoPath}) {
    ModelSpec s = cfg.spec;
    s.architecture = arch;
    s.features = 1;
    specs.push_back(s);
  }

  EvalOptions opt;
  opt.train_fraction = cfg.eval.train_fraction;
  opt.price_space = cfg.eval.price_space;
  const MetricsReport report = benchmark(specs, features, cfg.train, opt);

  write_benchmark_csv(report, out_dir / "benchmark.csv");
  for (const auto& row : report.rows) {
    write_forecast_csv(row, out_dir / ("forecast_" + row.name + ".csv"));
  }
  std::fputs(format_benchmark_table(report).c_str(), stdout);
  std::printf("wrote %s (+%zu forecast files, %s space)\n",
              (out_dir / "benchmark.csv").string().c_str(), report.rows.size(),
              report.metric_space.c_str());

  if (with_sweep) {
    const SweepReport sw =
        sweep(cfg.spec, features, cfg.eval.windows, cfg.eval.horizons, cfg.train, opt);
    write_sweep_csv(sw, out_dir / "sweep.csv");
    std::printf("wrote %s (%zu cells)\n", (out_dir / "sweep.csv").string().c_str(),
                sw.cells.size());
  }
  return kExitOk;
}

inline int cmd_advise(const CommonFlags& flags, const std::string& model_path) {
  const RunConfig cfg = resolve_config(flags);
  const auto out_dir = ensure_output_dir(cfg);
  if (cfg.advisory.symbols.empty()) throw ConfigError("advisory.symbols is empty");

  const std::string cache = effective_cache_dir(cfg.data);
  if (cache.empty()) {
    throw ConfigError("config needs data.cache_dir (or QUANTBENCH_CACHE_DIR) for advisories");
  }
  DirectoryCacheSource source{cache};
  std::vector<PriceSeries> series_set;
  series_set.reserve(cfg.advisory.symbols.size());
  for (const auto& symbol : cfg.advisory.symbols) {
    series_set.push_back(source.history(symbol));
  }

  std::map<std::string, double> forecasts;
  const std::map<std::string, double>* forecasts_ptr = nullptr;
  if (!model_path.empty()) {
    const LoadedModel model = load_model(model_path);
    if (model.spec.features != 1) {
      throw ConfigError("forecast-aware advisory needs a close-only (features=1) model");
    }
    for (const auto& series : series_set) {
      FeatureMatrix fm = make_feature_matrix(series, cfg.data.use_adj_close);
      auto [train_fm, test_fm] = split_train_test(fm, cfg.eval.train_fraction);
      const ScalerState scaler = fit_minmax(train_fm);
      const FeatureMatrix scaled = transform(scaler, fm);
      if (scaled.steps() < model.spec.window) {
        throw DataError("series '" + series.symbol + "' shorter than the model window");
      }
      Matrix window(model.spec.window, 1);
      const std::size_t offset = scaled.steps() - model.spec.window;
      for (std::size_t t = 0; t < model.spec.window; ++t) {
        window(t, 0) = scaled.values(offset + t, 0);
      }
      const Matrix pred = predict(model.spec, model.params, {window});
      forecasts[series.symbol] = inverse_transform_close(scaler, pred(0, 0));
    }
    forecasts_ptr = &forecasts;
  }

  AdvisoryOptions opt;
  opt.threshold = cfg.advisory.threshold;
  opt.trailing_days = cfg.advisory.trailing_days;
  const AdvisoryReport report = advise(series_set, forecasts_ptr, opt);

  write_advisory_csv(report, out_dir / "advisory.csv");
  std::fputs(format_advisory_table(report).c_str(), stdout);
  std::printf("wrote %s\n", (out_dir / "advisory.csv").string().c_str());
  return kExitOk;
}

inline int cmd_ingest(const CommonFlags& flags, const std::string& csv_arg,
                      const std::string& symbol_arg) {
  const RunConfig cfg = resolve_config(flags);
  const std::string csv = csv_arg.empty() ? cfg.data.csv : csv_arg;
  const std::string symbol = symbol_arg.empty() ? cfg.data.symbol : symbol_arg;
  if (csv.empty()) throw ConfigError("ingest needs --csv (or data.csv)");
  if (symbol.empty()) throw ConfigError("ingest needs --symbol (or data.symbol)");
  const std::string cache = effective_cache_dir(cfg.data);
  if (cache.empty()) {
    throw ConfigError("ingest needs data.cache_dir (or QUANTBENCH_CACHE_DIR)");
  }

  const PriceSeries series = load_ohlcv_csv(csv, symbol);
  std::error_code ec;
  std::filesystem::create_directories(cache, ec);
  if (ec) throw ConfigError("cannot create cache dir '" + cache + "'");
  const auto dest = std::filesystem::path(cache) / (symbol + ".csv");
  save_ohlcv_csv(series, dest);
  std::printf("ingested %zu bars for %s (%s .. %s) into %s\n", series.size(), symbol.c_str(),
              series.bars.front().date.str().c_str(), series.bars.back().date.str().c_str(),
              dest.string().c_str());
  return kExitOk;
}

inline int cmd_gradcheck(double eps, double tolerance) {
  // Smallest stack that still exercises every path: 2 layers, 2 features,
  // 5-step window, 2-step horizon, dropout active with a fixed mask seed.
  ModelSpec base;
  base.layers = 2;
  base.units = 4;
  base.window = 5;
  base.horizon = 2;
  base.features = 2;
  base.dropout_rate = 0.2;
  base.seed = 1234;

  Rng data_rng(57);
  Matrix input(base.window, base.features);
  for (double& v : input.data()) v = data_rng.uniform(-1.0, 1.0);
  Matrix target(base.horizon, 1);
  for (double& v : target.data()) v = data_rng.uniform(0.0, 1.0);

  struct Row {
    const char* name;
    Architecture arch;
    bool teacher_forcing;
  };
  const Row rows[] = {
      {"vanilla", Architecture::Vanilla, false},
      {"bidirectional", Architecture::Bidirectional, false},
      {"seq2seq", Architecture::Seq2Seq, false},
      {"seq2seq (teacher forcing)", Architecture::Seq2Seq, true},
      {"two_path", Architecture::TwoPath, false},
  };

  bool all_ok = true;
  std::printf("%-28s %14s %8s\n", "architecture", "max rel error", "status");
  for (const Row& row : rows) {
    ModelSpec spec = base;
    spec.architecture = row.arch;
    GradCheckOptions opt;
    opt.eps = eps;
    opt.teacher_forcing = row.teacher_forcing;
    const double err = grad_check(spec, input, target, opt);
    const bool ok = err < tolerance;
    all_ok = all_ok && ok;
    std::printf("%-28s %14.3e %8s\n", row.name, err, ok ? "ok" : "FAIL");
  }
  std::printf("gradient check %s (tolerance %.1e)\n", all_ok ? "passed" : "FAILED", tolerance);
  return all_ok ? kExitOk : kExitTrain;
}

}  // namespace cli_detail

// Entry point shared by the binary and the tests. `args` excludes argv[0].
inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"recurrent-network stock forecasting toolkit"};
  app.require_subcommand(1);

  cli_detail::CommonFlags train_flags, predict_flags, bench_flags, advise_flags, ingest_flags;
  std::string predict_model, advise_model, ingest_csv, ingest_symbol;
  bool bench_sweep = false;
  double gradcheck_eps = 1e-5;

  auto* train_cmd = app.add_subcommand("train", "train one model, write model.qbnn + loss.csv");
  cli_detail::add_common_flags(train_cmd, train_flags);

  auto* predict_cmd = app.add_subcommand("predict", "forecast from a saved model");
  cli_detail::add_common_flags(predict_cmd, predict_flags);
  predict_cmd->add_option("--model", predict_model, "model file (default <output_dir>/model.qbnn)");

  auto* bench_cmd =
      app.add_subcommand("benchmark", "train and compare all architectures, write benchmark.csv");
  cli_detail::add_common_flags(bench_cmd, bench_flags);
  bench_cmd->add_flag("--sweep", bench_sweep, "also run the window/horizon sweep");

  auto* advise_cmd = app.add_subcommand("advise", "rank symbols by returns-to-volatility ratio");
  cli_detail::add_common_flags(advise_cmd, advise_flags);
  advise_cmd->add_option("--use-model", advise_model, "model file for forecast-aware advisories");

  auto* ingest_cmd = app.add_subcommand("ingest", "validate a CSV and store it in the cache dir");
  cli_detail::add_common_flags(ingest_cmd, ingest_flags, /*config_required=*/false);
  ingest_cmd->add_option("--csv", ingest_csv, "source OHLCV CSV file");
  ingest_cmd->add_option("--symbol", ingest_symbol, "ticker symbol to store under");

  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "certify backpropagation against finite differences");
  gradcheck_cmd->add_option("--eps", gradcheck_eps, "finite-difference step");

  std::vector<const char*> argv;
  argv.push_back("quantbench");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cli_detail::cmd_train(train_flags);
    if (predict_cmd->parsed()) return cli_detail::cmd_predict(predict_flags, predict_model);
    if (bench_cmd->parsed()) return cli_detail::cmd_benchmark(bench_flags, bench_sweep);
    if (advise_cmd->parsed()) return cli_detail::cmd_advise(advise_flags, advise_model);
    if (ingest_cmd->parsed()) return cli_detail::cmd_ingest(ingest_flags, ingest_csv, ingest_symbol);
    if (gradcheck_cmd->parsed()) return cli_detail::cmd_gradcheck(gradcheck_eps, 1e-4);
  } catch (const ConfigError& e) {
    std::cerr << R"({"error":"config","message":")" << e.what() << "\"}\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << R"({"error":"data","message":")" << e.what() << "\"}\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << R"({"error":"training","message":")" << e.what() << "\"}\n";
    return kExitTrain;
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"internal","message":")" << e.what() << "\"}\n";
    return kExitTrain;
  }
  return kExitConfig;
}

}  // namespace quantbench
