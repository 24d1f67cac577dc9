#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "quantbench/errors.hpp"
#include "quantbench/matrix.hpp"
#include "quantbench/model.hpp"
#include "quantbench/preprocess.hpp"
#include "quantbench/train.hpp"

namespace quantbench {

struct Metrics {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
};

inline Metrics metrics(const Matrix& pred, const Matrix& actual) {
  detail::require_same_shape(pred, actual, "metrics");
  if (pred.size() == 0) throw ShapeError("metrics: empty matrices");
  double se = 0.0;
  double ae = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - actual.data()[i];
    se += d * d;
    ae += std::abs(d);
  }
  const double n = static_cast<double>(pred.size());
  Metrics m;
  m.mse = se / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = ae / n;
  return m;
}

// ---------------------------------------------------------------------------
// Paired t-test
// ---------------------------------------------------------------------------

namespace detail {

// Continued-fraction evaluation for the regularized incomplete beta
// function (modified Lentz).
inline double beta_cont_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cont_fraction(a, b, x) / a;
  }
  return 1.0 - bt * beta_cont_fraction(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p-value of Student's t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return detail::incomplete_beta(0.5 * dof, 0.5, x);
}

// Paired two-sided t-test on per-sample differences of two error arrays.
// Identical arrays give p = 1; a constant nonzero shift gives p = 0.
inline double significance_test(const std::vector<double>& sq_err_a,
                                const std::vector<double>& sq_err_b) {
  if (sq_err_a.size() != sq_err_b.size()) {
    throw ShapeError("significance_test: arrays must be paired (equal length)");
  }
  const std::size_t n = sq_err_a.size();
  if (n < 2) throw ShapeError("significance_test: need at least 2 pairs");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += sq_err_a[i] - sq_err_b[i];
  mean /= static_cast<double>(n);

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sq_err_a[i] - sq_err_b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;

  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  return student_t_two_sided_p(t, static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct EvalOptions {
  double train_fraction = 0.8;
  bool price_space = false;  // compute metrics on inverse-transformed prices
  bool parallel = true;
};

struct ForecastPoint {
  Date date;
  double actual = 0.0;     // price units
  double predicted = 0.0;  // price units
};

struct BenchmarkRow {
  std::string name;
  ModelSpec spec;
  Metrics metrics;
  double p_value = 1.0;                // vs the best row
  std::vector<double> sample_sq_err;   // per test sample, in the metric space
  std::vector<ForecastPoint> forecast; // first-step forecast vs actual close
  std::vector<double> loss_history;
};

struct MetricsReport {
  std::vector<BenchmarkRow> rows;  // ranked by mse ascending
  std::string metric_space;        // "scaled" or "price"
};

namespace detail {

// Restricts a feature matrix to its first `count` columns.
inline FeatureMatrix take_features(const FeatureMatrix& fm, std::size_t count) {
  if (count > fm.features()) throw ShapeError("take_features: not enough columns");
  if (count == fm.features()) return fm;
  FeatureMatrix out;
  out.dates = fm.dates;
  out.columns.assign(fm.columns.begin(), fm.columns.begin() + count);
  out.values = Matrix(fm.steps(), count);
  for (std::size_t i = 0; i < fm.steps(); ++i)
    for (std::size_t j = 0; j < count; ++j) out.values(i, j) = fm.values(i, j);
  return out;
}

}  // namespace detail

// Trains one spec on the chronological train split and evaluates it on the
// test split. The standard pipeline: split, fit scaler on train only,
// window both sides, train, predict.
inline BenchmarkRow run_benchmark_cell(const ModelSpec& spec, const FeatureMatrix& features,
                                       const TrainConfig& cfg, const EvalOptions& opt) {
  BenchmarkRow row;
  row.spec = spec;
  row.name = std::string(to_string(spec.architecture)) + (spec.features > 1 ? "_sentiment" : "");

  const FeatureMatrix sub = detail::take_features(features, spec.features);
  auto [train_fm, test_fm] = split_train_test(sub, opt.train_fraction);
  const ScalerState scaler = fit_minmax(train_fm);
  const FeatureMatrix train_scaled = transform(scaler, train_fm);
  const FeatureMatrix test_scaled = transform(scaler, test_fm);

  const WindowedDataset train_ds = make_windows(train_scaled, spec.window, spec.horizon);
  const WindowedDataset test_ds = make_windows(test_scaled, spec.window, spec.horizon);

  TrainResult trained = train(spec, train_ds, cfg);
  row.loss_history = std::move(trained.loss_history);

  const Matrix pred = predict(spec, trained.params, test_ds.inputs);
  const Matrix actual = detail::stack_targets(test_ds.targets);

  Matrix pred_m = pred;
  Matrix actual_m = actual;
  if (opt.price_space) {
    for (double& v : pred_m.data()) v = inverse_transform_close(scaler, v);
    for (double& v : actual_m.data()) v = inverse_transform_close(scaler, v);
  }
  row.metrics = metrics(pred_m, actual_m);

  const std::size_t h = spec.horizon;
  row.sample_sq_err.reserve(test_ds.size());
  for (std::size_t s = 0; s < test_ds.size(); ++s) {
    double se = 0.0;
    for (std::size_t k = 0; k < h; ++k) {
      const double d = pred_m(s, k) - actual_m(s, k);
      se += d * d;
    }
    row.sample_sq_err.push_back(se / static_cast<double>(h));
  }

  row.forecast.reserve(test_ds.size());
  for (std::size_t s = 0; s < test_ds.size(); ++s) {
    ForecastPoint pt;
    pt.date = test_ds.target_dates[s];
    pt.actual = inverse_transform_close(scaler, actual(s, 0));
    pt.predicted = inverse_transform_close(scaler, pred(s, 0));
    row.forecast.push_back(pt);
  }
  return row;
}

// Trains every spec and emits the ranked comparison table with paired
// t-test p-values against the winner. When the features carry a sentiment
// column that no given spec consumes, a vanilla run over close+sentiment
// is appended, completing the five-model comparison.
inline MetricsReport benchmark(std::vector<ModelSpec> specs, const FeatureMatrix& features,
                               const TrainConfig& cfg, const EvalOptions& opt = {}) {
  if (specs.size() < 2) throw ConfigError("benchmark: need at least 2 specs");
  for (const auto& s : specs) {
    if (s.window != specs.front().window || s.horizon != specs.front().horizon) {
      throw ConfigError("benchmark: specs must share window and horizon for paired comparison");
    }
  }
  if (features.has_column("sentiment")) {
    const bool covered =
        std::any_of(specs.begin(), specs.end(), [&](const ModelSpec& s) { return s.features > 1; });
    if (!covered) {
      ModelSpec with_sentiment = specs.front();
      with_sentiment.architecture = Architecture::Vanilla;
      with_sentiment.features = features.features();
      specs.push_back(with_sentiment);
    }
  }

  std::vector<BenchmarkRow> rows(specs.size());
  if (opt.parallel) {
    std::vector<std::future<BenchmarkRow>> futures;
    futures.reserve(specs.size());
    for (const auto& spec : specs) {
      futures.push_back(std::async(std::launch::async, [&, spec] {
        return run_benchmark_cell(spec, features, cfg, opt);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) rows[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      rows[i] = run_benchmark_cell(specs[i], features, cfg, opt);
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    return a.metrics.mse < b.metrics.mse;
  });
  const auto& best = rows.front();
  for (auto& row : rows) {
    row.p_value = significance_test(row.sample_sq_err, best.sample_sq_err);
  }

  MetricsReport report;
  report.rows = std::move(rows);
  report.metric_space = opt.price_space ? "price" : "scaled";
  return report;
}

// ---------------------------------------------------------------------------
// Window/horizon sweep
// ---------------------------------------------------------------------------

struct SweepCell {
  std::size_t window = 0;
  std::size_t horizon = 0;
  double rmse = 0.0;
  bool feasible = true;
};

struct SweepReport {
  std::vector<SweepCell> cells;
};

// One trained-and-evaluated cell per (window, horizon) grid point, every
// cell run from the same base seed so only the geometry varies. Cells the
// series is too short for are marked infeasible and skipped.
inline SweepReport sweep(const ModelSpec& base, const FeatureMatrix& features,
                         const std::vector<std::size_t>& windows,
                         const std::vector<std::size_t>& horizons, const TrainConfig& cfg,
                         const EvalOptions& opt = {}) {
  if (windows.empty() || horizons.empty()) throw ConfigError("sweep: empty grid");

  struct Task {
    ModelSpec spec;
    SweepCell cell;
  };
  std::vector<Task> tasks;
  for (std::size_t w : windows) {
    for (std::size_t h : horizons) {
      Task t;
      t.spec = base;
      t.spec.window = w;
      t.spec.horizon = h;
      t.cell.window = w;
      t.cell.horizon = h;
      tasks.push_back(t);
    }
  }

  auto run_cell = [&](Task& t) {
    try {
      t.cell.rmse = run_benchmark_cell(t.spec, features, cfg, opt).metrics.rmse;
    } catch (const DataError&) {
      t.cell.feasible = false;  // series too short for this geometry
    }
  };

  if (opt.parallel) {
    std::vector<std::future<void>> futures;
    futures.reserve(tasks.size());
    for (auto& t : tasks) {
      futures.push_back(std::async(std::launch::async, [&run_cell, &t] { run_cell(t); }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (auto& t : tasks) run_cell(t);
  }

  SweepReport report;
  report.cells.reserve(tasks.size());
  for (auto& t : tasks) report.cells.push_back(t.cell);
  return report;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline void write_benchmark_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "model,mse,rmse,mae,p_value\n";
  for (const auto& row : report.rows) {
    out << row.name << ',' << detail::csv_double(row.metrics.mse) << ','
        << detail::csv_double(row.metrics.rmse) << ',' << detail::csv_double(row.metrics.mae)
        << ',' << detail::csv_double(row.p_value) << "\n";
  }
}

inline void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "window,horizon,rmse\n";
  for (const auto& cell : report.cells) {
    out << cell.window << ',' << cell.horizon << ','
        << (cell.feasible ? detail::csv_double(cell.rmse) : "infeasible") << "\n";
  }
}

inline void write_forecast_csv(const BenchmarkRow& row, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date,actual,predicted\n";
  for (const auto& pt : row.forecast) {
    out << pt.date.str() << ',' << detail::csv_double(pt.actual) << ','
        << detail::csv_double(pt.predicted) << "\n";
  }
}

// Aligned plain-text comparison table.
inline std::string format_benchmark_table(const MetricsReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-22s %12s %12s %12s %10s\n", "model", "mse", "rmse", "mae",
                "p_value");
  out += line;
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof(line), "%-22s %12.6f %12.6f %12.6f %10.4f\n", row.name.c_str(),
                  row.metrics.mse, row.metrics.rmse, row.metrics.mae, row.p_value);
    out += line;
  }
  return out;
}

}  // namespace quantbench
