#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "quantbench/data.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/matrix.hpp"

namespace quantbench {

// Per-day feature rows. Column 0 is always the close price; further
// columns are named in `columns` (e.g. "sentiment").
struct FeatureMatrix {
  std::vector<Date> dates;
  Matrix values;  // T x F
  std::vector<std::string> columns{"close"};

  std::size_t steps() const { return values.rows(); }
  std::size_t features() const { return values.cols(); }

  bool has_column(const std::string& name) const {
    for (const auto& c : columns)
      if (c == name) return true;
    return false;
  }
};

inline FeatureMatrix make_feature_matrix(const PriceSeries& series, bool use_adj_close = false) {
  FeatureMatrix fm;
  fm.values = Matrix(series.size(), 1);
  fm.dates.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    fm.dates.push_back(series.bars[i].date);
    fm.values(i, 0) = use_adj_close ? series.bars[i].adj_close : series.bars[i].close;
  }
  return fm;
}

// Fitted [0,1] scaling parameters, one (min, max) pair per feature.
// Passthrough columns (already bounded, e.g. sentiment) are left untouched
// by transform and inverse_transform.
struct ScalerState {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<bool> passthrough;

  std::size_t features() const { return min.size(); }
};

// Column-wise min/max over the training rows only. Columns named
// "sentiment" are marked passthrough.
inline ScalerState fit_minmax(const FeatureMatrix& train) {
  if (train.steps() < 2) throw DataError("fit_minmax: need at least 2 rows");
  const std::size_t f = train.features();
  ScalerState state;
  state.min.assign(f, 0.0);
  state.max.assign(f, 0.0);
  state.passthrough.assign(f, false);
  for (std::size_t j = 0; j < f; ++j) {
    double lo = train.values(0, j);
    double hi = train.values(0, j);
    for (std::size_t i = 1; i < train.steps(); ++i) {
      lo = std::min(lo, train.values(i, j));
      hi = std::max(hi, train.values(i, j));
    }
    state.min[j] = lo;
    state.max[j] = hi;
    state.passthrough[j] = j < train.columns.size() && train.columns[j] == "sentiment";
  }
  return state;
}

// (x - min) / (max - min) per column; degenerate (constant) columns map
// to 0. Out-of-range inputs scale past [0,1] without error.
inline FeatureMatrix transform(const ScalerState& state, const FeatureMatrix& x) {
  if (state.features() != x.features()) {
    throw ShapeError("transform: scaler has " + std::to_string(state.features()) +
                     " features, input has " + std::to_string(x.features()));
  }
  FeatureMatrix out = x;
  for (std::size_t j = 0; j < x.features(); ++j) {
    if (state.passthrough[j]) continue;
    const double range = state.max[j] - state.min[j];
    for (std::size_t i = 0; i < x.steps(); ++i) {
      out.values(i, j) = range == 0.0 ? 0.0 : (x.values(i, j) - state.min[j]) / range;
    }
  }
  return out;
}

inline FeatureMatrix inverse_transform(const ScalerState& state, const FeatureMatrix& x) {
  if (state.features() != x.features()) {
    throw ShapeError("inverse_transform: scaler has " + std::to_string(state.features()) +
                     " features, input has " + std::to_string(x.features()));
  }
  FeatureMatrix out = x;
  for (std::size_t j = 0; j < x.features(); ++j) {
    if (state.passthrough[j]) continue;
    const double range = state.max[j] - state.min[j];
    for (std::size_t i = 0; i < x.steps(); ++i) {
      out.values(i, j) = x.values(i, j) * range + state.min[j];
    }
  }
  return out;
}

// Scalar helpers for mapping single close values (column 0).
inline double inverse_transform_close(const ScalerState& state, double scaled) {
  return scaled * (state.max[0] - state.min[0]) + state.min[0];
}

// Supervised sliding-window samples: inputs are W x F row blocks, targets
// the H scaled closes immediately after each window.
struct WindowedDataset {
  std::vector<Matrix> inputs;   // each W x F
  std::vector<Matrix> targets;  // each H x 1 (close column)
  std::size_t window = 0;
  std::size_t horizon = 0;
  std::vector<Date> target_dates;  // date of each sample's first target row

  std::size_t size() const { return inputs.size(); }
};

inline WindowedDataset make_windows(const FeatureMatrix& x, std::size_t window,
                                    std::size_t horizon) {
  if (window < 1 || horizon < 1) throw ConfigError("make_windows: window and horizon must be >= 1");
  if (x.steps() < window + horizon) {
    throw DataError("make_windows: series of length " + std::to_string(x.steps()) +
                    " too short for window " + std::to_string(window) + " + horizon " +
                    std::to_string(horizon));
  }
  WindowedDataset ds;
  ds.window = window;
  ds.horizon = horizon;
  const std::size_t n = x.steps() - window - horizon + 1;
  ds.inputs.reserve(n);
  ds.targets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix in(window, x.features());
    for (std::size_t t = 0; t < window; ++t)
      for (std::size_t j = 0; j < x.features(); ++j) in(t, j) = x.values(i + t, j);
    Matrix tgt(horizon, 1);
    for (std::size_t h = 0; h < horizon; ++h) tgt(h, 0) = x.values(i + window + h, 0);
    ds.inputs.push_back(std::move(in));
    ds.targets.push_back(std::move(tgt));
    ds.target_dates.push_back(x.dates.empty() ? Date{} : x.dates[i + window]);
  }
  return ds;
}

// Chronological split at floor(T * fraction); no shuffling.
inline std::pair<FeatureMatrix, FeatureMatrix> split_train_test(const FeatureMatrix& x,
                                                                double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split_train_test: fraction must be in (0, 1)");
  }
  const std::size_t t = x.steps();
  const std::size_t cut = static_cast<std::size_t>(std::floor(t * train_fraction));
  if (cut == 0 || cut == t) throw DataError("split_train_test: a partition would be empty");

  FeatureMatrix train, test;
  train.columns = test.columns = x.columns;
  train.values = Matrix(cut, x.features());
  test.values = Matrix(t - cut, x.features());
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < x.features(); ++j) {
      if (i < cut) {
        train.values(i, j) = x.values(i, j);
      } else {
        test.values(i - cut, j) = x.values(i, j);
      }
    }
  }
  if (!x.dates.empty()) {
    train.dates.assign(x.dates.begin(), x.dates.begin() + cut);
    test.dates.assign(x.dates.begin() + cut, x.dates.end());
  }
  return {std::move(train), std::move(test)};
}

}  // namespace quantbench
