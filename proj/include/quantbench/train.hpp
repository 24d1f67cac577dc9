#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "quantbench/errors.hpp"
#include "quantbench/matrix.hpp"
#include "quantbench/model.hpp"
#include "quantbench/preprocess.hpp"
#include "quantbench/rng.hpp"

namespace quantbench {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool teacher_forcing = true;  // seq2seq decoder only
  std::uint64_t seed = 42;
  bool shuffle_each_epoch = true;  // window order only; rows inside a window never move

  void validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  }
};

// First/second moment accumulators mirroring the parameter shapes.
struct AdamState {
  ModelParams m;
  ModelParams v;
  std::int64_t step = 0;
};

inline AdamState make_adam_state(const ModelParams& params) {
  return AdamState{zeros_like(params), zeros_like(params), 0};
}

// Mean squared error over all N x H entries plus its gradient
// d(loss)/d(pred) = 2 (pred - target) / (N H).
inline std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target) {
  detail::require_same_shape(pred, target, "mse_loss");
  if (pred.size() == 0) throw ShapeError("mse_loss: empty matrices");
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double loss = 0.0;
  Matrix grad = pred;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    loss += d * d;
    grad.data()[i] = 2.0 * d * inv_n;
  }
  return {loss * inv_n, grad};
}

// One Adam update with bias correction.
inline void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state,
                      const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  auto p = collect_matrices(params);
  auto g = collect_matrices(const_cast<ParamGrads&>(grads));
  auto m = collect_matrices(state.m);
  auto v = collect_matrices(state.v);
  if (p.size() != g.size() || p.size() != m.size()) {
    throw ShapeError("adam_step: parameter/gradient structure mismatch");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto& pm = p[k]->data();
    const auto& gm = g[k]->data();
    auto& mm = m[k]->data();
    auto& vm = v[k]->data();
    if (pm.size() != gm.size()) throw ShapeError("adam_step: matrix size mismatch");
    for (std::size_t i = 0; i < pm.size(); ++i) {
      mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * gm[i];
      vm[i] = cfg.beta2 * vm[i] + (1.0 - cfg.beta2) * gm[i] * gm[i];
      const double m_hat = mm[i] / bc1;
      const double v_hat = vm[i] / bc2;
      pm[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

namespace detail {

inline std::vector<Matrix> gather_inputs(const WindowedDataset& ds,
                                         const std::vector<std::size_t>& idx, std::size_t begin,
                                         std::size_t end) {
  std::vector<Matrix> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(ds.inputs[idx[i]]);
  return out;
}

inline std::vector<Matrix> gather_targets(const WindowedDataset& ds,
                                          const std::vector<std::size_t>& idx, std::size_t begin,
                                          std::size_t end) {
  std::vector<Matrix> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(ds.targets[idx[i]]);
  return out;
}

// Stacks H x 1 target matrices into one N x H matrix.
inline Matrix stack_targets(const std::vector<Matrix>& targets) {
  const std::size_t n = targets.size();
  const std::size_t h = targets.front().rows();
  Matrix out(n, h);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < h; ++k) out(s, k) = targets[s](k, 0);
  return out;
}

}  // namespace detail

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // mean per-sample loss per epoch
};

// Full training loop: Glorot init from spec.seed, minibatch Adam, optional
// window-order shuffling per epoch. (seed, config, dataset) determine the
// result bitwise.
inline TrainResult train(const ModelSpec& spec, const WindowedDataset& ds,
                         const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (ds.size() == 0) throw TrainError("train: empty dataset");
  if (ds.inputs.front().rows() != spec.window || ds.inputs.front().cols() != spec.features) {
    throw ShapeError("train: dataset window shape does not match spec");
  }
  if (ds.targets.front().rows() != spec.horizon) {
    throw ShapeError("train: dataset horizon does not match spec");
  }

  Rng init_rng(spec.seed);
  TrainResult result;
  result.params = init_params(spec, init_rng);
  AdamState state = make_adam_state(result.params);
  Rng rng(cfg.seed);

  const bool use_teacher = cfg.teacher_forcing && spec.architecture == Architecture::Seq2Seq;
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);

  result.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < ds.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, ds.size());
      const auto inputs = detail::gather_inputs(ds, order, begin, end);
      const auto targets = detail::gather_targets(ds, order, begin, end);
      const Matrix target_mat = detail::stack_targets(targets);

      auto fwd = forward(spec, result.params, inputs, RunMode::Train, rng,
                         use_teacher ? &targets : nullptr);
      auto [loss, grad] = mse_loss(fwd.predictions, target_mat);
      const ParamGrads grads = backward(spec, result.params, fwd.cache, grad);
      adam_step(result.params, grads, state, cfg);
      epoch_loss += loss * static_cast<double>(end - begin);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(ds.size()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckOptions {
  double eps = 1e-5;
  bool teacher_forcing = false;
  std::uint64_t mask_seed = 7;  // dropout masks are regenerated from this on every evaluation
};

// Worst relative error between supplied analytic gradients and central
// finite differences of the loss, over every parameter entry.
inline double max_grad_error(const ModelSpec& spec, ModelParams params,
                             const ParamGrads& analytic, const Matrix& input,
                             const Matrix& target, const GradCheckOptions& opt = {}) {
  const std::vector<Matrix> inputs{input};
  const std::vector<Matrix> targets{target};
  const Matrix target_mat = detail::stack_targets(targets);
  const bool teach = opt.teacher_forcing && spec.architecture == Architecture::Seq2Seq;

  auto loss_at = [&]() {
    Rng rng(opt.mask_seed);
    auto fwd = forward(spec, params, inputs, RunMode::Train, rng, teach ? &targets : nullptr);
    return mse_loss(fwd.predictions, target_mat).first;
  };

  auto param_ptrs = collect_matrices(params);
  auto grad_ptrs = collect_matrices(const_cast<ParamGrads&>(analytic));

  double worst = 0.0;
  for (std::size_t k = 0; k < param_ptrs.size(); ++k) {
    auto& data = param_ptrs[k]->data();
    const auto& gdata = grad_ptrs[k]->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + opt.eps;
      const double up = loss_at();
      data[i] = saved - opt.eps;
      const double down = loss_at();
      data[i] = saved;
      const double fd = (up - down) / (2.0 * opt.eps);
      const double bp = gdata[i];
      const double err = std::abs(bp - fd) / std::max({std::abs(bp), std::abs(fd), 1e-8});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

// Certifies backward() on a single sample: runs the analytic gradients and
// compares every entry against central differences.
inline double grad_check(const ModelSpec& spec, const Matrix& input, const Matrix& target,
                         const GradCheckOptions& opt = {}) {
  spec.validate();
  Rng init_rng(spec.seed);
  ModelParams params = init_params(spec, init_rng);

  const std::vector<Matrix> inputs{input};
  const std::vector<Matrix> targets{target};
  const Matrix target_mat = detail::stack_targets(targets);
  const bool teach = opt.teacher_forcing && spec.architecture == Architecture::Seq2Seq;

  Rng rng(opt.mask_seed);
  auto fwd = forward(spec, params, inputs, RunMode::Train, rng, teach ? &targets : nullptr);
  auto [loss, grad] = mse_loss(fwd.predictions, target_mat);
  (void)loss;
  const ParamGrads analytic = backward(spec, params, fwd.cache, grad);
  return max_grad_error(spec, params, analytic, input, target, opt);
}

}  // namespace quantbench
