#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "quantbench/errors.hpp"
#include "quantbench/matrix.hpp"
#include "quantbench/rng.hpp"

namespace quantbench {

enum class Architecture { Vanilla, Bidirectional, Seq2Seq, TwoPath };

inline const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::Vanilla: return "vanilla";
    case Architecture::Bidirectional: return "bidirectional";
    case Architecture::Seq2Seq: return "seq2seq";
    case Architecture::TwoPath: return "two_path";
  }
  return "vanilla";
}

inline Architecture architecture_from_string(const std::string& name) {
  if (name == "vanilla") return Architecture::Vanilla;
  if (name == "bidirectional") return Architecture::Bidirectional;
  if (name == "seq2seq") return Architecture::Seq2Seq;
  if (name == "two_path") return Architecture::TwoPath;
  throw ConfigError("unknown architecture '" + name + "'");
}

// Architecture choice plus every hyperparameter the model shapes depend on.
struct ModelSpec {
  Architecture architecture = Architecture::Vanilla;
  std::size_t layers = 4;
  std::size_t units = 50;
  double dropout_rate = 0.2;
  std::size_t window = 30;
  std::size_t horizon = 1;
  std::size_t features = 1;
  std::uint64_t seed = 42;

  void validate() const {
    if (layers < 1) throw ConfigError("spec: layers must be >= 1");
    if (units < 1) throw ConfigError("spec: units must be >= 1");
    if (window < 1) throw ConfigError("spec: window must be >= 1");
    if (horizon < 1) throw ConfigError("spec: horizon must be >= 1");
    if (features < 1) throw ConfigError("spec: features must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      throw ConfigError("spec: dropout_rate must be in [0, 1)");
    }
  }

  std::size_t stack_count() const {
    return architecture == Architecture::Vanilla ? 1 : 2;
  }

  // Width of the vector the dense head reads.
  std::size_t dense_input_width() const {
    switch (architecture) {
      case Architecture::Bidirectional:
      case Architecture::TwoPath: return 2 * units;
      default: return units;
    }
  }

  // The decoder emits one value per unrolled step; the other heads emit
  // the whole horizon at once.
  std::size_t dense_output_width() const {
    return architecture == Architecture::Seq2Seq ? 1 : horizon;
  }

  // Input width of a stack's first layer.
  std::size_t stack_input_width(std::size_t stack) const {
    if (architecture == Architecture::Seq2Seq && stack == 1) return 1;  // decoder feedback
    return features;
  }
};

// Gate order everywhere: input, forget, output, candidate.
enum Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

struct LstmCellParams {
  std::array<Matrix, 4> w;  // F_in x U
  std::array<Matrix, 4> r;  // U x U
  std::array<Matrix, 4> b;  // 1 x U
};

using LstmStack = std::vector<LstmCellParams>;

// All trainable weights. Stack layout per architecture:
//   vanilla        stacks = {main}
//   bidirectional  stacks = {forward-time, reversed-time}
//   two_path       stacks = {path A, path B}
//   seq2seq        stacks = {encoder, decoder}
struct ModelParams {
  std::vector<LstmStack> stacks;
  Matrix w_out;  // D x H_out
  Matrix b_out;  // 1 x H_out
};

// Canonical matrix traversal order; defines the serialization layout and
// the Adam state pairing.
template <typename Params, typename Fn>
void for_each_matrix(Params& p, Fn&& fn) {
  for (auto& stack : p.stacks) {
    for (auto& cell : stack) {
      for (auto& m : cell.w) fn(m);
      for (auto& m : cell.r) fn(m);
      for (auto& m : cell.b) fn(m);
    }
  }
  fn(p.w_out);
  fn(p.b_out);
}

inline std::vector<Matrix*> collect_matrices(ModelParams& p) {
  std::vector<Matrix*> out;
  for_each_matrix(p, [&](Matrix& m) { out.push_back(&m); });
  return out;
}

inline std::vector<const Matrix*> collect_matrices(const ModelParams& p) {
  std::vector<const Matrix*> out;
  for_each_matrix(p, [&](const Matrix& m) { out.push_back(&m); });
  return out;
}

inline std::size_t parameter_count(const ModelParams& p) {
  std::size_t n = 0;
  for_each_matrix(p, [&](const Matrix& m) { n += m.size(); });
  return n;
}

inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams out = p;
  for_each_matrix(out, [](Matrix& m) { std::fill(m.data().begin(), m.data().end(), 0.0); });
  return out;
}

using ParamGrads = ModelParams;

// Glorot-uniform weight init; biases zero except the forget gate at 1 so
// early training keeps cell memory open. Deterministic given the rng.
inline ModelParams init_params(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t u = spec.units;

  auto glorot = [&](std::size_t fan_in, std::size_t fan_out) {
    Matrix m(fan_in, fan_out);
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : m.data()) v = rng.uniform(-s, s);
    return m;
  };

  ModelParams params;
  params.stacks.resize(spec.stack_count());
  for (std::size_t s = 0; s < params.stacks.size(); ++s) {
    auto& stack = params.stacks[s];
    stack.resize(spec.layers);
    for (std::size_t l = 0; l < spec.layers; ++l) {
      const std::size_t f_in = l == 0 ? spec.stack_input_width(s) : u;
      for (std::size_t g = 0; g < 4; ++g) stack[l].w[g] = glorot(f_in, u);
      for (std::size_t g = 0; g < 4; ++g) stack[l].r[g] = glorot(u, u);
      for (std::size_t g = 0; g < 4; ++g) {
        stack[l].b[g] = Matrix(1, u, g == kForget ? 1.0 : 0.0);
      }
    }
  }
  params.w_out = glorot(spec.dense_input_width(), spec.dense_output_width());
  params.b_out = Matrix(1, spec.dense_output_width());
  return params;
}

// ---------------------------------------------------------------------------
// Cell step
// ---------------------------------------------------------------------------

// Post-activation intermediates of one step, enough to rerun the step
// bitwise and to backpropagate through it.
struct CellStepCache {
  Matrix i, f, o, g;  // gate activations, B x U
  Matrix c;           // new cell state
  Matrix tc;          // tanh(c)
};

// One LSTM step over a batch of rows:
//   i = sigmoid(xW_i + hR_i + b_i)   f = sigmoid(xW_f + hR_f + b_f)
//   o = sigmoid(xW_o + hR_o + b_o)   g = tanh(xW_g + hR_g + b_g)
//   c = f (.) c_prev + i (.) g       h = o (.) tanh(c)
inline void lstm_cell_step(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                           const LstmCellParams& p, Matrix& h_out, Matrix& c_out,
                           CellStepCache& cache) {
  if (x_t.rows() != h_prev.rows() || h_prev.rows() != c_prev.rows()) {
    throw ShapeError("lstm_cell_step: batch sizes differ");
  }
  std::array<Matrix, 4> z;
  for (std::size_t g = 0; g < 4; ++g) {
    z[g] = add_row_broadcast(add(matmul(x_t, p.w[g]), matmul(h_prev, p.r[g])), p.b[g]);
  }
  cache.i = sigmoid(z[kInput]);
  cache.f = sigmoid(z[kForget]);
  cache.o = sigmoid(z[kOutput]);
  cache.g = tanh_act(z[kCandidate]);
  cache.c = add(hadamard(cache.f, c_prev), hadamard(cache.i, cache.g));
  cache.tc = tanh_act(cache.c);
  h_out = hadamard(cache.o, cache.tc);
  c_out = cache.c;
}

// Convenience form matching the (h, c, cache) contract.
struct CellStepResult {
  Matrix h, c;
  CellStepCache cache;
};

inline CellStepResult lstm_cell_step(const Matrix& x_t, const Matrix& h_prev,
                                     const Matrix& c_prev, const LstmCellParams& p) {
  CellStepResult r;
  lstm_cell_step(x_t, h_prev, c_prev, p, r.h, r.c, r.cache);
  return r;
}

// Backward through one step. dh/dc are gradients w.r.t. this step's raw h
// and c outputs; returns gradients w.r.t. the step inputs and accumulates
// parameter gradients.
inline void lstm_cell_backward(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                               const LstmCellParams& p, const CellStepCache& cc, const Matrix& dh,
                               const Matrix& dc_in, LstmCellParams& grads, Matrix& dx,
                               Matrix& dh_prev, Matrix& dc_prev) {
  const Matrix do_ = hadamard(dh, cc.tc);
  const Matrix dz_o = hadamard(do_, sigmoid_deriv(cc.o));

  Matrix dc = add(dc_in, hadamard(hadamard(dh, cc.o), tanh_deriv(cc.tc)));

  const Matrix di = hadamard(dc, cc.g);
  const Matrix dz_i = hadamard(di, sigmoid_deriv(cc.i));
  const Matrix dg = hadamard(dc, cc.i);
  const Matrix dz_g = hadamard(dg, tanh_deriv(cc.g));
  const Matrix df = hadamard(dc, c_prev);
  const Matrix dz_f = hadamard(df, sigmoid_deriv(cc.f));

  dc_prev = hadamard(dc, cc.f);

  const std::array<const Matrix*, 4> dz{&dz_i, &dz_f, &dz_o, &dz_g};
  const Matrix xt_t = transpose(x_t);
  const Matrix hp_t = transpose(h_prev);
  dx = Matrix(x_t.rows(), x_t.cols());
  dh_prev = Matrix(h_prev.rows(), h_prev.cols());
  for (std::size_t g = 0; g < 4; ++g) {
    grads.w[g] = add(grads.w[g], matmul(xt_t, *dz[g]));
    grads.r[g] = add(grads.r[g], matmul(hp_t, *dz[g]));
    grads.b[g] = add(grads.b[g], col_sums(*dz[g]));
    dx = add(dx, matmul(*dz[g], transpose(p.w[g])));
    dh_prev = add(dh_prev, matmul(*dz[g], transpose(p.r[g])));
  }
}

// ---------------------------------------------------------------------------
// Stack forward/backward
// ---------------------------------------------------------------------------

enum class RunMode { Train, Eval };

// Everything one layer produced over the sequence. `x` holds the layer's
// inputs (the dropped outputs of the layer below), `mask` the inverted
// dropout masks (empty when inactive). Initial states default to zero;
// the seq2seq decoder seeds them from the encoder.
struct LayerCache {
  std::vector<Matrix> x;
  std::vector<CellStepCache> steps;
  std::vector<Matrix> h;  // raw hidden outputs
  std::vector<Matrix> mask;
  Matrix h_init, c_init;  // empty => zeros
};

struct StackCache {
  std::vector<LayerCache> layers;

  const Matrix& raw_top_final() const { return layers.back().h.back(); }
};

struct ForwardCache {
  std::vector<StackCache> stacks;
  Matrix dense_in;                    // N x D (unused by seq2seq)
  std::vector<Matrix> dec_dense_in;   // seq2seq: H entries of N x U
  std::vector<Matrix> dec_y;          // seq2seq: H entries of N x 1
  bool training = false;
  bool teacher_forced = false;
};

namespace detail {

inline Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

inline Matrix make_dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double inv_keep = 1.0 / (1.0 - rate);
  for (double& v : mask.data()) v = rng.bernoulli(rate) ? 0.0 : inv_keep;
  return mask;
}

// Applies a layer's stored mask to its raw output (identity when no mask).
inline Matrix apply_mask(const LayerCache& lc, std::size_t t) {
  if (lc.mask.empty() || lc.mask[t].empty()) return lc.h[t];
  return hadamard(lc.h[t], lc.mask[t]);
}

// Runs a whole stack layer-major over a time-major input sequence.
// Returns the cache; the stack's dropped top output at step t is
// apply_mask(cache.layers.back(), t).
inline StackCache run_stack(const LstmStack& stack, const std::vector<Matrix>& input_seq,
                            double dropout_rate, RunMode mode, Rng& rng) {
  const std::size_t steps = input_seq.size();
  const std::size_t batch = input_seq.front().rows();
  const bool dropping = mode == RunMode::Train && dropout_rate > 0.0;

  StackCache cache;
  cache.layers.resize(stack.size());
  std::vector<Matrix> seq = input_seq;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    LayerCache& lc = cache.layers[l];
    const std::size_t u = stack[l].r[0].rows();
    lc.x = std::move(seq);
    lc.steps.resize(steps);
    lc.h.resize(steps);
    Matrix h = zeros(batch, u);
    Matrix c = zeros(batch, u);
    for (std::size_t t = 0; t < steps; ++t) {
      Matrix h_next, c_next;
      lstm_cell_step(lc.x[t], h, c, stack[l], h_next, c_next, lc.steps[t]);
      lc.h[t] = h_next;
      h = std::move(h_next);
      c = std::move(c_next);
    }
    if (dropping) {
      lc.mask.resize(steps);
      for (std::size_t t = 0; t < steps; ++t) {
        lc.mask[t] = make_dropout_mask(batch, u, dropout_rate, rng);
      }
    }
    seq.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) seq[t] = apply_mask(lc, t);
  }
  return cache;
}

struct StackBackwardResult {
  std::vector<Matrix> d_input;              // gradient w.r.t. the stack's input sequence
  std::vector<Matrix> dh_init, dc_init;     // gradients w.r.t. initial states, per layer
};

// BPTT through a stack. d_top_out[t] is the gradient w.r.t. the top
// layer's *dropped* output at step t (empty matrix = zero). d_raw_final /
// dc_raw_final, when non-empty, add per-layer gradients w.r.t. the raw
// final hidden / cell states (the seq2seq decoder consumes those
// directly, bypassing dropout).
inline StackBackwardResult stack_backward(const LstmStack& stack, const StackCache& cache,
                                          std::vector<Matrix> d_top_out, LstmStack& grads,
                                          const std::vector<Matrix>* d_raw_final = nullptr,
                                          const std::vector<Matrix>* dc_raw_final = nullptr) {
  const std::size_t steps = cache.layers.front().x.size();
  const std::size_t batch = cache.layers.front().x.front().rows();

  StackBackwardResult result;
  result.dh_init.resize(stack.size());
  result.dc_init.resize(stack.size());

  std::vector<Matrix> d_out = std::move(d_top_out);  // w.r.t. dropped output of current layer
  for (std::size_t li = stack.size(); li-- > 0;) {
    const LayerCache& lc = cache.layers[li];
    const std::size_t u = stack[li].r[0].rows();
    const Matrix zero_state(batch, u);

    std::vector<Matrix> d_below(steps);
    Matrix dh_next = zeros(batch, u);
    Matrix dc_next = zeros(batch, u);
    for (std::size_t t = steps; t-- > 0;) {
      Matrix dh = dh_next;
      if (!d_out[t].empty()) {
        // External gradient arrives w.r.t. the dropped output.
        dh = add(dh, lc.mask.empty() || lc.mask[t].empty() ? d_out[t]
                                                           : hadamard(d_out[t], lc.mask[t]));
      }
      if (t == steps - 1) {
        if (d_raw_final && !(*d_raw_final)[li].empty()) dh = add(dh, (*d_raw_final)[li]);
        if (dc_raw_final && !(*dc_raw_final)[li].empty()) {
          dc_next = add(dc_next, (*dc_raw_final)[li]);
        }
      }
      const Matrix& h_prev =
          t == 0 ? (lc.h_init.empty() ? zero_state : lc.h_init) : lc.h[t - 1];
      const Matrix& c_prev =
          t == 0 ? (lc.c_init.empty() ? zero_state : lc.c_init) : lc.steps[t - 1].c;
      Matrix dx, dh_prev, dc_prev;
      lstm_cell_backward(lc.x[t], h_prev, c_prev, stack[li], lc.steps[t], dh, dc_next, grads[li],
                         dx, dh_prev, dc_prev);
      d_below[t] = std::move(dx);
      dh_next = std::move(dh_prev);
      dc_next = std::move(dc_prev);
    }
    result.dh_init[li] = dh_next;
    result.dc_init[li] = dc_next;
    d_out = std::move(d_below);
  }
  result.d_input = std::move(d_out);
  return result;
}

// Batch assembly: sample-major windows -> time-major step matrices.
inline std::vector<Matrix> time_major(const std::vector<Matrix>& inputs) {
  const std::size_t n = inputs.size();
  const std::size_t steps = inputs.front().rows();
  const std::size_t f = inputs.front().cols();
  std::vector<Matrix> seq(steps, Matrix(n, f));
  for (std::size_t s = 0; s < n; ++s) {
    if (inputs[s].rows() != steps || inputs[s].cols() != f) {
      throw ShapeError("forward: inconsistent window shapes in batch");
    }
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t j = 0; j < f; ++j) seq[t](s, j) = inputs[s](t, j);
  }
  return seq;
}

inline std::vector<Matrix> reversed(std::vector<Matrix> seq) {
  std::reverse(seq.begin(), seq.end());
  return seq;
}

inline Matrix dense(const Matrix& x, const ModelParams& p) {
  return add_row_broadcast(matmul(x, p.w_out), p.b_out);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model forward / backward
// ---------------------------------------------------------------------------

struct ForwardResult {
  Matrix predictions;  // N x H
  ForwardCache cache;
};

// Runs one batch through the chosen architecture. `inputs` holds N window
// matrices of shape W x F. In train mode, inverted dropout masks are drawn
// from `rng`; eval mode draws nothing. For seq2seq, `teacher_targets`
// (N matrices of H x 1) switches the decoder to teacher forcing.
inline ForwardResult forward(const ModelSpec& spec, const ModelParams& params,
                             const std::vector<Matrix>& inputs, RunMode mode, Rng& rng,
                             const std::vector<Matrix>* teacher_targets = nullptr) {
  spec.validate();
  if (inputs.empty()) throw ShapeError("forward: empty batch");
  if (inputs.front().rows() != spec.window || inputs.front().cols() != spec.features) {
    throw ShapeError("forward: window shape does not match spec");
  }
  const std::size_t n = inputs.size();
  const std::size_t horizon = spec.horizon;
  const auto seq = detail::time_major(inputs);

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.training = mode == RunMode::Train;

  switch (spec.architecture) {
    case Architecture::Vanilla: {
      cache.stacks.push_back(detail::run_stack(params.stacks[0], seq, spec.dropout_rate, mode, rng));
      const auto& top = cache.stacks[0].layers.back();
      cache.dense_in = detail::apply_mask(top, seq.size() - 1);
      result.predictions = detail::dense(cache.dense_in, params);
      break;
    }
    case Architecture::Bidirectional:
    case Architecture::TwoPath: {
      const auto second_seq = spec.architecture == Architecture::Bidirectional
                                  ? detail::reversed(seq)
                                  : seq;
      cache.stacks.push_back(detail::run_stack(params.stacks[0], seq, spec.dropout_rate, mode, rng));
      cache.stacks.push_back(
          detail::run_stack(params.stacks[1], second_seq, spec.dropout_rate, mode, rng));
      const Matrix a = detail::apply_mask(cache.stacks[0].layers.back(), seq.size() - 1);
      const Matrix b = detail::apply_mask(cache.stacks[1].layers.back(), seq.size() - 1);
      cache.dense_in = concat_cols(a, b);
      result.predictions = detail::dense(cache.dense_in, params);
      break;
    }
    case Architecture::Seq2Seq: {
      if (teacher_targets && mode == RunMode::Train) cache.teacher_forced = true;
      cache.stacks.push_back(detail::run_stack(params.stacks[0], seq, spec.dropout_rate, mode, rng));
      const StackCache& enc = cache.stacks[0];

      // First forecast reads the encoder's final state directly; the
      // decoder unrolls the remaining steps, feeding each output back in
      // (or the shifted targets under teacher forcing).
      cache.dec_dense_in.resize(horizon);
      cache.dec_y.resize(horizon);
      cache.dec_dense_in[0] = detail::apply_mask(enc.layers.back(), seq.size() - 1);
      cache.dec_y[0] = detail::dense(cache.dec_dense_in[0], params);

      const std::size_t layers = spec.layers;
      const std::size_t u = spec.units;
      const bool dropping = mode == RunMode::Train && spec.dropout_rate > 0.0;

      StackCache dec;
      dec.layers.resize(layers);
      std::vector<Matrix> h(layers), c(layers);
      for (std::size_t l = 0; l < layers; ++l) {
        dec.layers[l].h_init = enc.layers[l].h.back();
        dec.layers[l].c_init = enc.layers[l].steps.back().c;
        h[l] = dec.layers[l].h_init;
        c[l] = dec.layers[l].c_init;
      }
      for (std::size_t k = 1; k < horizon; ++k) {
        Matrix x;
        if (cache.teacher_forced) {
          x = Matrix(n, 1);
          for (std::size_t s = 0; s < n; ++s) x(s, 0) = (*teacher_targets)[s](k - 1, 0);
        } else {
          x = cache.dec_y[k - 1];
        }
        for (std::size_t l = 0; l < layers; ++l) {
          LayerCache& lc = dec.layers[l];
          lc.x.push_back(x);
          Matrix h_next, c_next;
          CellStepCache sc;
          lstm_cell_step(x, h[l], c[l], params.stacks[1][l], h_next, c_next, sc);
          lc.steps.push_back(std::move(sc));
          lc.h.push_back(h_next);
          h[l] = h_next;
          c[l] = c_next;
          if (dropping) {
            lc.mask.push_back(detail::make_dropout_mask(n, u, spec.dropout_rate, rng));
            x = hadamard(h_next, lc.mask.back());
          } else {
            x = h_next;
          }
        }
        cache.dec_dense_in[k] = x;
        cache.dec_y[k] = detail::dense(x, params);
      }
      cache.stacks.push_back(std::move(dec));

      result.predictions = Matrix(n, horizon);
      for (std::size_t k = 0; k < horizon; ++k) {
        for (std::size_t s = 0; s < n; ++s) result.predictions(s, k) = cache.dec_y[k](s, 0);
      }
      return result;
    }
  }
  return result;
}

// Exact gradients for every parameter, from a cache produced by forward()
// on the same params. loss_grad is d(loss)/d(predictions), N x H.
inline ParamGrads backward(const ModelSpec& spec, const ModelParams& params,
                           const ForwardCache& cache, const Matrix& loss_grad) {
  spec.validate();
  if (loss_grad.cols() != spec.horizon) throw ShapeError("backward: loss_grad width != horizon");
  ParamGrads grads = zeros_like(params);
  const std::size_t n = loss_grad.rows();
  const Matrix w_out_t = transpose(params.w_out);

  switch (spec.architecture) {
    case Architecture::Vanilla: {
      grads.w_out = matmul(transpose(cache.dense_in), loss_grad);
      grads.b_out = col_sums(loss_grad);
      const Matrix d_dense_in = matmul(loss_grad, w_out_t);
      const std::size_t steps = cache.stacks[0].layers.front().x.size();
      std::vector<Matrix> d_top(steps);
      d_top[steps - 1] = d_dense_in;
      detail::stack_backward(params.stacks[0], cache.stacks[0], std::move(d_top),
                             grads.stacks[0]);
      break;
    }
    case Architecture::Bidirectional:
    case Architecture::TwoPath: {
      grads.w_out = matmul(transpose(cache.dense_in), loss_grad);
      grads.b_out = col_sums(loss_grad);
      const Matrix d_dense_in = matmul(loss_grad, w_out_t);
      const std::size_t u = spec.units;
      Matrix d_a(n, u), d_b(n, u);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < u; ++j) {
          d_a(i, j) = d_dense_in(i, j);
          d_b(i, j) = d_dense_in(i, u + j);
        }
      }
      for (std::size_t s = 0; s < 2; ++s) {
        const std::size_t steps = cache.stacks[s].layers.front().x.size();
        std::vector<Matrix> d_top(steps);
        d_top[steps - 1] = s == 0 ? d_a : d_b;
        detail::stack_backward(params.stacks[s], cache.stacks[s], std::move(d_top),
                               grads.stacks[s]);
      }
      break;
    }
    case Architecture::Seq2Seq: {
      const std::size_t horizon = spec.horizon;
      const std::size_t layers = spec.layers;
      const std::size_t u = spec.units;
      const StackCache& enc = cache.stacks[0];
      const StackCache& dec = cache.stacks[1];
      const bool free_running = !cache.teacher_forced;

      // dy[k]: gradient w.r.t. decoder output y_k. Starts from the loss;
      // in free-running mode the feedback edge y_k -> x_{k+1} adds more.
      std::vector<Matrix> dy(horizon);
      for (std::size_t k = 0; k < horizon; ++k) dy[k] = loss_grad.col(k);

      std::vector<Matrix> dh_next(layers, Matrix(n, u));
      std::vector<Matrix> dc_next(layers, Matrix(n, u));

      // Decoder cache step j produced y_{j+1}; walk time backward,
      // handling the dense head, the vertical (dropout) path, and the
      // recurrent path in one pass per step.
      for (std::size_t j = horizon - 1; j-- > 0;) {
        const std::size_t k = j + 1;
        grads.w_out = add(grads.w_out, matmul(transpose(cache.dec_dense_in[k]), dy[k]));
        grads.b_out = add(grads.b_out, col_sums(dy[k]));
        Matrix d_from_above = matmul(dy[k], w_out_t);  // w.r.t. dropped top output at step j
        for (std::size_t l = layers; l-- > 0;) {
          const LayerCache& lc = dec.layers[l];
          Matrix dh = lc.mask.empty() || lc.mask[j].empty() ? d_from_above
                                                            : hadamard(d_from_above, lc.mask[j]);
          dh = add(dh, dh_next[l]);
          const Matrix& h_prev = j == 0 ? lc.h_init : lc.h[j - 1];
          const Matrix& c_prev = j == 0 ? lc.c_init : lc.steps[j - 1].c;
          Matrix dx, dh_prev, dc_prev;
          lstm_cell_backward(lc.x[j], h_prev, c_prev, params.stacks[1][l], lc.steps[j], dh,
                             dc_next[l], grads.stacks[1][l], dx, dh_prev, dc_prev);
          dh_next[l] = std::move(dh_prev);
          dc_next[l] = std::move(dc_prev);
          d_from_above = std::move(dx);
        }
        // d_from_above is now the gradient w.r.t. the decoder input at
        // step j, which in free-running mode was y_j.
        if (free_running) dy[j] = add(dy[j], d_from_above);
      }

      // y_0 came straight off the encoder top.
      grads.w_out = add(grads.w_out, matmul(transpose(cache.dec_dense_in[0]), dy[0]));
      grads.b_out = add(grads.b_out, col_sums(dy[0]));
      const std::size_t steps = enc.layers.front().x.size();
      std::vector<Matrix> d_top(steps);
      d_top[steps - 1] = matmul(dy[0], w_out_t);
      // Decoder initial states were the encoder's raw final states.
      detail::stack_backward(params.stacks[0], enc, std::move(d_top), grads.stacks[0], &dh_next,
                             &dc_next);
      break;
    }
  }
  return grads;
}

// Eval-mode convenience wrapper (no rng consumption).
inline Matrix predict(const ModelSpec& spec, const ModelParams& params,
                      const std::vector<Matrix>& inputs) {
  Rng rng(0);
  return forward(spec, params, inputs, RunMode::Eval, rng).predictions;
}

}  // namespace quantbench
