#include "ifa/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ifa {
namespace {

// Per-batch forward state. pre[k] holds layer k pre-activations, except for
// the output layer where it holds max-shifted logits (paired with lse).
template <typename T>
struct Workspace {
  int batch = 0;
  std::vector<std::vector<T>> acts;  // acts[0] = input, acts[k+1] = layer k output
  std::vector<std::vector<T>> pre;
  std::vector<T> lse;  // per-row log-sum-exp of shifted logits
};

template <typename T>
void run_forward(const ParamVec& params, const ModelSpec& spec,
                 const Matrix& inputs, std::span<const int> rows,
                 Workspace<T>& ws) {
  const auto& sizes = spec.layer_sizes;
  const int n_layers = spec.n_layers();
  const int batch = static_cast<int>(rows.size());
  ws.batch = batch;
  ws.acts.assign(static_cast<std::size_t>(n_layers) + 1, {});
  ws.pre.assign(static_cast<std::size_t>(n_layers), {});
  ws.lse.assign(static_cast<std::size_t>(batch), T(0));

  auto& input = ws.acts[0];
  input.resize(static_cast<std::size_t>(batch) * sizes[0]);
  for (int i = 0; i < batch; ++i) {
    const double* src = inputs.row(rows[static_cast<std::size_t>(i)]);
    T* dst = input.data() + static_cast<std::size_t>(i) * sizes[0];
    for (int j = 0; j < sizes[0]; ++j) dst[j] = static_cast<T>(src[j]);
  }

  for (int k = 0; k < n_layers; ++k) {
    const int in = sizes[static_cast<std::size_t>(k)];
    const int out = sizes[static_cast<std::size_t>(k) + 1];
    const double* weights = params.values.data() + params.layer_map[static_cast<std::size_t>(k)].offset;
    const double* bias = weights + static_cast<long long>(in) * out;

    auto& z = ws.pre[static_cast<std::size_t>(k)];
    z.assign(static_cast<std::size_t>(batch) * out, T(0));
    const auto& a = ws.acts[static_cast<std::size_t>(k)];
    for (int i = 0; i < batch; ++i) {
      const T* arow = a.data() + static_cast<std::size_t>(i) * in;
      T* zrow = z.data() + static_cast<std::size_t>(i) * out;
      for (int o = 0; o < out; ++o) {
        T acc = static_cast<T>(bias[o]);
        const double* wrow = weights + static_cast<long long>(o) * in;
        for (int j = 0; j < in; ++j) acc += static_cast<T>(wrow[j]) * arow[j];
        zrow[o] = acc;
      }
    }

    auto& next = ws.acts[static_cast<std::size_t>(k) + 1];
    next.assign(static_cast<std::size_t>(batch) * out, T(0));
    if (k + 1 < n_layers) {
      for (std::size_t idx = 0; idx < z.size(); ++idx)
        next[idx] = z[idx] > T(0) ? z[idx] : T(0);
    } else {
      // Softmax with max-shift; z is rewritten to shifted logits so the loss
      // can use log p = z_shifted - lse without re-exponentiating.
      for (int i = 0; i < batch; ++i) {
        T* zrow = z.data() + static_cast<std::size_t>(i) * out;
        T zmax = zrow[0];
        for (int o = 1; o < out; ++o) zmax = std::max(zmax, zrow[o]);
        T sum = T(0);
        for (int o = 0; o < out; ++o) {
          zrow[o] -= zmax;
          sum += std::exp(zrow[o]);
        }
        const T lse = std::log(sum);
        ws.lse[static_cast<std::size_t>(i)] = lse;
        T* prow = next.data() + static_cast<std::size_t>(i) * out;
        for (int o = 0; o < out; ++o) prow[o] = std::exp(zrow[o] - lse);
      }
    }
  }
}

template <typename T>
double mean_cross_entropy(const Workspace<T>& ws, const ModelSpec& spec,
                          std::span<const int> rows,
                          std::span<const int> labels) {
  const int n_classes = spec.n_classes();
  const auto& logits = ws.pre.back();
  double loss = 0.0;
  for (int i = 0; i < ws.batch; ++i) {
    const int y = labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    const T logp = logits[static_cast<std::size_t>(i) * n_classes + y] -
                   ws.lse[static_cast<std::size_t>(i)];
    loss -= static_cast<double>(logp);
  }
  return loss / ws.batch;
}

template <typename T>
double run_backward(const ParamVec& params, const ModelSpec& spec,
                    std::span<const int> rows, std::span<const int> labels,
                    const Workspace<T>& ws, std::vector<double>& grad) {
  const auto& sizes = spec.layer_sizes;
  const int n_layers = spec.n_layers();
  const int batch = ws.batch;
  const int n_classes = spec.n_classes();

  const double loss = mean_cross_entropy(ws, spec, rows, labels);

  // d loss / d logits for softmax + mean cross-entropy: (p - onehot) / batch.
  std::vector<T> delta(static_cast<std::size_t>(batch) * n_classes);
  const auto& probs = ws.acts.back();
  const T inv_batch = T(1) / static_cast<T>(batch);
  for (int i = 0; i < batch; ++i) {
    const int y = labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    const T* prow = probs.data() + static_cast<std::size_t>(i) * n_classes;
    T* drow = delta.data() + static_cast<std::size_t>(i) * n_classes;
    for (int o = 0; o < n_classes; ++o) {
      T d = prow[o];
      if (o == y) d -= T(1);
      drow[o] = d * inv_batch;
    }
  }

  for (int k = n_layers - 1; k >= 0; --k) {
    const int in = sizes[static_cast<std::size_t>(k)];
    const int out = sizes[static_cast<std::size_t>(k) + 1];
    const long long offset = params.layer_map[static_cast<std::size_t>(k)].offset;
    double* grad_w = grad.data() + offset;
    double* grad_b = grad_w + static_cast<long long>(in) * out;
    const auto& a = ws.acts[static_cast<std::size_t>(k)];

    for (int i = 0; i < batch; ++i) {
      const T* drow = delta.data() + static_cast<std::size_t>(i) * out;
      const T* arow = a.data() + static_cast<std::size_t>(i) * in;
      for (int o = 0; o < out; ++o) {
        const T d = drow[o];
        double* gwrow = grad_w + static_cast<long long>(o) * in;
        for (int j = 0; j < in; ++j)
          gwrow[j] += static_cast<double>(d * arow[j]);
        grad_b[o] += static_cast<double>(d);
      }
    }

    if (k > 0) {
      const double* weights = params.values.data() + offset;
      std::vector<T> prev(static_cast<std::size_t>(batch) * in, T(0));
      const auto& z_prev = ws.pre[static_cast<std::size_t>(k) - 1];
      for (int i = 0; i < batch; ++i) {
        const T* drow = delta.data() + static_cast<std::size_t>(i) * out;
        T* prow = prev.data() + static_cast<std::size_t>(i) * in;
        for (int o = 0; o < out; ++o) {
          const T d = drow[o];
          const double* wrow = weights + static_cast<long long>(o) * in;
          for (int j = 0; j < in; ++j) prow[j] += d * static_cast<T>(wrow[j]);
        }
        // ReLU' with the zero-input branch mapped to 0.
        const T* zrow = z_prev.data() + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j)
          if (!(zrow[j] > T(0))) prow[j] = T(0);
      }
      delta = std::move(prev);
    }
  }
  return loss;
}

void check_model_inputs(const ParamVec& params, const ModelSpec& spec,
                        const Matrix& inputs, std::span<const int> labels,
                        std::span<const int> rows) {
  if (inputs.cols != spec.input_dim())
    throw InputError("model: input dim " + std::to_string(inputs.cols) +
                     " does not match spec input dim " +
                     std::to_string(spec.input_dim()));
  if (params.size() != spec.param_count())
    throw InputError("model: parameter vector length " +
                     std::to_string(params.size()) + " != spec count " +
                     std::to_string(spec.param_count()));
  if (rows.empty()) throw InputError("model: empty batch");
  for (int r : rows) {
    if (r < 0 || r >= inputs.rows)
      throw InputError("model: sample index " + std::to_string(r) +
                       " out of range");
    if (labels[static_cast<std::size_t>(r)] < 0 ||
        labels[static_cast<std::size_t>(r)] >= spec.n_classes())
      throw InputError("model: label out of range for sample " +
                       std::to_string(r));
  }
}

std::vector<int> iota_rows(int n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

template <typename T>
LossGrad loss_and_grad_impl(const ParamVec& params, const ModelSpec& spec,
                            const Matrix& inputs, std::span<const int> labels,
                            std::span<const int> rows) {
  Workspace<T> ws;
  run_forward(params, spec, inputs, rows, ws);
  LossGrad out;
  out.grad.assign(params.values.size(), 0.0);
  out.loss = run_backward(params, spec, rows, labels, ws, out.grad);
  return out;
}

template <typename T>
EvalResult evaluate_impl(const ParamVec& params, const ModelSpec& spec,
                         const Dataset& data, std::span<const int> rows) {
  Workspace<T> ws;
  run_forward(params, spec, data.inputs, rows, ws);
  const int n_classes = spec.n_classes();
  const auto& probs = ws.acts.back();
  long long correct = 0;
  for (int i = 0; i < ws.batch; ++i) {
    const T* prow = probs.data() + static_cast<std::size_t>(i) * n_classes;
    int best = 0;
    for (int o = 1; o < n_classes; ++o)
      if (prow[o] > prow[best]) best = o;  // ties keep the lowest index
    if (best == data.labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])])
      ++correct;
  }
  EvalResult res;
  res.accuracy = static_cast<double>(correct) / ws.batch;
  res.mean_loss = mean_cross_entropy(ws, spec, rows, data.labels);
  return res;
}

}  // namespace

long long ModelSpec::param_count() const {
  long long count = 0;
  for (int k = 0; k < n_layers(); ++k) {
    const long long in = layer_sizes[static_cast<std::size_t>(k)];
    const long long out = layer_sizes[static_cast<std::size_t>(k) + 1];
    count += in * out + out;
  }
  return count;
}

void ModelSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw ConfigError("model.layer_sizes: need at least input and output dims");
  for (int s : layer_sizes)
    if (s < 1)
      throw ConfigError("model.layer_sizes: all entries must be >= 1, got " +
                        std::to_string(s));
  if (activation != "relu")
    throw ConfigError("model.activation: only \"relu\" is supported, got \"" +
                      activation + "\"");
}

bool ParamVec::same_shape(const ParamVec& other) const {
  return values.size() == other.values.size() && layer_map == other.layer_map;
}

void ParamVec::check_finite(const char* context) const {
  for (double v : values)
    if (!std::isfinite(v))
      throw IntegrityError(std::string(context) +
                           ": parameter vector contains NaN/Inf");
}

ParamVec init_params(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  ParamVec params;
  params.values.assign(static_cast<std::size_t>(spec.param_count()), 0.0);
  long long offset = 0;
  for (int k = 0; k < spec.n_layers(); ++k) {
    const int in = spec.layer_sizes[static_cast<std::size_t>(k)];
    const int out = spec.layer_sizes[static_cast<std::size_t>(k) + 1];
    const long long length = static_cast<long long>(in) * out + out;
    params.layer_map.push_back({k, offset, length});
    const double bound = std::sqrt(6.0 / in);
    for (long long w = 0; w < static_cast<long long>(in) * out; ++w)
      params.values[static_cast<std::size_t>(offset + w)] = rng.uniform(-bound, bound);
    // biases stay zero
    offset += length;
  }
  return params;
}

Matrix forward(const ParamVec& params, const ModelSpec& spec, const Matrix& inputs) {
  if (inputs.rows < 1) throw InputError("forward: empty input");
  std::vector<int> rows = iota_rows(inputs.rows);
  std::vector<int> dummy_labels(static_cast<std::size_t>(inputs.rows), 0);
  check_model_inputs(params, spec, inputs, dummy_labels, rows);

  Matrix out(inputs.rows, spec.n_classes());
  auto fill = [&](const auto& ws) {
    for (int i = 0; i < inputs.rows; ++i)
      for (int o = 0; o < spec.n_classes(); ++o)
        out.at(i, o) = static_cast<double>(
            ws.acts.back()[static_cast<std::size_t>(i) * spec.n_classes() + o]);
  };
  if (spec.precision == Precision::Single) {
    Workspace<float> ws;
    run_forward(params, spec, inputs, rows, ws);
    fill(ws);
  } else {
    Workspace<double> ws;
    run_forward(params, spec, inputs, rows, ws);
    fill(ws);
  }
  return out;
}

LossGrad loss_and_grad(const ParamVec& params, const ModelSpec& spec,
                       const Matrix& inputs, std::span<const int> labels,
                       std::span<const int> batch_rows) {
  check_model_inputs(params, spec, inputs, labels, batch_rows);
  if (spec.precision == Precision::Single)
    return loss_and_grad_impl<float>(params, spec, inputs, labels, batch_rows);
  return loss_and_grad_impl<double>(params, spec, inputs, labels, batch_rows);
}

LossGrad loss_and_grad(const ParamVec& params, const ModelSpec& spec,
                       const Batch& batch) {
  std::vector<int> rows = iota_rows(batch.inputs.rows);
  return loss_and_grad(params, spec, batch.inputs, batch.labels, rows);
}

ParamVec sgd_epoch(ParamVec params, const ModelSpec& spec, const Dataset& data,
                   std::span<const int> sample_indices, double lr, int batch_size,
                   Rng& rng, const Proximal& prox) {
  if (lr < 0.0) throw ConfigError("sgd_epoch: learning rate must be >= 0");
  if (batch_size < 1) throw ConfigError("sgd_epoch: batch_size must be >= 1");
  if (sample_indices.empty()) throw InputError("sgd_epoch: empty sample set");
  if (prox.mu < 0.0) throw ConfigError("sgd_epoch: proximal mu must be >= 0");
  if (prox.mu > 0.0 && (prox.anchor == nullptr || !prox.anchor->same_shape(params)))
    throw InputError("sgd_epoch: proximal anchor missing or shape mismatch");

  std::vector<int> order(sample_indices.begin(), sample_indices.end());
  rng.shuffle(order);
  const std::size_t n = order.size();
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const std::size_t len = std::min(static_cast<std::size_t>(batch_size), n - start);
    std::span<const int> rows(order.data() + start, len);
    LossGrad lg = loss_and_grad(params, spec, data.inputs, data.labels, rows);
    if (prox.mu > 0.0) {
      const auto& anchor = prox.anchor->values;
      for (std::size_t i = 0; i < lg.grad.size(); ++i)
        lg.grad[i] += prox.mu * (params.values[i] - anchor[i]);
    }
    for (std::size_t i = 0; i < lg.grad.size(); ++i)
      params.values[i] -= lr * lg.grad[i];
  }
  return params;
}

EvalResult evaluate(const ParamVec& params, const ModelSpec& spec, const Dataset& data) {
  std::vector<int> rows = iota_rows(data.size());
  return evaluate(params, spec, data, rows);
}

EvalResult evaluate(const ParamVec& params, const ModelSpec& spec, const Dataset& data,
                    std::span<const int> sample_indices) {
  if (sample_indices.empty()) throw InputError("evaluate: empty test set");
  check_model_inputs(params, spec, data.inputs, data.labels, sample_indices);
  if (spec.precision == Precision::Single)
    return evaluate_impl<float>(params, spec, data, sample_indices);
  return evaluate_impl<double>(params, spec, data, sample_indices);
}

}  // namespace ifa
