#pragma once

// Minimal multi-layer perceptron over a flat parameter vector.
//
// The network is fully connected with ReLU hidden units and a softmax
// output; loss is mean cross-entropy. All functions are pure: they take the
// parameter vector (plus an explicit Rng where randomness is involved) and
// never touch shared state, so they are safe to call concurrently on
// disjoint ParamVec instances.

#include <span>
#include <string>
#include <vector>

#include "ifa/dataset.hpp"
#include "ifa/rng.hpp"

namespace ifa {

// Compute precision for forward/backward kernels. Parameters are always
// stored as doubles; Single runs the math in float32.
enum class Precision { Double, Single };

struct ModelSpec {
  std::vector<int> layer_sizes;  // {input, hidden..., n_classes}
  std::string activation = "relu";
  Precision precision = Precision::Double;

  int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int n_classes() const { return layer_sizes.back(); }
  long long param_count() const;

  // Throws ConfigError unless: >= 2 layer sizes, all >= 1, activation "relu".
  void validate() const;
};

// Contiguous slice of the flat parameter vector owned by one layer
// (weights followed by the bias of that layer).
struct LayerRange {
  int layer = 0;
  long long offset = 0;
  long long length = 0;

  bool operator==(const LayerRange&) const = default;
};

// Flat parameter vector theta plus its layer offset table.
struct ParamVec {
  std::vector<double> values;
  std::vector<LayerRange> layer_map;

  long long size() const { return static_cast<long long>(values.size()); }
  bool same_shape(const ParamVec& other) const;

  // Throws IntegrityError if any value is NaN/Inf.
  void check_finite(const char* context) const;
};

struct Batch {
  Matrix inputs;
  std::vector<int> labels;
};

// Weights uniform on [-sqrt(6/fan_in), +sqrt(6/fan_in)], biases zero.
// Draw order is fixed (layer by layer, weights row-major), so the same rng
// state always yields the same vector.
ParamVec init_params(const ModelSpec& spec, Rng& rng);

// Class-probability matrix, one softmax row per input row.
Matrix forward(const ParamVec& params, const ModelSpec& spec, const Matrix& inputs);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same length/layout as params.values
};

// Mean cross-entropy and gradient over the dataset rows named by batch_rows.
LossGrad loss_and_grad(const ParamVec& params, const ModelSpec& spec,
                       const Matrix& inputs, std::span<const int> labels,
                       std::span<const int> batch_rows);
LossGrad loss_and_grad(const ParamVec& params, const ModelSpec& spec,
                       const Batch& batch);

// Proximal pull toward an anchor vector, added per batch as mu*(theta-anchor).
struct Proximal {
  double mu = 0.0;
  const ParamVec* anchor = nullptr;
};

// One epoch of mini-batch SGD over the given sample indices: indices are
// shuffled by rng, split into batches (last one may be short), and params
// take theta <- theta - lr * grad per batch. lr = 0 is a valid no-op step;
// negative lr is rejected.
ParamVec sgd_epoch(ParamVec params, const ModelSpec& spec, const Dataset& data,
                   std::span<const int> sample_indices, double lr, int batch_size,
                   Rng& rng, const Proximal& prox = {});

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

// Argmax accuracy (ties broken toward the lowest class index) and mean
// cross-entropy. Consumes no randomness.
EvalResult evaluate(const ParamVec& params, const ModelSpec& spec, const Dataset& data);
EvalResult evaluate(const ParamVec& params, const ModelSpec& spec, const Dataset& data,
                    std::span<const int> sample_indices);

}  // namespace ifa
