#pragma once

#include <vector>

#include "ifa/errors.hpp"

namespace ifa {

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c)
      : rows(r),
        cols(c),
        data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double* row(int r) {
    return data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
  }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
  }
  double& at(int r, int c) { return row(r)[c]; }
  double at(int r, int c) const { return row(r)[c]; }
};

// Labeled classification dataset.
struct Dataset {
  Matrix inputs;            // n_samples x input_dim
  std::vector<int> labels;  // class ids in [0, n_classes)
  int n_classes = 0;

  int size() const { return inputs.rows; }
  int input_dim() const { return inputs.cols; }

  // Throws InputError on shape/label violations.
  void validate() const;
};

}  // namespace ifa
