#include "ifa/dataset.hpp"

#include <string>

namespace ifa {

void Dataset::validate() const {
  if (inputs.rows < 1) throw InputError("dataset: needs at least one sample");
  if (n_classes < 1) throw InputError("dataset: n_classes must be >= 1");
  if (static_cast<int>(labels.size()) != inputs.rows)
    throw InputError("dataset: labels count " + std::to_string(labels.size()) +
                     " != sample count " + std::to_string(inputs.rows));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes)
      throw InputError("dataset: label " + std::to_string(labels[i]) +
                       " at sample " + std::to_string(i) + " outside [0, " +
                       std::to_string(n_classes) + ")");
  }
}

}  // namespace ifa
