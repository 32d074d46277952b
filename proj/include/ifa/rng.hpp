#pragma once

// Deterministic random streams.
//
// Every stochastic component draws from an Rng: a mt19937_64 engine (whose
// output sequence is fully specified by the standard, hence bit-portable)
// with hand-rolled distributions on top. The <random> distribution classes
// are implementation-defined and would make metrics files differ across
// standard libraries, so they are not used.
//
// A run owns one master seed; every component derives its own substream via
// derive_seed(master, stream, ...), so any part of a run can be replayed in
// isolation.

#include <cstdint>
#include <random>
#include <vector>

namespace ifa {

// Substream labels. The numeric values are part of the reproducibility
// contract: changing them changes every seeded run.
enum class Stream : std::uint64_t {
  Init = 1,            // model initialization
  Data = 2,            // synthetic dataset generation
  Partition = 3,       // Dirichlet client assignment
  RoundSampling = 4,   // per-round participant selection
  ClientTraining = 5,  // per-(round, client) local SGD
  GenerationMask = 6,  // per-generation reset selection / fresh init
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Substream seed from a master seed and up to two path components,
// e.g. derive_seed(seed, Stream::ClientTraining, global_round, client_id).
std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound), unbiased via rejection. bound > 0.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal (Box-Muller, cosine branch only).
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

  // First k entries of a uniform random permutation of [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ifa
