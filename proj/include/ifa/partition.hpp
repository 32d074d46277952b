#pragma once

// Synthetic data generation and Dirichlet label-skew partitioning.
//
// The partition follows the per-class construction: for each class a
// proportion vector over clients is drawn from Dirichlet(alpha * 1_N), and
// that class's samples are assigned multinomially. Small alpha concentrates
// classes on few clients (non-IID); large alpha approaches a uniform split.

#include <cstdint>
#include <vector>

#include "ifa/dataset.hpp"
#include "ifa/rng.hpp"

namespace ifa {

// One client's slice of the global dataset.
struct ClientShard {
  int client_id = 0;
  std::vector<int> sample_indices;        // sorted, unique
  std::vector<long long> label_histogram;  // counts per class
  long long size() const { return static_cast<long long>(sample_indices.size()); }
};

struct PartitionSpec {
  int n_clients = 1;
  double alpha = 0.1;
  int min_samples_per_client = 1;
  std::uint64_t seed = 0;
  int max_retries = 100;

  void validate(const Dataset& data) const;
};

// Gaussian blobs: one mean per class on a sphere of radius class_separation,
// unit covariance, n_per_class samples each, stored class-major.
Dataset make_synthetic(int n_classes, int n_per_class, int input_dim,
                       double class_separation, Rng& rng);

// Partitions the dataset across spec.n_clients. A draw that leaves any
// client below min_samples_per_client is discarded and redrawn whole, up to
// spec.max_retries times; reassigning samples instead would bias the
// Dirichlet marginals. Throws PartitionError when the budget is exhausted.
std::vector<ClientShard> dirichlet_partition(const Dataset& data,
                                             const PartitionSpec& spec);

struct ClientStats {
  int client_id = 0;
  long long size = 0;
  double tv_distance = 0.0;  // vs the global label distribution
  std::vector<long long> label_counts;
};

struct PartitionReport {
  std::vector<ClientStats> clients;
  std::vector<double> global_distribution;
  long long total_samples = 0;
  long long min_size = 0;
  long long max_size = 0;
  double mean_size = 0.0;
};

// Throws IntegrityError unless shards are pairwise disjoint, cover the
// dataset exactly, and carry consistent histograms.
void validate_partition(const std::vector<ClientShard>& shards, const Dataset& data);

PartitionReport partition_stats(const std::vector<ClientShard>& shards,
                                const Dataset& data);

// Half L1 distance between two discrete label distributions.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace ifa
