#include "ifa/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ifa {

void PartitionSpec::validate(const Dataset& data) const {
  if (n_clients < 1)
    throw ConfigError("partition: n_clients must be >= 1, got " +
                      std::to_string(n_clients));
  if (!(alpha > 0.0))
    throw ConfigError("partition: alpha must be > 0, got " +
                      std::to_string(alpha));
  if (min_samples_per_client < 1)
    throw ConfigError("partition: min_samples_per_client must be >= 1");
  if (static_cast<long long>(min_samples_per_client) * n_clients > data.size())
    throw ConfigError(
        "partition: min_samples_per_client * n_clients exceeds dataset size (" +
        std::to_string(min_samples_per_client) + " * " +
        std::to_string(n_clients) + " > " + std::to_string(data.size()) + ")");
  if (max_retries < 1)
    throw ConfigError("partition: max_retries must be >= 1");
}

Dataset make_synthetic(int n_classes, int n_per_class, int input_dim,
                       double class_separation, Rng& rng) {
  if (n_classes < 1) throw InputError("make_synthetic: n_classes must be >= 1");
  if (n_per_class < 1) throw InputError("make_synthetic: n_per_class must be >= 1");
  if (input_dim < 2) throw InputError("make_synthetic: input_dim must be >= 2");
  if (class_separation < 0.0)
    throw InputError("make_synthetic: class_separation must be >= 0");

  // Class means: random directions scaled to the separation radius.
  std::vector<std::vector<double>> means(static_cast<std::size_t>(n_classes));
  for (auto& mean : means) {
    mean.resize(static_cast<std::size_t>(input_dim));
    double norm_sq = 0.0;
    for (double& v : mean) {
      v = rng.normal();
      norm_sq += v * v;
    }
    double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      mean.assign(static_cast<std::size_t>(input_dim), 0.0);
      mean[0] = 1.0;
      norm = 1.0;
    }
    for (double& v : mean) v *= class_separation / norm;
  }

  const int n_samples = n_classes * n_per_class;
  Dataset data;
  data.inputs = Matrix(n_samples, input_dim);
  data.labels.resize(static_cast<std::size_t>(n_samples));
  data.n_classes = n_classes;
  int row = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (int s = 0; s < n_per_class; ++s, ++row) {
      double* x = data.inputs.row(row);
      for (int j = 0; j < input_dim; ++j)
        x[j] = means[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] + rng.normal();
      data.labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return data;
}

namespace {

// Cumulative inverse-CDF draw over client proportions.
int pick_client(const std::vector<double>& proportions, double u) {
  double cum = 0.0;
  const int n = static_cast<int>(proportions.size());
  for (int i = 0; i < n; ++i) {
    cum += proportions[static_cast<std::size_t>(i)];
    if (u < cum) return i;
  }
  return n - 1;  // numeric tail
}

}  // namespace

std::vector<ClientShard> dirichlet_partition(const Dataset& data,
                                             const PartitionSpec& spec) {
  data.validate();
  spec.validate(data);

  const int n = spec.n_clients;
  Rng rng(derive_seed(spec.seed, Stream::Partition));

  // Sample indices grouped by class, in dataset order.
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.n_classes));
  for (int i = 0; i < data.size(); ++i)
    by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])].push_back(i);

  long long worst_size = -1;
  int worst_client = -1;
  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    std::vector<std::vector<int>> assigned(static_cast<std::size_t>(n));
    bool draw_ok = true;
    for (int c = 0; c < data.n_classes && draw_ok; ++c) {
      std::vector<double> proportions(static_cast<std::size_t>(n));
      double total = 0.0;
      for (double& p : proportions) {
        p = rng.gamma(spec.alpha);
        total += p;
      }
      if (!(total > 0.0) || !std::isfinite(total)) {
        draw_ok = false;  // degenerate gamma draw, redo the whole partition
        break;
      }
      for (double& p : proportions) p /= total;
      for (int idx : by_class[static_cast<std::size_t>(c)]) {
        const int client = pick_client(proportions, rng.uniform());
        assigned[static_cast<std::size_t>(client)].push_back(idx);
      }
    }
    if (!draw_ok) continue;

    long long smallest = data.size() + 1;
    int smallest_client = 0;
    for (int i = 0; i < n; ++i) {
      const long long sz = static_cast<long long>(assigned[static_cast<std::size_t>(i)].size());
      if (sz < smallest) {
        smallest = sz;
        smallest_client = i;
      }
    }
    if (smallest < spec.min_samples_per_client) {
      if (smallest > worst_size) {
        worst_size = smallest;
        worst_client = smallest_client;
      }
      continue;
    }

    std::vector<ClientShard> shards(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      ClientShard& shard = shards[static_cast<std::size_t>(i)];
      shard.client_id = i;
      shard.sample_indices = std::move(assigned[static_cast<std::size_t>(i)]);
      std::sort(shard.sample_indices.begin(), shard.sample_indices.end());
      shard.label_histogram.assign(static_cast<std::size_t>(data.n_classes), 0);
      for (int idx : shard.sample_indices)
        ++shard.label_histogram[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(idx)])];
    }
    return shards;
  }

  throw PartitionError(
      "dirichlet_partition: no draw satisfied min_samples_per_client=" +
      std::to_string(spec.min_samples_per_client) + " within " +
      std::to_string(spec.max_retries) + " retries (alpha=" +
      std::to_string(spec.alpha) + ", n_clients=" + std::to_string(n) +
      ", worst offender: client " + std::to_string(worst_client) + " with " +
      std::to_string(worst_size) + " samples)");
}

void validate_partition(const std::vector<ClientShard>& shards, const Dataset& data) {
  std::vector<int> all;
  for (const auto& shard : shards) {
    if (static_cast<int>(shard.label_histogram.size()) != data.n_classes)
      throw IntegrityError("partition: histogram size mismatch for client " +
                           std::to_string(shard.client_id));
    std::vector<long long> recomputed(static_cast<std::size_t>(data.n_classes), 0);
    for (int idx : shard.sample_indices) {
      if (idx < 0 || idx >= data.size())
        throw IntegrityError("partition: index out of range in client " +
                             std::to_string(shard.client_id));
      ++recomputed[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(idx)])];
      all.push_back(idx);
    }
    if (recomputed != shard.label_histogram)
      throw IntegrityError("partition: stale histogram for client " +
                           std::to_string(shard.client_id));
  }
  std::sort(all.begin(), all.end());
  if (static_cast<int>(all.size()) != data.size())
    throw IntegrityError("partition: shards cover " + std::to_string(all.size()) +
                         " of " + std::to_string(data.size()) + " samples");
  for (int i = 0; i < data.size(); ++i)
    if (all[static_cast<std::size_t>(i)] != i)
      throw IntegrityError("partition: shards are not a disjoint cover of the dataset");
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw InputError("tv_distance: distributions differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

PartitionReport partition_stats(const std::vector<ClientShard>& shards,
                                const Dataset& data) {
  validate_partition(shards, data);

  PartitionReport report;
  report.total_samples = data.size();
  report.global_distribution.assign(static_cast<std::size_t>(data.n_classes), 0.0);
  for (int label : data.labels)
    report.global_distribution[static_cast<std::size_t>(label)] += 1.0;
  for (double& g : report.global_distribution) g /= data.size();

  report.min_size = data.size();
  report.max_size = 0;
  for (const auto& shard : shards) {
    ClientStats stats;
    stats.client_id = shard.client_id;
    stats.size = shard.size();
    stats.label_counts = shard.label_histogram;
    std::vector<double> dist(static_cast<std::size_t>(data.n_classes), 0.0);
    if (shard.size() > 0)
      for (int c = 0; c < data.n_classes; ++c)
        dist[static_cast<std::size_t>(c)] =
            static_cast<double>(shard.label_histogram[static_cast<std::size_t>(c)]) /
            static_cast<double>(shard.size());
    stats.tv_distance = tv_distance(dist, report.global_distribution);
    report.min_size = std::min(report.min_size, stats.size);
    report.max_size = std::max(report.max_size, stats.size);
    report.clients.push_back(std::move(stats));
  }
  report.mean_size = static_cast<double>(report.total_samples) /
                     static_cast<double>(shards.size());
  return report;
}

}  // namespace ifa
