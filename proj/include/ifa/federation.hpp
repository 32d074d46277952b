#pragma once

// One federated communication round: participant sampling, local training,
// weighted aggregation.
//
// Determinism contract: client updates within a round are mutually
// independent and may run on any schedule. Each client's randomness comes
// from a stream derived from (run seed, global round, client id), and
// aggregation folds updates in ascending client id, so serial and parallel
// execution produce identical bits.

#include <cstdint>
#include <utility>
#include <vector>

#include "ifa/model.hpp"
#include "ifa/partition.hpp"

namespace ifa {

// Per-client training configuration plus data assignment.
struct ClientState {
  int client_id = 0;
  ClientShard shard;
  int local_epochs = 1;
  double lr = 0.01;
  int batch_size = 32;
};

struct RoundPlan {
  std::vector<int> participants;  // distinct ids, ascending
  int round = 0;
  int generation = 0;
};

struct AggregationRule {
  enum class Kind { FedAvg, FedProxLocal };
  Kind kind = Kind::FedAvg;
  double mu = 0.0;  // proximal coefficient, used by FedProxLocal only
};

// ceil(rate * n_clients) distinct ids drawn uniformly without replacement.
RoundPlan sample_clients(int n_clients, double participation_rate, Rng& rng);

struct LocalUpdateResult {
  ParamVec params;
  double loss;  // mean loss over the client's shard after training
};

// Copy of the global model trained local_epochs over the client's shard.
// Under FedProxLocal each batch gradient gains mu * (theta - theta_global).
LocalUpdateResult local_update(const ParamVec& global, const ClientState& client,
                               const Dataset& data, const ModelSpec& spec,
                               const AggregationRule& rule, Rng& rng);

struct ClientUpdate {
  int client_id = 0;
  ParamVec params;
  long long n_samples = 0;
};

// Weighted mean with weights n_i / sum_j n_j. Updates are sorted by client
// id and folded left in that order; equal inputs pass through bitwise.
ParamVec aggregate(std::vector<ClientUpdate> updates);

struct RoundContext {
  std::uint64_t run_seed = 0;
  int generation = 0;
  int round = 0;  // within the generation
  long long global_round = 0;
  int threads = 1;  // <= 1 means serial
};

struct RoundResult {
  ParamVec params;
  // (client_id, post-training local loss) for participants, ascending id.
  std::vector<std::pair<int, double>> local_losses;
};

RoundResult run_round(const ParamVec& global, const RoundPlan& plan,
                      const std::vector<ClientState>& clients, const Dataset& data,
                      const ModelSpec& spec, const AggregationRule& rule,
                      const RoundContext& ctx);

}  // namespace ifa
