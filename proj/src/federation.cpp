#include "ifa/federation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace ifa {

RoundPlan sample_clients(int n_clients, double participation_rate, Rng& rng) {
  if (n_clients < 1)
    throw ConfigError("sample_clients: n_clients must be >= 1");
  if (!(participation_rate > 0.0) || participation_rate > 1.0)
    throw ConfigError("sample_clients: participation_rate must be in (0, 1], got " +
                      std::to_string(participation_rate));
  const int count = static_cast<int>(std::ceil(participation_rate * n_clients));
  RoundPlan plan;
  plan.participants = rng.sample_without_replacement(n_clients, count);
  std::sort(plan.participants.begin(), plan.participants.end());
  return plan;
}

LocalUpdateResult local_update(const ParamVec& global, const ClientState& client,
                               const Dataset& data, const ModelSpec& spec,
                               const AggregationRule& rule, Rng& rng) {
  if (client.shard.sample_indices.empty())
    throw InputError("local_update: client " + std::to_string(client.client_id) +
                     " has an empty shard");
  if (client.local_epochs < 1)
    throw ConfigError("local_update: local_epochs must be >= 1");

  Proximal prox;
  if (rule.kind == AggregationRule::Kind::FedProxLocal) {
    prox.mu = rule.mu;
    prox.anchor = &global;
  }

  ParamVec params = global;
  for (int epoch = 0; epoch < client.local_epochs; ++epoch)
    params = sgd_epoch(std::move(params), spec, data, client.shard.sample_indices,
                       client.lr, client.batch_size, rng, prox);

  const double loss =
      evaluate(params, spec, data, client.shard.sample_indices).mean_loss;
  return {std::move(params), loss};
}

ParamVec aggregate(std::vector<ClientUpdate> updates) {
  if (updates.empty()) throw AggregationError("aggregate: no updates");
  std::sort(updates.begin(), updates.end(),
            [](const ClientUpdate& a, const ClientUpdate& b) {
              return a.client_id < b.client_id;
            });

  long long total = 0;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const ClientUpdate& u = updates[i];
    if (u.n_samples <= 0)
      throw AggregationError("aggregate: non-positive sample count for client " +
                             std::to_string(u.client_id));
    if (!u.params.same_shape(updates[0].params))
      throw AggregationError("aggregate: shape mismatch for client " +
                             std::to_string(u.client_id));
    if (i > 0 && u.client_id == updates[i - 1].client_id)
      throw AggregationError("aggregate: duplicate client id " +
                             std::to_string(u.client_id));
    total += u.n_samples;
  }

  // Accumulate deltas against the first update; identical inputs then pass
  // through bitwise, and the result still equals sum_i w_i * theta_i up to
  // the (1 - sum w_i) * theta_0 rounding residue.
  ParamVec result = updates[0].params;
  for (std::size_t i = 1; i < updates.size(); ++i) {
    const double w = static_cast<double>(updates[i].n_samples) /
                     static_cast<double>(total);
    const auto& values = updates[i].params.values;
    for (std::size_t j = 0; j < result.values.size(); ++j)
      result.values[j] += w * (values[j] - updates[0].params.values[j]);
  }
  result.check_finite("aggregate");
  return result;
}

RoundResult run_round(const ParamVec& global, const RoundPlan& plan,
                      const std::vector<ClientState>& clients, const Dataset& data,
                      const ModelSpec& spec, const AggregationRule& rule,
                      const RoundContext& ctx) {
  if (plan.participants.empty())
    throw InputError("run_round: round plan has no participants");
  for (int id : plan.participants)
    if (id < 0 || id >= static_cast<int>(clients.size()))
      throw InputError("run_round: participant " + std::to_string(id) +
                       " does not exist");

  const int n = static_cast<int>(plan.participants.size());
  std::vector<LocalUpdateResult> results(static_cast<std::size_t>(n));

  auto train_one = [&](int slot) {
    const int id = plan.participants[static_cast<std::size_t>(slot)];
    const ClientState& client = clients[static_cast<std::size_t>(id)];
    Rng rng(derive_seed(ctx.run_seed, Stream::ClientTraining,
                        static_cast<std::uint64_t>(ctx.global_round),
                        static_cast<std::uint64_t>(id)));
    results[static_cast<std::size_t>(slot)] =
        local_update(global, client, data, spec, rule, rng);
  };

  const int workers = std::min(ctx.threads, n);
  if (workers <= 1) {
    for (int slot = 0; slot < n; ++slot) train_one(slot);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int slot = w; slot < n; slot += workers) train_one(slot);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  std::vector<ClientUpdate> updates;
  RoundResult round_result;
  updates.reserve(static_cast<std::size_t>(n));
  for (int slot = 0; slot < n; ++slot) {
    const int id = plan.participants[static_cast<std::size_t>(slot)];
    auto& res = results[static_cast<std::size_t>(slot)];
    round_result.local_losses.emplace_back(id, res.loss);
    updates.push_back({id, std::move(res.params),
                       clients[static_cast<std::size_t>(id)].shard.size()});
  }
  round_result.params = aggregate(std::move(updates));
  return round_result;
}

}  // namespace ifa
