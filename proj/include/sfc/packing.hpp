#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sfc/model.hpp"

namespace sfc {

// One node-local packing of VNF instances: the node is an |R|-dimensional
// knapsack, instances are items with throughput profit and resource weight.
struct packing_result {
  std::vector<int> counts;        // per candidate type
  mbps_t achieved = 0;            // sum counts * q
  std::vector<qty_t> consumed;    // per resource
  money_t host_cost = 0;
};

enum class packing_objective { host_cost, core_count };

struct packing_options {
  packing_objective objective = packing_objective::host_cost;
  int core_resource = 0;  // resource index when objective is core_count
};

namespace packing_detail {

struct search_ctx {
  const std::vector<qty_t>* residual;
  const std::vector<vnf_type>* types;
  std::vector<money_t> type_cost;
  int n_res;
  // per (type position, resource): best throughput-per-unit among types from
  // this position on, used for the fractional upper bound
  std::vector<std::vector<double>> ratio_suffix;
  std::vector<std::vector<bool>> all_consume_suffix;
};

inline search_ctx make_search_ctx(const std::vector<qty_t>& residual,
                                  const std::vector<vnf_type>& types,
                                  const substrate_network& net, const cost_model& cost,
                                  const packing_options& opt) {
  search_ctx sc;
  sc.residual = &residual;
  sc.types = &types;
  sc.n_res = static_cast<int>(residual.size());
  for (auto& t : types) {
    bool any = false;
    for (qty_t d : t.demand) any = any || d > 0;
    if (!any)
      throw std::invalid_argument("VNF type '" + t.name +
                                  "' has zero resource demand; packing would be unbounded");
    if (opt.objective == packing_objective::core_count)
      sc.type_cost.push_back(t.demand[opt.core_resource]);
    else
      sc.type_cost.push_back(instance_host_cost(net, cost, t));
  }
  int n = static_cast<int>(types.size());
  sc.ratio_suffix.assign(n + 1, std::vector<double>(sc.n_res, 0.0));
  sc.all_consume_suffix.assign(n + 1, std::vector<bool>(sc.n_res, true));
  for (int i = n - 1; i >= 0; --i)
    for (int r = 0; r < sc.n_res; ++r) {
      double ratio = sc.ratio_suffix[i + 1][r];
      bool all = sc.all_consume_suffix[i + 1][r];
      if (types[i].demand[r] > 0)
        ratio = std::max(ratio, static_cast<double>(types[i].throughput) /
                                    static_cast<double>(types[i].demand[r]));
      else
        all = false;
      sc.ratio_suffix[i][r] = ratio;
      sc.all_consume_suffix[i][r] = all;
    }
  return sc;
}

// Max extra throughput obtainable from types[from..], or infinity when no
// resource is consumed by all of them.
inline double throughput_upper_bound(const search_ctx& sc, int from,
                                     const std::vector<qty_t>& left) {
  double ub = std::numeric_limits<double>::infinity();
  for (int r = 0; r < sc.n_res; ++r)
    if (sc.all_consume_suffix[from][r])
      ub = std::min(ub, static_cast<double>(left[r]) * sc.ratio_suffix[from][r]);
  return ub;
}

}  // namespace packing_detail

// Exact maximization of installed throughput within the residual resources.
// Ties: lower host cost, then lexicographically smaller count vector.
inline packing_result max_throughput(const std::vector<qty_t>& residual,
                                     const std::vector<vnf_type>& candidates,
                                     const substrate_network& net, const cost_model& cost,
                                     const packing_options& opt = {}) {
  using namespace packing_detail;
  packing_result best;
  best.counts.assign(candidates.size(), 0);
  best.consumed.assign(residual.size(), 0);
  if (candidates.empty()) return best;
  search_ctx sc = make_search_ctx(residual, candidates, net, cost, opt);

  std::vector<int> counts(candidates.size(), 0);
  std::vector<qty_t> left = residual;

  struct dfs {
    search_ctx& sc;
    const std::vector<vnf_type>& types;
    packing_result& best;
    std::vector<int>& counts;
    std::vector<qty_t>& left;
    mbps_t cur_thr = 0;
    money_t cur_cost = 0;

    void consider() {
      if (cur_thr > best.achieved ||
          (cur_thr == best.achieved && cur_cost < best.host_cost)) {
        best.achieved = cur_thr;
        best.host_cost = cur_cost;
        best.counts = counts;
        for (size_t r = 0; r < left.size(); ++r)
          best.consumed[r] = (*sc.residual)[r] - left[r];
      }
    }

    void go(int i) {
      if (i == static_cast<int>(types.size())) {
        consider();
        return;
      }
      double ub = throughput_upper_bound(sc, i, left);
      if (std::isfinite(ub) && cur_thr + ub < static_cast<double>(best.achieved)) return;
      int max_count = std::numeric_limits<int>::max();
      for (size_t r = 0; r < left.size(); ++r)
        if (types[i].demand[r] > 0)
          max_count = std::min<long long>(max_count, left[r] / types[i].demand[r]);
      for (int c = 0; c <= max_count; ++c) {
        if (c > 0) {
          for (size_t r = 0; r < left.size(); ++r) left[r] -= types[i].demand[r];
          cur_thr += types[i].throughput;
          cur_cost += sc.type_cost[i];
          counts[i] = c;
        }
        go(i + 1);
      }
      for (size_t r = 0; r < left.size(); ++r) left[r] += types[i].demand[r] * counts[i];
      cur_thr -= types[i].throughput * counts[i];
      cur_cost -= sc.type_cost[i] * counts[i];
      counts[i] = 0;
    }
  } search{sc, candidates, best, counts, left};
  search.go(0);
  return best;
}

// Exact minimum-cost instance selection providing throughput of at least z.
// Infeasible exactly when z exceeds max_throughput of the residual.
// Ties: smaller achieved throughput, then lexicographically smaller counts.
inline std::optional<packing_result> min_cost_instances(const std::vector<qty_t>& residual,
                                                        mbps_t z,
                                                        const std::vector<vnf_type>& candidates,
                                                        const substrate_network& net,
                                                        const cost_model& cost,
                                                        const packing_options& opt = {}) {
  using namespace packing_detail;
  packing_result best;
  best.counts.assign(candidates.size(), 0);
  best.consumed.assign(residual.size(), 0);
  if (z <= 0) return best;
  if (candidates.empty()) return std::nullopt;
  search_ctx sc = make_search_ctx(residual, candidates, net, cost, opt);

  std::vector<int> counts(candidates.size(), 0);
  std::vector<qty_t> left = residual;
  bool found = false;

  struct dfs {
    search_ctx& sc;
    const std::vector<vnf_type>& types;
    mbps_t z;
    packing_result& best;
    bool& found;
    std::vector<int>& counts;
    std::vector<qty_t>& left;
    mbps_t cur_thr = 0;
    money_t cur_cost = 0;

    bool better_than_best() const {
      if (!found) return true;
      if (cur_cost != best.host_cost) return cur_cost < best.host_cost;
      return cur_thr < best.achieved;
    }

    void go(int i) {
      if (cur_thr >= z) {
        if (better_than_best()) {
          found = true;
          best.host_cost = cur_cost;
          best.achieved = cur_thr;
          best.counts = counts;
          for (size_t r = 0; r < left.size(); ++r)
            best.consumed[r] = (*sc.residual)[r] - left[r];
        }
        return;  // adding instances never improves (cost and throughput both rise)
      }
      if (i == static_cast<int>(types.size())) return;
      if (found && cur_cost > best.host_cost) return;
      double ub = throughput_upper_bound(sc, i, left);
      if (std::isfinite(ub) && cur_thr + ub < static_cast<double>(z)) return;
      int max_count = std::numeric_limits<int>::max();
      for (size_t r = 0; r < left.size(); ++r)
        if (types[i].demand[r] > 0)
          max_count = std::min<long long>(max_count, left[r] / types[i].demand[r]);
      for (int c = 0; c <= max_count; ++c) {
        if (c > 0) {
          for (size_t r = 0; r < left.size(); ++r) left[r] -= types[i].demand[r];
          cur_thr += types[i].throughput;
          cur_cost += sc.type_cost[i];
          counts[i] = c;
          if (cur_thr >= z) {  // feasible already; deeper counts only add cost
            go(i + 1);
            break;
          }
        }
        go(i + 1);
      }
      for (size_t r = 0; r < left.size(); ++r) left[r] += types[i].demand[r] * counts[i];
      cur_thr -= types[i].throughput * counts[i];
      cur_cost -= sc.type_cost[i] * counts[i];
      counts[i] = 0;
    }
  } search{sc, candidates, z, best, found, counts, left};
  search.go(0);
  if (!found) return std::nullopt;
  return best;
}

}  // namespace sfc
