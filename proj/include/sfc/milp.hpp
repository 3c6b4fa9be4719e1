#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <queue>
#include <vector>

#include "sfc/feasibility.hpp"
#include "sfc/lp.hpp"
#include "sfc/model.hpp"

namespace sfc {

// Big-M linearization of z = y * x for binary y and continuous x in [0, gamma].
// Appends z plus the four rows: z <= gamma*y, z <= x, z >= x - gamma*(1-y),
// and z >= 0 via its bound. Rejects gamma values that do not dominate x.
inline int linearize_product(linear_program& lp, int y, int x, double gamma) {
  if (gamma <= 0) throw std::invalid_argument("gamma must be positive");
  if (lp.vars[y].lo < 0 || lp.vars[y].hi > 1)
    throw std::invalid_argument("y must be a binary variable");
  if (lp.vars[x].lo < 0)
    throw std::invalid_argument("x must be non-negative");
  if (!(lp.vars[x].hi <= gamma + 1e-12))
    throw std::invalid_argument("gamma is smaller than x's upper bound");
  int z = lp.add_var(lp.vars[x].name + "*" + lp.vars[y].name, 0.0, gamma, 0.0);
  lp.add_row({{z, 1.0}, {y, -gamma}}, 'L', 0.0);          // z <= gamma y
  lp.add_row({{z, 1.0}, {x, -1.0}}, 'L', 0.0);            // z <= x
  lp.add_row({{z, 1.0}, {x, -1.0}, {y, -gamma}}, 'G', -gamma);  // z >= x - gamma(1-y)
  return z;
}

struct solve_limits {
  double time_budget_s = std::numeric_limits<double>::infinity();
  long node_budget = 1000000000L;
  double gap_tol = 0.0;  // relative; optimality is still only claimed at <= 1e-9

  solve_limits() = default;
  solve_limits(double t, long n, double g) : time_budget_s(t), node_budget(n), gap_tol(g) {
    if (time_budget_s <= 0 || node_budget <= 0) throw std::invalid_argument("budgets must be positive");
  }
};

// The linearized exact formulation with its variable-index maps. Variable
// layout: all y (per position, per type, per node), then all x (per
// commodity, per link, per direction), then all z (per position, per node).
struct milp_problem {
  linear_program lp;
  std::vector<int> integer_vars;  // the y block
  double gamma = 0;
  mbps_t demand = 0;
  int nbar = 0;
  int n_nodes = 0;
  int n_links = 0;
  std::vector<int> types_per_pos;
  std::vector<int> y_pos_offset;  // starting y var of each position's block
  int x_base = 0;
  int z_base = 0;
  std::vector<std::pair<int, int>> link_ends;

  int y_var(int pos, int type, int node) const {
    return y_pos_offset[pos] + type * n_nodes + node;
  }
  int x_var(int commodity, int link, int dir) const {
    return x_base + (commodity * n_links + link) * 2 + dir;
  }
  int z_var(int pos, int node) const { return z_base + pos * n_nodes + node; }
};

// Assembles the placement MILP: node/link capacities, endpoint pinning,
// installed-throughput cover, layer demand equalities, flow conservation,
// under the bandwidth + host cost objective. Objective coefficients are in
// money units (0.0001), so LP objectives compare exactly against fixed-point
// costs.
inline milp_problem build_milp(const substrate_network& net, const chain_context& ctx,
                               const cost_model& cost,
                               std::optional<double> gamma = std::nullopt) {
  milp_problem p;
  p.nbar = ctx.nbar();
  p.n_nodes = static_cast<int>(net.nodes.size());
  p.n_links = static_cast<int>(net.links.size());
  p.demand = ctx.demand;
  p.gamma = gamma.value_or(static_cast<double>(ctx.demand));
  if (p.gamma <= 0) throw std::invalid_argument("gamma must be positive");
  for (auto& l : net.links) p.link_ends.emplace_back(l.a, l.b);

  const int n_res = static_cast<int>(net.resource_kinds.size());

  // y block
  for (int pos = 0; pos < p.nbar; ++pos) {
    p.y_pos_offset.push_back(static_cast<int>(p.lp.vars.size()));
    const auto& types = ctx.positions[pos].types;
    p.types_per_pos.push_back(static_cast<int>(types.size()));
    for (size_t t = 0; t < types.size(); ++t) {
      money_t hc = instance_host_cost(net, cost, types[t]);
      for (int m = 0; m < p.n_nodes; ++m) {
        double ub;
        if (ctx.is_endpoint(pos)) {
          ub = 1.0;
        } else {
          mbps_t by_resource = std::numeric_limits<mbps_t>::max();
          bool consumes = false;
          for (int r = 0; r < n_res; ++r)
            if (types[t].demand[r] > 0) {
              consumes = true;
              by_resource = std::min<mbps_t>(by_resource,
                                             net.nodes[m].capacity[r] / types[t].demand[r]);
            }
          if (!consumes)  // zero-demand type: instances beyond covering b are useless
            by_resource = (ctx.demand + types[t].throughput - 1) / types[t].throughput;
          ub = static_cast<double>(by_resource);
        }
        int v = p.lp.add_var("", 0.0, ub, static_cast<double>(hc));
        p.integer_vars.push_back(v);
      }
    }
  }

  // x block
  p.x_base = static_cast<int>(p.lp.vars.size());
  for (int k = 0; k + 1 < p.nbar; ++k)
    for (int li = 0; li < p.n_links; ++li)
      for (int dir = 0; dir < 2; ++dir)
        p.lp.add_var("", 0.0, static_cast<double>(net.links[li].mbps),
                     static_cast<double>(cost.beta));

  // z block
  p.z_base = static_cast<int>(p.lp.vars.size());
  for (int pos = 0; pos < p.nbar; ++pos)
    for (int m = 0; m < p.n_nodes; ++m)
      p.lp.add_var("", 0.0, static_cast<double>(ctx.demand), 0.0);

  // (1) node resource capacities
  for (int m = 0; m < p.n_nodes; ++m)
    for (int r = 0; r < n_res; ++r) {
      std::vector<std::pair<int, double>> row;
      for (int pos = 0; pos < p.nbar; ++pos) {
        const auto& types = ctx.positions[pos].types;
        for (size_t t = 0; t < types.size(); ++t)
          if (types[t].demand[r] > 0)
            row.emplace_back(p.y_var(pos, static_cast<int>(t), m),
                             static_cast<double>(types[t].demand[r]));
      }
      if (!row.empty())
        p.lp.add_row(std::move(row), 'L', static_cast<double>(net.nodes[m].capacity[r]));
    }

  // (2) endpoint pseudo instances pinned to source/target
  for (int pos : {0, ctx.target_pos()}) {
    int pinned = ctx.pinned_node(pos);
    p.lp.add_row({{p.y_var(pos, 0, pinned), 1.0}}, 'E', 1.0);
    std::vector<std::pair<int, double>> rest;
    for (int m = 0; m < p.n_nodes; ++m)
      if (m != pinned) rest.emplace_back(p.y_var(pos, 0, m), 1.0);
    if (!rest.empty()) p.lp.add_row(std::move(rest), 'E', 0.0);
  }

  // (3) undirected link capacity over all commodities, both directions
  for (int li = 0; li < p.n_links; ++li) {
    std::vector<std::pair<int, double>> row;
    for (int k = 0; k + 1 < p.nbar; ++k) {
      row.emplace_back(p.x_var(k, li, 0), 1.0);
      row.emplace_back(p.x_var(k, li, 1), 1.0);
    }
    p.lp.add_row(std::move(row), 'L', static_cast<double>(net.links[li].mbps));
  }

  // (4) installed throughput covers the allocation (revised linear form)
  for (int m = 0; m < p.n_nodes; ++m)
    for (int pos = 0; pos < p.nbar; ++pos) {
      std::vector<std::pair<int, double>> row{{p.z_var(pos, m), 1.0}};
      const auto& types = ctx.positions[pos].types;
      for (size_t t = 0; t < types.size(); ++t)
        row.emplace_back(p.y_var(pos, static_cast<int>(t), m),
                         -static_cast<double>(types[t].throughput));
      p.lp.add_row(std::move(row), 'L', 0.0);
    }

  // (5) per position, allocations sum to the demand (revised linear form)
  for (int pos = 0; pos < p.nbar; ++pos) {
    std::vector<std::pair<int, double>> row;
    for (int m = 0; m < p.n_nodes; ++m) row.emplace_back(p.z_var(pos, m), 1.0);
    p.lp.add_row(std::move(row), 'E', static_cast<double>(ctx.demand));
  }

  // (6) flow conservation: net outflow of commodity k at m = z_{m,k} - z_{m,k+1}
  for (int m = 0; m < p.n_nodes; ++m)
    for (int k = 0; k + 1 < p.nbar; ++k) {
      std::vector<std::pair<int, double>> row;
      for (int li : net.incident[m]) {
        int out_dir = net.links[li].a == m ? 0 : 1;
        row.emplace_back(p.x_var(k, li, out_dir), 1.0);
        row.emplace_back(p.x_var(k, li, 1 - out_dir), -1.0);
      }
      row.emplace_back(p.z_var(k, m), -1.0);
      row.emplace_back(p.z_var(k + 1, m), 1.0);
      p.lp.add_row(std::move(row), 'E', 0.0);
    }

  return p;
}

enum class milp_status { optimal, feasible_with_gap, infeasible, budget_exhausted };

inline const char* to_string(milp_status s) {
  switch (s) {
    case milp_status::optimal: return "optimal";
    case milp_status::feasible_with_gap: return "feasible-with-gap";
    case milp_status::infeasible: return "infeasible";
    case milp_status::budget_exhausted: return "budget-exhausted";
  }
  return "?";
}

struct exact_result {
  milp_status status = milp_status::budget_exhausted;
  std::optional<deployment> incumbent;
  double objective = std::numeric_limits<double>::infinity();  // money units (0.0001)
  double bound = -std::numeric_limits<double>::infinity();
  long nodes = 0;
};

inline deployment extract_deployment(const milp_problem& p, const std::vector<double>& values,
                                     int fallback_depth = 0);

// Maps a deployment back onto the MILP variable vector (inverse of extraction).
inline std::vector<double> deployment_to_values(const milp_problem& p, const deployment& dep) {
  std::vector<double> v(p.lp.vars.size(), 0.0);
  for (auto& [key, count] : dep.instances) {
    auto [pos, type, node] = key;
    v[p.y_var(pos, type, node)] = static_cast<double>(count);
  }
  std::map<std::pair<int, int>, int> arc_of;
  for (int li = 0; li < p.n_links; ++li) {
    arc_of[{p.link_ends[li].first, p.link_ends[li].second}] = 2 * li;
    arc_of[{p.link_ends[li].second, p.link_ends[li].first}] = 2 * li + 1;
  }
  for (int k = 0; k + 1 < p.nbar; ++k)
    for (auto& [arc, f] : dep.flows[k]) {
      auto it = arc_of.find(arc);
      if (it == arc_of.end()) throw std::invalid_argument("deployment flow on unknown link");
      v[p.x_base + k * p.n_links * 2 + it->second] += static_cast<double>(f);
    }
  for (int pos = 0; pos < p.nbar; ++pos)
    for (auto& [node, z] : dep.alloc[pos]) v[p.z_var(pos, node)] = static_cast<double>(z);
  return v;
}

namespace milp_detail {

inline double eval_objective(const linear_program& lp, const std::vector<double>& values) {
  double o = 0;
  for (size_t j = 0; j < lp.vars.size(); ++j) o += lp.objective[j] * values[j];
  return o;
}

struct bb_node {
  int parent = -1;
  int var = -1;
  double lo = 0, hi = 0;  // bound override on var
  double bound = -std::numeric_limits<double>::infinity();
};

}  // namespace milp_detail

// Best-first branch and bound over the integer (y) variables: most-fractional
// branching with lowest-index ties, children explored in bound order. An
// optional seed deployment provides the initial incumbent. A rounding dive at
// the root helps find a first incumbent early.
inline exact_result solve_milp(const milp_problem& p, const solve_limits& lim = {},
                               const deployment* seed = nullptr) {
  using namespace milp_detail;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  exact_result res;
  linear_program work = p.lp;

  double incumbent_obj = std::numeric_limits<double>::infinity();
  std::vector<double> incumbent_values;
  bool incumbent_from_seed = false;
  if (seed) {
    incumbent_values = deployment_to_values(p, *seed);
    incumbent_obj = eval_objective(p.lp, incumbent_values);
    incumbent_from_seed = true;
  }

  std::vector<bb_node> nodes(1);
  using pq_item = std::pair<double, int>;
  std::priority_queue<pq_item, std::vector<pq_item>, std::greater<pq_item>> open;
  open.push({-std::numeric_limits<double>::infinity(), 0});

  std::vector<std::pair<int, std::pair<double, double>>> saved;
  auto apply_overrides = [&](int node_id) {
    saved.clear();
    std::vector<int> chain;
    for (int id = node_id; id > 0; id = nodes[id].parent) chain.push_back(id);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      auto& nd = nodes[*it];
      saved.push_back({nd.var, {work.vars[nd.var].lo, work.vars[nd.var].hi}});
      work.vars[nd.var].lo = std::max(work.vars[nd.var].lo, nd.lo);
      work.vars[nd.var].hi = std::min(work.vars[nd.var].hi, nd.hi);
    }
  };
  auto undo_overrides = [&] {
    for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
      work.vars[it->first].lo = it->second.second == 0 && false ? 0 : it->second.first;
      work.vars[it->first].hi = it->second.second;
    }
  };

  auto try_incumbent = [&](const std::vector<double>& vals) {
    double obj = eval_objective(p.lp, vals);
    if (obj < incumbent_obj - 1e-9) {
      incumbent_obj = obj;
      incumbent_values = vals;
      incumbent_from_seed = false;
    }
  };

  // Rounding dive: fix every integer variable to the rounded-up LP value and
  // re-solve; any feasible result is an incumbent.
  auto rounding_dive = [&](const std::vector<double>& relax_vals) {
    std::vector<std::pair<int, std::pair<double, double>>> dive_saved;
    for (int j : p.integer_vars) {
      double v = std::ceil(relax_vals[j] - 1e-6);
      v = std::min(v, work.vars[j].hi);
      v = std::max(v, work.vars[j].lo);
      dive_saved.push_back({j, {work.vars[j].lo, work.vars[j].hi}});
      work.vars[j].lo = work.vars[j].hi = v;
    }
    lp_solution sol = solve_lp(work);
    for (auto it = dive_saved.rbegin(); it != dive_saved.rend(); ++it) {
      work.vars[it->first].lo = it->second.first;
      work.vars[it->first].hi = it->second.second;
    }
    if (sol.status == lp_status::optimal) try_incumbent(sol.values);
  };

  double best_open_bound = -std::numeric_limits<double>::infinity();
  bool budget_hit = false;

  while (!open.empty()) {
    auto [bound, node_id] = open.top();
    best_open_bound = bound;
    if (bound >= incumbent_obj - 1e-9 && std::isfinite(incumbent_obj)) break;  // proven
    if (std::isfinite(incumbent_obj) && std::isfinite(bound)) {
      double gap = (incumbent_obj - bound) / std::max(1.0, std::fabs(incumbent_obj));
      if (gap <= lim.gap_tol) break;
    }
    if (res.nodes >= lim.node_budget || elapsed() > lim.time_budget_s) {
      budget_hit = true;
      break;
    }
    open.pop();
    ++res.nodes;

    apply_overrides(node_id);
    lp_solution sol = solve_lp(work);
    if (sol.status == lp_status::unbounded) {
      undo_overrides();
      throw std::runtime_error("placement MILP relaxation is unbounded");
    }
    if (sol.status == lp_status::infeasible) {
      undo_overrides();
      continue;
    }
    double node_bound = sol.objective;
    if (node_bound >= incumbent_obj - 1e-9) {
      undo_overrides();
      continue;
    }

    // fractional integer variables
    int branch_var = -1;
    double best_frac = 1e-6;
    for (int j : p.integer_vars) {
      double v = sol.values[j];
      double frac = std::fabs(v - std::round(v));
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      try_incumbent(sol.values);
      undo_overrides();
      continue;
    }
    if (node_id == 0) rounding_dive(sol.values);

    double v = sol.values[branch_var];
    int down = static_cast<int>(nodes.size());
    nodes.push_back({node_id, branch_var, work.vars[branch_var].lo, std::floor(v), node_bound});
    int up = static_cast<int>(nodes.size());
    nodes.push_back({node_id, branch_var, std::ceil(v), work.vars[branch_var].hi, node_bound});
    open.push({node_bound, down});
    open.push({node_bound, up});
    undo_overrides();
  }

  bool proven = open.empty();
  if (!proven && std::isfinite(incumbent_obj)) {
    double gap = (incumbent_obj - best_open_bound) / std::max(1.0, std::fabs(incumbent_obj));
    proven = gap <= 1e-9;
  }
  res.bound = open.empty() ? incumbent_obj : best_open_bound;
  res.objective = incumbent_obj;

  if (std::isfinite(incumbent_obj)) {
    res.status = proven ? milp_status::optimal : milp_status::feasible_with_gap;
    if (incumbent_from_seed)
      res.incumbent = *seed;
    else
      res.incumbent = extract_deployment(p, incumbent_values);
  } else if (open.empty()) {
    res.status = milp_status::infeasible;
    res.bound = std::numeric_limits<double>::infinity();
  } else {
    res.status = milp_status::budget_exhausted;
  }
  (void)budget_hit;
  return res;
}

// Inverse of the index maps. Integer (y) values must be integral within 1e-6;
// fractional flows/allocations trigger a re-decomposition on the fixed Y
// (the same branch-and-bound run with x and z as the integer set).
inline deployment extract_deployment(const milp_problem& p, const std::vector<double>& values,
                                     int fallback_depth) {
  auto near_int = [](double v) { return std::fabs(v - std::round(v)) <= 1e-6; };
  for (int j : p.integer_vars)
    if (!near_int(values[j]))
      throw std::runtime_error("internal error: non-integral instance count in MILP solution");

  bool flows_integral = true;
  for (size_t j = p.x_base; j < p.lp.vars.size(); ++j)
    if (!near_int(values[j])) {
      flows_integral = false;
      break;
    }

  std::vector<double> use = values;
  if (!flows_integral) {
    if (fallback_depth > 0)
      throw std::runtime_error("flow re-decomposition did not reach integrality");
    milp_problem sub = p;
    for (int j : p.integer_vars) {
      double v = std::round(values[j]);
      sub.lp.vars[j].lo = sub.lp.vars[j].hi = v;
    }
    sub.integer_vars.clear();
    for (size_t j = p.x_base; j < p.lp.vars.size(); ++j)
      sub.integer_vars.push_back(static_cast<int>(j));
    exact_result r = solve_milp(sub, solve_limits(600.0, 200000, 0.0));
    if (!r.incumbent)
      throw std::runtime_error("flow re-decomposition failed on the fixed instance counts");
    return *r.incumbent;
  }

  deployment dep;
  dep.nbar = p.nbar;
  dep.flows.resize(p.nbar - 1);
  dep.alloc.resize(p.nbar);
  for (int pos = 0; pos < p.nbar; ++pos)
    for (int t = 0; t < p.types_per_pos[pos]; ++t)
      for (int m = 0; m < p.n_nodes; ++m) {
        long long c = std::llround(use[p.y_var(pos, t, m)]);
        if (c > 0) dep.instances[{pos, t, m}] = static_cast<int>(c);
      }
  for (int k = 0; k + 1 < p.nbar; ++k)
    for (int li = 0; li < p.n_links; ++li) {
      mbps_t f_ab = std::llround(use[p.x_var(k, li, 0)]);
      mbps_t f_ba = std::llround(use[p.x_var(k, li, 1)]);
      mbps_t c = std::min(f_ab, f_ba);  // opposing flow cancels at no cost increase
      f_ab -= c;
      f_ba -= c;
      if (f_ab > 0) dep.flows[k][{p.link_ends[li].first, p.link_ends[li].second}] = f_ab;
      if (f_ba > 0) dep.flows[k][{p.link_ends[li].second, p.link_ends[li].first}] = f_ba;
    }
  for (int pos = 0; pos < p.nbar; ++pos)
    for (int m = 0; m < p.n_nodes; ++m) {
      mbps_t z = std::llround(use[p.z_var(pos, m)]);
      if (z > 0) dep.alloc[pos][m] = z;
    }
  return dep;
}

}  // namespace sfc
