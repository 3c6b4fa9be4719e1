#pragma once

#include <string>
#include <vector>

#include "sfc/model.hpp"

namespace sfc {

// The six constraint families of the placement model.
enum class constraint_family {
  node_capacity,      // per node, per resource: instance demand within capacity
  location,           // endpoint pseudo instances pinned to source/target
  link_capacity,      // per undirected link: both directions, all commodities
  throughput,         // per node, per position: installed throughput covers z
  throughput_demand,  // per position: allocations sum to the chain demand
  flow_conservation   // per node, per commodity: net outflow = z_u - z_v
};

inline const char* family_name(constraint_family f) {
  switch (f) {
    case constraint_family::node_capacity: return "node_capacity";
    case constraint_family::location: return "location";
    case constraint_family::link_capacity: return "link_capacity";
    case constraint_family::throughput: return "throughput";
    case constraint_family::throughput_demand: return "throughput_demand";
    case constraint_family::flow_conservation: return "flow_conservation";
  }
  return "?";
}

struct constraint_report {
  struct family_result {
    constraint_family family;
    bool pass = true;
    std::vector<std::string> violations;
  };
  std::vector<family_result> families;

  bool feasible() const {
    for (auto& f : families)
      if (!f.pass) return false;
    return true;
  }
  const family_result& of(constraint_family f) const {
    return families[static_cast<size_t>(f)];
  }
};

namespace detail {

// Structural validation of a deployment against the context; malformed
// references are input errors, not constraint violations.
inline void check_deployment_shape(const chain_context& ctx, const deployment& dep) {
  const auto& net = *ctx.net;
  if (dep.nbar != ctx.nbar()) throw validation_error("deployment nbar mismatch");
  if (static_cast<int>(dep.flows.size()) != ctx.nbar() - 1)
    throw validation_error("deployment must carry one flow map per commodity (target excluded)");
  if (static_cast<int>(dep.alloc.size()) != ctx.nbar())
    throw validation_error("deployment must carry one allocation map per chain position");
  for (auto& [key, count] : dep.instances) {
    auto [pos, type_idx, node] = key;
    if (pos < 0 || pos >= ctx.nbar()) throw validation_error("instance at unknown position");
    if (type_idx < 0 || type_idx >= static_cast<int>(ctx.positions[pos].types.size()))
      throw validation_error("instance of unknown VNF type");
    if (node < 0 || node >= static_cast<int>(net.nodes.size()))
      throw validation_error("instance on unknown node");
    if (count < 0) throw validation_error("negative instance count");
  }
  for (auto& per_pos : dep.alloc)
    for (auto& [node, z] : per_pos) {
      if (node < 0 || node >= static_cast<int>(net.nodes.size()))
        throw validation_error("allocation on unknown node");
      if (z < 0) throw validation_error("negative allocation");
    }
  for (auto& per_commodity : dep.flows)
    for (auto& [arc, mbps] : per_commodity) {
      if (mbps < 0) throw validation_error("negative flow");
      if (arc.first < 0 || arc.second < 0 || arc.first >= static_cast<int>(net.nodes.size()) ||
          arc.second >= static_cast<int>(net.nodes.size()))
        throw validation_error("flow between unknown nodes");
      if (!net.link_between(arc.first, arc.second))
        throw validation_error("flow on non-existent link " + net.nodes[arc.first].id + "-" +
                               net.nodes[arc.second].id);
    }
}

}  // namespace detail

// Checks all six constraint families and reports violations per family.
inline constraint_report feasibility_check(const substrate_network& net, const chain_context& ctx,
                                           const deployment& dep) {
  detail::check_deployment_shape(ctx, dep);
  constraint_report rep;
  rep.families.resize(6);
  for (int i = 0; i < 6; ++i) rep.families[i].family = static_cast<constraint_family>(i);
  auto violate = [&](constraint_family f, std::string msg) {
    auto& fam = rep.families[static_cast<size_t>(f)];
    fam.pass = false;
    fam.violations.push_back(std::move(msg));
  };

  const int n_nodes = static_cast<int>(net.nodes.size());
  const int n_res = static_cast<int>(net.resource_kinds.size());

  // Instance demand per node/resource and installed throughput per node/position.
  std::vector<std::vector<qty_t>> used(n_nodes, std::vector<qty_t>(n_res, 0));
  std::vector<std::vector<mbps_t>> installed(ctx.nbar(), std::vector<mbps_t>(n_nodes, 0));
  for (auto& [key, count] : dep.instances) {
    auto [pos, type_idx, node] = key;
    const auto& t = ctx.positions[pos].types[type_idx];
    for (int r = 0; r < n_res; ++r) used[node][r] += t.demand[r] * count;
    installed[pos][node] += t.throughput * count;
  }

  for (int m = 0; m < n_nodes; ++m)
    for (int r = 0; r < n_res; ++r)
      if (used[m][r] > net.nodes[m].capacity[r])
        violate(constraint_family::node_capacity,
                "node " + net.nodes[m].id + " over " + net.resource_kinds[r] + ": " +
                    qty_str(used[m][r]) + " > " + qty_str(net.nodes[m].capacity[r]));

  // Location: one pseudo instance at the pinned endpoint, none elsewhere.
  for (int pos : {0, ctx.target_pos()}) {
    int pinned = ctx.pinned_node(pos);
    for (int m = 0; m < n_nodes; ++m) {
      auto it = dep.instances.find({pos, 0, m});
      int count = it == dep.instances.end() ? 0 : it->second;
      int want = m == pinned ? 1 : 0;
      if (count != want)
        violate(constraint_family::location,
                ctx.positions[pos].sf + " instance count at " + net.nodes[m].id + " is " +
                    std::to_string(count) + ", expected " + std::to_string(want));
    }
  }

  // Link capacity: both directions of every commodity against the undirected cap.
  {
    std::vector<mbps_t> load(net.links.size(), 0);
    for (auto& per_commodity : dep.flows)
      for (auto& [arc, mbps] : per_commodity) {
        const link_record* l = net.link_between(arc.first, arc.second);
        load[net.link_index.at({l->a, l->b})] += mbps;
      }
    for (size_t li = 0; li < net.links.size(); ++li)
      if (load[li] > net.links[li].mbps)
        violate(constraint_family::link_capacity,
                "link " + net.nodes[net.links[li].a].id + "-" + net.nodes[net.links[li].b].id +
                    ": " + std::to_string(load[li]) + " > " + std::to_string(net.links[li].mbps));
  }

  auto alloc_at = [&](int pos, int m) -> mbps_t {
    auto it = dep.alloc[pos].find(m);
    return it == dep.alloc[pos].end() ? 0 : it->second;
  };

  for (int pos = 0; pos < ctx.nbar(); ++pos)
    for (int m = 0; m < n_nodes; ++m)
      if (alloc_at(pos, m) > installed[pos][m])
        violate(constraint_family::throughput,
                ctx.positions[pos].sf + " at " + net.nodes[m].id + ": allocated " +
                    std::to_string(alloc_at(pos, m)) + " > installed " +
                    std::to_string(installed[pos][m]));

  for (int pos = 0; pos < ctx.nbar(); ++pos) {
    mbps_t total = 0;
    for (auto& [_, z] : dep.alloc[pos]) total += z;
    if (total != ctx.demand)
      violate(constraint_family::throughput_demand,
              ctx.positions[pos].sf + ": allocations sum to " + std::to_string(total) +
                  ", expected " + std::to_string(ctx.demand));
  }

  // Flow conservation per node for every commodity u (target excluded):
  // net outflow of commodity u at m equals z_{m,u} - z_{m,f(u)}.
  for (int pos = 0; pos + 1 < ctx.nbar(); ++pos) {
    std::vector<mbps_t> net_out(n_nodes, 0);
    for (auto& [arc, mbps] : dep.flows[pos]) {
      net_out[arc.first] += mbps;
      net_out[arc.second] -= mbps;
    }
    for (int m = 0; m < n_nodes; ++m) {
      mbps_t want = alloc_at(pos, m) - alloc_at(pos + 1, m);
      if (net_out[m] != want)
        violate(constraint_family::flow_conservation,
                "commodity " + ctx.positions[pos].sf + " at " + net.nodes[m].id + ": net outflow " +
                    std::to_string(net_out[m]) + " != " + std::to_string(want));
    }
  }

  return rep;
}

struct cost_breakdown {
  money_t bandwidth = 0;
  money_t host = 0;
  money_t total = 0;
};

// B(X) + H(Y): every directed Mbps-hop costs beta, every instance costs
// sum_r alpha_r * d_ur. Exact fixed-point arithmetic.
inline cost_breakdown total_cost(const substrate_network& net, const chain_context& ctx,
                                 const deployment& dep, const cost_model& cost) {
  cost_breakdown out;
  mbps_t hops = 0;
  for (auto& per_commodity : dep.flows)
    for (auto& [arc, mbps] : per_commodity) hops += mbps;
  out.bandwidth = cost.beta * hops;
  for (auto& [key, count] : dep.instances) {
    auto [pos, type_idx, node] = key;
    (void)node;
    out.host += instance_host_cost(net, cost, ctx.positions[pos].types[type_idx]) * count;
  }
  out.total = out.bandwidth + out.host;
  return out;
}

}  // namespace sfc
