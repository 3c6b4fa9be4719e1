#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sfc/fixed.hpp"

namespace sfc {

struct node_record {
  std::string id;
  std::vector<qty_t> capacity;  // indexed by substrate_network::resource_kinds
};

struct link_record {
  int a = -1;  // node indices, a < b after normalization
  int b = -1;
  mbps_t mbps = 0;
};

// The substrate graph G=(N,E): nodes with per-resource capacities and
// undirected capacitated links. At most one link per unordered pair.
struct substrate_network {
  std::vector<std::string> resource_kinds;
  std::vector<node_record> nodes;
  std::vector<link_record> links;

  std::unordered_map<std::string, int> node_index;
  std::map<std::pair<int, int>, int> link_index;       // (min,max) -> link position
  std::vector<std::vector<int>> incident;              // node -> link positions

  int resource_of(const std::string& name) const {
    for (size_t i = 0; i < resource_kinds.size(); ++i)
      if (resource_kinds[i] == name) return static_cast<int>(i);
    return -1;
  }

  int node_of(const std::string& id) const {
    auto it = node_index.find(id);
    return it == node_index.end() ? -1 : it->second;
  }

  const link_record* link_between(int m, int n) const {
    auto it = link_index.find({std::min(m, n), std::max(m, n)});
    return it == link_index.end() ? nullptr : &links[it->second];
  }

  // Rebuilds the lookup structures and enforces the structural invariants.
  void finalize() {
    node_index.clear();
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (!node_index.emplace(nodes[i].id, static_cast<int>(i)).second)
        throw std::invalid_argument("duplicate node id: " + nodes[i].id);
      if (nodes[i].capacity.size() != resource_kinds.size())
        throw std::invalid_argument("node " + nodes[i].id + ": capacity vector size mismatch");
      for (qty_t c : nodes[i].capacity)
        if (c < 0) throw std::invalid_argument("node " + nodes[i].id + ": negative capacity");
    }
    link_index.clear();
    incident.assign(nodes.size(), {});
    for (size_t i = 0; i < links.size(); ++i) {
      auto& l = links[i];
      if (l.a < 0 || l.b < 0 || l.a >= static_cast<int>(nodes.size()) ||
          l.b >= static_cast<int>(nodes.size()))
        throw std::invalid_argument("link references unknown node");
      if (l.a == l.b) throw std::invalid_argument("link endpoints must be distinct");
      if (l.mbps < 0) throw std::invalid_argument("negative link bandwidth");
      if (l.a > l.b) std::swap(l.a, l.b);
      if (!link_index.emplace(std::make_pair(l.a, l.b), static_cast<int>(i)).second)
        throw std::invalid_argument("parallel links are not allowed: " + nodes[l.a].id + "-" +
                                    nodes[l.b].id);
      incident[l.a].push_back(static_cast<int>(i));
      incident[l.b].push_back(static_cast<int>(i));
    }
  }
};

struct vnf_type {
  std::string name;
  mbps_t throughput = 0;        // q_u
  std::vector<qty_t> demand;    // d_ur, indexed like resource_kinds
};

// Per service function: the list of VNF types that can realize it.
struct vnf_catalog {
  std::vector<std::pair<std::string, std::vector<vnf_type>>> entries;  // ordered by insertion

  const std::vector<vnf_type>* find(const std::string& sf) const {
    for (auto& e : entries)
      if (e.first == sf) return &e.second;
    return nullptr;
  }
};

struct chain_request {
  std::string id;
  std::vector<std::string> sfs;  // ordered SF names
  std::string source;
  std::string target;
  mbps_t demand = 0;             // b-bar
  std::optional<double> lifetime_s;
};

// alpha: cost per unit of each resource; beta: cost per Mbps per directed link hop.
struct cost_model {
  std::vector<std::pair<std::string, money_t>> alpha;  // resource name -> weight
  money_t beta = 0;

  money_t alpha_for(const std::string& resource) const {
    for (auto& a : alpha)
      if (a.first == resource) return a.second;
    return 0;
  }
};

// Solution triple (X, Y, Z). Chain positions: 0 = source endpoint, 1..L = SFs,
// L+1 = target endpoint. Commodity k is the traffic emitted by position k and
// consumed by position k+1; the target emits nothing, so flows has nbar-1 slots.
struct deployment {
  int nbar = 0;
  std::vector<std::map<std::pair<int, int>, mbps_t>> flows;   // [emitter pos] (from,to) -> mbps
  std::map<std::tuple<int, int, int>, int> instances;         // (pos, type idx, node) -> count
  std::vector<std::map<int, mbps_t>> alloc;                   // [pos] node -> z

  bool empty() const {
    for (auto& f : flows)
      if (!f.empty()) return false;
    return instances.empty();
  }
};

constexpr int kPosSource = 0;

// Resolved view of one request against a network and catalog: node indices,
// the chain positions with their candidate VNF types (pseudo endpoint types
// synthesized with q = demand and zero resource demand), and per-type host
// costs under a cost model.
struct chain_context {
  struct position {
    std::string sf;                // "_source" / "_target" for the endpoints
    std::vector<vnf_type> types;
  };

  const substrate_network* net = nullptr;
  std::vector<position> positions;  // size L+2
  int source_node = -1;
  int target_node = -1;
  mbps_t demand = 0;

  int nbar() const { return static_cast<int>(positions.size()); }
  int target_pos() const { return nbar() - 1; }
  bool is_endpoint(int pos) const { return pos == 0 || pos == target_pos(); }
  // The node an endpoint's pseudo instance is pinned to, -1 for SF positions.
  int pinned_node(int pos) const {
    return pos == 0 ? source_node : (pos == target_pos() ? target_node : -1);
  }
};

struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Enforces the type invariants: known endpoints, non-empty chain, demand >= 1,
// catalog coverage with positive throughputs.
inline chain_context make_context(const substrate_network& net, const chain_request& req,
                                  const vnf_catalog& cat) {
  chain_context ctx;
  ctx.net = &net;
  ctx.demand = req.demand;
  if (req.sfs.empty()) throw validation_error("chain has an empty SF sequence");
  if (req.demand < 1) throw validation_error("chain demand must be >= 1 Mbps");
  ctx.source_node = net.node_of(req.source);
  if (ctx.source_node < 0) throw validation_error("unknown source node: " + req.source);
  ctx.target_node = net.node_of(req.target);
  if (ctx.target_node < 0) throw validation_error("unknown target node: " + req.target);

  vnf_type pseudo_src{"_source", req.demand, std::vector<qty_t>(net.resource_kinds.size(), 0)};
  vnf_type pseudo_tgt{"_target", req.demand, std::vector<qty_t>(net.resource_kinds.size(), 0)};
  ctx.positions.push_back({"_source", {pseudo_src}});
  for (auto& sf : req.sfs) {
    const auto* types = cat.find(sf);
    if (!types || types->empty())
      throw validation_error("no catalog entry for SF '" + sf + "'");
    for (auto& t : *types) {
      if (t.throughput <= 0)
        throw validation_error("VNF type '" + t.name + "' must have positive throughput");
      if (t.demand.size() != net.resource_kinds.size())
        throw validation_error("VNF type '" + t.name + "': demand vector size mismatch");
      for (qty_t d : t.demand)
        if (d < 0) throw validation_error("VNF type '" + t.name + "': negative demand");
    }
    ctx.positions.push_back({sf, *types});
  }
  ctx.positions.push_back({"_target", {pseudo_tgt}});
  return ctx;
}

struct validation_result {
  bool ok = true;
  std::string error;
};

inline validation_result validate_inputs(const substrate_network& net, const chain_request& req,
                                         const vnf_catalog& cat) {
  try {
    make_context(net, req, cat);
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  return {};
}

// Per-instance host cost sum_r alpha_r * d_ur, exact in money units.
inline money_t instance_host_cost(const substrate_network& net, const cost_model& cost,
                                  const vnf_type& type) {
  money_t total = 0;
  for (size_t r = 0; r < net.resource_kinds.size(); ++r) {
    money_t a = cost.alpha_for(net.resource_kinds[r]);
    std::int64_t prod = a * type.demand[r];
    if (prod % kQtyScale != 0)
      throw std::invalid_argument("host cost for '" + type.name +
                                  "' is not representable at 0.0001 resolution");
    total += prod / kQtyScale;
  }
  return total;
}

// Residual capacities: network minus everything a (partial) deployment holds.
struct residual_state {
  std::vector<std::vector<qty_t>> node_res;  // [node][resource]
  std::vector<mbps_t> link_res;              // [link]

  static residual_state of(const substrate_network& net) {
    residual_state st;
    st.node_res.reserve(net.nodes.size());
    for (auto& n : net.nodes) st.node_res.push_back(n.capacity);
    st.link_res.reserve(net.links.size());
    for (auto& l : net.links) st.link_res.push_back(l.mbps);
    return st;
  }

  // Subtracts a deployment's instances and flows. Throws if anything goes negative.
  void subtract(const substrate_network& net, const chain_context& ctx, const deployment& dep) {
    for (auto& [key, count] : dep.instances) {
      auto [pos, type_idx, node] = key;
      const auto& t = ctx.positions[pos].types[type_idx];
      for (size_t r = 0; r < net.resource_kinds.size(); ++r) {
        node_res[node][r] -= t.demand[r] * count;
        if (node_res[node][r] < 0)
          throw std::runtime_error("residual underflow at node " + net.nodes[node].id);
      }
    }
    for (auto& per_commodity : dep.flows)
      for (auto& [arc, mbps] : per_commodity) {
        const link_record* l = net.link_between(arc.first, arc.second);
        if (!l) throw std::runtime_error("flow on unknown link");
        int li = net.link_index.at({l->a, l->b});
        link_res[li] -= mbps;
        if (link_res[li] < 0) throw std::runtime_error("link residual underflow");
      }
  }

  void add_back(const substrate_network& net, const chain_context& ctx, const deployment& dep) {
    for (auto& [key, count] : dep.instances) {
      auto [pos, type_idx, node] = key;
      const auto& t = ctx.positions[pos].types[type_idx];
      for (size_t r = 0; r < net.resource_kinds.size(); ++r)
        node_res[node][r] += t.demand[r] * count;
    }
    for (auto& per_commodity : dep.flows)
      for (auto& [arc, mbps] : per_commodity) {
        const link_record* l = net.link_between(arc.first, arc.second);
        int li = net.link_index.at({l->a, l->b});
        link_res[li] += mbps;
      }
  }
};

// A copy of the network with capacities replaced by a residual snapshot, so a
// solver can run against the remaining headroom.
inline substrate_network network_with_residual(const substrate_network& net,
                                               const residual_state& st) {
  substrate_network out = net;
  for (size_t i = 0; i < out.nodes.size(); ++i) out.nodes[i].capacity = st.node_res[i];
  for (size_t i = 0; i < out.links.size(); ++i) out.links[i].mbps = st.link_res[i];
  return out;
}

}  // namespace sfc
