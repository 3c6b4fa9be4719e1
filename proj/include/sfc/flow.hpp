#pragma once

#include <map>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "sfc/lp.hpp"
#include "sfc/model.hpp"

namespace sfc {

// Directed arc network for the min-cost-flow kernel. Node ids are arbitrary
// ints; the super source/sink use reserved negative ids that never collide
// with substrate indices.
constexpr int kSuperSource = -1;
constexpr int kSuperSink = -2;

struct flow_arc {
  int from = 0;
  int to = 0;
  mbps_t capacity = 0;
  money_t unit_cost = 0;  // cost per Mbps, >= 0
};

struct flow_network {
  std::vector<flow_arc> arcs;
};

struct flow_result {
  bool feasible = false;
  mbps_t routed = 0;             // == amount when feasible, else the max flow
  money_t cost = 0;
  std::vector<mbps_t> arc_flow;  // parallel to flow_network::arcs
};

// Successive shortest paths with node potentials over the residual graph.
// Exact integer arithmetic; Dijkstra relaxes arcs in index order and breaks
// distance ties toward the lower node index, which pins the chosen split.
inline flow_result min_cost_flow(const flow_network& net, int source, int sink, mbps_t amount) {
  flow_result out;
  out.arc_flow.assign(net.arcs.size(), 0);
  if (amount < 0) throw std::invalid_argument("negative flow amount");
  if (amount == 0) {
    out.feasible = true;
    return out;
  }

  std::unordered_map<int, int> idx;
  auto intern = [&](int id) {
    auto [it, inserted] = idx.emplace(id, static_cast<int>(idx.size()));
    return it->second;
  };
  for (auto& a : net.arcs) {
    if (a.capacity < 0) throw std::invalid_argument("negative arc capacity");
    if (a.unit_cost < 0) throw std::invalid_argument("negative arc cost");
    intern(a.from);
    intern(a.to);
  }
  if (!idx.count(source) || !idx.count(sink)) return out;  // nothing reaches the sink
  int s = idx[source], t = idx[sink];
  int n = static_cast<int>(idx.size());

  // residual arcs: even = forward, odd = backward
  struct res_arc {
    int to;
    mbps_t cap;
    money_t cost;
  };
  std::vector<res_arc> arcs;
  std::vector<std::vector<int>> adj(n);
  arcs.reserve(net.arcs.size() * 2);
  for (auto& a : net.arcs) {
    int u = idx[a.from], v = idx[a.to];
    adj[u].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({v, a.capacity, a.unit_cost});
    adj[v].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({u, 0, -a.unit_cost});
  }

  constexpr money_t kUnreach = std::numeric_limits<money_t>::max() / 4;
  std::vector<money_t> pot(n, 0), dist(n);
  std::vector<int> parent_arc(n);

  mbps_t remaining = amount;
  while (remaining > 0) {
    dist.assign(n, kUnreach);
    parent_arc.assign(n, -1);
    dist[s] = 0;
    using pq_item = std::pair<money_t, int>;
    std::priority_queue<pq_item, std::vector<pq_item>, std::greater<pq_item>> pq;
    pq.push({0, s});
    std::vector<bool> done(n, false);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (done[u]) continue;
      done[u] = true;
      for (int ai : adj[u]) {
        const auto& a = arcs[ai];
        if (a.cap <= 0 || done[a.to]) continue;
        money_t nd = d + a.cost + pot[u] - pot[a.to];
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          parent_arc[a.to] = ai;
          pq.push({nd, a.to});
        }
      }
    }
    if (dist[t] >= kUnreach) break;  // no augmenting path left
    for (int v = 0; v < n; ++v)
      if (dist[v] < kUnreach) pot[v] += dist[v];
    mbps_t push = remaining;
    for (int v = t; v != s;) {
      const auto& a = arcs[parent_arc[v]];
      push = std::min(push, a.cap);
      v = arcs[parent_arc[v] ^ 1].to;
    }
    for (int v = t; v != s;) {
      arcs[parent_arc[v]].cap -= push;
      arcs[parent_arc[v] ^ 1].cap += push;
      v = arcs[parent_arc[v] ^ 1].to;
    }
    remaining -= push;
  }

  out.routed = amount - remaining;
  for (size_t i = 0; i < net.arcs.size(); ++i) {
    mbps_t f = net.arcs[i].capacity - arcs[2 * i].cap;
    out.arc_flow[i] = f;
    out.cost += f * net.arcs[i].unit_cost;
  }
  out.feasible = remaining == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Layer-to-layer routing (the super-source / super-sink construction).

struct layer_route {
  std::map<std::pair<int, int>, mbps_t> flows;  // substrate (from,to) -> mbps
  std::map<int, mbps_t> sink_alloc;             // node -> allocated throughput
  std::map<int, mbps_t> source_used;            // node -> supply actually drawn
  money_t bandwidth_cost = 0;
};

namespace flow_detail {

// Builds arcs: super source -> sources (cap = allocation, free), both
// directions of every substrate link at its residual (cost beta per Mbps),
// sinks -> super sink (cap = installable throughput, free).
inline flow_network layer_network(const substrate_network& net, const std::vector<mbps_t>& link_res,
                                  const std::vector<std::pair<int, mbps_t>>& sources,
                                  const std::vector<std::pair<int, mbps_t>>& sinks,
                                  money_t beta) {
  flow_network fn;
  for (auto& [node, supply] : sources)
    fn.arcs.push_back({kSuperSource, node, supply, 0});
  for (size_t li = 0; li < net.links.size(); ++li) {
    const auto& l = net.links[li];
    fn.arcs.push_back({l.a, l.b, link_res[li], beta});
    fn.arcs.push_back({l.b, l.a, link_res[li], beta});
  }
  for (auto& [node, cap] : sinks)
    fn.arcs.push_back({node, kSuperSink, cap, 0});
  return fn;
}

// Cancels opposing flows on each link so x_mn * x_nm == 0; conservation is
// untouched and cost never increases.
inline void cancel_opposing(const substrate_network& net, size_t first_link_arc,
                            std::vector<mbps_t>& arc_flow) {
  for (size_t li = 0; li < net.links.size(); ++li) {
    size_t fwd = first_link_arc + 2 * li;
    size_t bwd = fwd + 1;
    mbps_t c = std::min(arc_flow[fwd], arc_flow[bwd]);
    arc_flow[fwd] -= c;
    arc_flow[bwd] -= c;
  }
}

inline layer_route collect_route(const substrate_network& net, const flow_network& fn,
                                 const flow_result& fr, size_t n_sources, money_t beta) {
  layer_route out;
  std::vector<mbps_t> flow = fr.arc_flow;
  cancel_opposing(net, n_sources, flow);
  for (size_t i = 0; i < n_sources; ++i)
    if (flow[i] > 0) out.source_used[fn.arcs[i].to] = flow[i];
  for (size_t li = 0; li < net.links.size(); ++li) {
    const auto& l = net.links[li];
    mbps_t f_ab = flow[n_sources + 2 * li];
    mbps_t f_ba = flow[n_sources + 2 * li + 1];
    if (f_ab > 0) out.flows[{l.a, l.b}] = f_ab;
    if (f_ba > 0) out.flows[{l.b, l.a}] = f_ba;
    out.bandwidth_cost += (f_ab + f_ba) * beta;
  }
  size_t sink_base = n_sources + 2 * net.links.size();
  for (size_t i = sink_base; i < fn.arcs.size(); ++i)
    if (flow[i] > 0) out.sink_alloc[fn.arcs[i].from] = flow[i];
  return out;
}

}  // namespace flow_detail

// Routes `amount` of one commodity from the source layer (fixed allocations)
// to the sink layer (installable-throughput caps) at minimum bandwidth cost.
inline std::optional<layer_route> route_between_layers(
    const substrate_network& net, const std::vector<mbps_t>& link_res,
    const std::vector<std::pair<int, mbps_t>>& sources,
    const std::vector<std::pair<int, mbps_t>>& sink_caps, mbps_t amount, money_t beta) {
  if (sink_caps.empty()) return std::nullopt;
  flow_network fn = flow_detail::layer_network(net, link_res, sources, sink_caps, beta);
  flow_result fr = min_cost_flow(fn, kSuperSource, kSuperSink, amount);
  if (!fr.feasible) return std::nullopt;
  return flow_detail::collect_route(net, fn, fr, sources.size(), beta);
}

// ---------------------------------------------------------------------------
// Rerouting around one layer: commodity u into the layer (supplies fixed at
// the previous layer) and commodity v out of it (demands fixed at the next
// layer), sharing residual link capacity. Used by the improvement actions.

struct reroute_request {
  std::vector<std::pair<int, mbps_t>> supplies_u;  // previous layer: exact supplies
  std::vector<std::pair<int, mbps_t>> layer_caps;  // this layer: max receivable
  std::vector<std::pair<int, mbps_t>> demands_w;   // next layer: exact demands;
                                                   // empty = commodity v not deployed
  mbps_t amount = 0;                               // b-bar
};

struct reroute_result {
  std::map<std::pair<int, int>, mbps_t> flows_u;
  std::map<std::pair<int, int>, mbps_t> flows_v;
  std::map<int, mbps_t> layer_alloc;  // realized allocation per layer node
  money_t bandwidth_cost = 0;
};

namespace flow_detail {

// Exact joint LP over both commodities plus the per-node conversion amounts.
inline std::optional<reroute_result> reroute_lp(const substrate_network& net,
                                                const std::vector<mbps_t>& link_res,
                                                const reroute_request& req, money_t beta) {
  const int n_nodes = static_cast<int>(net.nodes.size());
  const int n_links = static_cast<int>(net.links.size());
  linear_program lp;
  // x_u then x_v: two directed vars per link per commodity
  auto xvar = [&](int commodity, int li, int dir) { return (commodity * n_links + li) * 2 + dir; };
  for (int c = 0; c < 2; ++c)
    for (int li = 0; li < n_links; ++li)
      for (int dir = 0; dir < 2; ++dir)
        lp.add_var("x", 0.0, static_cast<double>(link_res[li]), static_cast<double>(beta));
  std::vector<double> cap_of(n_nodes, 0.0);
  std::vector<int> avar(n_nodes, -1);
  for (auto& [node, cap] : req.layer_caps) {
    avar[node] = lp.add_var("a", 0.0, static_cast<double>(cap), 0.0);
    cap_of[node] = static_cast<double>(cap);
  }

  std::vector<double> supply(n_nodes, 0.0), demand(n_nodes, 0.0);
  for (auto& [node, s] : req.supplies_u) supply[node] += static_cast<double>(s);
  for (auto& [node, d] : req.demands_w) demand[node] += static_cast<double>(d);

  for (int m = 0; m < n_nodes; ++m) {
    std::vector<std::pair<int, double>> row_u, row_v;
    for (int li : net.incident[m]) {
      const auto& l = net.links[li];
      int out_dir = l.a == m ? 0 : 1;
      row_u.emplace_back(xvar(0, li, out_dir), 1.0);
      row_u.emplace_back(xvar(0, li, 1 - out_dir), -1.0);
      row_v.emplace_back(xvar(1, li, out_dir), 1.0);
      row_v.emplace_back(xvar(1, li, 1 - out_dir), -1.0);
    }
    // commodity u: net outflow = supply - a_m
    if (avar[m] >= 0) row_u.emplace_back(avar[m], 1.0);
    lp.add_row(row_u, 'E', supply[m]);
    // commodity v: net outflow = a_m - demand (only present when deployed)
    if (!req.demands_w.empty()) {
      if (avar[m] >= 0) row_v.emplace_back(avar[m], -1.0);
      lp.add_row(row_v, 'E', -demand[m]);
    }
  }
  // shared link capacity over both directions and both commodities
  for (int li = 0; li < n_links; ++li) {
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < 2; ++c)
      for (int dir = 0; dir < 2; ++dir) row.emplace_back(xvar(c, li, dir), 1.0);
    lp.add_row(row, 'L', static_cast<double>(link_res[li]));
  }
  // allocations must absorb the full demand
  {
    std::vector<std::pair<int, double>> row;
    for (int m = 0; m < n_nodes; ++m)
      if (avar[m] >= 0) row.emplace_back(avar[m], 1.0);
    lp.add_row(row, 'E', static_cast<double>(req.amount));
  }

  lp_solution sol = solve_lp(lp);
  if (sol.status != lp_status::optimal) return std::nullopt;
  // integral solutions only; fractional vertices fall back to sequential routing
  for (double v : sol.values)
    if (std::fabs(v - std::round(v)) > 1e-6) return std::nullopt;

  reroute_result out;
  for (int li = 0; li < n_links; ++li) {
    const auto& l = net.links[li];
    auto get = [&](int c, int dir) {
      return static_cast<mbps_t>(std::llround(sol.values[xvar(c, li, dir)]));
    };
    mbps_t u_ab = get(0, 0), u_ba = get(0, 1), v_ab = get(1, 0), v_ba = get(1, 1);
    mbps_t cu = std::min(u_ab, u_ba);
    u_ab -= cu; u_ba -= cu;
    mbps_t cv = std::min(v_ab, v_ba);
    v_ab -= cv; v_ba -= cv;
    if (u_ab > 0) out.flows_u[{l.a, l.b}] = u_ab;
    if (u_ba > 0) out.flows_u[{l.b, l.a}] = u_ba;
    if (!req.demands_w.empty()) {
      if (v_ab > 0) out.flows_v[{l.a, l.b}] = v_ab;
      if (v_ba > 0) out.flows_v[{l.b, l.a}] = v_ba;
    }
    out.bandwidth_cost += (u_ab + u_ba + v_ab + v_ba) * beta;
  }
  for (int m = 0; m < n_nodes; ++m)
    if (avar[m] >= 0) {
      mbps_t a = static_cast<mbps_t>(std::llround(sol.values[avar[m]]));
      if (a > 0) out.layer_alloc[m] = a;
    }
  return out;
}

// Sequential fallback: route one commodity, subtract what it used, route the
// other. Returns nothing if either stage is infeasible.
inline std::optional<reroute_result> reroute_sequential(const substrate_network& net,
                                                        const std::vector<mbps_t>& link_res,
                                                        const reroute_request& req, money_t beta,
                                                        bool u_first) {
  reroute_result out;
  std::vector<mbps_t> res = link_res;
  auto consume = [&](const std::map<std::pair<int, int>, mbps_t>& flows) {
    for (auto& [arc, f] : flows) {
      const link_record* l = net.link_between(arc.first, arc.second);
      res[net.link_index.at({l->a, l->b})] -= f;
    }
  };

  if (req.demands_w.empty() || u_first) {
    auto r_u = route_between_layers(net, res, req.supplies_u, req.layer_caps, req.amount, beta);
    if (!r_u) return std::nullopt;
    out.flows_u = std::move(r_u->flows);
    out.layer_alloc = std::move(r_u->sink_alloc);
    out.bandwidth_cost = r_u->bandwidth_cost;
    if (req.demands_w.empty()) return out;
    consume(out.flows_u);
    std::vector<std::pair<int, mbps_t>> sources(out.layer_alloc.begin(), out.layer_alloc.end());
    auto r_v = route_between_layers(net, res, sources, req.demands_w, req.amount, beta);
    if (!r_v) return std::nullopt;
    out.flows_v = std::move(r_v->flows);
    out.bandwidth_cost += r_v->bandwidth_cost;
    return out;
  }

  // v first: pick the layer split that suits commodity v, then force u to it
  auto r_v = route_between_layers(net, res, req.layer_caps, req.demands_w, req.amount, beta);
  if (!r_v) return std::nullopt;
  out.flows_v = std::move(r_v->flows);
  out.bandwidth_cost = r_v->bandwidth_cost;
  out.layer_alloc = r_v->source_used;  // what each layer node sent
  consume(out.flows_v);
  std::vector<std::pair<int, mbps_t>> sinks(out.layer_alloc.begin(), out.layer_alloc.end());
  auto r_u = route_between_layers(net, res, req.supplies_u, sinks, req.amount, beta);
  if (!r_u) return std::nullopt;
  out.flows_u = std::move(r_u->flows);
  out.bandwidth_cost += r_u->bandwidth_cost;
  return out;
}

}  // namespace flow_detail

// Reroutes the commodities touching one layer over shared residual capacity.
// Small subproblems get the exact two-commodity LP; larger ones (or fractional
// LP vertices) use sequential single-commodity solves in both orders, keeping
// the cheaper feasible one.
inline std::optional<reroute_result> reroute_commodities(const substrate_network& net,
                                                         const std::vector<mbps_t>& link_res,
                                                         const reroute_request& req, money_t beta,
                                                         int lp_node_threshold = 16) {
  if (req.layer_caps.empty()) return std::nullopt;
  if (!req.demands_w.empty() &&
      static_cast<int>(net.nodes.size()) <= lp_node_threshold) {
    auto lp = flow_detail::reroute_lp(net, link_res, req, beta);
    if (lp) return lp;
  }
  auto a = flow_detail::reroute_sequential(net, link_res, req, beta, true);
  if (req.demands_w.empty()) return a;
  auto b = flow_detail::reroute_sequential(net, link_res, req, beta, false);
  if (a && b) return a->bandwidth_cost <= b->bandwidth_cost ? a : b;
  return a ? a : b;
}

}  // namespace sfc
