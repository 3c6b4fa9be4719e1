#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sfc/feasibility.hpp"
#include "sfc/model.hpp"

namespace sfc {

using json = nlohmann::ordered_json;

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

inline const json& field(const json& j, const char* name, const std::string& where) {
  auto it = j.find(name);
  if (it == j.end()) throw io_error(where + ": missing field '" + name + "'");
  return *it;
}

inline mbps_t mbps_field(const json& j, const char* name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw io_error(where + ": field '" + name + "' must be a non-negative integer Mbps value");
  return v.get<std::int64_t>();
}

}  // namespace detail

// {resource_kinds:[...], nodes:[{id, capacity{...}}], links:[{a, b, mbps}]}
inline substrate_network load_network(const std::string& path) {
  json j = detail::parse_file(path);
  substrate_network net;
  for (auto& rk : detail::field(j, "resource_kinds", path))
    net.resource_kinds.push_back(rk.get<std::string>());
  for (auto& nj : detail::field(j, "nodes", path)) {
    node_record n;
    n.id = detail::field(nj, "id", path).get<std::string>();
    n.capacity.assign(net.resource_kinds.size(), 0);
    const json& cap = detail::field(nj, "capacity", path);
    for (auto& [k, v] : cap.items()) {
      int r = net.resource_of(k);
      if (r < 0) throw io_error(path + ": node " + n.id + ": unknown resource '" + k + "'");
      n.capacity[r] = qty_from_double(v.get<double>(), ("node " + n.id + " capacity").c_str());
    }
    net.nodes.push_back(std::move(n));
  }
  for (auto& lj : detail::field(j, "links", path)) {
    link_record l;
    std::string a = detail::field(lj, "a", path).get<std::string>();
    std::string b = detail::field(lj, "b", path).get<std::string>();
    l.mbps = detail::mbps_field(lj, "mbps", path);
    // finalize() validates indices; map names first
    net.node_index.clear();
    for (size_t i = 0; i < net.nodes.size(); ++i) net.node_index.emplace(net.nodes[i].id, i);
    l.a = net.node_of(a);
    l.b = net.node_of(b);
    if (l.a < 0) throw io_error(path + ": link references unknown node '" + a + "'");
    if (l.b < 0) throw io_error(path + ": link references unknown node '" + b + "'");
    net.links.push_back(l);
  }
  try {
    net.finalize();
  } catch (const std::exception& e) {
    throw io_error(path + ": " + e.what());
  }
  return net;
}

inline json network_to_json(const substrate_network& net) {
  json j;
  j["resource_kinds"] = net.resource_kinds;
  j["nodes"] = json::array();
  for (auto& n : net.nodes) {
    json cap = json::object();
    for (size_t r = 0; r < net.resource_kinds.size(); ++r)
      cap[net.resource_kinds[r]] = qty_to_double(n.capacity[r]);
    j["nodes"].push_back({{"id", n.id}, {"capacity", cap}});
  }
  j["links"] = json::array();
  for (auto& l : net.links)
    j["links"].push_back(
        {{"a", net.nodes[l.a].id}, {"b", net.nodes[l.b].id}, {"mbps", l.mbps}});
  return j;
}

// {sf_name: [{name, mbps, demand{...}}], ...}
inline vnf_catalog load_catalog(const std::string& path, const substrate_network& net) {
  json j = detail::parse_file(path);
  vnf_catalog cat;
  for (auto& [sf, types] : j.items()) {
    std::vector<vnf_type> list;
    for (auto& tj : types) {
      vnf_type t;
      t.name = detail::field(tj, "name", path).get<std::string>();
      t.throughput = detail::mbps_field(tj, "mbps", path);
      t.demand.assign(net.resource_kinds.size(), 0);
      for (auto& [k, v] : detail::field(tj, "demand", path).items()) {
        int r = net.resource_of(k);
        if (r < 0) throw io_error(path + ": VNF " + t.name + ": unknown resource '" + k + "'");
        t.demand[r] = qty_from_double(v.get<double>(), ("VNF " + t.name + " demand").c_str());
      }
      list.push_back(std::move(t));
    }
    cat.entries.emplace_back(sf, std::move(list));
  }
  return cat;
}

// {sfs:[...], source, target, mbps} with optional id / lifetime_s.
inline chain_request load_request(const std::string& path) {
  json j = detail::parse_file(path);
  chain_request req;
  for (auto& sf : detail::field(j, "sfs", path)) req.sfs.push_back(sf.get<std::string>());
  req.source = detail::field(j, "source", path).get<std::string>();
  req.target = detail::field(j, "target", path).get<std::string>();
  req.demand = detail::mbps_field(j, "mbps", path);
  if (j.contains("id")) req.id = j["id"].get<std::string>();
  if (j.contains("lifetime_s")) req.lifetime_s = j["lifetime_s"].get<double>();
  return req;
}

// {alpha: {resource: weight, ...}, beta: weight}
inline cost_model load_cost_model(const std::string& path) {
  json j = detail::parse_file(path);
  cost_model cost;
  for (auto& [k, v] : detail::field(j, "alpha", path).items())
    cost.alpha.emplace_back(k, money_from_double(v.get<double>(), ("alpha." + k).c_str()));
  cost.beta = money_from_double(detail::field(j, "beta", path).get<double>(), "beta");
  if (cost.beta < 0) throw io_error(path + ": beta must be >= 0");
  for (auto& a : cost.alpha)
    if (a.second < 0) throw io_error(path + ": alpha weights must be >= 0");
  return cost;
}

// Paper-style default when no cost file is given: first resource (or "cpu"
// if present) weighs 1.00, bandwidth 0.01 per Mbps-hop.
inline cost_model default_cost_model(const substrate_network& net) {
  cost_model cost;
  std::string primary = net.resource_kinds.empty() ? "cpu" : net.resource_kinds.front();
  if (net.resource_of("cpu") >= 0) primary = "cpu";
  for (auto& rk : net.resource_kinds)
    cost.alpha.emplace_back(rk, rk == primary ? kMoneyScale : 0);
  cost.beta = kMoneyScale / 100;  // 0.01
  return cost;
}

inline json deployment_to_json(const substrate_network& net, const chain_context& ctx,
                               const deployment& dep, const cost_model& cost) {
  json j;
  json flows = json::array();
  for (int pos = 0; pos + 1 < ctx.nbar(); ++pos)
    for (auto& [arc, mbps] : dep.flows[pos])
      flows.push_back({{"commodity", pos},
                       {"sf", ctx.positions[pos].sf},
                       {"from", net.nodes[arc.first].id},
                       {"to", net.nodes[arc.second].id},
                       {"mbps", mbps}});
  j["flows"] = std::move(flows);
  json insts = json::array();
  for (auto& [key, count] : dep.instances) {
    auto [pos, type_idx, node] = key;
    insts.push_back({{"node", net.nodes[node].id},
                     {"position", pos},
                     {"sf", ctx.positions[pos].sf},
                     {"vnf", ctx.positions[pos].types[type_idx].name},
                     {"count", count}});
  }
  j["instances"] = std::move(insts);
  json allocs = json::array();
  for (int pos = 0; pos < ctx.nbar(); ++pos)
    for (auto& [node, z] : dep.alloc[pos])
      allocs.push_back({{"node", net.nodes[node].id},
                        {"position", pos},
                        {"sf", ctx.positions[pos].sf},
                        {"mbps", z}});
  j["allocations"] = std::move(allocs);
  auto costs = total_cost(net, ctx, dep, cost);
  j["costs"] = {{"bandwidth", money_str(costs.bandwidth)},
                {"host", money_str(costs.host)},
                {"total", money_str(costs.total)}};
  auto rep = feasibility_check(net, ctx, dep);
  json feas = json::object();
  for (auto& fam : rep.families) feas[family_name(fam.family)] = fam.pass;
  j["feasibility"] = std::move(feas);
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << content;
}

}  // namespace sfc
