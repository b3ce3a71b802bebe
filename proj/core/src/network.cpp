#include "ecofair/network.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

#include "ecofair/error.hpp"

namespace ecofair {

PortNetwork::PortNetwork(std::vector<PortSpec> ports, std::vector<Lane> lanes)
    : ports_(std::move(ports)), lanes_(std::move(lanes)) {
  const auto n = ports_.size();
  if (n < 2) throw InvalidConfig("network needs at least 2 ports");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = ports_[i];
    if (p.id != static_cast<PortId>(i)) {
      throw InvalidConfig("port ids must be 0..P-1 in order (got " + std::to_string(p.id) +
                          " at position " + std::to_string(i) + ")");
    }
    if (p.berth_capacity < 1) throw InvalidConfig("port " + std::to_string(i) + " berth_capacity < 1");
    if (p.crane_capacity < 1) throw InvalidConfig("port " + std::to_string(i) + " crane_capacity < 1");
    if (p.service_hours_per_call < 1) {
      throw InvalidConfig("port " + std::to_string(i) + " service_hours < 1");
    }
  }
  outgoing_.assign(n, {});
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    const auto& lane = lanes_[l];
    if (lane.from < 0 || lane.to < 0 || static_cast<std::size_t>(lane.from) >= n ||
        static_cast<std::size_t>(lane.to) >= n) {
      throw InvalidConfig("lane " + std::to_string(l) + " references an unknown port");
    }
    if (lane.from == lane.to) throw InvalidConfig("lane " + std::to_string(l) + " is a self-loop");
    if (!(lane.distance_nm > 0.0)) throw InvalidConfig("lane " + std::to_string(l) + " distance must be > 0");
    if (!(lane.base_hours > 0.0)) throw InvalidConfig("lane " + std::to_string(l) + " base hours must be > 0");
    outgoing_[static_cast<std::size_t>(lane.from)].push_back(static_cast<LaneId>(l));
  }
  if (!connected_undirected()) throw InvalidConfig("port network is disconnected");
}

std::optional<LaneId> PortNetwork::lane_between(PortId from, PortId to) const {
  for (LaneId l : outgoing(from)) {
    if (lane(l).to == to) return l;
  }
  return std::nullopt;
}

bool PortNetwork::connected_undirected() const {
  const auto n = ports_.size();
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& l : lanes_) {
    adj[static_cast<std::size_t>(l.from)].push_back(static_cast<std::size_t>(l.to));
    adj[static_cast<std::size_t>(l.to)].push_back(static_cast<std::size_t>(l.from));
  }
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

std::optional<Route> PortNetwork::shortest_route(PortId from, PortId to,
                                                 const std::vector<bool>& excluded) const {
  const auto n = ports_.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<LaneId> via(n, -1);
  std::vector<bool> done(n, false);
  dist[static_cast<std::size_t>(from)] = 0.0;
  // O(P^2) Dijkstra; networks are small and this keeps tie-breaking by index.
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && dist[i] < inf && (u == n || dist[i] < dist[u])) u = i;
    }
    if (u == n) break;
    done[u] = true;
    if (static_cast<PortId>(u) == to) break;
    for (LaneId l : outgoing_[u]) {
      if (!excluded.empty() && excluded[static_cast<std::size_t>(l)]) continue;
      const auto& ln = lanes_[static_cast<std::size_t>(l)];
      const auto v = static_cast<std::size_t>(ln.to);
      const double nd = dist[u] + ln.distance_nm;
      if (nd < dist[v]) {
        dist[v] = nd;
        via[v] = l;
      }
    }
  }
  if (from == to || dist[static_cast<std::size_t>(to)] == inf) return std::nullopt;

  Route route;
  route.distance_nm = dist[static_cast<std::size_t>(to)];
  for (PortId p = to; p != from;) {
    const LaneId l = via[static_cast<std::size_t>(p)];
    route.lanes.push_back(l);
    route.ports.push_back(p);
    p = lanes_[static_cast<std::size_t>(l)].from;
  }
  route.ports.push_back(from);
  std::reverse(route.ports.begin(), route.ports.end());
  std::reverse(route.lanes.begin(), route.lanes.end());
  return route;
}

std::vector<Route> PortNetwork::candidate_routes(PortId from, PortId to, std::size_t k) const {
  std::vector<Route> found;
  if (k == 0) return found;
  auto first = shortest_route(from, to);
  if (!first) return found;
  found.push_back(std::move(*first));

  auto better = [](const Route& a, const Route& b) {
    if (a.distance_nm != b.distance_nm) return a.distance_nm < b.distance_nm;
    return a.ports < b.ports;
  };

  std::vector<bool> excluded(lanes_.size(), false);
  while (found.size() < k) {
    std::optional<Route> best;
    for (std::size_t f = 0; f < found.size(); ++f) {
      for (LaneId l : found[f].lanes) {
        excluded[static_cast<std::size_t>(l)] = true;
        auto cand = shortest_route(from, to, excluded);
        excluded[static_cast<std::size_t>(l)] = false;
        if (!cand) continue;
        if (std::find(found.begin(), found.end(), *cand) != found.end()) continue;
        if (!best || better(*cand, *best)) best = std::move(cand);
      }
    }
    if (!best) break;
    found.push_back(std::move(*best));
  }
  return found;
}

std::vector<int> PortNetwork::hop_counts(PortId from) const {
  std::vector<int> hops(ports_.size(), -1);
  std::queue<PortId> frontier;
  hops[static_cast<std::size_t>(from)] = 0;
  frontier.push(from);
  while (!frontier.empty()) {
    const PortId u = frontier.front();
    frontier.pop();
    for (LaneId l : outgoing(u)) {
      const PortId v = lane(l).to;
      if (hops[static_cast<std::size_t>(v)] < 0) {
        hops[static_cast<std::size_t>(v)] = hops[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return hops;
}

RouteTable::RouteTable(const PortNetwork& network, std::size_t k)
    : ports_(network.port_count()), k_(k), table_(ports_ * ports_) {
  for (std::size_t a = 0; a < ports_; ++a) {
    for (std::size_t b = 0; b < ports_; ++b) {
      if (a == b) continue;
      table_[a * ports_ + b] =
          network.candidate_routes(static_cast<PortId>(a), static_cast<PortId>(b), k);
    }
  }
}

const std::vector<Route>& RouteTable::candidates(PortId from, PortId to) const {
  return table_.at(static_cast<std::size_t>(from) * ports_ + static_cast<std::size_t>(to));
}

}  // namespace ecofair
