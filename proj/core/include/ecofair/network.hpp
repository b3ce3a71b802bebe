#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ecofair {

using PortId = int;
using LaneId = int;
using VesselId = int;

/// Weather region a lane belongs to; one scenario chain runs per region.
enum class LaneClass : std::uint8_t { coastal = 0, open_sea = 1 };
inline constexpr std::size_t kRegionCount = 2;

struct PortSpec {
  PortId id = 0;
  int berth_capacity = 1;
  int crane_capacity = 1;
  int service_hours_per_call = 1;

  friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

struct Lane {
  PortId from = 0;
  PortId to = 0;
  double distance_nm = 0.0;
  double base_hours = 0.0;
  LaneClass region = LaneClass::coastal;

  friend bool operator==(const Lane&, const Lane&) = default;
};

/// A simple path through the lane graph.
struct Route {
  std::vector<PortId> ports;
  std::vector<LaneId> lanes;
  double distance_nm = 0.0;

  friend bool operator==(const Route&, const Route&) = default;
};

/// Directed lane graph over ports. Port ids are their indices (0..P-1).
class PortNetwork {
 public:
  PortNetwork() = default;
  /// Throws InvalidConfig unless there are >= 2 ports, ids are 0..P-1,
  /// capacities are >= 1, distances are > 0 and the graph is connected when
  /// lanes are read as undirected.
  PortNetwork(std::vector<PortSpec> ports, std::vector<Lane> lanes);

  std::size_t port_count() const { return ports_.size(); }
  const std::vector<PortSpec>& ports() const { return ports_; }
  const std::vector<Lane>& lanes() const { return lanes_; }
  const Lane& lane(LaneId id) const { return lanes_.at(static_cast<std::size_t>(id)); }
  const std::vector<LaneId>& outgoing(PortId p) const { return outgoing_.at(static_cast<std::size_t>(p)); }
  std::optional<LaneId> lane_between(PortId from, PortId to) const;

  bool connected_undirected() const;

  /// Shortest path by distance, skipping lanes flagged in `excluded`.
  std::optional<Route> shortest_route(PortId from, PortId to,
                                      const std::vector<bool>& excluded = {}) const;

  /// Up to `k` distinct loop-free routes in ascending length, found by
  /// re-running the shortest-path search with single lanes of the already
  /// accepted routes removed.
  std::vector<Route> candidate_routes(PortId from, PortId to, std::size_t k) const;

  /// Minimum number of lanes from `from` to every port (-1 when unreachable).
  std::vector<int> hop_counts(PortId from) const;

  friend bool operator==(const PortNetwork& a, const PortNetwork& b) {
    return a.ports_ == b.ports_ && a.lanes_ == b.lanes_;
  }

 private:
  std::vector<PortSpec> ports_;
  std::vector<Lane> lanes_;
  std::vector<std::vector<LaneId>> outgoing_;
};

/// Candidate routes for every ordered port pair, computed once per network.
class RouteTable {
 public:
  RouteTable() = default;
  RouteTable(const PortNetwork& network, std::size_t k);

  const std::vector<Route>& candidates(PortId from, PortId to) const;
  std::size_t k() const { return k_; }

 private:
  std::size_t ports_ = 0;
  std::size_t k_ = 0;
  std::vector<std::vector<Route>> table_;
};

}  // namespace ecofair
