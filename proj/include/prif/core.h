#pragma once

// Shared vocabulary for the forwarding library: node and interest
// identities, simulation time, messages and contact intervals.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace prif {

struct NodeId {
  std::uint32_t value{};
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// One interest, and therefore one community. Every node holds exactly one.
struct InterestId {
  std::uint16_t value{};
  friend constexpr auto operator<=>(InterestId, InterestId) = default;
};

/// Seconds since simulation start.
using SimTime = double;
using MessageId = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;

inline constexpr double kSecondsPerMinute = 60.0;

struct Message {
  MessageId id{};
  NodeId source;
  NodeId destination;
  InterestId dest_interest;
  std::uint64_t size_bytes{};
  SimTime created_at{};
  double ttl_minutes{};
  std::uint32_t hop_count{};
  Bytes payload;  // sealed for the destination

  double ttl_seconds() const { return ttl_minutes * kSecondsPerMinute; }
};

/// A message at exactly its TTL age is still alive.
bool message_is_expired(const Message& m, SimTime now);

/// Interval during which two nodes are within radio range. Stored with a < b.
struct ContactEvent {
  NodeId a;
  NodeId b;
  SimTime start{};
  SimTime end{};

  double duration() const { return end - start; }
  bool involves(NodeId n) const { return a == n || b == n; }
  NodeId other(NodeId n) const { return n == a ? b : a; }
};

/// Builds a normalized contact; throws std::invalid_argument when
/// start >= end or both endpoints are the same node.
ContactEvent make_contact(NodeId x, NodeId y, SimTime start, SimTime end);

std::string to_string(NodeId n);

}  // namespace prif

template <>
struct std::hash<prif::NodeId> {
  std::size_t operator()(prif::NodeId n) const noexcept {
    return std::hash<std::uint32_t>{}(n.value);
  }
};

template <>
struct std::hash<prif::InterestId> {
  std::size_t operator()(prif::InterestId i) const noexcept {
    return std::hash<std::uint16_t>{}(i.value);
  }
};
