#pragma once

// Deterministic tick-driven opportunistic network simulator.
//
// Every tick (1 s by default) nodes move under random-waypoint mobility,
// contacts open and close on radio-range crossings, messages are generated,
// and each open contact moves bytes at the slower endpoint's link rate.
// The hosted router decides which messages cross each contact. Given the
// same scenario (seed included) a run is bit-for-bit reproducible.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prif/auth.h"
#include "prif/baselines.h"
#include "prif/energy.h"
#include "prif/routing.h"

namespace prif::sim {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NodeClass { Pedestrian, Car, Bus };
enum class RouterKind { Prif, PrifNoPrivacy, Epidemic, Prophet };
enum class SweepAxis { Buffer, Ttl, Time };

std::string_view to_string(NodeClass c);
std::string_view to_string(RouterKind r);
std::string_view to_string(SweepAxis a);
std::optional<NodeClass> parse_node_class(std::string_view s);
std::optional<RouterKind> parse_router(std::string_view s);
std::optional<SweepAxis> parse_axis(std::string_view s);

/// Comma-separated list of valid router names.
std::string router_names();

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool valid() const { return lo <= hi; }
};

struct NodeGroup {
  std::string name;
  NodeClass cls = NodeClass::Pedestrian;
  int count = 0;
  Range speed;         // m/s
  Range pause;         // s
  double radio_range;  // m
  double link_rate;    // bit/s
  bool generates_messages = true;
};

struct Scenario {
  std::string name = "custom";
  double width = 4500.0;
  double height = 3400.0;
  std::vector<NodeGroup> groups;
  int interests = 4;
  Range message_interval{50.0, 90.0};
  Range message_size{500.0 * 1024, 1024.0 * 1024};  // bytes
  double ttl_minutes = 600.0;
  std::uint64_t buffer_capacity = 10ull * 1024 * 1024;
  double sim_duration = 400000.0;
  double warmup = 5000.0;
  double tick = 1.0;
  std::uint64_t seed = 1;
  RouterKind router = RouterKind::Prif;
  EnergyParams energy;
  ProphetParams prophet;
  unsigned crypto_bits_p = 2048;  // 0 selects the toy group
  unsigned crypto_bits_q = 256;
  std::size_t payload_bytes = 64;    // sealed plaintext; size_bytes is the accounted size
  bool per_node_interval = false;    // each generating node draws its own interval
  bool forward_and_delete = false;   // carrier drops its copy after a relay
  bool instant_antipackets = false;  // a delivery purges every buffer at once
  bool baseline_antipackets = false; // Epidemic/PRoPHET also gossip delivered ids
  bool charge_handshake = false;     // handshake bytes consume link budget
  bool bus_energy = true;            // buses take part in community energy
};

/// 2 pedestrian groups, 2 car groups (40 nodes each) and 6 buses.
Scenario paper_preset();
/// 2 pedestrian groups and 1 car group of 20, 3 buses, 40 000 s.
Scenario desk_preset();

/// Throws ScenarioError listing every problem found.
void validate(const Scenario& s);
std::size_t node_count(const Scenario& s);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(Vec2 a, Vec2 b);

class RandomWaypoint {
 public:
  RandomWaypoint(double width, double height, std::uint64_t seed);

  std::size_t add_node(Range speed, Range pause);
  /// Advances every node from `now` to `now + dt`.
  void step(SimTime now, double dt);

  const std::vector<Vec2>& positions() const { return pos_; }
  Vec2 waypoint(std::size_t i) const { return nodes_[i].target; }
  double speed(std::size_t i) const { return nodes_[i].speed; }
  bool paused(std::size_t i, SimTime t) const { return t < nodes_[i].pause_until; }
  /// Test hook: place a node and its waypoint.
  void place(std::size_t i, Vec2 pos, Vec2 target, double speed);

 private:
  struct State {
    Vec2 target;
    double speed = 0.0;
    SimTime pause_until = 0.0;
    Range speed_range;
    Range pause_range;
  };
  Vec2 sample_point();
  double sample(Range r);

  double width_;
  double height_;
  std::mt19937_64 rng_;
  std::vector<Vec2> pos_;
  std::vector<State> nodes_;
};

struct ContactChange {
  std::size_t a;
  std::size_t b;  // a < b
  bool up;
};

/// Tracks which pairs are within min(range_a, range_b) of each other.
class ContactDetector {
 public:
  ContactDetector(std::vector<double> radio_ranges, double width, double height);

  /// Downs first, then ups; each group ordered by (a, b).
  std::vector<ContactChange> update(std::span<const Vec2> positions);
  const std::vector<std::pair<std::size_t, std::size_t>>& active() const { return active_; }

 private:
  std::vector<double> ranges_;
  double cell_;
  std::vector<std::pair<std::size_t, std::size_t>> active_;
  std::vector<std::pair<std::size_t, std::size_t>> scratch_;
  long cols_;
  long rows_;
  std::vector<int> head_;  // first node per cell
  std::vector<int> next_;  // next node in the same cell
};

struct MetricsReport {
  std::uint64_t created = 0;
  std::uint64_t delivered = 0;  // distinct
  std::uint64_t relayed = 0;    // completed transfers, deliveries included
  std::uint64_t dropped = 0;    // messages whose last copy was evicted
  std::uint64_t expired = 0;    // messages whose last copy timed out
  std::uint64_t buffered = 0;   // messages with a live copy at the end
  std::uint64_t rejected_oversize = 0;
  std::uint64_t direct_deliveries = 0;
  std::uint64_t drop_events = 0;
  std::uint64_t contacts = 0;
  std::uint64_t authenticated_contacts = 0;
  std::uint64_t integrity_errors = 0;
  double delivery_ratio = 0.0;
  double overhead_ratio = 0.0;
  double avg_hop_count = 0.0;
  bool overhead_undefined = false;  // no deliveries: overhead_ratio holds `relayed`
};

/// Data frame on the wire: 0x03 || id u64 || src u32 || dst u32 ||
/// len||destination community label || size u64 || hops u32 || len||payload.
inline constexpr std::uint8_t kDataTag = 0x03;

struct RunOptions {
  std::ostream* trace = nullptr;       // CSV: time,event,a,b,msg,detail
  auth::FrameSink* wire = nullptr;     // every frame put on the air
  std::vector<std::uint32_t> revoked_nodes;  // nodes the TA revokes before the run
  std::vector<InterestId>* node_interests = nullptr;  // filled with each node's interest
};

MetricsReport run(const Scenario& scenario, const RunOptions& options = {});

/// Scenario with one axis replaced: buffer in bytes, TTL in minutes, time in
/// seconds of simulated duration.
Scenario apply_axis(Scenario s, SweepAxis axis, double value);

struct SweepPoint {
  RouterKind router;
  double axis_value;
  std::uint64_t seed;
  MetricsReport report;
};

/// One independent run per (router, value, seed), executed on up to `jobs`
/// threads. Output order is (router, value, seed) regardless of `jobs`.
std::vector<SweepPoint> run_sweep(const Scenario& base, SweepAxis axis,
                                  std::span<const double> values,
                                  std::span<const std::uint64_t> seeds,
                                  std::span<const RouterKind> routers, unsigned jobs = 1);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1)
};

Stat summarize(std::span<const double> xs);

struct SweepAggregate {
  RouterKind router;
  double axis_value;
  std::size_t runs;
  Stat delivery_ratio;
  Stat overhead_ratio;
  Stat avg_hop_count;
};

std::vector<SweepAggregate> aggregate(std::span<const SweepPoint> points);

}  // namespace prif::sim
