#include "prif/sim.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "prif/wire.h"

namespace prif::sim {

namespace {

constexpr std::uint64_t kMB = 1024ull * 1024;

// Independent random streams derived from the scenario seed.
enum Stream : std::uint64_t {
  kMobility = 1,
  kTraffic = 2,
  kInterests = 3,
  kCrypto = 4,
  kHandshake = 5,
  kSeal = 6,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  // splitmix64 over (seed, stream)
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(s) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform(std::mt19937_64& rng, Range r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

NodeGroup make_group(std::string name, NodeClass cls, int count, bool generates) {
  NodeGroup g;
  g.name = std::move(name);
  g.cls = cls;
  g.count = count;
  g.pause = {100.0, 200.0};
  g.generates_messages = generates;
  switch (cls) {
    case NodeClass::Pedestrian: g.speed = {0.5, 1.5}; break;
    case NodeClass::Car: g.speed = {2.7, 13.9}; break;
    case NodeClass::Bus: g.speed = {7.0, 10.0}; break;
  }
  if (cls == NodeClass::Bus) {
    g.radio_range = 100.0;
    g.link_rate = 10e6;
  } else {
    g.radio_range = 10.0;
    g.link_rate = 2e6;
  }
  return g;
}

}  // namespace

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Pedestrian: return "pedestrian";
    case NodeClass::Car: return "car";
    case NodeClass::Bus: return "bus";
  }
  return "?";
}

std::string_view to_string(RouterKind r) {
  switch (r) {
    case RouterKind::Prif: return "prif";
    case RouterKind::PrifNoPrivacy: return "prif-noprivacy";
    case RouterKind::Epidemic: return "epidemic";
    case RouterKind::Prophet: return "prophet";
  }
  return "?";
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Buffer: return "buffer";
    case SweepAxis::Ttl: return "ttl";
    case SweepAxis::Time: return "time";
  }
  return "?";
}

std::optional<NodeClass> parse_node_class(std::string_view s) {
  for (NodeClass c : {NodeClass::Pedestrian, NodeClass::Car, NodeClass::Bus}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

std::optional<RouterKind> parse_router(std::string_view s) {
  for (RouterKind r : {RouterKind::Prif, RouterKind::PrifNoPrivacy, RouterKind::Epidemic,
                       RouterKind::Prophet}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

std::optional<SweepAxis> parse_axis(std::string_view s) {
  for (SweepAxis a : {SweepAxis::Buffer, SweepAxis::Ttl, SweepAxis::Time}) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

std::string router_names() { return "prif, prif-noprivacy, epidemic, prophet"; }

Scenario paper_preset() {
  Scenario s;
  s.name = "paper";
  s.groups = {
      make_group("pedestrians-1", NodeClass::Pedestrian, 40, true),
      make_group("pedestrians-2", NodeClass::Pedestrian, 40, true),
      make_group("cars-1", NodeClass::Car, 40, true),
      make_group("cars-2", NodeClass::Car, 40, true),
      make_group("buses", NodeClass::Bus, 6, false),
  };
  return s;
}

Scenario desk_preset() {
  Scenario s;
  s.name = "desk";
  s.groups = {
      make_group("pedestrians-1", NodeClass::Pedestrian, 20, true),
      make_group("pedestrians-2", NodeClass::Pedestrian, 20, true),
      make_group("cars", NodeClass::Car, 20, true),
      make_group("buses", NodeClass::Bus, 3, false),
  };
  s.sim_duration = 40000.0;
  s.buffer_capacity = 10 * kMB;
  s.message_size = {100.0 * 1024, 205.0 * 1024};
  s.crypto_bits_p = 512;
  s.crypto_bits_q = 160;
  return s;
}

std::size_t node_count(const Scenario& s) {
  std::size_t n = 0;
  for (const NodeGroup& g : s.groups) n += static_cast<std::size_t>(std::max(g.count, 0));
  return n;
}

void validate(const Scenario& s) {
  std::vector<std::string> problems;
  const auto check = [&](bool ok, std::string what) {
    if (!ok) problems.push_back(std::move(what));
  };
  const auto check_range = [&](Range r, double min, const std::string& what) {
    check(std::isfinite(r.lo) && std::isfinite(r.hi) && r.valid(),
          what + " range is empty or not finite");
    check(r.lo >= min, what + " range must start at or above " + std::to_string(min));
  };

  check(s.width > 0 && s.height > 0, "area must have positive width and height");
  check(!s.groups.empty(), "scenario has no node groups");
  bool any_generator = false;
  std::size_t total = 0;
  for (const NodeGroup& g : s.groups) {
    const std::string where = "group '" + g.name + "'";
    check(g.count > 0, where + " must have at least one node");
    check_range(g.speed, 0.0, where + " speed");
    check(g.speed.hi > 0, where + " speed must allow movement");
    check_range(g.pause, 0.0, where + " pause");
    check(g.radio_range > 0, where + " radio range must be positive");
    check(g.link_rate > 0, where + " link rate must be positive");
    if (g.count > 0) total += static_cast<std::size_t>(g.count);
    any_generator = any_generator || (g.generates_messages && g.count > 0);
  }
  if (!s.groups.empty()) {
    check(any_generator, "no group generates messages");
    check(total >= 2, "need at least two nodes");
  }
  check(s.interests >= 1 && s.interests <= 65535, "interests must be in [1, 65535]");
  check_range(s.message_interval, 0.0, "message interval");
  check(s.message_interval.lo > 0, "message interval must be positive");
  check_range(s.message_size, 1.0, "message size");
  check(s.ttl_minutes > 0, "ttl must be positive");
  check(s.buffer_capacity > 0, "buffer capacity must be positive");
  check(s.tick > 0, "tick must be positive");
  check(s.warmup >= 0, "warmup must be non-negative");
  check(s.warmup < s.sim_duration, "warmup must be shorter than the simulation");
  check(s.energy.alpha >= 0 && s.energy.alpha <= 1, "energy alpha must be in [0, 1]");
  check(s.energy.beta >= 0 && s.energy.beta <= 1, "energy beta must be in [0, 1]");
  check(s.energy.gamma > 0 && s.energy.gamma <= 1, "energy gamma must be in (0, 1]");
  check(s.energy.window > 0, "energy window must be positive");
  check(s.prophet.p_init > 0 && s.prophet.p_init <= 1, "prophet p_init must be in (0, 1]");
  check(s.prophet.beta >= 0 && s.prophet.beta <= 1, "prophet beta must be in [0, 1]");
  check(s.prophet.gamma > 0 && s.prophet.gamma <= 1, "prophet gamma must be in (0, 1]");
  check(s.prophet.time_unit > 0, "prophet time unit must be positive");
  if (s.crypto_bits_p != 0) {
    check(s.crypto_bits_q >= 16 && s.crypto_bits_p >= s.crypto_bits_q + 16,
          "crypto sizes need bits_q >= 16 and bits_p >= bits_q + 16");
  }
  check(s.payload_bytes >= 8, "payload must be at least 8 bytes");

  if (problems.empty()) return;
  std::string msg = "invalid scenario:";
  for (const std::string& p : problems) msg += "\n  - " + p;
  throw ScenarioError(msg);
}

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

RandomWaypoint::RandomWaypoint(double width, double height, std::uint64_t seed)
    : width_(width), height_(height), rng_(seed) {}

Vec2 RandomWaypoint::sample_point() {
  std::uniform_real_distribution<double> x(0.0, width_);
  std::uniform_real_distribution<double> y(0.0, height_);
  const double px = x(rng_);
  return {px, y(rng_)};
}

double RandomWaypoint::sample(Range r) { return uniform(rng_, r); }

std::size_t RandomWaypoint::add_node(Range speed, Range pause) {
  State st;
  st.speed_range = speed;
  st.pause_range = pause;
  pos_.push_back(sample_point());
  st.target = sample_point();
  st.speed = sample(speed);
  nodes_.push_back(st);
  return nodes_.size() - 1;
}

void RandomWaypoint::place(std::size_t i, Vec2 pos, Vec2 target, double speed) {
  pos_.at(i) = pos;
  nodes_.at(i).target = target;
  nodes_.at(i).speed = speed;
  nodes_.at(i).pause_until = 0.0;
}

void RandomWaypoint::step(SimTime now, double dt) {
  const SimTime until = now + dt;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    State& st = nodes_[i];
    Vec2& p = pos_[i];
    SimTime t = now;
    while (t < until) {
      if (st.pause_until > t) {
        t = std::min(st.pause_until, until);
        continue;
      }
      const double dx = st.target.x - p.x;
      const double dy = st.target.y - p.y;
      const double dist = std::hypot(dx, dy);
      const double reach = st.speed * (until - t);
      if (st.speed <= 0.0) {
        t = until;
      } else if (dist <= reach) {
        p = st.target;
        t += dist / st.speed;
        st.pause_until = t + sample(st.pause_range);
        st.target = sample_point();
        st.speed = sample(st.speed_range);
      } else {
        p.x += dx / dist * reach;
        p.y += dy / dist * reach;
        t = until;
      }
    }
  }
}

ContactDetector::ContactDetector(std::vector<double> radio_ranges, double width, double height)
    : ranges_(std::move(radio_ranges)) {
  cell_ = 1.0;
  for (double r : ranges_) cell_ = std::max(cell_, r);
  cols_ = std::max<long>(1, static_cast<long>(std::ceil(width / cell_)));
  rows_ = std::max<long>(1, static_cast<long>(std::ceil(height / cell_)));
  head_.assign(static_cast<std::size_t>(cols_ * rows_), -1);
  next_.assign(ranges_.size(), -1);
}

std::vector<ContactChange> ContactDetector::update(std::span<const Vec2> positions) {
  // Cells are at least as wide as the largest radio range, so every in-range
  // pair sits in the same or an adjacent cell.
  const auto cell_of = [this](Vec2 p) {
    const long cx = std::clamp(static_cast<long>(std::floor(p.x / cell_)), 0L, cols_ - 1);
    const long cy = std::clamp(static_cast<long>(std::floor(p.y / cell_)), 0L, rows_ - 1);
    return std::make_pair(cx, cy);
  };
  std::fill(head_.begin(), head_.end(), -1);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto [cx, cy] = cell_of(positions[i]);
    int& head = head_[static_cast<std::size_t>(cy * cols_ + cx)];
    next_[i] = head;
    head = static_cast<int>(i);
  }

  scratch_.clear();
  const auto test = [&](std::size_t i, std::size_t j) {
    const double range = std::min(ranges_[i], ranges_[j]);
    const double dx = positions[i].x - positions[j].x;
    const double dy = positions[i].y - positions[j].y;
    if (dx * dx + dy * dy <= range * range) scratch_.emplace_back(std::min(i, j), std::max(i, j));
  };
  static constexpr std::array<std::pair<long, long>, 4> kForward = {{{1, -1}, {1, 0}, {1, 1}, {0, 1}}};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto [cx, cy] = cell_of(positions[i]);
    for (int j = next_[i]; j >= 0; j = next_[static_cast<std::size_t>(j)]) {
      test(i, static_cast<std::size_t>(j));
    }
    for (const auto& [dx, dy] : kForward) {
      const long nx = cx + dx;
      const long ny = cy + dy;
      if (nx < 0 || nx >= cols_ || ny < 0 || ny >= rows_) continue;
      for (int j = head_[static_cast<std::size_t>(ny * cols_ + nx)]; j >= 0;
           j = next_[static_cast<std::size_t>(j)]) {
        test(i, static_cast<std::size_t>(j));
      }
    }
  }
  std::sort(scratch_.begin(), scratch_.end());

  std::vector<ContactChange> changes;
  std::vector<std::pair<std::size_t, std::size_t>> downs;
  std::vector<std::pair<std::size_t, std::size_t>> ups;
  std::set_difference(active_.begin(), active_.end(), scratch_.begin(), scratch_.end(),
                      std::back_inserter(downs));
  std::set_difference(scratch_.begin(), scratch_.end(), active_.begin(), active_.end(),
                      std::back_inserter(ups));
  for (const auto& [a, b] : downs) changes.push_back({a, b, false});
  for (const auto& [a, b] : ups) changes.push_back({a, b, true});
  std::swap(active_, scratch_);
  return changes;
}

namespace {

struct Node {
  RouterState state;
  ProphetState prophet;
  NodeClass cls;
  double radio_range;
  double link_rate;
  bool generates;
};

struct Transfer {
  std::size_t from;
  std::size_t to;
  Message copy;
  Action action;
  double remaining;  // bytes
};

struct Link {
  SimTime start = 0.0;
  bool usable = false;
  double rate = 0.0;    // bytes per second
  double credit = 0.0;  // bytes available this tick
  bool a_turn = true;
  std::optional<Transfer> current;
  std::set<std::pair<std::size_t, MessageId>> considered;  // (sender, message)
};

struct Fate {
  int copies = 0;
  bool delivered = false;
  bool rejected = false;
  bool last_loss_expired = false;
};

enum class Loss { Expired, Evicted, Cleared, Moved };

class CountingSink : public auth::FrameSink {
 public:
  explicit CountingSink(auth::FrameSink* inner) : inner_(inner) {}
  void frame(NodeId from, NodeId to, std::span<const std::uint8_t> bytes) override {
    bytes_ += bytes.size();
    if (inner_) inner_->frame(from, to, bytes);
  }
  std::size_t take() { return std::exchange(bytes_, 0); }

 private:
  auth::FrameSink* inner_;
  std::size_t bytes_ = 0;
};

class Engine {
 public:
  Engine(const Scenario& s, const RunOptions& opt);
  MetricsReport run();

 private:
  void setup_crypto();
  void setup_nodes();

  void trace(SimTime t, const char* event, long a, long b, long msg, std::string_view detail = {});

  void contact_up(std::size_t a, std::size_t b, SimTime now);
  void contact_down(std::size_t a, std::size_t b, SimTime now);
  void generate(SimTime now);
  void create_message(std::size_t src, SimTime now);
  void purge_expired(SimTime now);
  void pump(std::size_t a, std::size_t b, Link& link, SimTime now);
  std::optional<Transfer> next_transfer(std::size_t from, std::size_t to, Link& link, SimTime now);
  void complete(const Transfer& tr, SimTime now);

  void remove_copy(const Message& m, Loss why, SimTime now, std::size_t node);
  void account_admit(const AdmitResult& r, std::size_t node, SimTime now);
  AdmitResult admit(std::size_t node, Message m, SimTime now);
  std::vector<const Message*> schedule(std::size_t node, SimTime now) const;
  ForwardDecision decide(std::size_t from, std::size_t to, const Message& m, SimTime now) const;
  void emit_data_frame(const Transfer& tr);

  bool energy_router() const {
    return s_.router == RouterKind::Prif || s_.router == RouterKind::PrifNoPrivacy;
  }
  bool uses_antipackets() const { return energy_router() || s_.baseline_antipackets; }

  const Scenario& s_;
  const RunOptions& opt_;
  std::mt19937_64 traffic_rng_;
  std::mt19937_64 interest_rng_;
  Drbg crypto_rng_;
  Drbg handshake_rng_;
  Drbg seal_rng_;

  auth::SystemParams params_;
  std::vector<auth::GroupParams> groups_;  // one per interest
  auth::GroupDirectory directory_;
  auth::RevocationList revoked_;
  std::map<std::string, InterestId, std::less<>> communities_;
  std::map<InterestId, std::string> gid_of_;
  std::optional<PayloadSealer> sealer_;
  CountingSink sink_;

  std::vector<Node> nodes_;
  std::vector<std::size_t> generators_;
  std::map<std::pair<std::size_t, std::size_t>, Link> links_;
  std::vector<Fate> fates_;
  std::vector<SimTime> next_generation_;
  MetricsReport report_;
  std::uint64_t hop_sum_ = 0;
};

Engine::Engine(const Scenario& s, const RunOptions& opt)
    : s_(s),
      opt_(opt),
      traffic_rng_(stream_seed(s.seed, kTraffic)),
      interest_rng_(stream_seed(s.seed, kInterests)),
      crypto_rng_(s.seed, kCrypto),
      handshake_rng_(s.seed, kHandshake),
      seal_rng_(s.seed, kSeal),
      sink_(opt.wire) {
  setup_crypto();
  setup_nodes();
}

void Engine::setup_crypto() {
  params_ = s_.crypto_bits_p == 0 ? auth::toy_params()
                                  : auth::ta_setup(s_.crypto_bits_p, s_.crypto_bits_q, crypto_rng_);
  for (int i = 0; i < s_.interests; ++i) {
    const InterestId interest{static_cast<std::uint16_t>(i)};
    std::string gid;
    do {
      gid = to_hex(crypto_rng_.bytes(8));
    } while (communities_.contains(gid));
    groups_.push_back(auth::ta_create_group(params_, gid, crypto_rng_));
    directory_.publish(gid, groups_.back().y);
    communities_.emplace(gid, interest);
    gid_of_.emplace(interest, gid);
  }
  sealer_.emplace(crypto_rng_);
}

void Engine::setup_nodes() {
  std::uniform_int_distribution<int> pick_interest(0, s_.interests - 1);
  for (const NodeGroup& g : s_.groups) {
    for (int k = 0; k < g.count; ++k) {
      const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
      const InterestId interest{static_cast<std::uint16_t>(pick_interest(interest_rng_))};
      const auth::GroupParams& group = groups_[interest.value];
      RouterState state(id, interest, group.gid, s_.buffer_capacity, s_.energy);
      state.cert = auth::ta_register(group, params_, crypto_rng_);
      state.seal_key = sealer_->key_for(state.cert.id);
      state.tracks_energy = s_.bus_energy || g.cls != NodeClass::Bus;
      if (g.generates_messages) generators_.push_back(nodes_.size());
      nodes_.push_back(Node{std::move(state), ProphetState(id, s_.prophet), g.cls,
                            g.radio_range, g.link_rate, g.generates_messages});
    }
  }
  if (opt_.node_interests) {
    opt_.node_interests->clear();
    for (const Node& n : nodes_) opt_.node_interests->push_back(n.state.interest);
  }
  for (std::uint32_t n : opt_.revoked_nodes) {
    if (n >= nodes_.size()) throw ScenarioError("revoked node out of range: " + std::to_string(n));
    revoked_.revoke(nodes_[n].state.cert.id);
  }
}

void Engine::trace(SimTime t, const char* event, long a, long b, long msg,
                   std::string_view detail) {
  if (!opt_.trace) return;
  char buf[160];
  int n = std::snprintf(buf, sizeof buf, "%.3f,%s,", t, event);
  const auto put = [&](long v) {
    if (v >= 0) n += std::snprintf(buf + n, sizeof buf - n, "%ld", v);
    n += std::snprintf(buf + n, sizeof buf - n, ",");
  };
  put(a);
  put(b);
  put(msg);
  *opt_.trace << std::string_view(buf, static_cast<std::size_t>(n)) << detail << '\n';
}

void Engine::remove_copy(const Message& m, Loss why, SimTime now, std::size_t node) {
  Fate& f = fates_[m.id];
  --f.copies;
  switch (why) {
    case Loss::Expired:
      f.last_loss_expired = true;
      trace(now, "expire", static_cast<long>(node), -1, static_cast<long>(m.id));
      break;
    case Loss::Evicted:
      f.last_loss_expired = false;
      ++report_.drop_events;
      trace(now, "drop", static_cast<long>(node), -1, static_cast<long>(m.id));
      break;
    case Loss::Cleared:
      trace(now, "clear", static_cast<long>(node), -1, static_cast<long>(m.id));
      break;
    case Loss::Moved:
      break;
  }
}

void Engine::account_admit(const AdmitResult& r, std::size_t node, SimTime now) {
  for (const Message& m : r.expired) remove_copy(m, Loss::Expired, now, node);
  for (const Message& m : r.evicted) remove_copy(m, Loss::Evicted, now, node);
}

AdmitResult Engine::admit(std::size_t node, Message m, SimTime now) {
  RouterState& st = nodes_[node].state;
  if (energy_router()) return admit_message(st, std::move(m), now);
  // Baselines: drop the oldest-received message first.
  static const EvictionPolicy oldest_first = [](const RouterState& c, SimTime) {
    std::vector<std::pair<SimTime, MessageId>> order;
    for (const Message& x : c.buffer.messages()) order.emplace_back(c.received_at.at(x.id), x.id);
    std::sort(order.begin(), order.end());
    std::vector<MessageId> ids;
    for (const auto& [_, id] : order) ids.push_back(id);
    return ids;
  };
  return admit_with_policy(st, std::move(m), now, oldest_first);
}

std::vector<const Message*> Engine::schedule(std::size_t node, SimTime now) const {
  const RouterState& st = nodes_[node].state;
  if (energy_router()) return schedule_messages(st, now);
  std::vector<const Message*> out;
  for (const Message& m : st.buffer.messages()) out.push_back(&m);
  std::sort(out.begin(), out.end(), [&](const Message* x, const Message* y) {
    const SimTime rx = st.received_at.at(x->id);
    const SimTime ry = st.received_at.at(y->id);
    if (rx != ry) return rx < ry;
    return x->id < y->id;
  });
  return out;
}

ForwardDecision Engine::decide(std::size_t from, std::size_t to, const Message& m,
                               SimTime now) const {
  const Node& c = nodes_[from];
  const Node& p = nodes_[to];
  switch (s_.router) {
    case RouterKind::Prif:
    case RouterKind::PrifNoPrivacy: {
      const InterestId community = c.state.peers_verified.at(p.state.node).community;
      return decide_forward(c.state, view_of(p.state, community), m, now);
    }
    case RouterKind::Epidemic:
      return epidemic_decide(p.state.node, false, m);
    case RouterKind::Prophet:
      return prophet_decide(c.prophet, p.prophet, false, m, now);
  }
  return {};
}

void Engine::contact_up(std::size_t a, std::size_t b, SimTime now) {
  ++report_.contacts;
  Node& na = nodes_[a];
  Node& nb = nodes_[b];
  trace(now, "up", static_cast<long>(a), static_cast<long>(b), -1);
  bool usable = true;
  switch (s_.router) {
    case RouterKind::Prif:
      usable = on_contact_start(na.state, nb.state,
                                AuthContext{&params_, &directory_, &revoked_, &communities_},
                                handshake_rng_, &sink_);
      break;
    case RouterKind::PrifNoPrivacy:
      usable = on_contact_start_plain(na.state, nb.state, gid_of_, &sink_);
      break;
    case RouterKind::Epidemic:
      break;
    case RouterKind::Prophet:
      prophet_contact(na.prophet, nb.prophet, now);
      break;
  }
  const std::size_t handshake_bytes = sink_.take();
  if (!usable) trace(now, "auth_fail", static_cast<long>(a), static_cast<long>(b), -1);
  if (usable) ++report_.authenticated_contacts;

  if (usable && uses_antipackets()) {
    const AntiPacketResult ap = exchange_antipackets(na.state, nb.state);
    for (MessageId id : ap.dropped_by_a) {
      Message stub;
      stub.id = id;
      remove_copy(stub, Loss::Cleared, now, a);
    }
    for (MessageId id : ap.dropped_by_b) {
      Message stub;
      stub.id = id;
      remove_copy(stub, Loss::Cleared, now, b);
    }
  }

  Link link;
  link.start = now;
  link.usable = usable;
  link.rate = std::min(na.link_rate, nb.link_rate) / 8.0;
  if (s_.charge_handshake) link.credit = -static_cast<double>(handshake_bytes);
  links_.emplace(std::make_pair(a, b), std::move(link));
}

void Engine::contact_down(std::size_t a, std::size_t b, SimTime now) {
  const auto it = links_.find({a, b});
  if (it == links_.end()) return;
  Link& link = it->second;
  if (link.current) {
    trace(now, "abort", static_cast<long>(link.current->from), static_cast<long>(link.current->to),
          static_cast<long>(link.current->copy.id));
  }
  trace(now, "down", static_cast<long>(a), static_cast<long>(b), -1);
  if (energy_router()) {
    const ContactEvent contact = make_contact(nodes_[a].state.node, nodes_[b].state.node,
                                              link.start, now);
    on_contact_end(nodes_[a].state, nodes_[b].state, contact);
  }
  links_.erase(it);
}

void Engine::create_message(std::size_t src, SimTime now) {
  const std::size_t n = nodes_.size();
  std::uniform_int_distribution<std::size_t> pick_dst(0, n - 2);
  std::size_t dst = pick_dst(traffic_rng_);
  if (dst >= src) ++dst;
  const double size = uniform(traffic_rng_, s_.message_size);

  Message m;
  m.id = fates_.size();
  m.source = nodes_[src].state.node;
  m.destination = nodes_[dst].state.node;
  m.dest_interest = nodes_[dst].state.interest;
  m.size_bytes = static_cast<std::uint64_t>(std::llround(size));
  m.created_at = now;
  m.ttl_minutes = s_.ttl_minutes;
  Bytes plain(s_.payload_bytes, 0);
  for (int i = 0; i < 8; ++i) plain[i] = static_cast<std::uint8_t>(m.id >> (56 - 8 * i));
  m.payload = sealer_->seal(plain, nodes_[dst].state.pseudo_identity(), seal_rng_);

  fates_.emplace_back();
  ++report_.created;
  trace(now, "create", static_cast<long>(src), static_cast<long>(dst), static_cast<long>(m.id),
        std::to_string(m.size_bytes));
  const MessageId id = m.id;
  const AdmitResult r = admit(src, std::move(m), now);
  account_admit(r, src, now);
  if (r.admitted()) {
    ++fates_[id].copies;
  } else {
    fates_[id].rejected = true;
    ++report_.rejected_oversize;
    trace(now, "reject", static_cast<long>(src), -1, static_cast<long>(id));
  }
}

void Engine::generate(SimTime now) {
  if (s_.per_node_interval) {
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      while (next_generation_[g] <= now) {
        create_message(generators_[g], next_generation_[g]);
        next_generation_[g] += uniform(traffic_rng_, s_.message_interval);
      }
    }
    return;
  }
  while (next_generation_[0] <= now) {
    std::uniform_int_distribution<std::size_t> pick(0, generators_.size() - 1);
    const std::size_t src = generators_[pick(traffic_rng_)];
    create_message(src, next_generation_[0]);
    next_generation_[0] += uniform(traffic_rng_, s_.message_interval);
  }
}

void Engine::purge_expired(SimTime now) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    RouterState& st = nodes_[i].state;
    if (st.buffer.empty()) continue;
    for (const Message& m : st.buffer.purge_expired(now)) {
      st.received_at.erase(m.id);
      remove_copy(m, Loss::Expired, now, i);
    }
  }
}

std::optional<Transfer> Engine::next_transfer(std::size_t from, std::size_t to, Link& link,
                                              SimTime now) {
  const RouterState& peer = nodes_[to].state;
  std::vector<const Message*> order = schedule(from, now);
  // Messages addressed to the peer go first, for every router.
  std::stable_partition(order.begin(), order.end(),
                        [&](const Message* m) { return m->destination == peer.node; });
  for (const Message* m : order) {
    if (link.considered.contains({from, m->id})) continue;
    if (message_is_expired(*m, now)) continue;
    if (peer.buffer.contains(m->id) || peer.delivered_ids.contains(m->id)) continue;
    link.considered.insert({from, m->id});
    const ForwardDecision d = decide(from, to, *m, now);
    if (opt_.trace) {
      std::string detail = to_string(d.action);
      detail += ':';
      detail += to_string(d.reason);
      trace(now, "decide", static_cast<long>(from), static_cast<long>(to),
            static_cast<long>(m->id), detail);
    }
    if (d.action == Action::Hold) continue;
    return Transfer{from, to, *m, d.action, static_cast<double>(m->size_bytes)};
  }
  return std::nullopt;
}

void Engine::emit_data_frame(const Transfer& tr) {
  if (!opt_.wire) return;
  const Message& m = tr.copy;
  ByteWriter w;
  w.u8(kDataTag).u64(m.id).u32(m.source.value).u32(m.destination.value);
  switch (s_.router) {
    case RouterKind::Prif:
      w.field(std::string_view(gid_of_.at(m.dest_interest)));
      break;
    case RouterKind::PrifNoPrivacy: {
      ByteWriter label;
      label.u16(m.dest_interest.value);
      w.field(std::span<const std::uint8_t>(label.bytes()));
      break;
    }
    default:
      w.field(std::string_view());
      break;
  }
  w.u64(m.size_bytes).u32(m.hop_count);
  w.field(std::span<const std::uint8_t>(m.payload));
  opt_.wire->frame(nodes_[tr.from].state.node, nodes_[tr.to].state.node, w.bytes());
}

void Engine::complete(const Transfer& tr, SimTime now) {
  Message m = tr.copy;
  m.hop_count += 1;
  if (message_is_expired(m, now)) {
    trace(now, "abort", static_cast<long>(tr.from), static_cast<long>(tr.to),
          static_cast<long>(m.id), "expired");
    return;
  }
  ++report_.relayed;
  emit_data_frame(tr);
  RouterState& from = nodes_[tr.from].state;
  RouterState& to = nodes_[tr.to].state;

  if (tr.action == Action::Deliver) {
    const DeliveryResult r = process_delivery(to, m);
    trace(now, "deliver", static_cast<long>(tr.from), static_cast<long>(tr.to),
          static_cast<long>(m.id), std::to_string(m.hop_count));
    if (r.first_copy) {
      Fate& f = fates_[m.id];
      f.delivered = true;
      ++report_.delivered;
      hop_sum_ += m.hop_count;
      if (m.hop_count == 1) ++report_.direct_deliveries;
    } else if (!r.integrity_ok && !to.delivered_ids.contains(m.id)) {
      ++report_.integrity_errors;
    }
    if (uses_antipackets()) from.delivered_ids.insert(m.id);
    if (auto gone = from.buffer.erase(m.id)) {
      from.received_at.erase(m.id);
      remove_copy(*gone, Loss::Cleared, now, tr.from);
    }
    if (s_.instant_antipackets) {
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        RouterState& st = nodes_[i].state;
        st.delivered_ids.insert(m.id);
        if (auto gone = st.buffer.erase(m.id)) {
          st.received_at.erase(m.id);
          remove_copy(*gone, Loss::Cleared, now, i);
        }
      }
    }
    return;
  }

  const MessageId id = m.id;
  const AdmitResult r = admit(tr.to, std::move(m), now);
  account_admit(r, tr.to, now);
  if (!r.admitted()) {
    trace(now, "refuse", static_cast<long>(tr.from), static_cast<long>(tr.to),
          static_cast<long>(id));
    return;
  }
  ++fates_[id].copies;
  trace(now, "relay", static_cast<long>(tr.from), static_cast<long>(tr.to), static_cast<long>(id));
  if (s_.forward_and_delete) {
    if (auto gone = from.buffer.erase(id)) {
      from.received_at.erase(id);
      remove_copy(*gone, Loss::Moved, now, tr.from);
    }
  }
}

void Engine::pump(std::size_t a, std::size_t b, Link& link, SimTime now) {
  if (!link.usable) return;
  link.credit += link.rate * s_.tick;
  while (link.credit > 0.0) {
    if (!link.current) {
      const std::size_t first = link.a_turn ? a : b;
      const std::size_t second = link.a_turn ? b : a;
      link.current = next_transfer(first, first == a ? b : a, link, now);
      if (!link.current) link.current = next_transfer(second, second == a ? b : a, link, now);
      if (!link.current) {
        link.credit = 0.0;
        return;
      }
    }
    Transfer& tr = *link.current;
    const double take = std::min(link.credit, tr.remaining);
    tr.remaining -= take;
    link.credit -= take;
    if (tr.remaining > 0.0) return;
    const Transfer done = std::move(tr);
    link.current.reset();
    link.a_turn = done.from != a;
    complete(done, now);
  }
}

MetricsReport Engine::run() {
  RandomWaypoint mobility(s_.width, s_.height, stream_seed(s_.seed, kMobility));
  std::vector<double> ranges;
  for (const Node& n : nodes_) ranges.push_back(n.radio_range);
  for (const NodeGroup& g : s_.groups) {
    for (int k = 0; k < g.count; ++k) mobility.add_node(g.speed, g.pause);
  }
  ContactDetector detector(ranges, s_.width, s_.height);

  if (s_.per_node_interval) {
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      next_generation_.push_back(s_.warmup + uniform(traffic_rng_, s_.message_interval));
    }
  } else {
    next_generation_.push_back(s_.warmup + uniform(traffic_rng_, s_.message_interval));
  }

  if (opt_.trace) *opt_.trace << "time,event,a,b,msg,detail\n";

  const auto apply_contacts = [&](SimTime now) {
    for (const ContactChange& c : detector.update(mobility.positions())) {
      if (c.up) {
        contact_up(c.a, c.b, now);
      } else {
        contact_down(c.a, c.b, now);
      }
    }
  };

  const long ticks = static_cast<long>(std::floor(s_.sim_duration / s_.tick + 1e-9));
  apply_contacts(0.0);
  for (long n = 0; n < ticks; ++n) {
    const SimTime now = static_cast<double>(n) * s_.tick;
    if (n > 0) {
      mobility.step(now - s_.tick, s_.tick);
      apply_contacts(now);
    }
    generate(now);
    purge_expired(now);
    for (auto& [pair, link] : links_) pump(pair.first, pair.second, link, now);
  }

  const SimTime end = static_cast<double>(ticks) * s_.tick;
  for (auto& [pair, link] : links_) {
    if (link.current) {
      trace(end, "abort", static_cast<long>(link.current->from),
            static_cast<long>(link.current->to), static_cast<long>(link.current->copy.id));
    }
    trace(end, "truncate", static_cast<long>(pair.first), static_cast<long>(pair.second), -1);
  }
  links_.clear();
  purge_expired(end);

  for (const Fate& f : fates_) {
    if (f.delivered) continue;
    if (f.rejected) continue;
    if (f.copies > 0) {
      ++report_.buffered;
    } else if (f.last_loss_expired) {
      ++report_.expired;
    } else {
      ++report_.dropped;
    }
  }
  MetricsReport& r = report_;
  r.delivery_ratio = r.created ? static_cast<double>(r.delivered) / static_cast<double>(r.created) : 0.0;
  if (r.delivered == 0) {
    r.overhead_undefined = true;
    r.overhead_ratio = static_cast<double>(r.relayed);
    r.avg_hop_count = 0.0;
  } else {
    const double d = static_cast<double>(r.delivered);
    r.overhead_ratio = (static_cast<double>(r.relayed) - d) / d;
    r.avg_hop_count = static_cast<double>(hop_sum_) / d;
  }
  return r;
}

}  // namespace

MetricsReport run(const Scenario& scenario, const RunOptions& options) {
  validate(scenario);
  Engine engine(scenario, options);
  return engine.run();
}

Scenario apply_axis(Scenario s, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::Buffer: s.buffer_capacity = static_cast<std::uint64_t>(std::llround(value)); break;
    case SweepAxis::Ttl: s.ttl_minutes = value; break;
    case SweepAxis::Time: s.sim_duration = value; break;
  }
  return s;
}

std::vector<SweepPoint> run_sweep(const Scenario& base, SweepAxis axis,
                                  std::span<const double> values,
                                  std::span<const std::uint64_t> seeds,
                                  std::span<const RouterKind> routers, unsigned jobs) {
  if (values.empty()) throw ScenarioError("sweep needs at least one value");
  if (seeds.empty()) throw ScenarioError("sweep needs at least one seed");
  if (routers.empty()) throw ScenarioError("sweep needs at least one router");

  std::vector<SweepPoint> points;
  std::vector<Scenario> scenarios;
  for (RouterKind r : routers) {
    for (double v : values) {
      for (std::uint64_t seed : seeds) {
        Scenario s = apply_axis(base, axis, v);
        s.router = r;
        s.seed = seed;
        validate(s);
        scenarios.push_back(std::move(s));
        points.push_back(SweepPoint{r, v, seed, {}});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        points[i].report = run(scenarios[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenarios.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

Stat summarize(std::span<const double> xs) {
  Stat st;
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return st;
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return st;
}

std::vector<SweepAggregate> aggregate(std::span<const SweepPoint> points) {
  std::vector<SweepAggregate> out;
  std::vector<std::vector<const SweepPoint*>> cells;
  for (const SweepPoint& p : points) {
    std::size_t i = 0;
    while (i < out.size() && !(out[i].router == p.router && out[i].axis_value == p.axis_value)) ++i;
    if (i == out.size()) {
      out.push_back(SweepAggregate{p.router, p.axis_value, 0, {}, {}, {}});
      cells.emplace_back();
    }
    cells[i].push_back(&p);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<double> d, o, h;
    for (const SweepPoint* p : cells[i]) {
      d.push_back(p->report.delivery_ratio);
      o.push_back(p->report.overhead_ratio);
      h.push_back(p->report.avg_hop_count);
    }
    out[i].runs = cells[i].size();
    out[i].delivery_ratio = summarize(d);
    out[i].overhead_ratio = summarize(o);
    out[i].avg_hop_count = summarize(h);
  }
  return out;
}

}  // namespace prif::sim
