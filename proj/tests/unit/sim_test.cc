#include <sstream>

#include <gtest/gtest.h>

#include "prif/sim.h"

namespace prif::sim {
namespace {

Scenario small(RouterKind router, std::uint64_t seed = 1) {
  Scenario s = desk_preset();
  s.sim_duration = 6000;
  s.warmup = 500;
  s.crypto_bits_p = 0;
  s.router = router;
  s.seed = seed;
  return s;
}

// Two nodes that can always hear each other; only the first generates.
Scenario pair() {
  Scenario s;
  s.width = s.height = 50;
  NodeGroup g{"sender", NodeClass::Pedestrian, 1, {1, 1}, {100, 100}, 500.0, 2e6, true};
  NodeGroup r = g;
  r.name = "receiver";
  r.generates_messages = false;
  s.groups = {g, r};
  s.interests = 1;
  s.message_size = {1000, 1000};
  s.sim_duration = 400;
  s.warmup = 10;
  s.crypto_bits_p = 0;
  return s;
}

TEST(Scenario, Presets) {
  EXPECT_EQ(node_count(paper_preset()), 166u);
  EXPECT_EQ(node_count(desk_preset()), 63u);
  validate(paper_preset());
  validate(desk_preset());
  Scenario empty = desk_preset();
  empty.groups.clear();
  EXPECT_THROW(validate(empty), ScenarioError);
  Scenario bad = desk_preset();
  bad.message_size = {10, 5};
  bad.ttl_minutes = 0;
  try {
    validate(bad);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("message size"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("ttl"), std::string::npos);
  }
}

TEST(Mobility, Kinematics) {
  RandomWaypoint w(1000, 1000, 1);
  w.add_node({1, 1}, {100, 200});
  w.place(0, {0, 0}, {300, 400}, 1.0);
  w.step(0, 30);
  EXPECT_NEAR(w.positions()[0].x, 18, 1e-9);
  EXPECT_NEAR(w.positions()[0].y, 24, 1e-9);

  w.place(0, {0, 0}, {3, 4}, 1.0);
  w.step(30, 30);
  EXPECT_NEAR(w.positions()[0].x, 3, 1e-12);
  EXPECT_NEAR(w.positions()[0].y, 4, 1e-12);
  EXPECT_TRUE(w.paused(0, 61));
}

TEST(Mobility, StaysInBounds) {
  RandomWaypoint w(4500, 3400, 3);
  for (int i = 0; i < 20; ++i) w.add_node({2.7, 13.9}, {0, 10});
  for (int t = 0; t < 5000; ++t) {
    w.step(t, 1);
    for (const Vec2& p : w.positions()) {
      ASSERT_GE(p.x, 0);
      ASSERT_LE(p.x, 4500);
      ASSERT_GE(p.y, 0);
      ASSERT_LE(p.y, 3400);
    }
  }
}

TEST(Contacts, MinimumRange) {
  ContactDetector d({10, 10, 100, 100}, 1000, 1000);
  const std::vector<Vec2> pos = {{0, 0}, {9, 0}, {500, 500}, {599, 500}};
  const auto up = d.update(pos);
  ASSERT_EQ(up.size(), 2u);
  EXPECT_EQ(up[0].a, 0u);
  EXPECT_EQ(up[0].b, 1u);
  EXPECT_EQ(up[1].a, 2u);
  EXPECT_EQ(up[1].b, 3u);

  // pedestrian 50 m from a bus: the 10 m radio governs
  const std::vector<Vec2> near_bus = {{0, 0}, {200, 0}, {50, 0}, {900, 900}};
  const auto ch = d.update(near_bus);
  for (const ContactChange& c : ch) EXPECT_FALSE(c.up);
  EXPECT_TRUE(d.active().empty());
}

TEST(Contacts, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  std::vector<double> ranges;
  for (int i = 0; i < 40; ++i) ranges.push_back(i % 5 == 0 ? 100.0 : 10.0);
  ContactDetector d(ranges, 400, 300);
  for (int round = 0; round < 200; ++round) {
    std::vector<Vec2> pos;
    for (int i = 0; i < 40; ++i)
      pos.push_back({std::uniform_real_distribution<double>(0, 400)(rng), std::uniform_real_distribution<double>(0, 300)(rng)});
    d.update(pos);
    std::vector<std::pair<std::size_t, std::size_t>> want;
    for (std::size_t a = 0; a < pos.size(); ++a)
      for (std::size_t b = a + 1; b < pos.size(); ++b)
        if (distance(pos[a], pos[b]) <= std::min(ranges[a], ranges[b])) want.emplace_back(a, b);
    ASSERT_EQ(d.active(), want);
  }
}

TEST(Run, ForcedMeetingDelivers) {
  for (RouterKind r : {RouterKind::Prif, RouterKind::PrifNoPrivacy, RouterKind::Epidemic, RouterKind::Prophet}) {
    Scenario s = pair();
    s.router = r;
    const MetricsReport m = run(s);
    EXPECT_GT(m.created, 0u) << to_string(r);
    EXPECT_DOUBLE_EQ(m.delivery_ratio, 1.0) << to_string(r);
    EXPECT_DOUBLE_EQ(m.avg_hop_count, 1.0) << to_string(r);
    EXPECT_EQ(m.relayed, m.delivered);
    EXPECT_DOUBLE_EQ(m.overhead_ratio, 0.0);
  }
}

TEST(Run, RevokedNodeCarriesNothing) {
  Scenario s = pair();
  RunOptions opt;
  opt.revoked_nodes = {1};
  const MetricsReport m = run(s, opt);
  EXPECT_EQ(m.delivered, 0u);
  EXPECT_EQ(m.authenticated_contacts, 0u);
  EXPECT_TRUE(m.overhead_undefined);
  EXPECT_DOUBLE_EQ(m.overhead_ratio, static_cast<double>(m.relayed));
}

TEST(Run, ConservationAndDeterminism) {
  for (RouterKind r : {RouterKind::Prif, RouterKind::Epidemic, RouterKind::Prophet}) {
    const Scenario s = small(r, 4);
    std::ostringstream t1, t2;
    RunOptions o1, o2;
    o1.trace = &t1;
    o2.trace = &t2;
    const MetricsReport a = run(s, o1);
    const MetricsReport b = run(s, o2);
    EXPECT_EQ(t1.str(), t2.str());
    EXPECT_EQ(a.delivered, b.delivered);
    EXPECT_EQ(a.created, a.delivered + a.expired + a.dropped + a.buffered + a.rejected_oversize) << to_string(r);
    EXPECT_LE(a.delivered, a.created);
    EXPECT_GE(a.relayed + a.direct_deliveries, a.delivered);
    if (a.delivered) {
      EXPECT_GE(a.avg_hop_count, 1.0);
    }
    EXPECT_EQ(a.integrity_errors, 0u);
  }
}

TEST(Run, TraceContactsBalanced) {
  std::ostringstream trace;
  RunOptions o;
  o.trace = &trace;
  run(small(RouterKind::Prif, 2), o);
  std::istringstream in(trace.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,event,a,b,msg,detail");
  long ups = 0, closes = 0;
  while (std::getline(in, line)) {
    if (line.find(",up,") != std::string::npos) ++ups;
    if (line.find(",down,") != std::string::npos || line.find(",truncate,") != std::string::npos) ++closes;
  }
  EXPECT_GT(ups, 0);
  EXPECT_EQ(ups, closes);
}

TEST(Run, BusesNeverSource) {
  std::ostringstream trace;
  RunOptions o;
  o.trace = &trace;
  run(small(RouterKind::Epidemic, 3), o);
  std::istringstream in(trace.str());
  std::string line;
  long creates = 0;
  while (std::getline(in, line)) {
    if (line.find(",create,") == std::string::npos) continue;
    ++creates;
    std::istringstream f(line);
    std::string time, ev, a, b;
    std::getline(f, time, ',');
    std::getline(f, ev, ',');
    std::getline(f, a, ',');
    std::getline(f, b, ',');
    EXPECT_LT(std::stoi(a), 60);  // buses are the last three nodes
    EXPECT_NE(a, b);
  }
  EXPECT_GT(creates, 0);
}

TEST(Sweep, OrderIndependentOfJobs) {
  const Scenario s = small(RouterKind::Prif);
  const std::vector<double> buffers = {2.0 * 1024 * 1024, 4.0 * 1024 * 1024};
  const std::vector<std::uint64_t> seeds = {1, 2};
  const std::vector<RouterKind> routers = {RouterKind::Prif, RouterKind::Epidemic};
  const auto one = run_sweep(s, SweepAxis::Buffer, buffers, seeds, routers, 1);
  const auto two = run_sweep(s, SweepAxis::Buffer, buffers, seeds, routers, 2);
  ASSERT_EQ(one.size(), 8u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].router, two[i].router);
    EXPECT_EQ(one[i].axis_value, two[i].axis_value);
    EXPECT_EQ(one[i].seed, two[i].seed);
    EXPECT_EQ(one[i].report.delivered, two[i].report.delivered);
  }
  EXPECT_EQ(one[0].router, RouterKind::Prif);
  EXPECT_EQ(one[1].seed, 2u);
  EXPECT_EQ(aggregate(one).size(), 4u);
}

TEST(Sweep, ApplyAxis) {
  const Scenario s = desk_preset();
  EXPECT_EQ(apply_axis(s, SweepAxis::Buffer, 2048).buffer_capacity, 2048u);
  EXPECT_DOUBLE_EQ(apply_axis(s, SweepAxis::Ttl, 1200).ttl_minutes, 1200);
  EXPECT_DOUBLE_EQ(apply_axis(s, SweepAxis::Time, 9000).sim_duration, 9000);
}

TEST(Stats, Summarize) {
  const std::vector<double> xs = {1, 2, 3, 4};
  const Stat s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, 1.2909944487358056, 1e-12);
  const std::vector<double> one = {7};
  EXPECT_DOUBLE_EQ(summarize(one).stddev, 0);
}

}  // namespace
}  // namespace prif::sim
