#include <sstream>

#include <gtest/gtest.h>

#include "prif/config.h"
#include "prif/report.h"

namespace prif {
namespace {

using sim::parse_scenario;

TEST(Config, Units) {
  EXPECT_EQ(sim::parse_size("10MB"), 10ull * 1024 * 1024);
  EXPECT_EQ(sim::parse_size("500 KB"), 500ull * 1024);
  EXPECT_EQ(sim::parse_size("42"), 42u);
  EXPECT_DOUBLE_EQ(sim::parse_rate("2Mbps"), 2e6);
  EXPECT_DOUBLE_EQ(sim::parse_rate("250 kbps"), 250e3);
  EXPECT_DOUBLE_EQ(sim::parse_range("0.5-1.5").hi, 1.5);
  EXPECT_DOUBLE_EQ(sim::parse_range("50..90").lo, 50);
  EXPECT_THROW(sim::parse_size("12XB"), sim::ScenarioError);
  EXPECT_THROW(sim::parse_number("abc"), sim::ScenarioError);
}

TEST(Config, PresetWithOverrides) {
  std::istringstream in(
      "[scenario]\npreset = desk\nbuffer = 4MB\nttl = 1200\nseed = 9\nrouter = prophet\n"
      "[crypto]\nbits_p = 0\n[options]\nforward_and_delete = true\n");
  const sim::Scenario s = parse_scenario(in);
  EXPECT_EQ(s.buffer_capacity, 4ull * 1024 * 1024);
  EXPECT_DOUBLE_EQ(s.ttl_minutes, 1200);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.router, sim::RouterKind::Prophet);
  EXPECT_EQ(s.crypto_bits_p, 0u);
  EXPECT_TRUE(s.forward_and_delete);
  EXPECT_EQ(sim::node_count(s), 63u);
}

TEST(Config, Groups) {
  std::istringstream in(
      "[scenario]\npreset = paper\n"
      "[group.walkers]\nclass = pedestrian\ncount = 5\nspeed = 0.5..1.5\npause = 100..200\n"
      "radio_range = 10\nlink_rate = 2Mbps\n"
      "[group.shuttles]\nclass = bus\ncount = 2\nspeed = 7..10\npause = 100..200\n"
      "radio_range = 100\nlink_rate = 10Mbps\ngenerates = false\n");
  const sim::Scenario s = parse_scenario(in);
  ASSERT_EQ(s.groups.size(), 2u);
  EXPECT_EQ(s.groups[0].name, "walkers");
  EXPECT_EQ(s.groups[1].cls, sim::NodeClass::Bus);
  EXPECT_FALSE(s.groups[1].generates_messages);
  EXPECT_DOUBLE_EQ(s.groups[1].link_rate, 10e6);
}

TEST(Config, Rejections) {
  for (const char* text : {"[scenario]\nbufer = 4MB\n", "[nonsense]\nx = 1\n",
                           "[scenario]\nrouter = flood\n", "[scenario]\npreset = desk\nttl = -5\n",
                           "[group.x]\nclass = tram\ncount = 1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_scenario(in, "test.ini"), sim::ScenarioError) << text;
  }
  try {
    std::istringstream in("[scenario]\nrouter = flood\n");
    parse_scenario(in);
  } catch (const sim::ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("epidemic"), std::string::npos);
  }
}

TEST(Config, RoundTrip) {
  sim::Scenario s = sim::desk_preset();
  s.seed = 77;
  s.ttl_minutes = 2400;
  std::istringstream in(sim::scenario_to_ini(s));
  const sim::Scenario back = parse_scenario(in);
  EXPECT_EQ(sim::scenario_to_ini(back), sim::scenario_to_ini(s));
}

sim::SweepPoint point(sim::RouterKind r, double axis, std::uint64_t seed, std::uint64_t created,
                      std::uint64_t delivered, std::uint64_t relayed) {
  sim::SweepPoint p{r, axis, seed, {}};
  p.report.created = created;
  p.report.delivered = delivered;
  p.report.relayed = relayed;
  p.report.delivery_ratio = created ? double(delivered) / created : 0.0;
  p.report.overhead_undefined = delivered == 0;
  p.report.overhead_ratio = delivered ? double(relayed - delivered) / delivered : double(relayed);
  p.report.avg_hop_count = delivered ? 1.5 : 0.0;
  p.report.buffered = created - delivered;
  return p;
}

TEST(Report, CsvGolden) {
  const std::vector<sim::SweepPoint> pts = {point(sim::RouterKind::Prif, 2097152, 1, 8, 2, 5),
                                            point(sim::RouterKind::Epidemic, 2097152, 1, 8, 0, 3)};
  std::ostringstream os;
  report::write_csv(os, pts);
  EXPECT_EQ(os.str(),
            "router,axis_value,seed,delivery_ratio,overhead_ratio,avg_hop_count,created,delivered,"
            "relayed,dropped,expired,buffered,rejected_oversize,overhead_undefined\n"
            "prif,2097152,1,0.250000,1.500000,1.500000,8,2,5,0,0,6,0,0\n"
            "epidemic,2097152,1,0.000000,3.000000,0.000000,8,0,3,0,0,8,0,1\n");

  std::istringstream in(os.str());
  const auto rows = report::read_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].router, "prif");
  EXPECT_DOUBLE_EQ(rows[0].delivery_ratio, 0.25);
}

TEST(Report, SchemaErrors) {
  std::istringstream wrong("router,seed\nprif,1\n");
  EXPECT_THROW(report::read_csv(wrong), report::SchemaError);
  std::istringstream empty("");
  EXPECT_THROW(report::read_csv(empty), report::SchemaError);
  std::ostringstream os;
  report::write_csv(os, std::vector<sim::SweepPoint>{point(sim::RouterKind::Prif, 1, 1, 4, 1, 1)});
  std::string text = os.str();
  text.replace(text.rfind("0.250000"), 8, "oops");
  std::istringstream bad(text);
  EXPECT_THROW(report::read_csv(bad), report::SchemaError);
}

TEST(Report, Plotdata) {
  std::vector<report::CsvRow> rows;
  for (std::uint64_t s = 1; s <= 3; ++s) rows.push_back({"prif", 10, s, 0.1 * s, 1.0, 2.0});
  rows.push_back({"epidemic", 10, 1, 0.5, 4.0, 3.0});
  std::ostringstream os;
  report::write_plotdata(os, rows);
  const std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')), "router,axis_value,metric,runs,mean,std");
  EXPECT_NE(out.find("prif,10,delivery_ratio,3,0.200000,0.100000"), std::string::npos) << out;
  EXPECT_NE(out.find("epidemic,10,delivery_ratio,1,0.500000,0.000000"), std::string::npos) << out;
}

TEST(Report, Json) {
  const auto p = point(sim::RouterKind::Prophet, 600, 3, 10, 4, 9);
  const std::string j = report::to_json(p, sim::SweepAxis::Ttl);
  EXPECT_NE(j.find("\"router\": \"prophet\""), std::string::npos) << j;
  EXPECT_NE(j.find("\"delivered\": 4"), std::string::npos) << j;
}

}  // namespace
}  // namespace prif
