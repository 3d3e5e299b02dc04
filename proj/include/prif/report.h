#pragma once

// Sweep output: one CSV row per run, one JSON object per run, and the
// plot-ready aggregate (mean and sample standard deviation per router and
// axis value).
//
// CSV columns, in order:
//   router, axis_value, seed, delivery_ratio, overhead_ratio, avg_hop_count,
//   created, delivered, relayed, dropped, expired, buffered,
//   rejected_oversize, overhead_undefined
// Ratios carry 6 decimals; overhead_undefined is 0 or 1.

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prif/sim.h"

namespace prif::report {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<const char*, 14> kCsvColumns = {
    "router",   "axis_value", "seed",    "delivery_ratio", "overhead_ratio",
    "avg_hop_count", "created", "delivered", "relayed",     "dropped",
    "expired",  "buffered",   "rejected_oversize", "overhead_undefined"};

void write_csv(std::ostream& out, std::span<const sim::SweepPoint> points);

/// JSON object mirroring MetricsReport plus the run coordinates.
std::string to_json(const sim::SweepPoint& p, sim::SweepAxis axis, int indent = 2);
std::string to_json(const sim::MetricsReport& r, int indent = 2);

struct CsvRow {
  std::string router;
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  double delivery_ratio = 0.0;
  double overhead_ratio = 0.0;
  double avg_hop_count = 0.0;
};

/// Parses a sweep CSV. Throws SchemaError on a header mismatch or bad cell.
std::vector<CsvRow> read_csv(std::istream& in, const std::string& origin = "<csv>");

/// Tidy table: router, axis_value, metric, runs, mean, std.
void write_plotdata(std::ostream& out, std::span<const CsvRow> rows);

}  // namespace prif::report
