#include "prif/report.h"

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"

namespace prif::report {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

template <typename T>
T parse_cell(const std::string& cell, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw SchemaError(where + ": bad value '" + cell + "'");
  }
  return v;
}

nlohmann::ordered_json metrics_json(const sim::MetricsReport& r) {
  nlohmann::ordered_json j;
  j["delivery_ratio"] = r.delivery_ratio;
  j["overhead_ratio"] = r.overhead_ratio;
  j["overhead_undefined"] = r.overhead_undefined;
  j["avg_hop_count"] = r.avg_hop_count;
  j["created"] = r.created;
  j["delivered"] = r.delivered;
  j["relayed"] = r.relayed;
  j["dropped"] = r.dropped;
  j["expired"] = r.expired;
  j["buffered"] = r.buffered;
  j["rejected_oversize"] = r.rejected_oversize;
  j["direct_deliveries"] = r.direct_deliveries;
  j["drop_events"] = r.drop_events;
  j["contacts"] = r.contacts;
  j["authenticated_contacts"] = r.authenticated_contacts;
  j["integrity_errors"] = r.integrity_errors;
  return j;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const sim::SweepPoint> points) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << '\n';
  for (const sim::SweepPoint& p : points) {
    const sim::MetricsReport& r = p.report;
    out << sim::to_string(p.router) << ',' << general(p.axis_value) << ',' << p.seed << ','
        << fixed6(r.delivery_ratio) << ',' << fixed6(r.overhead_ratio) << ','
        << fixed6(r.avg_hop_count) << ',' << r.created << ',' << r.delivered << ','
        << r.relayed << ',' << r.dropped << ',' << r.expired << ',' << r.buffered << ','
        << r.rejected_oversize << ',' << (r.overhead_undefined ? 1 : 0) << '\n';
  }
}

std::string to_json(const sim::MetricsReport& r, int indent) {
  return metrics_json(r).dump(indent);
}

std::string to_json(const sim::SweepPoint& p, sim::SweepAxis axis, int indent) {
  nlohmann::ordered_json j;
  j["router"] = sim::to_string(p.router);
  j["axis"] = sim::to_string(axis);
  j["axis_value"] = p.axis_value;
  j["seed"] = p.seed;
  j["metrics"] = metrics_json(p.report);
  return j.dump(indent);
}

std::vector<CsvRow> read_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(origin + ": empty input");
  const std::vector<std::string> header = split(line);
  if (header.size() != kCsvColumns.size()) {
    throw SchemaError(origin + ": expected " + std::to_string(kCsvColumns.size()) +
                      " columns, found " + std::to_string(header.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kCsvColumns[i]) {
      throw SchemaError(origin + ": column " + std::to_string(i + 1) + " is '" + header[i] +
                        "', expected '" + kCsvColumns[i] + "'");
    }
  }
  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (cells.size() != kCsvColumns.size()) throw SchemaError(where + ": wrong number of cells");
    if (!sim::parse_router(cells[0])) throw SchemaError(where + ": unknown router '" + cells[0] + "'");
    CsvRow r;
    r.router = cells[0];
    r.axis_value = parse_cell<double>(cells[1], where);
    r.seed = parse_cell<std::uint64_t>(cells[2], where);
    r.delivery_ratio = parse_cell<double>(cells[3], where);
    r.overhead_ratio = parse_cell<double>(cells[4], where);
    r.avg_hop_count = parse_cell<double>(cells[5], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plotdata(std::ostream& out, std::span<const CsvRow> rows) {
  if (rows.empty()) throw SchemaError("no rows to aggregate");
  // Cells keep first-appearance order.
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::array<std::vector<double>, 3>> cells;
  for (const CsvRow& r : rows) {
    const auto key = std::make_pair(r.router, r.axis_value);
    auto [it, fresh] = cells.try_emplace(key);
    if (fresh) keys.push_back(key);
    it->second[0].push_back(r.delivery_ratio);
    it->second[1].push_back(r.overhead_ratio);
    it->second[2].push_back(r.avg_hop_count);
  }
  static constexpr std::array<const char*, 3> kMetrics = {"delivery_ratio", "overhead_ratio",
                                                          "avg_hop_count"};
  out << "router,axis_value,metric,runs,mean,std\n";
  for (const auto& key : keys) {
    const auto& series = cells.at(key);
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      const sim::Stat st = sim::summarize(series[m]);
      out << key.first << ',' << general(key.second) << ',' << kMetrics[m] << ','
          << series[m].size() << ',' << fixed6(st.mean) << ',' << fixed6(st.stddev) << '\n';
    }
  }
}

}  // namespace prif::report
