#include "prif/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace prif::sim {

namespace pt = boost::property_tree;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits "12.5MB" into 12.5 and "mb".
std::pair<double, std::string> number_and_unit(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr == text.data()) {
    throw ScenarioError("not a number: '" + std::string(text) + "'");
  }
  const std::string unit = lower(trim(std::string_view(ptr, text.data() + text.size() - ptr)));
  if (!std::isfinite(v)) throw ScenarioError("not a finite number: '" + std::string(text) + "'");
  return {v, unit};
}

bool parse_bool(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ScenarioError("not a boolean: '" + std::string(text) + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string fmt_range(Range r) { return fmt(r.lo) + ".." + fmt(r.hi); }

std::string fmt_size(std::uint64_t bytes) {
  constexpr std::uint64_t kKB = 1024;
  if (bytes % (kKB * kKB) == 0) return std::to_string(bytes / (kKB * kKB)) + "MB";
  if (bytes % kKB == 0) return std::to_string(bytes / kKB) + "KB";
  return std::to_string(bytes);
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name, const std::string& origin)
      : tree_(tree), name_(std::move(name)), origin_(origin) {}

  template <typename F>
  void get(const char* key, F&& apply) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return;
    try {
      apply(std::string_view(*v));
    } catch (const ScenarioError& e) {
      throw ScenarioError(origin_ + ": [" + name_ + "] " + key + ": " + e.what());
    }
  }

  void reject_unknown() const {
    for (const auto& [key, _] : tree_) {
      if (!seen_.contains(key)) {
        throw ScenarioError(origin_ + ": [" + name_ + "] unknown key '" + key + "'");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::string name_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

}  // namespace

double parse_number(std::string_view text) {
  const auto [v, unit] = number_and_unit(text);
  if (!unit.empty()) throw ScenarioError("unexpected unit '" + unit + "'");
  return v;
}

std::uint64_t parse_size(std::string_view text) {
  const auto [v, unit] = number_and_unit(text);
  double scale = 1.0;
  if (unit.empty() || unit == "b") {
    scale = 1.0;
  } else if (unit == "kb" || unit == "k") {
    scale = 1024.0;
  } else if (unit == "mb" || unit == "m") {
    scale = 1024.0 * 1024.0;
  } else if (unit == "gb" || unit == "g") {
    scale = 1024.0 * 1024.0 * 1024.0;
  } else {
    throw ScenarioError("unknown size unit '" + unit + "'");
  }
  if (v < 0) throw ScenarioError("size must be non-negative");
  return static_cast<std::uint64_t>(std::llround(v * scale));
}

double parse_rate(std::string_view text) {
  const auto [v, unit] = number_and_unit(text);
  if (unit.empty() || unit == "bps" || unit == "b/s") return v;
  if (unit == "kbps" || unit == "kb/s") return v * 1e3;
  if (unit == "mbps" || unit == "mb/s") return v * 1e6;
  if (unit == "gbps" || unit == "gb/s") return v * 1e9;
  throw ScenarioError("unknown rate unit '" + unit + "'");
}

Range parse_range(std::string_view text) {
  text = trim(text);
  std::size_t cut = text.find("..");
  std::size_t skip = 2;
  if (cut == std::string_view::npos) {
    skip = 1;
    for (std::size_t i = 1; i < text.size(); ++i) {
      const char prev = text[i - 1];
      if (text[i] == '-' && (std::isdigit(static_cast<unsigned char>(prev)) || prev == '.' ||
                             prev == ' ')) {
        cut = i;
        break;
      }
    }
  }
  Range r;
  if (cut == std::string_view::npos) {
    r.lo = r.hi = parse_number(text);
  } else {
    r.lo = parse_number(text.substr(0, cut));
    r.hi = parse_number(text.substr(cut + skip));
  }
  if (!r.valid()) throw ScenarioError("empty range '" + std::string(text) + "'");
  return r;
}

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  Scenario s;
  const pt::ptree empty;
  const auto section = [&](const char* name) -> const pt::ptree& {
    const auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
  };

  const pt::ptree& sc = section("scenario");
  if (const auto preset = sc.get_optional<std::string>("preset")) {
    const std::string p = lower(trim(*preset));
    if (p == "paper") {
      s = paper_preset();
    } else if (p == "desk") {
      s = desk_preset();
    } else {
      throw ScenarioError(origin + ": [scenario] preset: unknown preset '" + *preset +
                          "' (valid: paper, desk)");
    }
  }

  for (const auto& [name, body] : tree) {
    const bool known = name == "scenario" || name == "energy" || name == "prophet" ||
                       name == "crypto" || name == "options" || name.rfind("group.", 0) == 0;
    if (!known) throw ScenarioError(origin + ": unknown section [" + name + "]");
    if (body.data().size() && body.empty()) {
      throw ScenarioError(origin + ": key '" + name + "' outside any section");
    }
  }

  {
    Section x(sc, "scenario", origin);
    x.get("preset", [](std::string_view) {});
    x.get("name", [&](std::string_view v) { s.name = std::string(trim(v)); });
    x.get("width", [&](std::string_view v) { s.width = parse_number(v); });
    x.get("height", [&](std::string_view v) { s.height = parse_number(v); });
    x.get("interests", [&](std::string_view v) { s.interests = static_cast<int>(parse_number(v)); });
    x.get("interval", [&](std::string_view v) { s.message_interval = parse_range(v); });
    x.get("size", [&](std::string_view v) {
      const std::string text(trim(v));
      const std::size_t cut = text.find("..");
      if (cut == std::string::npos) {
        const double b = static_cast<double>(parse_size(text));
        s.message_size = {b, b};
      } else {
        s.message_size = {static_cast<double>(parse_size(text.substr(0, cut))),
                          static_cast<double>(parse_size(text.substr(cut + 2)))};
      }
    });
    x.get("ttl", [&](std::string_view v) { s.ttl_minutes = parse_number(v); });
    x.get("buffer", [&](std::string_view v) { s.buffer_capacity = parse_size(v); });
    x.get("duration", [&](std::string_view v) { s.sim_duration = parse_number(v); });
    x.get("warmup", [&](std::string_view v) { s.warmup = parse_number(v); });
    x.get("tick", [&](std::string_view v) { s.tick = parse_number(v); });
    x.get("seed", [&](std::string_view v) {
      const double d = parse_number(v);
      if (d < 0 || d != std::floor(d)) throw ScenarioError("seed must be a non-negative integer");
      s.seed = static_cast<std::uint64_t>(d);
    });
    x.get("router", [&](std::string_view v) {
      const auto r = parse_router(trim(v));
      if (!r) throw ScenarioError("unknown router '" + std::string(v) + "' (valid: " + router_names() + ")");
      s.router = *r;
    });
    x.get("payload_bytes", [&](std::string_view v) { s.payload_bytes = parse_size(v); });
    x.reject_unknown();
  }
  {
    Section x(section("energy"), "energy", origin);
    x.get("alpha", [&](std::string_view v) { s.energy.alpha = parse_number(v); });
    x.get("beta", [&](std::string_view v) { s.energy.beta = parse_number(v); });
    x.get("gamma", [&](std::string_view v) { s.energy.gamma = parse_number(v); });
    x.get("window", [&](std::string_view v) { s.energy.window = parse_number(v); });
    x.reject_unknown();
  }
  {
    Section x(section("prophet"), "prophet", origin);
    x.get("p_init", [&](std::string_view v) { s.prophet.p_init = parse_number(v); });
    x.get("beta", [&](std::string_view v) { s.prophet.beta = parse_number(v); });
    x.get("gamma", [&](std::string_view v) { s.prophet.gamma = parse_number(v); });
    x.get("time_unit", [&](std::string_view v) { s.prophet.time_unit = parse_number(v); });
    x.reject_unknown();
  }
  {
    Section x(section("crypto"), "crypto", origin);
    x.get("bits_p", [&](std::string_view v) { s.crypto_bits_p = static_cast<unsigned>(parse_number(v)); });
    x.get("bits_q", [&](std::string_view v) { s.crypto_bits_q = static_cast<unsigned>(parse_number(v)); });
    x.reject_unknown();
  }
  {
    Section x(section("options"), "options", origin);
    x.get("per_node_interval", [&](std::string_view v) { s.per_node_interval = parse_bool(v); });
    x.get("forward_and_delete", [&](std::string_view v) { s.forward_and_delete = parse_bool(v); });
    x.get("instant_antipackets", [&](std::string_view v) { s.instant_antipackets = parse_bool(v); });
    x.get("baseline_antipackets", [&](std::string_view v) { s.baseline_antipackets = parse_bool(v); });
    x.get("charge_handshake", [&](std::string_view v) { s.charge_handshake = parse_bool(v); });
    x.get("bus_energy", [&](std::string_view v) { s.bus_energy = parse_bool(v); });
    x.reject_unknown();
  }

  std::vector<NodeGroup> groups;
  for (const auto& [name, body] : tree) {
    if (name.rfind("group.", 0) != 0) continue;
    NodeGroup g;
    g.name = name.substr(6);
    g.radio_range = 10.0;
    g.link_rate = 2e6;
    bool has_class = false;
    Section x(body, name, origin);
    x.get("class", [&](std::string_view v) {
      const auto c = parse_node_class(lower(trim(v)));
      if (!c) throw ScenarioError("unknown class '" + std::string(v) + "' (valid: pedestrian, car, bus)");
      g.cls = *c;
      has_class = true;
    });
    x.get("count", [&](std::string_view v) { g.count = static_cast<int>(parse_number(v)); });
    x.get("speed", [&](std::string_view v) { g.speed = parse_range(v); });
    x.get("pause", [&](std::string_view v) { g.pause = parse_range(v); });
    x.get("radio_range", [&](std::string_view v) { g.radio_range = parse_number(v); });
    x.get("link_rate", [&](std::string_view v) { g.link_rate = parse_rate(v); });
    x.get("generates", [&](std::string_view v) { g.generates_messages = parse_bool(v); });
    x.reject_unknown();
    if (!has_class) throw ScenarioError(origin + ": [" + name + "] missing key 'class'");
    groups.push_back(std::move(g));
  }
  if (!groups.empty()) s.groups = std::move(groups);

  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open config file '" + path + "'");
  return parse_scenario(in, path);
}

std::string scenario_to_ini(const Scenario& s) {
  std::ostringstream os;
  os << "[scenario]\n"
     << "name = " << s.name << "\n"
     << "width = " << fmt(s.width) << "\n"
     << "height = " << fmt(s.height) << "\n"
     << "interests = " << s.interests << "\n"
     << "interval = " << fmt_range(s.message_interval) << "\n"
     << "size = " << fmt_size(static_cast<std::uint64_t>(s.message_size.lo)) << ".."
     << fmt_size(static_cast<std::uint64_t>(s.message_size.hi)) << "\n"
     << "ttl = " << fmt(s.ttl_minutes) << "\n"
     << "buffer = " << fmt_size(s.buffer_capacity) << "\n"
     << "duration = " << fmt(s.sim_duration) << "\n"
     << "warmup = " << fmt(s.warmup) << "\n"
     << "tick = " << fmt(s.tick) << "\n"
     << "seed = " << s.seed << "\n"
     << "router = " << to_string(s.router) << "\n"
     << "payload_bytes = " << s.payload_bytes << "\n\n"
     << "[energy]\n"
     << "alpha = " << fmt(s.energy.alpha) << "\n"
     << "beta = " << fmt(s.energy.beta) << "\n"
     << "gamma = " << fmt(s.energy.gamma) << "\n"
     << "window = " << fmt(s.energy.window) << "\n\n"
     << "[prophet]\n"
     << "p_init = " << fmt(s.prophet.p_init) << "\n"
     << "beta = " << fmt(s.prophet.beta) << "\n"
     << "gamma = " << fmt(s.prophet.gamma) << "\n"
     << "time_unit = " << fmt(s.prophet.time_unit) << "\n\n"
     << "[crypto]\n"
     << "bits_p = " << s.crypto_bits_p << "\n"
     << "bits_q = " << s.crypto_bits_q << "\n\n"
     << std::boolalpha << "[options]\n"
     << "per_node_interval = " << s.per_node_interval << "\n"
     << "forward_and_delete = " << s.forward_and_delete << "\n"
     << "instant_antipackets = " << s.instant_antipackets << "\n"
     << "baseline_antipackets = " << s.baseline_antipackets << "\n"
     << "charge_handshake = " << s.charge_handshake << "\n"
     << "bus_energy = " << s.bus_energy << "\n";
  for (const NodeGroup& g : s.groups) {
    os << "\n[group." << g.name << "]\n"
       << "class = " << to_string(g.cls) << "\n"
       << "count = " << g.count << "\n"
       << "speed = " << fmt_range(g.speed) << "\n"
       << "pause = " << fmt_range(g.pause) << "\n"
       << "radio_range = " << fmt(g.radio_range) << "\n"
       << "link_rate = " << fmt(g.link_rate) << "bps\n"
       << "generates = " << g.generates_messages << "\n";
  }
  return os.str();
}

}  // namespace prif::sim
