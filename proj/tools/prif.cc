// prif: run simulations, aggregate sweep output, and drive the TA key lifecycle.
//
//   prif run --config FILE [--router R,...] [--sweep AXIS --values V,...]
//            [--seeds S,...|A..B] [--out DIR] [--format csv,json] [--jobs N] [--trace]
//   prif plotdata CSV... [--out FILE]
//   prif keytool setup|group|register|revoke|handshake-demo [--state FILE] ...
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "prif/auth.h"
#include "prif/config.h"
#include "prif/report.h"
#include "prif/sim.h"
#include "prif/wire.h"

namespace fs = std::filesystem;
using prif::Bytes;
using prif::Drbg;
using prif::to_hex;
namespace auth = prif::auth;
namespace sim = prif::sim;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : split_list(text)) {
    const auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const std::uint64_t lo = std::stoull(part.substr(0, dots));
        const std::uint64_t hi = std::stoull(part.substr(dots + 2));
        if (hi < lo) throw UsageError("empty seed range '" + part + "'");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad seed '" + part + "'");
    }
  }
  if (seeds.empty()) throw UsageError("no seeds given");
  return seeds;
}

double parse_axis_value(sim::SweepAxis axis, const std::string& text) {
  try {
    if (axis == sim::SweepAxis::Buffer) return static_cast<double>(sim::parse_size(text));
    return sim::parse_number(text);
  } catch (const sim::ScenarioError& e) {
    throw UsageError("bad --values entry '" + text + "': " + e.what());
  }
}

std::string run_label(const sim::SweepPoint& p, sim::SweepAxis axis) {
  std::ostringstream os;
  os << sim::to_string(p.router) << '_' << sim::to_string(axis) << '-'
     << static_cast<long long>(p.axis_value) << "_seed-" << p.seed;
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string routers;
  std::string sweep;
  std::string values;
  std::string seeds;
  std::string out = "out";
  std::string format = "csv,json";
  unsigned jobs = 1;
  bool trace = false;
};

int cmd_run(const RunArgs& a) {
  sim::Scenario base;
  try {
    base = sim::load_scenario(a.config);
  } catch (const sim::ScenarioError& e) {
    throw UsageError(e.what());
  }

  std::vector<sim::RouterKind> routers;
  for (const std::string& name : split_list(a.routers.empty() ? std::string(sim::to_string(base.router)) : a.routers)) {
    const auto r = sim::parse_router(name);
    if (!r) throw UsageError("unknown router '" + name + "' (valid: " + sim::router_names() + ")");
    routers.push_back(*r);
  }

  sim::SweepAxis axis = sim::SweepAxis::Buffer;
  std::vector<double> values;
  if (!a.sweep.empty()) {
    const auto ax = sim::parse_axis(a.sweep);
    if (!ax) throw UsageError("unknown sweep axis '" + a.sweep + "' (valid: buffer, ttl, time)");
    axis = *ax;
    for (const std::string& v : split_list(a.values)) values.push_back(parse_axis_value(axis, v));
    if (values.empty()) throw UsageError("--sweep needs --values");
  } else {
    if (!a.values.empty()) throw UsageError("--values needs --sweep");
    values.push_back(static_cast<double>(base.buffer_capacity));
  }

  const std::vector<std::uint64_t> seeds =
      a.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : parse_seeds(a.seeds);

  bool want_csv = false;
  bool want_json = false;
  for (const std::string& f : split_list(a.format)) {
    if (f == "csv") {
      want_csv = true;
    } else if (f == "json") {
      want_json = true;
    } else {
      throw UsageError("unknown format '" + f + "' (valid: csv, json)");
    }
  }
  if (!want_csv && !want_json) throw UsageError("--format selects nothing");

  const fs::path out(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + a.out + "': " + ec.message());

  std::vector<sim::SweepPoint> points;
  if (a.trace) {
    fs::create_directories(out / "traces");
    for (sim::RouterKind r : routers) {
      for (double v : values) {
        for (std::uint64_t seed : seeds) {
          sim::Scenario s = sim::apply_axis(base, axis, v);
          s.router = r;
          s.seed = seed;
          sim::SweepPoint p{r, v, seed, {}};
          std::ofstream trace(out / "traces" / (run_label(p, axis) + ".csv"));
          if (!trace) throw std::runtime_error("cannot write trace file");
          sim::RunOptions opt;
          opt.trace = &trace;
          p.report = sim::run(s, opt);
          points.push_back(p);
        }
      }
    }
  } else {
    points = sim::run_sweep(base, axis, values, seeds, routers, std::max(1u, a.jobs));
  }

  if (want_csv) {
    std::ostringstream csv;
    prif::report::write_csv(csv, points);
    write_file(out / "sweep.csv", csv.str());
  }
  if (want_json) {
    fs::create_directories(out / "runs");
    for (const sim::SweepPoint& p : points) {
      write_file(out / "runs" / (run_label(p, axis) + ".json"),
                 prif::report::to_json(p, axis) + "\n");
    }
  }

  std::vector<sim::SweepAggregate> agg = sim::aggregate(points);
  std::printf("%-15s %12s %5s %10s %12s %8s\n", "router", sim::to_string(axis).data(), "runs",
              "delivery", "overhead", "hops");
  for (const sim::SweepAggregate& g : agg) {
    std::printf("%-15s %12.10g %5zu %10.4f %12.4f %8.3f\n", sim::to_string(g.router).data(),
                g.axis_value, g.runs, g.delivery_ratio.mean, g.overhead_ratio.mean,
                g.avg_hop_count.mean);
  }
  std::printf("wrote %zu runs to %s\n", points.size(), out.string().c_str());
  return 0;
}

// ---- plotdata -------------------------------------------------------------

int cmd_plotdata(const std::vector<std::string>& inputs, const std::string& out_path) {
  if (inputs.empty()) throw UsageError("plotdata needs at least one CSV file");
  std::vector<prif::report::CsvRow> rows;
  for (const std::string& path : inputs) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
      auto part = prif::report::read_csv(in, path);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const prif::report::SchemaError& e) {
      throw UsageError(e.what());
    }
  }
  if (rows.empty()) throw UsageError("no data rows in input");
  std::ostringstream os;
  prif::report::write_plotdata(os, rows);
  if (out_path.empty() || out_path == "-") {
    std::cout << os.str();
  } else {
    write_file(out_path, os.str());
  }
  return 0;
}

// ---- keytool --------------------------------------------------------------

using nlohmann::ordered_json;

std::string hex_of(const mpz_class& v) { return v.get_str(16); }
mpz_class mpz_of(const ordered_json& j) { return mpz_class(j.get<std::string>(), 16); }

struct KeyState {
  std::uint64_t seed = 1;
  std::uint64_t draws = 0;
  auth::SystemParams params;
  std::vector<auth::GroupParams> groups;
  std::vector<std::pair<std::string, auth::Certificate>> members;  // (gid, cert)
  auth::RevocationList revoked;

  Drbg rng() { return Drbg(seed, 1000 + draws++); }

  const auth::GroupParams* group(std::string_view gid) const {
    for (const auto& g : groups) {
      if (g.gid == gid) return &g;
    }
    return nullptr;
  }
  auth::GroupDirectory directory() const {
    auth::GroupDirectory d;
    for (const auto& g : groups) d.publish(g.gid, g.y);
    return d;
  }
};

ordered_json to_json(const KeyState& st) {
  ordered_json j;
  j["seed"] = st.seed;
  j["draws"] = st.draws;
  j["params"] = {{"p", hex_of(st.params.p)}, {"q", hex_of(st.params.q)},
                 {"alpha", hex_of(st.params.alpha)}};
  j["groups"] = ordered_json::array();
  for (const auto& g : st.groups) {
    j["groups"].push_back({{"gid", g.gid}, {"y", hex_of(g.y)}, {"secret", hex_of(g.secret)}});
  }
  j["members"] = ordered_json::array();
  for (const auto& [gid, c] : st.members) {
    j["members"].push_back(
        {{"gid", gid}, {"id", c.id}, {"e", hex_of(c.e)}, {"s", hex_of(c.s)}, {"y", hex_of(c.y)}});
  }
  j["revoked"] = st.revoked.ids();
  return j;
}

KeyState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open state file '" + path + "' (run 'keytool setup' first)");
  KeyState st;
  try {
    const ordered_json j = ordered_json::parse(in);
    st.seed = j.at("seed").get<std::uint64_t>();
    st.draws = j.at("draws").get<std::uint64_t>();
    st.params = auth::make_params(mpz_of(j.at("params").at("p")), mpz_of(j.at("params").at("q")),
                                  mpz_of(j.at("params").at("alpha")));
    for (const auto& g : j.at("groups")) {
      st.groups.push_back({g.at("gid").get<std::string>(), mpz_of(g.at("y")), mpz_of(g.at("secret"))});
    }
    for (const auto& m : j.at("members")) {
      st.members.emplace_back(m.at("gid").get<std::string>(),
                              auth::Certificate{m.at("id").get<std::string>(), mpz_of(m.at("e")),
                                                mpz_of(m.at("s")), mpz_of(m.at("y"))});
    }
    for (const auto& id : j.at("revoked")) st.revoked.revoke(id.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt state file '" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("corrupt state file '" + path + "': " + e.what());
  }
  return st;
}

void save_state(const std::string& path, const KeyState& st) {
  write_file(path, to_json(st).dump(2) + "\n");
}

struct KeyArgs {
  std::string state = "prif-keys.json";
  std::uint64_t seed = 1;
  unsigned bits_p = 0;
  unsigned bits_q = 0;
  std::string gid;
  std::string id;
  std::string initiator;
  std::string responder;
};

int key_setup(const KeyArgs& a) {
  KeyState st;
  st.seed = a.seed;
  if (a.bits_p == 0) {
    st.params = auth::toy_params();
  } else {
    Drbg rng = st.rng();
    st.params = auth::ta_setup(a.bits_p, a.bits_q ? a.bits_q : 256, rng);
  }
  save_state(a.state, st);
  std::cout << "p = " << st.params.p.get_str() << "\nq = " << st.params.q.get_str()
            << "\nalpha = " << st.params.alpha.get_str() << "\nwrote " << a.state << "\n";
  return 0;
}

int key_group(const KeyArgs& a) {
  KeyState st = load_state(a.state);
  if (a.gid.empty()) throw UsageError("group needs --gid");
  if (st.group(a.gid)) throw UsageError("group '" + a.gid + "' already exists");
  Drbg rng = st.rng();
  st.groups.push_back(auth::ta_create_group(st.params, a.gid, rng));
  save_state(a.state, st);
  std::cout << "gid = " << a.gid << "\ny = " << st.groups.back().y.get_str() << "\n";
  return 0;
}

int key_register(const KeyArgs& a) {
  KeyState st = load_state(a.state);
  const auth::GroupParams* g = st.group(a.gid);
  if (!g) throw UsageError("unknown gid '" + a.gid + "'");
  Drbg rng = st.rng();
  auth::Certificate cert;
  if (a.id.empty()) {
    cert = auth::ta_register(*g, st.params, rng);
  } else {
    for (const auto& [_, c] : st.members) {
      if (c.id == a.id) throw UsageError("id '" + a.id + "' is already registered");
    }
    for (;;) {
      try {
        cert = auth::ta_register_with(*g, st.params, a.id, rng.nonzero_below(st.params.q));
        break;
      } catch (const std::invalid_argument&) {
        // e hashed to zero; draw another nonce
      }
    }
  }
  st.members.emplace_back(g->gid, cert);
  save_state(a.state, st);
  std::cout << "id = " << cert.id << "\ne = " << cert.e.get_str() << "\ns = " << cert.s.get_str()
            << "\n";
  return 0;
}

int key_revoke(const KeyArgs& a) {
  KeyState st = load_state(a.state);
  if (a.id.empty()) throw UsageError("revoke needs --id");
  bool known = false;
  for (const auto& [_, c] : st.members) known = known || c.id == a.id;
  if (!known) throw UsageError("unknown id '" + a.id + "'");
  st.revoked.revoke(a.id);
  save_state(a.state, st);
  std::cout << "revoked " << a.id << " (" << st.revoked.size() << " on the list)\n";
  return 0;
}

class PrintingSink : public auth::FrameSink {
 public:
  void frame(prif::NodeId from, prif::NodeId to, std::span<const std::uint8_t> bytes) override {
    std::cout << "  wire " << (from.value == 0 ? "A" : "B") << " -> " << (to.value == 0 ? "A" : "B")
              << " (" << bytes.size() << " bytes): " << to_hex(bytes) << "\n";
  }
};

int key_handshake_demo(const KeyArgs& a) {
  KeyState st;
  const bool from_file = fs::exists(a.state);
  if (from_file) {
    st = load_state(a.state);
  } else {
    st.seed = a.seed;
    st.params = auth::toy_params();
  }
  // Demo parties: the named members, else the first two registered, else
  // two fresh members of a fresh group.
  const auto find = [&](const std::string& id) -> const std::pair<std::string, auth::Certificate>* {
    for (const auto& m : st.members) {
      if (m.second.id == id) return &m;
    }
    return nullptr;
  };
  std::vector<std::pair<std::string, auth::Certificate>> parties;
  if (!a.initiator.empty() || !a.responder.empty()) {
    for (const std::string& id : {a.initiator, a.responder}) {
      const auto* m = find(id);
      if (!m) throw UsageError("unknown member id '" + id + "'");
      parties.push_back(*m);
    }
  } else if (st.members.size() >= 2) {
    parties = {st.members[0], st.members[1]};
  } else {
    Drbg rng = st.rng();
    if (st.groups.empty()) st.groups.push_back(auth::ta_create_group(st.params, "demo", rng));
    while (st.members.size() < 2) {
      const auto& g = st.groups.front();
      st.members.emplace_back(g.gid, auth::ta_register(g, st.params, rng));
    }
    parties = {st.members[0], st.members[1]};
  }

  const auth::SystemParams& P = st.params;
  const auth::GroupDirectory dir = st.directory();
  std::cout << "system: p = " << P.p.get_str() << ", q = " << P.q.get_str()
            << ", alpha = " << P.alpha.get_str() << "\n";
  for (int i = 0; i < 2; ++i) {
    const auto& [gid, c] = parties[i];
    const auto y = dir.lookup(gid);
    std::cout << (i == 0 ? "A" : "B") << ": id = " << c.id << ", gid = " << gid
              << ", y = " << (y ? y->get_str() : "?") << ", e = " << c.e.get_str()
              << ", s = " << c.s.get_str() << (st.revoked.contains(c.id) ? "  [revoked]" : "")
              << "\n";
  }

  Drbg rng = st.rng();
  std::cout << "round 1\n";
  const auth::Session sa = auth::handshake_round1(parties[0].second, parties[0].first,
                                                  auth::Role::Initiator, P, rng);
  const auth::Session sb = auth::handshake_round1(parties[1].second, parties[1].first,
                                                  auth::Role::Responder, P, rng);
  for (const auth::Session* s : {&sa, &sb}) {
    const auth::HandshakeMsg1 m = auth::HandshakeMsg1::decode(s->sent);
    std::cout << "  " << (s == &sa ? "A" : "B") << " sends Y = " << m.commitment.get_str()
              << ", B = " << m.ephemeral_public.get_str() << " (b = " << s->ephemeral.get_str()
              << ")\n";
    std::cout << "  wire: " << to_hex(s->sent) << "\n";
  }

  std::cout << "round 2\n";
  const auth::Round2 ra = auth::handshake_round2(sa, sb.sent, st.revoked, P, rng);
  const auth::Round2 rb = auth::handshake_round2(sb, sa.sent, st.revoked, P, rng);
  for (const auth::Round2* r : {&ra, &rb}) {
    const char* who = r == &ra ? "A" : "B";
    if (r->reject) {
      std::cout << "  " << who << " rejects the peer (" << auth::to_string(r->reason)
                << ") and sends a random tag\n";
    } else {
      std::cout << "  " << who << " sends h = " << to_hex(r->msg.h) << "\n";
    }
    std::cout << "  wire: " << to_hex(r->msg.encode()) << "\n";
  }

  std::cout << "verification\n";
  const bool a_ok = !ra.reject && auth::verify_confirmation(sa, sb.sent, dir, rb.msg, P);
  const bool b_ok = !rb.reject && auth::verify_confirmation(sb, sa.sent, dir, ra.msg, P);
  std::cout << "  A " << (a_ok ? "accepts" : "rejects") << " B\n";
  std::cout << "  B " << (b_ok ? "accepts" : "rejects") << " A\n";

  if (from_file) save_state(a.state, st);
  if (a_ok && b_ok) {
    std::cout << "result: both accept\n";
  } else if ((ra.reject && ra.reason == auth::RejectReason::Revoked) ||
             (rb.reject && rb.reason == auth::RejectReason::Revoked)) {
    std::cout << "result: reject (revoked)\n";
  } else {
    std::cout << "result: reject\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving interest-based forwarding: simulator and key tool"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "run one scenario or a sweep");
  run_cmd->add_option("--config", run.config, "scenario INI file")->required();
  run_cmd->add_option("--router", run.routers, "router list: " + sim::router_names());
  run_cmd->add_option("--sweep", run.sweep, "sweep axis: buffer, ttl, time");
  run_cmd->add_option("--values", run.values, "comma-separated axis values (buffer takes KB/MB)");
  run_cmd->add_option("--seeds", run.seeds, "seed list, e.g. 1,2,3 or 1..10");
  run_cmd->add_option("--out", run.out, "output directory")->capture_default_str();
  run_cmd->add_option("--format", run.format, "csv, json or both")->capture_default_str();
  run_cmd->add_option("--jobs", run.jobs, "parallel runs")->capture_default_str();
  run_cmd->add_flag("--trace", run.trace, "write an event trace per run");

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  CLI::App* plot_cmd = app.add_subcommand("plotdata", "aggregate sweep CSVs into mean/std tables");
  plot_cmd->add_option("csv", plot_inputs, "sweep CSV files");
  plot_cmd->add_option("--out", plot_out, "output file (default stdout)");

  KeyArgs key;
  CLI::App* key_cmd = app.add_subcommand("keytool", "trust-authority operations");
  key_cmd->require_subcommand(1);
  key_cmd->add_option("--state", key.state, "key state file")->capture_default_str();
  CLI::App* k_setup = key_cmd->add_subcommand("setup", "create system parameters");
  k_setup->add_option("--seed", key.seed, "randomness seed")->capture_default_str();
  k_setup->add_option("--bits-p", key.bits_p, "modulus size (0 = toy group)");
  k_setup->add_option("--bits-q", key.bits_q, "subgroup order size");
  CLI::App* k_group = key_cmd->add_subcommand("group", "create an interest group");
  k_group->add_option("--gid", key.gid, "group identifier")->required();
  CLI::App* k_register = key_cmd->add_subcommand("register", "issue a member certificate");
  k_register->add_option("--gid", key.gid, "group identifier")->required();
  k_register->add_option("--id", key.id, "member identity (default random)");
  CLI::App* k_revoke = key_cmd->add_subcommand("revoke", "add a member to the revocation list");
  k_revoke->add_option("--id", key.id, "member identity")->required();
  CLI::App* k_demo = key_cmd->add_subcommand("handshake-demo", "annotated two-party handshake");
  k_demo->add_option("--initiator", key.initiator, "initiator member id");
  k_demo->add_option("--responder", key.responder, "responder member id");
  k_demo->add_option("--seed", key.seed, "seed when no state file exists")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*plot_cmd) return cmd_plotdata(plot_inputs, plot_out);
    if (*k_setup) return key_setup(key);
    if (*k_group) return key_group(key);
    if (*k_register) return key_register(key);
    if (*k_revoke) return key_revoke(key);
    if (*k_demo) return key_handshake_demo(key);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
