#pragma once

// Scenario files: INI with sections.
//
//   [scenario]  preset, name, width, height, interests, interval, size, ttl,
//               buffer, duration, warmup, tick, seed, router, payload_bytes
//   [energy]    alpha, beta, gamma, window
//   [prophet]   p_init, beta, gamma, time_unit
//   [crypto]    bits_p, bits_q (bits_p = 0 selects the toy group)
//   [options]   per_node_interval, forward_and_delete, instant_antipackets,
//               baseline_antipackets, charge_handshake, bus_energy
//   [group.X]   class, count, speed, pause, radio_range, link_rate, generates
//
// `preset` (paper | desk) seeds every value; the remaining keys override it.
// Group sections, when present, replace the preset's groups in file order.
// Ranges are written "lo-hi" or "lo..hi" (size ranges only "lo..hi"); sizes
// take B/KB/MB/GB suffixes (powers of 1024); rates take bps/kbps/Mbps
// suffixes (powers of 1000).

#include <iosfwd>
#include <string>
#include <string_view>

#include "prif/sim.h"

namespace prif::sim {

double parse_number(std::string_view text);
std::uint64_t parse_size(std::string_view text);
double parse_rate(std::string_view text);
Range parse_range(std::string_view text);

/// Throws ScenarioError naming the offending key and `origin`.
Scenario parse_scenario(std::istream& in, const std::string& origin = "<config>");
Scenario load_scenario(const std::string& path);

std::string scenario_to_ini(const Scenario& s);

}  // namespace prif::sim
