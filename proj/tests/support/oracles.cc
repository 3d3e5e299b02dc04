#include "oracles.h"

#include <algorithm>
#include <set>
#include <string>

namespace prif::testing {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double EnergyOracle::age_copy(Rec r, SimTime t) const {
  while (t - r.last_aged_at >= params_.window) {
    r.value *= params_.gamma;
    r.last_aged_at += params_.window;
  }
  return r.value;
}

const EnergyOracle::Replay& EnergyOracle::replay() const {
  if (!cached_) cached_ = evaluate();
  return *cached_;
}

EnergyOracle::Replay EnergyOracle::evaluate() const {
  Replay st;
  std::map<NodeId, std::vector<DirectEvent>> encounters;
  std::map<InterestId, std::vector<SimTime>> meetings;

  const auto age_all = [&](SimTime now) {
    for (auto& [_, r] : st.inter) {
      while (now - r.last_aged_at >= params_.window) {
        r.value *= params_.gamma;
        r.last_aged_at += params_.window;
      }
    }
    for (auto& [_, r] : st.intra) {
      while (now - r.last_aged_at >= params_.window) {
        r.value *= params_.gamma;
        r.last_aged_at += params_.window;
      }
    }
  };

  for (const EnergyEvent& ev : events_) {
    std::visit(
        overloaded{
            [&](const DirectEvent& d) {
              age_all(d.end);
              auto& list = encounters[d.peer];
              list.push_back(d);
              std::vector<double> raw;
              SimTime previous_end = 0.0;
              for (const DirectEvent& x : list) {
                raw.push_back(std::min(1.0, (x.end - x.start) / (x.end - previous_end)));
                previous_end = x.end;
              }
              const double cur = raw.back();
              const double prev = raw.size() > 1 ? raw[raw.size() - 2] : cur;
              st.inter[d.peer] = Rec{params_.alpha * prev + (1.0 - params_.alpha) * cur, d.end};
            },
            [&](const TransitiveEvent& t) {
              if (t.summary.empty()) return;
              age_all(t.now);
              const auto via = st.inter.find(t.via);
              if (via == st.inter.end() || via->second.value == 0.0) return;
              const double e_ab = via->second.value;
              for (const PeerEnergy& pe : t.summary) {
                if (pe.peer == owner_ || pe.peer == t.via) continue;
                auto it = st.inter.find(pe.peer);
                if (it == st.inter.end()) it = st.inter.emplace(pe.peer, Rec{0.0, t.now}).first;
                const double old = it->second.value;
                it->second.value = old + (1.0 - old) * e_ab * pe.value;
              }
            },
            [&](const IntraEvent& m) {
              age_all(m.now);
              auto& times = meetings[m.community];
              times.push_back(m.now);
              std::vector<double> obs;
              for (std::size_t n = 1; n <= times.size(); ++n) {
                const double span = std::max(times[n - 1] - times[0], params_.window);
                obs.push_back(n == 1 ? 1.0 / params_.window : static_cast<double>(n) / span);
              }
              const double cur = obs.back();
              const double prev = obs.size() > 1 ? obs[obs.size() - 2] : cur;
              st.intra[m.community] = Rec{params_.beta * prev + (1.0 - params_.beta) * cur, m.now};
            },
        },
        ev);
  }
  return st;
}

double EnergyOracle::inter(NodeId peer, SimTime t) const {
  const Replay& st = replay();
  const auto it = st.inter.find(peer);
  return it == st.inter.end() ? 0.0 : age_copy(it->second, t);
}

double EnergyOracle::intra(InterestId community, SimTime t) const {
  const Replay& st = replay();
  const auto it = st.intra.find(community);
  return it == st.intra.end() ? 0.0 : age_copy(it->second, t);
}

Published published_forwarding(bool encountered_is_destination, int interest_s, int interest_i,
                               int interest_d, double inter_s_d, double inter_i_d,
                               double intra_s_Id, double intra_i_Id) {
  // When N_s with a message M destined for N_d encounters a node N_i.
  if (encountered_is_destination) {
    return Published::DeliverToDestination;
  } else {
    if (interest_s == interest_d) {
      // N_s belongs to the destination community
      if (interest_i == interest_d) {
        // N_i belongs to the destination community
        if (inter_s_d < inter_i_d) {
          // N_i has higher inter-community energy
          return Published::HandToEncountered;
        }
      }
    } else {
      // N_s does not belong to the destination community
      if (interest_i == interest_d) {
        // N_i belongs to the destination community
        return Published::HandToEncountered;
      } else {
        // N_i does not belong to the destination community
        if (intra_s_Id < intra_i_Id) {
          // N_i has higher intra-community energy
          return Published::HandToEncountered;
        }
      }
    }
  }
  return Published::NoTransfer;
}

void randomize_energy(EnergyTable& table, int interests, std::uint32_t nodes, std::mt19937_64& rng,
                      int events) {
  std::uniform_int_distribution<std::uint32_t> pick_node(0, nodes - 1);
  std::uniform_int_distribution<int> pick_interest(0, interests - 1);
  std::uniform_int_distribution<int> gap(1, 400);
  std::uniform_int_distribution<int> length(1, 120);
  SimTime now = 0.0;
  for (int e = 0; e < events; ++e) {
    now += gap(rng);
    if (rng() % 2 == 0) {
      const NodeId peer{pick_node(rng)};
      if (peer == table.owner()) continue;
      const double start = std::max(0.0, now - length(rng));
      if (start >= now) continue;
      table.update_direct_inter(peer, table.owner_interest(), make_contact(table.owner(), peer, start, now));
    } else {
      const InterestId c{static_cast<std::uint16_t>(pick_interest(rng))};
      if (c == table.owner_interest()) continue;
      table.update_intra(c, now);
    }
  }
}

std::optional<Violation> check_schedule(const RouterState& carrier, SimTime now) {
  const auto order = schedule_messages(carrier, now);
  if (order.size() != carrier.buffer.size()) return Violation{"schedule does not cover the buffer"};
  std::set<MessageId> ids;
  for (const Message* m : order) ids.insert(m->id);
  if (ids.size() != order.size()) return Violation{"schedule repeats a message"};

  const auto own = [&](const Message* m) { return m->dest_interest == carrier.interest; };
  const auto energy = [&](const Message* m) {
    return own(m) ? carrier.energy.effective_inter(m->destination, now)
                  : carrier.energy.effective_intra(m->dest_interest, now);
  };
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Message* x = order[i - 1];
    const Message* y = order[i];
    if (!own(x) && own(y)) return Violation{"foreign-community message ahead of own-community message"};
    if (own(x) != own(y)) continue;
    if (energy(x) < energy(y)) return Violation{"lower energy scheduled first"};
    if (energy(x) > energy(y)) continue;
    if (x->created_at < y->created_at) return Violation{"older message first on an energy tie"};
    if (x->created_at == y->created_at && x->id > y->id) return Violation{"id tie-break violated"};
  }

  auto reversed = eviction_order(carrier, now);
  std::reverse(reversed.begin(), reversed.end());
  if (reversed != order) return Violation{"eviction order is not the reverse of the schedule"};
  return std::nullopt;
}

std::optional<Violation> check_buffer(const RouterState& carrier) {
  std::uint64_t sum = 0;
  std::set<MessageId> ids;
  for (const Message& m : carrier.buffer.messages()) {
    sum += m.size_bytes;
    if (!ids.insert(m.id).second) return Violation{"duplicate message id in buffer"};
    if (!carrier.received_at.contains(m.id)) return Violation{"buffered message without arrival time"};
  }
  if (sum != carrier.buffer.used()) return Violation{"used bytes disagree with contents"};
  if (sum > carrier.buffer.capacity()) return Violation{"buffer over capacity"};
  if (carrier.received_at.size() != ids.size()) return Violation{"stale arrival records"};
  return std::nullopt;
}

}  // namespace prif::testing
