#include "prif/energy.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace prif {

double predict_inter(const InterEnergyRecord& rec, double alpha) {
  return alpha * rec.prev_observed + (1.0 - alpha) * rec.observed;
}

double predict_intra(const IntraEnergyRecord& rec, double beta) {
  return beta * rec.prev_observed + (1.0 - beta) * rec.observed;
}

long aging_intervals(double elapsed, double window) {
  if (!(elapsed > 0.0)) return 0;
  return static_cast<long>(std::floor(elapsed / window));
}

double transitive_energy(double old_value, double via, double onward) {
  return old_value + (1.0 - old_value) * via * onward;
}

EnergyTable::EnergyTable(NodeId owner, InterestId owner_interest, EnergyParams params)
    : owner_(owner), owner_interest_(owner_interest), params_(params) {
  if (!(params_.window > 0.0)) throw std::invalid_argument("aging window must be positive");
  if (!(params_.gamma > 0.0 && params_.gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0,1)");
  if (params_.alpha < 0.0 || params_.alpha > 1.0 || params_.beta < 0.0 || params_.beta > 1.0)
    throw std::invalid_argument("prediction factors must lie in [0,1]");
}

double EnergyTable::aged(double value, SimTime last_aged_at, SimTime now) const {
  const long k = aging_intervals(now - last_aged_at, params_.window);
  return k == 0 ? value : value * std::pow(params_.gamma, static_cast<double>(k));
}

void EnergyTable::age(SimTime now) {
  const auto step = [&](double& value, SimTime& last_aged_at) {
    const long k = aging_intervals(now - last_aged_at, params_.window);
    if (k == 0) return;
    value *= std::pow(params_.gamma, static_cast<double>(k));
    last_aged_at += static_cast<double>(k) * params_.window;
  };
  for (auto& [_, rec] : inter_) step(rec.value, rec.last_aged_at);
  for (auto& [_, rec] : intra_) step(rec.value, rec.last_aged_at);
}

void EnergyTable::update_direct_inter(NodeId peer, InterestId peer_interest,
                                      const ContactEvent& contact) {
  if (peer_interest != owner_interest_)
    throw std::invalid_argument("inter-community energy requires a same-community peer");
  if (!contact.involves(owner_) || contact.other(owner_) != peer)
    throw std::invalid_argument("contact does not join owner and peer");

  const SimTime now = contact.end;
  age(now);

  auto [it, inserted] = inter_.try_emplace(peer);
  InterEnergyRecord& rec = it->second;
  if (inserted) rec.peer = peer;

  const SimTime since = rec.encounter_count > 0 ? rec.last_encounter_end : 0.0;
  const double raw = std::min(1.0, contact.duration() / (now - since));

  rec.prev_observed = rec.encounter_count > 0 ? rec.observed : raw;
  rec.observed = raw;
  rec.value = predict_inter(rec, params_.alpha);
  rec.last_encounter_end = now;
  rec.last_aged_at = now;
  ++rec.encounter_count;
}

void EnergyTable::update_transitive_inter(NodeId via, std::span<const PeerEnergy> summary,
                                          SimTime now) {
  if (summary.empty()) return;
  age(now);
  const auto via_it = inter_.find(via);
  if (via_it == inter_.end()) return;
  const double via_energy = via_it->second.value;
  if (via_energy == 0.0) return;

  for (const PeerEnergy& entry : summary) {
    if (entry.peer == owner_ || entry.peer == via) continue;
    auto [it, inserted] = inter_.try_emplace(entry.peer);
    InterEnergyRecord& rec = it->second;
    if (inserted) {
      rec.peer = entry.peer;
      rec.last_aged_at = now;
    }
    rec.value = transitive_energy(rec.value, via_energy, entry.value);
  }
}

void EnergyTable::update_intra(InterestId community, SimTime now) {
  if (community == owner_interest_)
    throw std::invalid_argument("intra-community energy is kept for foreign communities only");
  age(now);

  auto [it, inserted] = intra_.try_emplace(community);
  IntraEnergyRecord& rec = it->second;
  if (inserted) {
    rec.community = community;
    rec.cumulative_count = 1;
    rec.first_encounter = now;
    rec.observed = 1.0 / params_.window;
    rec.prev_observed = rec.observed;
  } else {
    ++rec.cumulative_count;
    const double span = std::max(now - rec.first_encounter, params_.window);
    rec.prev_observed = rec.observed;
    rec.observed = static_cast<double>(rec.cumulative_count) / span;
  }
  rec.value = predict_intra(rec, params_.beta);
  rec.last_aged_at = now;
}

double EnergyTable::effective_inter(NodeId peer, SimTime now) const {
  const auto it = inter_.find(peer);
  if (it == inter_.end()) return 0.0;
  return aged(it->second.value, it->second.last_aged_at, now);
}

double EnergyTable::effective_intra(InterestId community, SimTime now) const {
  const auto it = intra_.find(community);
  if (it == intra_.end()) return 0.0;
  return aged(it->second.value, it->second.last_aged_at, now);
}

std::vector<PeerEnergy> EnergyTable::summary(SimTime now) const {
  std::vector<PeerEnergy> out;
  out.reserve(inter_.size());
  for (const auto& [peer, rec] : inter_) {
    out.push_back({peer, aged(rec.value, rec.last_aged_at, now)});
  }
  return out;
}

void EnergyTable::dump(std::ostream& os) const {
  for (const auto& [peer, rec] : inter_) {
    os << "inter " << peer.value << ' ' << rec.value << ' ' << rec.prev_observed << ' '
       << rec.last_aged_at << '\n';
  }
  for (const auto& [community, rec] : intra_) {
    os << "intra " << community.value << ' ' << rec.value << ' ' << rec.prev_observed << ' '
       << rec.last_aged_at << '\n';
  }
}

}  // namespace prif
