#pragma once

// Community energy: the social-proximity metric driving forwarding.
//
// Inter-community energy is a pairwise tie between two members of the same
// community, built from contact duration over inter-encounter time and
// propagated transitively. Intra-community energy is a node's average rate
// of meeting members of one foreign community. Both are smoothed with an
// exponentially weighted moving average over the last two observations and
// decay by gamma per elapsed aging window.
//
// Aging is applied lazily: stored values are exact as of `last_aged_at`, and
// every read multiplies in gamma^k for the whole windows elapsed since then.

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "prif/core.h"

namespace prif {

struct EnergyParams {
  double alpha = 0.3;    // inter-community prediction weight on the older observation
  double beta = 0.3;     // intra-community prediction weight on the older observation
  double gamma = 0.98;   // aging factor per window
  double window = 30.0;  // aging window, seconds
};

struct InterEnergyRecord {
  NodeId peer;
  double value = 0.0;          // predicted (and aged) energy read by forwarding
  double observed = 0.0;       // latest raw d / t observation
  double prev_observed = 0.0;  // observation from the encounter before
  SimTime last_encounter_end = 0.0;
  SimTime last_aged_at = 0.0;
  std::uint32_t encounter_count = 0;
};

struct IntraEnergyRecord {
  InterestId community;
  std::uint64_t cumulative_count = 0;
  double value = 0.0;
  double observed = 0.0;
  double prev_observed = 0.0;
  SimTime first_encounter = 0.0;
  SimTime last_aged_at = 0.0;
};

/// (peer, energy) pair as exchanged between two same-community nodes.
struct PeerEnergy {
  NodeId peer;
  double value = 0.0;
};

/// Weighted moving average of the two most recent raw observations.
double predict_inter(const InterEnergyRecord& rec, double alpha);
double predict_intra(const IntraEnergyRecord& rec, double beta);

/// Number of whole aging windows contained in `elapsed`.
long aging_intervals(double elapsed, double window);

/// Transitive combination: old + (1 - old) * via * onward.
double transitive_energy(double old_value, double via, double onward);

class EnergyTable {
 public:
  EnergyTable(NodeId owner, InterestId owner_interest, EnergyParams params = {});

  NodeId owner() const { return owner_; }
  InterestId owner_interest() const { return owner_interest_; }
  const EnergyParams& params() const { return params_; }

  /// Direct encounter with a same-community peer; fires at contact end.
  /// Throws std::invalid_argument for a peer from another community or a
  /// contact the owner is not part of.
  void update_direct_inter(NodeId peer, InterestId peer_interest,
                           const ContactEvent& contact);

  /// Applies the transitive rule for every entry of `via`'s summary.
  void update_transitive_inter(NodeId via, std::span<const PeerEnergy> summary,
                               SimTime now);

  /// One more encounter with a member of `community` (not the owner's).
  void update_intra(InterestId community, SimTime now);

  /// Advances every record to `now`, applying gamma^k.
  void age(SimTime now);

  double effective_inter(NodeId peer, SimTime now) const;
  double effective_intra(InterestId community, SimTime now) const;

  /// The owner's effective inter-community energies, as sent to a peer.
  std::vector<PeerEnergy> summary(SimTime now) const;

  const std::map<NodeId, InterEnergyRecord>& inter() const { return inter_; }
  const std::map<InterestId, IntraEnergyRecord>& intra() const { return intra_; }

  /// One record per line: kind key value prev last_aged_at.
  void dump(std::ostream& os) const;

 private:
  double aged(double value, SimTime last_aged_at, SimTime now) const;

  NodeId owner_;
  InterestId owner_interest_;
  EnergyParams params_;
  std::map<NodeId, InterEnergyRecord> inter_;
  std::map<InterestId, IntraEnergyRecord> intra_;
};

}  // namespace prif
