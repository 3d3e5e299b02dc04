#pragma once

// Reference models written independently of the library: they re-evaluate
// from the complete event history instead of updating incrementally.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "prif/core.h"
#include "prif/energy.h"
#include "prif/routing.h"

namespace prif::testing {

struct DirectEvent {
  NodeId peer;
  SimTime start;
  SimTime end;
};
struct TransitiveEvent {
  NodeId via;
  std::vector<PeerEnergy> summary;
  SimTime now;
};
struct IntraEvent {
  InterestId community;
  SimTime now;
};
using EnergyEvent = std::variant<DirectEvent, TransitiveEvent, IntraEvent>;

/// Replays the whole history on every query. Aging multiplies by gamma one
/// window at a time; predictions come from the full observation lists.
class EnergyOracle {
 public:
  EnergyOracle(NodeId owner, EnergyParams params) : owner_(owner), params_(params) {}

  void record(EnergyEvent e) {
    events_.push_back(std::move(e));
    cached_.reset();
  }
  double inter(NodeId peer, SimTime t) const;
  double intra(InterestId community, SimTime t) const;

 private:
  struct Rec {
    double value = 0.0;
    SimTime last_aged_at = 0.0;
  };
  struct Replay {
    std::map<NodeId, Rec> inter;
    std::map<InterestId, Rec> intra;
  };
  const Replay& replay() const;
  Replay evaluate() const;
  double age_copy(Rec r, SimTime t) const;

  NodeId owner_;
  EnergyParams params_;
  std::vector<EnergyEvent> events_;
  mutable std::optional<Replay> cached_;
};

/// Outcome of the published forwarding pseudocode.
enum class Published { NoTransfer, DeliverToDestination, HandToEncountered };

/// Line-by-line transcription of the forwarding pseudocode. `e_*` arguments
/// are the energies it compares.
Published published_forwarding(bool encountered_is_destination, int interest_s, int interest_i,
                               int interest_d, double inter_s_d, double inter_i_d,
                               double intra_s_Id, double intra_i_Id);

/// Feeds a random same-community/foreign-community contact history into
/// `table` so that its inter and intra records take varied values.
void randomize_energy(EnergyTable& table, int interests, std::uint32_t nodes, std::mt19937_64& rng,
                      int events);

struct Violation {
  std::string what;
};

/// Checks the ordering rules of schedule_messages on `carrier` at `now`
/// and that eviction_order is its exact reverse.
std::optional<Violation> check_schedule(const RouterState& carrier, SimTime now);

/// Buffer bookkeeping: used == sum of sizes <= capacity, ids unique,
/// received_at keys match the buffer.
std::optional<Violation> check_buffer(const RouterState& carrier);

}  // namespace prif::testing
