#pragma once

// The community-energy router: contact setup over the membership handshake,
// energy awareness at contact end, per-message forwarding decisions,
// energy-ordered scheduling, reverse-order buffer eviction, and
// delivered-message anti-packets.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prif/auth.h"
#include "prif/core.h"
#include "prif/energy.h"
#include "prif/seal.h"

namespace prif {

enum class Action { Deliver, Relay, Hold };

enum class Reason {
  DestinationMet,
  SameCommunityHigherInter,
  CarrierOutsideDestInCommunity,
  HigherIntra,
  TieOrLower,
  // baseline routers
  PeerLacksCopy,
  PeerHasCopy,
  HigherPredictability,
};

struct ForwardDecision {
  Action action = Action::Hold;
  Reason reason = Reason::TieOrLower;
  friend bool operator==(const ForwardDecision&, const ForwardDecision&) = default;
};

const char* to_string(Action a);
const char* to_string(Reason r);

/// Byte-bounded message store. Insertion order is kept.
class MessageBuffer {
 public:
  explicit MessageBuffer(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t used() const { return used_; }
  std::uint64_t free_bytes() const { return capacity_ - used_; }
  std::size_t size() const { return messages_.size(); }
  bool empty() const { return messages_.empty(); }

  bool contains(MessageId id) const;
  const Message* find(MessageId id) const;
  const std::vector<Message>& messages() const { return messages_; }

  /// Throws std::logic_error if the message does not fit or is a duplicate.
  void insert(Message m);
  std::optional<Message> erase(MessageId id);
  std::vector<Message> purge_expired(SimTime now);
  std::vector<Message> erase_if(const std::function<bool(const Message&)>& pred);

 private:
  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::vector<Message> messages_;
};

struct VerifiedPeer {
  std::string gid;
  InterestId community;
};

struct RouterState {
  RouterState(NodeId node, InterestId interest, std::string gid, std::uint64_t capacity_bytes,
              EnergyParams energy_params = {});

  NodeId node;
  InterestId interest;
  std::string gid;
  EnergyTable energy;
  MessageBuffer buffer;
  std::set<MessageId> delivered_ids;  // anti-packet list
  auth::Certificate cert;
  SealKey seal_key{};
  bool tracks_energy = true;
  std::map<NodeId, VerifiedPeer> peers_verified;  // peers in active, authenticated contacts
  std::map<MessageId, SimTime> received_at;

  const std::string& pseudo_identity() const { return cert.id; }
};

/// What a carrier can see of a peer during an authenticated contact: the
/// peer's community label (from its verified GID) and the energies it shares.
struct PeerView {
  NodeId node;
  InterestId community;
  const EnergyTable* energy = nullptr;
};

PeerView view_of(const RouterState& peer, InterestId community);

/// Public information needed to authenticate and classify peers.
struct AuthContext {
  const auth::SystemParams* params = nullptr;
  const auth::GroupDirectory* directory = nullptr;
  const auth::RevocationList* revoked = nullptr;
  const std::map<std::string, InterestId, std::less<>>* communities = nullptr;  // gid -> label

  std::optional<InterestId> community_of(std::string_view gid) const;
};

/// Mutual handshake with `a` as initiator. On success each side records the
/// other's verified GID; on failure nothing is recorded and the contact
/// carries no traffic.
bool on_contact_start(RouterState& a, RouterState& b, const AuthContext& ctx, Drbg& rng,
                      auth::FrameSink* sink = nullptr);

/// Community-energy awareness at contact end. Same community: direct then
/// transitive inter-community updates on both sides. Different communities:
/// intra-community update keyed by the peer's verified community. A contact
/// that never authenticated changes nothing. Clears the per-contact records.
void on_contact_end(RouterState& a, RouterState& b, const ContactEvent& contact);

ForwardDecision decide_forward(const RouterState& carrier, const PeerView& peer,
                               const Message& m, SimTime now);

/// Transmission order. Messages for the carrier's own community come first,
/// by inter-community energy to the destination; the rest follow by
/// intra-community energy toward the destination community. Ties go to the
/// newer message, then to the lower id.
std::vector<const Message*> schedule_messages(const RouterState& carrier, SimTime now);

/// Exact reverse of schedule_messages.
std::vector<const Message*> eviction_order(const RouterState& carrier, SimTime now);

enum class AdmitStatus { Admitted, Duplicate, Oversize, Expired };

struct AdmitResult {
  AdmitStatus status = AdmitStatus::Admitted;
  std::vector<Message> evicted;
  std::vector<Message> expired;

  bool admitted() const { return status == AdmitStatus::Admitted; }
};

using EvictionPolicy =
    std::function<std::vector<MessageId>(const RouterState& carrier, SimTime now)>;

/// Purges expired messages, then evicts in `policy` order until `m` fits.
AdmitResult admit_with_policy(RouterState& carrier, Message m, SimTime now,
                              const EvictionPolicy& policy);

/// admit_with_policy using the community-energy eviction order.
AdmitResult admit_message(RouterState& carrier, Message m, SimTime now);

struct DeliveryResult {
  bool first_copy = false;
  bool integrity_ok = false;
  Bytes plaintext;
};

/// Records a delivery at its destination. Throws std::invalid_argument if
/// `dest` is not the message's destination.
DeliveryResult process_delivery(RouterState& dest, const Message& m);

struct AntiPacketResult {
  std::vector<MessageId> dropped_by_a;
  std::vector<MessageId> dropped_by_b;
};

AntiPacketResult exchange_antipackets(RouterState& a, RouterState& b);

}  // namespace prif
