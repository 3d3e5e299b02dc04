#include "prif/routing.h"

#include <algorithm>
#include <stdexcept>

namespace prif {

const char* to_string(Action a) {
  switch (a) {
    case Action::Deliver: return "deliver";
    case Action::Relay: return "relay";
    case Action::Hold: return "hold";
  }
  return "?";
}

const char* to_string(Reason r) {
  switch (r) {
    case Reason::DestinationMet: return "destination-met";
    case Reason::SameCommunityHigherInter: return "same-community-higher-inter";
    case Reason::CarrierOutsideDestInCommunity: return "carrier-outside-dest-in-community";
    case Reason::HigherIntra: return "higher-intra";
    case Reason::TieOrLower: return "tie-or-lower";
    case Reason::PeerLacksCopy: return "peer-lacks-copy";
    case Reason::PeerHasCopy: return "peer-has-copy";
    case Reason::HigherPredictability: return "higher-predictability";
  }
  return "?";
}

bool MessageBuffer::contains(MessageId id) const { return find(id) != nullptr; }

const Message* MessageBuffer::find(MessageId id) const {
  for (const Message& m : messages_) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

void MessageBuffer::insert(Message m) {
  if (m.size_bytes > free_bytes()) throw std::logic_error("message does not fit in buffer");
  if (contains(m.id)) throw std::logic_error("duplicate message in buffer");
  used_ += m.size_bytes;
  messages_.push_back(std::move(m));
}

std::optional<Message> MessageBuffer::erase(MessageId id) {
  const auto it = std::find_if(messages_.begin(), messages_.end(),
                               [id](const Message& m) { return m.id == id; });
  if (it == messages_.end()) return std::nullopt;
  Message out = std::move(*it);
  messages_.erase(it);
  used_ -= out.size_bytes;
  return out;
}

std::vector<Message> MessageBuffer::erase_if(const std::function<bool(const Message&)>& pred) {
  std::vector<Message> removed;
  std::vector<Message> kept;
  kept.reserve(messages_.size());
  for (Message& m : messages_) {
    if (pred(m)) {
      used_ -= m.size_bytes;
      removed.push_back(std::move(m));
    } else {
      kept.push_back(std::move(m));
    }
  }
  messages_ = std::move(kept);
  return removed;
}

std::vector<Message> MessageBuffer::purge_expired(SimTime now) {
  return erase_if([now](const Message& m) { return message_is_expired(m, now); });
}

RouterState::RouterState(NodeId node_id, InterestId interest_id, std::string group_id,
                         std::uint64_t capacity_bytes, EnergyParams energy_params)
    : node(node_id),
      interest(interest_id),
      gid(std::move(group_id)),
      energy(node_id, interest_id, energy_params),
      buffer(capacity_bytes) {}

PeerView view_of(const RouterState& peer, InterestId community) {
  return PeerView{peer.node, community, &peer.energy};
}

std::optional<InterestId> AuthContext::community_of(std::string_view gid) const {
  if (communities == nullptr) return std::nullopt;
  const auto it = communities->find(gid);
  if (it == communities->end()) return std::nullopt;
  return it->second;
}

bool on_contact_start(RouterState& a, RouterState& b, const AuthContext& ctx, Drbg& rng,
                      auth::FrameSink* sink) {
  const auth::Party pa{a.node, &a.cert, a.gid};
  const auth::Party pb{b.node, &b.cert, b.gid};
  const auth::HandshakeOutcome outcome =
      auth::run_handshake(pa, pb, *ctx.params, *ctx.directory, *ctx.revoked, rng, sink);
  if (!outcome.mutual()) return false;

  const auto community_b = ctx.community_of(outcome.initiator_sees_gid);
  const auto community_a = ctx.community_of(outcome.responder_sees_gid);
  if (!community_a || !community_b) return false;
  a.peers_verified[b.node] = VerifiedPeer{outcome.initiator_sees_gid, *community_b};
  b.peers_verified[a.node] = VerifiedPeer{outcome.responder_sees_gid, *community_a};
  return true;
}

void on_contact_end(RouterState& a, RouterState& b, const ContactEvent& contact) {
  const auto ia = a.peers_verified.find(b.node);
  const auto ib = b.peers_verified.find(a.node);
  if (ia == a.peers_verified.end() || ib == b.peers_verified.end()) {
    a.peers_verified.erase(b.node);
    b.peers_verified.erase(a.node);
    return;
  }
  const InterestId b_seen_by_a = ia->second.community;
  const InterestId a_seen_by_b = ib->second.community;
  a.peers_verified.erase(ia);
  b.peers_verified.erase(ib);
  if (!a.tracks_energy || !b.tracks_energy) return;

  const SimTime now = contact.end;
  if (b_seen_by_a == a.interest && a_seen_by_b == b.interest) {
    a.energy.update_direct_inter(b.node, b_seen_by_a, contact);
    b.energy.update_direct_inter(a.node, a_seen_by_b, contact);
    // Summaries are snapshots taken after both direct updates.
    const auto summary_a = a.energy.summary(now);
    const auto summary_b = b.energy.summary(now);
    a.energy.update_transitive_inter(b.node, summary_b, now);
    b.energy.update_transitive_inter(a.node, summary_a, now);
  } else {
    a.energy.update_intra(b_seen_by_a, now);
    b.energy.update_intra(a_seen_by_b, now);
  }
}

ForwardDecision decide_forward(const RouterState& carrier, const PeerView& peer,
                               const Message& m, SimTime now) {
  if (peer.node == m.destination) return {Action::Deliver, Reason::DestinationMet};

  const bool carrier_in_dest = carrier.interest == m.dest_interest;
  const bool peer_in_dest = peer.community == m.dest_interest;
  if (carrier_in_dest) {
    if (peer_in_dest && peer.energy->effective_inter(m.destination, now) >
                            carrier.energy.effective_inter(m.destination, now)) {
      return {Action::Relay, Reason::SameCommunityHigherInter};
    }
    return {Action::Hold, Reason::TieOrLower};
  }
  if (peer_in_dest) return {Action::Relay, Reason::CarrierOutsideDestInCommunity};
  if (peer.energy->effective_intra(m.dest_interest, now) >
      carrier.energy.effective_intra(m.dest_interest, now)) {
    return {Action::Relay, Reason::HigherIntra};
  }
  return {Action::Hold, Reason::TieOrLower};
}

namespace {

struct ScheduleKey {
  bool own_community;
  double energy;
  SimTime created_at;
  MessageId id;
  const Message* msg;
};

// Strict weak order: earlier = transmitted sooner.
bool transmits_before(const ScheduleKey& x, const ScheduleKey& y) {
  if (x.own_community != y.own_community) return x.own_community;
  if (x.energy != y.energy) return x.energy > y.energy;
  if (x.created_at != y.created_at) return x.created_at > y.created_at;
  return x.id < y.id;
}

std::vector<ScheduleKey> schedule_keys(const RouterState& carrier, SimTime now) {
  std::vector<ScheduleKey> keys;
  keys.reserve(carrier.buffer.size());
  for (const Message& m : carrier.buffer.messages()) {
    const bool own = carrier.interest == m.dest_interest;
    const double e = own ? carrier.energy.effective_inter(m.destination, now)
                         : carrier.energy.effective_intra(m.dest_interest, now);
    keys.push_back({own, e, m.created_at, m.id, &m});
  }
  std::sort(keys.begin(), keys.end(), transmits_before);
  return keys;
}

}  // namespace

std::vector<const Message*> schedule_messages(const RouterState& carrier, SimTime now) {
  std::vector<const Message*> out;
  for (const ScheduleKey& k : schedule_keys(carrier, now)) out.push_back(k.msg);
  return out;
}

std::vector<const Message*> eviction_order(const RouterState& carrier, SimTime now) {
  auto out = schedule_messages(carrier, now);
  std::reverse(out.begin(), out.end());
  return out;
}

AdmitResult admit_with_policy(RouterState& carrier, Message m, SimTime now,
                              const EvictionPolicy& policy) {
  AdmitResult result;
  result.expired = carrier.buffer.purge_expired(now);
  for (const Message& gone : result.expired) carrier.received_at.erase(gone.id);

  if (message_is_expired(m, now)) {
    result.status = AdmitStatus::Expired;
    return result;
  }
  if (m.size_bytes > carrier.buffer.capacity()) {
    result.status = AdmitStatus::Oversize;
    return result;
  }
  if (carrier.buffer.contains(m.id)) {
    result.status = AdmitStatus::Duplicate;
    return result;
  }
  if (m.size_bytes > carrier.buffer.free_bytes()) {
    for (MessageId victim : policy(carrier, now)) {
      if (auto gone = carrier.buffer.erase(victim)) {
        carrier.received_at.erase(victim);
        result.evicted.push_back(std::move(*gone));
      }
      if (m.size_bytes <= carrier.buffer.free_bytes()) break;
    }
  }
  carrier.received_at[m.id] = now;
  carrier.buffer.insert(std::move(m));
  return result;
}

AdmitResult admit_message(RouterState& carrier, Message m, SimTime now) {
  static const EvictionPolicy energy_order = [](const RouterState& c, SimTime t) {
    std::vector<MessageId> ids;
    for (const Message* msg : eviction_order(c, t)) ids.push_back(msg->id);
    return ids;
  };
  return admit_with_policy(carrier, std::move(m), now, energy_order);
}

DeliveryResult process_delivery(RouterState& dest, const Message& m) {
  if (m.destination != dest.node) throw std::invalid_argument("message is not addressed to this node");
  DeliveryResult result;
  if (dest.delivered_ids.contains(m.id)) return result;
  try {
    result.plaintext = unseal_payload(m.payload, dest.pseudo_identity(), dest.seal_key);
    result.integrity_ok = true;
  } catch (const IntegrityError&) {
    return result;
  }
  dest.delivered_ids.insert(m.id);
  result.first_copy = true;
  return result;
}

AntiPacketResult exchange_antipackets(RouterState& a, RouterState& b) {
  AntiPacketResult result;
  if (a.delivered_ids.empty() && b.delivered_ids.empty()) return result;
  a.delivered_ids.insert(b.delivered_ids.begin(), b.delivered_ids.end());
  b.delivered_ids = a.delivered_ids;
  const auto sweep = [](RouterState& s, std::vector<MessageId>& dropped) {
    for (const Message& m : s.buffer.erase_if(
             [&](const Message& x) { return s.delivered_ids.contains(x.id); })) {
      s.received_at.erase(m.id);
      dropped.push_back(m.id);
    }
  };
  sweep(a, result.dropped_by_a);
  sweep(b, result.dropped_by_b);
  return result;
}

}  // namespace prif
