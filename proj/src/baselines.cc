#include "prif/baselines.h"

#include <cmath>

#include "prif/energy.h"
#include "prif/wire.h"

namespace prif {

ForwardDecision epidemic_decide(NodeId peer, bool peer_has_copy, const Message& m) {
  if (peer == m.destination) return {Action::Deliver, Reason::DestinationMet};
  if (peer_has_copy) return {Action::Hold, Reason::PeerHasCopy};
  return {Action::Relay, Reason::PeerLacksCopy};
}

ProphetState::ProphetState(NodeId owner, ProphetParams params) : owner_(owner), params_(params) {}

void ProphetState::age(SimTime now) {
  const long k = aging_intervals(now - last_aged_at_, params_.time_unit);
  if (k == 0) return;
  const double factor = std::pow(params_.gamma, static_cast<double>(k));
  for (auto& [_, p] : predictability_) p *= factor;
  last_aged_at_ += static_cast<double>(k) * params_.time_unit;
}

void ProphetState::encounter(NodeId peer, SimTime now) {
  age(now);
  double& p = predictability_[peer];
  p = p + (1.0 - p) * params_.p_init;
}

void ProphetState::transitive(NodeId via, const ProphetState& via_state, SimTime now) {
  age(now);
  const auto ab = predictability_.find(via);
  if (ab == predictability_.end()) return;
  const double p_ab = ab->second;
  for (const auto& [c, _] : via_state.predictability_) {
    if (c == owner_ || c == via) continue;
    const double p_bc = via_state.predictability(c, now);
    double& p_ac = predictability_[c];
    p_ac = p_ac + (1.0 - p_ac) * p_ab * p_bc * params_.beta;
  }
}

double ProphetState::predictability(NodeId peer, SimTime now) const {
  const auto it = predictability_.find(peer);
  if (it == predictability_.end()) return 0.0;
  const long k = aging_intervals(now - last_aged_at_, params_.time_unit);
  return it->second * std::pow(params_.gamma, static_cast<double>(k));
}

void prophet_contact(ProphetState& a, ProphetState& b, SimTime now) {
  a.encounter(b.owner(), now);
  b.encounter(a.owner(), now);
  const ProphetState a_snapshot = a;
  a.transitive(b.owner(), b, now);
  b.transitive(a.owner(), a_snapshot, now);
}

ForwardDecision prophet_decide(const ProphetState& carrier, const ProphetState& peer,
                               bool peer_has_copy, const Message& m, SimTime now) {
  if (peer.owner() == m.destination) return {Action::Deliver, Reason::DestinationMet};
  if (peer_has_copy) return {Action::Hold, Reason::PeerHasCopy};
  if (peer.predictability(m.destination, now) > carrier.predictability(m.destination, now)) {
    return {Action::Relay, Reason::HigherPredictability};
  }
  return {Action::Hold, Reason::TieOrLower};
}

ForwardDecision prif_noprivacy_decide(const RouterState& carrier, const PeerView& peer,
                                      const Message& m, SimTime now) {
  return decide_forward(carrier, peer, m, now);
}

Bytes PlainHello::encode() const {
  ByteWriter w;
  w.u8(kHelloTag).u32(node.value).u16(interest.value);
  return std::move(w).bytes();
}

PlainHello PlainHello::decode(std::span<const std::uint8_t> frame) {
  ByteReader r(frame);
  if (r.u8() != kHelloTag) throw WireError("not a hello frame");
  PlainHello h;
  h.node = NodeId{r.u32()};
  h.interest = InterestId{r.u16()};
  r.expect_done();
  return h;
}

bool on_contact_start_plain(RouterState& a, RouterState& b,
                            const std::map<InterestId, std::string>& gid_of,
                            auth::FrameSink* sink) {
  const Bytes from_a = PlainHello{a.node, a.interest}.encode();
  const Bytes from_b = PlainHello{b.node, b.interest}.encode();
  if (sink) {
    sink->frame(a.node, b.node, from_a);
    sink->frame(b.node, a.node, from_b);
  }
  const PlainHello seen_by_a = PlainHello::decode(from_b);
  const PlainHello seen_by_b = PlainHello::decode(from_a);
  const auto label = [&](InterestId i) {
    const auto it = gid_of.find(i);
    return it == gid_of.end() ? std::string() : it->second;
  };
  a.peers_verified[b.node] = VerifiedPeer{label(seen_by_a.interest), seen_by_a.interest};
  b.peers_verified[a.node] = VerifiedPeer{label(seen_by_b.interest), seen_by_b.interest};
  return true;
}

}  // namespace prif
