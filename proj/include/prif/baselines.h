#pragma once

// Comparison routers that share the forwarding interface: Epidemic flooding,
// PRoPHET delivery predictability, and a community-energy router whose
// contact setup exchanges interests in plaintext (no handshake, no
// revocation) so that only the privacy layer differs.

#include <map>
#include <string>

#include "prif/auth.h"
#include "prif/core.h"
#include "prif/routing.h"

namespace prif {

ForwardDecision epidemic_decide(NodeId peer, bool peer_has_copy, const Message& m);

struct ProphetParams {
  double p_init = 0.75;
  double beta = 0.25;
  double gamma = 0.98;
  double time_unit = 30.0;  // seconds per aging step
};

class ProphetState {
 public:
  explicit ProphetState(NodeId owner, ProphetParams params = {});

  /// P(a,b) <- P + (1 - P) * p_init
  void encounter(NodeId peer, SimTime now);
  /// P(a,c) <- P + (1 - P) * P(a,b) * P(b,c) * beta for every c known to `via`.
  void transitive(NodeId via, const ProphetState& via_state, SimTime now);
  /// P <- P * gamma^k
  void age(SimTime now);

  double predictability(NodeId peer, SimTime now) const;
  const std::map<NodeId, double>& table() const { return predictability_; }
  NodeId owner() const { return owner_; }
  const ProphetParams& params() const { return params_; }

 private:
  NodeId owner_;
  ProphetParams params_;
  std::map<NodeId, double> predictability_;
  SimTime last_aged_at_ = 0.0;
};

/// Applies encounter then transitivity on both sides, each using the other's
/// pre-contact table.
void prophet_contact(ProphetState& a, ProphetState& b, SimTime now);

ForwardDecision prophet_decide(const ProphetState& carrier, const ProphetState& peer,
                               bool peer_has_copy, const Message& m, SimTime now);

/// Same decision surface as decide_forward.
ForwardDecision prif_noprivacy_decide(const RouterState& carrier, const PeerView& peer,
                                      const Message& m, SimTime now);

inline constexpr std::uint8_t kHelloTag = 0x10;

/// Plaintext hello: tag 0x10 || node id (u32) || interest (u16).
struct PlainHello {
  NodeId node;
  InterestId interest;

  Bytes encode() const;
  static PlainHello decode(std::span<const std::uint8_t> frame);
};

/// Contact setup without privacy: both sides announce their interest in the
/// clear and record each other as verified. Never rejects.
bool on_contact_start_plain(RouterState& a, RouterState& b,
                            const std::map<InterestId, std::string>& gid_of,
                            auth::FrameSink* sink = nullptr);

}  // namespace prif
