#pragma once

// Group-membership authentication.
//
// A trust authority (TA) fixes a Schnorr group (p, q, alpha), creates one
// key pair per group (secret a, public y = alpha^a), and certifies members
// with a Schnorr signature over a random member id: e = H1(id, alpha^k),
// s = a*e + k mod q. Two nodes meeting in the field run a two-round
// handshake: each sends (GID, id, Y = alpha^s * y^-e, B = alpha^b), then a
// key-confirmation tag H2(B_peer^s, sid). The receiver recomputes the
// peer's key as (y_peer^H1(id,Y) * Y)^b, which matches only when the peer's
// certificate was issued under the group key it claimed. Nothing secret
// (a, k, s, b) ever leaves its owner.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "prif/core.h"
#include "prif/drbg.h"

namespace prif::auth {

/// H2 output length: kappa = 256 bits.
inline constexpr std::size_t kTagBytes = 32;
using Tag = std::array<std::uint8_t, kTagBytes>;

struct SystemParams {
  mpz_class p;
  mpz_class q;
  mpz_class alpha;
};

/// Validates (p, q, alpha); throws std::invalid_argument when q does not
/// divide p - 1, either modulus is composite, or alpha lacks order q.
SystemParams make_params(const mpz_class& p, const mpz_class& q, const mpz_class& alpha);

/// The published toy group p = 23, q = 11, alpha = 2.
SystemParams toy_params();

/// Generates a fresh group with |p| = bits_p and |q| = bits_q, deterministic
/// in `rng`. Guarantees q^2 does not divide p - 1, so every honest commitment
/// passes the round-two subgroup test. Throws std::runtime_error when no
/// group is found within the retry budget.
SystemParams ta_setup(unsigned bits_p, unsigned bits_q, Drbg& rng);

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod);

/// H1 : {0,1}* -> Z*_q over (id, commitment).
using H1Fn = std::function<mpz_class(std::string_view id, const mpz_class& commitment,
                                     const SystemParams& params)>;
mpz_class h1(std::string_view id, const mpz_class& commitment, const SystemParams& params);
/// H2 : (K, sid) -> {0,1}^256.
Tag h2(const mpz_class& key, std::span<const std::uint8_t> sid);

struct GroupParams {
  std::string gid;
  mpz_class y;
  mpz_class secret;  // TA only
};

GroupParams ta_create_group(const SystemParams& params, std::string gid, Drbg& rng);
GroupParams ta_create_group_with_secret(const SystemParams& params, std::string gid,
                                        const mpz_class& secret);

struct Certificate {
  std::string id;
  mpz_class e;
  mpz_class s;
  mpz_class y;
};

Certificate ta_register(const GroupParams& group, const SystemParams& params, Drbg& rng,
                        const H1Fn& hash = h1);
/// Deterministic issuance with caller-chosen id and nonce k. Throws
/// std::invalid_argument when k or the resulting digest is 0 mod q.
Certificate ta_register_with(const GroupParams& group, const SystemParams& params,
                             std::string id, const mpz_class& k, const H1Fn& hash = h1);

/// alpha^s * y^-e mod p; equals alpha^k for an honest certificate.
mpz_class recover_commitment(const Certificate& cert, const SystemParams& params);

/// Schnorr check: e == H1(id, recover_commitment(cert)).
bool certificate_is_valid(const Certificate& cert, const SystemParams& params,
                          const H1Fn& hash = h1);

class RevocationList {
 public:
  void revoke(std::string id) { revoked_.insert(std::move(id)); }
  bool contains(std::string_view id) const { return revoked_.contains(std::string(id)); }
  std::size_t size() const { return revoked_.size(); }
  const std::set<std::string>& ids() const { return revoked_; }

 private:
  std::set<std::string> revoked_;
};

/// Public (gid, y) pairs known to every node.
class GroupDirectory {
 public:
  void publish(const std::string& gid, const mpz_class& y) { keys_[gid] = y; }
  std::optional<mpz_class> lookup(std::string_view gid) const;
  std::size_t size() const { return keys_.size(); }

 private:
  std::map<std::string, mpz_class, std::less<>> keys_;
};

struct HandshakeMsg1 {
  std::string gid;
  std::string id;
  mpz_class commitment;        // alpha^s * y^-e mod p
  mpz_class ephemeral_public;  // alpha^b mod p

  Bytes encode() const;
  static HandshakeMsg1 decode(std::span<const std::uint8_t> frame);
};

struct HandshakeMsg2 {
  Tag h{};
  Bytes sid;

  Bytes encode() const;
  static HandshakeMsg2 decode(std::span<const std::uint8_t> frame);
};

inline constexpr std::uint8_t kMsg1Tag = 0x01;
inline constexpr std::uint8_t kMsg2Tag = 0x02;

enum class Role { Initiator, Responder };

/// sid = initiator's encoded round-one message || responder's.
Bytes session_id(Role own_role, std::span<const std::uint8_t> own_msg1,
                 std::span<const std::uint8_t> peer_msg1);

/// Local state of one side of one handshake. The ephemeral is erased when
/// the session object dies.
struct Session {
  Role role = Role::Initiator;
  Certificate cert;
  std::string gid;
  mpz_class ephemeral;
  Bytes sent;  // encoded round-one message
};

Session handshake_round1(const Certificate& cert, std::string gid, Role role,
                         const SystemParams& params, Drbg& rng);
Session handshake_round1_with(const Certificate& cert, std::string gid, Role role,
                              const SystemParams& params, const mpz_class& ephemeral);

enum class RejectReason { None, Revoked, SubgroupCheck, Malformed };

struct Round2 {
  HandshakeMsg2 msg;
  bool reject = false;
  RejectReason reason = RejectReason::None;
};

/// Checks the peer's round-one message and produces the confirmation tag.
/// On rejection the tag is uniformly random.
Round2 handshake_round2(const Session& own, std::span<const std::uint8_t> peer_msg1,
                        const RevocationList& rl, const SystemParams& params, Drbg& rng);

/// Recomputes the peer's confirmation tag from its claimed group key. False
/// for an unknown gid, a malformed message, a session-id mismatch or a tag
/// mismatch.
bool verify_confirmation(const Session& own, std::span<const std::uint8_t> peer_msg1,
                         const GroupDirectory& directory, const HandshakeMsg2& peer_msg2,
                         const SystemParams& params, const H1Fn& hash = h1);

inline bool same_group(std::string_view own_gid, std::string_view verified_peer_gid) {
  return own_gid == verified_peer_gid;
}

/// Hook that observes every frame a handshake puts on the air.
struct FrameSink {
  virtual ~FrameSink() = default;
  virtual void frame(NodeId from, NodeId to, std::span<const std::uint8_t> bytes) = 0;
};

struct Party {
  NodeId node;
  const Certificate* cert;
  std::string gid;
};

struct HandshakeOutcome {
  bool initiator_accepts = false;  // initiator verified the responder
  bool responder_accepts = false;
  std::string initiator_sees_gid;  // responder's verified gid, if accepted
  std::string responder_sees_gid;
  RejectReason initiator_reject = RejectReason::None;
  RejectReason responder_reject = RejectReason::None;

  bool mutual() const { return initiator_accepts && responder_accepts; }
};

/// Runs both rounds between two parties, passing every message through its
/// wire encoding.
HandshakeOutcome run_handshake(const Party& initiator, const Party& responder,
                               const SystemParams& params, const GroupDirectory& directory,
                               const RevocationList& rl, Drbg& rng, FrameSink* sink = nullptr);

const char* to_string(RejectReason r);

}  // namespace prif::auth
