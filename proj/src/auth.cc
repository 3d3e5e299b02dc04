#include "prif/auth.h"

#include <stdexcept>

#include <sodium.h>

#include "prif/wire.h"

namespace prif::auth {
namespace {

constexpr int kPrimeReps = 32;
constexpr std::string_view kH1Tag = "PRIF-H1";
constexpr std::string_view kH2Tag = "PRIF-H2";

bool is_prime(const mpz_class& n) { return mpz_probab_prime_p(n.get_mpz_t(), kPrimeReps) > 0; }

std::size_t bit_length(const mpz_class& n) { return mpz_sizeinbase(n.get_mpz_t(), 2); }

mpz_class random_bits_exact(unsigned bits, Drbg& rng) {
  const mpz_class top = mpz_class(1) << (bits - 1);
  return top + rng.below(top);
}

mpz_class invert(const mpz_class& v, const mpz_class& mod) {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t()) == 0)
    throw std::invalid_argument("value is not invertible");
  return r;
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

}  // namespace

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class r;
  mpz_class b = base % mod;
  if (b < 0) b += mod;
  if (exp < 0) {
    mpz_class inv = invert(b, mod);
    mpz_class e = -exp;
    mpz_powm(r.get_mpz_t(), inv.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
  } else {
    mpz_powm(r.get_mpz_t(), b.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  }
  return r;
}

SystemParams make_params(const mpz_class& p, const mpz_class& q, const mpz_class& alpha) {
  if (p < 5 || !is_prime(p)) throw std::invalid_argument("p must be an odd prime");
  if (q < 2 || !is_prime(q)) throw std::invalid_argument("q must be prime");
  if (mpz_class((p - 1) % q) != 0) throw std::invalid_argument("q must divide p - 1");
  if (alpha <= 1 || alpha >= p) throw std::invalid_argument("alpha must lie in (1, p)");
  if (powm(alpha, q, p) != 1) throw std::invalid_argument("alpha must have order q");
  return SystemParams{p, q, alpha};
}

SystemParams toy_params() { return make_params(23, 11, 2); }

SystemParams ta_setup(unsigned bits_p, unsigned bits_q, Drbg& rng) {
  if (bits_q < 3 || bits_q >= bits_p) throw std::invalid_argument("need 3 <= bits_q < bits_p");

  const mpz_class p_lo = mpz_class(1) << (bits_p - 1);
  const mpz_class p_hi = mpz_class(1) << bits_p;
  for (int q_attempt = 0; q_attempt < 64; ++q_attempt) {
    mpz_class q;
    const mpz_class start = random_bits_exact(bits_q, rng);
    mpz_nextprime(q.get_mpz_t(), start.get_mpz_t());
    if (bit_length(q) != bits_q) continue;

    // p = q * r + 1 with r even, q not dividing r.
    const mpz_class r_lo = (p_lo + q - 1) / q;
    const mpz_class r_hi = (p_hi - 1) / q;
    if (r_hi <= r_lo) continue;
    const unsigned budget = 40 * bits_p;
    for (unsigned i = 0; i < budget; ++i) {
      mpz_class r = r_lo + rng.below(r_hi - r_lo);
      if (mpz_odd_p(r.get_mpz_t())) r += 1;
      if (mpz_class(r % q) == 0) continue;
      const mpz_class p = q * r + 1;
      if (bit_length(p) != bits_p || !is_prime(p)) continue;

      const mpz_class cofactor = (p - 1) / q;
      for (int h_attempt = 0; h_attempt < 64; ++h_attempt) {
        const mpz_class h = 2 + rng.below(p - 3);
        const mpz_class alpha = powm(h, cofactor, p);
        if (alpha != 1) return make_params(p, q, alpha);
      }
    }
  }
  throw std::runtime_error("parameter generation failed");
}

mpz_class h1(std::string_view id, const mpz_class& commitment, const SystemParams& params) {
  for (std::uint32_t counter = 0;; ++counter) {
    ByteWriter w;
    w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kH1Tag.data()), kH1Tag.size()));
    w.u32(counter).field(id).field(commitment);
    const auto digest = sha256(w.bytes());
    const mpz_class e = bytes_to_mpz(digest) % params.q;
    if (e != 0) return e;
  }
}

Tag h2(const mpz_class& key, std::span<const std::uint8_t> sid) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kH2Tag.data()), kH2Tag.size()));
  w.field(key).field(sid);
  return sha256(w.bytes());
}

GroupParams ta_create_group(const SystemParams& params, std::string gid, Drbg& rng) {
  return ta_create_group_with_secret(params, std::move(gid), rng.nonzero_below(params.q));
}

GroupParams ta_create_group_with_secret(const SystemParams& params, std::string gid,
                                        const mpz_class& secret) {
  if (secret <= 0 || secret >= params.q) throw std::invalid_argument("group secret must lie in Z*_q");
  return GroupParams{std::move(gid), powm(params.alpha, secret, params.p), secret};
}

Certificate ta_register_with(const GroupParams& group, const SystemParams& params,
                             std::string id, const mpz_class& k, const H1Fn& hash) {
  if (mpz_class(k % params.q) == 0) throw std::invalid_argument("nonce must lie in Z*_q");
  const mpz_class commitment = powm(params.alpha, k, params.p);
  const mpz_class e = hash(id, commitment, params) % params.q;
  if (e == 0) throw std::invalid_argument("digest is zero mod q");
  const mpz_class s = (group.secret * e + k) % params.q;
  return Certificate{std::move(id), e, s, group.y};
}

Certificate ta_register(const GroupParams& group, const SystemParams& params, Drbg& rng,
                        const H1Fn& hash) {
  for (;;) {
    std::string id = to_hex(rng.bytes(16));
    const mpz_class k = rng.nonzero_below(params.q);
    const mpz_class commitment = powm(params.alpha, k, params.p);
    if (mpz_class(hash(id, commitment, params) % params.q) == 0) continue;
    return ta_register_with(group, params, std::move(id), k, hash);
  }
}

mpz_class recover_commitment(const Certificate& cert, const SystemParams& params) {
  const mpz_class lhs = powm(params.alpha, cert.s, params.p);
  const mpz_class rhs = powm(cert.y, -cert.e, params.p);
  return mpz_class(lhs * rhs % params.p);
}

bool certificate_is_valid(const Certificate& cert, const SystemParams& params, const H1Fn& hash) {
  return hash(cert.id, recover_commitment(cert, params), params) == cert.e;
}

std::optional<mpz_class> GroupDirectory::lookup(std::string_view gid) const {
  const auto it = keys_.find(gid);
  if (it == keys_.end()) return std::nullopt;
  return it->second;
}

Bytes HandshakeMsg1::encode() const {
  ByteWriter w;
  w.u8(kMsg1Tag).field(gid).field(id).field(commitment).field(ephemeral_public);
  return std::move(w).bytes();
}

HandshakeMsg1 HandshakeMsg1::decode(std::span<const std::uint8_t> frame) {
  ByteReader r(frame);
  if (r.u8() != kMsg1Tag) throw WireError("not a round-one message");
  HandshakeMsg1 m;
  m.gid = r.string_field();
  m.id = r.string_field();
  m.commitment = r.mpz_field();
  m.ephemeral_public = r.mpz_field();
  r.expect_done();
  return m;
}

Bytes HandshakeMsg2::encode() const {
  ByteWriter w;
  w.u8(kMsg2Tag).raw(h).field(sid);
  return std::move(w).bytes();
}

HandshakeMsg2 HandshakeMsg2::decode(std::span<const std::uint8_t> frame) {
  ByteReader r(frame);
  if (r.u8() != kMsg2Tag) throw WireError("not a round-two message");
  HandshakeMsg2 m;
  auto tag = r.raw(kTagBytes);
  std::copy(tag.begin(), tag.end(), m.h.begin());
  auto sid = r.field();
  m.sid.assign(sid.begin(), sid.end());
  r.expect_done();
  return m;
}

Bytes session_id(Role own_role, std::span<const std::uint8_t> own_msg1,
                 std::span<const std::uint8_t> peer_msg1) {
  Bytes sid;
  sid.reserve(own_msg1.size() + peer_msg1.size());
  const auto first = own_role == Role::Initiator ? own_msg1 : peer_msg1;
  const auto second = own_role == Role::Initiator ? peer_msg1 : own_msg1;
  sid.insert(sid.end(), first.begin(), first.end());
  sid.insert(sid.end(), second.begin(), second.end());
  return sid;
}

Session handshake_round1_with(const Certificate& cert, std::string gid, Role role,
                              const SystemParams& params, const mpz_class& ephemeral) {
  if (mpz_class(ephemeral % params.q) == 0) throw std::invalid_argument("ephemeral must be nonzero mod q");
  HandshakeMsg1 msg{gid, cert.id, recover_commitment(cert, params),
                    powm(params.alpha, ephemeral, params.p)};
  return Session{role, cert, std::move(gid), ephemeral, msg.encode()};
}

Session handshake_round1(const Certificate& cert, std::string gid, Role role,
                         const SystemParams& params, Drbg& rng) {
  return handshake_round1_with(cert, std::move(gid), role, params, rng.nonzero_below(params.q));
}

Round2 handshake_round2(const Session& own, std::span<const std::uint8_t> peer_msg1,
                        const RevocationList& rl, const SystemParams& params, Drbg& rng) {
  Round2 out;
  out.msg.sid = session_id(own.role, own.sent, peer_msg1);

  const auto reject = [&](RejectReason why) {
    rng.fill(out.msg.h);
    out.reject = true;
    out.reason = why;
    return out;
  };

  HandshakeMsg1 peer;
  try {
    peer = HandshakeMsg1::decode(peer_msg1);
  } catch (const WireError&) {
    return reject(RejectReason::Malformed);
  }
  const auto in_range = [&](const mpz_class& v) { return v > 0 && v < params.p; };
  if (!in_range(peer.commitment) || !in_range(peer.ephemeral_public))
    return reject(RejectReason::Malformed);
  if (rl.contains(peer.id)) return reject(RejectReason::Revoked);
  const mpz_class probe = powm(peer.commitment, (params.p - 1) / params.q, params.p);
  if (probe == 0 || probe == 1) return reject(RejectReason::SubgroupCheck);

  const mpz_class key = powm(peer.ephemeral_public, own.cert.s, params.p);
  out.msg.h = h2(key, out.msg.sid);
  return out;
}

bool verify_confirmation(const Session& own, std::span<const std::uint8_t> peer_msg1,
                         const GroupDirectory& directory, const HandshakeMsg2& peer_msg2,
                         const SystemParams& params, const H1Fn& hash) {
  HandshakeMsg1 peer;
  try {
    peer = HandshakeMsg1::decode(peer_msg1);
  } catch (const WireError&) {
    return false;
  }
  if (peer_msg2.sid != session_id(own.role, own.sent, peer_msg1)) return false;
  const auto y = directory.lookup(peer.gid);
  if (!y) return false;
  if (peer.commitment <= 0 || peer.commitment >= params.p) return false;

  const mpz_class e = hash(peer.id, peer.commitment, params);
  const mpz_class base = powm(*y, e, params.p) * peer.commitment % params.p;
  const mpz_class key = powm(base, own.ephemeral, params.p);
  const Tag expected = h2(key, peer_msg2.sid);
  return sodium_memcmp(expected.data(), peer_msg2.h.data(), kTagBytes) == 0;
}

HandshakeOutcome run_handshake(const Party& initiator, const Party& responder,
                               const SystemParams& params, const GroupDirectory& directory,
                               const RevocationList& rl, Drbg& rng, FrameSink* sink) {
  const Session si = handshake_round1(*initiator.cert, initiator.gid, Role::Initiator, params, rng);
  const Session sr = handshake_round1(*responder.cert, responder.gid, Role::Responder, params, rng);
  if (sink) {
    sink->frame(initiator.node, responder.node, si.sent);
    sink->frame(responder.node, initiator.node, sr.sent);
  }

  const Round2 ri = handshake_round2(si, sr.sent, rl, params, rng);
  const Round2 rr = handshake_round2(sr, si.sent, rl, params, rng);
  const Bytes wire_i = ri.msg.encode();
  const Bytes wire_r = rr.msg.encode();
  if (sink) {
    sink->frame(initiator.node, responder.node, wire_i);
    sink->frame(responder.node, initiator.node, wire_r);
  }

  HandshakeOutcome out;
  out.initiator_reject = ri.reason;
  out.responder_reject = rr.reason;
  if (!ri.reject) {
    const HandshakeMsg2 from_responder = HandshakeMsg2::decode(wire_r);
    if (verify_confirmation(si, sr.sent, directory, from_responder, params)) {
      out.initiator_accepts = true;
      out.initiator_sees_gid = HandshakeMsg1::decode(sr.sent).gid;
    }
  }
  if (!rr.reject) {
    const HandshakeMsg2 from_initiator = HandshakeMsg2::decode(wire_i);
    if (verify_confirmation(sr, si.sent, directory, from_initiator, params)) {
      out.responder_accepts = true;
      out.responder_sees_gid = HandshakeMsg1::decode(si.sent).gid;
    }
  }
  return out;
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::Revoked: return "revoked";
    case RejectReason::SubgroupCheck: return "subgroup-check";
    case RejectReason::Malformed: return "malformed";
  }
  return "unknown";
}

}  // namespace prif::auth
