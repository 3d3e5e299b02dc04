#include <gtest/gtest.h>

#include "checks.h"
#include "prif/auth.h"
#include "prif/seal.h"
#include "prif/wire.h"

namespace prif::auth {
namespace {

// H1 stubbed to fixed digests so that the toy numbers are hand-checkable.
H1Fn stub(std::map<std::string, long> digests) {
  return [digests](std::string_view id, const mpz_class&, const SystemParams&) {
    return mpz_class(digests.at(std::string(id)));
  };
}

TEST(Params, ToyGroup) {
  const SystemParams t = toy_params();
  EXPECT_EQ(t.p, 23);
  EXPECT_EQ(t.q, 11);
  EXPECT_EQ(powm(t.alpha, t.q, t.p), 1);
  EXPECT_THROW(make_params(23, 7, 2), std::invalid_argument);
  EXPECT_THROW(make_params(23, 11, 1), std::invalid_argument);
}

TEST(Params, GeneratedGroupIsValid) {
  Drbg rng(5);
  const SystemParams s = ta_setup(256, 64, rng);
  EXPECT_EQ(mpz_sizeinbase(s.p.get_mpz_t(), 2), 256u);
  EXPECT_EQ(mpz_sizeinbase(s.q.get_mpz_t(), 2), 64u);
  EXPECT_EQ(mpz_class((s.p - 1) % s.q), 0);
  EXPECT_EQ(powm(s.alpha, s.q, s.p), 1);
  Drbg again(5);
  EXPECT_EQ(ta_setup(256, 64, again).p, s.p);
}

TEST(Issuance, ToyVector) {
  const SystemParams t = toy_params();
  const GroupParams g = ta_create_group_with_secret(t, "A", 3);
  EXPECT_EQ(g.y, 8);
  const Certificate c = ta_register_with(g, t, "i", 4, stub({{"i", 5}}));
  EXPECT_EQ(c.e, 5);
  EXPECT_EQ(c.s, 8);
  EXPECT_EQ(recover_commitment(c, t), 16);
  EXPECT_TRUE(certificate_is_valid(c, t, stub({{"i", 5}})));

  Certificate perturbed = c;
  perturbed.s += 1;
  EXPECT_EQ(recover_commitment(perturbed, t), 9);

  Certificate plain = c;
  plain.e = 0;
  plain.s = 4;
  EXPECT_EQ(recover_commitment(plain, t), 16);
}

TEST(Issuance, RandomCertificatesVerify) {
  Drbg rng(9);
  const SystemParams t = toy_params();
  const GroupParams g = ta_create_group(t, "A", rng);
  EXPECT_GT(g.secret, 0);
  EXPECT_LT(g.secret, t.q);
  for (int i = 0; i < 50; ++i) EXPECT_TRUE(certificate_is_valid(ta_register(g, t, rng), t));
  EXPECT_NE(ta_register(g, t, rng).id, ta_register(g, t, rng).id);
}

TEST(Hashes, Ranges) {
  const SystemParams t = toy_params();
  for (int i = 0; i < 200; ++i) {
    const mpz_class d = h1("id" + std::to_string(i), i % 22 + 1, t);
    EXPECT_GE(d, 1);
    EXPECT_LT(d, t.q);
  }
  const Bytes sid = {1, 2, 3};
  EXPECT_EQ(h2(2, sid).size(), kTagBytes);
  EXPECT_NE(h2(2, sid), h2(3, sid));
}

TEST(Handshake, ToyKeyAgreement) {
  const SystemParams t = toy_params();
  const GroupParams g = ta_create_group_with_secret(t, "A", 3);
  const H1Fn h = stub({{"i", 5}, {"j", 9}});
  const Certificate ci = ta_register_with(g, t, "i", 4, h);
  const Certificate cj = ta_register_with(g, t, "j", 2, h);
  EXPECT_EQ(cj.s, 7);

  const Session si = handshake_round1_with(ci, "A", Role::Initiator, t, 6);
  const Session sj = handshake_round1_with(cj, "A", Role::Responder, t, 7);
  EXPECT_EQ(HandshakeMsg1::decode(si.sent).ephemeral_public, 18);

  // K = B_j^{s_i} = 2^56 = 2 and (y^{e_i} Y_i)^{b_j} = 2^133 = 2
  EXPECT_EQ(powm(powm(2, 7, 23), ci.s, 23), 2);
  EXPECT_EQ(powm(powm(g.y, ci.e, 23) * recover_commitment(ci, t) % 23, 7, 23), 2);

  Drbg rng(1);
  const Round2 ri = handshake_round2(si, sj.sent, {}, t, rng);
  const Round2 rj = handshake_round2(sj, si.sent, {}, t, rng);
  ASSERT_FALSE(ri.reject);
  ASSERT_FALSE(rj.reject);
  EXPECT_EQ(ri.msg.h, h2(2, session_id(Role::Initiator, si.sent, sj.sent)));
  EXPECT_EQ(ri.msg.sid, rj.msg.sid);

  GroupDirectory dir;
  dir.publish("A", g.y);
  EXPECT_TRUE(verify_confirmation(sj, si.sent, dir, ri.msg, t, h));
  EXPECT_TRUE(verify_confirmation(si, sj.sent, dir, rj.msg, t, h));

  // a second group with secret 5 does not verify U_i's tag
  GroupDirectory wrong;
  wrong.publish("A", powm(2, 5, 23));
  EXPECT_FALSE(verify_confirmation(sj, si.sent, wrong, ri.msg, t, h));

  HandshakeMsg2 tampered = ri.msg;
  tampered.sid[0] ^= 1;
  EXPECT_FALSE(verify_confirmation(sj, si.sent, dir, tampered, t, h));
  EXPECT_FALSE(verify_confirmation(sj, si.sent, GroupDirectory{}, ri.msg, t, h));
}

TEST(Handshake, Round2Rejections) {
  const SystemParams t = toy_params();
  Drbg rng(3);
  const GroupParams g = ta_create_group(t, "A", rng);
  const Certificate a = ta_register(g, t, rng);
  const Certificate b = ta_register(g, t, rng);
  const Session sa = handshake_round1(a, "A", Role::Initiator, t, rng);
  const Session sb = handshake_round1(b, "A", Role::Responder, t, rng);

  RevocationList rl;
  rl.revoke(b.id);
  const Round2 revoked = handshake_round2(sa, sb.sent, rl, t, rng);
  EXPECT_TRUE(revoked.reject);
  EXPECT_EQ(revoked.reason, RejectReason::Revoked);

  HandshakeMsg1 forged = HandshakeMsg1::decode(sb.sent);
  forged.commitment = 1;
  const Round2 one = handshake_round2(sa, forged.encode(), {}, t, rng);
  EXPECT_TRUE(one.reject);
  EXPECT_EQ(one.reason, RejectReason::SubgroupCheck);

  forged.commitment = 23;
  EXPECT_EQ(handshake_round2(sa, forged.encode(), {}, t, rng).reason, RejectReason::Malformed);
  EXPECT_EQ(handshake_round2(sa, Bytes{0x01, 0x00}, {}, t, rng).reason, RejectReason::Malformed);
}

TEST(Handshake, HonestYPassesSubgroupTest) {
  const SystemParams t = toy_params();
  for (long k = 1; k < 11; ++k) {
    const mpz_class y = powm(t.alpha, k, t.p);
    EXPECT_EQ(powm(y, t.q, t.p), 1);
    const mpz_class probe = powm(y, (t.p - 1) / t.q, t.p);
    EXPECT_NE(probe, 0);
    EXPECT_NE(probe, 1);
  }
}

TEST(Handshake, RunHandshakeOutcomes) {
  const SystemParams t = toy_params();
  Drbg rng(4);
  const GroupParams ga = ta_create_group(t, "A", rng);
  const GroupParams gb = ta_create_group_with_secret(t, "B", ga.secret == 5 ? 6 : 5);
  GroupDirectory dir;
  dir.publish("A", ga.y);
  dir.publish("B", gb.y);
  const Certificate a1 = ta_register(ga, t, rng);
  const Certificate a2 = ta_register(ga, t, rng);
  const Certificate b1 = ta_register(gb, t, rng);

  const HandshakeOutcome same = run_handshake({NodeId{1}, &a1, "A"}, {NodeId{2}, &a2, "A"}, t, dir, {}, rng);
  EXPECT_TRUE(same.mutual());
  EXPECT_TRUE(same_group("A", same.initiator_sees_gid));

  const HandshakeOutcome cross = run_handshake({NodeId{1}, &a1, "A"}, {NodeId{3}, &b1, "B"}, t, dir, {}, rng);
  EXPECT_TRUE(cross.mutual());
  EXPECT_EQ(cross.initiator_sees_gid, "B");
  EXPECT_FALSE(same_group("A", cross.initiator_sees_gid));

  RevocationList rl;
  rl.revoke(a2.id);
  const HandshakeOutcome rev = run_handshake({NodeId{1}, &a1, "A"}, {NodeId{2}, &a2, "A"}, t, dir, rl, rng);
  EXPECT_FALSE(rev.initiator_accepts);
  EXPECT_FALSE(rev.responder_accepts);
  EXPECT_EQ(rev.initiator_reject, RejectReason::Revoked);
}

struct WireLog : FrameSink {
  std::vector<Bytes> frames;
  void frame(NodeId, NodeId, std::span<const std::uint8_t> b) override { frames.emplace_back(b.begin(), b.end()); }
};

bool contains(const Bytes& hay, const Bytes& needle) {
  return !needle.empty() && std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

TEST(Handshake, OnlyPublicValuesOnTheWire) {
  Drbg rng(8);
  const SystemParams t = ta_setup(256, 96, rng);
  const GroupParams g = ta_create_group(t, "A", rng);
  GroupDirectory dir;
  dir.publish("A", g.y);
  const Certificate a = ta_register(g, t, rng);
  const Certificate b = ta_register(g, t, rng);
  WireLog log;
  ASSERT_TRUE(run_handshake({NodeId{1}, &a, "A"}, {NodeId{2}, &b, "A"}, t, dir, {}, rng, &log).mutual());
  ASSERT_EQ(log.frames.size(), 4u);
  for (const Bytes& f : log.frames) {
    for (const mpz_class* secret : {&g.secret, &a.s, &b.s}) EXPECT_FALSE(contains(f, mpz_to_bytes(*secret)));
    ASSERT_TRUE(f[0] == kMsg1Tag || f[0] == kMsg2Tag);
    if (f[0] == kMsg1Tag) {
      const HandshakeMsg1 m = HandshakeMsg1::decode(f);
      EXPECT_EQ(m.encode(), f);
    } else {
      EXPECT_EQ(HandshakeMsg2::decode(f).encode(), f);
    }
  }
}

TEST(Handshake, CodecRejectsTruncation) {
  HandshakeMsg1 m{"gid", "id", 16, 18};
  Bytes b = m.encode();
  const HandshakeMsg1 back = HandshakeMsg1::decode(b);
  EXPECT_EQ(back.gid, "gid");
  EXPECT_EQ(back.commitment, 16);
  b.pop_back();
  EXPECT_THROW(HandshakeMsg1::decode(b), WireError);
  Bytes extra = m.encode();
  extra.push_back(0);
  EXPECT_THROW(HandshakeMsg1::decode(extra), WireError);
}

TEST(Handshake, SmallExhaustiveSoundness) {
  testing::CryptoCheckSizes sizes;
  sizes.toy_handshakes = 50;
  sizes.big_trials = 8;
  sizes.bits_p = 256;
  sizes.bits_q = 96;
  const testing::CryptoCheckReport r = testing::run_crypto_checks(sizes, 2);
  EXPECT_EQ(r.toy_mutual, r.toy_completed);
  EXPECT_EQ(r.wrong_group_accepts, 0);
  EXPECT_EQ(r.revoked_accepts, 0);
  EXPECT_EQ(r.tampered_accepts, 0);
  EXPECT_EQ(r.big_accepts, 0);
  // At p = 23 a forged response is accepted exactly when H1 collides.
  EXPECT_EQ(r.perturbed_accepts_without_collision, 0);
  EXPECT_EQ(r.perturbed_accepts, r.perturbed_h1_collisions);
}

TEST(Seal, RoundTrip) {
  Drbg rng(12);
  const PayloadSealer sealer(rng);
  const Bytes msg = {'h', 'i'};
  const Bytes sealed = sealer.seal(msg, "alice", rng);
  EXPECT_EQ(unseal_payload(sealed, "alice", sealer.key_for("alice")), msg);
  EXPECT_THROW(unseal_payload(sealed, "bob", sealer.key_for("bob")), IntegrityError);
  EXPECT_THROW(unseal_payload(sealed, "alice", sealer.key_for("bob")), IntegrityError);
  Bytes bad = sealed;
  bad.back() ^= 1;
  EXPECT_THROW(unseal_payload(bad, "alice", sealer.key_for("alice")), IntegrityError);
  EXPECT_TRUE(unseal_payload(sealer.seal({}, "alice", rng), "alice", sealer.key_for("alice")).empty());
}

TEST(Wire, IntegerEncoding) {
  EXPECT_TRUE(mpz_to_bytes(0).empty());
  EXPECT_EQ(mpz_to_bytes(258), (Bytes{1, 2}));
  EXPECT_EQ(bytes_to_mpz(Bytes{1, 2}), 258);
  EXPECT_EQ(to_hex(Bytes{0xab, 0x01}), "ab01");
  EXPECT_EQ(from_hex("ab01"), (Bytes{0xab, 0x01}));
}

}  // namespace
}  // namespace prif::auth
