#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pof/error.hpp"
#include "pof/protocol.hpp"

using namespace pof;

namespace {

struct World {
  CryptoProvider crypto{42};
  CertificateAuthority ca{crypto};
  Credentials verifier = enroll(crypto, ca, "V");
  Credentials candidate = enroll(crypto, ca, "C");
  Credentials adversary = enroll(crypto, ca, "M");
};

ChallengeSet sample_gamma(double t0 = 2.0) {
  const std::vector<double> cps{42.0, 51.6, 33.0};
  return schedule_challenges(cps, ChallengeConfig{}, 45.0, 30.0, AccParams{}, t0);
}

ChallengeContent content_for(const World& w, const ChallengeSet& g) {
  return {g, w.verifier.identity.id, w.candidate.identity.id, g.t0(), 0};
}

RecordedSet exact_readings(const ChallengeSet& g) {
  RecordedSet r;
  for (const auto& e : g.entries) {
    r.distances.emplace_back(e.distance);
    r.times.push_back(e.absolute_time);
  }
  return r;
}

}  // namespace

TEST(JoinRequest, RoundTripAccepted) {
  World w;
  const auto req = make_join_request(w.crypto, w.candidate, "V");
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V"), JoinCheck::Accept);
  EXPECT_EQ(decode_join_request(encode(req)), req);
}

TEST(JoinRequest, TamperedTarget) {
  World w;
  auto req = make_join_request(w.crypto, w.candidate, "V");
  req.verifier_id = "W";
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "W"), JoinCheck::BadSignature);
}

TEST(JoinRequest, SignedByOtherKey) {
  World w;
  auto req = make_join_request(w.crypto, w.candidate, "V");
  req.sig = w.crypto.sign(w.adversary.sk, join_request_payload("C", "V"));
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V"), JoinCheck::BadSignature);
}

TEST(JoinRequest, WrongTarget) {
  World w;
  const auto req = make_join_request(w.crypto, w.candidate, "W");
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V"), JoinCheck::WrongTarget);
}

TEST(JoinRequest, Broadcast) {
  World w;
  const auto req = make_join_request(w.crypto, w.candidate, kAnyVerifier);
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V"), JoinCheck::WrongTarget);
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V", true), JoinCheck::Accept);
}

TEST(JoinRequest, SelfSignedCertificate) {
  World w;
  const auto keys = w.crypto.generate_keypair();
  Credentials rogue{{"R", keys.pk,
                     {"R", keys.pk, keys.pk, w.crypto.sign(keys.sk, certificate_body("R", keys.pk))}},
                    keys.sk};
  const auto req = make_join_request(w.crypto, rogue, "V");
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V"), JoinCheck::BadCert);
}

TEST(JoinRequest, BorrowedCertificate) {
  World w;
  auto req = make_join_request(w.crypto, w.adversary, "V");
  req.cert = w.candidate.identity.cert;
  EXPECT_EQ(verify_join_request(w.crypto, req, w.ca.public_key(), "V"), JoinCheck::BadCert);
}

TEST(ChallengeMessage, RoundTrip) {
  World w;
  const auto g = sample_gamma();
  const auto content = content_for(w, g);
  const auto msg = make_challenge_message(w.crypto, w.verifier, w.candidate.identity, content, 1);
  EXPECT_EQ(decode_challenge_message(encode(msg)), msg);
  EXPECT_EQ(decode_challenge_set(encode(g)), g);

  const auto opened = open_challenge_message(w.crypto, msg, w.candidate, w.ca.public_key(),
                                             w.verifier.identity.pk);
  ASSERT_TRUE(opened.opened);
  EXPECT_EQ(opened.abort, AbortReason::None);
  EXPECT_EQ(opened.opened->content, content);
  EXPECT_EQ(opened.opened->signer, w.verifier.identity.cert);
}

TEST(ChallengeMessage, EncodingIsStable) {
  World a;
  World b;
  const auto g = sample_gamma();
  EXPECT_EQ(encode(make_challenge_message(a.crypto, a.verifier, a.candidate.identity,
                                          content_for(a, g), 9)),
            encode(make_challenge_message(b.crypto, b.verifier, b.candidate.identity,
                                          content_for(b, g), 9)));
}

TEST(ChallengeMessage, WrongRecipient) {
  World w;
  const auto g = sample_gamma();
  const auto msg =
      make_challenge_message(w.crypto, w.verifier, w.candidate.identity, content_for(w, g), 1);
  const auto opened = open_challenge_message(w.crypto, msg, w.adversary, w.ca.public_key(),
                                             std::nullopt);
  EXPECT_FALSE(opened.opened);
  EXPECT_EQ(opened.abort, AbortReason::Undecryptable);
}

TEST(ChallengeMessage, ResignedByAdversary) {
  World w;
  const auto g = sample_gamma();
  ChallengeContent relayed = content_for(w, g);
  relayed.verifier_id = "M";
  const auto msg = make_challenge_message(w.crypto, w.adversary, w.candidate.identity, relayed, 1);

  const auto known = open_challenge_message(w.crypto, msg, w.candidate, w.ca.public_key(),
                                            w.verifier.identity.pk);
  EXPECT_FALSE(known.opened);
  EXPECT_EQ(known.abort, AbortReason::UnexpectedSigner);

  const auto open = open_challenge_message(w.crypto, msg, w.candidate, w.ca.public_key(),
                                           std::nullopt);
  ASSERT_TRUE(open.opened);
  EXPECT_EQ(open.opened->content.gamma, g);
}

TEST(ChallengeMessage, ClaimedVerifierMismatch) {
  World w;
  // Adversary signs but claims to be V.
  const auto msg = make_challenge_message(w.crypto, w.adversary, w.candidate.identity,
                                          content_for(w, sample_gamma()), 1);
  const auto r = open_challenge_message(w.crypto, msg, w.candidate, w.ca.public_key(),
                                        std::nullopt);
  EXPECT_EQ(r.abort, AbortReason::BadSignature);
}

TEST(ChallengeMessage, WrongCandidate) {
  World w;
  auto content = content_for(w, sample_gamma());
  content.candidate_id = "someone-else";
  const auto msg = make_challenge_message(w.crypto, w.verifier, w.candidate.identity, content, 1);
  const auto r = open_challenge_message(w.crypto, msg, w.candidate, w.ca.public_key(),
                                        w.verifier.identity.pk);
  EXPECT_EQ(r.abort, AbortReason::WrongCandidate);
}

TEST(ChallengeMessage, UnforgeableWithoutVerifierKey) {
  World w;
  const auto g = sample_gamma();
  const auto genuine =
      make_challenge_message(w.crypto, w.verifier, w.candidate.identity, content_for(w, g), 1);
  const auto pk_v = w.verifier.identity.pk;
  const auto opens = [&](const ChallengeMessage& m) {
    return open_challenge_message(w.crypto, m, w.candidate, w.ca.public_key(), pk_v).opened
        .has_value();
  };

  // Re-signed under the adversary key with every claimed identity.
  for (const char* claimed : {"V", "M"}) {
    auto c = content_for(w, g);
    c.verifier_id = claimed;
    EXPECT_FALSE(opens(make_challenge_message(w.crypto, w.adversary, w.candidate.identity, c, 2)));
  }
  // A schedule V signed for the adversary, re-encrypted to the candidate.
  auto for_m = content_for(w, g);
  for_m.candidate_id = "M";
  const auto to_m = make_challenge_message(w.crypto, w.verifier, w.adversary.identity, for_m, 3);
  ASSERT_TRUE(w.crypto.decrypt(w.adversary.sk, to_m.body));
  ChallengeMessage rewrapped{"C", w.crypto.encrypt(w.candidate.identity.pk,
                                                   *w.crypto.decrypt(w.adversary.sk, to_m.body), 3)};
  EXPECT_FALSE(opens(rewrapped));
  // V's signature spliced onto a shifted schedule.
  const auto plain = *w.crypto.decrypt(w.adversary.sk, to_m.body);
  wire::Reader parts(plain);
  const auto sig = parts.next();
  const auto payload = parts.next();
  const auto cert = parts.next();
  auto shifted = content_for(w, g);
  shifted.t0 += 1.0;  // now addressed to C as well
  wire::Writer body;
  body.bytes(sig.tag, sig.value).bytes(payload.tag, challenge_payload(shifted))
      .bytes(cert.tag, cert.value);
  EXPECT_FALSE(opens({"C", w.crypto.encrypt(w.candidate.identity.pk, body.data(), 4)}));

  // Bit flips anywhere in the genuine ciphertext.
  for (std::size_t i = 0; i < genuine.body.ciphertext.size(); i += 7) {
    auto m = genuine;
    m.body.ciphertext[i] ^= 0x40;
    EXPECT_FALSE(opens(m)) << i;
  }
  // Random envelopes.
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    auto m = genuine;
    for (auto& b : m.body.ciphertext) b = static_cast<std::uint8_t>(rng());
    m.body.mac = rng();
    EXPECT_FALSE(opens(m));
  }
}

TEST(Verification, ExactAccept) {
  const auto g = sample_gamma();
  EXPECT_EQ(physical_verification(g, exact_readings(g), 0.3), Verdict::Accept);
}

TEST(Verification, Boundary) {
  const auto g = sample_gamma();
  auto r = exact_readings(g);
  for (std::size_t k = 0; k < r.size(); ++k) {
    *r.distances[k] += (k % 2 == 0) ? 0.3 : -0.3;
  }
  EXPECT_EQ(physical_verification(g, r, 0.3), Verdict::Accept);
  *r.distances[2] = g.entries[2].distance + 0.31;
  EXPECT_EQ(physical_verification(g, r, 0.3), Verdict::Reject);
}

TEST(Verification, AbsentFails) {
  const auto g = sample_gamma();
  auto r = exact_readings(g);
  r.distances[0].reset();
  EXPECT_EQ(physical_verification(g, r, 0.3), Verdict::Reject);
  const auto ind = verification_indicators(g, r, 0.3);
  EXPECT_FALSE(ind[0]);
  EXPECT_TRUE(std::all_of(ind.begin() + 1, ind.end(), [](bool b) { return b; }));
}

TEST(Verification, LengthMismatch) {
  const auto g = sample_gamma();
  auto r = exact_readings(g);
  r.distances.pop_back();
  EXPECT_THROW(physical_verification(g, r, 0.3), ProtocolError);
}

TEST(Verification, OrderSensitive) {
  const auto g = sample_gamma();
  auto r = exact_readings(g);
  std::swap(r.distances[1], r.distances[2]);
  EXPECT_EQ(physical_verification(g, r, 0.3), Verdict::Reject);
  r = exact_readings(g);
  std::rotate(r.distances.begin() + 1, r.distances.begin() + 2, r.distances.end() - 1);
  EXPECT_EQ(physical_verification(g, r, 0.3), Verdict::Reject);
}

TEST(RecordResponse, NearestTick) {
  const auto g = sample_gamma(2.0);
  std::vector<SensorReading> feed;
  for (int i = 0; i < 1000; ++i) feed.push_back({i * 0.1, i * 0.1});
  const auto r = record_response(g, feed);
  ASSERT_EQ(r.size(), g.entries.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_NEAR(*r.distances[k], g.entries[k].absolute_time, 0.05 + 1e-9);
    EXPECT_DOUBLE_EQ(r.times[k], g.entries[k].absolute_time);
  }
}

TEST(RecordResponse, EmptyRoad) {
  const auto g = sample_gamma();
  std::vector<SensorReading> feed;
  for (int i = 0; i < 1000; ++i) feed.push_back({i * 0.1, std::nullopt});
  const auto r = record_response(g, feed);
  for (const auto& d : r.distances) EXPECT_FALSE(d);
  EXPECT_EQ(physical_verification(g, r, 0.3), Verdict::Reject);
  EXPECT_EQ(record_response(g, {}).size(), g.entries.size());
}

TEST(VerifierSession, HappyPath) {
  World w;
  VerifierSession v(w.crypto, w.verifier, w.ca.public_key());
  EXPECT_EQ(v.phase(), Phase::Idle);
  EXPECT_EQ(v.receive_join(make_join_request(w.crypto, w.candidate, "V")), JoinCheck::Accept);
  EXPECT_EQ(v.phase(), Phase::IdentityVerified);
  const auto g = sample_gamma();
  v.issue(g, 1);
  EXPECT_EQ(v.phase(), Phase::Challenged);
  EXPECT_THROW(v.record(0, 45.0), ProtocolError);
  v.begin_measuring();
  for (std::size_t k = 0; k < g.entries.size(); ++k) v.record(k, g.entries[k].distance);
  EXPECT_THROW(v.record(99, 1.0), ProtocolError);
  EXPECT_EQ(v.decide(0.3), Verdict::Accept);
  EXPECT_EQ(v.phase(), Phase::Decided);
  EXPECT_THROW(v.decide(0.3), ProtocolError);
  EXPECT_THROW(v.begin_measuring(), ProtocolError);
}

TEST(VerifierSession, RejectedJoinDecides) {
  World w;
  VerifierSession v(w.crypto, w.verifier, w.ca.public_key());
  EXPECT_EQ(v.receive_join(make_join_request(w.crypto, w.candidate, "W")), JoinCheck::WrongTarget);
  EXPECT_EQ(v.phase(), Phase::Decided);
  EXPECT_EQ(v.verdict(), Verdict::Reject);
  EXPECT_THROW(v.issue(sample_gamma(), 1), ProtocolError);
  EXPECT_THROW(v.receive_join(make_join_request(w.crypto, w.candidate, "V")), ProtocolError);
}

TEST(Sessions, RevisionReplacesSchedule) {
  World w;
  VerifierSession v(w.crypto, w.verifier, w.ca.public_key());
  CandidateSession c(w.crypto, w.candidate, w.ca.public_key(), w.verifier.identity.pk);
  v.receive_join(c.request("V"));
  const auto g = sample_gamma();
  EXPECT_EQ(c.receive_challenge(v.issue(g, 1)), AbortReason::None);
  EXPECT_EQ(c.phase(), Phase::Challenged);
  EXPECT_EQ(c.challenge()->content.revision, 0u);

  auto later = g;
  later.entries[2].absolute_time += 3.0;
  later.entries[3].absolute_time += 3.0;
  later.entries[4].absolute_time += 3.0;
  const auto msg = v.revise(later, 2);
  EXPECT_EQ(v.revision(), 1u);
  c.receive_challenge(msg);
  EXPECT_EQ(c.challenge()->content.gamma, later);
  // A stale revision is ignored.
  c.receive_challenge(make_challenge_message(w.crypto, w.verifier, w.candidate.identity,
                                             content_for(w, g), 3));
  EXPECT_EQ(c.challenge()->content.gamma, later);
  // So is a newer one from another signer.
  auto hijack = content_for(w, g);
  hijack.verifier_id = "M";
  hijack.revision = 5;
  c.receive_challenge(make_challenge_message(w.crypto, w.adversary, w.candidate.identity, hijack, 4));
  EXPECT_EQ(c.challenge()->content.gamma, later);
}

TEST(CandidateSession, Linear) {
  World w;
  CandidateSession c(w.crypto, w.candidate, w.ca.public_key(), std::nullopt);
  EXPECT_THROW(c.complete(), ProtocolError);
  EXPECT_THROW(c.begin_execution(), ProtocolError);
  const auto msg = make_challenge_message(w.crypto, w.verifier, w.candidate.identity,
                                          content_for(w, sample_gamma()), 1);
  c.receive_challenge(msg);
  c.begin_execution();
  EXPECT_EQ(c.phase(), Phase::Measuring);
  c.complete();
  EXPECT_EQ(c.phase(), Phase::Decided);
  EXPECT_THROW(c.abort(AbortReason::ManeuverFailed), ProtocolError);
  EXPECT_EQ(c.receive_challenge(msg), AbortReason::None);
  EXPECT_EQ(c.phase(), Phase::Decided);
}

TEST(CandidateSession, AbortsOnceOnBadChallenge) {
  World w;
  CandidateSession c(w.crypto, w.candidate, w.ca.public_key(), w.verifier.identity.pk);
  auto content = content_for(w, sample_gamma());
  content.verifier_id = "M";
  EXPECT_EQ(c.receive_challenge(
                make_challenge_message(w.crypto, w.adversary, w.candidate.identity, content, 1)),
            AbortReason::UnexpectedSigner);
  EXPECT_EQ(c.phase(), Phase::Aborted);
  EXPECT_EQ(c.abort_reason(), AbortReason::UnexpectedSigner);
  EXPECT_THROW(c.abort(AbortReason::ManeuverFailed), ProtocolError);
}

TEST(Executor, TargetsFollowSchedule) {
  const auto g = sample_gamma(2.0);
  ChallengeExecutor exec(g, AccParams{}, 10.0);
  EXPECT_DOUBLE_EQ(exec.target_at(0.0), 45.0);
  EXPECT_DOUBLE_EQ(exec.target_at(2.0), 42.0);
  EXPECT_DOUBLE_EQ(exec.target_at(g.entries[1].absolute_time), 51.6);
  EXPECT_DOUBLE_EQ(exec.target_at(g.end_time() - 0.05), 45.0);
  EXPECT_DOUBLE_EQ(exec.target_at(g.end_time() + 5.0), 45.0);
  EXPECT_FALSE(exec.finished(g.end_time() - 0.1));
  EXPECT_TRUE(exec.finished(g.end_time()));
}

TEST(Executor, SafetyAbort) {
  ChallengeExecutor exec(sample_gamma(), AccParams{}, 10.0);
  EXPECT_THROW(exec.command(3.0, 9.0, 30.0, 30.0), ManeuverAbort);
  EXPECT_THROW(exec.command(3.0, 40.0, 0.0, 30.0), ManeuverAbort);
  EXPECT_NO_THROW(exec.command(3.0, 45.0, 30.0, 30.0));
}

TEST(ExecuteChallenges, EmptyInteriorHoldsReference) {
  ChallengeConfig c;
  const auto g = schedule_challenges({}, c, 45.0, 30.0, AccParams{}, 0.0);
  for (const auto& s : execute_challenges(g, AccParams{}, 45.0, 30.0, 10.0)) {
    EXPECT_NEAR(s.gap, 45.0, 1e-9);
  }
}

TEST(ExecuteChallenges, ReachesCheckpointByDeadline) {
  const std::vector<double> cps{42.0};
  const auto g = schedule_challenges(cps, ChallengeConfig{}, 45.0, 30.0, AccParams{}, 0.0);
  const auto run = execute_challenges(g, AccParams{}, 45.0, 30.0, 10.0);
  const auto at = [&](double t) {
    return std::min_element(run.begin(), run.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.time - t) < std::abs(b.time - t);
    })->gap;
  };
  const double deadline = g.entries[1].deadline;
  EXPECT_LE(std::abs(at(deadline) - 42.0), 0.3 + 1e-9);
  EXPECT_LE(std::abs(at(g.entries[1].absolute_time) - 42.0), 0.3 + 1e-9);
  EXPECT_LE(std::abs(run.back().gap - 45.0), 0.3 + 1e-9);
}

TEST(ExecuteChallenges, HonestRunVerifies) {
  const auto g = sample_gamma(0.0);
  const auto run = execute_challenges(g, AccParams{}, 45.0, 30.0, 10.0);
  std::vector<SensorReading> feed;
  for (const auto& s : run) feed.push_back({s.time, std::round(s.gap / 0.3) * 0.3});
  EXPECT_EQ(physical_verification(g, record_response(g, feed), 0.3), Verdict::Accept);
}
