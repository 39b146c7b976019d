#include "pof/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "pof/error.hpp"

namespace pof {

namespace {

// Field tags. Values are part of the wire format.
namespace tag {
constexpr std::uint8_t kReqMarker = 0x10;
constexpr std::uint8_t kCandidateId = 0x11;
constexpr std::uint8_t kVerifierId = 0x12;
constexpr std::uint8_t kPublicKey = 0x13;
constexpr std::uint8_t kCertificate = 0x14;
constexpr std::uint8_t kSignature = 0x15;
constexpr std::uint8_t kT0 = 0x16;
constexpr std::uint8_t kRevision = 0x17;
constexpr std::uint8_t kGamma = 0x18;
constexpr std::uint8_t kEnvelope = 0x19;

constexpr std::uint8_t kEntryCount = 0x20;
constexpr std::uint8_t kEntry = 0x21;
constexpr std::uint8_t kDistance = 0x22;
constexpr std::uint8_t kDeadline = 0x23;
constexpr std::uint8_t kAbsolute = 0x24;
constexpr std::uint8_t kPlanned = 0x25;
constexpr std::uint8_t kReissued = 0x26;

constexpr std::uint8_t kSubject = 0x30;
constexpr std::uint8_t kKeyId = 0x31;
constexpr std::uint8_t kIssuer = 0x32;
constexpr std::uint8_t kSigner = 0x33;
constexpr std::uint8_t kTag = 0x34;

constexpr std::uint8_t kRecipient = 0x40;
constexpr std::uint8_t kNonce = 0x41;
constexpr std::uint8_t kCiphertext = 0x42;
constexpr std::uint8_t kMac = 0x43;
}  // namespace tag

constexpr double kTimeSlack = 1e-9;

wire::Bytes encode_signature(const Signature& sig) {
  wire::Writer w;
  w.u64(tag::kSigner, sig.signer).u64(tag::kTag, sig.tag);
  return w.take();
}

Signature decode_signature(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  Signature sig;
  sig.signer = r.expect(tag::kSigner).as_u64();
  sig.tag = r.expect(tag::kTag).as_u64();
  return sig;
}

wire::Bytes encode_certificate(const Certificate& cert) {
  wire::Writer w;
  w.str(tag::kSubject, cert.subject)
      .u64(tag::kKeyId, cert.key.id)
      .u64(tag::kIssuer, cert.issuer.id)
      .bytes(tag::kSignature, encode_signature(cert.signature));
  return w.take();
}

Certificate decode_certificate(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  Certificate cert;
  cert.subject = r.expect(tag::kSubject).as_str();
  cert.key.id = r.expect(tag::kKeyId).as_u64();
  cert.issuer.id = r.expect(tag::kIssuer).as_u64();
  cert.signature = decode_signature(r.expect(tag::kSignature).value);
  return cert;
}

wire::Bytes encode_envelope(const EncryptedEnvelope& env) {
  wire::Writer w;
  w.u64(tag::kRecipient, env.recipient)
      .u64(tag::kNonce, env.nonce)
      .bytes(tag::kCiphertext, env.ciphertext)
      .u64(tag::kMac, env.mac);
  return w.take();
}

EncryptedEnvelope decode_envelope(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  EncryptedEnvelope env;
  env.recipient = r.expect(tag::kRecipient).as_u64();
  env.nonce = r.expect(tag::kNonce).as_u64();
  env.ciphertext = r.expect(tag::kCiphertext).as_bytes();
  env.mac = r.expect(tag::kMac).as_u64();
  return env;
}

void expect_done(const wire::Reader& r) {
  if (!r.done()) throw ProtocolError("trailing bytes after message");
}

}  // namespace

std::string_view to_string(Verdict v) { return v == Verdict::Accept ? "ACCEPT" : "REJECT"; }

std::string_view to_string(JoinCheck c) {
  switch (c) {
    case JoinCheck::Accept: return "accept";
    case JoinCheck::BadCert: return "bad-cert";
    case JoinCheck::BadSignature: return "bad-sig";
    case JoinCheck::WrongTarget: return "wrong-target";
  }
  return "?";
}

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::Undecryptable: return "undecryptable";
    case AbortReason::BadSignature: return "bad-signature";
    case AbortReason::UnexpectedSigner: return "unexpected-signer";
    case AbortReason::WrongCandidate: return "wrong-candidate";
    case AbortReason::ManeuverFailed: return "maneuver-abort";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "idle";
    case Phase::IdentityVerified: return "identity-verified";
    case Phase::Challenged: return "challenged";
    case Phase::Measuring: return "measuring";
    case Phase::Decided: return "decided";
    case Phase::Aborted: return "aborted";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Join request

wire::Bytes join_request_payload(std::string_view candidate_id, std::string_view verifier_id) {
  wire::Writer w;
  w.str(tag::kReqMarker, "REQ").str(tag::kCandidateId, candidate_id).str(tag::kVerifierId, verifier_id);
  return w.take();
}

wire::Bytes encode(const JoinRequest& req) {
  wire::Writer w;
  w.str(tag::kVerifierId, req.verifier_id)
      .str(tag::kCandidateId, req.candidate_id)
      .u64(tag::kPublicKey, req.pk.id)
      .bytes(tag::kCertificate, encode_certificate(req.cert))
      .bytes(tag::kSignature, encode_signature(req.sig));
  return w.take();
}

JoinRequest decode_join_request(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  JoinRequest req;
  req.verifier_id = r.expect(tag::kVerifierId).as_str();
  req.candidate_id = r.expect(tag::kCandidateId).as_str();
  req.pk.id = r.expect(tag::kPublicKey).as_u64();
  req.cert = decode_certificate(r.expect(tag::kCertificate).value);
  req.sig = decode_signature(r.expect(tag::kSignature).value);
  expect_done(r);
  return req;
}

JoinRequest make_join_request(const CryptoProvider& crypto, const Credentials& candidate,
                              std::string_view verifier_id) {
  const auto& id = candidate.identity;
  JoinRequest req{std::string(verifier_id), id.id, id.pk, id.cert, {}};
  req.sig = crypto.sign(candidate.sk, join_request_payload(id.id, verifier_id));
  return req;
}

JoinCheck verify_join_request(const CryptoProvider& crypto, const JoinRequest& req,
                              const PublicKey& ca, std::string_view own_id, bool accept_broadcast) {
  if (!verify_certificate(crypto, req.cert, ca) || req.cert.subject != req.candidate_id ||
      req.cert.key != req.pk) {
    return JoinCheck::BadCert;
  }
  if (!crypto.verify(req.pk, join_request_payload(req.candidate_id, req.verifier_id), req.sig)) {
    return JoinCheck::BadSignature;
  }
  const bool addressed =
      req.verifier_id == own_id || (accept_broadcast && req.verifier_id == kAnyVerifier);
  return addressed ? JoinCheck::Accept : JoinCheck::WrongTarget;
}

// ---------------------------------------------------------------------------
// Challenge message

wire::Bytes encode(const ChallengeSet& gamma) {
  wire::Writer w;
  w.u32(tag::kEntryCount, static_cast<std::uint32_t>(gamma.entries.size()));
  for (const auto& e : gamma.entries) {
    wire::Writer entry;
    entry.f64(tag::kDistance, e.distance)
        .f64(tag::kDeadline, e.deadline)
        .f64(tag::kAbsolute, e.absolute_time)
        .f64(tag::kPlanned, e.planned_velocity)
        .u8(tag::kReissued, e.reissued ? 1 : 0);
    w.bytes(tag::kEntry, entry.data());
  }
  return w.take();
}

ChallengeSet decode_challenge_set(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  const auto count = r.expect(tag::kEntryCount).as_u32();
  ChallengeSet gamma;
  gamma.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    wire::Reader e(r.expect(tag::kEntry).value);
    ChallengeEntry entry;
    entry.distance = e.expect(tag::kDistance).as_f64();
    entry.deadline = e.expect(tag::kDeadline).as_f64();
    entry.absolute_time = e.expect(tag::kAbsolute).as_f64();
    entry.planned_velocity = e.expect(tag::kPlanned).as_f64();
    entry.reissued = e.expect(tag::kReissued).as_u8() != 0;
    expect_done(e);
    gamma.entries.push_back(entry);
  }
  expect_done(r);
  return gamma;
}

wire::Bytes challenge_payload(const ChallengeContent& content) {
  wire::Writer w;
  w.bytes(tag::kGamma, encode(content.gamma))
      .str(tag::kVerifierId, content.verifier_id)
      .str(tag::kCandidateId, content.candidate_id)
      .f64(tag::kT0, content.t0)
      .u32(tag::kRevision, content.revision);
  return w.take();
}

wire::Bytes encode(const ChallengeMessage& msg) {
  wire::Writer w;
  w.str(tag::kCandidateId, msg.candidate_id).bytes(tag::kEnvelope, encode_envelope(msg.body));
  return w.take();
}

ChallengeMessage decode_challenge_message(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes);
  ChallengeMessage msg;
  msg.candidate_id = r.expect(tag::kCandidateId).as_str();
  msg.body = decode_envelope(r.expect(tag::kEnvelope).value);
  expect_done(r);
  return msg;
}

ChallengeMessage make_challenge_message(const CryptoProvider& crypto, const Credentials& signer,
                                        const Identity& candidate, const ChallengeContent& content,
                                        std::uint64_t nonce) {
  const auto payload = challenge_payload(content);
  wire::Writer body;
  body.bytes(tag::kSignature, encode_signature(crypto.sign(signer.sk, payload)))
      .bytes(tag::kGamma, payload)
      .bytes(tag::kCertificate, encode_certificate(signer.identity.cert));
  return {candidate.id, crypto.encrypt(candidate.pk, body.data(), nonce)};
}

OpenResult open_challenge_message(const CryptoProvider& crypto, const ChallengeMessage& msg,
                                  const Credentials& candidate, const PublicKey& ca,
                                  const std::optional<PublicKey>& expected_verifier) {
  const auto plain = crypto.decrypt(candidate.sk, msg.body);
  if (!plain) return {std::nullopt, AbortReason::Undecryptable};

  Signature sig;
  wire::Bytes payload;
  Certificate cert;
  ChallengeContent content;
  try {
    wire::Reader r(*plain);
    sig = decode_signature(r.expect(tag::kSignature).value);
    payload = r.expect(tag::kGamma).as_bytes();
    cert = decode_certificate(r.expect(tag::kCertificate).value);
    expect_done(r);

    wire::Reader p(payload);
    content.gamma = decode_challenge_set(p.expect(tag::kGamma).value);
    content.verifier_id = p.expect(tag::kVerifierId).as_str();
    content.candidate_id = p.expect(tag::kCandidateId).as_str();
    content.t0 = p.expect(tag::kT0).as_f64();
    content.revision = p.expect(tag::kRevision).as_u32();
    expect_done(p);
  } catch (const ProtocolError&) {
    return {std::nullopt, AbortReason::Undecryptable};
  }

  if (!verify_certificate(crypto, cert, ca) || cert.subject != content.verifier_id ||
      !crypto.verify(cert.key, payload, sig)) {
    return {std::nullopt, AbortReason::BadSignature};
  }
  if (expected_verifier && cert.key != *expected_verifier) {
    return {std::nullopt, AbortReason::UnexpectedSigner};
  }
  if (content.candidate_id != candidate.identity.id || msg.candidate_id != candidate.identity.id) {
    return {std::nullopt, AbortReason::WrongCandidate};
  }
  return {OpenedChallenge{std::move(content), std::move(cert)}, AbortReason::None};
}

// ---------------------------------------------------------------------------
// Physical verification

RecordedSet record_response(const ChallengeSet& gamma, std::span<const SensorReading> feed) {
  RecordedSet out;
  out.distances.reserve(gamma.entries.size());
  out.times.reserve(gamma.entries.size());
  for (const auto& entry : gamma.entries) {
    const double t = entry.absolute_time;
    out.times.push_back(t);
    if (feed.empty()) {
      out.distances.emplace_back();
      continue;
    }
    auto it = std::lower_bound(feed.begin(), feed.end(), t,
                               [](const SensorReading& s, double x) { return s.time < x; });
    if (it == feed.end()) {
      it = std::prev(it);
    } else if (it != feed.begin() && t - std::prev(it)->time <= it->time - t) {
      it = std::prev(it);
    }
    out.distances.push_back(it->distance);
  }
  return out;
}

std::vector<bool> verification_indicators(const ChallengeSet& gamma, const RecordedSet& recorded,
                                          double tolerance) {
  if (gamma.entries.size() != recorded.size()) {
    throw ProtocolError("recorded set length differs from the challenge set");
  }
  std::vector<bool> out;
  out.reserve(recorded.size());
  for (std::size_t k = 0; k < recorded.size(); ++k) {
    const auto& d = recorded.distances[k];
    // The slack absorbs quantization round-off so exactly-gamma deviations pass.
    out.push_back(d && std::abs(gamma.entries[k].distance - *d) <= tolerance + kTimeSlack);
  }
  return out;
}

Verdict physical_verification(const ChallengeSet& gamma, const RecordedSet& recorded,
                              double tolerance) {
  const auto ind = verification_indicators(gamma, recorded, tolerance);
  return std::all_of(ind.begin(), ind.end(), [](bool b) { return b; }) ? Verdict::Accept
                                                                       : Verdict::Reject;
}

// ---------------------------------------------------------------------------
// Sessions

VerifierSession::VerifierSession(const CryptoProvider& crypto, Credentials self, PublicKey ca,
                                 bool accept_broadcast)
    : crypto_(crypto), self_(std::move(self)), ca_(ca), accept_broadcast_(accept_broadcast) {}

void VerifierSession::require(Phase expected, const char* op) const {
  if (phase_ != expected) {
    throw ProtocolError(std::string(op) + " not allowed in phase " +
                        std::string(to_string(phase_)));
  }
}

JoinCheck VerifierSession::receive_join(const JoinRequest& req) {
  require(Phase::Idle, "receive_join");
  const auto check = verify_join_request(crypto_, req, ca_, self_.identity.id, accept_broadcast_);
  if (check == JoinCheck::Accept) {
    peer_ = Identity{req.candidate_id, req.pk, req.cert};
    phase_ = Phase::IdentityVerified;
  } else {
    verdict_ = Verdict::Reject;
    phase_ = Phase::Decided;
  }
  return check;
}

ChallengeMessage VerifierSession::seal(std::uint64_t nonce) const {
  const ChallengeContent content{gamma_, self_.identity.id, peer_->id, gamma_.t0(), revision_};
  return make_challenge_message(crypto_, self_, *peer_, content, nonce);
}

ChallengeMessage VerifierSession::issue(ChallengeSet gamma, std::uint64_t nonce) {
  require(Phase::IdentityVerified, "issue");
  if (gamma.entries.size() < 2) throw ProtocolError("challenge set lacks boundary entries");
  gamma_ = std::move(gamma);
  recorded_.distances.assign(gamma_.entries.size(), std::nullopt);
  recorded_.times.clear();
  for (const auto& e : gamma_.entries) recorded_.times.push_back(e.absolute_time);
  phase_ = Phase::Challenged;
  return seal(nonce);
}

ChallengeMessage VerifierSession::revise(ChallengeSet gamma, std::uint64_t nonce) {
  if (phase_ != Phase::Challenged && phase_ != Phase::Measuring) {
    throw ProtocolError("revise not allowed in phase " + std::string(to_string(phase_)));
  }
  if (gamma.entries.size() != gamma_.entries.size()) {
    throw ProtocolError("revised challenge set changes the number of entries");
  }
  gamma_ = std::move(gamma);
  for (std::size_t k = 0; k < gamma_.entries.size(); ++k) {
    recorded_.times[k] = gamma_.entries[k].absolute_time;
  }
  ++revision_;
  return seal(nonce);
}

void VerifierSession::begin_measuring() {
  require(Phase::Challenged, "begin_measuring");
  phase_ = Phase::Measuring;
}

void VerifierSession::record(std::size_t index, std::optional<double> reading) {
  require(Phase::Measuring, "record");
  if (index >= recorded_.size()) throw ProtocolError("measurement index out of range");
  recorded_.distances[index] = reading;
}

Verdict VerifierSession::decide(double tolerance) {
  require(Phase::Measuring, "decide");
  verdict_ = physical_verification(gamma_, recorded_, tolerance);
  phase_ = Phase::Decided;
  return *verdict_;
}

CandidateSession::CandidateSession(const CryptoProvider& crypto, Credentials self, PublicKey ca,
                                   std::optional<PublicKey> expected_verifier)
    : crypto_(crypto), self_(std::move(self)), ca_(ca), expected_(expected_verifier) {}

JoinRequest CandidateSession::request(std::string_view verifier_id) const {
  return make_join_request(crypto_, self_, verifier_id);
}

AbortReason CandidateSession::receive_challenge(const ChallengeMessage& msg) {
  if (phase_ == Phase::Decided || phase_ == Phase::Aborted) return AbortReason::None;

  auto result = open_challenge_message(crypto_, msg, self_, ca_, expected_);
  if (phase_ == Phase::Idle) {
    if (!result.opened) {
      abort(result.abort);
      return result.abort;
    }
    phase_ = Phase::IdentityVerified;
    challenge_ = std::move(result.opened);
    phase_ = Phase::Challenged;
    return AbortReason::None;
  }
  // Revisions: same signer, newer schedule.
  if (result.opened && result.opened->signer.key == challenge_->signer.key &&
      result.opened->content.revision > challenge_->content.revision) {
    challenge_ = std::move(result.opened);
  }
  return AbortReason::None;
}

void CandidateSession::begin_execution() {
  if (phase_ != Phase::Challenged) {
    throw ProtocolError("begin_execution not allowed in phase " + std::string(to_string(phase_)));
  }
  phase_ = Phase::Measuring;
}

void CandidateSession::complete() {
  if (phase_ != Phase::Measuring) {
    throw ProtocolError("complete not allowed in phase " + std::string(to_string(phase_)));
  }
  phase_ = Phase::Decided;
}

void CandidateSession::abort(AbortReason reason) {
  if (phase_ == Phase::Decided || phase_ == Phase::Aborted) {
    throw ProtocolError("session already terminated");
  }
  abort_ = reason;
  phase_ = Phase::Aborted;
}

// ---------------------------------------------------------------------------
// Execution

ChallengeExecutor::ChallengeExecutor(ChallengeSet gamma, AccParams acc, double safety_gap)
    : gamma_(std::move(gamma)), acc_(acc), safety_gap_(safety_gap) {
  if (gamma_.entries.size() < 2) throw ProtocolError("challenge set lacks boundary entries");
}

double ChallengeExecutor::target_at(double time) const {
  const auto& e = gamma_.entries;
  for (std::size_t k = 1; k < e.size(); ++k) {
    if (time + kTimeSlack >= e[k - 1].absolute_time && time + kTimeSlack < e[k].absolute_time) {
      return e[k].distance;
    }
  }
  return time < e.front().absolute_time ? e.front().distance : e.back().distance;
}

double ChallengeExecutor::command(double time, double gap, double own_velocity,
                                  double verifier_velocity) {
  if (gap < safety_gap_) throw ManeuverAbort("gap fell below the safety gap");
  const double target = target_at(time);
  try {
    prev_accel_ = control_acceleration(target - gap, own_velocity, verifier_velocity, prev_accel_,
                                       target, acc_);
  } catch (const StalledCandidate& e) {
    throw ManeuverAbort(e.what());
  }
  return prev_accel_;
}

std::vector<ExecutionSample> execute_challenges(const ChallengeSet& gamma, const AccParams& acc,
                                                double d_start, double verifier_velocity,
                                                double safety_gap) {
  acc.validate();
  ChallengeExecutor exec(gamma, acc, safety_gap);
  VehicleState verifier{d_start, verifier_velocity, 0.0, 0};
  VehicleState candidate{0.0, verifier_velocity, 0.0, 0};

  const double t0 = gamma.t0();
  const auto ticks = static_cast<long>(std::lround((gamma.end_time() - t0) / acc.dt));
  std::vector<ExecutionSample> out;
  out.reserve(static_cast<std::size_t>(ticks) + 1);
  for (long n = 0;; ++n) {
    const double t = t0 + acc.dt * static_cast<double>(n);
    const double gap = verifier.position - candidate.position;
    if (n == ticks) {
      out.push_back({t, gap, candidate.velocity, candidate.acceleration, exec.target_at(t)});
      break;
    }
    const double a = exec.command(t, gap, candidate.velocity, verifier.velocity);
    out.push_back({t, gap, candidate.velocity, a, exec.target_at(t)});
    candidate = integrate_step(candidate, a, acc.dt, acc.max_accel);
    verifier = integrate_step(verifier, 0.0, acc.dt, acc.max_accel);
  }
  return out;
}

}  // namespace pof
