#pragma once

// Join, challenge and verification exchange between a candidate and the
// platoon's last vehicle.
//
//   candidate                                   verifier
//   ---------                                   --------
//   JoinRequest (ID_V, ID_C, pk_C, cert_C,
//                sig_C(REQ, ID_C, ID_V))  --->   check cert, sig, target
//                                         <---   ChallengeMessage: ID_C,
//                                                E_pkC[sig_V(G, ID_V, ID_C, t0), G, ...]
//   open, check signer, adopt t0
//   drive through G                               range the gap at every t_k
//                                                 ACCEPT iff all |d_k - d'_k| <= gamma

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pof/acc_controller.hpp"
#include "pof/challenge.hpp"
#include "pof/crypto.hpp"
#include "pof/kinematics.hpp"
#include "pof/wire.hpp"

namespace pof {

enum class Verdict { Accept, Reject };

enum class JoinCheck { Accept, BadCert, BadSignature, WrongTarget };

enum class AbortReason {
  None,
  Undecryptable,
  BadSignature,
  UnexpectedSigner,
  WrongCandidate,
  ManeuverFailed,
};

std::string_view to_string(Verdict v);
std::string_view to_string(JoinCheck c);
std::string_view to_string(AbortReason r);

/// Target id of a join request not addressed to a particular verifier.
inline constexpr std::string_view kAnyVerifier = "*";

struct JoinRequest {
  std::string verifier_id;
  std::string candidate_id;
  PublicKey pk;
  Certificate cert;
  Signature sig;

  bool operator==(const JoinRequest&) const = default;
};

wire::Bytes join_request_payload(std::string_view candidate_id, std::string_view verifier_id);
wire::Bytes encode(const JoinRequest& req);
JoinRequest decode_join_request(std::span<const std::uint8_t> bytes);

JoinRequest make_join_request(const CryptoProvider& crypto, const Credentials& candidate,
                              std::string_view verifier_id);

/// `own_id` is the verifier's identity. A request targeted at kAnyVerifier
/// is only admissible when `accept_broadcast` is set.
JoinCheck verify_join_request(const CryptoProvider& crypto, const JoinRequest& req,
                              const PublicKey& ca, std::string_view own_id,
                              bool accept_broadcast = false);

/// Signed part of a challenge message. `revision` grows when the verifier
/// re-issues adjusted deadlines within the same session.
struct ChallengeContent {
  ChallengeSet gamma;
  std::string verifier_id;
  std::string candidate_id;
  double t0 = 0.0;
  std::uint32_t revision = 0;

  bool operator==(const ChallengeContent&) const = default;
};

wire::Bytes encode(const ChallengeSet& gamma);
ChallengeSet decode_challenge_set(std::span<const std::uint8_t> bytes);
wire::Bytes challenge_payload(const ChallengeContent& content);

struct ChallengeMessage {
  std::string candidate_id;  // sent in the clear
  EncryptedEnvelope body;

  bool operator==(const ChallengeMessage&) const = default;
};

wire::Bytes encode(const ChallengeMessage& msg);
ChallengeMessage decode_challenge_message(std::span<const std::uint8_t> bytes);

/// Signs `content` with the signer's key, then encrypts signature, content
/// and the signer's certificate to the candidate.
ChallengeMessage make_challenge_message(const CryptoProvider& crypto, const Credentials& signer,
                                        const Identity& candidate, const ChallengeContent& content,
                                        std::uint64_t nonce);

struct OpenedChallenge {
  ChallengeContent content;
  Certificate signer;
};

struct OpenResult {
  std::optional<OpenedChallenge> opened;
  AbortReason abort = AbortReason::None;
};

/// With `expected_verifier` set, only signatures under that key are
/// accepted. Without it any CA-certified signer is trusted, which is what
/// lets a relaying adversary impersonate an unknown verifier.
OpenResult open_challenge_message(const CryptoProvider& crypto, const ChallengeMessage& msg,
                                  const Credentials& candidate, const PublicKey& ca,
                                  const std::optional<PublicKey>& expected_verifier);

/// Measured distances at the instants of a challenge set; absent readings
/// are empty.
struct RecordedSet {
  std::vector<std::optional<double>> distances;
  std::vector<double> times;

  std::size_t size() const { return distances.size(); }
};

struct SensorReading {
  double time;
  std::optional<double> distance;
};

/// Picks, for every entry of `gamma`, the reading closest in time to its
/// absolute time. `feed` must be sorted by time.
RecordedSet record_response(const ChallengeSet& gamma, std::span<const SensorReading> feed);

/// Per-entry indicator |d_k - d'_k| <= gamma; absent readings fail.
std::vector<bool> verification_indicators(const ChallengeSet& gamma, const RecordedSet& recorded,
                                          double tolerance);

/// ACCEPT iff every indicator holds. Throws ProtocolError on length mismatch.
Verdict physical_verification(const ChallengeSet& gamma, const RecordedSet& recorded,
                              double tolerance);

enum class Phase { Idle, IdentityVerified, Challenged, Measuring, Decided, Aborted };

std::string_view to_string(Phase p);

class VerifierSession {
 public:
  VerifierSession(const CryptoProvider& crypto, Credentials self, PublicKey ca,
                  bool accept_broadcast = false);

  /// Idle -> IdentityVerified, or Decided(REJECT) on a failed check.
  JoinCheck receive_join(const JoinRequest& req);

  /// IdentityVerified -> Challenged.
  ChallengeMessage issue(ChallengeSet gamma, std::uint64_t nonce);

  /// Re-signs an adjusted schedule under the next revision number.
  ChallengeMessage revise(ChallengeSet gamma, std::uint64_t nonce);

  /// Challenged -> Measuring.
  void begin_measuring();
  void record(std::size_t index, std::optional<double> reading);

  /// Measuring -> Decided.
  Verdict decide(double tolerance);

  Phase phase() const { return phase_; }
  const std::optional<Identity>& peer() const { return peer_; }
  const ChallengeSet& challenges() const { return gamma_; }
  const RecordedSet& recorded() const { return recorded_; }
  std::optional<Verdict> verdict() const { return verdict_; }
  std::uint32_t revision() const { return revision_; }
  const Identity& identity() const { return self_.identity; }

 private:
  void require(Phase expected, const char* op) const;
  ChallengeMessage seal(std::uint64_t nonce) const;

  const CryptoProvider& crypto_;
  Credentials self_;
  PublicKey ca_;
  bool accept_broadcast_;
  Phase phase_ = Phase::Idle;
  std::optional<Identity> peer_;
  ChallengeSet gamma_;
  RecordedSet recorded_;
  std::uint32_t revision_ = 0;
  std::optional<Verdict> verdict_;
};

class CandidateSession {
 public:
  CandidateSession(const CryptoProvider& crypto, Credentials self, PublicKey ca,
                   std::optional<PublicKey> expected_verifier);

  JoinRequest request(std::string_view verifier_id) const;

  /// First message: Idle -> Challenged (through IdentityVerified) or
  /// Aborted. Later messages from the same signer with a higher revision
  /// replace the schedule; anything else is ignored.
  AbortReason receive_challenge(const ChallengeMessage& msg);

  /// Challenged -> Measuring.
  void begin_execution();
  /// Measuring -> Decided.
  void complete();
  /// Any non-terminal phase -> Aborted.
  void abort(AbortReason reason);

  Phase phase() const { return phase_; }
  AbortReason abort_reason() const { return abort_; }
  const std::optional<OpenedChallenge>& challenge() const { return challenge_; }
  const Identity& identity() const { return self_.identity; }
  const Credentials& credentials() const { return self_; }

 private:
  const CryptoProvider& crypto_;
  Credentials self_;
  PublicKey ca_;
  std::optional<PublicKey> expected_;
  Phase phase_ = Phase::Idle;
  AbortReason abort_ = AbortReason::None;
  std::optional<OpenedChallenge> challenge_;
};

/// Drives the candidate's controller through a challenge schedule: the
/// target for t in [t_{k-1}, t_k) is d_k, d_ref outside [t_0, t_{K+1}).
class ChallengeExecutor {
 public:
  ChallengeExecutor(ChallengeSet gamma, AccParams acc, double safety_gap);

  void update(ChallengeSet gamma) { gamma_ = std::move(gamma); }
  double target_at(double time) const;
  bool finished(double time) const { return time >= gamma_.end_time(); }

  /// Next acceleration command. Throws ManeuverAbort when the candidate has
  /// stalled or the gap fell below the safety gap.
  double command(double time, double gap, double own_velocity, double verifier_velocity);

  const ChallengeSet& challenges() const { return gamma_; }

 private:
  ChallengeSet gamma_;
  AccParams acc_;
  double safety_gap_;
  double prev_accel_ = 0.0;
};

struct ExecutionSample {
  double time;
  double gap;
  double velocity;
  double acceleration;
  double target;
};

/// Closed-loop run of a candidate behind a verifier holding its speed, from
/// t_0 to t_{K+1}. The candidate starts at gap `d_start` and the verifier's
/// speed.
std::vector<ExecutionSample> execute_challenges(const ChallengeSet& gamma, const AccParams& acc,
                                                double d_start, double verifier_velocity,
                                                double safety_gap);

}  // namespace pof
