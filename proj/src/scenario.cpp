#include "pof/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>
#include <tuple>

#include "pof/crypto.hpp"
#include "pof/error.hpp"

namespace pof {

namespace {

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 6> kKindNames{{
    {ScenarioKind::Honest, "honest"},
    {ScenarioKind::RemoteNoFollower, "remote-no-follower"},
    {ScenarioKind::RemoteWithFollower, "remote-with-R"},
    {ScenarioKind::MitmKnown, "mitm-known"},
    {ScenarioKind::MitmUnknown, "mitm-unknown"},
    {ScenarioKind::Traffic, "traffic"},
}};

constexpr std::array<std::pair<AdjustPolicy, std::string_view>, 3> kAdjustNames{{
    {AdjustPolicy::None, "none"},
    {AdjustPolicy::Repeat, "repeat"},
    {AdjustPolicy::Recompute, "recompute"},
}};

constexpr std::array<std::pair<DeadlinePolicy, std::string_view>, 2> kDeadlineNames{{
    {DeadlinePolicy::AccModel, "acc-model"},
    {DeadlinePolicy::Simple, "simple"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> parse_name(const std::array<std::pair<E, std::string_view>, N>& table,
                            std::string_view s) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  return std::nullopt;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

enum class Party { Verifier, Candidate, Adversary };
enum class MessageType { Join, Challenge };

struct Event {
  long tick = 0;
  std::uint64_t seq = 0;
  bool measurement = false;
  Party to = Party::Verifier;
  MessageType type = MessageType::Join;
  wire::Bytes payload;
  std::size_t index = 0;
  std::uint32_t generation = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.tick, a.seq) > std::tie(b.tick, b.seq);
  }
};

const char* party_name(Party p) {
  switch (p) {
    case Party::Verifier: return "verifier";
    case Party::Candidate: return "candidate";
    case Party::Adversary: return "adversary";
  }
  return "?";
}

// Independent random streams of one run.
struct SeedStreams {
  std::uint64_t challenge = 0;
  std::uint64_t sensor = 0;
  std::uint64_t walk = 0;
  std::uint64_t nonce = 0;
  std::uint64_t crypto = 0;

  static SeedStreams derive(std::uint64_t seed);
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& cfg);
  Engine(const ScenarioConfig& cfg, const SeedStreams& seeds);
  ScenarioResult run();

 private:
  bool physical_candidate() const {
    return cfg_.kind == ScenarioKind::Honest || cfg_.kind == ScenarioKind::Traffic ||
           cfg_.kind == ScenarioKind::MitmKnown || cfg_.kind == ScenarioKind::MitmUnknown;
  }
  bool relay_attack() const {
    return cfg_.kind == ScenarioKind::MitmKnown || cfg_.kind == ScenarioKind::MitmUnknown;
  }
  double now() const { return static_cast<double>(tick_) * dt_; }
  long to_tick(double t) const { return std::lround(t / dt_); }

  void log(std::string actor, std::string event, std::string detail = {}) {
    result_.events.push_back({now(), std::move(actor), std::move(event), std::move(detail)});
  }
  void send(Party from, Party to, MessageType type, wire::Bytes payload);
  void schedule_measurements();
  void start_join();
  void dispatch(const Event& ev);
  void on_join(const JoinRequest& req);
  void on_challenge(Party to, const ChallengeMessage& msg);
  void on_measure(std::size_t index, std::uint32_t generation);
  void monitor_verifier();
  void update_candidate_phase();
  void record_trace();
  void advance();
  double candidate_command(const VehicleState& verifier, const VehicleState& self);
  void finish();

  const ScenarioConfig& cfg_;
  const double dt_;
  long tick_ = 0;
  long latency_ticks_ = 1;

  std::mt19937_64 challenge_rng_;
  std::mt19937_64 sensor_rng_;
  std::mt19937_64 walk_rng_;
  std::uint64_t nonce_state_;

  CryptoProvider crypto_;
  CertificateAuthority ca_;
  Credentials v_creds_;
  Credentials c_creds_;
  Credentials m_creds_;
  VerifierSession verifier_;
  std::optional<CandidateSession> candidate_;

  RangeSensor sensor_;
  std::vector<VehicleState> scene_;
  int iv_ = 0;
  int ic_ = -1;
  int im_ = -1;
  int ir_ = -1;
  int il_ = -1;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  std::optional<Party> jam_armed_;

  std::vector<VelocitySample> v_trace_;
  std::vector<double> gap_log_;
  std::vector<double> cvel_log_;
  std::optional<ChallengeExecutor> executor_;
  bool executed_ = false;
  double follow_accel_ = 0.0;
  std::optional<ChallengeSet> adversary_gamma_;
  Party requester_party_ = Party::Candidate;

  std::uint32_t generation_ = 0;
  std::size_t next_unmeasured_ = 0;
  bool disturbed_ = false;
  std::optional<double> brake_start_;

  RandomWalkModel walk_;
  MatrixX<double> walk_cdf_;
  Eigen::Index walk_state_ = 0;
  long walk_period_ = 10;

  ScenarioResult result_;
};

SeedStreams SeedStreams::derive(std::uint64_t seed) {
  std::uint64_t s = seed;
  SeedStreams out;
  out.challenge = splitmix64(s);
  out.sensor = splitmix64(s);
  out.walk = splitmix64(s);
  out.nonce = splitmix64(s);
  out.crypto = splitmix64(s);
  return out;
}

Engine::Engine(const ScenarioConfig& cfg) : Engine(cfg, SeedStreams::derive(cfg.seed)) {}

Engine::Engine(const ScenarioConfig& cfg, const SeedStreams& seeds)
    : cfg_(cfg),
      dt_(cfg.acc.dt),
      challenge_rng_(seeds.challenge),
      sensor_rng_(seeds.sensor),
      walk_rng_(seeds.walk),
      nonce_state_(seeds.nonce),
      crypto_(seeds.crypto),
      ca_(crypto_),
      v_creds_(enroll(crypto_, ca_, "verifier-1")),
      c_creds_(enroll(crypto_, ca_, "candidate-1")),
      m_creds_(enroll(crypto_, ca_, "adversary-1")),
      verifier_(crypto_, v_creds_, ca_.public_key(), true) {
  sensor_.resolution = cfg.rho;
  sensor_.noise_sigma = cfg.sigma;
  sensor_.max_range = cfg.max_range;
  latency_ticks_ = std::max(1L, to_tick(cfg.latency));

  const double x0 = 1000.0;
  scene_.push_back({x0, cfg.v_V, 0.0, 0});
  result_.vehicles.push_back("verifier");
  if (physical_candidate()) {
    std::optional<PublicKey> expected;
    if (cfg.kind != ScenarioKind::MitmUnknown) expected = v_creds_.identity.pk;
    candidate_.emplace(crypto_, c_creds_, ca_.public_key(), expected);
    ic_ = static_cast<int>(scene_.size());
    scene_.push_back({x0 - cfg.d_ref, cfg.v_C, 0.0, 0});
    result_.vehicles.push_back("candidate");
  }
  if (cfg.kind != ScenarioKind::Honest && cfg.kind != ScenarioKind::Traffic) {
    im_ = static_cast<int>(scene_.size());
    const double behind = relay_attack() ? 300.0 : cfg.d_ref;
    scene_.push_back({x0 - behind, cfg.v_V, 0.0, 1});
    result_.vehicles.push_back("adversary");
  }
  if (cfg.kind == ScenarioKind::RemoteWithFollower) {
    walk_ = cfg.walk_model();
    walk_cdf_ = build_transition_matrix<double>(walk_.n);
    for (Eigen::Index i = 0; i < walk_.n; ++i) {
      for (Eigen::Index j = 1; j < walk_.n; ++j) walk_cdf_(i, j) += walk_cdf_(i, j - 1);
    }
    walk_state_ = std::uniform_int_distribution<Eigen::Index>(0, walk_.n - 1)(walk_rng_);
    walk_period_ = std::max(1L, to_tick(cfg.walk_step_time));
    ir_ = static_cast<int>(scene_.size());
    scene_.push_back({x0 - walk_.distance(walk_state_), cfg.v_V, 0.0, 0});
    result_.vehicles.push_back("follower");
  }
  if (cfg.kind == ScenarioKind::Traffic) {
    il_ = static_cast<int>(scene_.size());
    scene_.push_back({std::nan(""), cfg.lead_velocity, 0.0, 0});
    result_.vehicles.push_back("lead");
  }
  result_.kind = cfg.kind;
  result_.seed = cfg.seed;
}

void Engine::send(Party from, Party to, MessageType type, wire::Bytes payload) {
  const char* what = type == MessageType::Join ? "join-request" : "challenge";
  if (jam_armed_ && *jam_armed_ == from) {
    jam_armed_.reset();
    log("adversary", "jam", std::string(what) + " from " + party_name(from));
    return;
  }
  Event ev;
  ev.tick = tick_ + latency_ticks_;
  ev.seq = seq_++;
  ev.to = to;
  ev.type = type;
  ev.payload = std::move(payload);
  log(party_name(from), "send", std::string(what) + " to " + party_name(to));
  queue_.push(std::move(ev));
}

void Engine::schedule_measurements() {
  ++generation_;
  const auto& entries = verifier_.challenges().entries;
  for (std::size_t k = next_unmeasured_; k < entries.size(); ++k) {
    Event ev;
    ev.tick = std::max(to_tick(entries[k].absolute_time), tick_ + 1);
    ev.seq = seq_++;
    ev.measurement = true;
    ev.index = k;
    ev.generation = generation_;
    queue_.push(std::move(ev));
  }
}

void Engine::start_join() {
  switch (cfg_.kind) {
    case ScenarioKind::Honest:
    case ScenarioKind::Traffic:
      requester_party_ = Party::Candidate;
      send(Party::Candidate, Party::Verifier, MessageType::Join,
           encode(candidate_->request(v_creds_.identity.id)));
      break;
    case ScenarioKind::RemoteNoFollower:
    case ScenarioKind::RemoteWithFollower:
      requester_party_ = Party::Adversary;
      send(Party::Adversary, Party::Verifier, MessageType::Join,
           encode(make_join_request(crypto_, m_creds_, v_creds_.identity.id)));
      break;
    case ScenarioKind::MitmKnown:
    case ScenarioKind::MitmUnknown: {
      requester_party_ = Party::Adversary;
      jam_armed_ = Party::Candidate;
      const std::string target = cfg_.kind == ScenarioKind::MitmKnown
                                     ? v_creds_.identity.id
                                     : std::string(kAnyVerifier);
      send(Party::Candidate, Party::Verifier, MessageType::Join,
           encode(candidate_->request(target)));
      send(Party::Adversary, Party::Verifier, MessageType::Join,
           encode(make_join_request(crypto_, m_creds_, v_creds_.identity.id)));
      break;
    }
  }
}

void Engine::dispatch(const Event& ev) {
  if (ev.measurement) {
    on_measure(ev.index, ev.generation);
    return;
  }
  if (ev.type == MessageType::Join) {
    on_join(decode_join_request(ev.payload));
  } else {
    on_challenge(ev.to, decode_challenge_message(ev.payload));
  }
}

void Engine::on_join(const JoinRequest& req) {
  if (verifier_.phase() != Phase::Idle) {
    log("verifier", "ignore", "join-request from " + req.candidate_id);
    return;
  }
  const JoinCheck check = verifier_.receive_join(req);
  result_.join_check = check;
  result_.requester = req.candidate_id;
  log("verifier", "join", req.candidate_id + " " + std::string(to_string(check)));
  if (check != JoinCheck::Accept) {
    log("verifier", "decide", "REJECT");
    return;
  }

  const double t0 = static_cast<double>(tick_ + to_tick(cfg_.challenge_lead)) * dt_;
  const auto config = cfg_.challenge_config();
  ChallengeSet gamma;
  if (!cfg_.fixed_checkpoints.empty()) {
    gamma = schedule_challenges(cfg_.fixed_checkpoints, config, cfg_.d_ref, cfg_.v_V, cfg_.acc, t0);
  } else {
    gamma = generate_challenges(cfg_.checkpoint_space(), config, cfg_.d_ref, cfg_.v_V, cfg_.acc,
                                challenge_rng_, t0);
  }
  result_.original_challenges = gamma;
  result_.t0 = t0;
  if (cfg_.kind == ScenarioKind::Traffic) brake_start_ = t0 + cfg_.brake_delay;

  const auto msg = verifier_.issue(std::move(gamma), splitmix64(nonce_state_));
  log("verifier", "issue", "K=" + std::to_string(verifier_.challenges().K()) + " t0=" + fmt(t0));
  send(Party::Verifier, requester_party_, MessageType::Challenge, encode(msg));
  schedule_measurements();
}

void Engine::on_challenge(Party to, const ChallengeMessage& msg) {
  if (to == Party::Candidate) {
    const bool first = candidate_->phase() == Phase::Idle;
    const AbortReason reason = candidate_->receive_challenge(msg);
    if (reason != AbortReason::None) {
      log("candidate", "abort", std::string(to_string(reason)));
      return;
    }
    if (!candidate_->challenge()) return;
    const auto& opened = *candidate_->challenge();
    if (first) {
      executor_.emplace(opened.content.gamma, cfg_.acc, cfg_.min_safety_gap);
      log("candidate", "accept-challenge",
          "signer=" + opened.signer.subject + " t0=" + fmt(opened.content.t0));
    } else if (executor_) {
      executor_->update(opened.content.gamma);
      log("candidate", "revision", std::to_string(opened.content.revision));
    }
    return;
  }

  // Adversary.
  const auto opened = open_challenge_message(crypto_, msg, m_creds_, ca_.public_key(), std::nullopt);
  if (!opened.opened) {
    log("adversary", "drop", std::string(to_string(opened.abort)));
    return;
  }
  if (relay_attack()) {
    ChallengeContent content = opened.opened->content;
    content.verifier_id = m_creds_.identity.id;
    content.candidate_id = c_creds_.identity.id;
    const auto relayed =
        make_challenge_message(crypto_, m_creds_, c_creds_.identity, content, splitmix64(nonce_state_));
    log("adversary", "relay", "revision " + std::to_string(content.revision));
    send(Party::Adversary, Party::Candidate, MessageType::Challenge, encode(relayed));
  } else {
    adversary_gamma_ = opened.opened->content.gamma;
    log("adversary", "accept-challenge", "t0=" + fmt(opened.opened->content.t0));
  }
}

void Engine::on_measure(std::size_t index, std::uint32_t generation) {
  if (generation != generation_ || verifier_.phase() == Phase::Decided) return;
  if (verifier_.phase() == Phase::Challenged) {
    verifier_.begin_measuring();
    log("verifier", "begin-measuring");
  }
  if (cfg_.adjust != AdjustPolicy::None && disturbed_) {
    log("verifier", "defer", "entry " + std::to_string(index));
    return;
  }
  const auto reading = result_.sensor_feed.back().distance;
  verifier_.record(index, reading);
  next_unmeasured_ = index + 1;
  log("verifier", "measure",
      "entry " + std::to_string(index) + " " + (reading ? fmt(*reading) : std::string("absent")));
  if (next_unmeasured_ == verifier_.challenges().entries.size()) {
    const Verdict v = verifier_.decide(cfg_.gamma());
    log("verifier", "decide", std::string(to_string(v)));
  }
}

void Engine::monitor_verifier() {
  if (cfg_.adjust == AdjustPolicy::None) return;
  if (verifier_.phase() != Phase::Challenged && verifier_.phase() != Phase::Measuring) return;
  if (next_unmeasured_ >= verifier_.challenges().entries.size()) return;

  if (!velocity_stable_at(v_trace_, now(), cfg_.stability)) {
    if (!disturbed_) log("verifier", "unstable", "v=" + fmt(scene_[iv_].velocity));
    disturbed_ = true;
    return;
  }
  if (!disturbed_) return;
  disturbed_ = false;
  const auto adjusted =
      adjust_deadlines(verifier_.challenges(), v_trace_, cfg_.adjust, cfg_.acc, cfg_.epsilon,
                       cfg_.stability, std::max<std::size_t>(next_unmeasured_, 1));
  if (adjusted != verifier_.challenges()) {
    const auto msg = verifier_.revise(adjusted, splitmix64(nonce_state_));
    log("verifier", "revise",
        "revision " + std::to_string(verifier_.revision()) + " end=" + fmt(adjusted.end_time()));
    send(Party::Verifier, requester_party_, MessageType::Challenge, encode(msg));
  }
  schedule_measurements();
}

void Engine::update_candidate_phase() {
  if (!candidate_ || !candidate_->challenge()) return;
  const double local = now() + cfg_.clock_skew;
  const auto& gamma = candidate_->challenge()->content.gamma;
  if (candidate_->phase() == Phase::Challenged && local + 1e-9 >= gamma.t0()) {
    candidate_->begin_execution();
    executed_ = true;
    log("candidate", "begin-execution");
  }
  if (candidate_->phase() == Phase::Measuring && local + 1e-9 >= gamma.end_time()) {
    candidate_->complete();
    log("candidate", "complete");
  }
}

void Engine::record_trace() {
  const auto& v = scene_[iv_];
  v_trace_.push_back({now(), v.velocity});
  if (ic_ >= 0) {
    gap_log_.push_back(v.position - scene_[ic_].position);
    cvel_log_.push_back(scene_[ic_].velocity);
  }
  if (!cfg_.record_trace) return;
  for (std::size_t i = 0; i < scene_.size(); ++i) {
    const auto& s = scene_[i];
    result_.trace.push_back({now(), static_cast<int>(i), s.lane, s.position, s.velocity,
                             s.acceleration});
  }
}

double Engine::candidate_command(const VehicleState& verifier, const VehicleState& self) {
  const double gap = verifier.position - self.position;
  const bool active = executor_ && candidate_->phase() != Phase::Aborted;
  if (active) {
    try {
      return executor_->command(now() + cfg_.clock_skew, gap, self.velocity, verifier.velocity);
    } catch (const ManeuverAbort& e) {
      log("candidate", "maneuver-abort", e.what());
      if (candidate_->phase() != Phase::Decided) candidate_->abort(AbortReason::ManeuverFailed);
      executor_.reset();
    }
  }
  if (!(self.velocity > 0.0)) return 0.0;
  follow_accel_ = control_acceleration(cfg_.d_ref - gap, self.velocity, verifier.velocity,
                                       follow_accel_, cfg_.d_ref, cfg_.acc);
  return follow_accel_;
}

void Engine::advance() {
  const double bound = cfg_.acc.max_accel;
  const VehicleState v_now = scene_[iv_];

  double a_v = 0.0;
  if (brake_start_ && now() + 1e-9 >= *brake_start_ && v_now.velocity > cfg_.lead_velocity) {
    a_v = std::max(-cfg_.brake_decel, (cfg_.lead_velocity - v_now.velocity) / dt_);
  }
  if (ic_ >= 0) {
    const double a_c = candidate_command(v_now, scene_[ic_]);
    scene_[ic_] = integrate_step(scene_[ic_], a_c, dt_, bound);
  }
  scene_[iv_] = integrate_step(v_now, a_v, dt_, bound);
  const auto& v_next = scene_[iv_];

  if (im_ >= 0 && !relay_attack()) {
    // A remote adversary can follow any schedule exactly, just not behind
    // the verifier.
    double target = cfg_.d_ref;
    if (adversary_gamma_) {
      target = ChallengeExecutor(*adversary_gamma_, cfg_.acc, 0.0).target_at(now() + dt_);
    }
    scene_[im_] = {v_next.position - target, v_next.velocity, v_next.acceleration, 1};
  } else if (im_ >= 0) {
    scene_[im_] = integrate_step(scene_[im_], 0.0, dt_, bound);
  }
  if (ir_ >= 0) {
    scene_[ir_] = {v_next.position - walk_.distance(walk_state_), v_next.velocity,
                   v_next.acceleration, 0};
  }
}

void Engine::finish() {
  result_.verdict = verifier_.verdict();
  result_.verifier_phase = verifier_.phase();
  if (candidate_) {
    result_.candidate_phase = candidate_->phase();
    result_.candidate_abort = candidate_->abort_reason();
  }
  result_.revisions = static_cast<int>(verifier_.revision());
  if (verifier_.phase() == Phase::Idle || verifier_.challenges().entries.empty()) return;

  result_.challenges = verifier_.challenges();
  result_.recorded = verifier_.recorded();
  result_.verification_time = result_.challenges.end_time() - result_.challenges.t0();

  const auto ind = verification_indicators(result_.challenges, result_.recorded, cfg_.gamma());
  const auto& entries = result_.challenges.entries;
  result_.interior_pass = true;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    ChallengeOutcome o;
    o.distance = entries[k].distance;
    o.deadline = entries[k].deadline;
    o.absolute_time = entries[k].absolute_time;
    o.measured = result_.recorded.distances[k];
    o.pass = ind[k];
    o.reissued = entries[k].reissued;
    if (k > 0 && executed_) {
      const auto start = static_cast<std::size_t>(to_tick(entries[k - 1].absolute_time));
      if (start < gap_log_.size()) {
        std::vector<double> profile;
        for (std::size_t i = start; i < v_trace_.size(); ++i) profile.push_back(v_trace_[i].velocity);
        const auto m = simulate_maneuver(gap_log_[start], entries[k].distance, cvel_log_[start],
                                         profile, cfg_.acc);
        o.completion = m.settle_time;
      }
    }
    if (k > 0 && k + 1 < entries.size() && !o.pass) result_.interior_pass = false;
    result_.outcomes.push_back(o);
  }

  if (il_ >= 0 && cfg_.record_trace) {
    // The lead vehicle only sets the speed the verifier slows to; place it
    // so that it is 1.5 s ahead once the verifier has matched its speed.
    const double t_b = brake_start_.value_or(0.0);
    const double dv = cfg_.v_V - cfg_.lead_velocity;
    const double t_match = t_b + dv / cfg_.brake_decel;
    const auto match_tick = static_cast<std::size_t>(std::min<long>(
        to_tick(t_match), static_cast<long>(v_trace_.size()) - 1));
    double x_v_match = 0.0;
    for (const auto& s : result_.trace) {
      if (s.vehicle == iv_ && std::lround(s.time / dt_) == static_cast<long>(match_tick)) {
        x_v_match = s.position;
      }
    }
    const double x_l_match = x_v_match + 1.5 * cfg_.lead_velocity;
    const double t_match_actual = static_cast<double>(match_tick) * dt_;
    for (auto& s : result_.trace) {
      if (s.vehicle == il_) s.position = x_l_match + cfg_.lead_velocity * (s.time - t_match_actual);
    }
  }
}

ScenarioResult Engine::run() {
  const long join_tick = to_tick(cfg_.join_time);
  const long horizon = join_tick + to_tick(cfg_.horizon);
  std::vector<VehicleState> sensed;
  for (tick_ = 0;; ++tick_) {
    if (ir_ >= 0 && tick_ > 0 && tick_ % walk_period_ == 0) {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(walk_rng_);
      const auto row = walk_cdf_.row(walk_state_);
      Eigen::Index next = 0;
      while (next + 1 < walk_.n && row(next) <= u) ++next;
      walk_state_ = next;
      scene_[ir_].position = scene_[iv_].position - walk_.distance(walk_state_);
    }

    sensed.clear();
    for (std::size_t i = 0; i < scene_.size(); ++i) {
      if (static_cast<int>(i) != il_) sensed.push_back(scene_[i]);
    }
    result_.sensor_feed.push_back({now(), measure_range(scene_[iv_], sensed, sensor_, sensor_rng_)});
    record_trace();

    if (tick_ == join_tick) start_join();
    monitor_verifier();
    while (!queue_.empty() && queue_.top().tick <= tick_) {
      const Event ev = queue_.top();
      queue_.pop();
      dispatch(ev);
    }
    update_candidate_phase();

    if (verifier_.phase() == Phase::Decided) break;
    if (tick_ >= horizon) throw Error("scenario did not terminate within the horizon");
    advance();
  }
  finish();
  return std::move(result_);
}

}  // namespace

std::string_view to_string(ScenarioKind k) { return name_of(kKindNames, k); }
std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) { return parse_name(kKindNames, s); }
std::string_view to_string(AdjustPolicy p) { return name_of(kAdjustNames, p); }
std::optional<AdjustPolicy> parse_adjust_policy(std::string_view s) { return parse_name(kAdjustNames, s); }
std::string_view to_string(DeadlinePolicy p) { return name_of(kDeadlineNames, p); }
std::optional<DeadlinePolicy> parse_deadline_policy(std::string_view s) {
  return parse_name(kDeadlineNames, s);
}

int ScenarioConfig::challenge_count() const {
  return fixed_checkpoints.empty() ? K : static_cast<int>(fixed_checkpoints.size());
}

ChallengeConfig ScenarioConfig::challenge_config() const {
  ChallengeConfig c;
  c.K = challenge_count();
  c.g_min = g_min;
  c.g_max = g_max;
  c.rho = rho;
  c.gamma = acc.gamma;
  c.epsilon = epsilon;
  c.v_rel = v_rel;
  c.deadline_policy = deadline_policy;
  c.rng_seed = seed;
  c.min_safety_gap = min_safety_gap;
  return c;
}

CheckpointSpace ScenarioConfig::checkpoint_space() const {
  return build_checkpoint_space(v_V, g_min, g_max, rho);
}

RandomWalkModel ScenarioConfig::walk_model() const {
  const double step = walk_d_step > 0.0 ? walk_d_step : 2.0 * rho;
  return RandomWalkModel::from_range(g_min * v_V, g_max * v_V, step);
}

void ScenarioConfig::validate() const {
  acc.validate();
  if (!(v_V > 0.0) || !(v_C > 0.0)) throw DomainError("velocities must be positive");
  challenge_config().validate(v_V);
  const auto space = checkpoint_space();
  if (d_ref < space.lower - 1e-9 || d_ref > space.upper + 1e-9) {
    throw DomainError("d_ref lies outside the checkpoint range");
  }
  for (double d : fixed_checkpoints) {
    if (d < space.lower - 1e-9 || d > space.upper + 1e-9) {
      throw DomainError("fixed checkpoint outside the checkpoint range");
    }
  }
  RangeSensor{rho, sigma, max_range}.validate();
  if (!(latency >= 0.0) || !(join_time >= 0.0)) throw DomainError("times must be non-negative");
  if (!(challenge_lead > 2.0 * latency)) {
    throw DomainError("challenge_lead must exceed the round trip of a relayed message");
  }
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (!(std::abs(clock_skew) < challenge_lead)) throw DomainError("clock skew too large");
  if (kind == ScenarioKind::Traffic) {
    if (!(lead_velocity > 0.0) || !(lead_velocity < v_V)) {
      throw DomainError("lead velocity must lie in (0, v_V)");
    }
    if (!(brake_decel > 0.0) || !(brake_decel <= acc.max_accel)) {
      throw DomainError("brake deceleration must lie in (0, max_accel]");
    }
    if (!(brake_delay >= 0.0)) throw DomainError("brake delay must be non-negative");
  }
  if (kind == ScenarioKind::RemoteWithFollower) {
    if (!(walk_step_time >= acc.dt)) throw DomainError("walk step time below the update step");
    if (!(walk_d_step >= 0.0)) throw DomainError("walk step must be non-negative");
  }
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  Engine engine(config);
  return engine.run();
}

}  // namespace pof
