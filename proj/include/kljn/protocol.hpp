#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "kljn/circuit.hpp"
#include "kljn/noise.hpp"
#include "kljn/rng.hpp"
#include "kljn/series.hpp"
#include "kljn/stats.hpp"
#include "kljn/truthtable.hpp"

// Slot and key-exchange state machines for the eight protocol variants plus
// the transient random-walk handshake. Naming convention for a slot: Alice
// holds bank index a, Bob index b; the exchanged key bit is the truth-table
// value of the ordered pair (a, b), so Alice evaluates (own, inferred) and
// Bob (inferred, own) and both land on the same bit when neither of them
// misclassified.

namespace kljn {

enum class Variant { KLJN, iKLJN, MKLJN, KKLJN, KMKLJN, iMKLJN, iKKLJN, iKMKLJN };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);
// Intelligent variants run the reduced-noise hypothesis test on top of
// level classification.
bool variant_is_intelligent(Variant v);
// Keyed variants derive a per-slot truth-table orientation from a prior key.
bool variant_is_keyed(Variant v);
// Multi-resistor variants require a bank larger than two; the others
// require exactly the classic pair.
bool variant_is_multi(Variant v);

struct TableSource {
  bool keyed = false;
  std::vector<int> prior_key; // consumed only when keyed
};

struct TransientConfig {
  bool enabled = false;
  // Alternative mode: no preselected targets; after t_r the endpoint values
  // are kept when the two walks ended far enough apart.
  bool free_walk = false;
  Eigen::Index t_r = 0;          // walk window [samples]
  double step_size = 0;          // resistance change per step
  Eigen::Index step_interval = 1; // samples between steps
  double adiabatic_tolerance = 0.05; // windowed variance-tracking tolerance
};

struct ProtocolConfig {
  Variant variant = Variant::KLJN;
  ResistorBank bank{std::vector<double>{1.0, 4.0}};
  NoiseParams params = NoiseParams::unit();
  Eigen::Index samples_per_slot = 10000;
  TableSource table_source;
  double wire_resistance = 0; // 0 = ideal wire
  double margin_epsilon = 0.1; // log-space inconclusive gate for level decisions
  std::size_t max_slots = 100000;
  TransientConfig transient;
};

// Throws std::invalid_argument on any inconsistency (bank size vs variant,
// missing prior key for keyed variants, degenerate sampling setup).
void validate_config(const ProtocolConfig& config);

struct SlotTrace {
  Series u_a, u_b;   // private generator series
  Series u_ch, i_ch; // channel observables; u_ch is the wire midpoint when nonideal
  Series u_end_a, u_end_b; // endpoint voltages, filled only when nonideal
  int r_a_index = 0, r_b_index = 0; // private chosen indices
  bool nonideal = false;
};

enum class DiscardReason { None, Insecure, Inconclusive, Inconsistent, TransientCancel };
const char* discard_reason_name(DiscardReason r);

struct Hypothesis {
  double assumed_other_resistance = 0;
  int candidate_index = -1;
};

struct ReducedTrace {
  Series u_star, i_star;
};

struct HypothesisResult {
  Hypothesis hypothesis;
  Correlation corr_u, corr_i;
  bool accepted = false;
};

struct PartyDecision {
  int own_index = 0;
  CandidateClass level;                     // far-end inference from mean-square levels
  std::vector<HypothesisResult> hypotheses; // intelligent variants only
  std::optional<int> accepted_index;        // unique accepted hypothesis, if any
  int far_index = -1;                       // final inference; -1 = undecided
  DiscardReason discard = DiscardReason::None;
  std::optional<int> bit;
};

struct SlotOutcome {
  SituationClass situation; // public three-level view of the channel
  bool secure = false;      // kept by both parties
  std::optional<int> bit_alice, bit_bob;
  bool discarded = false;
  DiscardReason reason = DiscardReason::None;
  // Far-end resistance estimates of the deciding parties.
  std::optional<double> hypothesis_accepted_alice, hypothesis_accepted_bob;
  PartyDecision alice, bob;
};

struct SlotTruth {
  int r_a_index = 0, r_b_index = 0;
  bool secure = false;       // indices differ
  std::optional<int> bit;    // table value of the true ordered pair
};

struct WalkTrace {
  Series r_a, r_b;         // resistance vs sample over the walk window
  Series noise_a, noise_b; // generator output whose variance tracks R(t)
  bool reached_a = false, reached_b = false;
  bool cancel = false;
};

struct SlotResult {
  SlotTrace trace;
  SlotOutcome outcome;
  SlotTruth truth;
  std::optional<WalkTrace> walk; // transient mode only
};

// Party-local reduced channel noise: subtract the party's own predicted
// contribution under the hypothesis alpha' = assumed_far / r_own,
//   u_star = u_ch    - own * alpha'/(1+alpha')
//   i_star = i_local - own / (r_own (1+alpha'))
// where i_local is the channel current with positive direction flowing out
// of the party (Bob uses i_ch as solved; Alice uses -i_ch). Under the
// correct hypothesis u_star = u_far/(1+alpha) and i_star = -u_star/r_own
// exactly, so the ratio u_star/i_star is -r_own for any hypothesis.
ReducedTrace reduce_channel_noise(const SeriesRef& u_ch, const SeriesRef& i_local,
                                  const SeriesRef& own_series, double r_own,
                                  const Hypothesis& hyp);

// Normalized cross-correlations of the party's own noise with the reduced
// signals; the hypothesis is accepted iff both are within 3/sqrt(N) of zero.
HypothesisResult hypothesis_test(const SeriesRef& own_series, const ReducedTrace& reduced,
                                 const Hypothesis& hyp);

// One hypothesis per bank candidate for the far-end resistor.
std::vector<Hypothesis> enumerate_hypotheses(int own_index, const ResistorBank& bank);

struct IntelligentDecision {
  int far_index = -1;
  std::optional<int> accepted_index;
  DiscardReason discard = DiscardReason::None;
};

// Fusion rule: the correlation test is primary, the level classification is
// a veto. A unique accepted hypothesis that matches the level-based far-end
// inference decides the slot; zero or multiple acceptances are
// inconclusive, a mismatch is inconsistent.
IntelligentDecision decide_slot_intelligent(const CandidateClass& level,
                                            const std::vector<HypothesisResult>& results);

// One clock period. Both parties draw a uniform bank index (or use the
// forced ones), generators are sampled, the loop is solved, and each party
// infers the far-end resistor from its own observables. The slot is kept
// only when both parties deem it secure.
SlotResult run_slot(const ProtocolConfig& config, RngStream& slot_rng, const TruthTable& table);
SlotResult run_slot_forced(const ProtocolConfig& config, RngStream& slot_rng,
                           const TruthTable& table, int forced_a, int forced_b);

// Transient handshake: both resistances start at the exact bank midpoint
// (r_low + r_high)/2 and random-walk in +-step_size moves every
// step_interval samples, reflecting at the bank edges. A walk that comes
// within step_size/2 of its target snaps there and stops. If either target
// is unreached after t_r samples the slot is cancelled. Generator variance
// follows R(t) samplewise so the effective noise temperature never moves.
WalkTrace run_transient_walk(const ProtocolConfig& config, const TransientConfig& tcfg,
                             double r_a_target, double r_b_target, RngStream& rng);

// Fluctuation-dissipation tracking check for a walk: samples are bucketed
// by held resistance and the worst relative deviation of the bucket-mean
// normalized variance from 1 is returned (buckets below min_samples are
// skipped).
double worst_adiabatic_deviation(const SeriesRef& r, const SeriesRef& noise,
                                 const NoiseParams& params, int n_buckets = 4,
                                 Eigen::Index min_samples = 1000);

// One slot-log row. Eve fields stay empty unless an observer fills them.
struct SlotRecord {
  std::size_t slot = 0;
  Variant variant = Variant::KLJN;
  int true_a = 0, true_b = 0;
  bool truth_secure = false;
  std::optional<int> truth_bit;
  int far_a = -1, far_b = -1;
  std::optional<int> bit_alice, bit_bob;
  bool kept = false;
  DiscardReason reason = DiscardReason::None;
  double margin = 0; // weaker of the two parties' level margins
  std::optional<Situation> eve_situation;
  std::optional<int> eve_bit;
  double eve_confidence = 0;
  std::optional<int> eve_pair_a, eve_pair_b;
  Eigen::Index eve_window = 0;
};

// Called per slot after the honest parties are done; gets a dedicated rng
// stream so adversary randomness never perturbs the protocol itself.
using SlotObserver = std::function<void(const SlotResult&, RngStream&, SlotRecord&)>;

// Fixed number of slots; keyed variants consume a schedule of exactly
// n_slots tables derived from the prior key.
std::vector<SlotRecord> run_slots(const ProtocolConfig& config, std::size_t n_slots,
                                  RngStream& stream, const SlotObserver& observer = {});

struct KeyExchangeResult {
  std::vector<int> key_alice, key_bob;
  std::vector<SlotRecord> log;
  std::size_t slots_run = 0;
};

// Repeats slots until both parties hold n_bits; throws std::runtime_error
// if config.max_slots runs out first (keyed schedules are derived with
// max_slots entries, so the budget is also the schedule length).
KeyExchangeResult run_key_exchange(const ProtocolConfig& config, std::size_t n_bits,
                                   std::uint64_t root_seed, const SlotObserver& observer = {});

} // namespace kljn
