#pragma once

// Publication rounds under reliable communication: optimistic hash exchange,
// then fallback database exchanges until a threshold agrees on a board.
// Honest peers act through the protocol machine's own events; peers t+1..n
// are driven through adversary signing steps with their database fixed.

#include "wbb/peer_set.hpp"
#include "wbb/protocol.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wbb {

/// Peer k > t stops communicating. stop_round 0: silent for the whole
/// publication phase. stop_round r >= 1: sends nothing after fallback round r
/// and delivers its round-r database only to `reach`.
struct StoppingFailure {
    unsigned peer = 0;
    unsigned stop_round = 0;
    PeerSet reach;

    friend bool operator==(const StoppingFailure&, const StoppingFailure&) = default;
};

struct Schedule {
    unsigned period = 0;
    unsigned max_rounds = 4;             // fallback rounds allowed
    std::vector<IdSet> outside_db;       // databases of peers t+1..n
    bool outside_ingest = false;         // peers t+1..n merge received databases
    std::vector<StoppingFailure> failures;

    std::string text() const;
};

struct PublicationRun {
    bool agreed = false;
    unsigned fallback_rounds = 0;  // completed fallback rounds before agreement
    std::optional<Message> board;
    WorldState world;
    std::vector<std::string> log;
};

/// Requires the hashed publication variant and every honest p_j > period.
/// Each round: optimistic attempt (c_msg8a, c_msg8b on this round's hashes,
/// c_msg6 for peers whose board matches at least t of them, c_dy2 on the
/// shares); on failure a fallback round (c_msg5a, c_msg5b) and retry.
PublicationRun run_publication_schedule(const ProtocolConfig& cfg, const WorldState& world, const Schedule& schedule);

/// Outcome of a posting phase for period 0: for each peer 1..n the item
/// signatures in its database.
struct PostingOutcome {
    std::vector<std::vector<Message>> db;

    std::string text() const;
};

/// Drives the protocol machine through a posting phase that leaves honest
/// databases as in `outcome`, then closes period 0 at every honest peer.
/// Throws std::invalid_argument when `outcome` is not realisable.
WorldState posting_world(const ProtocolConfig& cfg, const PostingOutcome& outcome);

enum class LivenessRegime { all_honest, threshold_live_honest_users, threshold_live };

std::string regime_name(LivenessRegime r);
LivenessRegime parse_regime(std::string_view text);

struct LivenessBounds {
    /// Posting outcomes: all of them when there are at most this many,
    /// otherwise a seeded sample of this size.
    std::uint64_t max_outcomes = 50000;
    std::uint64_t seed = 1;
};

struct LivenessReport {
    std::string config;
    LivenessRegime regime = LivenessRegime::all_honest;
    unsigned bound = 0;  // claimed fallback rounds
    bool exact = false;  // bound must be met exactly (all-honest regime)
    std::uint64_t outcomes = 0;
    std::uint64_t schedules = 0;  // runs
    std::uint64_t excluded = 0;   // outcomes outside the regime's premise
    std::map<unsigned, std::uint64_t> histogram;  // fallback rounds -> runs
    std::uint64_t no_agreement = 0;
    std::optional<std::string> counterexample;

    bool held() const { return !counterexample; }
    unsigned max_rounds() const { return histogram.empty() ? 0 : histogram.rbegin()->first; }
    std::string text() const;
};

/// Failure patterns of peers t+1..n for a regime: each outside peer is live,
/// silent (not in the all-honest regime) or, for threshold_live, stops in a
/// round 1..bound after reaching a subset of 1..t. Live peers are omitted.
std::vector<std::vector<StoppingFailure>> stopping_schedules(const ProtocolConfig& cfg, LivenessRegime regime,
                                                             unsigned bound);

/// Enumerates posting outcomes and availability schedules for the regime and
/// runs each to agreement.
///  all_honest: every peer follows the protocol and ingests; only outcomes
///    where the first optimistic attempt fails count; bound exactly 1.
///  threshold_live_honest_users: peers 1..t live, every signed item was
///    receipted by t peers, outside peers silent or fully live; bound 1.
///  threshold_live: peers 1..t live, outside peers with fixed arbitrary
///    databases and every stopping schedule; bound n - t + 1.
LivenessReport liveness_run(const ProtocolConfig& cfg, LivenessRegime regime, const LivenessBounds& bounds);

}  // namespace wbb
