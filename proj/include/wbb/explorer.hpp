#pragma once

// Bounded exploration of the protocol machine: exhaustive breadth-first search
// with symmetry reduction, seeded random walks and minimal-depth attack search.

#include "wbb/abstract_spec.hpp"
#include "wbb/protocol.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace wbb {

enum class ExploreMode { exhaustive, randomized };

struct ExploreBounds {
    /// Exhaustive: 0 explores to the fixpoint. Randomized: walk length.
    unsigned max_depth = 0;
    ExploreMode mode = ExploreMode::exhaustive;
    std::uint64_t seed = 1;
    std::uint64_t samples = 0;
    /// Identify states equal up to renaming honest peers, dishonest peers and
    /// clash-preserving item permutations.
    bool symmetry = true;
    /// Stop after this many distinct states (0: no limit).
    std::uint64_t max_states = 0;

    std::string text() const;
};

struct Finding {
    std::string kind;    // invariant, simulation, bb, goal
    std::string clause;  // failing clause or goal name
    std::string detail;
    Trace<WorldState> trace;
};

struct ExploreResult {
    std::string config;
    ExploreBounds bounds;
    std::uint64_t states = 0;
    std::uint64_t edges = 0;
    std::uint64_t traces = 0;  // randomized walks
    unsigned depth = 0;        // deepest level reached
    bool fixpoint = false;     // exhaustive run saw every reachable state
    std::map<std::string, std::uint64_t> matched;  // abstract event -> matched edges
    std::uint64_t skipped = 0;
    std::size_t max_boards_per_period = 0;
    std::uint64_t abstract_traces_checked = 0;
    std::optional<Finding> violation;

    bool ok() const { return !violation; }
    std::string text() const;
};

/// Checks the concrete invariants and bb.1-bb.3 on every visited state and the
/// simulation obligation and bb.4 on every edge. Stops at the first violation.
ExploreResult explore(const ProtocolConfig& cfg, const ExploreBounds& bounds);

/// Exhaustive exploration of the specification machine alone.
ExploreResult explore_spec(const ProtocolConfig& cfg, const ExploreBounds& bounds);

enum class GoalKind { receipt_without_publication, clashing_receipts, publication_mutation, invariant_breach };

struct AttackGoal {
    GoalKind kind = GoalKind::receipt_without_publication;
    std::string clause;  // for invariant_breach

    /// ReceiptWithoutPublication, ClashingReceipts, PublicationMutation or
    /// InvariantBreach(<clause>).
    std::string text() const;
    static AttackGoal parse(std::string_view text);

    friend bool operator==(const AttackGoal&, const AttackGoal&) = default;
};

bool goal_holds(const ProtocolConfig& cfg, const AttackGoal& goal, const WorldState& w);

struct AttackResult {
    std::string config;
    AttackGoal goal;
    ExploreBounds bounds;
    std::optional<Trace<WorldState>> trace;  // stamped with fingerprints
    std::uint64_t states = 0;
    unsigned depth = 0;
    bool fixpoint = false;

    bool found() const { return trace.has_value(); }
    std::string text() const;
};

/// Breadth-first search for a shortest trace reaching the goal.
AttackResult find_attack(const ProtocolConfig& cfg, const AttackGoal& goal, const ExploreBounds& bounds);

}  // namespace wbb
