#pragma once

// Linking the concrete protocol to the specification: the abstraction
// function, per-step matching and whole-trace simulation checking.

#include "wbb/abstract_spec.hpp"
#include "wbb/protocol.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wbb {

/// R_p: items with at least 2t-n honest item signatures for p in E.
/// C_p: items with a receipt for p in E.
/// E_A: items, receipts and publish terms of E.
AbstractState abstraction(const ProtocolConfig& cfg, const WorldState& w);

struct LinkReport {
    AbstractState abstract;  // abstraction of the concrete state
    bool link1 = true;       // R agrees
    bool link2 = true;       // C agrees
    bool link3 = true;       // E_A agrees
    std::vector<std::string> violated;  // concrete invariant clauses

    bool ok() const { return link1 && link2 && link3 && violated.empty(); }
};

/// Compares a claimed abstract state with the abstraction of `w` and checks
/// the concrete invariant clauses.
LinkReport link_report(const ProtocolConfig& cfg, const WorldState& w, const AbstractState& claimed);

struct MatchVerdict {
    enum class Kind { matched, skip, violation };
    Kind kind = Kind::skip;
    std::string event;  // abstract event, when matched or when a candidate failed
    Binding binding;
    std::string clause;  // failing obligation, for violations
    std::string reason;

    bool ok() const { return kind != Kind::violation; }
    /// `MatchedBy a_msg1 x=item(x) p=0`, `Skip`, `Violation grd_a_msg2: ...`
    std::string text() const;
};

/// Decides how the concrete step pre -> post is simulated. The abstract
/// candidate is computed from the step and the new terms it produced; the
/// candidate must be enabled at abstraction(pre) and lead to abstraction(post).
MatchVerdict match_step(const ProtocolConfig& cfg, const WorldState& pre, const Step& step, const WorldState& post);
/// Same, with both abstractions already computed.
MatchVerdict match_step(const ProtocolConfig& cfg, const AbstractState& apre, const WorldState& pre, const Step& step,
                        const WorldState& post, const AbstractState& apost);

struct SimulationReport {
    std::string config;                        // ProtocolConfig::summary()
    std::vector<std::string> steps;            // concrete steps as written in traces
    std::vector<MatchVerdict> verdicts;       // one per concrete step
    std::optional<InvariantBreach> invariant;  // first concrete invariant breach
    Trace<AbstractState> abstract_trace;       // matched steps, up to the first violation
    BbReport bb;
    bool ok = true;
    std::string clause;  // first failing obligation
    std::size_t step = 0;

    /// RESULT=OK or RESULT=VIOLATION clause=<name> step=<i>
    std::string summary() const;
    std::string text() const;
};

/// Replays `trace` (throws ReplayMismatch if it does not replay) and checks
/// every step. A matching failure takes precedence over invariant breaches,
/// which take precedence over bb.1-bb.4 failures of the induced abstract trace.
SimulationReport check_simulation(const ProtocolConfig& cfg, const Trace<WorldState>& trace);

}  // namespace wbb
