#pragma once

// The bulletin board specification machine. One definition covers all four
// stages: a single period, several periods, clash rejection and hashed
// publication are all selected by ProtocolConfig.

#include "wbb/config.hpp"
#include "wbb/id_set.hpp"
#include "wbb/machine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wbb {

struct AbstractState {
    IdSet ea;               // E_A
    std::vector<IdSet> r;   // R_p, items
    std::vector<IdSet> c;   // C_p, items

    friend bool operator==(const AbstractState&, const AbstractState&) = default;
};

AbstractState initial_abstract_state(const ProtocolConfig& cfg);
std::string encode_abstract(const AbstractState& s);

/// Publish terms of E_A for period p.
std::vector<Message> published_for(const ProtocolConfig& cfg, const AbstractState& s, unsigned p);

MachineDef<AbstractState> bbspec_machine(const ProtocolConfig& cfg);

struct BbViolation {
    std::string clause;  // bb1..bb4
    std::size_t step = 0;
    std::string detail;
};

/// bb.1-bb.3 on one state; bb.3 only when the clash guard is on.
std::optional<BbViolation> check_bb_state(const ProtocolConfig& cfg, const AbstractState& s);
/// bb.4 across one transition: publications persist, one per period.
std::optional<BbViolation> check_bb_transition(const ProtocolConfig& cfg, const AbstractState& pre,
                                               const AbstractState& post);

struct BbReport {
    std::optional<BbViolation> violation;
    std::size_t states_checked = 0;
    bool ok() const { return !violation; }
};

/// Checks bb.1-bb.4 on every state of a sequence (states[0] is initial).
BbReport check_bb_properties(const ProtocolConfig& cfg, const std::vector<AbstractState>& states);
/// Replays a bbspec trace and checks it.
BbReport check_bb_properties(const ProtocolConfig& cfg, const Trace<AbstractState>& trace);

}  // namespace wbb
