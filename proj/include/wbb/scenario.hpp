#pragma once

// Scenario files: a versioned, sectioned text format describing one checker
// run together with its expected outcome.
//
//   wbb-scenario 1
//   name = attack_noround2
//   [config]
//   n = 4
//   t = 3
//   items = x
//   round2 = off
//   [bounds]
//   depth = 25
//   [mode]
//   kind = attack
//   goal = ReceiptWithoutPublication
//   expect = found
//
// The full schema is in README.md. parse_scenario(s.text()) == s for every
// scenario s.

#include "wbb/explorer.hpp"
#include "wbb/publication.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wbb {

enum class ScenarioMode { script, explore, attack, liveness, publication };

std::string mode_name(ScenarioMode m);

/// What a run concluded. Attack runs yield found/not_found, all others
/// ok/violation.
enum class Verdict { ok, violation, found, not_found };

std::string verdict_name(Verdict v);

struct Scenario {
    std::string name = "scenario";
    ProtocolConfig config;
    ExploreBounds bounds;
    ScenarioMode mode = ScenarioMode::script;
    Verdict expect = Verdict::ok;
    std::optional<std::string> expect_clause;  // script, explore
    std::optional<unsigned> expect_rounds;     // publication

    AttackGoal goal;
    LivenessRegime regime = LivenessRegime::all_honest;
    LivenessBounds liveness;

    std::vector<std::string> directives;  // script: initial-state directives
    std::vector<Step> script;

    PostingOutcome databases;  // publication: period-0 databases of peers 1..n
    Schedule schedule;

    std::string out_dir;  // empty: caller's default
    std::string report_file;
    std::string trace_file;

    std::string text() const;
    friend bool operator==(const Scenario&, const Scenario&);
};

/// Throws ParseError carrying the 1-based line of the offending entry, and
/// ConfigError (also with a line prefix) when the configuration is invalid.
Scenario parse_scenario(std::string_view text);

struct ScenarioOutcome {
    Verdict verdict = Verdict::ok;
    std::string report;                // RESULT line, then EXPECTATION=MET|FAILED
    std::optional<std::string> trace;  // stamped trace text, when one exists
    /// 0 expectation met, 1 unexpected violation or mismatch, 2 expected
    /// attack not found.
    int exit_code = 0;
};

/// Runs the scenario. ReplayMismatch propagates for unreplayable scripts.
ScenarioOutcome run_scenario(const Scenario& s);

/// Trace over bbprot for the scenario's configuration.
Trace<WorldState> script_trace(const Scenario& s);

}  // namespace wbb
