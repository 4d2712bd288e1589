#pragma once

// Guarded-event machines: events carry a finite parameter domain, a guard and
// a deterministic update. Nondeterminism of a relational body is expressed by
// enlarging the parameter domain, so an (event, binding) pair fully determines
// the successor state.

#include "wbb/message.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wbb {

using ParamValue = std::variant<unsigned, Message>;

struct Param {
    std::string name;
    ParamValue value;

    friend bool operator==(const Param&, const Param&) = default;
};

std::string value_text(const ParamValue& v);
std::strong_ordering compare_values(const ParamValue& a, const ParamValue& b);

/// Named parameter values of one event occurrence, in declaration order.
class Binding {
public:
    Binding() = default;
    Binding(std::initializer_list<Param> params) : params_(params) {}

    Binding& set(std::string name, ParamValue value);
    const ParamValue* find(std::string_view name) const;
    unsigned nat(std::string_view name) const;
    Message msg(std::string_view name) const;

    const std::vector<Param>& params() const { return params_; }
    bool empty() const { return params_.empty(); }
    /// `j=1 x=item(x)`; empty string for no parameters.
    std::string text() const;

    friend bool operator==(const Binding&, const Binding&) = default;
    friend std::strong_ordering operator<=>(const Binding& a, const Binding& b);

private:
    std::vector<Param> params_;
};

Binding parse_binding(std::string_view text);

class StepRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ReplayMismatch : public std::runtime_error {
public:
    ReplayMismatch(std::size_t step, const std::string& what)
        : std::runtime_error("replay mismatch at step " + std::to_string(step) + ": " + what), step_(step)
    {
    }
    /// 1-based index of the offending step.
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

template <class S>
struct EventDef {
    std::string name;
    std::function<std::vector<Binding>(const S&)> param_domain;
    std::function<bool(const S&, const Binding&)> guard;
    std::function<S(const S&, const Binding&)> update;
    /// Output events (ack, publish) select a value without changing state.
    bool output = false;
    /// Every enabled binding leaves the state unchanged (for example an
    /// adversary rule whose result is already derivable). Explorers may skip
    /// such events without losing reachable states.
    bool stutter = false;
};

template <class S>
struct Invariant {
    std::string name;
    std::function<bool(const S&)> holds;
};

template <class S>
struct MachineDef {
    std::string name;
    std::function<S()> init;
    std::vector<Invariant<S>> invariants;
    std::vector<EventDef<S>> events;
    /// Canonical text encoding of a state; equal states encode identically.
    std::function<std::string(const S&)> encode;
    /// Optional: applies a trace header directive (`@ ...`) to the initial state.
    std::function<S(const S&, std::string_view)> amend_initial;

    const EventDef<S>* find(std::string_view event) const
    {
        for (const auto& e : events)
            if (e.name == event)
                return &e;
        return nullptr;
    }
};

struct EnabledStep {
    std::size_t event = 0;
    Binding binding;
};

std::uint64_t fingerprint(std::string_view text);
std::string fingerprint_hex(std::uint64_t fp);

template <class S>
std::uint64_t state_fingerprint(const MachineDef<S>& machine, const S& state)
{
    return fingerprint(machine.encode(state));
}

/// Enabled (event, binding) pairs in event declaration order, then canonical
/// binding order.
template <class S>
std::vector<EnabledStep> enabled_steps(const MachineDef<S>& machine, const S& state)
{
    std::vector<EnabledStep> out;
    for (std::size_t e = 0; e < machine.events.size(); ++e) {
        const auto& ev = machine.events[e];
        std::vector<Binding> domain = ev.param_domain(state);
        std::sort(domain.begin(), domain.end());
        domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
        for (auto& b : domain)
            if (ev.guard(state, b))
                out.push_back({e, std::move(b)});
    }
    return out;
}

template <class S>
std::vector<std::pair<std::string, Binding>> enabled(const MachineDef<S>& machine, const S& state)
{
    std::vector<std::pair<std::string, Binding>> out;
    for (auto& s : enabled_steps(machine, state))
        out.emplace_back(machine.events[s.event].name, std::move(s.binding));
    return out;
}

template <class S>
S step(const MachineDef<S>& machine, const S& state, std::string_view event, const Binding& binding)
{
    const EventDef<S>* ev = machine.find(event);
    if (!ev)
        throw StepRejected("unknown event '" + std::string(event) + "' in machine " + machine.name);
    std::vector<Binding> domain = ev->param_domain(state);
    if (std::find(domain.begin(), domain.end(), binding) == domain.end())
        throw StepRejected("binding [" + binding.text() + "] not in parameter domain of " + ev->name);
    if (!ev->guard(state, binding))
        throw StepRejected("guard of " + ev->name + " false for [" + binding.text() + "]");
    return ev->update(state, binding);
}

template <class S>
std::vector<std::string> check_inv(const MachineDef<S>& machine, const S& state)
{
    std::vector<std::string> violated;
    for (const auto& inv : machine.invariants)
        if (!inv.holds(state))
            violated.push_back(inv.name);
    return violated;
}

struct Step {
    std::string event;
    Binding binding;
    std::optional<std::uint64_t> pre;
    std::optional<std::uint64_t> post;
};

template <class S>
struct Trace {
    std::string machine;
    S initial;
    std::vector<std::string> directives;
    std::vector<Step> steps;
};

template <class S>
Trace<S> empty_trace(const MachineDef<S>& machine)
{
    return Trace<S>{machine.name, machine.init(), {}, {}};
}

struct InvariantBreach {
    std::size_t step = 0;  // 0 = initial state
    std::vector<std::string> names;
};

template <class S>
struct ReplayResult {
    std::vector<S> states;  // states[0] initial, states[i] after step i
    std::optional<InvariantBreach> first_breach;

    const S& final_state() const { return states.back(); }
};

/// Replays `trace` from its initial state, rejecting the first step that is not
/// enabled or whose recorded post-state fingerprint disagrees with the
/// recomputed one. Invariants are checked on every state.
template <class S>
ReplayResult<S> replay(const MachineDef<S>& machine, const Trace<S>& trace)
{
    if (!trace.machine.empty() && trace.machine != machine.name)
        throw ReplayMismatch(0, "trace is for machine " + trace.machine + ", not " + machine.name);
    ReplayResult<S> result;
    result.states.push_back(trace.initial);
    if (auto v = check_inv(machine, trace.initial); !v.empty())
        result.first_breach = InvariantBreach{0, std::move(v)};
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const Step& st = trace.steps[i];
        const S& pre = result.states.back();
        if (st.pre && *st.pre != state_fingerprint(machine, pre))
            throw ReplayMismatch(i + 1, "pre-state fingerprint differs");
        S post;
        try {
            post = step(machine, pre, st.event, st.binding);
        } catch (const StepRejected& e) {
            throw ReplayMismatch(i + 1, e.what());
        }
        if (st.post && *st.post != state_fingerprint(machine, post))
            throw ReplayMismatch(i + 1, "post-state fingerprint differs for " + st.event + " " +
                                            st.binding.text());
        if (!result.first_breach)
            if (auto v = check_inv(machine, post); !v.empty())
                result.first_breach = InvariantBreach{i + 1, std::move(v)};
        result.states.push_back(std::move(post));
    }
    return result;
}

/// Fills in pre/post fingerprints by replaying; throws like replay().
template <class S>
void stamp_trace(const MachineDef<S>& machine, Trace<S>& trace)
{
    S cur = trace.initial;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        auto& st = trace.steps[i];
        st.pre = state_fingerprint(machine, cur);
        try {
            cur = step(machine, cur, st.event, st.binding);
        } catch (const StepRejected& e) {
            throw ReplayMismatch(i + 1, e.what());
        }
        st.post = state_fingerprint(machine, cur);
    }
}

// Trace text format:
//
//   wbb-trace 1 machine=<name>
//   @ <initial-state directive>        (zero or more)
//   <event> <param>=<value> ... [-> <post-state fingerprint>]
//
// Blank lines and lines starting with '#' are ignored.

std::string format_step(const Step& step);
Step parse_step(std::string_view line, std::size_t line_no);

template <class S>
std::string write_trace(const Trace<S>& trace)
{
    std::string out = "wbb-trace 1 machine=" + trace.machine + "\n";
    for (const auto& d : trace.directives)
        out += "@ " + d + "\n";
    for (const auto& st : trace.steps)
        out += format_step(st) + "\n";
    return out;
}

struct RawTrace {
    std::string machine;
    std::vector<std::string> directives;
    std::vector<Step> steps;
};

RawTrace parse_trace_text(std::string_view text);

template <class S>
Trace<S> read_trace(const MachineDef<S>& machine, std::string_view text)
{
    RawTrace raw = parse_trace_text(text);
    Trace<S> t{raw.machine, machine.init(), raw.directives, std::move(raw.steps)};
    for (const auto& d : t.directives) {
        if (!machine.amend_initial)
            throw ParseError("machine " + machine.name + " takes no trace directives", 0, 0);
        t.initial = machine.amend_initial(t.initial, d);
    }
    return t;
}

}  // namespace wbb
