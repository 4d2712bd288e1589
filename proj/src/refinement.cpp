#include "wbb/refinement.hpp"

#include "wbb/shapes.hpp"

#include <map>

namespace wbb {

AbstractState abstraction(const ProtocolConfig& cfg, const WorldState& w)
{
    AbstractState a = initial_abstract_state(cfg);
    const unsigned t = cfg.threshold();
    std::map<std::pair<unsigned, std::uint32_t>, std::pair<Message, unsigned>> honest_sigs;
    for (Message m : w.e.basis()) {
        unsigned k = 0;
        if (m.is_item()) {
            a.ea.insert(m);
        } else if (auto s = as_item_sig(m, &k)) {
            if (k <= t && s->p < cfg.max_periods) {
                auto& slot = honest_sigs[{s->p, s->x.id()}];
                slot.first = s->x;
                slot.second += 1;  // distinct terms, so distinct signers
            }
        } else if (auto r = as_receipt(m)) {
            a.ea.insert(m);
            if (r->p < cfg.max_periods)
                a.c[r->p].insert(r->x);
        } else if (as_publish(cfg, m)) {
            a.ea.insert(m);
        }
    }
    for (const auto& [key, v] : honest_sigs)
        if (v.second >= cfg.receive_bound())
            a.r[key.first].insert(v.first);
    return a;
}

LinkReport link_report(const ProtocolConfig& cfg, const WorldState& w, const AbstractState& claimed)
{
    LinkReport rep;
    rep.abstract = abstraction(cfg, w);
    rep.link1 = rep.abstract.r == claimed.r;
    rep.link2 = rep.abstract.c == claimed.c;
    rep.link3 = rep.abstract.ea == claimed.ea;
    rep.violated = check_inv(bbprot_machine(cfg), w);
    return rep;
}

std::string MatchVerdict::text() const
{
    switch (kind) {
    case Kind::matched:
        return "MatchedBy " + event + (binding.empty() ? "" : " " + binding.text());
    case Kind::skip:
        return "Skip";
    case Kind::violation:
        break;
    }
    return "Violation " + clause + ": " + reason;
}

namespace {

const MachineDef<AbstractState>& spec_for(const ProtocolConfig& cfg)
{
    thread_local std::optional<std::pair<ProtocolConfig, MachineDef<AbstractState>>> cache;
    if (!cache || !(cache->first == cfg))
        cache.emplace(cfg, bbspec_machine(cfg));
    return cache->second;
}

unsigned honest_signers(const ProtocolConfig& cfg, const WorldState& w, unsigned p, Message x)
{
    unsigned n = 0;
    for (unsigned k = 1; k <= cfg.threshold(); ++k)
        if (w.e.basis().contains(item_sig(k, p, x)))
            ++n;
    return n;
}

MatchVerdict violation(std::string clause, std::string reason, std::string event = {}, Binding b = {})
{
    MatchVerdict v;
    v.kind = MatchVerdict::Kind::violation;
    v.clause = std::move(clause);
    v.reason = std::move(reason);
    v.event = std::move(event);
    v.binding = std::move(b);
    return v;
}

/// The abstract step the concrete step should correspond to, if any.
std::optional<std::pair<std::string, Binding>> candidate(const ProtocolConfig& cfg, const WorldState& pre,
                                                         const Step& st, const WorldState& post)
{
    if (st.event == "post" || st.event == "ack" || st.event == "publish")
        return std::pair{st.event, st.binding};
    if (st.event == "c_msg2a") {
        unsigned j = st.binding.nat("j");
        unsigned p = pre.peer(j).p_ctr;
        Message x = st.binding.msg("x");
        unsigned bound = cfg.receive_bound();
        if (honest_signers(cfg, pre, p, x) + 1 == bound && honest_signers(cfg, post, p, x) == bound)
            return std::pair{std::string("a_msg1"), Binding{{"x", x}, {"p", p}}};
        return std::nullopt;
    }
    if (st.event == "c_dy2") {
        Message combined = Message::sig(KeyId::combined(), st.binding.msg("m"));
        if (pre.e.basis().contains(combined) || !post.e.basis().contains(combined))
            return std::nullopt;
        if (auto r = as_receipt(combined))
            return std::pair{std::string("a_msg2"), Binding{{"x", r->x}, {"p", r->p}}};
        if (auto b = as_publish(cfg, combined))
            return std::pair{std::string("a_msg3"), Binding{{"Y", b->board}, {"p", b->p}}};
    }
    return std::nullopt;
}

}  // namespace

MatchVerdict match_step(const ProtocolConfig& cfg, const AbstractState& apre, const WorldState& pre, const Step& st,
                        const WorldState& post, const AbstractState& apost)
{
    auto cand = candidate(cfg, pre, st, post);
    if (!cand) {
        if (apre == apost)
            return MatchVerdict{};
        if (apre.r != apost.r)
            return violation("link1", st.event + " changes R without an abstract counterpart");
        if (apre.c != apost.c)
            return violation("link2", st.event + " changes C without an abstract counterpart");
        return violation("link3", st.event + " changes E_A without an abstract counterpart");
    }
    const auto& spec = spec_for(cfg);
    const auto& [event, binding] = *cand;
    const EventDef<AbstractState>* ev = spec.find(event);
    std::vector<Binding> domain = ev->param_domain(apre);
    if (std::find(domain.begin(), domain.end(), binding) == domain.end() || !ev->guard(apre, binding))
        return violation("grd_" + event, event + " " + binding.text() + " not enabled in the abstract state", event,
                         binding);
    if (ev->update(apre, binding) != apost)
        return violation("sim_" + event, "abstraction after " + st.event + " differs from " + event + " result", event,
                         binding);
    MatchVerdict v;
    v.kind = MatchVerdict::Kind::matched;
    v.event = event;
    v.binding = binding;
    return v;
}

MatchVerdict match_step(const ProtocolConfig& cfg, const WorldState& pre, const Step& st, const WorldState& post)
{
    return match_step(cfg, abstraction(cfg, pre), pre, st, post, abstraction(cfg, post));
}

std::string SimulationReport::summary() const
{
    if (ok)
        return "RESULT=OK";
    return "RESULT=VIOLATION clause=" + clause + " step=" + std::to_string(step);
}

std::string SimulationReport::text() const
{
    std::string s = "check-simulation " + config + "\n";
    s += "steps " + std::to_string(steps.size()) + "\n";
    for (std::size_t i = 0; i < verdicts.size(); ++i)
        s += "  " + std::to_string(i + 1) + " " + steps[i] + " : " + verdicts[i].text() + "\n";
    if (invariant) {
        s += "invariants: breach at step " + std::to_string(invariant->step) + ":";
        for (const auto& n : invariant->names)
            s += " " + n;
        s += "\n";
    } else {
        s += "invariants: ok\n";
    }
    s += "abstract trace " + std::to_string(abstract_trace.steps.size()) + " steps\n";
    for (const auto& st : abstract_trace.steps)
        s += "  " + format_step(st) + "\n";
    if (bb.violation)
        s += "bb: " + bb.violation->clause + " at abstract step " + std::to_string(bb.violation->step) + ": " +
             bb.violation->detail + "\n";
    else
        s += "bb: ok (" + std::to_string(bb.states_checked) + " states)\n";
    return s + summary() + "\n";
}

SimulationReport check_simulation(const ProtocolConfig& cfg, const Trace<WorldState>& trace)
{
    auto machine = bbprot_machine(cfg);
    ReplayResult<WorldState> rr = replay(machine, trace);

    SimulationReport rep;
    rep.config = cfg.summary();
    rep.invariant = rr.first_breach;
    rep.abstract_trace = Trace<AbstractState>{"bbspec", abstraction(cfg, rr.states[0]), {}, {}};

    std::vector<AbstractState> abs;
    abs.reserve(rr.states.size());
    for (const auto& w : rr.states)
        abs.push_back(abstraction(cfg, w));

    std::vector<AbstractState> induced{abs[0]};
    std::vector<std::size_t> origin{0};  // concrete step index of each induced state
    std::optional<std::size_t> first_bad;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        Step st{trace.steps[i].event, trace.steps[i].binding, {}, {}};
        rep.steps.push_back(format_step(st));
        MatchVerdict v = match_step(cfg, abs[i], rr.states[i], st, rr.states[i + 1], abs[i + 1]);
        if (!first_bad) {
            if (!v.ok()) {
                first_bad = i + 1;
                rep.ok = false;
                rep.clause = v.clause;
                rep.step = i + 1;
            } else if (v.kind == MatchVerdict::Kind::matched) {
                rep.abstract_trace.steps.push_back({v.event, v.binding, {}, {}});
                induced.push_back(abs[i + 1]);
                origin.push_back(i + 1);
            }
        }
        rep.verdicts.push_back(std::move(v));
    }
    // Skips leave the abstract state unchanged, so the induced abstract trace
    // visits exactly the distinct abstractions along the concrete run.
    rep.bb = check_bb_properties(cfg, induced);
    if (rep.ok && rep.invariant) {
        rep.ok = false;
        rep.clause = rep.invariant->names.front();
        rep.step = rep.invariant->step;
    }
    if (rep.ok && rep.bb.violation) {
        rep.ok = false;
        rep.clause = rep.bb.violation->clause;
        rep.step = origin[rep.bb.violation->step];
    }
    return rep;
}

}  // namespace wbb
