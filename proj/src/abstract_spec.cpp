#include "wbb/abstract_spec.hpp"

#include "wbb/shapes.hpp"

namespace wbb {

AbstractState initial_abstract_state(const ProtocolConfig& cfg)
{
    AbstractState s;
    s.r.resize(cfg.max_periods);
    s.c.resize(cfg.max_periods);
    return s;
}

std::string encode_abstract(const AbstractState& s)
{
    std::string out = "EA=" + s.ea.text();
    for (std::size_t p = 0; p < s.r.size(); ++p)
        out += " R" + std::to_string(p) + "=" + s.r[p].text() + " C" + std::to_string(p) + "=" + s.c[p].text();
    return out;
}

std::vector<Message> published_for(const ProtocolConfig& cfg, const AbstractState& s, unsigned p)
{
    std::vector<Message> out;
    for (Message m : s.ea)
        if (auto b = as_publish(cfg, m); b && b->p == p)
            out.push_back(m);
    return out;
}

namespace {

IdSet union_r(const AbstractState& s)
{
    IdSet u;
    for (const auto& r : s.r)
        u.insert_all(r);
    return u;
}

bool clash_free(const ProtocolConfig& cfg, const AbstractState& s, Message x)
{
    IdSet u = union_r(s);
    for (const auto& y : cfg.clash.clashset(x.item_id()))
        if (u.contains(Message::item(y)))
            return false;
    return true;
}

bool shapes_ok(const ProtocolConfig& cfg, const AbstractState& s)
{
    for (Message m : s.ea) {
        if (m.is_item() && cfg.has_item(m.item_id()))
            continue;
        if (auto r = as_receipt(m); r && r->p < cfg.max_periods)
            continue;
        if (auto b = as_publish(cfg, m); b && b->p < cfg.max_periods)
            continue;
        return false;
    }
    return true;
}

}  // namespace

MachineDef<AbstractState> bbspec_machine(const ProtocolConfig& cfg)
{
    cfg.validate();
    MachineDef<AbstractState> m;
    m.name = "bbspec";
    m.init = [cfg] { return initial_abstract_state(cfg); };
    m.encode = encode_abstract;

    m.invariants.push_back({"types", [cfg](const AbstractState& s) { return shapes_ok(cfg, s); }});
    m.invariants.push_back({"c_sub_r", [](const AbstractState& s) {
                                for (std::size_t p = 0; p < s.r.size(); ++p)
                                    if (!s.c[p].subset_of(s.r[p]))
                                        return false;
                                return true;
                            }});
    m.invariants.push_back({"bb4", [cfg](const AbstractState& s) {
                                for (unsigned p = 0; p < cfg.max_periods; ++p)
                                    if (published_for(cfg, s, p).size() > 1)
                                        return false;
                                return true;
                            }});

    const std::vector<Message> items = cfg.item_messages();
    auto periods = [cfg] {
        std::vector<unsigned> ps;
        for (unsigned p = 0; p < cfg.max_periods; ++p)
            ps.push_back(p);
        return ps;
    };

    // post(x): E_A := E_A u {x}
    m.events.push_back({"post",
                        [items](const AbstractState&) {
                            std::vector<Binding> out;
                            for (Message x : items)
                                out.push_back({{"x", x}});
                            return out;
                        },
                        [](const AbstractState&, const Binding&) { return true; },
                        [](const AbstractState& s, const Binding& b) {
                            AbstractState n = s;
                            n.ea.insert(b.msg("x"));
                            return n;
                        }});

    // r <- ack: r :in E_A n RECEIPT
    m.events.push_back({"ack",
                        [](const AbstractState& s) {
                            std::vector<Binding> out;
                            for (Message e : s.ea)
                                if (as_receipt(e))
                                    out.push_back({{"r", e}});
                            return out;
                        },
                        [](const AbstractState& s, const Binding& b) {
                            Message r = b.msg("r");
                            return as_receipt(r).has_value() && s.ea.contains(r);
                        },
                        [](const AbstractState& s, const Binding&) { return s; }, true});

    // P <- publish
    if (cfg.hashed_publication) {
        m.events.push_back({"publish",
                            [cfg](const AbstractState& s) {
                                std::vector<Binding> out;
                                for (Message e : s.ea)
                                    if (auto b = as_publish(cfg, e))
                                        out.push_back({{"Y", b->board}, {"p", b->p}});
                                return out;
                            },
                            [cfg](const AbstractState& s, const Binding& b) {
                                Message y = b.msg("Y");
                                return is_item_set(y) && s.ea.contains(publish_term(cfg, b.nat("p"), y));
                            },
                            [](const AbstractState& s, const Binding&) { return s; }, true});
    } else {
        m.events.push_back({"publish",
                            [cfg](const AbstractState& s) {
                                std::vector<Binding> out;
                                for (Message e : s.ea)
                                    if (as_publish(cfg, e))
                                        out.push_back({{"P", e}});
                                return out;
                            },
                            [cfg](const AbstractState& s, const Binding& b) {
                                Message p = b.msg("P");
                                return as_publish(cfg, p).has_value() && s.ea.contains(p);
                            },
                            [](const AbstractState& s, const Binding&) { return s; }, true});
    }

    // a_msg1(x, p): x in E_A n ITEM [and clashset(x) n U_p R_p = {}]; R_p := R_p u {x}
    m.events.push_back({"a_msg1",
                        [items, periods](const AbstractState&) {
                            std::vector<Binding> out;
                            for (Message x : items)
                                for (unsigned p : periods())
                                    out.push_back({{"x", x}, {"p", p}});
                            return out;
                        },
                        [cfg](const AbstractState& s, const Binding& b) {
                            Message x = b.msg("x");
                            unsigned p = b.nat("p");
                            if (p >= cfg.max_periods || !x.is_item() || !s.ea.contains(x))
                                return false;
                            return !cfg.enable_clash_guard || clash_free(cfg, s, x);
                        },
                        [](const AbstractState& s, const Binding& b) {
                            AbstractState n = s;
                            n.r[b.nat("p")].insert(b.msg("x"));
                            return n;
                        }});

    // a_msg2(x, p): x in R_p and every board published for p contains x
    m.events.push_back({"a_msg2",
                        [items, periods](const AbstractState&) {
                            std::vector<Binding> out;
                            for (Message x : items)
                                for (unsigned p : periods())
                                    out.push_back({{"x", x}, {"p", p}});
                            return out;
                        },
                        [cfg](const AbstractState& s, const Binding& b) {
                            Message x = b.msg("x");
                            unsigned p = b.nat("p");
                            if (p >= cfg.max_periods || !s.r[p].contains(x))
                                return false;
                            for (Message pub : published_for(cfg, s, p))
                                if (!board_items(as_publish(cfg, pub)->board).contains(x))
                                    return false;
                            return true;
                        },
                        [](const AbstractState& s, const Binding& b) {
                            AbstractState n = s;
                            unsigned p = b.nat("p");
                            n.ea.insert(receipt(p, b.msg("x")));
                            n.c[p].insert(b.msg("x"));
                            return n;
                        }});

    // a_msg3(Y, p): C_p <= Y <= R_p and nothing published for p yet
    m.events.push_back({"a_msg3",
                        [items, periods](const AbstractState&) {
                            std::vector<Binding> out;
                            for (Message y : all_boards(items))
                                for (unsigned p : periods())
                                    out.push_back({{"Y", y}, {"p", p}});
                            return out;
                        },
                        [cfg](const AbstractState& s, const Binding& b) {
                            Message y = b.msg("Y");
                            unsigned p = b.nat("p");
                            if (p >= cfg.max_periods || !is_item_set(y))
                                return false;
                            IdSet ys = board_items(y);
                            return s.c[p].subset_of(ys) && ys.subset_of(s.r[p]) &&
                                   published_for(cfg, s, p).empty();
                        },
                        [cfg](const AbstractState& s, const Binding& b) {
                            AbstractState n = s;
                            n.ea.insert(publish_term(cfg, b.nat("p"), b.msg("Y")));
                            return n;
                        }});
    return m;
}

std::optional<BbViolation> check_bb_state(const ProtocolConfig& cfg, const AbstractState& s)
{
    IdSet posted;
    for (Message m : s.ea)
        if (m.is_item())
            posted.insert(m);
    for (Message m : s.ea) {
        auto pub = as_publish(cfg, m);
        if (!pub)
            continue;
        IdSet ys = board_items(pub->board);
        if (!ys.subset_of(posted))
            return BbViolation{"bb1", 0, "published board " + pub->board.text() + " holds an unposted item"};
        for (Message e : s.ea)
            if (auto r = as_receipt(e); r && r->p == pub->p && !ys.contains(r->x))
                return BbViolation{"bb2", 0,
                                   "receipted " + r->x.text() + " missing from board " + pub->board.text() +
                                       " for period " + std::to_string(r->p)};
    }
    if (cfg.enable_clash_guard) {
        IdSet u;
        for (const auto& r : s.r)
            u.insert_all(r);
        for (const auto& [a, b] : cfg.clash.pairs())
            if (u.contains(Message::item(a)) && u.contains(Message::item(b)))
                return BbViolation{"bb3", 0, "clashing items " + a + " and " + b + " both accepted"};
    }
    for (unsigned p = 0; p < cfg.max_periods; ++p)
        if (published_for(cfg, s, p).size() > 1)
            return BbViolation{"bb4", 0, "two boards published for period " + std::to_string(p)};
    return std::nullopt;
}

std::optional<BbViolation> check_bb_transition(const ProtocolConfig& cfg, const AbstractState& pre,
                                               const AbstractState& post)
{
    for (Message m : pre.ea)
        if (as_publish(cfg, m) && !post.ea.contains(m))
            return BbViolation{"bb4", 0, "published board " + m.text() + " disappeared"};
    return std::nullopt;
}

BbReport check_bb_properties(const ProtocolConfig& cfg, const std::vector<AbstractState>& states)
{
    BbReport rep;
    for (std::size_t i = 0; i < states.size(); ++i) {
        ++rep.states_checked;
        std::optional<BbViolation> v = check_bb_state(cfg, states[i]);
        if (!v && i > 0)
            v = check_bb_transition(cfg, states[i - 1], states[i]);
        if (v) {
            v->step = i;
            rep.violation = std::move(v);
            return rep;
        }
    }
    return rep;
}

BbReport check_bb_properties(const ProtocolConfig& cfg, const Trace<AbstractState>& trace)
{
    auto machine = bbspec_machine(cfg);
    return check_bb_properties(cfg, replay(machine, trace).states);
}

}  // namespace wbb
