#include "wbb/explorer.hpp"

#include "wbb/refinement.hpp"
#include "wbb/shapes.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace wbb {

std::string ExploreBounds::text() const
{
    std::string s = mode == ExploreMode::exhaustive ? "mode=exhaustive" : "mode=randomized";
    s += " max_depth=" + (max_depth ? std::to_string(max_depth) : std::string("none"));
    if (mode == ExploreMode::randomized)
        s += " seed=" + std::to_string(seed) + " samples=" + std::to_string(samples);
    else
        s += std::string(" symmetry=") + (symmetry ? "on" : "off");
    if (max_states)
        s += " max_states=" + std::to_string(max_states);
    return s;
}

namespace {

// ------------------------------------------------------------ packed states

void put(std::string& s, std::uint32_t v)
{
    while (v >= 0x80) {
        s.push_back(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    s.push_back(static_cast<char>(v));
}

std::uint32_t get(std::string_view s, std::size_t& pos)
{
    std::uint32_t v = 0;
    for (unsigned shift = 0;; shift += 7) {
        auto c = static_cast<unsigned char>(s[pos++]);
        v |= static_cast<std::uint32_t>(c & 0x7f) << shift;
        if (!(c & 0x80))
            return v;
    }
}

void put_set(std::string& s, const IdSet& set)
{
    put(s, static_cast<std::uint32_t>(set.size()));
    for (Message m : set)
        put(s, m.id());
}

IdSet get_set(std::string_view s, std::size_t& pos)
{
    IdSet out;
    std::uint32_t n = get(s, pos);
    for (std::uint32_t i = 0; i < n; ++i)
        out.insert(Message::from_id(get(s, pos)));
    return out;
}

std::string pack(const WorldState& w)
{
    std::string s;
    for (const PeerState& ps : w.peers) {
        put(s, ps.p_ctr);
        put(s, ps.c_ctr);
        for (std::size_t p = 0; p < ps.I.size(); ++p) {
            put_set(s, ps.I[p]);
            put_set(s, ps.D[p]);
            put_set(s, ps.H[p]);
        }
    }
    put_set(s, w.e.basis());
    return s;
}

WorldState unpack(const ProtocolConfig& cfg, std::string_view s)
{
    WorldState w;
    std::size_t pos = 0;
    w.peers.resize(cfg.threshold());
    for (PeerState& ps : w.peers) {
        ps.p_ctr = get(s, pos);
        ps.c_ctr = get(s, pos);
        ps.I.resize(cfg.max_periods);
        ps.D.resize(cfg.max_periods);
        ps.H.resize(cfg.max_periods);
        for (unsigned p = 0; p < cfg.max_periods; ++p) {
            ps.I[p] = get_set(s, pos);
            ps.D[p] = get_set(s, pos);
            ps.H[p] = get_set(s, pos);
        }
    }
    w.e = Knowledge::from_basis(get_set(s, pos));
    return w;
}

// ---------------------------------------------------------------- symmetry

struct Renaming {
    std::vector<unsigned> peer;           // peer[j] = image of j, index 0 unused
    std::map<std::string, Message> item;  // item id -> image
};

class Symmetry {
public:
    Symmetry(const ProtocolConfig& cfg, bool enabled) : cfg_(cfg)
    {
        std::vector<std::vector<unsigned>> peer_maps;
        std::vector<unsigned> honest(cfg.threshold());
        std::iota(honest.begin(), honest.end(), 1u);
        std::vector<unsigned> dishonest(cfg.n - cfg.threshold());
        std::iota(dishonest.begin(), dishonest.end(), cfg.threshold() + 1);
        do {
            std::vector<unsigned> d = dishonest;
            do {
                std::vector<unsigned> map(cfg.n + 1, 0);
                for (unsigned j = 1; j <= cfg.threshold(); ++j)
                    map[j] = honest[j - 1];
                for (unsigned k = 0; k < d.size(); ++k)
                    map[cfg.threshold() + 1 + k] = d[k];
                peer_maps.push_back(std::move(map));
            } while (enabled && std::next_permutation(d.begin(), d.end()));
        } while (enabled && std::next_permutation(honest.begin(), honest.end()));

        std::vector<std::map<std::string, Message>> item_maps;
        std::vector<std::string> items = cfg.items;
        std::sort(items.begin(), items.end());
        std::vector<std::string> img = items;
        do {
            bool ok = true;
            for (const auto& [a, b] : cfg.clash.pairs()) {
                auto ia = std::find(items.begin(), items.end(), a) - items.begin();
                auto ib = std::find(items.begin(), items.end(), b) - items.begin();
                if (!cfg.clash.clashes(img[ia], img[ib]))
                    ok = false;
            }
            if (ok) {
                std::map<std::string, Message> m;
                for (std::size_t i = 0; i < items.size(); ++i)
                    m[items[i]] = Message::item(img[i]);
                item_maps.push_back(std::move(m));
            }
            // Large item sets would multiply the group beyond any benefit.
        } while (enabled && items.size() <= 4 && std::next_permutation(img.begin(), img.end()));

        for (const auto& pm : peer_maps)
            for (const auto& im : item_maps)
                perms_.push_back({pm, im});
    }

    std::size_t size() const { return perms_.size(); }

    /// Orbit-invariant key: the least packed image over the group.
    std::string key(const WorldState& w)
    {
        std::vector<std::uint32_t> best, cur;
        for (std::size_t i = 0; i < perms_.size(); ++i) {
            image(w, i, cur);
            if (i == 0 || cur < best)
                best.swap(cur);
        }
        std::string s;
        for (std::uint32_t v : best)
            put(s, v);
        return s;
    }

private:
    Message rename(Message m, std::size_t pi)
    {
        std::uint64_t slot = (static_cast<std::uint64_t>(pi) << 32) | m.id();
        if (auto it = cache_.find(slot); it != cache_.end())
            return it->second;
        const Renaming& r = perms_[pi];
        Message out;
        switch (m.kind()) {
        case MessageKind::item: {
            auto it = r.item.find(m.item_id());
            out = it == r.item.end() ? m : it->second;
            break;
        }
        case MessageKind::key:
            out = Message::key(rename_key(m.key_id(), r));
            break;
        case MessageKind::sig:
            out = Message::sig(rename_key(m.signer(), r), rename(m.body(), pi));
            break;
        case MessageKind::pair:
            out = Message::pair(m.period(), rename(m.body(), pi));
            break;
        case MessageKind::hash:
            out = Message::hash(rename(m.body(), pi));
            break;
        case MessageKind::set: {
            std::vector<Message> el;
            for (Message e : m.elements())
                el.push_back(rename(e, pi));
            out = Message::set(std::move(el));
            break;
        }
        }
        cache_.emplace(slot, out);
        return out;
    }

    static KeyId rename_key(KeyId k, const Renaming& r)
    {
        if (k.kind != KeyKind::ssk && k.peer < r.peer.size())
            k.peer = r.peer[k.peer];
        return k;
    }

    void put_image(const IdSet& s, std::size_t pi, std::vector<std::uint32_t>& out)
    {
        std::size_t start = out.size() + 1;
        out.push_back(static_cast<std::uint32_t>(s.size()));
        for (Message m : s)
            out.push_back(rename(m, pi).id());
        std::sort(out.begin() + static_cast<std::ptrdiff_t>(start), out.end());
    }

    void image(const WorldState& w, std::size_t pi, std::vector<std::uint32_t>& out)
    {
        out.clear();
        const Renaming& r = perms_[pi];
        std::vector<unsigned> inverse(w.peers.size() + 1, 0);
        for (unsigned j = 1; j <= w.peers.size(); ++j)
            inverse[r.peer[j]] = j;
        for (unsigned pos = 1; pos <= w.peers.size(); ++pos) {
            const PeerState& ps = w.peer(inverse[pos]);
            out.push_back(ps.p_ctr);
            out.push_back(ps.c_ctr);
            for (std::size_t p = 0; p < ps.I.size(); ++p) {
                put_image(ps.I[p], pi, out);
                put_image(ps.D[p], pi, out);
                put_image(ps.H[p], pi, out);
            }
        }
        put_image(w.e.basis(), pi, out);
    }

    ProtocolConfig cfg_;
    std::vector<Renaming> perms_;
    std::unordered_map<std::uint64_t, Message> cache_;
};

// ------------------------------------------------------------------- edges

struct Edge {
    std::uint32_t event;
    std::uint32_t index;  // position among the event's enabled bindings
    Binding binding;
};

/// Enabled steps of non-stutter events, in declaration then binding order.
std::vector<Edge> edges_of(const MachineDef<WorldState>& m, const WorldState& w)
{
    std::vector<Edge> out;
    for (std::uint32_t e = 0; e < m.events.size(); ++e) {
        const auto& ev = m.events[e];
        if (ev.stutter)
            continue;
        std::vector<Binding> domain = ev.param_domain(w);
        std::sort(domain.begin(), domain.end());
        domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
        std::uint32_t idx = 0;
        for (auto& b : domain)
            if (ev.guard(w, b))
                out.push_back({e, idx++, std::move(b)});
    }
    return out;
}

constexpr std::uint32_t no_parent = 0xffffffffu;

struct Meta {
    std::uint32_t parent;
    std::uint32_t event;
    std::uint32_t index;
};

/// Rebuilds the step sequence leading to node `n` by replaying edge choices.
Trace<WorldState> rebuild(const MachineDef<WorldState>& m, const std::vector<Meta>& meta, std::uint32_t n,
                          const std::optional<std::pair<std::uint32_t, std::uint32_t>>& extra = std::nullopt)
{
    std::vector<std::pair<std::uint32_t, std::uint32_t>> path;
    for (std::uint32_t cur = n; meta[cur].parent != no_parent; cur = meta[cur].parent)
        path.push_back({meta[cur].event, meta[cur].index});
    std::reverse(path.begin(), path.end());
    if (extra)
        path.push_back(*extra);
    Trace<WorldState> t = empty_trace(m);
    WorldState w = t.initial;
    for (const auto& [event, index] : path) {
        for (auto& e : edges_of(m, w))
            if (e.event == event && e.index == index) {
                t.steps.push_back({m.events[event].name, e.binding, {}, {}});
                w = m.events[event].update(w, e.binding);
                break;
            }
    }
    stamp_trace(m, t);
    return t;
}

/// Level-by-level BFS over canonical states. `on_state(node, w, depth)` and
/// `on_edge(node, w, edge, post, is_new, new_node)` return false to stop.
/// Returns true when the search ran to the fixpoint.
template <class OnState, class OnEdge>
bool bfs(const ProtocolConfig& cfg, const MachineDef<WorldState>& m, const ExploreBounds& bounds,
         std::vector<Meta>& meta, unsigned& depth_reached, OnState on_state, OnEdge on_edge)
{
    Symmetry sym(cfg, bounds.symmetry);
    std::unordered_set<std::string> seen;
    WorldState init = m.init();
    seen.insert(sym.key(init));
    meta.push_back({no_parent, 0, 0});
    std::vector<std::pair<std::uint32_t, std::string>> level{{0, pack(init)}}, next;
    bool truncated = false;
    for (unsigned depth = 0; !level.empty(); ++depth) {
        depth_reached = depth;
        for (auto& [node, packed] : level) {
            WorldState w = unpack(cfg, packed);
            if (!on_state(node, w, depth))
                return false;
            for (auto& e : edges_of(m, w)) {
                WorldState post = m.events[e.event].update(w, e.binding);
                bool fresh = false;
                std::uint32_t id = no_parent;
                bool expand = !m.events[e.event].output && !(post == w);
                if (expand) {
                    if (bounds.max_depth && depth + 1 > bounds.max_depth) {
                        truncated = true;
                    } else if (bounds.max_states && meta.size() >= bounds.max_states) {
                        truncated = true;
                    } else if (seen.insert(sym.key(post)).second) {
                        fresh = true;
                        id = static_cast<std::uint32_t>(meta.size());
                        meta.push_back({node, e.event, e.index});
                    }
                }
                if (!on_edge(node, w, e, post, fresh, id))
                    return false;
                if (fresh)
                    next.emplace_back(id, pack(post));
            }
        }
        level.swap(next);
        next.clear();
    }
    return !truncated;
}

std::string count_publications(const ProtocolConfig& cfg, const AbstractState& a, std::size_t& max_per_period)
{
    for (unsigned p = 0; p < cfg.max_periods; ++p)
        max_per_period = std::max(max_per_period, published_for(cfg, a, p).size());
    return {};
}

ExploreResult explore_exhaustive(const ProtocolConfig& cfg, const ExploreBounds& bounds)
{
    auto m = bbprot_machine(cfg);
    ExploreResult res;
    res.config = cfg.summary();
    res.bounds = bounds;
    std::vector<Meta> meta;
    AbstractState apre;
    auto fail = [&](std::string kind, std::string clause, std::string detail, Trace<WorldState> t) {
        res.violation = Finding{std::move(kind), std::move(clause), std::move(detail), std::move(t)};
    };
    res.fixpoint = bfs(
        cfg, m, bounds, meta, res.depth,
        [&](std::uint32_t node, const WorldState& w, unsigned) {
            ++res.states;
            if (auto v = violated_invariants(cfg, w); !v.empty()) {
                fail("invariant", v.front(), "state violates " + v.front(), rebuild(m, meta, node));
                return false;
            }
            apre = abstraction(cfg, w);
            count_publications(cfg, apre, res.max_boards_per_period);
            if (auto v = check_bb_state(cfg, apre)) {
                fail("bb", v->clause, v->detail, rebuild(m, meta, node));
                return false;
            }
            return true;
        },
        [&](std::uint32_t node, const WorldState& w, const Edge& e, const WorldState& post, bool, std::uint32_t) {
            ++res.edges;
            const auto& ev = m.events[e.event];
            if (!ev.output && ev.name != "post" && post == w) {
                ++res.skipped;
                return true;
            }
            AbstractState apost = abstraction(cfg, post);
            Step st{ev.name, e.binding, {}, {}};
            MatchVerdict v = match_step(cfg, apre, w, st, post, apost);
            if (!v.ok()) {
                fail("simulation", v.clause, v.reason, rebuild(m, meta, node, std::pair{e.event, e.index}));
                return false;
            }
            if (v.kind == MatchVerdict::Kind::matched)
                ++res.matched[v.event];
            else
                ++res.skipped;
            if (auto b = check_bb_transition(cfg, apre, apost)) {
                fail("bb", b->clause, b->detail, rebuild(m, meta, node, std::pair{e.event, e.index}));
                return false;
            }
            return true;
        });
    if (res.violation)
        res.fixpoint = false;
    return res;
}

ExploreResult explore_random(const ProtocolConfig& cfg, const ExploreBounds& bounds)
{
    auto m = bbprot_machine(cfg);
    ExploreResult res;
    res.config = cfg.summary();
    res.bounds = bounds;
    std::mt19937_64 rng(bounds.seed);
    const unsigned depth = bounds.max_depth ? bounds.max_depth : 40;
    std::unordered_set<std::string> distinct;
    for (std::uint64_t sample = 0; sample < bounds.samples; ++sample) {
        Trace<WorldState> walk = empty_trace(m);
        WorldState w = walk.initial;
        AbstractState a = abstraction(cfg, w);
        Trace<AbstractState> induced{"bbspec", a, {}, {}};
        auto fail = [&](std::string kind, std::string clause, std::string detail) {
            stamp_trace(m, walk);
            res.violation = Finding{std::move(kind), std::move(clause), std::move(detail), walk};
        };
        for (unsigned d = 0; d < depth; ++d) {
            if (auto v = violated_invariants(cfg, w); !v.empty()) {
                fail("invariant", v.front(), "state violates " + v.front());
                return res;
            }
            if (auto v = check_bb_state(cfg, a)) {
                fail("bb", v->clause, v->detail);
                return res;
            }
            auto edges = edges_of(m, w);
            // Internal steps that change nothing only waste walk length.
            std::erase_if(edges, [&](const Edge& e) {
                const auto& ev = m.events[e.event];
                return !ev.output && ev.name != "post" && ev.update(w, e.binding) == w;
            });
            if (edges.empty())
                break;
            // Pick an event, then one of its bindings, so that the many
            // adversary bindings do not starve the honest events. Honest
            // events other than closing a period weigh four times as much.
            std::vector<std::size_t> starts;
            std::vector<unsigned> weight;
            unsigned total = 0;
            for (std::size_t i = 0; i < edges.size(); ++i)
                if (i == 0 || edges[i].event != edges[i - 1].event) {
                    starts.push_back(i);
                    const std::string& name = m.events[edges[i].event].name;
                    weight.push_back(name.starts_with("c_msg") && name != "c_msg4" ? 4 : 1);
                    total += weight.back();
                }
            std::size_t g = 0;
            for (unsigned pick = static_cast<unsigned>(rng() % total); pick >= weight[g]; ++g)
                pick -= weight[g];
            std::size_t end = g + 1 < starts.size() ? starts[g + 1] : edges.size();
            const Edge& e = edges[starts[g] + rng() % (end - starts[g])];
            const auto& ev = m.events[e.event];
            WorldState post = ev.update(w, e.binding);
            AbstractState apost = abstraction(cfg, post);
            Step st{ev.name, e.binding, {}, {}};
            walk.steps.push_back(st);
            ++res.edges;
            MatchVerdict v = match_step(cfg, a, w, st, post, apost);
            if (!v.ok()) {
                fail("simulation", v.clause, v.reason);
                return res;
            }
            if (v.kind == MatchVerdict::Kind::matched) {
                ++res.matched[v.event];
                induced.steps.push_back({v.event, v.binding, {}, {}});
            } else {
                ++res.skipped;
            }
            if (auto b = check_bb_transition(cfg, a, apost)) {
                fail("bb", b->clause, b->detail);
                return res;
            }
            count_publications(cfg, apost, res.max_boards_per_period);
            w = std::move(post);
            a = std::move(apost);
            res.depth = std::max(res.depth, d + 1);
        }
        if (auto v = violated_invariants(cfg, w); !v.empty()) {
            fail("invariant", v.front(), "state violates " + v.front());
            return res;
        }
        // The induced abstract trace must itself be a run of the specification.
        BbReport bb;
        try {
            bb = check_bb_properties(cfg, induced);
        } catch (const ReplayMismatch& e) {
            fail("simulation", "abstract_replay", e.what());
            return res;
        }
        ++res.abstract_traces_checked;
        if (bb.violation) {
            fail("bb", bb.violation->clause, bb.violation->detail);
            return res;
        }
        distinct.insert(encode_world(w));
        ++res.traces;
    }
    res.states = distinct.size();
    return res;
}

}  // namespace

ExploreResult explore(const ProtocolConfig& cfg, const ExploreBounds& bounds)
{
    cfg.validate();
    return bounds.mode == ExploreMode::exhaustive ? explore_exhaustive(cfg, bounds) : explore_random(cfg, bounds);
}

ExploreResult explore_spec(const ProtocolConfig& cfg, const ExploreBounds& bounds)
{
    auto m = bbspec_machine(cfg);
    ExploreResult res;
    res.config = cfg.summary();
    res.bounds = bounds;
    struct Node {
        AbstractState s;
        std::size_t parent;
        Step step;
    };
    std::vector<Node> nodes{{m.init(), 0, {}}};
    std::unordered_set<std::string> seen{m.encode(nodes[0].s)};
    auto trace_to = [&](std::size_t n) {
        Trace<AbstractState> t = empty_trace(m);
        std::vector<Step> rev;
        for (std::size_t cur = n; cur != 0; cur = nodes[cur].parent)
            rev.push_back(nodes[cur].step);
        t.steps.assign(rev.rbegin(), rev.rend());
        return t;
    };
    std::size_t level_begin = 0;
    bool truncated = false;
    for (unsigned depth = 0; level_begin < nodes.size(); ++depth) {
        std::size_t level_end = nodes.size();
        res.depth = depth;
        for (std::size_t i = level_begin; i < level_end; ++i) {
            ++res.states;
            AbstractState s = nodes[i].s;
            auto fail = [&](std::string clause, std::string detail) {
                auto t = trace_to(i);
                res.violation = Finding{"spec", std::move(clause), std::move(detail) + " (trace " +
                                                                         std::to_string(t.steps.size()) + " steps)",
                                        {}};
            };
            if (auto v = check_inv(m, s); !v.empty()) {
                fail(v.front(), "specification invariant");
                return res;
            }
            if (auto v = check_bb_state(cfg, s)) {
                fail(v->clause, v->detail);
                return res;
            }
            count_publications(cfg, s, res.max_boards_per_period);
            for (auto& st : enabled(m, s)) {
                ++res.edges;
                AbstractState post = m.find(st.first)->update(s, st.second);
                if (auto v = check_bb_transition(cfg, s, post)) {
                    fail(v->clause, v->detail);
                    return res;
                }
                if (post == s)
                    continue;
                if (bounds.max_depth && depth + 1 > bounds.max_depth) {
                    truncated = true;
                    continue;
                }
                if (seen.insert(m.encode(post)).second)
                    nodes.push_back({std::move(post), i, {st.first, st.second, {}, {}}});
            }
        }
        level_begin = level_end;
    }
    res.fixpoint = !truncated;
    return res;
}

std::string ExploreResult::text() const
{
    std::string s = "explore " + config + "\n";
    s += bounds.text() + "\n";
    if (bounds.mode == ExploreMode::randomized)
        s += "traces=" + std::to_string(traces) + " steps=" + std::to_string(edges) +
             " distinct_final_states=" + std::to_string(states) +
             " abstract_traces_checked=" + std::to_string(abstract_traces_checked) + "\n";
    else
        s += "states=" + std::to_string(states) + " edges=" + std::to_string(edges) +
             " depth=" + std::to_string(depth) + " fixpoint=" + (fixpoint ? "yes" : "no") + "\n";
    s += "matched:";
    for (const auto& [ev, n] : matched)
        s += " " + ev + "=" + std::to_string(n);
    s += " skip=" + std::to_string(skipped) + "\n";
    s += "max_boards_per_period=" + std::to_string(max_boards_per_period) + "\n";
    if (violation) {
        s += "violation kind=" + violation->kind + " clause=" + violation->clause + ": " + violation->detail + "\n";
        if (!violation->trace.steps.empty() || violation->kind != "spec")
            s += write_trace(violation->trace);
        s += "RESULT=VIOLATION clause=" + violation->clause + " step=" +
             std::to_string(violation->trace.steps.size()) + "\n";
    } else {
        s += "no violation within bounds (" + bounds.text() + ")\n";
        s += "RESULT=OK\n";
    }
    return s;
}

// ----------------------------------------------------------------- attacks

std::string AttackGoal::text() const
{
    switch (kind) {
    case GoalKind::receipt_without_publication:
        return "ReceiptWithoutPublication";
    case GoalKind::clashing_receipts:
        return "ClashingReceipts";
    case GoalKind::publication_mutation:
        return "PublicationMutation";
    case GoalKind::invariant_breach:
        break;
    }
    return "InvariantBreach(" + clause + ")";
}

AttackGoal AttackGoal::parse(std::string_view text)
{
    if (text == "ReceiptWithoutPublication")
        return {GoalKind::receipt_without_publication, {}};
    if (text == "ClashingReceipts")
        return {GoalKind::clashing_receipts, {}};
    if (text == "PublicationMutation")
        return {GoalKind::publication_mutation, {}};
    constexpr std::string_view ib = "InvariantBreach(";
    if (text.starts_with(ib) && text.ends_with(")") && text.size() > ib.size() + 1)
        return {GoalKind::invariant_breach, std::string(text.substr(ib.size(), text.size() - ib.size() - 1))};
    throw std::invalid_argument("unknown attack goal '" + std::string(text) + "'");
}

bool goal_holds(const ProtocolConfig& cfg, const AttackGoal& goal, const WorldState& w)
{
    std::vector<ItemAt> receipts;
    std::vector<BoardAt> boards;
    for (Message m : w.e.basis()) {
        if (auto r = as_receipt(m))
            receipts.push_back(*r);
        else if (auto b = as_publish(cfg, m))
            boards.push_back(*b);
    }
    switch (goal.kind) {
    case GoalKind::receipt_without_publication:
        for (const auto& r : receipts)
            for (const auto& b : boards)
                if (r.p == b.p && !board_items(b.board).contains(r.x))
                    return true;
        return false;
    case GoalKind::clashing_receipts:
        for (const auto& a : receipts)
            for (const auto& b : receipts)
                if (cfg.clash.clashes(a.x.item_id(), b.x.item_id()))
                    return true;
        return false;
    case GoalKind::publication_mutation:
        for (std::size_t i = 0; i < boards.size(); ++i)
            for (std::size_t j = i + 1; j < boards.size(); ++j)
                if (boards[i].p == boards[j].p)
                    return true;
        return false;
    case GoalKind::invariant_breach: {
        auto v = violated_invariants(cfg, w);
        return std::find(v.begin(), v.end(), goal.clause) != v.end();
    }
    }
    return false;
}

AttackResult find_attack(const ProtocolConfig& cfg, const AttackGoal& goal, const ExploreBounds& bounds)
{
    cfg.validate();
    auto m = bbprot_machine(cfg);
    AttackResult res;
    res.config = cfg.summary();
    res.goal = goal;
    res.bounds = bounds;
    res.bounds.mode = ExploreMode::exhaustive;
    std::vector<Meta> meta;
    std::optional<std::uint32_t> hit;
    if (goal_holds(cfg, goal, m.init()))
        hit = 0;
    if (!hit)
        res.fixpoint = bfs(
            cfg, m, res.bounds, meta, res.depth,
            [&](std::uint32_t, const WorldState&, unsigned) {
                ++res.states;
                return true;
            },
            [&](std::uint32_t, const WorldState&, const Edge&, const WorldState& post, bool fresh, std::uint32_t id) {
                if (fresh && goal_holds(cfg, goal, post)) {
                    hit = id;
                    return false;
                }
                return true;
            });
    if (hit) {
        res.fixpoint = false;
        res.trace = rebuild(m, meta.empty() ? std::vector<Meta>{{no_parent, 0, 0}} : meta, *hit);
        res.depth = static_cast<unsigned>(res.trace->steps.size());
    }
    return res;
}

std::string AttackResult::text() const
{
    std::string s = "attack " + config + "\n";
    s += "goal=" + goal.text() + " " + bounds.text() + "\n";
    s += "states=" + std::to_string(states) + " depth=" + std::to_string(depth) + "\n";
    if (trace) {
        s += "found trace of " + std::to_string(trace->steps.size()) + " steps\n";
        s += write_trace(*trace);
        s += "RESULT=FOUND goal=" + goal.text() + " depth=" + std::to_string(trace->steps.size()) + "\n";
    } else {
        s += std::string("no trace within bounds (") + bounds.text() + (fixpoint ? ", fixpoint reached" : "") +
             ")\n";
        s += "RESULT=NOT_FOUND goal=" + goal.text() + "\n";
    }
    return s;
}

}  // namespace wbb
