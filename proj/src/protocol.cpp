#include "wbb/protocol.hpp"

#include "wbb/peer_set.hpp"
#include "wbb/shapes.hpp"

#include <algorithm>
#include <map>

namespace wbb {

// ----------------------------------------------------------------- knowledge

void Knowledge::absorb(Message m)
{
    switch (m.kind()) {
    case MessageKind::item:
    case MessageKind::key:
        basis_.insert(m);
        break;
    case MessageKind::sig:
        if (basis_.insert(m))
            absorb(m.body());
        break;
    case MessageKind::pair:
        absorb(m.body());
        break;
    case MessageKind::set:
        for (Message e : m.elements())
            absorb(e);
        break;
    case MessageKind::hash:
        if (!knows(m.body()))
            basis_.insert(m);
        break;
    }
}

void Knowledge::drop_transparent_hashes()
{
    std::vector<Message> drop;
    for (Message m : basis_)
        if (m.is_hash() && knows(m.body()))
            drop.push_back(m);
    for (Message m : drop)
        basis_.erase(m);
}

void Knowledge::learn(Message m)
{
    absorb(m);
    drop_transparent_hashes();
}

bool Knowledge::knows(Message m) const
{
    switch (m.kind()) {
    case MessageKind::item:
    case MessageKind::key:
    case MessageKind::sig:
        return basis_.contains(m);
    case MessageKind::hash:
        return basis_.contains(m) || knows(m.body());
    case MessageKind::pair:
        return knows(m.body());
    case MessageKind::set:
        return std::all_of(m.elements().begin(), m.elements().end(), [&](Message e) { return knows(e); });
    }
    return false;
}

std::vector<Message> Knowledge::known_items() const
{
    std::vector<Message> out;
    for (Message m : basis_)
        if (m.is_item())
            out.push_back(m);
    std::sort(out.begin(), out.end());
    return out;
}

// --------------------------------------------------------------------- state

WorldState initial_world(const ProtocolConfig& cfg)
{
    WorldState w;
    unsigned t = cfg.threshold();
    PeerState blank;
    blank.I.resize(cfg.max_periods);
    blank.D.resize(cfg.max_periods);
    blank.H.resize(cfg.max_periods);
    w.peers.assign(t, blank);
    // E := { sk_k | k > t } u { ssk_k | k > t }
    for (unsigned k = t + 1; k <= cfg.n; ++k) {
        w.e.learn(Message::key(KeyId::sk(k)));
        w.e.learn(Message::key(KeyId::share(k)));
    }
    return w;
}

std::string encode_world(const WorldState& w)
{
    std::string s = "E=" + w.e.basis().text();
    for (std::size_t j = 0; j < w.peers.size(); ++j) {
        const PeerState& ps = w.peers[j];
        s += " | peer" + std::to_string(j + 1) + " p=" + std::to_string(ps.p_ctr) + " c=" + std::to_string(ps.c_ctr);
        for (std::size_t p = 0; p < ps.I.size(); ++p) {
            std::string ix = std::to_string(p);
            s += " I" + ix + "=" + ps.I[p].text() + " D" + ix + "=" + ps.D[p].text();
            if (!ps.H[p].empty())
                s += " H" + ix + "=" + ps.H[p].text();
        }
    }
    return s;
}

IdSet threshold_items(const IdSet& d, unsigned threshold)
{
    std::vector<std::pair<Message, PeerSet>> counts;
    for (Message m : d) {
        unsigned k = 0;
        auto it = as_item_sig(m, &k);
        if (!it)
            continue;
        auto pos = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == it->x; });
        if (pos == counts.end()) {
            counts.push_back({it->x, {}});
            pos = counts.end() - 1;
        }
        if (k >= 1 && k <= max_peers)
            pos->second.insert(k);
    }
    IdSet out;
    for (const auto& [x, ks] : counts)
        if (ks.size() >= threshold)
            out.insert(x);
    return out;
}

Message current_board(const ProtocolConfig& cfg, const WorldState& w, unsigned j, unsigned p)
{
    return board(threshold_items(w.peer(j).D[p], cfg.threshold()).elements());
}

namespace {

std::vector<Message> known_boards(const Knowledge& e)
{
    return all_boards(e.known_items());
}

std::vector<Message> dishonest_keys(const Knowledge& e, KeyKind kind)
{
    std::vector<Message> out;
    for (Message m : e.basis())
        if (m.is_key() && m.key_id().kind == kind)
            out.push_back(m);
    return out;
}

}  // namespace

std::vector<Message> adversary_synthesizable(const ProtocolConfig& cfg, const WorldState& w, TermShape shape)
{
    std::vector<Message> out;
    const Knowledge& e = w.e;
    auto items = e.known_items();
    switch (shape) {
    case TermShape::item_signature:
        for (Message s : dishonest_keys(e, KeyKind::sk))
            for (unsigned p = 0; p < cfg.max_periods; ++p)
                for (Message x : items)
                    out.push_back(Message::sig(s.key_id(), Message::pair(p, x)));
        break;
    case TermShape::receipt_share:
        for (Message s : dishonest_keys(e, KeyKind::ssk_share))
            for (unsigned p = 0; p < cfg.max_periods; ++p)
                for (Message x : items)
                    out.push_back(Message::sig(s.key_id(), Message::pair(p, x)));
        break;
    case TermShape::board_share: {
        auto boards = known_boards(e);
        for (Message s : dishonest_keys(e, KeyKind::ssk_share))
            for (unsigned p = 0; p < cfg.max_periods; ++p)
                for (Message b : boards)
                    out.push_back(Message::sig(s.key_id(), board_body(cfg, p, b)));
        break;
    }
    case TermShape::signed_hash: {
        if (!cfg.hashed_publication)
            break;
        auto boards = known_boards(e);
        for (Message s : dishonest_keys(e, KeyKind::sk))
            for (unsigned p = 0; p < cfg.max_periods; ++p)
                for (Message b : boards)
                    out.push_back(Message::sig(s.key_id(), Message::pair(p, Message::hash(b))));
        break;
    }
    case TermShape::combined: {
        std::vector<std::pair<Message, PeerSet>> shares;
        for (Message m : e.basis()) {
            if (!m.is_sig() || m.signer().kind != KeyKind::ssk_share)
                continue;
            auto pos = std::find_if(shares.begin(), shares.end(), [&](const auto& s) { return s.first == m.body(); });
            if (pos == shares.end()) {
                shares.push_back({m.body(), {}});
                pos = shares.end() - 1;
            }
            pos->second.insert(m.signer().peer);
        }
        for (const auto& [body, ks] : shares)
            if (ks.size() >= cfg.threshold())
                out.push_back(Message::sig(KeyId::combined(), body));
        break;
    }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------- invariants

namespace {

struct Census {
    struct Share {
        unsigned k;
        unsigned p;
        Message body;  // item for receipt shares, board set for board shares
    };
    std::vector<Share> receipt_shares;
    std::vector<Share> board_shares;
    std::vector<ItemAt> receipts;
    std::vector<BoardAt> publishes;
    std::vector<Share> item_sigs;

    PeerSet c(unsigned p, Message x) const { return signers(receipt_shares, p, x); }
    PeerSet s(unsigned p, Message b) const { return signers(board_shares, p, b); }

    static PeerSet signers(const std::vector<Share>& v, unsigned p, Message body)
    {
        PeerSet out;
        for (const auto& sh : v)
            if (sh.p == p && sh.body == body && sh.k >= 1 && sh.k <= max_peers)
                out.insert(sh.k);
        return out;
    }
};

Census take_census(const ProtocolConfig& cfg, const WorldState& w)
{
    Census c;
    for (Message m : w.e.basis()) {
        unsigned k = 0;
        if (auto r = as_receipt_share(m, &k))
            c.receipt_shares.push_back({k, r->p, r->x});
        else if (auto b = as_board_share(cfg, m, &k))
            c.board_shares.push_back({k, b->p, b->board});
        else if (auto rr = as_receipt(m))
            c.receipts.push_back(*rr);
        else if (auto pb = as_publish(cfg, m))
            c.publishes.push_back(*pb);
        else if (auto is = as_item_sig(m, &k))
            c.item_sigs.push_back({k, is->p, is->x});
    }
    return c;
}

PeerSet d_signers(const IdSet& d, Message x)
{
    PeerSet out;
    for (Message m : d) {
        unsigned k = 0;
        if (auto s = as_item_sig(m, &k); s && s->x == x && k >= 1 && k <= max_peers)
            out.insert(k);
    }
    return out;
}

using Clause = bool (*)(const ProtocolConfig&, const WorldState&, const Census&);

bool clause_types(const ProtocolConfig& cfg, const WorldState& w, const Census&)
{
    if (w.peers.size() != cfg.threshold())
        return false;
    for (const PeerState& ps : w.peers) {
        if (ps.c_ctr > ps.p_ctr || ps.p_ctr > cfg.max_periods)
            return false;
        if (ps.I.size() != cfg.max_periods || ps.D.size() != cfg.max_periods || ps.H.size() != cfg.max_periods)
            return false;
        for (unsigned p = 0; p < cfg.max_periods; ++p) {
            for (Message x : ps.I[p])
                if (!x.is_item() || !cfg.has_item(x.item_id()))
                    return false;
            for (Message m : ps.D[p]) {
                unsigned k = 0;
                auto s = as_item_sig(m, &k);
                if (!s || s->p != p || k < 1 || k > cfg.n)
                    return false;
            }
            for (Message m : ps.H[p]) {
                unsigned k = 0;
                auto s = as_signed_hash(m, &k);
                if (!s || s->p != p || k < 1 || k > cfg.n)
                    return false;
            }
        }
    }
    return true;
}

// k <= t and k in c[p,x] and k in s[p,B] => x in B
bool clause_inv4(const ProtocolConfig& cfg, const WorldState&, const Census& c)
{
    for (const auto& rs : c.receipt_shares) {
        if (rs.k > cfg.threshold())
            continue;
        for (const auto& bs : c.board_shares)
            if (bs.k == rs.k && bs.p == rs.p && !board_items(bs.body).contains(rs.body))
                return false;
    }
    return true;
}

// sig_{ssk_j}(p,x) in E => #d_j[p,x] >= t
bool clause_invdj1(const ProtocolConfig& cfg, const WorldState& w, const Census& c)
{
    for (const auto& rs : c.receipt_shares) {
        if (rs.k > cfg.threshold() || rs.p >= cfg.max_periods)
            continue;
        if (d_signers(w.peer(rs.k).D[rs.p], rs.body).size() < cfg.threshold())
            return false;
    }
    return true;
}

// sig_SSK(p,x) in E => #c[p,x] >= t
bool clause_inv4a(const ProtocolConfig& cfg, const WorldState&, const Census& c)
{
    for (const auto& r : c.receipts)
        if (c.c(r.p, r.x).size() < cfg.threshold())
            return false;
    return true;
}

// sig_{ssk_j}(p,B) in E => B <= t(D_{j,p})   (hashed boards in variant 4)
bool clause_invdj0(const ProtocolConfig& cfg, const WorldState& w, const Census& c)
{
    for (const auto& bs : c.board_shares) {
        if (bs.k > cfg.threshold())
            continue;
        if (bs.p >= cfg.max_periods)
            return false;
        if (!board_items(bs.body).subset_of(threshold_items(w.peer(bs.k).D[bs.p], cfg.threshold())))
            return false;
    }
    return true;
}

// sig_SSK(p,B) in E => #s[p,B] >= t
bool clause_inv4b(const ProtocolConfig& cfg, const WorldState&, const Census& c)
{
    for (const auto& pb : c.publishes)
        if (c.s(pb.p, pb.board).size() < cfg.threshold())
            return false;
    return true;
}

// D_{j,p} <= E
bool clause_invdj2(const ProtocolConfig&, const WorldState& w, const Census&)
{
    for (const PeerState& ps : w.peers)
        for (const IdSet& d : ps.D)
            for (Message m : d)
                if (!w.e.knows(m))
                    return false;
    return true;
}

// k <= t and k in s[p,B] => c_k > p
bool clause_com1(const ProtocolConfig& cfg, const WorldState& w, const Census& c)
{
    for (const auto& bs : c.board_shares)
        if (bs.k <= cfg.threshold() && !(w.peer(bs.k).c_ctr > bs.p))
            return false;
    return true;
}

// k <= t and k in s[p,B1] and B1 != B2 => k not in s[p,B2]
bool clause_com2(const ProtocolConfig& cfg, const WorldState&, const Census& c)
{
    for (std::size_t a = 0; a < c.board_shares.size(); ++a)
        for (std::size_t b = a + 1; b < c.board_shares.size(); ++b) {
            const auto& x = c.board_shares[a];
            const auto& y = c.board_shares[b];
            if (x.k <= cfg.threshold() && x.k == y.k && x.p == y.p && x.body != y.body)
                return false;
        }
    return true;
}

// sig_{sk_j}(p,x) in E <=> sig_{sk_j}(p,x) in D_{j,p}
bool clause_invclash1(const ProtocolConfig& cfg, const WorldState& w, const Census& c)
{
    for (const auto& is : c.item_sigs)
        if (is.k <= cfg.threshold() &&
            (is.p >= cfg.max_periods || !w.peer(is.k).D[is.p].contains(item_sig(is.k, is.p, is.body))))
            return false;
    for (unsigned j = 1; j <= cfg.threshold(); ++j)
        for (unsigned p = 0; p < cfg.max_periods; ++p)
            for (Message m : w.peer(j).D[p]) {
                unsigned k = 0;
                if (as_item_sig(m, &k) && k == j && !w.e.knows(m))
                    return false;
            }
    return true;
}

// clash(x,x') and sig_{sk_j}(p,x) in D_{j,p} => sig_{sk_j}(p',x') not in U_p D_{j,p}
bool clause_invclash2(const ProtocolConfig& cfg, const WorldState& w, const Census&)
{
    for (unsigned j = 1; j <= cfg.threshold(); ++j) {
        std::vector<std::string> own;
        for (const IdSet& d : w.peer(j).D)
            for (Message m : d) {
                unsigned k = 0;
                if (auto s = as_item_sig(m, &k); s && k == j)
                    own.push_back(s->x.item_id());
            }
        for (std::size_t a = 0; a < own.size(); ++a)
            for (std::size_t b = 0; b < own.size(); ++b)
                if (cfg.clash.clashes(own[a], own[b]))
                    return false;
    }
    return true;
}

// No honest key in E.
bool clause_dy0(const ProtocolConfig& cfg, const WorldState& w, const Census&)
{
    for (Message m : w.e.basis())
        if (m.is_key() && m.key_id().kind != KeyKind::ssk && m.key_id().peer <= cfg.threshold())
            return false;
    return true;
}

// U items(e) <= E
bool clause_dy1(const ProtocolConfig&, const WorldState& w, const Census&)
{
    for (Message m : w.e.basis())
        for (const auto& x : m.items())
            if (!w.e.knows(Message::item(x)))
                return false;
    return true;
}

// U sigs(e) <= E
bool clause_dy2(const ProtocolConfig&, const WorldState& w, const Census&)
{
    for (Message m : w.e.basis())
        for (Message s : m.sigs())
            if (!w.e.knows(s))
                return false;
    return true;
}

struct NamedClause {
    const char* name;
    Clause fn;
    bool clash_only;
};

constexpr NamedClause clauses[] = {
    {"types", clause_types, false},   {"inv4", clause_inv4, false},
    {"invdj1", clause_invdj1, false}, {"inv4a", clause_inv4a, false},
    {"invdj0", clause_invdj0, false}, {"inv4b", clause_inv4b, false},
    {"invdj2", clause_invdj2, false}, {"com1", clause_com1, false},
    {"com2", clause_com2, false},     {"invclash1", clause_invclash1, false},
    {"invclash2", clause_invclash2, true}, {"dy0", clause_dy0, false},
    {"dy1", clause_dy1, false},       {"dy2", clause_dy2, false},
};

}  // namespace

std::vector<std::string> protocol_invariant_names(const ProtocolConfig& cfg)
{
    std::vector<std::string> out;
    for (const auto& c : clauses)
        if (!c.clash_only || cfg.enable_clash_guard)
            out.push_back(c.name);
    return out;
}

std::vector<std::string> violated_invariants(const ProtocolConfig& cfg, const WorldState& w)
{
    Census census = take_census(cfg, w);
    std::vector<std::string> out;
    for (const auto& c : clauses)
        if ((!c.clash_only || cfg.enable_clash_guard) && !c.fn(cfg, w, census))
            out.push_back(c.name);
    return out;
}

// -------------------------------------------------------------------- events

namespace {

using Ev = EventDef<WorldState>;

std::vector<unsigned> honest(const ProtocolConfig& cfg)
{
    std::vector<unsigned> js;
    for (unsigned j = 1; j <= cfg.threshold(); ++j)
        js.push_back(j);
    return js;
}

bool valid_peer(const ProtocolConfig& cfg, unsigned j) { return j >= 1 && j <= cfg.threshold(); }

/// Items y with sig(sk_j, pair(p, y)) in some D_{j,p}.
std::vector<std::string> own_signed(const WorldState& w, unsigned j)
{
    std::vector<std::string> out;
    for (const IdSet& d : w.peer(j).D)
        for (Message m : d) {
            unsigned k = 0;
            if (auto s = as_item_sig(m, &k); s && k == j)
                out.push_back(s->x.item_id());
        }
    return out;
}

}  // namespace

MachineDef<WorldState> bbprot_machine(const ProtocolConfig& cfg)
{
    cfg.validate();
    const unsigned t = cfg.threshold();
    const std::vector<Message> universe = cfg.item_messages();

    MachineDef<WorldState> m;
    m.name = "bbprot";
    m.init = [cfg] { return initial_world(cfg); };
    m.encode = encode_world;
    m.amend_initial = [](const WorldState& w, std::string_view directive) {
        constexpr std::string_view learn = "learn ";
        if (!directive.starts_with(learn))
            throw ParseError("unknown trace directive '" + std::string(directive) + "'", 0, 0);
        WorldState n = w;
        n.e.learn(parse_message(directive.substr(learn.size())));
        return n;
    };

    for (const auto& c : clauses) {
        if (c.clash_only && !cfg.enable_clash_guard)
            continue;
        Clause fn = c.fn;
        m.invariants.push_back({c.name, [cfg, fn](const WorldState& w) { return fn(cfg, w, take_census(cfg, w)); }});
    }

    // ---- external events
    m.events.push_back(Ev{"post",
                          [universe](const WorldState&) {
                              std::vector<Binding> out;
                              for (Message x : universe)
                                  out.push_back({{"x", x}});
                              return out;
                          },
                          [](const WorldState&, const Binding& b) { return b.msg("x").is_item(); },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(b.msg("x"));
                              return n;
                          }});

    m.events.push_back(Ev{"ack",
                          [](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : w.e.basis())
                                  if (as_receipt(e))
                                      out.push_back({{"r", e}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) {
                              return as_receipt(b.msg("r")).has_value() && w.e.knows(b.msg("r"));
                          },
                          [](const WorldState& w, const Binding&) { return w; }, true});

    if (cfg.hashed_publication) {
        m.events.push_back(Ev{"publish",
                              [cfg](const WorldState& w) {
                                  std::vector<Binding> out;
                                  for (Message e : w.e.basis())
                                      if (auto pb = as_publish(cfg, e))
                                          out.push_back({{"Y", pb->board}, {"p", pb->p}});
                                  return out;
                              },
                              [cfg](const WorldState& w, const Binding& b) {
                                  Message y = b.msg("Y");
                                  return is_item_set(y) && w.e.knows(y) &&
                                         w.e.knows(publish_term(cfg, b.nat("p"), y));
                              },
                              [](const WorldState& w, const Binding&) { return w; }, true});
    } else {
        m.events.push_back(Ev{"publish",
                              [cfg](const WorldState& w) {
                                  std::vector<Binding> out;
                                  for (Message e : w.e.basis())
                                      if (as_publish(cfg, e))
                                          out.push_back({{"P", e}});
                                  return out;
                              },
                              [cfg](const WorldState& w, const Binding& b) {
                                  return as_publish(cfg, b.msg("P")).has_value() && w.e.knows(b.msg("P"));
                              },
                              [](const WorldState& w, const Binding&) { return w; }, true});
    }

    // ---- posting and acknowledgement

    // c_msg1_j(x): x in E n ITEM; I_{j,p_j} += x
    m.events.push_back(Ev{"c_msg1",
                          [cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              for (unsigned j : honest(cfg))
                                  for (Message x : w.e.known_items())
                                      out.push_back({{"j", j}, {"x", x}});
                              return out;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              Message x = b.msg("x");
                              return valid_peer(cfg, j) && x.is_item() && w.e.knows(x) &&
                                     w.peer(j).p_ctr < cfg.max_periods;
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              PeerState& ps = n.peer(b.nat("j"));
                              ps.I[ps.p_ctr].insert(b.msg("x"));
                              return n;
                          }});

    // c_msg2a_j(x): x in I_{j,p_j} [and no clash with j's own signatures];
    // E += sig_{sk_j}(p_j,x), D_{j,p_j} += sig_{sk_j}(p_j,x)
    m.events.push_back(Ev{"c_msg2a",
                          [cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              for (unsigned j : honest(cfg)) {
                                  const PeerState& ps = w.peer(j);
                                  if (ps.p_ctr >= cfg.max_periods)
                                      continue;
                                  for (Message x : ps.I[ps.p_ctr])
                                      out.push_back({{"j", j}, {"x", x}});
                              }
                              return out;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              if (!valid_peer(cfg, j))
                                  return false;
                              const PeerState& ps = w.peer(j);
                              Message x = b.msg("x");
                              if (ps.p_ctr >= cfg.max_periods || !ps.I[ps.p_ctr].contains(x))
                                  return false;
                              if (cfg.enable_clash_guard)
                                  for (const auto& y : own_signed(w, j))
                                      if (cfg.clash.clashes(x.item_id(), y))
                                          return false;
                              return true;
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              unsigned j = b.nat("j");
                              PeerState& ps = n.peer(j);
                              Message s = item_sig(j, ps.p_ctr, b.msg("x"));
                              ps.D[ps.p_ctr].insert(s);
                              n.e.learn(s);
                              return n;
                          }});

    // c_msg2b_j(k, x): sig_{sk_k}(p_j,x) in E; D_{j,p_j} += it. Absent without round 2.
    m.events.push_back(Ev{"c_msg2b",
                          [cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              if (!cfg.enable_round2)
                                  return out;
                              for (Message e : w.e.basis()) {
                                  unsigned k = 0;
                                  auto s = as_item_sig(e, &k);
                                  if (!s)
                                      continue;
                                  for (unsigned j : honest(cfg))
                                      if (w.peer(j).p_ctr == s->p)
                                          out.push_back({{"j", j}, {"k", k}, {"x", s->x}});
                              }
                              return out;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              unsigned k = b.nat("k");
                              if (!cfg.enable_round2 || !valid_peer(cfg, j) || k < 1 || k > cfg.n)
                                  return false;
                              const PeerState& ps = w.peer(j);
                              return ps.p_ctr < cfg.max_periods && w.e.knows(item_sig(k, ps.p_ctr, b.msg("x")));
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              PeerState& ps = n.peer(b.nat("j"));
                              ps.D[ps.p_ctr].insert(item_sig(b.nat("k"), ps.p_ctr, b.msg("x")));
                              return n;
                          }});

    // c_msg3_j(x): x in t(D_{j,p_j}) (x in I_{j,p_j} without round 2); E += sig_{ssk_j}(p_j,x)
    m.events.push_back(Ev{"c_msg3",
                          [cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              for (unsigned j : honest(cfg)) {
                                  const PeerState& ps = w.peer(j);
                                  if (ps.p_ctr >= cfg.max_periods)
                                      continue;
                                  IdSet cand = cfg.enable_round2 ? threshold_items(ps.D[ps.p_ctr], cfg.threshold())
                                                                 : ps.I[ps.p_ctr];
                                  for (Message x : cand)
                                      out.push_back({{"j", j}, {"x", x}});
                              }
                              return out;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              if (!valid_peer(cfg, j))
                                  return false;
                              const PeerState& ps = w.peer(j);
                              if (ps.p_ctr >= cfg.max_periods)
                                  return false;
                              Message x = b.msg("x");
                              if (!cfg.enable_round2)
                                  return ps.I[ps.p_ctr].contains(x);
                              return threshold_items(ps.D[ps.p_ctr], cfg.threshold()).contains(x);
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              unsigned j = b.nat("j");
                              n.e.learn(receipt_share(j, n.peer(j).p_ctr, b.msg("x")));
                              return n;
                          }});

    // ---- commit and publish

    // c_msg4_j: p_j := p_j + 1 (bounded by max_periods)
    m.events.push_back(Ev{"c_msg4",
                          [cfg](const WorldState&) {
                              std::vector<Binding> out;
                              for (unsigned j : honest(cfg))
                                  out.push_back({{"j", j}});
                              return out;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              return valid_peer(cfg, j) && w.peer(j).p_ctr < cfg.max_periods;
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.peer(b.nat("j")).p_ctr += 1;
                              return n;
                          }});

    auto closed_periods = [cfg](const WorldState& w) {
        std::vector<Binding> out;
        for (unsigned j : honest(cfg))
            for (unsigned p = 0; p < w.peer(j).p_ctr; ++p)
                out.push_back({{"j", j}, {"p", p}});
        return out;
    };
    auto closed_guard = [cfg](const WorldState& w, const Binding& b) {
        unsigned j = b.nat("j");
        return valid_peer(cfg, j) && b.nat("p") < w.peer(j).p_ctr;
    };

    // c_msg5a_j(p): p < p_j; E += D_{j,p}
    m.events.push_back(Ev{"c_msg5a", closed_periods, closed_guard, [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(Message::set(n.peer(b.nat("j")).D[b.nat("p")].elements()));
                              return n;
                          }});

    // c_msg5b_j(p, D): D in E, D <= SIG1_p, p < p_j; D_{j,p} := D_{j,p} u D.
    // D ranges over singletons and the largest such set (see README).
    m.events.push_back(Ev{"c_msg5b",
                          [cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              for (unsigned p = 0; p < cfg.max_periods; ++p) {
                                  std::vector<Message> sig1;
                                  for (Message e : w.e.basis())
                                      if (auto s = as_item_sig(e); s && s->p == p)
                                          sig1.push_back(e);
                                  if (sig1.empty())
                                      continue;
                                  std::vector<Message> ds;
                                  for (Message s : sig1)
                                      ds.push_back(Message::set({s}));
                                  if (sig1.size() > 1)
                                      ds.push_back(Message::set(sig1));
                                  for (unsigned j : honest(cfg))
                                      if (p < w.peer(j).p_ctr)
                                          for (Message d : ds)
                                              out.push_back({{"j", j}, {"p", p}, {"D", d}});
                              }
                              return out;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              unsigned p = b.nat("p");
                              Message d = b.msg("D");
                              if (!valid_peer(cfg, j) || p >= w.peer(j).p_ctr || !d.is_set() || !w.e.knows(d))
                                  return false;
                              for (Message s : d.elements()) {
                                  auto is = as_item_sig(s);
                                  if (!is || is->p != p)
                                      return false;
                              }
                              return true;
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              IdSet& dst = n.peer(b.nat("j")).D[b.nat("p")];
                              for (Message s : b.msg("D").elements())
                                  dst.insert(s);
                              return n;
                          }});

    // c_msg6_j: c_j < p_j [and >= t matching signed hashes in H_{j,c_j}];
    // E += sig_{ssk_j}(c_j, t(D_{j,c_j})) (or its hash); c_j := c_j + 1
    m.events.push_back(Ev{"c_msg6",
                          [cfg](const WorldState&) {
                              std::vector<Binding> out;
                              for (unsigned j : honest(cfg))
                                  out.push_back({{"j", j}});
                              return out;
                          },
                          [cfg, t](const WorldState& w, const Binding& b) {
                              unsigned j = b.nat("j");
                              if (!valid_peer(cfg, j))
                                  return false;
                              const PeerState& ps = w.peer(j);
                              if (!(ps.c_ctr < ps.p_ctr))
                                  return false;
                              if (!cfg.hashed_publication)
                                  return true;
                              Message h = Message::hash(current_board(cfg, w, j, ps.c_ctr));
                              PeerSet agree;
                              for (Message s : ps.H[ps.c_ctr]) {
                                  unsigned k = 0;
                                  if (as_signed_hash(s, &k) && s.body().body() == h)
                                      agree.insert(k);
                              }
                              return agree.size() >= t;
                          },
                          [cfg](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              unsigned j = b.nat("j");
                              PeerState& ps = n.peer(j);
                              Message bd = current_board(cfg, w, j, ps.c_ctr);
                              n.e.learn(Message::sig(KeyId::share(j), board_body(cfg, ps.c_ctr, bd)));
                              ps.c_ctr += 1;
                              return n;
                          }});

    if (cfg.hashed_publication) {
        // c_msg7_j(p): p < p_j; E += t(D_{j,p})
        m.events.push_back(Ev{"c_msg7", closed_periods, closed_guard, [cfg](const WorldState& w, const Binding& b) {
                                  WorldState n = w;
                                  n.e.learn(current_board(cfg, w, b.nat("j"), b.nat("p")));
                                  return n;
                              }});

        // c_msg8a_j(p): p < p_j; E += sig_{sk_j}(p, h(t(D_{j,p})))
        m.events.push_back(Ev{"c_msg8a", closed_periods, closed_guard, [cfg](const WorldState& w, const Binding& b) {
                                  WorldState n = w;
                                  unsigned j = b.nat("j");
                                  unsigned p = b.nat("p");
                                  Message h = Message::hash(current_board(cfg, w, j, p));
                                  n.e.learn(Message::sig(KeyId::sk(j), Message::pair(p, h)));
                                  return n;
                              }});

        // c_msg8b_j(p, m): p < p_j, m = sig_{sk_k}(p, h(B)) in E; H_{j,p} += m
        m.events.push_back(Ev{"c_msg8b",
                              [cfg](const WorldState& w) {
                                  std::vector<Binding> out;
                                  for (Message e : w.e.basis()) {
                                      auto sh = as_signed_hash(e);
                                      if (!sh)
                                          continue;
                                      for (unsigned j : honest(cfg))
                                          if (sh->p < w.peer(j).p_ctr)
                                              out.push_back({{"j", j}, {"p", sh->p}, {"m", e}});
                                  }
                                  return out;
                              },
                              [cfg](const WorldState& w, const Binding& b) {
                                  unsigned j = b.nat("j");
                                  unsigned p = b.nat("p");
                                  Message s = b.msg("m");
                                  unsigned k = 0;
                                  auto sh = as_signed_hash(s, &k);
                                  return valid_peer(cfg, j) && p < w.peer(j).p_ctr && sh && sh->p == p && k >= 1 &&
                                         k <= cfg.n && w.e.knows(s);
                              },
                              [](const WorldState& w, const Binding& b) {
                                  WorldState n = w;
                                  n.peer(b.nat("j")).H[b.nat("p")].insert(b.msg("m"));
                                  return n;
                              }});
    }

    // ---- Dolev-Yao adversary

    // c_dy1(s, m): s in E, m in E; E += sig_s(m). Bodies limited to relevant shapes.
    m.events.push_back(Ev{"c_dy1",
                          [cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              for (TermShape sh : {TermShape::item_signature, TermShape::receipt_share,
                                                   TermShape::board_share, TermShape::signed_hash})
                                  for (Message s : adversary_synthesizable(cfg, w, sh))
                                      out.push_back({{"s", Message::key(s.signer())}, {"m", s.body()}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) {
                              Message s = b.msg("s");
                              return s.is_key() && w.e.knows(s) && w.e.knows(b.msg("m"));
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(Message::sig(b.msg("s").key_id(), b.msg("m")));
                              return n;
                          }});

    // c_dy2(m): #S >= t and { sig_{ssk_k}(m) | k in S } <= E; E += sig_SSK(m)
    m.events.push_back(Ev{"c_dy2",
                          [](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : w.e.basis())
                                  if (e.is_sig() && e.signer().kind == KeyKind::ssk_share)
                                      out.push_back({{"m", e.body()}});
                              return out;
                          },
                          [t, cfg](const WorldState& w, const Binding& b) {
                              Message body = b.msg("m");
                              PeerSet s;
                              for (unsigned k = 1; k <= cfg.n; ++k)
                                  if (w.e.knows(Message::sig(KeyId::share(k), body)))
                                      s.insert(k);
                              return s.size() >= t;
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(Message::sig(KeyId::combined(), b.msg("m")));
                              return n;
                          }});

    // The remaining rules only rebuild or take apart terms; with E kept closed
    // under them they never change the state.
    auto atoms = [](const WorldState& w) { return w.e.basis().elements(); };

    // c_dy3(m, s): sig_s(m) in E; E += m
    m.events.push_back(Ev{"c_dy3",
                          [atoms](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : atoms(w))
                                  if (e.is_sig())
                                      out.push_back({{"m", e.body()}, {"s", Message::key(e.signer())}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) {
                              return w.e.knows(Message::sig(b.msg("s").key_id(), b.msg("m")));
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(b.msg("m"));
                              return n;
                          },
                          false, true});

    // c_dy4(m, B): m in E, B in E; E += B u {m}
    m.events.push_back(Ev{"c_dy4",
                          [atoms](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : atoms(w))
                                  out.push_back({{"m", e}, {"B", Message::set({})}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) {
                              return b.msg("B").is_set() && w.e.knows(b.msg("m")) && w.e.knows(b.msg("B"));
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              std::vector<Message> el(b.msg("B").elements().begin(), b.msg("B").elements().end());
                              el.push_back(b.msg("m"));
                              n.e.learn(Message::set(std::move(el)));
                              return n;
                          },
                          false, true});

    // c_dy5(B, m): B in E, m in B; E += m
    m.events.push_back(Ev{"c_dy5",
                          [atoms](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : atoms(w))
                                  out.push_back({{"B", Message::set({e})}, {"m", e}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) {
                              Message set = b.msg("B");
                              if (!set.is_set() || !w.e.knows(set))
                                  return false;
                              auto el = set.elements();
                              return std::find(el.begin(), el.end(), b.msg("m")) != el.end();
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(b.msg("m"));
                              return n;
                          },
                          false, true});

    // c_dy6(m, p): m in E; E += (p, m)
    m.events.push_back(Ev{"c_dy6",
                          [atoms, cfg](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : atoms(w))
                                  for (unsigned p = 0; p < cfg.max_periods; ++p)
                                      out.push_back({{"m", e}, {"p", p}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) { return w.e.knows(b.msg("m")); },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(Message::pair(b.nat("p"), b.msg("m")));
                              return n;
                          },
                          false, true});

    // c_dy7(m): m = (p, m') in E; E += m'
    m.events.push_back(Ev{"c_dy7",
                          [atoms](const WorldState& w) {
                              std::vector<Binding> out;
                              for (Message e : atoms(w))
                                  if (e.is_sig() && e.body().is_pair())
                                      out.push_back({{"m", e.body()}});
                              return out;
                          },
                          [](const WorldState& w, const Binding& b) {
                              return b.msg("m").is_pair() && w.e.knows(b.msg("m"));
                          },
                          [](const WorldState& w, const Binding& b) {
                              WorldState n = w;
                              n.e.learn(b.msg("m").body());
                              return n;
                          },
                          false, true});

    if (cfg.hashed_publication) {
        // c_dy8(m): m in E; E += h(m)
        m.events.push_back(Ev{"c_dy8",
                              [atoms](const WorldState& w) {
                                  std::vector<Binding> out;
                                  for (Message e : atoms(w))
                                      out.push_back({{"m", e}});
                                  return out;
                              },
                              [](const WorldState& w, const Binding& b) { return w.e.knows(b.msg("m")); },
                              [](const WorldState& w, const Binding& b) {
                                  WorldState n = w;
                                  n.e.learn(Message::hash(b.msg("m")));
                                  return n;
                              },
                              false, true});
    }
    return m;
}

}  // namespace wbb
