#include "wbb/publication.hpp"

#include "wbb/shapes.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace wbb {

std::string Schedule::text() const
{
    std::string s = "period=" + std::to_string(period) + " max_rounds=" + std::to_string(max_rounds) +
                    " outside_ingest=" + (outside_ingest ? "yes" : "no");
    for (const auto& f : failures) {
        s += " stop(" + std::to_string(f.peer) + ")=" + std::to_string(f.stop_round);
        if (f.stop_round > 0)
            s += " reach" + f.reach.text();
    }
    return s;
}

std::string PostingOutcome::text() const
{
    std::string s;
    for (std::size_t k = 0; k < db.size(); ++k) {
        std::vector<Message> sorted = db[k];
        std::sort(sorted.begin(), sorted.end());
        s += "D" + std::to_string(k + 1) + "={";
        for (std::size_t i = 0; i < sorted.size(); ++i)
            s += (i ? ", " : "") + sorted[i].text();
        s += "} ";
    }
    if (!s.empty())
        s.pop_back();
    return s;
}

namespace {

class Driver {
public:
    explicit Driver(const ProtocolConfig& cfg) : cfg_(cfg), m_(bbprot_machine(cfg)) {}

    /// Fires an event through its guard and update, bypassing domain
    /// enumeration. A false guard is a harness error.
    void fire(WorldState& w, std::string_view event, const Binding& b) const
    {
        const EventDef<WorldState>* ev = m_.find(event);
        if (!ev)
            throw std::logic_error("no event " + std::string(event));
        if (!ev->guard(w, b))
            throw std::invalid_argument("guard of " + std::string(event) + " false for [" + b.text() + "]");
        w = ev->update(w, b);
    }

    const ProtocolConfig& cfg() const { return cfg_; }
    const MachineDef<WorldState>& machine() const { return m_; }

private:
    ProtocolConfig cfg_;
    MachineDef<WorldState> m_;
};

Message board_of(const IdSet& db, unsigned t) { return board(threshold_items(db, t).elements()); }

bool live_for_optimistic(const std::vector<StoppingFailure>& failures, unsigned k, unsigned round)
{
    for (const auto& f : failures)
        if (f.peer == k)
            return f.stop_round > round;
    return true;
}

/// Receivers reached by peer k in fallback round r: all, some or none.
enum class Delivery { all, partial, none };
Delivery delivery(const std::vector<StoppingFailure>& failures, unsigned k, unsigned round, PeerSet* reach)
{
    for (const auto& f : failures)
        if (f.peer == k) {
            if (f.stop_round > round)
                return Delivery::all;
            if (f.stop_round == round) {
                *reach = f.reach;
                return Delivery::partial;
            }
            return Delivery::none;
        }
    return Delivery::all;
}

PublicationRun run(const Driver& d, const WorldState& world, const Schedule& sch)
{
    const ProtocolConfig& cfg = d.cfg();
    const unsigned t = cfg.threshold();
    const unsigned p = sch.period;
    if (!cfg.hashed_publication)
        throw std::invalid_argument("publication rounds need the hashed publication variant");
    if (sch.outside_db.size() != cfg.n - t)
        throw std::invalid_argument("schedule needs one database per peer above the threshold");
    for (unsigned j = 1; j <= t; ++j)
        if (world.peer(j).p_ctr <= p || world.peer(j).c_ctr != p)
            throw std::invalid_argument("peer " + std::to_string(j) + " is not ready to publish period " +
                                        std::to_string(p));

    PublicationRun out;
    WorldState w = world;
    std::vector<IdSet> outside = sch.outside_db;
    std::vector<bool> outside_committed(outside.size(), false);
    auto odb = [&](unsigned k) -> IdSet& { return outside[k - t - 1]; };

    for (unsigned round = 0;; ++round) {
        if (round > 0) {
            // Fallback: everyone sends the database held at the start of the round.
            std::vector<IdSet> snap_honest;
            for (unsigned j = 1; j <= t; ++j)
                snap_honest.push_back(w.peer(j).D[p]);
            std::vector<IdSet> snap_outside = outside;
            auto deliver = [&](unsigned to, const IdSet& db) {
                if (db.empty())
                    return;
                if (to <= t)
                    d.fire(w, "c_msg5b", {{"j", to}, {"p", p}, {"D", Message::set(db.elements())}});
                else if (sch.outside_ingest)
                    odb(to).insert_all(db);
            };
            for (unsigned j = 1; j <= t; ++j) {
                d.fire(w, "c_msg5a", {{"j", j}, {"p", p}});
                for (unsigned to = 1; to <= cfg.n; ++to)
                    if (to != j)
                        deliver(to, snap_honest[j - 1]);
            }
            for (unsigned k = t + 1; k <= cfg.n; ++k) {
                PeerSet reach;
                Delivery dl = delivery(sch.failures, k, round, &reach);
                if (dl == Delivery::none)
                    continue;
                for (unsigned to = 1; to <= cfg.n; ++to)
                    if (to != k && (dl == Delivery::all || reach.contains(to)))
                        deliver(to, snap_outside[k - t - 1]);
            }
            out.log.push_back("fallback round " + std::to_string(round));
        }

        // Optimistic attempt: signed hashes of the current boards.
        std::vector<std::pair<unsigned, Message>> hashes;  // signer, board
        for (unsigned j = 1; j <= t; ++j) {
            d.fire(w, "c_msg8a", {{"j", j}, {"p", p}});
            hashes.push_back({j, current_board(cfg, w, j, p)});
        }
        for (unsigned k = t + 1; k <= cfg.n; ++k)
            if (live_for_optimistic(sch.failures, k, round)) {
                Message b = board_of(odb(k), t);
                d.fire(w, "c_dy1",
                       {{"s", Message::key(KeyId::sk(k))}, {"m", Message::pair(p, Message::hash(b))}});
                hashes.push_back({k, b});
            }
        for (unsigned j = 1; j <= t; ++j)
            for (const auto& [k, b] : hashes)
                d.fire(w, "c_msg8b",
                       {{"j", j}, {"p", p}, {"m", Message::sig(KeyId::sk(k), Message::pair(p, Message::hash(b)))}});
        auto agreeing = [&](Message b) {
            return static_cast<unsigned>(std::count_if(hashes.begin(), hashes.end(),
                                                       [&](const auto& h) { return h.second == b; }));
        };
        for (unsigned j = 1; j <= t; ++j)
            if (w.peer(j).c_ctr == p && agreeing(current_board(cfg, w, j, p)) >= t)
                d.fire(w, "c_msg6", {{"j", j}});
        for (unsigned k = t + 1; k <= cfg.n; ++k)
            if (!outside_committed[k - t - 1] && live_for_optimistic(sch.failures, k, round)) {
                Message b = board_of(odb(k), t);
                if (agreeing(b) >= t) {
                    d.fire(w, "c_dy1", {{"s", Message::key(KeyId::share(k))}, {"m", board_body(cfg, p, b)}});
                    outside_committed[k - t - 1] = true;
                }
            }
        std::string line = "optimistic attempt " + std::to_string(round) + ":";
        for (const auto& [k, b] : hashes)
            line += " " + std::to_string(k) + "=" + b.text();
        out.log.push_back(line);

        // Any board with a threshold of shares gets combined.
        std::vector<Message> bodies;
        for (Message m : w.e.basis())
            if (auto b = as_board_share(cfg, m); b && b->p == p)
                bodies.push_back(m.body());
        std::sort(bodies.begin(), bodies.end());
        bodies.erase(std::unique(bodies.begin(), bodies.end()), bodies.end());
        for (Message body : bodies) {
            unsigned shares = 0;
            for (unsigned k = 1; k <= cfg.n; ++k)
                if (w.e.knows(Message::sig(KeyId::share(k), body)))
                    ++shares;
            if (shares >= t) {
                d.fire(w, "c_dy2", {{"m", body}});
                out.agreed = true;
                out.board = as_board_body(cfg, body)->board;
                out.log.push_back("published " + out.board->text());
                break;
            }
        }
        out.fallback_rounds = round;
        if (out.agreed || round >= sch.max_rounds)
            break;
    }
    out.world = std::move(w);
    return out;
}

WorldState drive_posting(const Driver& d, const PostingOutcome& outcome)
{
    const ProtocolConfig& cfg = d.cfg();
    const unsigned t = cfg.threshold();
    if (outcome.db.size() != cfg.n)
        throw std::invalid_argument("posting outcome needs one database per peer");
    std::vector<std::pair<unsigned, Message>> signed_by;  // (signer, item)
    for (const auto& db : outcome.db)
        for (Message s : db) {
            unsigned k = 0;
            auto is = as_item_sig(s, &k);
            if (!is || is->p != 0 || k < 1 || k > cfg.n || !cfg.has_item(is->x.item_id()))
                throw std::invalid_argument("not a period-0 item signature: " + s.text());
            signed_by.push_back({k, is->x});
        }
    std::sort(signed_by.begin(), signed_by.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    signed_by.erase(std::unique(signed_by.begin(), signed_by.end()), signed_by.end());

    WorldState w = d.machine().init();
    std::vector<Message> posted;
    for (const auto& sb : signed_by)
        posted.push_back(sb.second);
    std::sort(posted.begin(), posted.end());
    posted.erase(std::unique(posted.begin(), posted.end()), posted.end());
    for (Message x : posted)
        d.fire(w, "post", {{"x", x}});
    for (const auto& [k, x] : signed_by) {
        if (k <= t) {
            d.fire(w, "c_msg1", {{"j", k}, {"x", x}});
            d.fire(w, "c_msg2a", {{"j", k}, {"x", x}});
        } else {
            d.fire(w, "c_dy1", {{"s", Message::key(KeyId::sk(k))}, {"m", Message::pair(0, x)}});
        }
    }
    for (unsigned j = 1; j <= t; ++j) {
        for (Message s : outcome.db[j - 1]) {
            unsigned k = 0;
            auto is = as_item_sig(s, &k);
            if (k != j)
                d.fire(w, "c_msg2b", {{"j", j}, {"k", k}, {"x", is->x}});
        }
        IdSet want;
        for (Message s : outcome.db[j - 1])
            want.insert(s);
        if (w.peer(j).D[0] != want)
            throw std::invalid_argument("honest peer " + std::to_string(j) +
                                        " signed an item without keeping its own signature");
        d.fire(w, "c_msg4", {{"j", j}});
    }
    return w;
}

// ------------------------------------------------------------- generation

struct Candidate {
    unsigned k;
    Message sig;
};

/// Posting outcomes: for each item a set of signers, then per peer a subset of
/// the resulting signatures. Peers in `own_forced` keep their own signatures.
class OutcomeSpace {
public:
    OutcomeSpace(const ProtocolConfig& cfg, PeerSet own_forced) : cfg_(cfg), forced_(own_forced)
    {
        items_ = cfg.item_messages();
    }

    /// Number of outcomes, saturating at `cap` + 1.
    std::uint64_t count(std::uint64_t cap) const
    {
        std::uint64_t total = 0;
        std::vector<std::uint32_t> signers(items_.size(), 0);
        for (;;) {
            std::uint64_t prod = 1;
            for (unsigned k = 1; k <= cfg_.n && prod <= cap; ++k)
                prod <<= free_bits(signers, k);
            total += std::min(prod, cap + 1);
            if (total > cap || !next(signers))
                return std::min(total, cap + 1);
        }
    }

    template <class F>
    void for_each(F&& f) const
    {
        std::vector<std::uint32_t> signers(items_.size(), 0);
        do {
            auto cands = candidates(signers);
            std::vector<std::vector<std::size_t>> free(cfg_.n + 1);
            for (unsigned k = 1; k <= cfg_.n; ++k)
                for (std::size_t i = 0; i < cands.size(); ++i)
                    if (!(forced_.contains(k) && cands[i].k == k))
                        free[k].push_back(i);
            std::vector<std::uint64_t> choice(cfg_.n + 1, 0);
            for (;;) {
                f(build(cands, free, choice));
                unsigned k = 1;
                for (; k <= cfg_.n; ++k) {
                    if (++choice[k] < (std::uint64_t{1} << free[k].size()))
                        break;
                    choice[k] = 0;
                }
                if (k > cfg_.n)
                    break;
            }
        } while (next(signers));
    }

    PostingOutcome sample(std::mt19937_64& rng) const
    {
        std::vector<std::uint32_t> signers(items_.size());
        for (auto& s : signers)
            s = static_cast<std::uint32_t>(rng() % (std::uint64_t{1} << cfg_.n)) << 1;
        auto cands = candidates(signers);
        std::vector<std::vector<std::size_t>> free(cfg_.n + 1);
        std::vector<std::uint64_t> choice(cfg_.n + 1, 0);
        for (unsigned k = 1; k <= cfg_.n; ++k) {
            for (std::size_t i = 0; i < cands.size(); ++i)
                if (!(forced_.contains(k) && cands[i].k == k))
                    free[k].push_back(i);
            choice[k] = free[k].empty() ? 0 : rng() % (std::uint64_t{1} << free[k].size());
        }
        return build(cands, free, choice);
    }

private:
    // signers[i] holds a peer bitmask (bit k for peer k) for item i.
    bool next(std::vector<std::uint32_t>& signers) const
    {
        const std::uint32_t limit = std::uint32_t{1} << (cfg_.n + 1);
        for (auto& s : signers) {
            s += 2;
            if (s < limit)
                return true;
            s = 0;
        }
        return false;
    }

    std::vector<Candidate> candidates(const std::vector<std::uint32_t>& signers) const
    {
        std::vector<Candidate> out;
        for (std::size_t i = 0; i < items_.size(); ++i)
            for (unsigned k = 1; k <= cfg_.n; ++k)
                if (signers[i] >> k & 1u)
                    out.push_back({k, item_sig(k, 0, items_[i])});
        return out;
    }

    unsigned free_bits(const std::vector<std::uint32_t>& signers, unsigned k) const
    {
        unsigned n = 0;
        for (const auto& c : candidates(signers))
            if (!(forced_.contains(k) && c.k == k))
                ++n;
        return n;
    }

    PostingOutcome build(const std::vector<Candidate>& cands, const std::vector<std::vector<std::size_t>>& free,
                         const std::vector<std::uint64_t>& choice) const
    {
        PostingOutcome o;
        o.db.resize(cfg_.n);
        for (unsigned k = 1; k <= cfg_.n; ++k) {
            for (const auto& c : cands)
                if (forced_.contains(k) && c.k == k)
                    o.db[k - 1].push_back(c.sig);
            for (std::size_t b = 0; b < free[k].size(); ++b)
                if (choice[k] >> b & 1u)
                    o.db[k - 1].push_back(cands[free[k][b]].sig);
        }
        return o;
    }

    ProtocolConfig cfg_;
    PeerSet forced_;
    std::vector<Message> items_;
};

bool all_receipted(const ProtocolConfig& cfg, const PostingOutcome& o)
{
    const unsigned t = cfg.threshold();
    IdSet signed_items;
    for (const auto& db : o.db)
        for (Message s : db)
            signed_items.insert(as_item_sig(s)->x);
    for (Message x : signed_items) {
        unsigned receipting = 0;
        for (const auto& db : o.db) {
            IdSet d;
            for (Message s : db)
                d.insert(s);
            if (threshold_items(d, t).contains(x))
                ++receipting;
        }
        if (receipting < t)
            return false;
    }
    return true;
}

}  // namespace

std::vector<std::vector<StoppingFailure>> stopping_schedules(const ProtocolConfig& cfg, LivenessRegime regime,
                                                             unsigned bound)
{
    const unsigned t = cfg.threshold();
    std::vector<std::vector<StoppingFailure>> per_peer_options;
    for (unsigned k = t + 1; k <= cfg.n; ++k) {
        std::vector<StoppingFailure> opts;
        opts.push_back({k, ~0u, {}});  // never stops
        if (regime != LivenessRegime::all_honest)
            opts.push_back({k, 0, {}});
        if (regime == LivenessRegime::threshold_live)
            for (unsigned r = 1; r <= bound; ++r)
                for (std::uint32_t bits = 0; bits < (1u << t); ++bits)
                    opts.push_back({k, r, PeerSet::from_bits(bits << 1)});
        per_peer_options.push_back(std::move(opts));
    }
    std::vector<std::vector<StoppingFailure>> out{{}};
    for (const auto& opts : per_peer_options) {
        std::vector<std::vector<StoppingFailure>> next;
        for (const auto& partial : out)
            for (const auto& o : opts) {
                auto s = partial;
                if (o.stop_round != ~0u)
                    s.push_back(o);
                next.push_back(std::move(s));
            }
        out.swap(next);
    }
    return out;
}

PublicationRun run_publication_schedule(const ProtocolConfig& cfg, const WorldState& world, const Schedule& schedule)
{
    return run(Driver(cfg), world, schedule);
}

WorldState posting_world(const ProtocolConfig& cfg, const PostingOutcome& outcome)
{
    return drive_posting(Driver(cfg), outcome);
}

std::string regime_name(LivenessRegime r)
{
    switch (r) {
    case LivenessRegime::all_honest:
        return "all-honest";
    case LivenessRegime::threshold_live_honest_users:
        return "threshold-live+honest-users";
    case LivenessRegime::threshold_live:
        return "threshold-live";
    }
    return {};
}

LivenessRegime parse_regime(std::string_view text)
{
    for (auto r : {LivenessRegime::all_honest, LivenessRegime::threshold_live_honest_users,
                   LivenessRegime::threshold_live})
        if (text == regime_name(r))
            return r;
    throw std::invalid_argument("unknown liveness regime '" + std::string(text) + "'");
}

LivenessReport liveness_run(const ProtocolConfig& cfg_in, LivenessRegime regime, const LivenessBounds& bounds)
{
    ProtocolConfig cfg = cfg_in;
    cfg.hashed_publication = true;
    cfg.max_periods = 1;
    cfg.validate();
    const unsigned t = cfg.threshold();
    Driver d(cfg);

    LivenessReport rep;
    rep.config = cfg.summary();
    rep.regime = regime;
    rep.exact = regime == LivenessRegime::all_honest;
    rep.bound = regime == LivenessRegime::threshold_live ? cfg.n - t + 1 : 1;

    PeerSet forced = regime == LivenessRegime::all_honest ? PeerSet::range(1, cfg.n) : PeerSet::range(1, t);
    OutcomeSpace space(cfg, forced);
    auto schedules = stopping_schedules(cfg, regime, rep.bound);

    auto handle = [&](const PostingOutcome& o) {
        ++rep.outcomes;
        if (regime == LivenessRegime::threshold_live_honest_users && !all_receipted(cfg, o)) {
            ++rep.excluded;
            return;
        }
        WorldState w = drive_posting(d, o);
        Schedule base;
        base.max_rounds = rep.bound + 2;
        base.outside_ingest = regime == LivenessRegime::all_honest;
        for (unsigned k = t + 1; k <= cfg.n; ++k) {
            IdSet db;
            for (Message s : o.db[k - 1])
                db.insert(s);
            base.outside_db.push_back(std::move(db));
        }
        for (const auto& failures : schedules) {
            Schedule s = base;
            s.failures = failures;
            PublicationRun r = run(d, w, s);
            if (regime == LivenessRegime::all_honest && r.agreed && r.fallback_rounds == 0) {
                ++rep.excluded;  // optimistic attempt succeeded; outside the premise
                continue;
            }
            ++rep.schedules;
            if (!r.agreed) {
                ++rep.no_agreement;
            } else {
                ++rep.histogram[r.fallback_rounds];
            }
            bool bad = !r.agreed || r.fallback_rounds > rep.bound || (rep.exact && r.fallback_rounds != rep.bound);
            if (bad && !rep.counterexample)
                rep.counterexample = o.text() + " | " + s.text() + " | " +
                                     (r.agreed ? std::to_string(r.fallback_rounds) + " rounds" : "no agreement");
        }
    };

    if (space.count(bounds.max_outcomes) <= bounds.max_outcomes) {
        space.for_each(handle);
    } else {
        std::mt19937_64 rng(bounds.seed);
        for (std::uint64_t i = 0; i < bounds.max_outcomes; ++i)
            handle(space.sample(rng));
    }
    return rep;
}

std::string LivenessReport::text() const
{
    std::string s = "liveness " + config + "\n";
    s += "regime=" + regime_name(regime) + " bound=" + std::to_string(bound) + (exact ? " (exact)" : "") + "\n";
    s += "outcomes=" + std::to_string(outcomes) + " excluded=" + std::to_string(excluded) +
         " runs=" + std::to_string(schedules) + " no_agreement=" + std::to_string(no_agreement) + "\n";
    s += "rounds:";
    for (const auto& [r, n] : histogram)
        s += " " + std::to_string(r) + "=" + std::to_string(n);
    s += "\nmax_rounds=" + std::to_string(max_rounds()) + "\n";
    if (counterexample)
        s += "counterexample: " + *counterexample + "\nRESULT=BOUND_EXCEEDED\n";
    else
        s += "RESULT=OK\n";
    return s;
}

}  // namespace wbb
