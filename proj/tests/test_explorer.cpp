#include "wbb/explorer.hpp"
#include "wbb/refinement.hpp"

#include <doctest.h>

#include <map>

using namespace wbb;

namespace {

/// Distinct states within `depth` steps, by depth-first search over every
/// enabled (event, binding), remembering the most remaining depth seen.
void dfs(const MachineDef<WorldState>& m, const WorldState& w, unsigned left,
         std::map<std::string, unsigned>& best)
{
    std::string key = m.encode(w);
    auto it = best.find(key);
    if (it != best.end() && it->second >= left)
        return;
    best[key] = left;
    if (left == 0)
        return;
    for (const auto& [event, binding] : enabled(m, w))
        dfs(m, step(m, w, event, binding), left - 1, best);
}

}  // namespace

TEST_CASE("exhaustive exploration is schedule-complete at bounds")
{
    ProtocolConfig cfg;
    for (unsigned depth : {1u, 3u, 5u, 7u}) {
        ExploreBounds b;
        b.max_depth = depth;
        b.symmetry = false;
        ExploreResult r = explore(cfg, b);
        REQUIRE(r.ok());
        std::map<std::string, unsigned> best;
        auto m = bbprot_machine(cfg);
        dfs(m, m.init(), depth, best);
        CHECK(r.states == best.size());

        // Symmetry reduction can only merge states.
        b.symmetry = true;
        ExploreResult sym = explore(cfg, b);
        CHECK(sym.states <= r.states);
        CHECK(sym.ok());
    }
}

TEST_CASE("report text states the bounds")
{
    ProtocolConfig cfg;
    ExploreBounds b;
    b.max_depth = 3;
    ExploreResult r = explore(cfg, b);
    CHECK(!r.fixpoint);
    CHECK(r.text().find("max_depth=3") != std::string::npos);
    CHECK(r.text().find("RESULT=OK") != std::string::npos);
}

TEST_CASE("randomized exploration is deterministic per seed")
{
    ProtocolConfig cfg;
    cfg.items = {"a", "b"};
    cfg.max_periods = 2;
    ExploreBounds b;
    b.mode = ExploreMode::randomized;
    b.max_depth = 30;
    b.samples = 50;
    b.seed = 5;
    ExploreResult r1 = explore(cfg, b);
    ExploreResult r2 = explore(cfg, b);
    CHECK(r1.ok());
    CHECK(r1.traces == 50);
    CHECK(r1.text() == r2.text());
    b.seed = 6;
    CHECK(explore(cfg, b).text() != r1.text());
}

TEST_CASE("attack goals parse and print")
{
    for (std::string g : {"ReceiptWithoutPublication", "ClashingReceipts", "PublicationMutation",
                          "InvariantBreach(inv4a)"})
        CHECK(AttackGoal::parse(g).text() == g);
    CHECK_THROWS(AttackGoal::parse("Nonsense"));
}

TEST_CASE("low threshold attack is found, replays and breaks the simulation")
{
    ProtocolConfig cfg;
    cfg.n = 3;
    cfg.t = 2;
    cfg.threshold_override = 2;
    ExploreBounds b;
    b.max_depth = 25;
    AttackGoal goal = AttackGoal::parse("ReceiptWithoutPublication");
    AttackResult r = find_attack(cfg, goal, b);
    REQUIRE(r.found());
    CHECK(r.trace->steps.size() <= 25);
    auto rr = replay(bbprot_machine(cfg), *r.trace);
    CHECK(goal_holds(cfg, goal, rr.final_state()));
    for (std::size_t i = 0; i + 1 < rr.states.size(); ++i)
        CHECK(!goal_holds(cfg, goal, rr.states[i]));
    CHECK(!check_simulation(cfg, *r.trace).ok);
    CHECK(r.text().find("RESULT=FOUND") != std::string::npos);
}

TEST_CASE("no attack on the full protocol within a small bound")
{
    ProtocolConfig cfg;
    ExploreBounds b;
    b.max_depth = 8;
    AttackResult r = find_attack(cfg, AttackGoal::parse("ReceiptWithoutPublication"), b);
    CHECK(!r.found());
    CHECK(r.text().find("RESULT=NOT_FOUND") != std::string::npos);
    CHECK(r.text().find("max_depth=8") != std::string::npos);
}
