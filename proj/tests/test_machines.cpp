#include "wbb/explorer.hpp"
#include "wbb/refinement.hpp"
#include "wbb/shapes.hpp"

#include <doctest.h>

using namespace wbb;

namespace {

Message x() { return Message::item("x"); }

ProtocolConfig base(unsigned n = 4, unsigned t = 3)
{
    ProtocolConfig c;
    c.n = n;
    c.t = t;
    return c;
}

Trace<WorldState> script(const ProtocolConfig& cfg, std::string_view body)
{
    return read_trace(bbprot_machine(cfg), "wbb-trace 1 machine=bbprot\n" + std::string(body));
}

const char* receipt_script = R"(post x=item(x)
c_msg1 j=1 x=item(x)
c_msg1 j=2 x=item(x)
c_msg1 j=3 x=item(x)
c_msg2a j=1 x=item(x)
c_msg2a j=2 x=item(x)
c_msg2a j=3 x=item(x)
c_msg2b j=1 k=2 x=item(x)
c_msg2b j=1 k=3 x=item(x)
c_msg2b j=2 k=1 x=item(x)
c_msg2b j=2 k=3 x=item(x)
c_msg2b j=3 k=1 x=item(x)
c_msg2b j=3 k=2 x=item(x)
c_msg3 j=1 x=item(x)
c_msg3 j=2 x=item(x)
c_msg3 j=3 x=item(x)
c_dy2 m=pair(0, item(x))
ack r=sig(SSK, pair(0, item(x)))
)";

}  // namespace

TEST_CASE("config validation")
{
    CHECK_NOTHROW(base().validate());
    CHECK_THROWS_AS(base(4, 2).validate(), ConfigError);
    CHECK_THROWS_AS(base(4, 0).validate(), ConfigError);
    CHECK_THROWS_AS(base(4, 5).validate(), ConfigError);
    ProtocolConfig low = base(3, 2);
    low.threshold_override = 2;
    CHECK_NOTHROW(low.validate());
    CHECK(low.receive_bound() == 1);
    CHECK(base(4, 3).receive_bound() == 2);
    ProtocolConfig bad = base();
    bad.items = {"x", "x"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("trace text round-trips and replay checks fingerprints")
{
    auto cfg = base();
    auto m = bbprot_machine(cfg);
    Trace<WorldState> t = script(cfg, receipt_script);
    stamp_trace(m, t);
    std::string text = write_trace(t);
    Trace<WorldState> back = read_trace(m, text);
    CHECK(write_trace(back) == text);
    CHECK_NOTHROW(replay(m, back));

    // Flip one digit of the third fingerprint.
    std::string bad = text;
    std::size_t arrow = 0;
    for (int i = 0; i < 3; ++i)
        arrow = bad.find("-> ", arrow + 1);
    char& c = bad[arrow + 3];
    c = c == '0' ? '1' : '0';
    try {
        replay(m, read_trace(m, bad));
        FAIL("tampered fingerprint replayed");
    } catch (const ReplayMismatch& e) {
        CHECK(e.step() == 3);
    }

    // A step whose guard is false.
    CHECK_THROWS_AS(replay(m, script(cfg, "c_msg3 j=1 x=item(x)\n")), ReplayMismatch);
    CHECK_THROWS_AS(read_trace(m, "no header\n"), ParseError);
}

TEST_CASE("knowledge closure")
{
    Knowledge k;
    CHECK(k.knows(Message::set({})));
    CHECK(!k.knows(x()));
    k.learn(Message::sig(KeyId::sk(1), Message::pair(0, x())));
    CHECK(k.knows(x()));
    CHECK(k.knows(Message::pair(0, x())));
    CHECK(k.knows(Message::pair(3, x())));
    CHECK(k.knows(Message::hash(Message::set({x()}))));
    CHECK(!k.knows(Message::sig(KeyId::sk(2), Message::pair(0, x()))));
    k.learn(Message::hash(Message::item("y")));
    CHECK(!k.knows(Message::item("y")));
    CHECK(k.knows(Message::hash(Message::item("y"))));
}

TEST_CASE("initial protocol state satisfies every invariant clause")
{
    for (bool hashed : {false, true}) {
        auto cfg = base();
        cfg.hashed_publication = hashed;
        auto m = bbprot_machine(cfg);
        WorldState w = m.init();
        CHECK(check_inv(m, w).empty());
        CHECK(violated_invariants(cfg, w).empty());
        auto en = enabled(m, w);
        CHECK(std::any_of(en.begin(), en.end(), [](const auto& e) { return e.first == "post"; }));
    }
}

TEST_CASE("happy path: receipt issued, invariants hold, simulation matches")
{
    auto cfg = base();
    SimulationReport rep = check_simulation(cfg, script(cfg, receipt_script));
    CHECK(rep.ok);
    CHECK(rep.summary() == "RESULT=OK");
    REQUIRE(rep.verdicts.size() == 18);
    CHECK(rep.verdicts[0].text() == "MatchedBy post x=item(x)");
    CHECK(rep.verdicts[1].kind == MatchVerdict::Kind::skip);
    CHECK(rep.verdicts[5].text() == "MatchedBy a_msg1 x=item(x) p=0");
    CHECK(rep.verdicts[16].text() == "MatchedBy a_msg2 x=item(x) p=0");
    CHECK(rep.verdicts[17].event == "ack");
    CHECK(rep.abstract_trace.steps.size() == 4);
    CHECK(rep.bb.ok());
}

TEST_CASE("abstraction counts 2t-n honest signatures")
{
    // n=4, t=3: two honest signatures on pair(0, x) put x into R_0.
    auto cfg = base();
    auto rr = replay(bbprot_machine(cfg), script(cfg, R"(post x=item(x)
c_msg1 j=1 x=item(x)
c_msg1 j=2 x=item(x)
c_msg2a j=1 x=item(x)
c_msg2a j=2 x=item(x)
)"));
    AbstractState a3 = abstraction(cfg, rr.states[4]);
    AbstractState a5 = abstraction(cfg, rr.states[5]);
    CHECK(a3.r[0].empty());
    CHECK(a5.r[0] == IdSet{x()});
    CHECK(a5.c[0].empty());
    CHECK(a5.ea == IdSet{x()});
    LinkReport lr = link_report(cfg, rr.states[5], a5);
    CHECK(lr.ok());
    LinkReport off = link_report(cfg, rr.states[5], a3);
    CHECK(!off.link1);
    CHECK(off.link2);
    CHECK(off.link3);
}

TEST_CASE("empty trace and tampered initial knowledge")
{
    auto cfg = base();
    CHECK(check_simulation(cfg, script(cfg, "")).summary() == "RESULT=OK");
    SimulationReport rep = check_simulation(cfg, script(cfg, "@ learn sig(SSK, pair(0, item(x)))\n"));
    CHECK(rep.summary() == "RESULT=VIOLATION clause=inv4a step=0");
}

TEST_CASE("dishonest peers alone cannot complete a receipt")
{
    // n=4, t=3: peer 4's share is one of the three needed.
    auto cfg = base();
    auto m = bbprot_machine(cfg);
    WorldState w = step(m, m.init(), "post", {{"x", x()}});
    w = step(m, w, "c_dy1", {{"s", Message::key(KeyId::share(4))}, {"m", Message::pair(0, x())}});
    CHECK_THROWS_AS(step(m, w, "c_dy2", {{"m", Message::pair(0, x())}}), StepRejected);
}

TEST_CASE("specification machine guards")
{
    auto cfg = base();
    auto spec = bbspec_machine(cfg);
    AbstractState s = spec.init();
    CHECK_THROWS_AS(step(spec, s, "a_msg1", {{"x", x()}, {"p", 0u}}), StepRejected);
    s = step(spec, s, "post", {{"x", x()}});
    CHECK_THROWS_AS(step(spec, s, "a_msg2", {{"x", x()}, {"p", 0u}}), StepRejected);
    s = step(spec, s, "a_msg1", {{"x", x()}, {"p", 0u}});
    s = step(spec, s, "a_msg2", {{"x", x()}, {"p", 0u}});
    CHECK(s.c[0] == IdSet{x()});
    // C_0 <= Y: the empty board can no longer be published.
    CHECK_THROWS_AS(step(spec, s, "a_msg3", {{"Y", Message::set({})}, {"p", 0u}}), StepRejected);
    s = step(spec, s, "a_msg3", {{"Y", Message::set({x()})}, {"p", 0u}});
    CHECK(published_for(cfg, s, 0).size() == 1);
    CHECK_THROWS_AS(step(spec, s, "a_msg3", {{"Y", Message::set({x()})}, {"p", 0u}}), StepRejected);
    CHECK(!check_bb_state(cfg, s));
}

TEST_CASE("clash guard in the specification")
{
    auto cfg = base();
    cfg.items = {"a", "b"};
    cfg.clash = ClashRelation(std::vector<std::pair<std::string, std::string>>{{"a", "b"}});
    cfg.enable_clash_guard = true;
    auto spec = bbspec_machine(cfg);
    Message a = Message::item("a"), b = Message::item("b");
    AbstractState s = step(spec, spec.init(), "post", {{"x", a}});
    s = step(spec, s, "post", {{"x", b}});
    s = step(spec, s, "a_msg1", {{"x", a}, {"p", 0u}});
    CHECK_THROWS_AS(step(spec, s, "a_msg1", {{"x", b}, {"p", 0u}}), StepRejected);
}

TEST_CASE("bb checks flag hand-built bad states")
{
    auto cfg = base();
    AbstractState s = initial_abstract_state(cfg);
    // A published board with an item nobody posted.
    s.ea.insert(Message::sig(KeyId::combined(), board_body(cfg, 0, Message::set({x()}))));
    auto v = check_bb_state(cfg, s);
    REQUIRE(v);
    CHECK(v->clause == "bb1");

    AbstractState two = initial_abstract_state(cfg);
    two.ea.insert(x());
    two.ea.insert(Message::sig(KeyId::combined(), board_body(cfg, 0, Message::set({x()}))));
    two.ea.insert(Message::sig(KeyId::combined(), board_body(cfg, 0, Message::set({}))));
    auto w = check_bb_state(cfg, two);
    REQUIRE(w);
    CHECK(w->clause == "bb4");

    AbstractState gone = initial_abstract_state(cfg);
    auto d = check_bb_transition(cfg, two, gone);
    REQUIRE(d);
    CHECK(d->clause == "bb4");
}

TEST_CASE("the specification machine alone satisfies bb.1-bb.4")
{
    auto cfg = base();
    cfg.items = {"a", "b"};
    cfg.max_periods = 2;
    ExploreBounds b;
    ExploreResult r = explore_spec(cfg, b);
    CHECK(r.ok());
    CHECK(r.fixpoint);
    CHECK(r.max_boards_per_period == 1);
}
