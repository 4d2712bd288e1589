#include "support.hpp"
#include "wbb/peer_set.hpp"

#include <doctest.h>

using namespace wbb;
using wbb::testing::oracle_items;
using wbb::testing::oracle_sigs;
using wbb::testing::oracle_threshold;

namespace {

Message x() { return Message::item("x"); }
Message y() { return Message::item("y"); }

std::set<std::string> texts(const MessageSet& s)
{
    std::set<std::string> out;
    for (Message m : s)
        out.insert(m.text());
    return out;
}

}  // namespace

TEST_CASE("hash-consing gives pointer equality and canonical sets")
{
    CHECK(Message::sig(KeyId::sk(1), x()) == Message::sig(KeyId::sk(1), x()));
    Message a = Message::set({y(), x(), x()});
    CHECK(a == Message::set({x(), y()}));
    CHECK(a.elements().size() == 2);
    CHECK(a.text() == "set{item(x), item(y)}");
    Message nested = Message::set({Message::set({y(), x()})});
    CHECK(nested.text() == "set{set{item(x), item(y)}}");
    CHECK(canonicalize(nested) == nested);
    CHECK(canonicalize(canonicalize(nested)) == canonicalize(nested));
}

TEST_CASE("printed encoding round-trips")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 3000; ++i) {
        Message m = wbb::testing::random_term(rng, 6);
        Message back = parse_message(m.text());
        REQUIRE(back == m);
        CHECK(back.text() == m.text());
    }
    CHECK(parse_message("sig(sk3, pair(1, item(x)))").text() == "sig(sk3, pair(1, item(x)))");
    CHECK_THROWS_AS(parse_message("sig(sk3, "), ParseError);
    CHECK_THROWS_AS(parse_message("item(x) trailing"), ParseError);
}

TEST_CASE("items_of and sigs_of on the documented examples")
{
    CHECK(items_of(x()) == ItemIdSet{"x"});
    CHECK(items_of(Message::sig(KeyId::sk(1), x())) == ItemIdSet{"x"});
    CHECK(items_of(Message::hash(x())).empty());
    CHECK(items_of(Message::key(KeyId::sk(2))).empty());
    CHECK(items_of(Message::pair(0, Message::set({x(), y()}))) == ItemIdSet{"x", "y"});

    CHECK(sigs_of(x()).empty());
    CHECK(sigs_of(Message::set({})).empty());
    Message inner = Message::sig(KeyId::sk(2), x());
    Message outer = Message::sig(KeyId::sk(1), inner);
    CHECK(sigs_of(outer) == MessageSet{outer, inner});
    CHECK(sigs_of(Message::hash(outer)).empty());
}

TEST_CASE("items_of and sigs_of agree with text oracles on random terms")
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 20000; ++i) {
        Message m = wbb::testing::random_term(rng, 6);
        ItemIdSet got = items_of(m);
        REQUIRE(std::set<std::string>(got.begin(), got.end()) == oracle_items(m));
        REQUIRE(texts(sigs_of(m)) == oracle_sigs(m));
    }
}

TEST_CASE("threshold_filter examples")
{
    auto s = [](unsigned k, unsigned p, Message m) { return Message::sig(KeyId::sk(k), Message::pair(p, m)); };
    std::vector<Message> three{s(1, 0, x()), s(2, 0, x()), s(3, 0, x())};
    CHECK(threshold_filter(three, 3, 0) == ItemIdSet{"x"});
    CHECK(threshold_filter(three, 3, 1).empty());
    CHECK(threshold_filter(three, 4).empty());
    CHECK(threshold_filter(std::vector<Message>{}, 1).empty());
    std::vector<Message> dup{s(1, 0, x()), s(1, 0, x())};
    CHECK(threshold_filter(dup, 2).empty());
    std::vector<Message> bad{Message::sig(KeyId::share(1), Message::pair(0, x()))};
    CHECK_THROWS_AS(threshold_filter(bad, 1), MalformedDatabase);
    std::vector<Message> bad2{x()};
    CHECK_THROWS_AS(threshold_filter(bad2, 1), MalformedDatabase);
}

TEST_CASE("threshold_filter agrees with a pattern oracle and is monotone")
{
    std::mt19937_64 rng(99);
    for (int i = 0; i < 20000; ++i) {
        auto db = wbb::testing::random_database(rng, 10);
        unsigned t = 1 + rng() % 4;
        std::optional<unsigned> p;
        if (rng() % 2)
            p = rng() % 2;
        ItemIdSet got = threshold_filter(db, t, p);
        REQUIRE(std::set<std::string>(got.begin(), got.end()) == oracle_threshold(db, t, p));

        auto bigger = db;
        auto extra = wbb::testing::random_database(rng, 5);
        bigger.insert(bigger.end(), extra.begin(), extra.end());
        ItemIdSet more = threshold_filter(bigger, t, p);
        REQUIRE(std::includes(more.begin(), more.end(), got.begin(), got.end()));
    }
}

TEST_CASE("clashset")
{
    using Pairs = std::vector<std::pair<std::string, std::string>>;
    CHECK(ClashRelation(Pairs{{"a", "b"}}).clashset("a") == ItemIdSet{"b"});
    CHECK(ClashRelation().clashset("a").empty());
    ClashRelation rel(Pairs{{"a", "b"}, {"a", "c"}});
    CHECK(rel.clashset("a") == ItemIdSet{"b", "c"});
    CHECK(rel.clashes("c", "a"));
    CHECK(!rel.clashset("b").count("b"));
    CHECK_THROWS(ClashRelation(Pairs{{"a", "a"}}));
}

TEST_CASE("counting witness: examples")
{
    PeerSet a, b;
    for (unsigned j : {1, 2, 4})
        a.insert(j);
    for (unsigned j : {2, 3, 4})
        b.insert(j);
    CHECK(counting_witness(a, b, 4, 3) == 2u);
    CHECK(counting_witness(PeerSet::range(1, 3), PeerSet::range(1, 3), 4, 3) == 1u);
    CHECK(!counting_witness(PeerSet::range(1, 1), PeerSet::range(2, 2), 4, 3));
}

TEST_CASE("counting witness: exhaustive up to n = 6")
{
    // The acceptance binary covers n <= 8; this keeps the unit suite quick.
    for (unsigned n = 1; n <= 6; ++n)
        for (unsigned t = 1; t <= n; ++t) {
            if (3 * t <= 2 * n)
                continue;
            for (std::uint32_t ab = 0; ab < (1u << n); ++ab)
                for (std::uint32_t bb = 0; bb < (1u << n); ++bb) {
                    PeerSet a = PeerSet::from_bits(ab << 1), b = PeerSet::from_bits(bb << 1);
                    if (a.size() >= t && b.size() >= t)
                        REQUIRE(counting_witness(a, b, n, t).has_value());
                }
        }
}
