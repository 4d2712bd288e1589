#pragma once

// Shared helpers for the tests: seeded random terms and oracles that work on
// the printed encoding rather than on the term structure.

#include "wbb/message.hpp"

#include <map>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace wbb::testing {

inline const std::vector<std::string>& item_pool()
{
    static const std::vector<std::string> pool{"a", "b", "x", "y", "z"};
    return pool;
}

inline KeyId random_key(std::mt19937_64& rng)
{
    unsigned peer = 1 + rng() % 5;
    switch (rng() % 5) {
    case 0:
        return KeyId::share(peer);
    case 1:
        return KeyId::combined();
    default:
        return KeyId::sk(peer);
    }
}

/// Random term of depth at most `depth`.
inline Message random_term(std::mt19937_64& rng, unsigned depth)
{
    unsigned pick = depth == 0 ? rng() % 2 : rng() % 7;
    switch (pick) {
    case 0:
        return Message::item(item_pool()[rng() % item_pool().size()]);
    case 1:
        return Message::key(random_key(rng));
    case 2:
    case 3:
        return Message::sig(random_key(rng), random_term(rng, depth - 1));
    case 4:
        return Message::pair(rng() % 3, random_term(rng, depth - 1));
    case 5: {
        std::vector<Message> elems;
        for (unsigned i = rng() % 4; i > 0; --i)
            elems.push_back(random_term(rng, depth - 1));
        return Message::set(std::move(elems));
    }
    default:
        return Message::hash(random_term(rng, depth - 1));
    }
}

/// Index just past the parenthesis that closes the one opened at `open`.
inline std::size_t closing(const std::string& s, std::size_t open)
{
    int level = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '(' || s[i] == '{')
            ++level;
        else if (s[i] == ')' || s[i] == '}')
            if (--level == 0)
                return i + 1;
    }
    return s.size();
}

/// The printed encoding with every hash(...) cut out.
inline std::string visible_text(const std::string& s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (s.compare(i, 5, "hash(") == 0) {
            i = closing(s, i + 4);
            continue;
        }
        out += s[i++];
    }
    return out;
}

inline std::set<std::string> oracle_items(Message m)
{
    std::set<std::string> out;
    std::string s = visible_text(m.text());
    static const std::regex item_re("item\\(([^)]*)\\)");
    for (auto it = std::sregex_iterator(s.begin(), s.end(), item_re); it != std::sregex_iterator(); ++it)
        out.insert((*it)[1]);
    return out;
}

/// Every sig(...) substring that does not sit inside a hash.
inline std::set<std::string> oracle_sigs(Message m)
{
    std::set<std::string> out;
    const std::string& s = m.text();
    for (std::size_t i = 0; i < s.size();) {
        if (s.compare(i, 5, "hash(") == 0) {
            i = closing(s, i + 4);
            continue;
        }
        if (s.compare(i, 4, "sig(") == 0)
            out.insert(s.substr(i, closing(s, i + 3) - i));
        ++i;
    }
    return out;
}

/// Distinct sk signers per item by pattern matching on entries.
inline std::set<std::string> oracle_threshold(const std::vector<Message>& db, unsigned t,
                                              std::optional<unsigned> period)
{
    static const std::regex wrapped("sig\\(sk([0-9]+), pair\\(([0-9]+), item\\(([^)]*)\\)\\)\\)");
    static const std::regex bare("sig\\(sk([0-9]+), item\\(([^)]*)\\)\\)");
    std::map<std::string, std::set<std::string>> signers;
    for (Message d : db) {
        const std::string& s = d.text();
        std::smatch m;
        if (std::regex_match(s, m, wrapped)) {
            if (!period || std::to_string(*period) == m[2].str())
                signers[m[3]].insert(m[1]);
        } else if (std::regex_match(s, m, bare)) {
            if (!period)
                signers[m[2]].insert(m[1]);
        }
    }
    std::set<std::string> out;
    for (const auto& [x, ks] : signers)
        if (ks.size() >= t)
            out.insert(x);
    return out;
}

/// Random well-formed database of individual item signatures.
inline std::vector<Message> random_database(std::mt19937_64& rng, unsigned max_size)
{
    std::vector<Message> db;
    for (unsigned i = rng() % (max_size + 1); i > 0; --i) {
        Message x = Message::item(item_pool()[rng() % 3]);
        KeyId k = KeyId::sk(1 + rng() % 5);
        db.push_back(rng() % 4 == 0 ? Message::sig(k, x) : Message::sig(k, Message::pair(rng() % 2, x)));
    }
    return db;
}

}  // namespace wbb::testing
