#include "wbb/config.hpp"

#include "wbb/peer_set.hpp"

#include <algorithm>
#include <set>

namespace wbb {

unsigned ProtocolConfig::variant() const
{
    if (hashed_publication)
        return 4;
    if (enable_clash_guard)
        return 3;
    return max_periods > 1 ? 2 : 1;
}

void ProtocolConfig::validate() const
{
    if (n < 1 || n > max_peers)
        throw ConfigError("n must lie in 1.." + std::to_string(max_peers) + ", got " + std::to_string(n));
    unsigned th = threshold();
    if (th < 1 || th > n)
        throw ConfigError("threshold t must satisfy 1 <= t <= n, got t=" + std::to_string(th) +
                          " n=" + std::to_string(n));
    if (!threshold_override && 3 * th <= 2 * n)
        throw ConfigError("threshold must exceed 2n/3 (t=" + std::to_string(th) + ", n=" + std::to_string(n) +
                          "); use threshold_override for attack studies");
    if (2 * th <= n)
        throw ConfigError("threshold must exceed n/2 so that 2t-n >= 1 (t=" + std::to_string(th) +
                          ", n=" + std::to_string(n) + ")");
    if (max_periods < 1 || max_periods > max_period_bound)
        throw ConfigError("max_periods must lie in 1.." + std::to_string(max_period_bound));
    if (items.empty() || items.size() > max_item_universe)
        throw ConfigError("item universe must hold 1.." + std::to_string(max_item_universe) + " items");
    std::set<std::string> seen;
    for (const auto& x : items) {
        if (!is_valid_item_id(x))
            throw ConfigError("invalid item id '" + x + "'");
        if (!seen.insert(x).second)
            throw ConfigError("duplicate item id '" + x + "'");
    }
    for (const auto& [a, b] : clash.pairs())
        if (!seen.count(a) || !seen.count(b))
            throw ConfigError("clash pair " + a + ":" + b + " names an undeclared item");
}

std::vector<Message> ProtocolConfig::item_messages() const
{
    std::vector<Message> out;
    for (const auto& x : items)
        out.push_back(Message::item(x));
    std::sort(out.begin(), out.end());
    return out;
}

bool ProtocolConfig::has_item(std::string_view id) const
{
    return std::find(items.begin(), items.end(), id) != items.end();
}

std::string ProtocolConfig::summary() const
{
    std::string s = "n=" + std::to_string(n) + " t=" + std::to_string(threshold());
    if (threshold_override)
        s += " (override)";
    s += " periods=" + std::to_string(max_periods) + " items=";
    std::vector<std::string> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        s += (i ? "," : "") + sorted[i];
    s += " clash=";
    if (clash.empty())
        s += "-";
    for (std::size_t i = 0; i < clash.pairs().size(); ++i)
        s += (i ? "," : "") + clash.pairs()[i].first + ":" + clash.pairs()[i].second;
    s += std::string(" round2=") + (enable_round2 ? "on" : "off");
    s += std::string(" clash_guard=") + (enable_clash_guard ? "on" : "off");
    s += std::string(" hashed=") + (hashed_publication ? "on" : "off");
    s += " variant=" + std::to_string(variant());
    return s;
}

}  // namespace wbb
