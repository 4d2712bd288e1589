#pragma once

#include "wbb/message.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbb {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr unsigned max_item_universe = 8;
inline constexpr unsigned max_period_bound = 4;

/// Protocol parameters and variant toggles. Honest peers are 1..threshold().
struct ProtocolConfig {
    unsigned n = 4;
    unsigned t = 3;
    unsigned max_periods = 1;
    std::vector<std::string> items{"x"};
    ClashRelation clash;
    bool enable_round2 = true;
    bool enable_clash_guard = false;
    bool hashed_publication = false;
    /// Replaces t and lifts the t > 2n/3 requirement (attack studies).
    std::optional<unsigned> threshold_override;

    unsigned threshold() const { return threshold_override.value_or(t); }
    /// Honest signatures needed for an item to count as received: 2t - n.
    unsigned receive_bound() const { return 2 * threshold() - n; }
    /// 1 single period, 2 multi-period, 3 clash-rejecting, 4 hashed publication.
    unsigned variant() const;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;

    std::vector<Message> item_messages() const;
    bool has_item(std::string_view id) const;
    /// One-line summary used in report headers.
    std::string summary() const;

    friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

}  // namespace wbb
