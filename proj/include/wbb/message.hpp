#pragma once

// Symbolic message terms for the Dolev-Yao model of the peered bulletin board.
//
// Every Message is hash-consed: two structurally equal terms share a node, so
// equality is a pointer comparison. Set elements are deduplicated and kept in
// canonical order (lexicographic on the printed encoding), which makes the
// printed form a canonical structural encoding of the term.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wbb {

enum class KeyKind : std::uint8_t { sk, ssk_share, ssk };

/// Signing keys: sk_j (peer j's own key), ssk_j (peer j's share of the
/// threshold key) and SSK (the combined threshold key, never held by anyone).
struct KeyId {
    KeyKind kind = KeyKind::sk;
    unsigned peer = 0;

    static constexpr KeyId sk(unsigned j) { return {KeyKind::sk, j}; }
    static constexpr KeyId share(unsigned j) { return {KeyKind::ssk_share, j}; }
    static constexpr KeyId combined() { return {KeyKind::ssk, 0}; }

    std::string text() const;

    friend constexpr auto operator<=>(const KeyId&, const KeyId&) = default;
};

enum class MessageKind : std::uint8_t { item, key, sig, pair, set, hash };

namespace detail {
struct Node;
}

class Message {
public:
    Message() = default;

    static Message item(std::string_view id);
    static Message key(KeyId k);
    static Message sig(KeyId signer, Message body);
    static Message pair(unsigned period, Message body);
    static Message set(std::vector<Message> elements);
    static Message hash(Message body);

    bool valid() const { return node_ != nullptr; }
    MessageKind kind() const;

    // Accessors; each requires the matching kind.
    const std::string& item_id() const;
    KeyId key_id() const;
    KeyId signer() const;
    unsigned period() const;
    Message body() const;
    std::span<const Message> elements() const;

    bool is_item() const { return valid() && kind() == MessageKind::item; }
    bool is_sig() const { return valid() && kind() == MessageKind::sig; }
    bool is_pair() const { return valid() && kind() == MessageKind::pair; }
    bool is_set() const { return valid() && kind() == MessageKind::set; }
    bool is_hash() const { return valid() && kind() == MessageKind::hash; }
    bool is_key() const { return valid() && kind() == MessageKind::key; }

    /// Canonical encoding, e.g. `sig(sk3, pair(1, item(x)))`.
    const std::string& text() const;
    /// Process-local intern number. Stable for a given sequence of
    /// constructions, not across processes.
    std::uint32_t id() const;
    /// Inverse of id().
    static Message from_id(std::uint32_t id);
    std::size_t hash_value() const;

    /// Cached items_of / sigs_of for this node.
    const std::vector<std::string>& items() const;
    const std::vector<Message>& sigs() const;

    friend bool operator==(Message a, Message b) { return a.node_ == b.node_; }
    friend std::strong_ordering operator<=>(Message a, Message b);

private:
    explicit Message(const detail::Node* node) : node_(node) {}
    static Message intern(detail::Node&& proto);

    const detail::Node* node_ = nullptr;
};

struct MessageHash {
    std::size_t operator()(Message m) const { return m.hash_value(); }
};

/// Sorted, duplicate-free set of messages in canonical order.
class MessageSet {
public:
    MessageSet() = default;
    MessageSet(std::initializer_list<Message> init);
    explicit MessageSet(std::vector<Message> elements);

    bool contains(Message m) const;
    bool insert(Message m);
    void insert_all(const MessageSet& other);
    bool subset_of(const MessageSet& other) const;

    std::size_t size() const { return elems_.size(); }
    bool empty() const { return elems_.empty(); }
    auto begin() const { return elems_.begin(); }
    auto end() const { return elems_.end(); }
    const std::vector<Message>& elements() const { return elems_; }

    friend bool operator==(const MessageSet&, const MessageSet&) = default;

private:
    std::vector<Message> elems_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Thrown by threshold_filter on a database entry that is not an individual
/// item signature.
class MalformedDatabase : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

Message parse_message(std::string_view text);
/// Parses one message starting at `pos` and advances `pos` past it.
Message parse_message_prefix(std::string_view text, std::size_t& pos);
std::optional<KeyId> parse_key(std::string_view token);

bool is_valid_item_id(std::string_view id);

/// Rebuilds `m` bottom-up through the canonicalizing constructors.
Message canonicalize(Message m);

using ItemIdSet = std::set<std::string>;

ItemIdSet items_of(Message m);
MessageSet sigs_of(Message m);

/// Items x for which `database` holds signatures sk_k on x (optionally wrapped
/// as pair(period, x)) from at least `threshold` distinct signers k.
ItemIdSet threshold_filter(std::span<const Message> database, unsigned threshold,
                           std::optional<unsigned> period = std::nullopt);

/// Irreflexive symmetric relation over item ids.
class ClashRelation {
public:
    ClashRelation() = default;
    explicit ClashRelation(std::vector<std::pair<std::string, std::string>> pairs);

    bool clashes(std::string_view a, std::string_view b) const;
    ItemIdSet clashset(std::string_view x) const;
    /// Pairs with first < second, sorted.
    const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }
    bool empty() const { return pairs_.empty(); }

    friend bool operator==(const ClashRelation&, const ClashRelation&) = default;

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

inline ItemIdSet clashset(std::string_view x, const ClashRelation& rel) { return rel.clashset(x); }

}  // namespace wbb
