#include "wbb/message.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace wbb {

namespace detail {

struct Node {
    MessageKind kind = MessageKind::item;
    KeyId key{};
    unsigned period = 0;
    std::string item;
    Message body;
    std::vector<Message> elements;

    std::string text;
    std::uint32_t id = 0;
    std::size_t hash = 0;
    std::vector<std::string> items;
    std::vector<Message> sigs;
};

}  // namespace detail

namespace {

struct InternTable {
    std::mutex mutex;
    std::unordered_map<std::string_view, std::unique_ptr<detail::Node>> nodes;
    std::vector<const detail::Node*> by_id;
};

InternTable& table()
{
    static InternTable t;
    return t;
}

const detail::Node& deref(const detail::Node* n)
{
    if (n == nullptr)
        throw std::logic_error("use of an empty Message");
    return *n;
}

void require_kind(const detail::Node& n, MessageKind k, const char* what)
{
    if (n.kind != k)
        throw std::logic_error(std::string("Message accessor ") + what + " on " + n.text);
}

std::string render(const detail::Node& n)
{
    switch (n.kind) {
    case MessageKind::item:
        return "item(" + n.item + ")";
    case MessageKind::key:
        return n.key.text();
    case MessageKind::sig:
        return "sig(" + n.key.text() + ", " + n.body.text() + ")";
    case MessageKind::pair:
        return "pair(" + std::to_string(n.period) + ", " + n.body.text() + ")";
    case MessageKind::hash:
        return "hash(" + n.body.text() + ")";
    case MessageKind::set: {
        std::string s = "set{";
        for (std::size_t i = 0; i < n.elements.size(); ++i) {
            if (i)
                s += ", ";
            s += n.elements[i].text();
        }
        return s + "}";
    }
    }
    return {};
}

void merge_sorted(std::vector<std::string>& into, const std::vector<std::string>& from)
{
    std::vector<std::string> out;
    out.reserve(into.size() + from.size());
    std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
    into = std::move(out);
}

void merge_sorted(std::vector<Message>& into, const std::vector<Message>& from)
{
    std::vector<Message> out;
    out.reserve(into.size() + from.size());
    std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
    into = std::move(out);
}

}  // namespace

std::string KeyId::text() const
{
    switch (kind) {
    case KeyKind::sk:
        return "sk" + std::to_string(peer);
    case KeyKind::ssk_share:
        return "ssk" + std::to_string(peer);
    case KeyKind::ssk:
        return "SSK";
    }
    return {};
}

bool is_valid_item_id(std::string_view id)
{
    if (id.empty())
        return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

Message Message::intern(detail::Node&& proto)
{
    proto.text = render(proto);
    auto& t = table();
    std::lock_guard lock(t.mutex);
    if (auto it = t.nodes.find(proto.text); it != t.nodes.end())
        return Message(it->second.get());

    auto node = std::make_unique<detail::Node>(std::move(proto));
    node->id = static_cast<std::uint32_t>(t.nodes.size());
    node->hash = std::hash<std::string>{}(node->text);

    switch (node->kind) {
    case MessageKind::item:
        node->items = {node->item};
        break;
    case MessageKind::key:
    case MessageKind::hash:
        break;
    case MessageKind::sig:
        node->items = node->body.items();
        node->sigs = node->body.sigs();
        break;
    case MessageKind::pair:
        node->items = node->body.items();
        node->sigs = node->body.sigs();
        break;
    case MessageKind::set:
        for (const Message& e : node->elements) {
            merge_sorted(node->items, e.items());
            merge_sorted(node->sigs, e.sigs());
        }
        break;
    }

    const detail::Node* raw = node.get();
    std::string_view key = raw->text;
    t.nodes.emplace(key, std::move(node));
    t.by_id.push_back(raw);
    if (raw->kind == MessageKind::sig) {
        // The signature itself belongs to its own sigs set.
        auto* mut = const_cast<detail::Node*>(raw);
        merge_sorted(mut->sigs, std::vector<Message>{Message(raw)});
    }
    return Message(raw);
}

Message Message::item(std::string_view id)
{
    if (!is_valid_item_id(id))
        throw std::invalid_argument("invalid item id '" + std::string(id) + "'");
    detail::Node n;
    n.kind = MessageKind::item;
    n.item = std::string(id);
    return intern(std::move(n));
}

Message Message::key(KeyId k)
{
    detail::Node n;
    n.kind = MessageKind::key;
    n.key = k;
    return intern(std::move(n));
}

Message Message::sig(KeyId signer, Message body)
{
    deref(body.node_);
    detail::Node n;
    n.kind = MessageKind::sig;
    n.key = signer;
    n.body = body;
    return intern(std::move(n));
}

Message Message::pair(unsigned period, Message body)
{
    deref(body.node_);
    detail::Node n;
    n.kind = MessageKind::pair;
    n.period = period;
    n.body = body;
    return intern(std::move(n));
}

Message Message::set(std::vector<Message> elements)
{
    for (const Message& e : elements)
        deref(e.node_);
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    detail::Node n;
    n.kind = MessageKind::set;
    n.elements = std::move(elements);
    return intern(std::move(n));
}

Message Message::hash(Message body)
{
    deref(body.node_);
    detail::Node n;
    n.kind = MessageKind::hash;
    n.body = body;
    return intern(std::move(n));
}

MessageKind Message::kind() const { return deref(node_).kind; }

const std::string& Message::item_id() const
{
    const auto& n = deref(node_);
    require_kind(n, MessageKind::item, "item_id");
    return n.item;
}

KeyId Message::key_id() const
{
    const auto& n = deref(node_);
    require_kind(n, MessageKind::key, "key_id");
    return n.key;
}

KeyId Message::signer() const
{
    const auto& n = deref(node_);
    require_kind(n, MessageKind::sig, "signer");
    return n.key;
}

unsigned Message::period() const
{
    const auto& n = deref(node_);
    require_kind(n, MessageKind::pair, "period");
    return n.period;
}

Message Message::body() const
{
    const auto& n = deref(node_);
    if (n.kind != MessageKind::sig && n.kind != MessageKind::pair && n.kind != MessageKind::hash)
        throw std::logic_error("Message accessor body on " + n.text);
    return n.body;
}

std::span<const Message> Message::elements() const
{
    const auto& n = deref(node_);
    require_kind(n, MessageKind::set, "elements");
    return n.elements;
}

const std::string& Message::text() const { return deref(node_).text; }
std::uint32_t Message::id() const { return deref(node_).id; }

Message Message::from_id(std::uint32_t id)
{
    auto& t = table();
    std::lock_guard lock(t.mutex);
    if (id >= t.by_id.size())
        throw std::out_of_range("no message with intern id " + std::to_string(id));
    return Message(t.by_id[id]);
}
std::size_t Message::hash_value() const { return deref(node_).hash; }
const std::vector<std::string>& Message::items() const { return deref(node_).items; }
const std::vector<Message>& Message::sigs() const { return deref(node_).sigs; }

std::strong_ordering operator<=>(Message a, Message b)
{
    if (a.node_ == b.node_)
        return std::strong_ordering::equal;
    if (!a.node_ || !b.node_)
        return a.node_ ? std::strong_ordering::greater : std::strong_ordering::less;
    return a.node_->text.compare(b.node_->text) <=> 0;
}

// ---------------------------------------------------------------- MessageSet

MessageSet::MessageSet(std::initializer_list<Message> init) : MessageSet(std::vector<Message>(init)) {}

MessageSet::MessageSet(std::vector<Message> elements) : elems_(std::move(elements))
{
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

bool MessageSet::contains(Message m) const
{
    return std::binary_search(elems_.begin(), elems_.end(), m);
}

bool MessageSet::insert(Message m)
{
    auto it = std::lower_bound(elems_.begin(), elems_.end(), m);
    if (it != elems_.end() && *it == m)
        return false;
    elems_.insert(it, m);
    return true;
}

void MessageSet::insert_all(const MessageSet& other)
{
    if (other.empty())
        return;
    std::vector<Message> out;
    out.reserve(elems_.size() + other.elems_.size());
    std::set_union(elems_.begin(), elems_.end(), other.elems_.begin(), other.elems_.end(),
                   std::back_inserter(out));
    elems_ = std::move(out);
}

bool MessageSet::subset_of(const MessageSet& other) const
{
    return std::includes(other.elems_.begin(), other.elems_.end(), elems_.begin(), elems_.end());
}

// ------------------------------------------------------------------- parsing

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(what), line_(line), column_(column)
{
}

namespace {

class Parser {
public:
    Parser(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

    Message message()
    {
        skip_space();
        std::size_t start = pos_;
        std::string word = identifier();
        if (word == "item") {
            expect('(');
            skip_space();
            std::string id = identifier();
            if (!is_valid_item_id(id))
                fail("expected item id", start);
            expect(')');
            return Message::item(id);
        }
        if (word == "sig") {
            expect('(');
            skip_space();
            std::size_t kpos = pos_;
            auto k = parse_key(identifier());
            if (!k)
                fail("expected key (skN, sskN or SSK)", kpos);
            expect(',');
            Message body = message();
            expect(')');
            return Message::sig(*k, body);
        }
        if (word == "pair") {
            expect('(');
            unsigned p = natural();
            expect(',');
            Message body = message();
            expect(')');
            return Message::pair(p, body);
        }
        if (word == "hash") {
            expect('(');
            Message body = message();
            expect(')');
            return Message::hash(body);
        }
        if (word == "set") {
            expect('{');
            std::vector<Message> elems;
            skip_space();
            if (peek() == '}') {
                ++pos_;
                return Message::set({});
            }
            for (;;) {
                elems.push_back(message());
                skip_space();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                expect('}');
                break;
            }
            return Message::set(std::move(elems));
        }
        if (auto k = parse_key(word))
            return Message::key(*k);
        fail(word.empty() ? "expected message" : "unknown constructor '" + word + "'", start);
    }

    std::size_t pos() const { return pos_; }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_space()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
            ++pos_;
    }

    std::string identifier()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    unsigned natural()
    {
        skip_space();
        std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + static_cast<unsigned>(text_[pos_] - '0');
            if (v > 1'000'000)
                fail("natural out of range", start);
            ++pos_;
        }
        if (start == pos_)
            fail("expected natural number", start);
        return static_cast<unsigned>(v);
    }

    void expect(char c)
    {
        skip_space();
        if (peek() != c)
            fail(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what, std::size_t at) const
    {
        throw ParseError("message parse error at column " + std::to_string(at + 1) + ": " + what, 1,
                         at + 1);
    }

    std::string_view text_;
    std::size_t pos_;
};

}  // namespace

std::optional<KeyId> parse_key(std::string_view token)
{
    if (token == "SSK")
        return KeyId::combined();
    auto number = [](std::string_view digits) -> std::optional<unsigned> {
        if (digits.empty() || digits.size() > 3)
            return std::nullopt;
        unsigned v = 0;
        for (char c : digits) {
            if (!std::isdigit(static_cast<unsigned char>(c)))
                return std::nullopt;
            v = v * 10 + static_cast<unsigned>(c - '0');
        }
        if (v == 0 || (digits.size() > 1 && digits.front() == '0'))
            return std::nullopt;
        return v;
    };
    if (token.starts_with("ssk")) {
        if (auto v = number(token.substr(3)))
            return KeyId::share(*v);
        return std::nullopt;
    }
    if (token.starts_with("sk")) {
        if (auto v = number(token.substr(2)))
            return KeyId::sk(*v);
    }
    return std::nullopt;
}

Message parse_message_prefix(std::string_view text, std::size_t& pos)
{
    Parser p(text, pos);
    Message m = p.message();
    pos = p.pos();
    return m;
}

Message parse_message(std::string_view text)
{
    std::size_t pos = 0;
    Message m = parse_message_prefix(text, pos);
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
        ++pos;
    if (pos != text.size())
        throw ParseError("message parse error at column " + std::to_string(pos + 1) + ": trailing input", 1,
                         pos + 1);
    return m;
}

Message canonicalize(Message m)
{
    switch (m.kind()) {
    case MessageKind::item:
        return Message::item(m.item_id());
    case MessageKind::key:
        return Message::key(m.key_id());
    case MessageKind::sig:
        return Message::sig(m.signer(), canonicalize(m.body()));
    case MessageKind::pair:
        return Message::pair(m.period(), canonicalize(m.body()));
    case MessageKind::hash:
        return Message::hash(canonicalize(m.body()));
    case MessageKind::set: {
        std::vector<Message> elems;
        for (Message e : m.elements())
            elems.push_back(canonicalize(e));
        return Message::set(std::move(elems));
    }
    }
    return m;
}

// ---------------------------------------------------------- derived functions

ItemIdSet items_of(Message m)
{
    const auto& v = m.items();
    return ItemIdSet(v.begin(), v.end());
}

MessageSet sigs_of(Message m) { return MessageSet(m.sigs()); }

ItemIdSet threshold_filter(std::span<const Message> database, unsigned threshold,
                           std::optional<unsigned> period)
{
    std::vector<std::pair<std::string, unsigned>> votes;  // (item, signer)
    for (Message d : database) {
        if (!d.is_sig() || d.signer().kind != KeyKind::sk)
            throw MalformedDatabase("database entry is not an individual item signature: " +
                                    (d.valid() ? d.text() : std::string("<empty>")));
        Message body = d.body();
        std::optional<unsigned> wrapped;
        if (body.is_pair()) {
            wrapped = body.period();
            body = body.body();
        }
        if (!body.is_item())
            throw MalformedDatabase("database entry does not sign an item: " + d.text());
        if (period && wrapped != period)
            continue;
        votes.emplace_back(body.item_id(), d.signer().peer);
    }
    std::sort(votes.begin(), votes.end());
    votes.erase(std::unique(votes.begin(), votes.end()), votes.end());

    ItemIdSet out;
    for (std::size_t i = 0; i < votes.size();) {
        std::size_t j = i;
        while (j < votes.size() && votes[j].first == votes[i].first)
            ++j;
        if (j - i >= threshold)
            out.insert(votes[i].first);
        i = j;
    }
    return out;
}

// ------------------------------------------------------------ clash relation

ClashRelation::ClashRelation(std::vector<std::pair<std::string, std::string>> pairs)
{
    for (auto& [a, b] : pairs) {
        if (a == b)
            throw std::invalid_argument("clash relation must be irreflexive: " + a);
        if (!is_valid_item_id(a) || !is_valid_item_id(b))
            throw std::invalid_argument("invalid item id in clash pair " + a + ":" + b);
        if (b < a)
            std::swap(a, b);
        pairs_.emplace_back(std::move(a), std::move(b));
    }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

bool ClashRelation::clashes(std::string_view a, std::string_view b) const
{
    if (b < a)
        std::swap(a, b);
    return std::any_of(pairs_.begin(), pairs_.end(),
                       [&](const auto& p) { return p.first == a && p.second == b; });
}

ItemIdSet ClashRelation::clashset(std::string_view x) const
{
    ItemIdSet out;
    for (const auto& [a, b] : pairs_) {
        if (a == x)
            out.insert(b);
        else if (b == x)
            out.insert(a);
    }
    return out;
}

}  // namespace wbb
