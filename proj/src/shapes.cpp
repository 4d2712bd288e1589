#include "wbb/shapes.hpp"

#include <bit>

namespace wbb {

Message item_sig(unsigned k, unsigned p, Message x) { return Message::sig(KeyId::sk(k), Message::pair(p, x)); }
Message receipt_share(unsigned k, unsigned p, Message x)
{
    return Message::sig(KeyId::share(k), Message::pair(p, x));
}
Message receipt(unsigned p, Message x) { return Message::sig(KeyId::combined(), Message::pair(p, x)); }
Message board(const std::vector<Message>& items) { return Message::set(items); }

Message board_body(const ProtocolConfig& cfg, unsigned p, Message board_set)
{
    return Message::pair(p, cfg.hashed_publication ? Message::hash(board_set) : board_set);
}

Message publish_term(const ProtocolConfig& cfg, unsigned p, Message board_set)
{
    return Message::sig(KeyId::combined(), board_body(cfg, p, board_set));
}

bool is_item_set(Message m)
{
    if (!m.is_set())
        return false;
    for (Message e : m.elements())
        if (!e.is_item())
            return false;
    return true;
}

std::optional<ItemAt> as_item_pair(Message body)
{
    if (!body.is_pair() || !body.body().is_item())
        return std::nullopt;
    return ItemAt{body.period(), body.body()};
}

std::optional<BoardAt> as_board_body(const ProtocolConfig& cfg, Message body)
{
    if (!body.is_pair())
        return std::nullopt;
    Message b = body.body();
    if (cfg.hashed_publication) {
        if (!b.is_hash())
            return std::nullopt;
        b = b.body();
    }
    if (!is_item_set(b))
        return std::nullopt;
    return BoardAt{body.period(), b};
}

namespace {

std::optional<ItemAt> signed_item(Message m, KeyKind kind, unsigned* signer)
{
    if (!m.is_sig() || m.signer().kind != kind)
        return std::nullopt;
    auto r = as_item_pair(m.body());
    if (r && signer)
        *signer = m.signer().peer;
    return r;
}

}  // namespace

std::optional<ItemAt> as_item_sig(Message m, unsigned* signer) { return signed_item(m, KeyKind::sk, signer); }
std::optional<ItemAt> as_receipt(Message m) { return signed_item(m, KeyKind::ssk, nullptr); }
std::optional<ItemAt> as_receipt_share(Message m, unsigned* signer)
{
    return signed_item(m, KeyKind::ssk_share, signer);
}

std::optional<BoardAt> as_publish(const ProtocolConfig& cfg, Message m)
{
    if (!m.is_sig() || m.signer().kind != KeyKind::ssk)
        return std::nullopt;
    return as_board_body(cfg, m.body());
}

std::optional<BoardAt> as_board_share(const ProtocolConfig& cfg, Message m, unsigned* signer)
{
    if (!m.is_sig() || m.signer().kind != KeyKind::ssk_share)
        return std::nullopt;
    auto r = as_board_body(cfg, m.body());
    if (r && signer)
        *signer = m.signer().peer;
    return r;
}

std::optional<BoardAt> as_signed_hash(Message m, unsigned* signer)
{
    if (!m.is_sig() || m.signer().kind != KeyKind::sk || !m.body().is_pair())
        return std::nullopt;
    Message h = m.body().body();
    if (!h.is_hash() || !is_item_set(h.body()))
        return std::nullopt;
    if (signer)
        *signer = m.signer().peer;
    return BoardAt{m.body().period(), h.body()};
}

IdSet board_items(Message board_set)
{
    IdSet out;
    for (Message e : board_set.elements())
        out.insert(e);
    return out;
}

std::vector<Message> all_boards(const std::vector<Message>& items)
{
    std::vector<Message> out;
    std::size_t n = items.size();
    for (std::size_t size = 0; size <= n; ++size)
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != size)
                continue;
            std::vector<Message> sub;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i))
                    sub.push_back(items[i]);
            out.push_back(Message::set(std::move(sub)));
        }
    return out;
}

}  // namespace wbb
