#pragma once

// Constructors and recognisers for the protocol's message shapes.

#include "wbb/config.hpp"
#include "wbb/id_set.hpp"
#include "wbb/message.hpp"

#include <optional>
#include <vector>

namespace wbb {

/// sig(sk_k, pair(p, x)): an individual item signature (SIG1_p).
Message item_sig(unsigned k, unsigned p, Message x);
/// sig(ssk_k, pair(p, x)): a receipt share.
Message receipt_share(unsigned k, unsigned p, Message x);
/// sig(SSK, pair(p, x)).
Message receipt(unsigned p, Message x);
/// set{...} of items.
Message board(const std::vector<Message>& items);
/// pair(p, set Y) or, with hashed publication, pair(p, hash(set Y)).
Message board_body(const ProtocolConfig& cfg, unsigned p, Message board_set);
/// sig(SSK, board_body(p, Y)).
Message publish_term(const ProtocolConfig& cfg, unsigned p, Message board_set);

struct ItemAt {
    unsigned p;
    Message x;
};
struct BoardAt {
    unsigned p;
    Message board;  // set of items
};

bool is_item_set(Message m);

/// pair(p, item) -> (p, item).
std::optional<ItemAt> as_item_pair(Message body);
/// pair(p, set) or pair(p, hash(set)) per cfg -> (p, set of items).
std::optional<BoardAt> as_board_body(const ProtocolConfig& cfg, Message body);

/// sig(sk_k, pair(p, x)) with x an item.
std::optional<ItemAt> as_item_sig(Message m, unsigned* signer = nullptr);
/// sig(SSK, pair(p, x)).
std::optional<ItemAt> as_receipt(Message m);
/// sig(ssk_k, pair(p, x)).
std::optional<ItemAt> as_receipt_share(Message m, unsigned* signer = nullptr);
/// sig(SSK, board_body).
std::optional<BoardAt> as_publish(const ProtocolConfig& cfg, Message m);
/// sig(ssk_k, board_body).
std::optional<BoardAt> as_board_share(const ProtocolConfig& cfg, Message m, unsigned* signer = nullptr);
/// sig(sk_k, pair(p, hash(set))): an individually signed board hash.
std::optional<BoardAt> as_signed_hash(Message m, unsigned* signer = nullptr);

/// Items of a board set as an IdSet.
IdSet board_items(Message board_set);
/// All subsets of `items` (as board sets), smallest first.
std::vector<Message> all_boards(const std::vector<Message>& items);

}  // namespace wbb
