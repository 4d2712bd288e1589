#pragma once

// The concrete protocol machine: honest peers 1..t, the external post/ack/
// publish events and a Dolev-Yao adversary holding the keys of peers t+1..n.

#include "wbb/config.hpp"
#include "wbb/id_set.hpp"
#include "wbb/machine.hpp"

#include <string>
#include <vector>

namespace wbb {

struct PeerState {
    std::vector<IdSet> I;  // received items, per period
    std::vector<IdSet> D;  // item signatures sig(sk_k, pair(p, x)), per period
    std::vector<IdSet> H;  // signed board hashes sig(sk_k, pair(p, hash(B))), per period
    unsigned p_ctr = 0;    // p_j: period currently accepting posts
    unsigned c_ctr = 0;    // c_j: next period to commit a board share for

    friend bool operator==(const PeerState&, const PeerState&) = default;
};

/// Adversary knowledge E, stored as its analysed basis: items, keys,
/// signatures and opaque hashes. Anything built from the basis with pair, set
/// and hash is also in E. Signing and combining are explicit events.
class Knowledge {
public:
    /// Adds m and everything obtainable from it by unpairing, set extraction
    /// and signature opening.
    void learn(Message m);
    /// Derivability of m from the basis with the public constructors.
    bool knows(Message m) const;
    /// Rebuilds knowledge from a basis previously taken from basis().
    static Knowledge from_basis(IdSet basis)
    {
        Knowledge k;
        k.basis_ = std::move(basis);
        return k;
    }

    const IdSet& basis() const { return basis_; }
    std::vector<Message> known_items() const;

    friend bool operator==(const Knowledge&, const Knowledge&) = default;

private:
    void absorb(Message m);
    void drop_transparent_hashes();

    IdSet basis_;
};

struct WorldState {
    std::vector<PeerState> peers;  // peers[j-1] is honest peer j
    Knowledge e;

    const PeerState& peer(unsigned j) const { return peers.at(j - 1); }
    PeerState& peer(unsigned j) { return peers.at(j - 1); }

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

WorldState initial_world(const ProtocolConfig& cfg);
std::string encode_world(const WorldState& w);

/// t(D): items carrying at least `threshold` distinct signers in D.
IdSet threshold_items(const IdSet& d, unsigned threshold);

/// The board peer j would sign for period p: set of t(D_{j,p}).
Message current_board(const ProtocolConfig& cfg, const WorldState& w, unsigned j, unsigned p);

enum class TermShape { item_signature, receipt_share, board_share, signed_hash, combined };

/// Terms of the given shape that the adversary can produce in one signing
/// (or combining) step from the current knowledge, within the relevance bound:
/// periods below max_periods and boards over known items.
std::vector<Message> adversary_synthesizable(const ProtocolConfig& cfg, const WorldState& w, TermShape shape);

/// Invariant clause names in check order.
std::vector<std::string> protocol_invariant_names(const ProtocolConfig& cfg);
/// Names of violated clauses, in check order. Same verdicts as check_inv on
/// bbprot_machine, computed in one pass.
std::vector<std::string> violated_invariants(const ProtocolConfig& cfg, const WorldState& w);

MachineDef<WorldState> bbprot_machine(const ProtocolConfig& cfg);

}  // namespace wbb
