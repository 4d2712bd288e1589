#pragma once

#include "wbb/message.hpp"

#include <algorithm>
#include <vector>

namespace wbb {

/// Duplicate-free message set ordered by intern id. Cheap to compare and
/// hash within one process; use sorted_by_text() for anything printed.
class IdSet {
public:
    IdSet() = default;
    IdSet(std::initializer_list<Message> init)
    {
        for (Message m : init)
            insert(m);
    }

    bool contains(Message m) const
    {
        auto it = std::lower_bound(v_.begin(), v_.end(), m, less);
        return it != v_.end() && *it == m;
    }
    bool insert(Message m)
    {
        auto it = std::lower_bound(v_.begin(), v_.end(), m, less);
        if (it != v_.end() && *it == m)
            return false;
        v_.insert(it, m);
        return true;
    }
    bool erase(Message m)
    {
        auto it = std::lower_bound(v_.begin(), v_.end(), m, less);
        if (it == v_.end() || *it != m)
            return false;
        v_.erase(it);
        return true;
    }
    void insert_all(const IdSet& o)
    {
        for (Message m : o.v_)
            insert(m);
    }
    bool subset_of(const IdSet& o) const
    {
        return std::includes(o.v_.begin(), o.v_.end(), v_.begin(), v_.end(), less);
    }

    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }
    const std::vector<Message>& elements() const { return v_; }

    std::vector<Message> sorted_by_text() const
    {
        std::vector<Message> out = v_;
        std::sort(out.begin(), out.end());
        return out;
    }
    /// Canonical `{a, b}` rendering in text order.
    std::string text() const
    {
        std::string s = "{";
        bool first = true;
        for (Message m : sorted_by_text()) {
            if (!first)
                s += ", ";
            first = false;
            s += m.text();
        }
        return s + "}";
    }

    friend bool operator==(const IdSet&, const IdSet&) = default;

private:
    static bool less(Message a, Message b) { return a.id() < b.id(); }
    std::vector<Message> v_;
};

}  // namespace wbb
