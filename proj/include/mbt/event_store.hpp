#pragma once

#include "mbt/error.hpp"
#include "mbt/event.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <utility>
#include <vector>

namespace mbt {

enum class Discipline {
    Set,          // any pending event may be withdrawn
    FifoPairwise, // one queue per (source, destination); only heads are withdrawable
};

/// Multiset of unprocessed events. Duplicates are kept so that size
/// accounting stays exact; projection() collapses them.
class EventStore {
public:
    explicit EventStore(Discipline d = Discipline::Set) : discipline_(d) {}

    Discipline discipline() const noexcept { return discipline_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    void insert(Event e)
    {
        ++size_;
        if (discipline_ == Discipline::Set) {
            ++counts_[std::move(e)];
        } else {
            auto key = std::make_pair(e.source, e.destination);
            queues_[key].push_back(std::move(e));
        }
    }

    bool contains(const Event& e) const
    {
        if (discipline_ == Discipline::Set) return counts_.count(e) > 0;
        auto it = queues_.find({e.source, e.destination});
        if (it == queues_.end()) return false;
        for (const auto& x : it->second)
            if (x == e) return true;
        return false;
    }

    bool withdrawable(const Event& e) const
    {
        if (discipline_ == Discipline::Set) return contains(e);
        auto it = queues_.find({e.source, e.destination});
        return it != queues_.end() && !it->second.empty() && it->second.front() == e;
    }

    /// Removes one copy of a withdrawable event.
    void withdraw(const Event& e)
    {
        if (!withdrawable(e)) fail(ErrorCode::IllegalAction, "event not withdrawable: " + to_text(e));
        erase_one(e);
    }

    /// Removes one copy regardless of queue position (crash-time drops).
    void erase(const Event& e)
    {
        if (!contains(e)) fail(ErrorCode::IllegalAction, "event not pending: " + to_text(e));
        erase_one(e);
    }

    /// Replaces the payload of one pending copy in place.
    void replace_payload(const Event& e, const Value& payload)
    {
        if (!contains(e)) fail(ErrorCode::IllegalAction, "event not pending: " + to_text(e));
        Event changed = e;
        changed.payload = payload;
        if (discipline_ == Discipline::Set) {
            erase_one(e);
            insert(std::move(changed));
            return;
        }
        for (auto& x : queues_[{e.source, e.destination}]) {
            if (x == e) {
                x = std::move(changed);
                return;
            }
        }
    }

    /// All pending copies, duplicates included, in a deterministic order.
    std::vector<Event> contents() const
    {
        std::vector<Event> out;
        out.reserve(size_);
        if (discipline_ == Discipline::Set) {
            for (const auto& [e, n] : counts_)
                for (std::size_t i = 0; i < n; ++i) out.push_back(e);
        } else {
            for (const auto& [key, q] : queues_)
                for (const auto& e : q) out.push_back(e);
        }
        return out;
    }

    /// Sorted, duplicate-free view used for snapshots.
    std::vector<Event> projection() const
    {
        std::vector<Event> out;
        if (discipline_ == Discipline::Set) {
            out.reserve(counts_.size());
            for (const auto& [e, n] : counts_) out.push_back(e);
            return out;
        }
        out = contents();
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    void erase_one(const Event& e)
    {
        --size_;
        if (discipline_ == Discipline::Set) {
            auto it = counts_.find(e);
            if (--it->second == 0) counts_.erase(it);
            return;
        }
        auto& q = queues_[{e.source, e.destination}];
        for (auto it = q.begin(); it != q.end(); ++it) {
            if (*it == e) {
                q.erase(it);
                break;
            }
        }
        if (q.empty()) queues_.erase({e.source, e.destination});
    }

    Discipline discipline_;
    std::size_t size_ = 0;
    std::map<Event, std::size_t> counts_;
    std::map<std::pair<ActorId, ActorId>, std::deque<Event>> queues_;
};

} // namespace mbt
