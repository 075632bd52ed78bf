#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "chanrest/core.hpp"

namespace chanrest {

// Message values of the send events from -> to, in trace order.
inline std::vector<MessageLabel> channel_send_values(std::span<const Event> w,
                                                     const ProcessId& from,
                                                     const ProcessId& to) {
    std::vector<MessageLabel> out;
    for (const auto& e : w) {
        if (e.is_send() && e.actor == from && e.peer == to) out.push_back(e.msg);
    }
    return out;
}

// Message values of the receive events taken by `to` from `from`, in trace order.
inline std::vector<MessageLabel> channel_recv_values(std::span<const Event> w,
                                                     const ProcessId& from,
                                                     const ProcessId& to) {
    std::vector<MessageLabel> out;
    for (const auto& e : w) {
        if (e.is_recv() && e.actor == to && e.peer == from) out.push_back(e.msg);
    }
    return out;
}

// Projection of w on to one process's own events.
inline Trace project_on_process(std::span<const Event> w, const ProcessId& p) {
    Trace out;
    for (const auto& e : w) {
        if (e.actor == p) out.push_back(e);
    }
    return out;
}

// A word is channel-compliant when on every channel each receive takes the
// value the oldest outstanding send put there, i.e. the receive-value
// sequence is a prefix of the send-value sequence at every cut.
inline bool is_channel_compliant(std::span<const Event> w) {
    std::map<Channel, std::deque<MessageLabel>> pending;
    for (const auto& e : w) {
        Channel c = e.channel();
        if (e.is_send()) {
            pending[c].push_back(e.msg);
        } else {
            auto it = pending.find(c);
            if (it == pending.end() || it->second.empty() || it->second.front() != e.msg) {
                return false;
            }
            it->second.pop_front();
        }
    }
    return true;
}

inline bool is_channel_compliant(const Trace& w) {
    return is_channel_compliant(std::span<const Event>(w));
}

inline void require_channel_compliant(std::span<const Event> w, const char* op) {
    if (!is_channel_compliant(w)) {
        throw compliance_error(std::string(op) + ": trace is not channel-compliant: " +
                               to_string(Trace(w.begin(), w.end())));
    }
}

// A compliant finite word is complete when every send has been received.
inline bool is_complete(std::span<const Event> w) {
    require_channel_compliant(w, "is_complete");
    std::map<Channel, std::size_t> balance;
    for (const auto& e : w) {
        balance[e.channel()] += e.is_send() ? 1 : 0;
        balance[e.channel()] -= e.is_recv() ? 1 : 0;
    }
    for (const auto& [c, n] : balance) {
        if (n != 0) return false;
    }
    return true;
}

inline bool is_complete(const Trace& w) { return is_complete(std::span<const Event>(w)); }

// FIFO matching: the n-th send on a channel pairs with the n-th receive.
// Keys are send positions, values receive positions; unmatched sends are
// absent. Requires a channel-compliant trace.
inline std::map<std::size_t, std::size_t> matching(std::span<const Event> w) {
    require_channel_compliant(w, "matching");
    std::map<std::size_t, std::size_t> out;
    std::map<Channel, std::deque<std::size_t>> open_sends;
    for (std::size_t i = 0; i < w.size(); ++i) {
        Channel c = w[i].channel();
        if (w[i].is_send()) {
            open_sends[c].push_back(i);
        } else {
            auto& q = open_sends[c];
            out[q.front()] = i;
            q.pop_front();
        }
    }
    return out;
}

inline std::map<std::size_t, std::size_t> matching(const Trace& w) {
    return matching(std::span<const Event>(w));
}

// Range over all |w|+1 prefixes of a trace, shortest first.
class PrefixRange {
public:
    explicit PrefixRange(Trace w) : word_(std::move(w)) {}

    class iterator {
    public:
        iterator(const Trace* w, std::size_t len) : word_(w), len_(len) {}
        Trace operator*() const { return Trace(word_->begin(), word_->begin() + len_); }
        iterator& operator++() {
            ++len_;
            return *this;
        }
        bool operator==(const iterator& o) const { return len_ == o.len_; }
        bool operator!=(const iterator& o) const { return len_ != o.len_; }

    private:
        const Trace* word_;
        std::size_t len_;
    };

    iterator begin() const { return iterator(&word_, 0); }
    iterator end() const { return iterator(&word_, word_.size() + 1); }

private:
    Trace word_;
};

inline PrefixRange prefixes(Trace w) { return PrefixRange(std::move(w)); }

} // namespace chanrest
