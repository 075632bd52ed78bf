#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "chanrest/core.hpp"

namespace chanrest {

// The four adjacent-swap schemas. Each is an unordered equation: a pair
// matching either orientation of a rule may be swapped, and the guard is
// evaluated on the prefix before the pair, which both orientations share.
enum class SwapRule : std::uint8_t { send_send, recv_recv, send_recv, recv_send };

inline const char* to_string(SwapRule r) {
    switch (r) {
        case SwapRule::send_send: return "send-send";
        case SwapRule::recv_recv: return "recv-recv";
        case SwapRule::send_recv: return "send-recv";
        case SwapRule::recv_send: return "recv-send";
    }
    return "?";
}

struct Swap {
    std::size_t position; // index of the first event of the swapped pair
    SwapRule rule;
    Trace result;
};

namespace detail {

// Guard of the same-channel send/receive swap: the channel already holds a
// message before the pair, so the receive takes an older message and the
// two events are unrelated.
inline bool channel_backlog(std::span<const Event> prefix, const Channel& c) {
    std::size_t sends = 0, recvs = 0;
    for (const auto& e : prefix) {
        if (e.channel() == c) {
            e.is_send() ? ++sends : ++recvs;
        }
    }
    return sends > recvs;
}

inline std::optional<SwapRule> swap_rule_for(std::span<const Event> w, std::size_t i) {
    const Event& a = w[i];
    const Event& b = w[i + 1];
    if (a.is_send() && b.is_send()) {
        return a.actor != b.actor ? std::optional(SwapRule::send_send) : std::nullopt;
    }
    if (a.is_recv() && b.is_recv()) {
        return a.actor != b.actor ? std::optional(SwapRule::recv_recv) : std::nullopt;
    }
    const Event& snd = a.is_send() ? a : b;
    const Event& rcv = a.is_send() ? b : a;
    // snd = P>Q!m, rcv = S<R?m'.
    const ProcessId& P = snd.actor;
    const ProcessId& Q = snd.peer;
    const ProcessId& S = rcv.actor;
    const ProcessId& R = rcv.peer;
    if (P != S && (P != R || Q != S)) return SwapRule::send_recv;
    if (S == Q && R == P && channel_backlog(w.first(i), snd.channel())) {
        return SwapRule::recv_send;
    }
    return std::nullopt;
}

} // namespace detail

// All traces one swap away from w, with the rule and position that enabled
// each.
inline std::vector<Swap> swap_neighbors(const Trace& w) {
    std::vector<Swap> out;
    std::span<const Event> view(w);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (auto rule = detail::swap_rule_for(view, i)) {
            Trace u = w;
            std::swap(u[i], u[i + 1]);
            out.push_back(Swap{i, *rule, std::move(u)});
        }
    }
    return out;
}

struct IndistLimits {
    std::size_t max_visited = 1'000'000;
};

// Breadth-first search over the swap graph. The relation preserves length
// and the event multiset, so the reachable set is finite.
template <typename Visit>
void for_each_indistinguishable(const Trace& w, const IndistLimits& limits, Visit&& visit) {
    std::unordered_set<Trace> seen;
    std::deque<Trace> queue;
    seen.insert(w);
    queue.push_back(w);
    while (!queue.empty()) {
        Trace cur = std::move(queue.front());
        queue.pop_front();
        if (!visit(cur)) return;
        for (auto& s : swap_neighbors(cur)) {
            if (seen.insert(s.result).second) {
                if (seen.size() > limits.max_visited) {
                    throw resource_limit_error(
                        "swap reachability exceeded " + std::to_string(limits.max_visited) +
                        " traces");
                }
                queue.push_back(std::move(s.result));
            }
        }
    }
}

inline bool are_indistinguishable(const Trace& w, const Trace& u,
                                  const IndistLimits& limits = {}) {
    if (w.size() != u.size()) return false;
    bool found = false;
    for_each_indistinguishable(w, limits, [&](const Trace& t) {
        if (t == u) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

// Union of the swap-reachability sets of all given traces.
inline std::set<Trace> closure(const std::set<Trace>& language, const IndistLimits& limits = {}) {
    std::set<Trace> out;
    for (const auto& w : language) {
        if (out.count(w)) continue;
        for_each_indistinguishable(w, limits, [&](const Trace& t) {
            out.insert(t);
            return true;
        });
    }
    return out;
}

} // namespace chanrest
