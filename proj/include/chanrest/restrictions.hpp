#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/msc.hpp"
#include "chanrest/trace_ops.hpp"

namespace chanrest {

// Cut searches key states by node bitmask, so charts above this many nodes
// are rejected. Can be raised to at most 64.
inline constexpr std::size_t kDefaultNodeLimit = 32;

// One block of a k-exchange decomposition: up to k sends followed by the
// receives matched to them.
struct Exchange {
    std::vector<NodeId> sends;
    std::vector<NodeId> recvs;
};

struct Classification {
    bool half_duplex = false;
    // Smallest bound some linearization fits in; 0 with bound_defined=false
    // when the chart has no send at all.
    std::size_t least_existential_bound = 0;
    bool bound_defined = false;
    // Absent when no decomposition exists for any block size.
    std::optional<std::size_t> least_k;
};

namespace detail {

inline void check_positive(std::size_t value, const char* what) {
    if (value == 0) {
        throw validation_error(std::string(what) + " must be positive");
    }
}

inline std::uint64_t node_bit(NodeId v) { return std::uint64_t(1) << v; }

inline void check_node_limit(const PrefixMsc& m, std::size_t node_limit, const char* op) {
    if (node_limit > 64) node_limit = 64;
    if (m.node_count() > node_limit) {
        throw resource_limit_error(std::string(op) + ": chart has " +
                                   std::to_string(m.node_count()) +
                                   " nodes, search limit is " + std::to_string(node_limit));
    }
}

// Predecessor masks; a node is enabled at a cut when all its immediate
// predecessors are inside the cut.
inline std::vector<std::uint64_t> pred_masks(const PrefixMsc& m) {
    std::vector<std::uint64_t> masks(m.node_count(), 0);
    for (NodeId v = 0; v < m.node_count(); ++v) {
        for (NodeId p : m.immediate_predecessors(v)) masks[v] |= node_bit(p);
    }
    return masks;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Trace-level checks (single pass over prefixes).

// At every cut and for every process pair, at least one of the two opposite
// channels is empty.
inline bool is_half_duplex_trace(std::span<const Event> w) {
    require_channel_compliant(w, "is_half_duplex_trace");
    std::map<Channel, std::size_t> in_flight;
    for (const auto& e : w) {
        Channel c = e.channel();
        auto& n = in_flight[c];
        e.is_send() ? ++n : --n;
        // Only the pair touched by this event can newly violate.
        if (in_flight[c] > 0 && in_flight[Channel{c.to, c.from}] > 0) return false;
    }
    return true;
}

inline bool is_half_duplex_trace(const Trace& w) {
    return is_half_duplex_trace(std::span<const Event>(w));
}

// Every prefix keeps every channel's in-flight count at most B.
inline bool is_B_bounded_trace(std::span<const Event> w, std::size_t B) {
    detail::check_positive(B, "bound B");
    require_channel_compliant(w, "is_B_bounded_trace");
    std::map<Channel, std::size_t> in_flight;
    for (const auto& e : w) {
        auto& n = in_flight[e.channel()];
        e.is_send() ? ++n : --n;
        if (n > B) return false;
    }
    return true;
}

inline bool is_B_bounded_trace(const Trace& w, std::size_t B) {
    return is_B_bounded_trace(std::span<const Event>(w), B);
}

// ---------------------------------------------------------------------------
// Half-duplex on charts.
//
// A violating linearization exists iff two opposite-direction sends can be
// simultaneously in flight, which is a pure reachability question on the
// happens-before order: take sends e1 (P to Q) and e2 (Q to P); the
// down-closure of {e1, e2} leaves both unreceived exactly when neither
// receive happens before the other send.

inline std::optional<std::pair<NodeId, NodeId>> find_half_duplex_violation(const PrefixMsc& m) {
    std::vector<NodeId> sends;
    for (NodeId v = 0; v < m.node_count(); ++v) {
        if (m.label(v).is_send()) sends.push_back(v);
    }
    for (NodeId e1 : sends) {
        for (NodeId e2 : sends) {
            Channel c1 = m.label(e1).channel();
            Channel c2 = m.label(e2).channel();
            if (c1.from != c2.to || c1.to != c2.from) continue;
            auto r1 = m.match_of(e1);
            auto r2 = m.match_of(e2);
            bool e1_open_at_e2 = !r1 || !m.happens_before(*r1, e2);
            bool e2_open_at_e1 = !r2 || !m.happens_before(*r2, e1);
            if (e1_open_at_e2 && e2_open_at_e1) return std::make_pair(e1, e2);
        }
    }
    return std::nullopt;
}

inline bool is_half_duplex_msc(const PrefixMsc& m) {
    return !find_half_duplex_violation(m).has_value();
}

// ---------------------------------------------------------------------------
// Existential boundedness: depth-first search over down-closed cuts where
// every step appends one enabled node and sends must keep their channel's
// in-flight count within B.

inline std::optional<std::vector<NodeId>> find_bounded_linearization(
    const PrefixMsc& m, std::size_t B, std::size_t node_limit = kDefaultNodeLimit) {
    detail::check_positive(B, "bound B");
    detail::check_node_limit(m, node_limit, "find_bounded_linearization");
    const std::size_t n = m.node_count();
    const std::uint64_t full = (n == 64) ? ~std::uint64_t(0) : (detail::node_bit(n) - 1);
    auto preds = detail::pred_masks(m);

    // In-flight counts are a function of the cut, so visited cuts alone
    // are a sound memo.
    std::unordered_set<std::uint64_t> visited;
    std::vector<NodeId> order;
    order.reserve(n);
    std::map<Channel, std::size_t> in_flight;

    auto rec = [&](auto&& self, std::uint64_t cut) -> bool {
        if (cut == full) return true;
        if (!visited.insert(cut).second) return false;
        for (NodeId v = 0; v < n; ++v) {
            if ((cut & detail::node_bit(v)) || (preds[v] & ~cut)) continue;
            const Event& e = m.label(v);
            auto& count = in_flight[e.channel()];
            if (e.is_send() && count + 1 > B) continue;
            e.is_send() ? ++count : --count;
            order.push_back(v);
            if (self(self, cut | detail::node_bit(v))) return true;
            order.pop_back();
            e.is_send() ? --count : ++count;
        }
        return false;
    };
    if (rec(rec, 0)) return order;
    return std::nullopt;
}

inline bool is_existentially_B_bounded(const PrefixMsc& m, std::size_t B,
                                       std::size_t node_limit = kDefaultNodeLimit) {
    return find_bounded_linearization(m, B, node_limit).has_value();
}

// Smallest B admitting a bounded linearization; always at most the number
// of sends. Charts without sends report 0 via Classification.bound_defined.
inline std::size_t least_existential_bound(const PrefixMsc& m,
                                           std::size_t node_limit = kDefaultNodeLimit) {
    if (m.send_count() == 0) return 0;
    for (std::size_t B = 1;; ++B) {
        if (is_existentially_B_bounded(m, B, node_limit)) return B;
    }
}

// ---------------------------------------------------------------------------
// k-synchronisability: depth-first search over cuts closed under complete
// exchanges. A move picks at most k sends that can be appended using only
// each other and the cut, then appends all their matched receives, which
// must also become enabled within the block. Matched pairs therefore
// always sit inside one block.

namespace detail {

// Kahn-style placement of `want` nodes over base: each node needs its
// predecessors inside base or placed earlier. Appends the placement to
// `out` and returns false if some node cannot be placed.
inline bool place_all(const PrefixMsc& m, const std::vector<std::uint64_t>& preds,
                      std::uint64_t base, std::uint64_t want, std::vector<NodeId>* out) {
    std::uint64_t placed = 0;
    while (placed != want) {
        std::uint64_t progressed = 0;
        for (NodeId v = 0; v < m.node_count(); ++v) {
            std::uint64_t bit = node_bit(v);
            if (!(want & bit) || (placed & bit)) continue;
            if (preds[v] & ~(base | placed)) continue;
            placed |= bit;
            progressed |= bit;
            if (out) out->push_back(v);
        }
        if (!progressed) return false;
    }
    return true;
}

} // namespace detail

inline std::optional<std::vector<Exchange>> find_k_decomposition(
    const PrefixMsc& m, std::size_t k, std::size_t node_limit = kDefaultNodeLimit) {
    detail::check_positive(k, "block size k");
    detail::check_node_limit(m, node_limit, "find_k_decomposition");
    const std::size_t n = m.node_count();
    const std::uint64_t full = (n == 64) ? ~std::uint64_t(0) : (detail::node_bit(n) - 1);
    auto preds = detail::pred_masks(m);

    std::unordered_set<std::uint64_t> dead; // cuts that cannot be completed
    std::vector<Exchange> blocks;

    // Send sets are grown one enabled send at a time, which reaches every
    // set that can be ordered; duplicates are pruned per recursion level.
    auto rec = [&](auto&& self, std::uint64_t cut) -> bool {
        if (cut == full) return true;
        if (dead.count(cut)) return false;

        std::unordered_set<std::uint64_t> seen_send_sets;
        auto try_block = [&](std::uint64_t send_set) -> bool {
            std::uint64_t recv_set = 0;
            std::vector<NodeId> sends, recvs;
            for (NodeId v = 0; v < n; ++v) {
                if (!(send_set & detail::node_bit(v))) continue;
                sends.push_back(v);
                if (auto r = m.match_of(v)) recv_set |= detail::node_bit(*r);
            }
            if (!detail::place_all(m, preds, cut | send_set, recv_set, &recvs)) return false;
            blocks.push_back(Exchange{std::move(sends), std::move(recvs)});
            if (self(self, cut | send_set | recv_set)) return true;
            blocks.pop_back();
            return false;
        };

        auto grow = [&](auto&& grow_self, std::uint64_t send_set, std::size_t size) -> bool {
            if (size > 0) {
                if (!seen_send_sets.insert(send_set).second) return false;
                if (try_block(send_set)) return true;
            }
            if (size == k) return false;
            for (NodeId v = 0; v < n; ++v) {
                std::uint64_t bit = detail::node_bit(v);
                if ((cut & bit) || (send_set & bit) || !m.label(v).is_send()) continue;
                if (preds[v] & ~(cut | send_set)) continue;
                if (grow_self(grow_self, send_set | bit, size + 1)) return true;
            }
            return false;
        };

        if (grow(grow, 0, 0)) return true;
        dead.insert(cut);
        return false;
    };

    if (rec(rec, 0)) return blocks;
    return std::nullopt;
}

inline bool is_k_synchronous(const PrefixMsc& m, std::size_t k,
                             std::size_t node_limit = kDefaultNodeLimit) {
    return find_k_decomposition(m, k, node_limit).has_value();
}

// Smallest block size admitting a decomposition, searching up from 1; any
// block also works at the next size, and no block can exceed the send
// count, so absence below that count is definitive. A chart with no sends
// has no nodes and is trivially synchronous at size 1.
inline std::optional<std::size_t> least_k(const PrefixMsc& m,
                                          std::size_t node_limit = kDefaultNodeLimit) {
    std::size_t limit = std::max<std::size_t>(m.send_count(), 1);
    for (std::size_t k = 1; k <= limit; ++k) {
        if (is_k_synchronous(m, k, node_limit)) return k;
    }
    return std::nullopt;
}

inline Classification classify(const PrefixMsc& m, std::size_t node_limit = kDefaultNodeLimit) {
    Classification c;
    c.half_duplex = is_half_duplex_msc(m);
    c.least_existential_bound = least_existential_bound(m, node_limit);
    c.bound_defined = m.send_count() > 0;
    c.least_k = least_k(m, node_limit);
    return c;
}

} // namespace chanrest
