#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/trace_ops.hpp"

namespace chanrest {

using NodeId = std::size_t;

// A prefix message sequence chart: event nodes with per-process total
// orders and a FIFO send/receive matching. The matching is never supplied
// by callers; it is derived per channel (n-th send pairs with n-th
// receive), which is the only matching a FIFO-respecting chart can have.
// Construction rejects label mismatches, receives without a send, and a
// cyclic induced order.
class PrefixMsc {
public:
    PrefixMsc() = default;

    // Builds a chart from one event row per process (the row is that
    // process's total order). Node ids are assigned row-major.
    static PrefixMsc from_rows(const std::vector<std::pair<ProcessId, std::vector<Event>>>& rows) {
        std::vector<Event> labels;
        std::vector<std::pair<ProcessId, std::vector<NodeId>>> id_rows;
        for (const auto& [p, events] : rows) {
            std::vector<NodeId> ids;
            ids.reserve(events.size());
            for (const auto& e : events) {
                if (e.actor != p) {
                    throw validation_error("event " + e.to_string() + " listed under process " +
                                           p.name);
                }
                ids.push_back(labels.size());
                labels.push_back(e);
            }
            id_rows.emplace_back(p, std::move(ids));
        }
        return build(std::move(labels), std::move(id_rows));
    }

    static PrefixMsc empty() { return PrefixMsc(); }

    std::size_t node_count() const { return labels_.size(); }
    const Event& label(NodeId n) const {
        check_node(n);
        return labels_[n];
    }
    const ProcessId& proc(NodeId n) const {
        check_node(n);
        return labels_[n].actor;
    }

    // f: send node -> receive node, absent for unmatched sends.
    std::optional<NodeId> match_of(NodeId send) const {
        check_node(send);
        return match_[send];
    }
    std::optional<NodeId> matched_by(NodeId recv) const {
        check_node(recv);
        return matched_by_[recv];
    }

    // Declared processes in name order (idle processes included).
    const std::vector<ProcessId>& processes() const { return process_names_; }
    const std::vector<NodeId>& process_row(const ProcessId& p) const {
        auto it = rows_.find(p);
        if (it == rows_.end()) {
            throw validation_error("unknown process: " + p.name);
        }
        return it->second;
    }
    bool has_process(const ProcessId& p) const { return rows_.count(p) > 0; }

    std::size_t send_count() const { return send_count_; }
    bool complete() const { return complete_; }

    const std::vector<NodeId>& immediate_predecessors(NodeId n) const {
        check_node(n);
        return preds_[n];
    }
    const std::vector<NodeId>& immediate_successors(NodeId n) const {
        check_node(n);
        return succs_[n];
    }

    // Reflexive-transitive reachability through process orders and
    // send-to-receive edges.
    bool happens_before(NodeId a, NodeId b) const {
        check_node(a);
        check_node(b);
        return (reach_[a][b >> 6] >> (b & 63)) & 1;
    }

    // Per-process label rows keyed by process name; empty rows dropped.
    // Two FIFO charts are isomorphic exactly when these agree, because the
    // rows fix the matching.
    std::map<ProcessId, std::vector<Event>> canonical_rows() const {
        std::map<ProcessId, std::vector<Event>> out;
        for (const auto& [p, row] : rows_) {
            if (row.empty()) continue;
            auto& v = out[p];
            v.reserve(row.size());
            for (NodeId n : row) v.push_back(labels_[n]);
        }
        return out;
    }

private:
    friend PrefixMsc msc_of(std::span<const Event>);

    static PrefixMsc build(std::vector<Event> labels,
                           std::vector<std::pair<ProcessId, std::vector<NodeId>>> id_rows) {
        PrefixMsc m;
        m.labels_ = std::move(labels);
        const std::size_t n = m.labels_.size();
        m.match_.assign(n, std::nullopt);
        m.matched_by_.assign(n, std::nullopt);
        m.preds_.assign(n, {});
        m.succs_.assign(n, {});

        for (auto& [p, row] : id_rows) {
            if (m.rows_.count(p)) {
                throw validation_error("duplicate process row: " + p.name);
            }
            m.rows_.emplace(p, std::move(row));
        }
        for (const auto& [p, row] : m.rows_) m.process_names_.push_back(p);

        // FIFO matching per channel, with the label consistency check. A
        // channel's sends all live in the sender's row and its receives in
        // the receiver's row, so the row orders fix the pairing.
        std::map<Channel, std::vector<NodeId>> channel_sends, channel_recvs;
        for (const auto& [p, row] : m.rows_) {
            for (NodeId node : row) {
                const Event& e = m.labels_[node];
                if (e.is_send()) {
                    ++m.send_count_;
                    channel_sends[e.channel()].push_back(node);
                } else {
                    channel_recvs[e.channel()].push_back(node);
                }
            }
        }
        std::size_t matched = 0;
        for (const auto& [c, recvs] : channel_recvs) {
            const auto& sends = channel_sends[c];
            if (recvs.size() > sends.size()) {
                throw validation_error("receive " + m.labels_[recvs[sends.size()]].to_string() +
                                       " has no matching send on its channel");
            }
            for (std::size_t i = 0; i < recvs.size(); ++i) {
                if (m.labels_[sends[i]].msg != m.labels_[recvs[i]].msg) {
                    throw validation_error("channel label mismatch: send " +
                                           m.labels_[sends[i]].to_string() + " vs receive " +
                                           m.labels_[recvs[i]].to_string());
                }
                m.match_[sends[i]] = recvs[i];
                m.matched_by_[recvs[i]] = sends[i];
                ++matched;
            }
        }
        m.complete_ = matched == m.send_count_;

        // Immediate order edges: row successors plus send -> receive.
        for (const auto& [p, row] : m.rows_) {
            for (std::size_t i = 0; i + 1 < row.size(); ++i) {
                m.preds_[row[i + 1]].push_back(row[i]);
                m.succs_[row[i]].push_back(row[i + 1]);
            }
        }
        for (NodeId s = 0; s < n; ++s) {
            if (m.match_[s]) {
                m.preds_[*m.match_[s]].push_back(s);
                m.succs_[s].push_back(*m.match_[s]);
            }
        }

        m.finish_order();
        return m;
    }

    void finish_order() {
        const std::size_t n = labels_.size();
        // Topological order; a leftover node means the induced order is cyclic.
        std::vector<std::size_t> indeg(n, 0);
        for (NodeId v = 0; v < n; ++v) indeg[v] = preds_[v].size();
        std::vector<NodeId> order;
        order.reserve(n);
        std::vector<NodeId> stack;
        for (NodeId v = 0; v < n; ++v) {
            if (indeg[v] == 0) stack.push_back(v);
        }
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (NodeId s : succs_[v]) {
                if (--indeg[s] == 0) stack.push_back(s);
            }
        }
        if (order.size() != n) {
            throw validation_error("induced happens-before order has a cycle");
        }
        topo_order_ = order;

        const std::size_t words = (n + 63) / 64;
        reach_.assign(n, std::vector<std::uint64_t>(words, 0));
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId v = *it;
            reach_[v][v >> 6] |= std::uint64_t(1) << (v & 63);
            for (NodeId s : succs_[v]) {
                for (std::size_t wi = 0; wi < words; ++wi) reach_[v][wi] |= reach_[s][wi];
            }
        }
    }

    void check_node(NodeId n) const {
        if (n >= labels_.size()) {
            throw validation_error("unknown node id " + std::to_string(n));
        }
    }

    std::vector<Event> labels_;
    std::vector<std::optional<NodeId>> match_;
    std::vector<std::optional<NodeId>> matched_by_;
    std::map<ProcessId, std::vector<NodeId>> rows_;
    std::vector<ProcessId> process_names_;
    std::vector<std::vector<NodeId>> preds_;
    std::vector<std::vector<NodeId>> succs_;
    std::vector<std::vector<std::uint64_t>> reach_;
    std::vector<NodeId> topo_order_;
    std::size_t send_count_ = 0;
    bool complete_ = true;
};

// A finite chart whose matching is total.
class Bmsc {
public:
    Bmsc() : msc_(PrefixMsc::empty()) {}
    explicit Bmsc(PrefixMsc m) : msc_(std::move(m)) {
        if (!msc_.complete()) {
            throw validation_error("chart has unmatched sends, not a basic MSC");
        }
    }
    const PrefixMsc& msc() const { return msc_; }

private:
    PrefixMsc msc_;
};

// The unique chart a channel-compliant word linearizes: one node per
// trace position, per-process rows are the projections, matching is the
// FIFO matching of the word.
inline PrefixMsc msc_of(std::span<const Event> w) {
    require_channel_compliant(w, "msc_of");
    std::vector<Event> labels(w.begin(), w.end());
    std::map<ProcessId, std::vector<NodeId>> rows;
    for (std::size_t i = 0; i < w.size(); ++i) rows[w[i].actor].push_back(i);
    std::vector<std::pair<ProcessId, std::vector<NodeId>>> id_rows(rows.begin(), rows.end());
    return PrefixMsc::build(std::move(labels), std::move(id_rows));
}

inline PrefixMsc msc_of(const Trace& w) { return msc_of(std::span<const Event>(w)); }

inline bool isomorphic(const PrefixMsc& a, const PrefixMsc& b) {
    return a.canonical_rows() == b.canonical_rows();
}

// Sequential composition: every node of `a` precedes every node of `b` on
// the same process; other interleavings stay free. The first operand must
// be complete so the combined chart still respects FIFO order.
inline PrefixMsc concat(const PrefixMsc& a, const PrefixMsc& b) {
    if (!a.complete()) {
        throw validation_error("concat: left operand must be a complete chart");
    }
    std::map<ProcessId, std::vector<Event>> rows;
    for (const auto& p : a.processes()) {
        auto& v = rows[p];
        for (NodeId n : a.process_row(p)) v.push_back(a.label(n));
    }
    for (const auto& p : b.processes()) {
        auto& v = rows[p];
        for (NodeId n : b.process_row(p)) v.push_back(b.label(n));
    }
    std::vector<std::pair<ProcessId, std::vector<Event>>> row_list(rows.begin(), rows.end());
    return PrefixMsc::from_rows(row_list);
}

inline Bmsc concat(const Bmsc& a, const Bmsc& b) { return Bmsc(concat(a.msc(), b.msc())); }

// Enumerates linearizations as node orders, lowest enabled node first.
// The callback gets each complete order and returns false to stop.
// Returns false when the callback stopped the enumeration.
template <typename Fn>
bool enumerate_linearizations(const PrefixMsc& m, Fn&& fn) {
    const std::size_t n = m.node_count();
    std::vector<std::size_t> indeg(n, 0);
    for (NodeId v = 0; v < n; ++v) indeg[v] = m.immediate_predecessors(v).size();
    std::vector<bool> taken(n, false);
    std::vector<NodeId> order;
    order.reserve(n);

    auto rec = [&](auto&& self) -> bool {
        if (order.size() == n) {
            return fn(std::span<const NodeId>(order));
        }
        for (NodeId v = 0; v < n; ++v) {
            if (taken[v] || indeg[v] != 0) continue;
            taken[v] = true;
            order.push_back(v);
            for (NodeId s : m.immediate_successors(v)) --indeg[s];
            bool keep = self(self);
            for (NodeId s : m.immediate_successors(v)) ++indeg[s];
            order.pop_back();
            taken[v] = false;
            if (!keep) return false;
        }
        return true;
    };
    return rec(rec);
}

inline Trace linearization_labels(const PrefixMsc& m, std::span<const NodeId> order) {
    Trace w;
    w.reserve(order.size());
    for (NodeId v : order) w.push_back(m.label(v));
    return w;
}

inline std::vector<Trace> all_linearizations(const PrefixMsc& m) {
    std::vector<Trace> out;
    enumerate_linearizations(m, [&](std::span<const NodeId> order) {
        out.push_back(linearization_labels(m, order));
        return true;
    });
    return out;
}

inline std::size_t count_linearizations(const PrefixMsc& m, std::size_t limit = SIZE_MAX) {
    std::size_t count = 0;
    enumerate_linearizations(m, [&](std::span<const NodeId>) { return ++count < limit; });
    return count;
}

// Checks whether w consumes an initial part of m event by event: each event
// must be the next node of its process with every predecessor consumed.
// With require_all set, the whole chart must be consumed, i.e. w is a
// linearization of m.
inline bool is_linearization_impl(const PrefixMsc& m, std::span<const Event> w, bool require_all) {
    std::map<ProcessId, std::size_t> cursor;
    std::vector<bool> consumed(m.node_count(), false);
    std::size_t total = 0;
    for (const auto& e : w) {
        if (!m.has_process(e.actor)) return false;
        const auto& row = m.process_row(e.actor);
        std::size_t& cur = cursor[e.actor];
        if (cur >= row.size()) return false;
        NodeId node = row[cur];
        if (m.label(node) != e) return false;
        for (NodeId p : m.immediate_predecessors(node)) {
            if (!consumed[p]) return false;
        }
        consumed[node] = true;
        ++cur;
        ++total;
    }
    return !require_all || total == m.node_count();
}

inline bool is_linearization(const PrefixMsc& m, std::span<const Event> w) {
    return is_linearization_impl(m, w, true);
}

inline bool is_linearization_prefix(const PrefixMsc& m, std::span<const Event> w) {
    return is_linearization_impl(m, w, false);
}

// Same-channel sends ordered by happens-before must have their receives in
// the same order, unless the later send is unmatched. On FIFO charts the
// matching of any linearization is the chart's own matching, so the
// witness linearization quantifier reduces to this per-channel check.
inline bool satisfies_causal_delivery(const PrefixMsc& m) {
    std::map<Channel, std::vector<NodeId>> sends;
    for (NodeId v = 0; v < m.node_count(); ++v) {
        if (m.label(v).is_send()) sends[m.label(v).channel()].push_back(v);
    }
    for (auto& [c, vs] : sends) {
        // Same-channel sends share a process, so row position decides the order.
        std::sort(vs.begin(), vs.end(), [&](NodeId a, NodeId b) { return m.happens_before(a, b); });
        for (std::size_t i = 0; i < vs.size(); ++i) {
            for (std::size_t j = i + 1; j < vs.size(); ++j) {
                auto rj = m.match_of(vs[j]);
                if (!rj) continue;
                auto ri = m.match_of(vs[i]);
                if (!ri || !m.happens_before(*ri, *rj)) return false;
            }
        }
    }
    return true;
}

} // namespace chanrest
