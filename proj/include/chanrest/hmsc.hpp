#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/msc.hpp"
#include "chanrest/restrictions.hpp"
#include "chanrest/trace_ops.hpp"

namespace chanrest {

using VertexId = std::size_t;

// A graph over complete finite charts: one chart per vertex, one initial
// vertex, a set of terminal vertices. Its words are linearizations of the
// chart concatenations along maximal initial paths.
class Hmsc {
public:
    VertexId add_vertex(std::string name, std::shared_ptr<const Bmsc> chart) {
        if (!chart) throw validation_error("vertex chart must not be null");
        if (name.empty()) name = "v" + std::to_string(names_.size());
        for (const auto& existing : names_) {
            if (existing == name) throw validation_error("duplicate vertex name: " + name);
        }
        names_.push_back(std::move(name));
        charts_.push_back(std::move(chart));
        succ_.emplace_back();
        return names_.size() - 1;
    }

    VertexId add_vertex(std::string name, Bmsc chart) {
        return add_vertex(std::move(name), std::make_shared<const Bmsc>(std::move(chart)));
    }

    void add_edge(VertexId from, VertexId to) {
        check_vertex(from);
        check_vertex(to);
        if (std::find(succ_[from].begin(), succ_[from].end(), to) == succ_[from].end()) {
            succ_[from].push_back(to);
        }
    }

    void set_initial(VertexId v) {
        check_vertex(v);
        initial_ = v;
    }
    void add_terminal(VertexId v) {
        check_vertex(v);
        terminals_.insert(v);
    }

    std::size_t vertex_count() const { return names_.size(); }
    VertexId initial() const { return initial_; }
    const std::set<VertexId>& terminals() const { return terminals_; }
    bool is_terminal(VertexId v) const { return terminals_.count(v) > 0; }
    const std::string& vertex_name(VertexId v) const {
        check_vertex(v);
        return names_[v];
    }
    const Bmsc& chart(VertexId v) const {
        check_vertex(v);
        return *charts_[v];
    }
    const std::vector<VertexId>& successors(VertexId v) const {
        check_vertex(v);
        return succ_[v];
    }

    std::optional<VertexId> find_vertex(const std::string& name) const {
        for (VertexId v = 0; v < names_.size(); ++v) {
            if (names_[v] == name) return v;
        }
        return std::nullopt;
    }

private:
    void check_vertex(VertexId v) const {
        if (v >= names_.size()) {
            throw validation_error("unknown vertex id " + std::to_string(v));
        }
    }

    std::vector<std::string> names_;
    std::vector<std::shared_ptr<const Bmsc>> charts_;
    std::vector<std::vector<VertexId>> succ_;
    VertexId initial_ = 0;
    std::set<VertexId> terminals_;
};

// Structural diagnostics: every vertex must be reachable from the initial
// vertex and every vertex must have some maximal continuation, i.e. reach
// a terminal vertex or a cycle.
inline std::vector<std::string> validate(const Hmsc& h) {
    std::vector<std::string> diags;
    const std::size_t n = h.vertex_count();
    if (n == 0) {
        diags.push_back("graph has no vertices");
        return diags;
    }

    std::vector<bool> reachable(n, false);
    std::vector<VertexId> stack{h.initial()};
    reachable[h.initial()] = true;
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (VertexId s : h.successors(v)) {
            if (!reachable[s]) {
                reachable[s] = true;
                stack.push_back(s);
            }
        }
    }
    for (VertexId v = 0; v < n; ++v) {
        if (!reachable[v]) {
            diags.push_back("vertex '" + h.vertex_name(v) + "' is unreachable from the initial vertex");
        }
    }

    // A vertex lies on a cycle iff it reaches itself through at least one edge.
    std::vector<bool> on_cycle(n, false);
    for (VertexId v = 0; v < n; ++v) {
        std::vector<bool> seen(n, false);
        std::vector<VertexId> st(h.successors(v).begin(), h.successors(v).end());
        while (!st.empty()) {
            VertexId u = st.back();
            st.pop_back();
            if (u == v) {
                on_cycle[v] = true;
                break;
            }
            if (seen[u]) continue;
            seen[u] = true;
            for (VertexId s : h.successors(u)) st.push_back(s);
        }
    }

    // Backwards closure of "is terminal or on a cycle".
    std::vector<bool> completable(n, false);
    for (VertexId v = 0; v < n; ++v) completable[v] = h.is_terminal(v) || on_cycle[v];
    bool changed = true;
    while (changed) {
        changed = false;
        for (VertexId v = 0; v < n; ++v) {
            if (completable[v]) continue;
            for (VertexId s : h.successors(v)) {
                if (completable[s]) {
                    completable[v] = true;
                    changed = true;
                    break;
                }
            }
        }
    }
    for (VertexId v = 0; v < n; ++v) {
        if (reachable[v] && !completable[v]) {
            diags.push_back("vertex '" + h.vertex_name(v) +
                            "' cannot be completed to a maximal path (no terminal or cycle ahead)");
        }
    }
    return diags;
}

inline void require_valid(const Hmsc& h, const char* op) {
    auto diags = validate(h);
    if (!diags.empty()) {
        throw validation_error(std::string(op) + ": " + diags.front());
    }
}

struct HmscPath {
    std::vector<VertexId> vertices;
    // True when the path ends at a terminal vertex; false marks a path cut
    // off at the length bound that stands in for its longer continuations.
    bool complete = false;
};

// Enumerates initial paths: every path ending at a terminal vertex within
// the bound, plus every continuable path of exactly the bound length,
// flagged as truncated. The callback returns false to stop.
template <typename Fn>
bool enumerate_initial_paths(const Hmsc& h, std::size_t max_len, Fn&& fn) {
    if (max_len == 0) return true;
    std::vector<VertexId> path{h.initial()};

    auto rec = [&](auto&& self) -> bool {
        VertexId last = path.back();
        if (h.is_terminal(last)) {
            if (!fn(std::span<const VertexId>(path), true)) return false;
        }
        if (path.size() == max_len) {
            if (!h.successors(last).empty()) {
                if (!fn(std::span<const VertexId>(path), false)) return false;
            }
            return true;
        }
        for (VertexId s : h.successors(last)) {
            path.push_back(s);
            if (!self(self)) return false;
            path.pop_back();
        }
        return true;
    };
    return rec(rec);
}

inline std::vector<HmscPath> maximal_paths(const Hmsc& h, std::size_t max_len) {
    require_valid(h, "maximal_paths");
    std::vector<HmscPath> out;
    enumerate_initial_paths(h, max_len, [&](std::span<const VertexId> path, bool complete) {
        out.push_back(HmscPath{std::vector<VertexId>(path.begin(), path.end()), complete});
        return true;
    });
    return out;
}

// Left fold of chart concatenation along a path.
inline PrefixMsc path_msc(const Hmsc& h, std::span<const VertexId> path) {
    PrefixMsc acc = PrefixMsc::empty();
    for (VertexId v : path) acc = concat(acc, h.chart(v).msc());
    return acc;
}

enum class Membership { yes, no, unknown };

struct MemberVerdict {
    Membership verdict = Membership::no;
    std::optional<std::vector<VertexId>> path; // set for yes
};

namespace detail {

// Pruning state for membership: how much of each process projection of the
// word the current path's charts already account for.
struct RowCursor {
    std::map<ProcessId, Trace> projections;
    std::map<ProcessId, std::size_t> used;

    explicit RowCursor(std::span<const Event> w) {
        for (const auto& e : w) projections[e.actor].push_back(e);
    }

    // Tries to account for the chart's rows; returns consumed counts to
    // undo, or nullopt when some row leaves the word's projection.
    std::optional<std::map<ProcessId, std::size_t>> push(const PrefixMsc& m) {
        std::map<ProcessId, std::size_t> taken;
        for (const auto& p : m.processes()) {
            for (NodeId node : m.process_row(p)) {
                auto it = projections.find(p);
                std::size_t& cursor = used[p];
                if (it == projections.end() || cursor >= it->second.size() ||
                    it->second[cursor] != m.label(node)) {
                    for (const auto& [q, cnt] : taken) used[q] -= cnt;
                    return std::nullopt;
                }
                ++cursor;
                ++taken[p];
            }
        }
        return taken;
    }

    void pop(const std::map<ProcessId, std::size_t>& taken) {
        for (const auto& [p, cnt] : taken) used[p] -= cnt;
    }

    bool exhausted() const {
        for (const auto& [p, proj] : projections) {
            auto it = used.find(p);
            if ((it == used.end() ? 0 : it->second) != proj.size()) return false;
        }
        return true;
    }
};

} // namespace detail

// Bounded membership. Yes when w linearizes the chart of some terminal
// path within the bound. No is only reported when no continuable path at
// the bound is still compatible with w process-by-process, so a longer
// bound could never flip the verdict to yes; otherwise unknown.
inline MemberVerdict hmsc_member(const Hmsc& h, const Trace& w, std::size_t max_len) {
    require_channel_compliant(w, "hmsc_member");
    require_valid(h, "hmsc_member");

    detail::RowCursor cursor{std::span<const Event>(w)};
    std::vector<VertexId> path;
    std::optional<std::vector<VertexId>> found;
    bool horizon = false;

    auto rec = [&](auto&& self, VertexId v) -> bool {
        auto taken = cursor.push(h.chart(v).msc());
        if (!taken) return true; // not compatible, prune
        path.push_back(v);
        if (h.is_terminal(v) && cursor.exhausted() && is_linearization(path_msc(h, path), w)) {
            found = path;
        } else if (path.size() >= max_len) {
            if (!h.successors(v).empty()) horizon = true;
        } else {
            for (VertexId s : h.successors(v)) {
                if (!self(self, s)) break;
            }
        }
        path.pop_back();
        cursor.pop(*taken);
        return !found.has_value();
    };
    rec(rec, h.initial());

    if (found) return MemberVerdict{Membership::yes, found};
    if (horizon) return MemberVerdict{Membership::unknown, std::nullopt};
    return MemberVerdict{Membership::no, std::nullopt};
}

// Every chart of the graph must decompose, and the bound for the whole
// language is the worst vertex; absent when some vertex has no
// decomposition at any size.
inline std::optional<std::size_t> hmsc_least_k(const Hmsc& h,
                                               std::size_t node_limit = kDefaultNodeLimit) {
    require_valid(h, "hmsc_least_k");
    std::size_t best = 1;
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        auto k = least_k(h.chart(v).msc(), node_limit);
        if (!k) return std::nullopt;
        best = std::max(best, *k);
    }
    return best;
}

// Upper bound on the language's least channel bound: schedule each vertex
// chart within its own bound and the channels drain between vertices.
// Returns 0 when no vertex sends anything.
inline std::size_t hmsc_existential_bound(const Hmsc& h,
                                          std::size_t node_limit = kDefaultNodeLimit) {
    require_valid(h, "hmsc_existential_bound");
    std::size_t best = 0;
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        best = std::max(best, least_existential_bound(h.chart(v).msc(), node_limit));
    }
    return best;
}

// Opposite-direction traffic can only be simultaneously in flight inside a
// single vertex chart: charts are complete, so across vertices the earlier
// chart's receive precedes the later chart's send on the shared process.
// Hence the graph is half-duplex iff every vertex chart is.
inline bool hmsc_is_half_duplex(const Hmsc& h) {
    require_valid(h, "hmsc_is_half_duplex");
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        if (!is_half_duplex_msc(h.chart(v).msc())) return false;
    }
    return true;
}

struct SampledTrace {
    Trace trace;
    bool complete = false;

    auto operator<=>(const SampledTrace&) const = default;
};

struct SampleLimits {
    std::size_t max_traces = 200'000;
};

// Words of the graph up to the given bounds: all linearizations of
// terminal paths (complete), plus all prefixes of linearizations of
// truncated paths (flagged incomplete).
inline std::set<SampledTrace> language_sample(const Hmsc& h, std::size_t max_path_len,
                                              std::size_t max_trace_len,
                                              const SampleLimits& limits = {}) {
    require_valid(h, "language_sample");
    std::set<SampledTrace> out;
    auto guard = [&]() {
        if (out.size() > limits.max_traces) {
            throw resource_limit_error("language sample exceeded " +
                                       std::to_string(limits.max_traces) + " traces");
        }
    };

    enumerate_initial_paths(h, max_path_len, [&](std::span<const VertexId> path, bool complete) {
        PrefixMsc m = path_msc(h, path);
        if (complete && m.node_count() <= max_trace_len) {
            enumerate_linearizations(m, [&](std::span<const NodeId> order) {
                out.insert(SampledTrace{linearization_labels(m, order), true});
                guard();
                return true;
            });
        }
        if (!complete) {
            // Emit every down-closed order up to the length bound.
            const std::size_t n = m.node_count();
            std::vector<std::size_t> indeg(n, 0);
            for (NodeId v = 0; v < n; ++v) indeg[v] = m.immediate_predecessors(v).size();
            std::vector<bool> taken(n, false);
            Trace word;
            auto rec = [&](auto&& self) -> void {
                out.insert(SampledTrace{word, false});
                guard();
                if (word.size() == max_trace_len) return;
                for (NodeId v = 0; v < n; ++v) {
                    if (taken[v] || indeg[v] != 0) continue;
                    taken[v] = true;
                    word.push_back(m.label(v));
                    for (NodeId s : m.immediate_successors(v)) --indeg[s];
                    self(self);
                    for (NodeId s : m.immediate_successors(v)) ++indeg[s];
                    word.pop_back();
                    taken[v] = false;
                }
            };
            rec(rec);
        }
        return true;
    });
    return out;
}

// Complete finite words with at most max_events events. Assumes every
// cycle of the graph contributes at least one event, which holds for the
// graphs built from global types; the path-length guard stops runaway
// enumeration otherwise.
inline std::set<Trace> hmsc_finite_words_up_to(const Hmsc& h, std::size_t max_events) {
    require_valid(h, "hmsc_finite_words_up_to");
    std::set<Trace> out;
    const std::size_t path_guard = (max_events + 2) * std::max<std::size_t>(h.vertex_count(), 1);

    std::vector<VertexId> path;
    std::size_t events = 0;
    auto rec = [&](auto&& self, VertexId v) -> void {
        std::size_t added = h.chart(v).msc().node_count();
        if (events + added > max_events || path.size() >= path_guard) return;
        events += added;
        path.push_back(v);
        if (h.is_terminal(v)) {
            PrefixMsc m = path_msc(h, path);
            enumerate_linearizations(m, [&](std::span<const NodeId> order) {
                out.insert(linearization_labels(m, order));
                return true;
            });
        }
        for (VertexId s : h.successors(v)) self(self, s);
        path.pop_back();
        events -= added;
    };
    rec(rec, h.initial());
    return out;
}

} // namespace chanrest
