#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/fsm.hpp"
#include "chanrest/indist.hpp"
#include "chanrest/msc.hpp"
#include "chanrest/restrictions.hpp"
#include "chanrest/trace_ops.hpp"

namespace chanrest {

// One finite state machine per process over that process's own events,
// communicating through unbounded FIFO point-to-point channels.
class Csm {
public:
    void add_machine(ProcessId p, Fsm<Event> machine) {
        for (const auto& existing : procs_) {
            if (existing == p) throw validation_error("duplicate machine for " + p.name);
        }
        for (const auto& t : machine.all_transitions()) {
            if (t.letter && t.letter->actor != p) {
                throw validation_error("machine for " + p.name + " holds foreign event " +
                                       t.letter->to_string());
            }
        }
        if (machine.state_count() == 0) {
            throw validation_error("machine for " + p.name + " has no states");
        }
        procs_.push_back(std::move(p));
        machines_.push_back(std::move(machine));
    }

    std::size_t process_count() const { return procs_.size(); }
    const std::vector<ProcessId>& processes() const { return procs_; }
    const Fsm<Event>& machine(std::size_t idx) const { return machines_.at(idx); }
    const Fsm<Event>& machine(const ProcessId& p) const { return machines_.at(index_of(p)); }

    std::size_t index_of(const ProcessId& p) const {
        for (std::size_t i = 0; i < procs_.size(); ++i) {
            if (procs_[i] == p) return i;
        }
        throw validation_error("no machine for process " + p.name);
    }

    bool has_process(const ProcessId& p) const {
        return std::find(procs_.begin(), procs_.end(), p) != procs_.end();
    }

private:
    std::vector<ProcessId> procs_;
    std::vector<Fsm<Event>> machines_;
};

// Global state plus channel contents. Channels map only holds non-empty
// channels so that equal configurations compare equal.
struct Configuration {
    std::vector<StateId> states;
    std::map<Channel, std::vector<MessageLabel>> channels;

    bool operator==(const Configuration&) const = default;
    auto operator<=>(const Configuration&) const = default;
};

inline Configuration initial_configuration(const Csm& c) {
    Configuration conf;
    conf.states.reserve(c.process_count());
    for (std::size_t i = 0; i < c.process_count(); ++i) {
        conf.states.push_back(c.machine(i).initial());
    }
    return conf;
}

inline bool is_final_configuration(const Csm& c, const Configuration& conf) {
    if (!conf.channels.empty()) return false;
    for (std::size_t i = 0; i < c.process_count(); ++i) {
        if (!c.machine(i).is_final(conf.states[i])) return false;
    }
    return true;
}

namespace detail {

// Applies one transition of process `idx`; nullopt when the transition is
// not enabled (receive with the wrong head, or a send beyond the cap).
inline std::optional<Configuration> apply_transition(const Configuration& conf, std::size_t idx,
                                                     const Fsm<Event>::Transition& t,
                                                     std::size_t channel_cap) {
    Configuration next = conf;
    next.states[idx] = t.to;
    if (!t.letter) return next;
    const Event& e = *t.letter;
    Channel ch = e.channel();
    if (e.is_send()) {
        auto& content = next.channels[ch];
        if (channel_cap && content.size() + 1 > channel_cap) return std::nullopt;
        content.push_back(e.msg);
    } else {
        auto it = next.channels.find(ch);
        if (it == next.channels.end() || it->second.empty() || it->second.front() != e.msg) {
            return std::nullopt;
        }
        it->second.erase(it->second.begin());
        if (it->second.empty()) next.channels.erase(it);
    }
    return next;
}

struct Move {
    std::optional<Event> action; // nullopt for an epsilon step
    Configuration to;
};

// Enabled moves in a fixed deterministic order: per process, epsilon moves
// first, then events in their natural order.
inline std::vector<Move> enabled_moves(const Csm& c, const Configuration& conf,
                                       std::size_t channel_cap) {
    std::vector<Move> out;
    for (std::size_t i = 0; i < c.process_count(); ++i) {
        std::vector<Move> local;
        for (const auto& t : c.machine(i).transitions_from(conf.states[i])) {
            if (auto next = apply_transition(conf, i, t, channel_cap)) {
                local.push_back(Move{t.letter, std::move(*next)});
            }
        }
        std::sort(local.begin(), local.end(), [](const Move& a, const Move& b) {
            if (a.action.has_value() != b.action.has_value()) return !a.action.has_value();
            if (a.action != b.action) return a.action < b.action;
            return a.to < b.to;
        });
        out.insert(out.end(), std::make_move_iterator(local.begin()),
                   std::make_move_iterator(local.end()));
    }
    return out;
}

// True when the process has some transition enabled with unbounded
// channels; used to tell deadlocks from cap truncation.
inline bool any_enabled_uncapped(const Csm& c, const Configuration& conf) {
    for (std::size_t i = 0; i < c.process_count(); ++i) {
        for (const auto& t : c.machine(i).transitions_from(conf.states[i])) {
            if (apply_transition(conf, i, t, 0)) return true;
        }
    }
    return false;
}

} // namespace detail

// Applies the unique enabled transition for this event. Rejects a disabled
// action and refuses to guess between distinct nondeterministic outcomes.
inline Configuration step(const Csm& c, const Configuration& conf, const Event& e) {
    std::size_t idx = c.index_of(e.actor);
    std::vector<Configuration> results;
    for (const auto& t : c.machine(idx).transitions_from(conf.states[idx])) {
        if (t.letter && *t.letter == e) {
            if (auto next = detail::apply_transition(conf, idx, t, 0)) {
                if (std::find(results.begin(), results.end(), *next) == results.end()) {
                    results.push_back(std::move(*next));
                }
            }
        }
    }
    if (results.empty()) {
        throw disabled_action_error("action " + e.to_string() + " is not enabled");
    }
    if (results.size() > 1) {
        throw disabled_action_error("action " + e.to_string() +
                                    " is ambiguous in a nondeterministic machine");
    }
    return results.front();
}

inline Configuration step_epsilon(const Csm& c, const Configuration& conf, const ProcessId& p) {
    std::size_t idx = c.index_of(p);
    std::vector<Configuration> results;
    for (const auto& t : c.machine(idx).transitions_from(conf.states[idx])) {
        if (!t.letter) {
            if (auto next = detail::apply_transition(conf, idx, t, 0)) {
                if (std::find(results.begin(), results.end(), *next) == results.end()) {
                    results.push_back(std::move(*next));
                }
            }
        }
    }
    if (results.empty()) {
        throw disabled_action_error("no internal step enabled at " + p.name);
    }
    if (results.size() > 1) {
        throw disabled_action_error("internal step at " + p.name + " is ambiguous");
    }
    return results.front();
}

inline Configuration replay(const Csm& c, Configuration conf, const Trace& w) {
    for (const auto& e : w) conf = step(c, conf, e);
    return conf;
}

struct ExploreLimits {
    std::size_t depth = 16;
    std::size_t channel_cap = 8;
    std::size_t max_states = 1'000'000;
};

// Breadth-first configuration graph under a step and channel bound, with
// the lexicographically least shortest witness trace per configuration.
struct ConfigGraph {
    std::vector<Configuration> configs; // discovery order
    std::vector<std::size_t> depth;
    std::vector<Trace> witness;
    std::vector<std::vector<std::pair<std::optional<Event>, std::size_t>>> edges;
    bool frontier_truncated = false; // some run was cut off by depth or cap
};

inline ConfigGraph build_config_graph(const Csm& c, const ExploreLimits& limits) {
    ConfigGraph g;
    std::map<Configuration, std::size_t> index;
    auto intern = [&](const Configuration& conf) -> std::pair<std::size_t, bool> {
        auto it = index.find(conf);
        if (it != index.end()) return {it->second, false};
        if (g.configs.size() >= limits.max_states) {
            throw resource_limit_error("configuration budget of " +
                                       std::to_string(limits.max_states) + " exceeded");
        }
        std::size_t id = g.configs.size();
        index.emplace(conf, id);
        g.configs.push_back(conf);
        g.depth.push_back(0);
        g.witness.emplace_back();
        g.edges.emplace_back();
        return {id, true};
    };

    auto [root, fresh] = intern(initial_configuration(c));
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
        std::size_t id = queue.front();
        queue.pop_front();
        Configuration conf = g.configs[id];

        auto moves = detail::enabled_moves(c, conf, limits.channel_cap);
        if (moves.size() == 0 && detail::any_enabled_uncapped(c, conf)) {
            g.frontier_truncated = true;
        }
        if (g.depth[id] == limits.depth) {
            if (!moves.empty()) g.frontier_truncated = true;
            continue;
        }
        for (auto& move : moves) {
            auto [next, inserted] = intern(move.to);
            g.edges[id].push_back({move.action, next});
            if (inserted) {
                g.depth[next] = g.depth[id] + 1;
                g.witness[next] = g.witness[id];
                if (move.action) g.witness[next].push_back(*move.action);
                queue.push_back(next);
            }
        }
    }
    return g;
}

struct ExploreReport {
    std::size_t configurations = 0;
    bool frontier_truncated = false;
    std::set<Trace> maximal_traces;  // runs ending in a final configuration
    std::vector<Configuration> deadlocks; // non-final, nothing enabled
    std::set<Trace> frontier_prefixes;    // traces of runs cut off at the bounds
};

// Bounded reachability: configurations, deadlocks, maximal finite traces
// and the truncated frontier. Run enumeration walks distinct
// (configuration, trace) pairs, so epsilon cycles terminate.
inline ExploreReport explore(const Csm& c, const ExploreLimits& limits) {
    ExploreReport report;

    ConfigGraph graph = build_config_graph(c, limits);
    report.configurations = graph.configs.size();
    report.frontier_truncated = graph.frontier_truncated;
    for (const auto& conf : graph.configs) {
        if (!is_final_configuration(c, conf) && !detail::any_enabled_uncapped(c, conf)) {
            report.deadlocks.push_back(conf);
        }
    }

    std::set<std::pair<Configuration, Trace>> seen;
    std::size_t budget = limits.max_states;
    auto rec = [&](auto&& self, const Configuration& conf, Trace& trace,
                   std::size_t steps) -> void {
        if (is_final_configuration(c, conf)) report.maximal_traces.insert(trace);
        auto moves = detail::enabled_moves(c, conf, limits.channel_cap);
        if (steps == limits.depth ||
            (moves.empty() && detail::any_enabled_uncapped(c, conf))) {
            if (!moves.empty() || detail::any_enabled_uncapped(c, conf)) {
                report.frontier_prefixes.insert(trace);
            }
            return;
        }
        for (auto& move : moves) {
            if (move.action) trace.push_back(*move.action);
            if (seen.emplace(move.to, trace).second) {
                if (seen.size() > budget) {
                    throw resource_limit_error("run enumeration budget exceeded");
                }
                self(self, move.to, trace, steps + 1);
            }
            if (move.action) trace.pop_back();
        }
    };
    Trace trace;
    Configuration init = initial_configuration(c);
    seen.emplace(init, trace);
    rec(rec, init, trace, 0);
    return report;
}

// ---------------------------------------------------------------------------
// Verdicts.

struct Lasso {
    Trace stem;   // replayable from the initial configuration
    Trace cycle;  // replayable forever after the stem
    Channel growing;
};

struct Verdict {
    enum class Kind { violation_found, no_violation_within_bounds, divergence_certified };

    Kind kind = Kind::no_violation_within_bounds;
    Trace witness;                // violation_found
    std::optional<Lasso> lasso;   // divergence_certified
    std::size_t depth = 0;
    std::size_t channel_cap = 0;
    std::vector<std::string> notes; // heuristic observations, never verdict-bearing

    bool definitive() const { return kind != Kind::no_violation_within_bounds; }
};

inline const char* to_string(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::violation_found: return "violation-found";
        case Verdict::Kind::no_violation_within_bounds: return "no-violation-within-bounds";
        case Verdict::Kind::divergence_certified: return "divergence-certified";
    }
    return "?";
}

// Some reachable configuration has both directions of a process pair
// non-empty. Sound and complete for the explored region.
inline Verdict monitor_half_duplex(const Csm& c, const ExploreLimits& limits = {}) {
    ConfigGraph graph = build_config_graph(c, limits);
    Verdict v;
    v.depth = limits.depth;
    v.channel_cap = limits.channel_cap;
    for (std::size_t id = 0; id < graph.configs.size(); ++id) {
        for (const auto& [ch, content] : graph.configs[id].channels) {
            Channel reverse{ch.to, ch.from};
            auto it = graph.configs[id].channels.find(reverse);
            if (!content.empty() && it != graph.configs[id].channels.end() &&
                !it->second.empty() && ch.from < ch.to) {
                v.kind = Verdict::Kind::violation_found;
                v.witness = graph.witness[id];
                return v;
            }
        }
    }
    return v;
}

namespace detail {

// A channel can never be drained when its receiving machine owns no
// receive transition from that sender at all; any message pumped into it
// stays unmatched in every continuation.
inline bool receiver_never_receives(const Csm& c, const Channel& ch) {
    const Fsm<Event>& m = c.machine(ch.to);
    for (const auto& t : m.all_transitions()) {
        if (t.letter && t.letter->is_recv() && t.letter->peer == ch.from) return false;
    }
    return true;
}

// Searches for a pumping pair: configurations c1 -> c2 connected by a
// non-empty action sequence with equal global states, where every channel
// received from along the way is restored exactly and some never-receivable
// channel strictly grew. Replaying the sequence forever is then possible
// and floods that channel.
inline std::optional<std::pair<std::size_t, Lasso>> find_send_lasso(const Csm& c,
                                                                    const ConfigGraph& graph) {
    std::vector<Channel> undrainable;
    std::map<Channel, std::size_t> channel_bit;
    for (const auto& p : c.processes()) {
        for (const auto& q : c.processes()) {
            if (p == q) continue;
            Channel ch{p, q};
            channel_bit.emplace(ch, channel_bit.size());
            if (receiver_never_receives(c, ch)) undrainable.push_back(ch);
        }
    }
    if (undrainable.empty()) return std::nullopt;

    auto content_of = [](const Configuration& conf,
                         const Channel& ch) -> const std::vector<MessageLabel>* {
        static const std::vector<MessageLabel> kEmpty;
        auto it = conf.channels.find(ch);
        return it == conf.channels.end() ? &kEmpty : &it->second;
    };

    for (std::size_t start = 0; start < graph.configs.size(); ++start) {
        const Configuration& origin = graph.configs[start];
        // DFS over (configuration, set of channels received from so far):
        // the pumping condition depends only on that pair.
        std::set<std::pair<std::size_t, std::uint64_t>> visited;
        std::vector<std::optional<Event>> actions;
        auto rec = [&](auto&& self, std::size_t at,
                       std::uint64_t received_mask) -> std::optional<Lasso> {
            const Configuration& here = graph.configs[at];
            if (!actions.empty() && here.states == origin.states) {
                // Channels received from must be restored exactly; the rest
                // can only have been appended to along the way.
                bool restored = true;
                for (const auto& [ch, bit] : channel_bit) {
                    if ((received_mask >> bit) & 1) {
                        if (*content_of(here, ch) != *content_of(origin, ch)) {
                            restored = false;
                            break;
                        }
                    }
                }
                if (restored) {
                    for (const Channel& ch : undrainable) {
                        if (content_of(here, ch)->size() > content_of(origin, ch)->size()) {
                            Lasso lasso;
                            lasso.stem = graph.witness[start];
                            for (const auto& a : actions) {
                                if (a) lasso.cycle.push_back(*a);
                            }
                            lasso.growing = ch;
                            return lasso;
                        }
                    }
                }
            }
            for (const auto& [action, next] : graph.edges[at]) {
                std::uint64_t mask = received_mask;
                if (action && action->is_recv()) {
                    mask |= std::uint64_t(1) << channel_bit.at(action->channel());
                }
                if (!visited.emplace(next, mask).second) continue;
                actions.push_back(action);
                if (auto found = self(self, next, mask)) return found;
                actions.pop_back();
            }
            return std::nullopt;
        };
        if (auto found = rec(rec, start, 0)) return std::make_pair(start, *found);
    }
    return std::nullopt;
}

} // namespace detail

// Boundedness monitor. A send lasso over a never-receivable channel
// certifies that no bound fits the language. Otherwise the explored
// maximal finite traces are classified exactly and compared against B.
inline Verdict monitor_bound(const Csm& c, std::size_t B, const ExploreLimits& limits = {}) {
    detail::check_positive(B, "bound B");
    if (limits.channel_cap <= B) {
        throw validation_error("channel cap must exceed the bound under test");
    }
    Verdict v;
    v.depth = limits.depth;
    v.channel_cap = limits.channel_cap;

    ConfigGraph graph = build_config_graph(c, limits);
    if (auto lasso = detail::find_send_lasso(c, graph)) {
        v.kind = Verdict::Kind::divergence_certified;
        v.lasso = lasso->second;
        return v;
    }

    ExploreReport report = explore(c, limits);
    std::size_t worst = 0;
    Trace worst_trace;
    for (const auto& w : report.maximal_traces) {
        std::size_t bound = least_existential_bound(msc_of(w), 64);
        if (bound > worst) {
            worst = bound;
            worst_trace = w;
        }
    }
    if (worst > B) {
        v.kind = Verdict::Kind::violation_found;
        v.witness = worst_trace;
    }
    v.notes.push_back("max least bound over explored maximal traces: " + std::to_string(worst));
    return v;
}

// Synchronisability monitor: exact on explored maximal finite traces;
// truncated-frontier prefixes are only reported as heuristic notes because
// a prefix that fails to decompose says nothing definite about the full
// words extending it.
inline Verdict monitor_k_sync(const Csm& c, std::size_t k, const ExploreLimits& limits = {}) {
    detail::check_positive(k, "block size k");
    Verdict v;
    v.depth = limits.depth;
    v.channel_cap = limits.channel_cap;

    ExploreReport report = explore(c, limits);
    std::set<std::map<ProcessId, std::vector<Event>>> seen_charts;
    for (const auto& w : report.maximal_traces) {
        PrefixMsc m = msc_of(w);
        if (!seen_charts.insert(m.canonical_rows()).second) continue;
        if (!is_k_synchronous(m, k, 64)) {
            v.kind = Verdict::Kind::violation_found;
            v.witness = w;
            return v;
        }
    }
    std::size_t undecomposable_prefixes = 0;
    seen_charts.clear();
    for (const auto& w : report.frontier_prefixes) {
        PrefixMsc m = msc_of(w);
        if (!seen_charts.insert(m.canonical_rows()).second) continue;
        if (!is_k_synchronous(m, k, 64)) ++undecomposable_prefixes;
    }
    if (undecomposable_prefixes > 0) {
        v.notes.push_back("heuristic: " + std::to_string(undecomposable_prefixes) +
                          " truncated frontier prefixes have no " + std::to_string(k) +
                          "-exchange decomposition");
    }
    return v;
}

// ---------------------------------------------------------------------------
// Bounded language comparison against an event automaton.

struct EquivResult {
    bool agree = true;
    Trace counterexample;
    bool counterexample_in_csm = false; // else only in the automaton language
};

// Maximal finite traces with at most max_events events. Walks distinct
// (configuration, trace) pairs; channel growth is capped by the event
// budget itself.
inline std::set<Trace> bounded_maximal_traces(const Csm& c, std::size_t max_events,
                                              std::size_t max_visited = 1'000'000) {
    std::set<Trace> out;
    std::set<std::pair<Configuration, Trace>> seen;
    auto rec = [&](auto&& self, const Configuration& conf, Trace& trace) -> void {
        if (is_final_configuration(c, conf)) out.insert(trace);
        for (auto& move : detail::enabled_moves(c, conf, max_events)) {
            if (move.action && trace.size() == max_events) continue;
            if (move.action) trace.push_back(*move.action);
            if (seen.emplace(move.to, trace).second) {
                if (seen.size() > max_visited) {
                    throw resource_limit_error("trace enumeration budget exceeded");
                }
                self(self, move.to, trace);
            }
            if (move.action) trace.pop_back();
        }
    };
    Configuration init = initial_configuration(c);
    Trace trace;
    seen.emplace(init, trace);
    rec(rec, init, trace);
    return out;
}

// Compares the machine's maximal traces against the swap closure of the
// automaton's bounded language and reports the least discrepancy.
inline EquivResult bounded_equiv(const Csm& c, const Fsm<Event>& a, std::size_t max_len) {
    std::set<Trace> csm_words = bounded_maximal_traces(c, max_len);
    std::set<Trace> spec_words;
    {
        auto raw = bounded_language(a, max_len);
        spec_words = closure(std::set<Trace>(raw.begin(), raw.end()));
    }
    EquivResult r;
    for (const auto& w : csm_words) {
        if (!spec_words.count(w)) {
            r.agree = false;
            r.counterexample = w;
            r.counterexample_in_csm = true;
            return r;
        }
    }
    for (const auto& w : spec_words) {
        if (!csm_words.count(w)) {
            r.agree = false;
            r.counterexample = w;
            r.counterexample_in_csm = false;
            return r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Chart projection: each process follows its own row.

inline Csm project_to_csm(const Bmsc& b) {
    const PrefixMsc& m = b.msc();
    Csm c;
    for (const auto& p : m.processes()) {
        Fsm<Event> machine;
        StateId prev = machine.add_state(p.name + "0");
        machine.set_initial(prev);
        std::size_t i = 1;
        for (NodeId node : m.process_row(p)) {
            StateId next = machine.add_state(p.name + std::to_string(i++));
            machine.add_transition(prev, m.label(node), next);
            prev = next;
        }
        machine.add_final(prev);
        c.add_machine(p, std::move(machine));
    }
    return c;
}

} // namespace chanrest
