#pragma once

#include <random>
#include <string>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/msc.hpp"
#include "chanrest/mst.hpp"
#include "chanrest/trace_ops.hpp"

namespace chanrest {

// Reproducible generators for the property suites. All of them take the
// engine by reference so a fixed seed pins the whole sequence.

using Rng = std::mt19937_64;

namespace detail {

inline ProcessId nth_process(std::size_t i) {
    static const char* names[] = {"P", "Q", "R", "S", "T", "U"};
    return ProcessId{names[i % 6]};
}

inline MessageLabel nth_message(std::size_t i) {
    static const char* names[] = {"a", "b", "c", "d", "e", "f"};
    return MessageLabel{names[i % 6]};
}

inline std::size_t pick(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

} // namespace detail

struct TraceGenOptions {
    std::size_t process_count = 3;
    std::size_t message_count = 3;
    std::size_t target_events = 10;
    bool complete = false;           // drain all channels at the end
    double recv_bias = 0.5;          // preference for receives when available
    bool immediate_receives = false; // receive each message right after its send
};

// A channel-compliant trace built by simulating channels directly: sends
// are always allowed, receives pop the pending head of a channel.
inline Trace random_compliant_trace(Rng& rng, const TraceGenOptions& opts) {
    Trace w;
    std::map<Channel, std::vector<MessageLabel>> pending;
    auto pending_total = [&]() {
        std::size_t n = 0;
        for (const auto& [c, q] : pending) n += q.size();
        return n;
    };
    auto do_recv = [&]() {
        std::vector<Channel> ready;
        for (const auto& [c, q] : pending) {
            if (!q.empty()) ready.push_back(c);
        }
        if (ready.empty()) return false;
        Channel c = ready[detail::pick(rng, ready.size())];
        auto& q = pending[c];
        w.push_back(Event::recv(c.to, c.from, q.front()));
        q.erase(q.begin());
        return true;
    };

    while (w.size() < opts.target_events) {
        // In complete mode a send costs two events (itself plus the later
        // receive), so stop sending once one more pair would overshoot.
        bool draining =
            opts.complete && w.size() + pending_total() + 2 > opts.target_events;
        bool want_recv = draining || (pending_total() > 0 && detail::chance(rng, opts.recv_bias));
        if (want_recv && do_recv()) continue;
        if (draining) break; // nothing left to receive
        std::size_t from = detail::pick(rng, opts.process_count);
        std::size_t to = detail::pick(rng, opts.process_count - 1);
        if (to >= from) ++to;
        MessageLabel m = detail::nth_message(detail::pick(rng, opts.message_count));
        Channel c{detail::nth_process(from), detail::nth_process(to)};
        w.push_back(Event::send(c.from, c.to, m));
        pending[c].push_back(m);
        if (opts.immediate_receives) do_recv();
    }
    if (opts.complete) {
        while (do_recv()) {
        }
    }
    return w;
}

inline PrefixMsc random_prefix_msc(Rng& rng, const TraceGenOptions& opts) {
    return msc_of(random_compliant_trace(rng, opts));
}

inline Bmsc random_bmsc(Rng& rng, TraceGenOptions opts) {
    opts.complete = true;
    return Bmsc(msc_of(random_compliant_trace(rng, opts)));
}

struct HmscGenOptions {
    std::size_t max_vertices = 4;
    double empty_chart_prob = 0.15;
    double extra_edge_prob = 0.35;
    double extra_terminal_prob = 0.25;
    TraceGenOptions chart{.process_count = 3,
                          .message_count = 3,
                          .target_events = 5,
                          .complete = true,
                          .recv_bias = 0.6};
};

// A random graph over random complete charts: a spanning tree from the
// initial vertex keeps everything reachable, extra edges add joins and
// cycles, sinks are always terminal so every path can complete.
inline Hmsc random_hmsc(Rng& rng, const HmscGenOptions& opts) {
    Hmsc h;
    std::size_t n = 1 + detail::pick(rng, opts.max_vertices);
    for (std::size_t v = 0; v < n; ++v) {
        TraceGenOptions chart_opts = opts.chart;
        chart_opts.target_events = 1 + detail::pick(rng, std::max<std::size_t>(opts.chart.target_events, 1));
        Bmsc chart = detail::chance(rng, opts.empty_chart_prob)
                         ? Bmsc(PrefixMsc::empty())
                         : random_bmsc(rng, chart_opts);
        h.add_vertex("v" + std::to_string(v), std::move(chart));
    }
    for (std::size_t v = 1; v < n; ++v) {
        h.add_edge(detail::pick(rng, v), v);
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (detail::chance(rng, opts.extra_edge_prob / n)) h.add_edge(a, b);
        }
    }
    h.set_initial(0);
    for (std::size_t v = 0; v < n; ++v) {
        if (h.successors(v).empty() || detail::chance(rng, opts.extra_terminal_prob)) {
            h.add_terminal(v);
        }
    }
    return h;
}

struct GtGenOptions {
    std::size_t max_depth = 6;
    std::size_t max_branches = 3;
    std::size_t process_count = 4;
    std::size_t message_count = 4;
    double end_prob = 0.35;
    double var_prob = 0.35;
    double rec_prob = 0.25;
};

// A random well-formed global type: guarded recursion, distinct binders,
// sender-consistent choices with pairwise distinct branches, and at least
// one message overall.
inline GlobalType random_global_type(Rng& rng, const GtGenOptions& opts) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::size_t next_var = 0;
        bool has_message = false;

        // usable = bound and already guarded by some message.
        std::vector<std::pair<std::string, bool>> scope;
        auto gen = [&](auto&& self, std::size_t depth) -> std::string {
            std::vector<std::string> usable;
            for (const auto& [name, guarded] : scope) {
                if (guarded) usable.push_back(name);
            }
            if (depth == 0) {
                if (!usable.empty() && detail::chance(rng, 0.5)) {
                    return usable[detail::pick(rng, usable.size())];
                }
                return "0";
            }
            if (!usable.empty() && detail::chance(rng, opts.var_prob)) {
                return usable[detail::pick(rng, usable.size())];
            }
            if (detail::chance(rng, opts.end_prob)) return "0";
            if (detail::chance(rng, opts.rec_prob)) {
                std::string var = "t" + std::to_string(next_var++);
                scope.emplace_back(var, false);
                std::string body = self(self, depth - 1);
                scope.pop_back();
                return "mu " + var + ". " + body;
            }

            has_message = true;
            std::size_t sender = detail::pick(rng, opts.process_count);
            std::size_t branch_count = 1 + detail::pick(rng, opts.max_branches);
            std::vector<std::pair<std::size_t, std::size_t>> picked; // (receiver, msg)
            std::string out;
            for (std::size_t b = 0; b < branch_count; ++b) {
                std::size_t receiver, msg;
                bool fresh = false;
                for (int tries = 0; tries < 16 && !fresh; ++tries) {
                    receiver = detail::pick(rng, opts.process_count - 1);
                    if (receiver >= sender) ++receiver;
                    msg = detail::pick(rng, opts.message_count);
                    fresh = std::find(picked.begin(), picked.end(),
                                      std::make_pair(receiver, msg)) == picked.end();
                }
                if (!fresh) break;
                picked.emplace_back(receiver, msg);
                for (auto& [name, guarded] : scope) guarded = true;
                if (!out.empty()) out += " + ";
                out += detail::nth_process(sender).name + "->" +
                       detail::nth_process(receiver).name + ":" +
                       detail::nth_message(msg).name + "." + self(self, depth - 1);
            }
            return picked.size() > 1 ? "(" + out + ")" : out;
        };

        std::string text = gen(gen, opts.max_depth);
        if (!has_message) continue;
        try {
            return parse_global_type(text);
        } catch (const error&) {
            continue;
        }
    }
    throw resource_limit_error("could not generate a global type with a message");
}

} // namespace chanrest
