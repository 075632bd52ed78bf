// Acceptance suite: one self-contained check per criterion, each printing
// a single pass/fail line. Run with no argument for all criteria or with a
// criterion number. Exit code is the number of failed criteria.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chanrest/csm.hpp"
#include "chanrest/formats.hpp"
#include "chanrest/generate.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/indist.hpp"
#include "chanrest/mst.hpp"
#include "chanrest/restrictions.hpp"
#include "support/oracles.hpp"

using namespace chanrest;

namespace {

std::filesystem::path corpus(const std::string& name) {
    static const std::filesystem::path dir = [] {
        if (const char* env = std::getenv("CHANREST_CORPUS")) return std::filesystem::path(env);
        return std::filesystem::path(CHANREST_CORPUS_DIR);
    }();
    return dir / name;
}

struct Check {
    std::vector<std::string> failures;
    std::size_t checked = 0;

    void expect(bool ok, const std::string& what) {
        ++checked;
        if (!ok) failures.push_back(what);
    }
};

Trace tr(const std::string& text) { return parse_trace_text(text); }

// Complete words of a graph: all linearizations of terminal paths within
// the bounds, at most `per_path` linearizations per path.
std::vector<Trace> sample_complete_traces(const Hmsc& h, std::size_t max_path_len,
                                          std::size_t max_trace_len, std::size_t per_path) {
    std::vector<Trace> out;
    enumerate_initial_paths(h, max_path_len, [&](std::span<const VertexId> path, bool complete) {
        if (!complete) return true;
        PrefixMsc m = path_msc(h, path);
        if (m.node_count() > max_trace_len) return true;
        std::size_t taken = 0;
        enumerate_linearizations(m, [&](std::span<const NodeId> order) {
            out.push_back(linearization_labels(m, order));
            return ++taken < per_path;
        });
        return true;
    });
    return out;
}

// --------------------------------------------------------------------------

void criterion_1(Check& c) {
    auto check_chart = [&](const std::string& file, bool hd, std::size_t bound,
                           std::optional<std::size_t> k) {
        Classification got = classify(load_msc_file(corpus(file)));
        c.expect(got.half_duplex == hd, file + ": half-duplex");
        c.expect(got.least_existential_bound == bound, file + ": bound");
        c.expect(got.least_k == k, file + ": least k");
    };
    check_chart("m_cross.msc", false, 1, 2);
    check_chart("m_mixed.msc", false, 1, std::nullopt);
    check_chart("m_relay.msc", true, 1, std::nullopt);
    check_chart("m_ring.msc", true, 1, 3);
    PrefixMsc ring = load_msc_file(corpus("m_ring.msc"));
    c.expect(!is_k_synchronous(ring, 1), "m_ring: not 1-synchronous");
    c.expect(!is_k_synchronous(ring, 2), "m_ring: not 2-synchronous");

    Hmsc branch = load_hmsc_file(corpus("h_branch.hmsc"));
    c.expect(hmsc_is_half_duplex(branch), "h_branch: half-duplex");
    c.expect(hmsc_existential_bound(branch) == 1, "h_branch: bound 1");
    c.expect(hmsc_least_k(branch) == std::optional<std::size_t>{1}, "h_branch: least k 1");
}

void criterion_2(Check& c) {
    Rng rng(20250801);
    GtGenOptions opts;
    for (int i = 0; i < 200; ++i) {
        GlobalType g = random_global_type(rng, opts);
        Hmsc h = embed_hmsc(g);
        std::string tag = "type " + std::to_string(i);
        c.expect(hmsc_is_half_duplex(h), tag + ": embedded graph half-duplex");
        c.expect(hmsc_existential_bound(h) == 1, tag + ": embedded bound 1");
        c.expect(hmsc_least_k(h) == std::optional<std::size_t>{1}, tag + ": embedded least k 1");

        auto check_word = [&](const Trace& w, const std::string& which) {
            PrefixMsc m = msc_of(w);
            c.expect(is_half_duplex_trace(w), tag + ": " + which + " half-duplex");
            c.expect(is_existentially_B_bounded(m, 1), tag + ": " + which + " 1-bounded");
            c.expect(is_k_synchronous(m, 1), tag + ": " + which + " 1-synchronous");
        };
        for (const auto& word : bounded_language(build_event_automaton(g), 12)) {
            Trace w(word.begin(), word.end());
            check_word(w, "word");
            for (const auto& s : swap_neighbors(w)) check_word(s.result, "neighbor");
        }
    }
}

void criterion_3(Check& c) {
    Rng rng(20250801); // same seeded stream of types as criterion 2
    GtGenOptions opts;
    for (int i = 0; i < 200; ++i) {
        GlobalType g = random_global_type(rng, opts);
        Hmsc h = embed_hmsc(g);
        std::string tag = "type " + std::to_string(i);

        auto direct = bounded_language(build_event_automaton(g), 10);
        auto folded = bounded_language(expand(qopt(h)), 10);
        c.expect(direct == folded, tag + ": bounded languages of both machine routes");

        std::size_t member_bound = (h.vertex_count() + 1) * 7;
        for (const auto& word : direct) {
            Trace w(word.begin(), word.end());
            c.expect(hmsc_member(h, w, member_bound).verdict == Membership::yes,
                     tag + ": type word is a member of the embedded graph");
        }

        std::set<Trace> type_words;
        for (const auto& word : bounded_language(build_event_automaton(g), 8)) {
            type_words.insert(Trace(word.begin(), word.end()));
        }
        c.expect(closure(type_words) == hmsc_finite_words_up_to(h, 8),
                 tag + ": swap closure of the type language equals the graph language");

        c.expect(find_weak_bisimulation(build_sync_automaton(g), qopt(h)).has_value(),
                 tag + ": weak bisimulation witness");
    }
}

void criterion_4(Check& c) {
    Rng rng(20250804);
    HmscGenOptions opts;
    opts.max_vertices = 4;
    opts.chart.target_events = 4;
    opts.chart.immediate_receives = true; // bias towards one-exchange blocks
    std::size_t one_sync_seen = 0;
    std::size_t attempts = 0;
    while (one_sync_seen < 200 && attempts < 20000) {
        ++attempts;
        HmscGenOptions round = opts;
        round.chart.immediate_receives = attempts % 3 != 0;
        Hmsc h = random_hmsc(rng, round);
        auto k = hmsc_least_k(h);
        if (k != std::optional<std::size_t>{1}) continue;
        ++one_sync_seen;
        c.expect(hmsc_is_half_duplex(h),
                 "graph " + std::to_string(attempts) + ": 1-synchronisable implies half-duplex");
    }
    c.expect(one_sync_seen >= 200, "generated at least 200 1-synchronisable graphs");
}

void criterion_5(Check& c) {
    Rng rng(20250805);
    HmscGenOptions opts;
    opts.max_vertices = 3;
    opts.chart.target_events = 3;
    for (int i = 0; i < 200; ++i) {
        Hmsc h = random_hmsc(rng, opts);
        std::size_t bound = hmsc_existential_bound(h);
        if (bound == 0) {
            // Nothing is ever sent; every word is trivially fine.
            continue;
        }
        for (const auto& w : sample_complete_traces(h, 4, 20, 200)) {
            c.expect(is_existentially_B_bounded(msc_of(w), bound, 64),
                     "graph " + std::to_string(i) + ": sampled word within the graph bound");
        }
    }
}

void criterion_6(Check& c) {
    Rng rng(20250806);
    TraceGenOptions opts;
    opts.target_events = 12;
    for (int i = 0; i < 1000; ++i) {
        opts.complete = i % 2 == 0;
        Trace w = random_compliant_trace(rng, opts);
        PrefixMsc m = msc_of(w);
        bool hd = is_half_duplex_trace(w);
        std::size_t bound = least_existential_bound(m);
        auto k = least_k(m);
        std::string tag = "trace " + std::to_string(i);
        for (const auto& s : swap_neighbors(w)) {
            PrefixMsc m2 = msc_of(s.result);
            c.expect(isomorphic(m, m2), tag + ": chart preserved under swap");
            c.expect(is_half_duplex_trace(s.result) == hd, tag + ": half-duplex preserved");
            c.expect(least_existential_bound(m2) == bound, tag + ": least bound preserved");
            c.expect(least_k(m2) == k, tag + ": least k preserved");
        }
    }
}

void criterion_7(Check& c) {
    Rng rng(20250807);
    TraceGenOptions chart_opts;
    chart_opts.target_events = 10;
    for (int i = 0; i < 500; ++i) {
        chart_opts.complete = i % 2 == 0;
        PrefixMsc m = random_prefix_msc(rng, chart_opts);
        c.expect(satisfies_causal_delivery(m),
                 "chart " + std::to_string(i) + ": causal delivery");
    }
    TraceGenOptions trace_opts;
    trace_opts.target_events = 12;
    for (int i = 0; i < 500; ++i) {
        Trace w = random_compliant_trace(rng, trace_opts);
        c.expect(satisfies_causal_delivery(msc_of(w)),
                 "trace " + std::to_string(i) + ": causal delivery of its chart");
    }
}

void criterion_8(Check& c) {
    Rng rng(20250808);
    TraceGenOptions opts;
    opts.process_count = 3;
    opts.target_events = 8;
    for (int i = 0; i < 1000; ++i) {
        opts.complete = i % 2 == 0;
        PrefixMsc m = random_prefix_msc(rng, opts);
        std::string tag = "chart " + std::to_string(i);
        c.expect(is_half_duplex_msc(m) == testing::oracle_msc_half_duplex(m),
                 tag + ": half-duplex pair test vs brute force");
        for (std::size_t B = 1; B <= 3; ++B) {
            c.expect(is_existentially_B_bounded(m, B) == testing::oracle_exists_B_bounded(m, B),
                     tag + ": cut search vs brute force at bound " + std::to_string(B));
        }
        for (std::size_t k = 1; k <= 3; ++k) {
            c.expect(is_k_synchronous(m, k) == testing::oracle_k_synchronous(m, k),
                     tag + ": block search vs brute force at k " + std::to_string(k));
        }
    }
}

void criterion_9(Check& c) {
    ExploreLimits limits;
    limits.depth = 20;
    limits.channel_cap = 8;

    Csm flood = load_csm_file(corpus("csm_flood.csm"));
    Verdict hd = monitor_half_duplex(flood, limits);
    c.expect(hd.kind == Verdict::Kind::violation_found, "flood: half-duplex violation");
    c.expect(hd.witness.size() == 2, "flood: violation witness has two events");
    c.expect(monitor_bound(flood, 1, limits).kind == Verdict::Kind::divergence_certified,
             "flood: divergence certificate");
    c.expect(monitor_k_sync(flood, 1, limits).kind == Verdict::Kind::no_violation_within_bounds,
             "flood: 1-synchronisability monitor clean to depth 20");

    Csm half = load_csm_file(corpus("csm_flood_half.csm"));
    c.expect(monitor_half_duplex(half, limits).kind == Verdict::Kind::no_violation_within_bounds,
             "one-sided flood: no half-duplex violation to depth 20");
    c.expect(monitor_bound(half, 1, limits).kind == Verdict::Kind::divergence_certified,
             "one-sided flood: divergence certificate");
}

void criterion_10(Check& c) {
    Csm machines = load_csm_file(corpus("csm_list.csm"));
    GlobalType g = load_global_type_file(corpus("g_list.gt"));
    Hmsc graph = load_hmsc_file(corpus("h_list.hmsc"));

    c.expect(bounded_equiv(machines, build_event_automaton(g), 12).agree,
             "list: machine and type agree on words up to 12");

    ExploreLimits limits;
    limits.depth = 14;
    limits.channel_cap = 6;
    c.expect(monitor_half_duplex(machines, limits).kind ==
                 Verdict::Kind::no_violation_within_bounds,
             "list machines: half-duplex");
    c.expect(monitor_bound(machines, 1, limits).kind ==
                 Verdict::Kind::no_violation_within_bounds,
             "list machines: within bound 1");
    c.expect(monitor_k_sync(machines, 1, limits).kind ==
                 Verdict::Kind::no_violation_within_bounds,
             "list machines: 1-synchronisable on explored words");

    c.expect(hmsc_is_half_duplex(graph), "list graph: half-duplex");
    c.expect(hmsc_existential_bound(graph) == 1, "list graph: bound 1");
    c.expect(hmsc_least_k(graph) == std::optional<std::size_t>{1}, "list graph: least k 1");

    Hmsc embedded = embed_hmsc(g);
    c.expect(hmsc_is_half_duplex(embedded), "list type: half-duplex");
    c.expect(hmsc_existential_bound(embedded) == 1, "list type: bound 1");
    c.expect(hmsc_least_k(embedded) == std::optional<std::size_t>{1}, "list type: least k 1");

    auto maximal = bounded_maximal_traces(machines, 12);
    c.expect(!maximal.empty(), "list machines: some maximal trace within 12 events");
    for (const auto& w : maximal) {
        for (const auto& s : swap_neighbors(w)) {
            c.expect(maximal.count(s.result) == 1,
                     "list machines: swap neighbor of a maximal trace stays maximal");
        }
    }
}

void criterion_11(Check& c) {
    ExploreLimits limits;
    limits.depth = 16;
    limits.channel_cap = 8;

    auto project = [&](const std::string& file) {
        return project_to_csm(Bmsc(load_msc_file(corpus(file))));
    };

    Csm cross = project("m_cross.msc");
    c.expect(monitor_half_duplex(cross, limits).kind == Verdict::Kind::violation_found,
             "crossing projection: half-duplex violation");
    c.expect(monitor_bound(cross, 1, limits).kind == Verdict::Kind::no_violation_within_bounds,
             "crossing projection: within bound 1");
    c.expect(monitor_k_sync(cross, 1, limits).kind == Verdict::Kind::violation_found,
             "crossing projection: not 1-synchronisable");
    c.expect(monitor_k_sync(cross, 2, limits).kind == Verdict::Kind::no_violation_within_bounds,
             "crossing projection: 2-synchronisable");

    Csm mixed = project("m_mixed.msc");
    c.expect(monitor_half_duplex(mixed, limits).kind == Verdict::Kind::violation_found,
             "mixed projection: half-duplex violation");
    c.expect(monitor_bound(mixed, 1, limits).kind == Verdict::Kind::no_violation_within_bounds,
             "mixed projection: within bound 1");
    for (std::size_t k = 1; k <= 4; ++k) {
        c.expect(monitor_k_sync(mixed, k, limits).kind == Verdict::Kind::violation_found,
                 "mixed projection: no decomposition at k " + std::to_string(k));
    }

    Csm relay = project("m_relay.msc");
    c.expect(monitor_half_duplex(relay, limits).kind ==
                 Verdict::Kind::no_violation_within_bounds,
             "relay projection: half-duplex");
    c.expect(monitor_bound(relay, 1, limits).kind == Verdict::Kind::no_violation_within_bounds,
             "relay projection: within bound 1");
    for (std::size_t k = 1; k <= 3; ++k) {
        c.expect(monitor_k_sync(relay, k, limits).kind == Verdict::Kind::violation_found,
                 "relay projection: no decomposition at k " + std::to_string(k));
    }
}

struct Criterion {
    int id;
    const char* title;
    std::function<void(Check&)> run;
};

const Criterion kCriteria[] = {
    {1, "classification matrix of the example charts", criterion_1},
    {2, "embedded global types are half-duplex, 1-bounded, 1-synchronous", criterion_2},
    {3, "embedding preserves the language up to swaps", criterion_3},
    {4, "1-synchronisable graphs are half-duplex", criterion_4},
    {5, "sampled graph words respect the per-vertex bound", criterion_5},
    {6, "swaps preserve charts and all three restrictions", criterion_6},
    {7, "charts of words satisfy causal delivery", criterion_7},
    {8, "decision procedures match the brute-force oracles", criterion_8},
    {9, "flooding machines: violations and divergence certificates", criterion_9},
    {10, "list protocol end to end", criterion_10},
    {11, "chart projections reproduce the matrix under the monitors", criterion_11},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failed = 0;
    for (const auto& criterion : kCriteria) {
        if (only != 0 && criterion.id != only) continue;
        Check check;
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        if (check.failures.empty()) {
            std::cout << "[PASS] criterion " << criterion.id << ": " << criterion.title << " ("
                      << check.checked << " checks)\n";
        } else {
            ++failed;
            std::cout << "[FAIL] criterion " << criterion.id << ": " << criterion.title << "\n";
            std::size_t shown = 0;
            for (const auto& f : check.failures) {
                if (shown++ == 5) {
                    std::cout << "       ... " << check.failures.size() - 5 << " more\n";
                    break;
                }
                std::cout << "       " << f << "\n";
            }
        }
    }
    return failed;
}
