#include <catch2/catch_amalgamated.hpp>

#include "chanrest/formats.hpp"
#include "chanrest/generate.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/indist.hpp"
#include "support/common.hpp"
#include "support/oracles.hpp"

using namespace chanrest;
using namespace chanrest::testing;

namespace {

Hmsc list_graph() { return load_hmsc_file(corpus("h_list.hmsc")); }

Hmsc single_vertex(const PrefixMsc& m) {
    Hmsc h;
    h.add_vertex("only", Bmsc(m));
    h.set_initial(0);
    h.add_terminal(0);
    return h;
}

} // namespace

TEST_CASE("corpus graphs validate cleanly") {
    CHECK(validate(list_graph()).empty());
    CHECK(validate(load_hmsc_file(corpus("h_branch.hmsc"))).empty());
}

TEST_CASE("validation flags unreachable and dead-end vertices") {
    Hmsc h;
    h.add_vertex("a", Bmsc(PrefixMsc::empty()));
    h.add_vertex("orphan", Bmsc(PrefixMsc::empty()));
    h.set_initial(0);
    h.add_terminal(0);
    auto diags = validate(h);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].find("orphan") != std::string::npos);

    Hmsc dead;
    dead.add_vertex("a", Bmsc(PrefixMsc::empty()));
    dead.add_vertex("sink", Bmsc(PrefixMsc::empty()));
    dead.add_edge(0, 1);
    dead.set_initial(0);
    auto dead_diags = validate(dead);
    CHECK(dead_diags.size() == 2); // neither vertex can complete a maximal path
}

TEST_CASE("path enumeration up to a bound") {
    auto paths = maximal_paths(list_graph(), 3);
    std::size_t complete = 0, truncated = 0;
    for (const auto& p : paths) {
        if (p.complete) {
            ++complete;
            CHECK(p.vertices.size() <= 3);
        } else {
            ++truncated;
            CHECK(p.vertices.size() == 3);
        }
    }
    CHECK(complete == 2); // skip the loop, or take it once
    CHECK(truncated == 1); // start, elem, elem still running

    Hmsc lone = single_vertex(msc_of(tr("P>Q!m Q<P?m")));
    auto lone_paths = maximal_paths(lone, 1);
    REQUIRE(lone_paths.size() == 1);
    CHECK(lone_paths[0].complete);

    Hmsc branch = load_hmsc_file(corpus("h_branch.hmsc"));
    auto branch_paths = maximal_paths(branch, 4);
    CHECK(branch_paths.size() == 2);
}

TEST_CASE("path charts concatenate the vertex charts") {
    Hmsc h = list_graph();
    CHECK(path_msc(h, std::vector<VertexId>{}).node_count() == 0);

    // start, elem, finish: one element then the closing handshake.
    std::vector<VertexId> loop_once{*h.find_vertex("start"), *h.find_vertex("elem"),
                                    *h.find_vertex("finish")};
    PrefixMsc m = path_msc(h, loop_once);
    CHECK(m.node_count() == 6);
    CHECK(is_linearization(m, tr("P>Q!cons Q<P?cons P>Q!nil Q<P?nil Q>P!ack P<Q?ack")));

    Hmsc indep;
    indep.add_vertex("a", Bmsc(msc_of(tr("P>Q!m Q<P?m"))));
    indep.add_vertex("b", Bmsc(msc_of(tr("R>S!x S<R?x"))));
    indep.add_edge(0, 1);
    indep.set_initial(0);
    indep.add_terminal(1);
    CHECK(count_linearizations(path_msc(indep, std::vector<VertexId>{0, 1})) == 6);
}

TEST_CASE("bounded membership") {
    Hmsc h = list_graph();
    CHECK(hmsc_member(h, w_list_nil(), 4).verdict == Membership::yes);

    auto deferred = hmsc_member(h, tr("P>Q!cons P>Q!nil Q<P?cons Q<P?nil Q>P!ack P<Q?ack"), 4);
    CHECK(deferred.verdict == Membership::yes);
    REQUIRE(deferred.path.has_value());
    CHECK(deferred.path->size() == 3);

    CHECK(hmsc_member(h, tr("Q>P!ack P<Q?ack"), 4).verdict == Membership::no);

    // Five elements cannot fit under the bound, but longer paths could
    // accept the word, so the verdict must stay open.
    Trace five;
    for (int i = 0; i < 5; ++i) {
        five.push_back(parse_event("P>Q!cons"));
        five.push_back(parse_event("Q<P?cons"));
    }
    for (const auto& e : w_list_nil()) five.push_back(e);
    CHECK(hmsc_member(h, five, 4).verdict == Membership::unknown);
    CHECK(hmsc_member(h, five, 9).verdict == Membership::yes);
}

TEST_CASE("least block size over a graph") {
    CHECK(hmsc_least_k(list_graph()) == 1);
    CHECK(hmsc_least_k(single_vertex(m_ring())) == 3);
    CHECK_FALSE(hmsc_least_k(single_vertex(m_relay())).has_value());
}

TEST_CASE("existential bound over a graph") {
    CHECK(hmsc_existential_bound(list_graph()) == 1);
    CHECK(hmsc_existential_bound(single_vertex(m_cross())) == 1);

    // The second chart forces two messages in flight on one channel: Q may
    // only start receiving P's backlog after a round trip through R that P
    // initiates once both sends are out.
    PrefixMsc forced_two = PrefixMsc::from_rows(
        {{pid("P"), {parse_event("P>Q!a"), parse_event("P>Q!b"), parse_event("P>R!c")}},
         {pid("Q"), {parse_event("Q<R?d"), parse_event("Q<P?a"), parse_event("Q<P?b")}},
         {pid("R"), {parse_event("R<P?c"), parse_event("R>Q!d")}}});
    CHECK(least_existential_bound(forced_two) == 2);
    Hmsc mixed;
    mixed.add_vertex("one", Bmsc(msc_of(tr("P>Q!m Q<P?m"))));
    mixed.add_vertex("two", Bmsc(forced_two));
    mixed.add_edge(0, 1);
    mixed.set_initial(0);
    mixed.add_terminal(1);
    CHECK(hmsc_existential_bound(mixed) == 2);
}

TEST_CASE("half-duplex over a graph") {
    CHECK(hmsc_is_half_duplex(list_graph()));
    CHECK_FALSE(hmsc_is_half_duplex(single_vertex(m_cross())));
    CHECK(hmsc_is_half_duplex(load_hmsc_file(corpus("h_branch.hmsc"))));
}

TEST_CASE("language samples") {
    auto sample = language_sample(list_graph(), 2, 8);
    bool found = false;
    for (const auto& s : sample) {
        if (s.complete && s.trace == w_list_nil()) found = true;
    }
    CHECK(found);

    auto lone = language_sample(single_vertex(msc_of(tr("P>Q!m Q<P?m"))), 2, 8);
    REQUIRE(lone.size() == 1);
    CHECK(lone.begin()->complete);
    CHECK(lone.begin()->trace == tr("P>Q!m Q<P?m"));

    // A two-branch graph samples the union of both branch languages.
    Hmsc branch = load_hmsc_file(corpus("h_branch.hmsc"));
    auto words = language_sample(branch, 3, 12);
    std::set<Trace> complete_words;
    for (const auto& s : words) {
        if (s.complete) complete_words.insert(s.trace);
    }
    std::set<Trace> left, right;
    enumerate_linearizations(load_msc_file(corpus("branch_left.msc")),
                             [&](std::span<const NodeId> order) {
                                 left.insert(linearization_labels(
                                     load_msc_file(corpus("branch_left.msc")), order));
                                 return true;
                             });
    enumerate_linearizations(load_msc_file(corpus("branch_right.msc")),
                             [&](std::span<const NodeId> order) {
                                 right.insert(linearization_labels(
                                     load_msc_file(corpus("branch_right.msc")), order));
                                 return true;
                             });
    std::set<Trace> expected = left;
    expected.insert(right.begin(), right.end());
    CHECK(complete_words == expected);
}

TEST_CASE("sampled words satisfy compliance and completeness") {
    Rng rng(61);
    HmscGenOptions opts;
    for (int i = 0; i < 25; ++i) {
        Hmsc h = random_hmsc(rng, opts);
        auto sample = language_sample(h, 3, 14);
        for (const auto& s : sample) {
            REQUIRE(is_channel_compliant(s.trace));
            if (s.complete) CHECK(is_complete(s.trace));
        }
    }
}

TEST_CASE("swap neighbors of sampled words stay in the language") {
    Rng rng(62);
    HmscGenOptions opts;
    opts.max_vertices = 3;
    for (int i = 0; i < 15; ++i) {
        Hmsc h = random_hmsc(rng, opts);
        auto sample = language_sample(h, 3, 10);
        for (const auto& s : sample) {
            if (!s.complete) continue;
            for (const auto& swap : swap_neighbors(s.trace)) {
                CHECK(hmsc_member(h, swap.result, 3).verdict == Membership::yes);
            }
        }
    }
}

TEST_CASE("per-vertex half-duplex equals sampled word half-duplex") {
    Rng rng(63);
    // Single-vertex graphs: the sample holds every linearization, so the
    // per-vertex answer and the word-by-word answer must coincide exactly.
    TraceGenOptions chart_opts;
    chart_opts.target_events = 6;
    chart_opts.complete = true;
    for (int i = 0; i < 60; ++i) {
        Hmsc h = single_vertex(random_prefix_msc(rng, chart_opts));
        bool per_vertex = hmsc_is_half_duplex(h);
        bool sampled = true;
        for (const auto& s : language_sample(h, 1, 16)) {
            if (!oracle_trace_half_duplex(s.trace)) sampled = false;
        }
        CHECK(per_vertex == sampled);
    }

    // Multi-vertex graphs: sampling under a bound may miss a deep
    // violation, but must never contradict the per-vertex answer.
    HmscGenOptions opts;
    opts.max_vertices = 3;
    for (int i = 0; i < 30; ++i) {
        Hmsc h = random_hmsc(rng, opts);
        bool per_vertex = hmsc_is_half_duplex(h);
        bool sampled = true;
        for (const auto& s : language_sample(h, 3, 12)) {
            if (!oracle_trace_half_duplex(s.trace)) sampled = false;
        }
        if (per_vertex) CHECK(sampled);
        if (!sampled) CHECK_FALSE(per_vertex);
    }
}

TEST_CASE("sampled words respect the graph bound") {
    Rng rng(64);
    HmscGenOptions opts;
    opts.max_vertices = 3;
    for (int i = 0; i < 20; ++i) {
        Hmsc h = random_hmsc(rng, opts);
        std::size_t bound = hmsc_existential_bound(h);
        if (bound == 0) continue;
        for (const auto& s : language_sample(h, 3, 12)) {
            if (!s.complete) continue;
            CHECK(is_existentially_B_bounded(msc_of(s.trace), bound, 64));
        }
    }
}
