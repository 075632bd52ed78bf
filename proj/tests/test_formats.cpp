#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "chanrest/formats.hpp"
#include "chanrest/generate.hpp"
#include "chanrest/report.hpp"
#include "support/common.hpp"

using namespace chanrest;
using namespace chanrest::testing;

TEST_CASE("trace files tokenize with comments") {
    Trace w = parse_trace_text("# the closing handshake\nP>Q!nil Q<P?nil\nQ>P!ack P<Q?ack # done\n");
    CHECK(w == w_list_nil());
    CHECK(parse_trace_text("").empty());
    CHECK_THROWS_AS(parse_trace_text("P>Q!nil nonsense"), parse_error);
}

TEST_CASE("chart files round trip") {
    PrefixMsc cross = m_cross();
    CHECK(cross.node_count() == 4);
    PrefixMsc again = parse_msc_text(msc_to_text(cross));
    CHECK(isomorphic(cross, again));

    PrefixMsc empty = load_msc_file(corpus("empty.msc"));
    CHECK(empty.node_count() == 0);
}

TEST_CASE("chart files reject inconsistencies") {
    CHECK_THROWS_AS(parse_msc_text("process P: Q!a\nprocess Q: P?b\n"), validation_error);
    CHECK_THROWS_AS(parse_msc_text("process Q: P?a\n"), validation_error);
    CHECK_THROWS_AS(parse_msc_text("process P: Q?b Q!a\nprocess Q: P?a P!b\n"),
                    validation_error);
    CHECK_THROWS_AS(parse_msc_text("process P Q!a\n"), parse_error);
    CHECK_THROWS_AS(parse_msc_text("process P: Qa\n"), parse_error);
}

TEST_CASE("random charts survive a file round trip") {
    Rng rng(81);
    TraceGenOptions opts;
    opts.target_events = 9;
    for (int i = 0; i < 100; ++i) {
        PrefixMsc m = random_prefix_msc(rng, opts);
        CHECK(isomorphic(parse_msc_text(msc_to_text(m)), m));
    }
}

TEST_CASE("graph files load with their charts") {
    Hmsc h = load_hmsc_file(corpus("h_list.hmsc"));
    CHECK(h.vertex_count() == 3);
    CHECK(h.vertex_name(h.initial()) == "start");
    CHECK(h.terminals().size() == 1);
    CHECK(h.chart(*h.find_vertex("elem")).msc().node_count() == 2);

    CHECK_THROWS_AS(parse_hmsc_text("vertex a = nope\ninitial a\n",
                                    [](const std::string&) { return nullptr; }),
                    parse_error);
    CHECK_THROWS_AS(parse_hmsc_text("edge a b\n", [](const std::string&) { return nullptr; }),
                    parse_error);
}

TEST_CASE("graph files round trip through the writer") {
    Hmsc h = load_hmsc_file(corpus("h_branch.hmsc"));
    auto dir = std::filesystem::temp_directory_path() / "chanrest_roundtrip";
    std::filesystem::remove_all(dir);
    auto path = write_hmsc_files(h, dir, "branchy");
    Hmsc again = load_hmsc_file(path);
    REQUIRE(again.vertex_count() == h.vertex_count());
    CHECK(again.vertex_name(again.initial()) == h.vertex_name(h.initial()));
    CHECK(again.terminals().size() == h.terminals().size());
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        auto mapped = again.find_vertex(h.vertex_name(v));
        REQUIRE(mapped.has_value());
        CHECK(isomorphic(again.chart(*mapped).msc(), h.chart(v).msc()));
        CHECK(again.successors(*mapped).size() == h.successors(v).size());
    }
}

TEST_CASE("machine files load and reject malformed input") {
    Csm c = load_csm_file(corpus("csm_list.csm"));
    CHECK(c.process_count() == 2);
    CHECK(c.machine(pid("P")).state_count() == 3);

    CHECK_THROWS_AS(parse_csm_text("state s0 initial\n"), parse_error);
    CHECK_THROWS_AS(parse_csm_text("machine P\nstate s0\n"), parse_error); // no initial
    CHECK_THROWS_AS(parse_csm_text("machine P\nstate s0 initial\ntrans s0 P>Q!m s1\n"),
                    parse_error);
    CHECK_THROWS_AS(parse_csm_text("machine P\nstate s0 initial\nstate s0\n"), parse_error);
    CHECK_THROWS_AS(parse_csm_text("machine P\nstate s0 initial\ntrans s0 Q>P!m s0\n"),
                    validation_error); // foreign event
    CHECK_THROWS_AS(parse_csm_text(""), parse_error);
}

TEST_CASE("global type files load") {
    GlobalType g = load_global_type_file(corpus("g_list.gt"));
    CHECK(g.node(g.root()).kind == GlobalType::Kind::rec);
    CHECK_THROWS_AS(load_global_type_file(corpus("missing.gt")), parse_error);
}

TEST_CASE("reports serialize deterministically") {
    Classification c = classify(m_ring());
    Json a = json_of(c);
    Json b = json_of(classify(m_ring()));
    CHECK(a.dump(2) == b.dump(2));
    CHECK(a.dump() ==
          R"({"half_duplex":true,"least_existential_bound":1,"least_k":3})");

    Classification relay = classify(m_relay());
    Json j = json_of(relay);
    CHECK(j["least_k"].is_null());
    CHECK(j["synchronisable"] == false);
}
