#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chanrest/core.hpp"
#include "chanrest/csm.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/restrictions.hpp"

namespace chanrest {

// Machine-readable reports. Keys are emitted in insertion order and there
// are no timestamps, so identical inputs and flags yield identical bytes.
using Json = nlohmann::ordered_json;

inline Json json_of(const Trace& w) {
    Json arr = Json::array();
    for (const auto& e : w) arr.push_back(e.to_string());
    return arr;
}

inline Json json_of(const Classification& c) {
    Json j;
    j["half_duplex"] = c.half_duplex;
    if (c.bound_defined) {
        j["least_existential_bound"] = c.least_existential_bound;
    } else {
        j["least_existential_bound"] = 0;
        j["bound_warning"] = "chart has no sends, bound undefined";
    }
    if (c.least_k) {
        j["least_k"] = *c.least_k;
    } else {
        j["least_k"] = nullptr;
        j["synchronisable"] = false;
    }
    return j;
}

inline Json json_of(const Verdict& v) {
    Json j;
    j["verdict"] = to_string(v.kind);
    j["status"] = v.definitive() ? "definitive" : "bound-qualified";
    if (v.kind == Verdict::Kind::violation_found) j["witness"] = json_of(v.witness);
    if (v.lasso) {
        j["lasso"]["stem"] = json_of(v.lasso->stem);
        j["lasso"]["cycle"] = json_of(v.lasso->cycle);
        j["lasso"]["growing_channel"] = v.lasso->growing.from.name + ">" + v.lasso->growing.to.name;
    }
    j["bounds_used"]["depth"] = v.depth;
    j["bounds_used"]["channel_cap"] = v.channel_cap;
    if (!v.notes.empty()) j["notes"] = v.notes;
    return j;
}

inline Json json_of(const MemberVerdict& v, const Hmsc& h) {
    Json j;
    switch (v.verdict) {
        case Membership::yes: j["member"] = "yes"; break;
        case Membership::no: j["member"] = "no"; break;
        case Membership::unknown: j["member"] = "unknown"; break;
    }
    if (v.path) {
        Json path = Json::array();
        for (VertexId vx : *v.path) path.push_back(h.vertex_name(vx));
        j["path"] = path;
    }
    return j;
}

inline Json json_of(const EquivResult& r) {
    Json j;
    j["result"] = r.agree ? "agree" : "counterexample";
    if (!r.agree) {
        j["counterexample"] = json_of(r.counterexample);
        j["counterexample_side"] = r.counterexample_in_csm ? "machine-only" : "specification-only";
    }
    return j;
}

} // namespace chanrest
