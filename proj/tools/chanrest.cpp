// Command-line frontend: classify protocol descriptions, run targeted
// checks, embed global types into chart graphs, simulate machines, and
// compare languages. Exit codes: 0 ok, 1 violation or disagreement found,
// 2 input error, 3 resource cap hit.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chanrest/csm.hpp"
#include "chanrest/formats.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/indist.hpp"
#include "chanrest/mst.hpp"
#include "chanrest/report.hpp"
#include "chanrest/restrictions.hpp"

namespace fs = std::filesystem;
using namespace chanrest;

namespace {

struct Output {
    bool json = false;

    void emit(const Json& report) const {
        if (json) {
            std::cout << report.dump(2) << "\n";
        } else {
            print(report, "");
        }
    }

    void print(const Json& node, const std::string& prefix) const {
        if (node.is_object()) {
            for (const auto& [key, value] : node.items()) {
                std::string name = prefix.empty() ? key : prefix + "." + key;
                if (value.is_object() || value.is_array()) {
                    print(value, name);
                } else {
                    std::cout << name << ": " << value.dump() << "\n";
                }
            }
        } else if (node.is_array()) {
            if (node.empty()) {
                std::cout << prefix << ": []\n";
                return;
            }
            bool scalar = true;
            for (const auto& item : node) {
                if (item.is_object() || item.is_array()) scalar = false;
            }
            if (scalar) {
                std::cout << prefix << ":";
                for (const auto& item : node) {
                    std::cout << " " << (item.is_string() ? item.get<std::string>() : item.dump());
                }
                std::cout << "\n";
            } else {
                std::size_t i = 0;
                for (const auto& item : node) {
                    print(item, prefix + "[" + std::to_string(i++) + "]");
                }
            }
        } else {
            std::cout << prefix << ": " << node.dump() << "\n";
        }
    }
};

std::string extension(const fs::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::size_t env_max_states(std::size_t fallback) {
    if (const char* raw = std::getenv("CHANREST_MAX_STATES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(raw, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw validation_error("CHANREST_MAX_STATES is not a positive integer");
    }
    return fallback;
}

Json classification_entry(const Classification& c) {
    Json j = json_of(c);
    j["status"] = "definitive";
    return j;
}

int cmd_classify(const fs::path& path, const Output& out, std::size_t depth, std::size_t cap,
                 std::size_t bound, std::size_t sync_k, std::size_t node_limit,
                 std::size_t max_states) {
    Json report;
    report["subject"] = path.string();
    std::string ext = extension(path);
    if (ext == ".msc") {
        report["kind"] = "chart";
        report["classification"] = classification_entry(classify(load_msc_file(path), node_limit));
    } else if (ext == ".hmsc") {
        Hmsc h = load_hmsc_file(path);
        auto diags = validate(h);
        if (!diags.empty()) {
            report["diagnostics"] = diags;
            out.emit(report);
            return 2;
        }
        report["kind"] = "chart-graph";
        Json c;
        c["half_duplex"] = hmsc_is_half_duplex(h);
        std::size_t b = hmsc_existential_bound(h, node_limit);
        c["least_existential_bound"] = b;
        if (b == 0) c["bound_warning"] = "no sends anywhere, bound undefined";
        auto k = hmsc_least_k(h, node_limit);
        if (k) {
            c["least_k"] = *k;
        } else {
            c["least_k"] = nullptr;
            c["synchronisable"] = false;
        }
        c["status"] = "definitive";
        report["classification"] = c;
    } else if (ext == ".gt") {
        GlobalType g = load_global_type_file(path);
        Hmsc h = embed_hmsc(g);
        report["kind"] = "global-type";
        report["via"] = "embedding into a chart graph";
        Json c;
        c["half_duplex"] = hmsc_is_half_duplex(h);
        c["least_existential_bound"] = hmsc_existential_bound(h, node_limit);
        auto k = hmsc_least_k(h, node_limit);
        c["least_k"] = k ? Json(*k) : Json(nullptr);
        c["status"] = "definitive";
        report["classification"] = c;
    } else if (ext == ".csm") {
        Csm c = load_csm_file(path);
        ExploreLimits limits{depth, cap, max_states};
        report["kind"] = "communicating-machines";
        report["half_duplex"] = json_of(monitor_half_duplex(c, limits));
        report["bound"]["tested_bound"] = bound;
        Json bj = json_of(monitor_bound(c, bound, limits));
        for (auto& [key, value] : bj.items()) report["bound"][key] = value;
        report["synchronisability"]["tested_k"] = sync_k;
        Json kj = json_of(monitor_k_sync(c, sync_k, limits));
        for (auto& [key, value] : kj.items()) report["synchronisability"][key] = value;
    } else {
        throw parse_error("unsupported input type: " + path.string());
    }
    out.emit(report);
    return 0;
}

int cmd_check(const fs::path& path, const Output& out, bool half_duplex,
              std::optional<std::size_t> bound, std::optional<std::size_t> sync_k,
              std::size_t depth, std::size_t cap, std::size_t node_limit,
              std::size_t max_states) {
    if (!half_duplex && !bound && !sync_k) {
        throw validation_error("check needs at least one of --half-duplex, --bound, --sync");
    }
    Json report;
    report["subject"] = path.string();
    bool all_ok = true;
    std::string ext = extension(path);

    if (ext == ".msc" || ext == ".trace") {
        std::optional<Trace> word;
        PrefixMsc chart = PrefixMsc::empty();
        if (ext == ".msc") {
            chart = load_msc_file(path);
        } else {
            word = load_trace_file(path);
            chart = msc_of(*word);
        }
        if (half_duplex) {
            bool ok = word ? is_half_duplex_trace(*word) : is_half_duplex_msc(chart);
            report["half_duplex"] = ok;
            all_ok = all_ok && ok;
        }
        if (bound) {
            bool ok = word ? is_B_bounded_trace(*word, *bound)
                           : is_existentially_B_bounded(chart, *bound, node_limit);
            report[word ? "bounded" : "existentially_bounded"] = ok;
            report["tested_bound"] = *bound;
            all_ok = all_ok && ok;
        }
        if (sync_k) {
            bool ok = is_k_synchronous(chart, *sync_k, node_limit);
            report["k_synchronous"] = ok;
            report["tested_k"] = *sync_k;
            all_ok = all_ok && ok;
        }
    } else if (ext == ".hmsc" || ext == ".gt") {
        Hmsc h = ext == ".gt" ? embed_hmsc(load_global_type_file(path)) : load_hmsc_file(path);
        if (half_duplex) {
            bool ok = hmsc_is_half_duplex(h);
            report["half_duplex"] = ok;
            all_ok = all_ok && ok;
        }
        if (bound) {
            std::size_t b = hmsc_existential_bound(h, node_limit);
            bool ok = b > 0 && b <= *bound;
            report["least_existential_bound"] = b;
            report["tested_bound"] = *bound;
            report["within_bound"] = ok;
            all_ok = all_ok && ok;
        }
        if (sync_k) {
            auto k = hmsc_least_k(h, node_limit);
            bool ok = k.has_value() && *k <= *sync_k;
            report["least_k"] = k ? Json(*k) : Json(nullptr);
            report["tested_k"] = *sync_k;
            report["k_synchronisable"] = ok;
            all_ok = all_ok && ok;
        }
    } else if (ext == ".csm") {
        Csm c = load_csm_file(path);
        ExploreLimits limits{depth, cap, max_states};
        if (half_duplex) {
            Verdict v = monitor_half_duplex(c, limits);
            report["half_duplex"] = json_of(v);
            all_ok = all_ok && v.kind == Verdict::Kind::no_violation_within_bounds;
        }
        if (bound) {
            Verdict v = monitor_bound(c, *bound, limits);
            report["bound"] = json_of(v);
            all_ok = all_ok && v.kind == Verdict::Kind::no_violation_within_bounds;
        }
        if (sync_k) {
            Verdict v = monitor_k_sync(c, *sync_k, limits);
            report["synchronisability"] = json_of(v);
            all_ok = all_ok && v.kind == Verdict::Kind::no_violation_within_bounds;
        }
    } else {
        throw parse_error("unsupported input type: " + path.string());
    }
    report["pass"] = all_ok;
    out.emit(report);
    return all_ok ? 0 : 1;
}

int cmd_embed(const fs::path& path, const Output& out, std::optional<fs::path> out_dir,
              std::size_t len) {
    GlobalType g = load_global_type_file(path);
    Hmsc h = embed_hmsc(g);
    fs::path target = out_dir.value_or(path.parent_path() / (path.stem().string() + "_embedded"));
    fs::path written = write_hmsc_files(h, target, path.stem().string());

    Json report;
    report["subject"] = path.string();
    report["written"] = written.string();
    report["vertices"] = h.vertex_count();
    report["one_exchange_per_vertex"] = is_one_hmsc(h);
    report["graph_diagnostics"] = validate(h);

    auto witness = find_weak_bisimulation(build_sync_automaton(g), qopt(h));
    report["weak_bisimulation"] = witness.has_value() ? "witness-found" : "absent";
    if (witness) {
        report["witness_pairs"]["forward"] = witness->r1.size();
        report["witness_pairs"]["backward"] = witness->r2.size();
    }

    auto type_words = bounded_language(build_event_automaton(g), len);
    auto graph_words = hmsc_finite_words_up_to(h, len);
    bool included = true;
    for (const auto& w : type_words) {
        if (!graph_words.count(Trace(w.begin(), w.end()))) included = false;
    }
    report["inclusion_at_len"]["len"] = len;
    report["inclusion_at_len"]["type_words"] = type_words.size();
    report["inclusion_at_len"]["graph_words"] = graph_words.size();
    report["inclusion_at_len"]["type_subset_of_graph"] = included;
    report["inclusion_at_len"]["strict"] = included && graph_words.size() > type_words.size();

    out.emit(report);
    return witness.has_value() && included ? 0 : 1;
}

int cmd_simulate(const fs::path& path, const Output& out, std::optional<fs::path> script,
                 std::size_t depth, std::size_t cap, std::size_t max_states) {
    Csm c = load_csm_file(path);
    Json report;
    report["subject"] = path.string();
    if (script) {
        Trace w = load_trace_file(*script);
        Configuration conf = initial_configuration(c);
        Json steps = Json::array();
        for (std::size_t i = 0; i < w.size(); ++i) {
            try {
                conf = step(c, conf, w[i]);
            } catch (const disabled_action_error& e) {
                report["steps"] = steps;
                report["error"] = std::string(e.what()) + " at step " + std::to_string(i);
                out.emit(report);
                return 2;
            }
            Json entry;
            entry["action"] = w[i].to_string();
            Json states = Json::object();
            for (std::size_t p = 0; p < c.process_count(); ++p) {
                states[c.processes()[p].name] = c.machine(p).state_name(conf.states[p]);
            }
            Json channels = Json::object();
            for (const auto& [ch, content] : conf.channels) {
                Json msgs = Json::array();
                for (const auto& m : content) msgs.push_back(m.name);
                channels[ch.from.name + ">" + ch.to.name] = msgs;
            }
            entry["states"] = states;
            entry["channels"] = channels;
            steps.push_back(entry);
        }
        report["steps"] = steps;
        report["final_configuration"] = is_final_configuration(c, conf);
    } else {
        ExploreLimits limits{depth, cap, max_states};
        ExploreReport r = explore(c, limits);
        report["configurations"] = r.configurations;
        report["deadlocks"] = r.deadlocks.size();
        report["frontier_truncated"] = r.frontier_truncated;
        report["maximal_traces"] = r.maximal_traces.size();
        Json sample = Json::array();
        std::size_t shown = 0;
        for (const auto& w : r.maximal_traces) {
            if (shown++ == 5) break;
            sample.push_back(to_string(w));
        }
        report["maximal_trace_sample"] = sample;
        report["bounds_used"]["depth"] = limits.depth;
        report["bounds_used"]["channel_cap"] = limits.channel_cap;
    }
    out.emit(report);
    return 0;
}

int cmd_equiv(const fs::path& a, const fs::path& b, const Output& out, std::size_t len) {
    Json report;
    report["subjects"] = Json::array({a.string(), b.string()});
    std::string ea = extension(a), eb = extension(b);

    if ((ea == ".csm" && eb == ".gt") || (ea == ".gt" && eb == ".csm")) {
        const fs::path& machine_path = ea == ".csm" ? a : b;
        const fs::path& type_path = ea == ".csm" ? b : a;
        Csm c = load_csm_file(machine_path);
        Fsm<Event> spec = build_event_automaton(load_global_type_file(type_path));
        EquivResult r = bounded_equiv(c, spec, len);
        report["mode"] = "bounded-language";
        report["len"] = len;
        Json rj = json_of(r);
        for (auto& [key, value] : rj.items()) report[key] = value;
        out.emit(report);
        return r.agree ? 0 : 1;
    }
    if (ea == ".gt" && eb == ".gt") {
        auto ga = build_sync_automaton(load_global_type_file(a));
        auto gb = build_sync_automaton(load_global_type_file(b));
        auto witness = find_weak_bisimulation(ga, gb);
        report["mode"] = "weak-bisimulation";
        report["result"] = witness ? "witness-found" : "absent";
        out.emit(report);
        return witness ? 0 : 1;
    }
    throw parse_error("equiv expects a .csm and a .gt, or two .gt files");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decide half-duplex, existential boundedness and "
                 "k-synchronisability for charts, chart graphs, global types "
                 "and communicating machines"};
    app.require_subcommand(1);

    Output out;

    std::string path, second, script_path, out_dir;
    std::size_t depth = 16, cap = 8, len = 8, bound = 1, sync_k = 1, node_limit = 32;
    std::size_t max_states = 1'000'000;
    bool flag_half_duplex = false;
    bool bound_given = false, sync_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_flag("--json", out.json, "emit the raw JSON report");
    };
    auto add_bounds = [&](CLI::App* cmd) {
        add_common(cmd);
        cmd->add_option("--depth", depth, "step bound for machine exploration");
        cmd->add_option("--cap", cap, "channel length cap for machine exploration");
        cmd->add_option("--max-states", max_states,
                        "search state budget (env CHANREST_MAX_STATES)");
        cmd->add_option("--node-limit", node_limit, "chart size ceiling for cut searches");
    };

    CLI::App* classify = app.add_subcommand("classify", "full classification of one input");
    classify->add_option("path", path)->required();
    classify->add_option("--bound", bound, "bound to test on machine inputs");
    classify->add_option("--sync", sync_k, "block size to test on machine inputs");
    add_bounds(classify);

    CLI::App* check = app.add_subcommand("check", "targeted restriction checks");
    check->add_option("path", path)->required();
    check->add_flag("--half-duplex", flag_half_duplex, "check half-duplex");
    auto* bound_opt = check->add_option("--bound", bound, "check this channel bound");
    auto* sync_opt = check->add_option("--sync", sync_k, "check this block size");
    add_bounds(check);

    CLI::App* embed = app.add_subcommand("embed", "embed a global type into a chart graph");
    add_common(embed);
    embed->add_option("path", path)->required();
    embed->add_option("--out", out_dir, "output directory");
    embed->add_option("--len", len, "length bound for the inclusion note");

    CLI::App* simulate = app.add_subcommand("simulate", "explore machines or replay a script");
    simulate->add_option("path", path)->required();
    simulate->add_option("--script", script_path, "trace file to replay step by step");
    add_bounds(simulate);

    CLI::App* equiv = app.add_subcommand("equiv", "bounded language comparison");
    add_common(equiv);
    equiv->add_option("a", path)->required();
    equiv->add_option("b", second)->required();
    equiv->add_option("--len", len, "word length bound");

    CLI11_PARSE(app, argc, argv);
    bound_given = bound_opt->count() > 0;
    sync_given = sync_opt->count() > 0;

    try {
        max_states = env_max_states(max_states);
        if (classify->parsed()) {
            return cmd_classify(path, out, depth, cap, bound, sync_k, node_limit, max_states);
        }
        if (check->parsed()) {
            return cmd_check(path, out, flag_half_duplex,
                             bound_given ? std::optional(bound) : std::nullopt,
                             sync_given ? std::optional(sync_k) : std::nullopt, depth, cap,
                             node_limit, max_states);
        }
        if (embed->parsed()) {
            return cmd_embed(path, out,
                             out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir),
                             len);
        }
        if (simulate->parsed()) {
            return cmd_simulate(path, out,
                                script_path.empty() ? std::nullopt
                                                    : std::optional<fs::path>(script_path),
                                depth, cap, max_states);
        }
        if (equiv->parsed()) {
            return cmd_equiv(path, second, out, len);
        }
    } catch (const resource_limit_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
