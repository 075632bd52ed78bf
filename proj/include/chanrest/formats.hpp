#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/csm.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/msc.hpp"
#include "chanrest/mst.hpp"

namespace chanrest {

namespace detail {

// Strips a '#' comment and surrounding whitespace.
inline std::string clean_line(std::string line) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = line.find_last_not_of(" \t\r\n");
    return line.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::string with_path(const std::filesystem::path& path, const std::string& what) {
    if (what.find(path.string()) != std::string::npos) return what;
    return path.string() + ": " + what;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace detail

// --------------------------------------------------------------------------
// Trace files: whitespace-separated event tokens, '#' comments.

inline Trace parse_trace_text(std::string_view text) {
    Trace out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        for (const auto& tok : detail::split_ws(detail::clean_line(line))) {
            out.push_back(parse_event(tok));
        }
    }
    return out;
}

inline Trace load_trace_file(const std::filesystem::path& path) {
    return parse_trace_text(detail::read_file(path));
}

// --------------------------------------------------------------------------
// Chart files (.msc): one "process <P>: <ev> ..." line per process, where
// each event is <peer>!<msg> (send to peer) or <peer>?<msg> (receive from
// peer). Matching is the FIFO one; the chart validator rejects label
// mismatches and cyclic orders.

inline PrefixMsc parse_msc_text(std::string_view text) {
    std::vector<std::pair<ProcessId, std::vector<Event>>> rows;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = detail::clean_line(raw);
        if (line.empty()) continue;
        auto toks = detail::split_ws(line);
        if (toks.size() < 2 || toks[0] != "process" || toks[1].back() != ':') {
            throw parse_error("line " + std::to_string(line_no) +
                              ": expected 'process <name>: <events>'");
        }
        std::string name = toks[1].substr(0, toks[1].size() - 1);
        ProcessId p{name};
        std::vector<Event> events;
        for (std::size_t i = 2; i < toks.size(); ++i) {
            const std::string& tok = toks[i];
            auto bang = tok.find('!');
            auto quest = tok.find('?');
            if (bang != std::string::npos) {
                events.push_back(Event::send(p, ProcessId{tok.substr(0, bang)},
                                             MessageLabel{tok.substr(bang + 1)}));
            } else if (quest != std::string::npos) {
                events.push_back(Event::recv(p, ProcessId{tok.substr(0, quest)},
                                             MessageLabel{tok.substr(quest + 1)}));
            } else {
                throw parse_error("line " + std::to_string(line_no) + ": bad event token '" +
                                  tok + "'");
            }
        }
        rows.emplace_back(std::move(p), std::move(events));
    }
    return PrefixMsc::from_rows(rows);
}

inline PrefixMsc load_msc_file(const std::filesystem::path& path) {
    try {
        return parse_msc_text(detail::read_file(path));
    } catch (const error& e) {
        throw parse_error(detail::with_path(path, e.what()));
    }
}

inline std::string msc_to_text(const PrefixMsc& m) {
    std::string out;
    for (const auto& p : m.processes()) {
        out += "process " + p.name + ":";
        for (NodeId n : m.process_row(p)) {
            const Event& e = m.label(n);
            out += " " + e.peer.name + (e.is_send() ? "!" : "?") + e.msg.name;
        }
        out += "\n";
    }
    return out;
}

// --------------------------------------------------------------------------
// Graph files (.hmsc): vertex/edge/initial/terminal lines; vertex charts
// are named and resolved to .msc files next to the graph file.

using BmscResolver = std::function<std::shared_ptr<const Bmsc>(const std::string&)>;

inline Hmsc parse_hmsc_text(std::string_view text, const BmscResolver& resolve) {
    Hmsc h;
    bool saw_initial = false;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = detail::clean_line(raw);
        if (line.empty()) continue;
        auto toks = detail::split_ws(line);
        auto fail = [&](const std::string& msg) -> void {
            throw parse_error("line " + std::to_string(line_no) + ": " + msg);
        };
        auto vertex_ref = [&](const std::string& name) -> VertexId {
            auto v = h.find_vertex(name);
            if (!v) fail("unknown vertex '" + name + "'");
            return *v;
        };
        if (toks[0] == "vertex") {
            if (toks.size() != 4 || toks[2] != "=") fail("expected 'vertex <name> = <chart>'");
            auto chart = resolve(toks[3]);
            if (!chart) fail("unknown chart '" + toks[3] + "'");
            h.add_vertex(toks[1], chart);
        } else if (toks[0] == "edge") {
            if (toks.size() != 3) fail("expected 'edge <from> <to>'");
            h.add_edge(vertex_ref(toks[1]), vertex_ref(toks[2]));
        } else if (toks[0] == "initial") {
            if (toks.size() != 2) fail("expected 'initial <vertex>'");
            h.set_initial(vertex_ref(toks[1]));
            saw_initial = true;
        } else if (toks[0] == "terminal") {
            for (std::size_t i = 1; i < toks.size(); ++i) h.add_terminal(vertex_ref(toks[i]));
        } else {
            fail("unknown directive '" + toks[0] + "'");
        }
    }
    if (!saw_initial) throw parse_error("graph file declares no initial vertex");
    return h;
}

inline Hmsc load_hmsc_file(const std::filesystem::path& path) {
    std::filesystem::path dir = path.parent_path();
    std::map<std::string, std::shared_ptr<const Bmsc>> cache;
    BmscResolver resolve = [&](const std::string& name) -> std::shared_ptr<const Bmsc> {
        auto it = cache.find(name);
        if (it != cache.end()) return it->second;
        auto chart = std::make_shared<const Bmsc>(Bmsc(load_msc_file(dir / (name + ".msc"))));
        cache.emplace(name, chart);
        return chart;
    };
    try {
        return parse_hmsc_text(detail::read_file(path), resolve);
    } catch (const error& e) {
        throw parse_error(detail::with_path(path, e.what()));
    }
}

// Writes the graph plus one chart file per distinct chart into a
// directory. Returns the path of the .hmsc file.
inline std::filesystem::path write_hmsc_files(const Hmsc& h, const std::filesystem::path& dir,
                                              const std::string& base) {
    std::filesystem::create_directories(dir);
    std::map<std::string, std::string> chart_names; // chart text -> file stem
    std::vector<std::string> vertex_chart(h.vertex_count());
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        std::string text = msc_to_text(h.chart(v).msc());
        auto it = chart_names.find(text);
        if (it == chart_names.end()) {
            std::string stem = base + "_chart" + std::to_string(chart_names.size());
            it = chart_names.emplace(text, stem).first;
            std::ofstream out(dir / (stem + ".msc"));
            out << text;
        }
        vertex_chart[v] = it->second;
    }
    std::filesystem::path graph_path = dir / (base + ".hmsc");
    std::ofstream out(graph_path);
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        out << "vertex " << h.vertex_name(v) << " = " << vertex_chart[v] << "\n";
    }
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        for (VertexId u : h.successors(v)) {
            out << "edge " << h.vertex_name(v) << " " << h.vertex_name(u) << "\n";
        }
    }
    out << "initial " << h.vertex_name(h.initial()) << "\n";
    if (!h.terminals().empty()) {
        out << "terminal";
        for (VertexId v : h.terminals()) out << " " << h.vertex_name(v);
        out << "\n";
    }
    return graph_path;
}

// --------------------------------------------------------------------------
// Global type files (.gt): one term, '#' comments.

inline GlobalType load_global_type_file(const std::filesystem::path& path) {
    try {
        return parse_global_type(detail::read_file(path));
    } catch (const error& e) {
        throw parse_error(detail::with_path(path, e.what()));
    }
}

// --------------------------------------------------------------------------
// Machine files (.csm): per process one "machine <P>" section with state
// and transition lines; 'eps' is the internal step.

inline Csm parse_csm_text(std::string_view text) {
    Csm csm;
    std::optional<ProcessId> current;
    Fsm<Event> machine;
    std::map<std::string, StateId> states;
    bool saw_initial = false;

    auto flush = [&]() {
        if (!current) return;
        if (!saw_initial) {
            throw parse_error("machine " + current->name + " declares no initial state");
        }
        csm.add_machine(*current, std::move(machine));
        machine = Fsm<Event>();
        states.clear();
        saw_initial = false;
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = detail::clean_line(raw);
        if (line.empty()) continue;
        auto toks = detail::split_ws(line);
        auto fail = [&](const std::string& msg) -> void {
            throw parse_error("line " + std::to_string(line_no) + ": " + msg);
        };
        if (toks[0] == "machine") {
            if (toks.size() != 2) fail("expected 'machine <process>'");
            flush();
            current = ProcessId{toks[1]};
        } else if (toks[0] == "state") {
            if (!current) fail("'state' before any 'machine'");
            if (toks.size() < 2) fail("expected 'state <name> [initial] [final]'");
            if (states.count(toks[1])) fail("duplicate state '" + toks[1] + "'");
            StateId id = machine.add_state(toks[1]);
            states.emplace(toks[1], id);
            for (std::size_t i = 2; i < toks.size(); ++i) {
                if (toks[i] == "initial") {
                    if (saw_initial) fail("second initial state");
                    machine.set_initial(id);
                    saw_initial = true;
                } else if (toks[i] == "final") {
                    machine.add_final(id);
                } else {
                    fail("unknown state flag '" + toks[i] + "'");
                }
            }
        } else if (toks[0] == "trans") {
            if (!current) fail("'trans' before any 'machine'");
            if (toks.size() != 4) fail("expected 'trans <from> <event|eps> <to>'");
            auto from = states.find(toks[1]);
            auto to = states.find(toks[3]);
            if (from == states.end()) fail("unknown state '" + toks[1] + "'");
            if (to == states.end()) fail("unknown state '" + toks[3] + "'");
            std::optional<Event> letter;
            if (toks[2] != "eps") letter = parse_event(toks[2]);
            machine.add_transition(from->second, letter, to->second);
        } else {
            fail("unknown directive '" + toks[0] + "'");
        }
    }
    flush();
    if (csm.process_count() == 0) throw parse_error("machine file declares no machines");
    return csm;
}

inline Csm load_csm_file(const std::filesystem::path& path) {
    try {
        return parse_csm_text(detail::read_file(path));
    } catch (const error& e) {
        throw parse_error(detail::with_path(path, e.what()));
    }
}

} // namespace chanrest
