#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/fsm.hpp"
#include "chanrest/hmsc.hpp"
#include "chanrest/msc.hpp"

namespace chanrest {

// A global protocol type: sender-driven choices over message prefixes with
// guarded tail recursion. Nodes live in a flat vector so that every
// occurrence of a subterm has its own identity; automaton states and graph
// vertices below are keyed by these occurrence ids.
class GlobalType {
public:
    enum class Kind { end, choice, rec, var };

    struct Branch {
        ProcessId receiver;
        MessageLabel msg;
        std::size_t cont;
    };

    struct Node {
        Kind kind;
        ProcessId sender;             // choice
        std::vector<Branch> branches; // choice
        std::string var;              // rec: bound name, var: referenced name
        std::size_t body = 0;         // rec
        std::size_t binder = 0;       // var: node id of the binding rec
    };

    std::size_t root() const { return root_; }
    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(std::size_t id) const { return nodes_.at(id); }

    std::string subterm_text(std::size_t id) const {
        const Node& n = node(id);
        switch (n.kind) {
            case Kind::end: return "0";
            case Kind::var: return n.var;
            case Kind::rec: return "mu " + n.var + ". " + subterm_text(n.body);
            case Kind::choice: {
                std::string out;
                for (std::size_t i = 0; i < n.branches.size(); ++i) {
                    if (i) out += " + ";
                    const Branch& b = n.branches[i];
                    out += n.sender.name + "->" + b.receiver.name + ":" + b.msg.name + "." +
                           subterm_text(b.cont);
                }
                return n.branches.size() > 1 ? "(" + out + ")" : out;
            }
        }
        return "?";
    }

    std::string text() const { return subterm_text(root_); }

private:
    friend GlobalType parse_global_type(std::string_view);

    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

namespace detail {

struct GtToken {
    enum class Kind { ident, zero, arrow, colon, dot, lparen, rparen, plus, mu, eof };
    Kind kind;
    std::string text;
    std::size_t pos;
};

class GtLexer {
public:
    explicit GtLexer(std::string_view src) : src_(src) { advance(); }

    const GtToken& peek() const { return current_; }
    GtToken take() {
        GtToken t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        std::size_t start = pos_;
        if (pos_ >= src_.size()) {
            current_ = {GtToken::Kind::eof, "", start};
            return;
        }
        char c = src_[pos_];
        if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
            pos_ += 2;
            current_ = {GtToken::Kind::arrow, "->", start};
        } else if (c == ':' || c == '.' || c == '(' || c == ')' || c == '+') {
            ++pos_;
            current_ = {c == ':'   ? GtToken::Kind::colon
                        : c == '.' ? GtToken::Kind::dot
                        : c == '(' ? GtToken::Kind::lparen
                        : c == ')' ? GtToken::Kind::rparen
                                   : GtToken::Kind::plus,
                        std::string(1, c), start};
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
                ++end;
            }
            std::string word(src_.substr(pos_, end - pos_));
            pos_ = end;
            if (word == "0") {
                current_ = {GtToken::Kind::zero, word, start};
            } else if (word == "mu") {
                current_ = {GtToken::Kind::mu, word, start};
            } else {
                current_ = {GtToken::Kind::ident, word, start};
            }
        } else {
            throw parse_error("unexpected character '" + std::string(1, c) + "' at offset " +
                              std::to_string(pos_));
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    GtToken current_{GtToken::Kind::eof, "", 0};
};

} // namespace detail

// Parses the concrete syntax
//   G ::= 0 | P->Q:m.G | (G + G + ...) | mu t. G | t
// and validates it: branches of a sum share the sender and carry pairwise
// distinct (receiver, message) pairs, recursion variables are bound,
// pairwise distinct and guarded by at least one message, and nobody sends
// to themselves.
inline GlobalType parse_global_type(std::string_view src) {
    using Tok = detail::GtToken;
    detail::GtLexer lex(src);
    GlobalType g;

    auto expect = [&](Tok::Kind k, const char* what) -> Tok {
        Tok t = lex.take();
        if (t.kind != k) {
            throw parse_error(std::string("expected ") + what + " at offset " +
                              std::to_string(t.pos) + ", got '" + t.text + "'");
        }
        return t;
    };

    auto new_node = [&](GlobalType::Node n) {
        g.nodes_.push_back(std::move(n));
        return g.nodes_.size() - 1;
    };

    // One message-prefixed branch: P->Q:m.G, returning sender separately.
    auto parse_term = [&](auto&& self) -> std::size_t {
        auto parse_branch = [&](auto& term_self) -> std::pair<ProcessId, GlobalType::Branch> {
            Tok sender = expect(Tok::Kind::ident, "process name");
            expect(Tok::Kind::arrow, "'->'");
            Tok receiver = expect(Tok::Kind::ident, "process name");
            expect(Tok::Kind::colon, "':'");
            Tok msg = expect(Tok::Kind::ident, "message name");
            expect(Tok::Kind::dot, "'.'");
            std::size_t cont = term_self(term_self);
            try {
                return {ProcessId{sender.text},
                        GlobalType::Branch{ProcessId{receiver.text}, MessageLabel{msg.text}, cont}};
            } catch (const validation_error& e) {
                throw parse_error(std::string(e.what()) + " at offset " +
                                  std::to_string(sender.pos));
            }
        };

        Tok t = lex.peek();
        switch (t.kind) {
            case Tok::Kind::zero:
                lex.take();
                return new_node({GlobalType::Kind::end, {}, {}, "", 0, 0});
            case Tok::Kind::mu: {
                lex.take();
                Tok var = expect(Tok::Kind::ident, "recursion variable");
                expect(Tok::Kind::dot, "'.'");
                std::size_t id = new_node({GlobalType::Kind::rec, {}, {}, var.text, 0, 0});
                g.nodes_[id].body = self(self);
                return id;
            }
            case Tok::Kind::lparen: {
                lex.take();
                std::size_t id = new_node({GlobalType::Kind::choice, {}, {}, "", 0, 0});
                auto [sender, branch] = parse_branch(self);
                g.nodes_[id].sender = sender;
                g.nodes_[id].branches.push_back(branch);
                while (lex.peek().kind == Tok::Kind::plus) {
                    lex.take();
                    auto [s2, b2] = parse_branch(self);
                    if (s2 != sender) {
                        throw parse_error("all branches of a choice must share the sender, got " +
                                          sender.name + " and " + s2.name);
                    }
                    g.nodes_[id].branches.push_back(b2);
                }
                expect(Tok::Kind::rparen, "')'");
                return id;
            }
            case Tok::Kind::ident: {
                // Either a message prefix or a recursion variable.
                detail::GtLexer probe = lex;
                probe.take();
                if (probe.peek().kind == Tok::Kind::arrow) {
                    std::size_t id = new_node({GlobalType::Kind::choice, {}, {}, "", 0, 0});
                    auto [sender, branch] = parse_branch(self);
                    g.nodes_[id].sender = sender;
                    g.nodes_[id].branches.push_back(branch);
                    return id;
                }
                lex.take();
                return new_node({GlobalType::Kind::var, {}, {}, t.text, 0, 0});
            }
            default:
                throw parse_error("unexpected '" + t.text + "' at offset " + std::to_string(t.pos));
        }
    };

    g.root_ = parse_term(parse_term);
    Tok rest = lex.take();
    if (rest.kind != Tok::Kind::eof) {
        throw parse_error("trailing input at offset " + std::to_string(rest.pos) + ": '" +
                          rest.text + "'");
    }

    // Scope checks: binders distinct, variables bound, recursion guarded by
    // at least one message between binder and use.
    std::set<std::string> all_binders;
    // var name -> (binder id, guarded yet)
    std::vector<std::pair<std::string, std::size_t>> scope;
    auto walk = [&](auto&& self, std::size_t id, std::size_t depth_guarded) -> void {
        GlobalType::Node& n = g.nodes_[id];
        switch (n.kind) {
            case GlobalType::Kind::end:
                return;
            case GlobalType::Kind::rec: {
                if (!all_binders.insert(n.var).second) {
                    throw validation_error("recursion variable '" + n.var + "' bound twice");
                }
                scope.emplace_back(n.var, id);
                self(self, n.body, scope.size()); // nothing guarded below this binder yet
                scope.pop_back();
                return;
            }
            case GlobalType::Kind::var: {
                for (std::size_t i = scope.size(); i-- > 0;) {
                    if (scope[i].first == n.var) {
                        // Guarded iff a message prefix was crossed since the
                        // binder at scope depth i was opened.
                        if (depth_guarded > i) {
                            throw validation_error("recursion 'mu " + n.var +
                                                   "' is unguarded: no message before '" + n.var +
                                                   "'");
                        }
                        n.binder = scope[i].second;
                        return;
                    }
                }
                throw validation_error("unbound recursion variable '" + n.var + "'");
            }
            case GlobalType::Kind::choice: {
                std::set<std::pair<ProcessId, MessageLabel>> seen;
                for (const auto& b : n.branches) {
                    if (n.sender == b.receiver) {
                        throw validation_error("process " + n.sender.name + " sends to itself");
                    }
                    if (!seen.insert({b.receiver, b.msg}).second) {
                        throw validation_error("duplicate branch " + n.sender.name + "->" +
                                               b.receiver.name + ":" + b.msg.name);
                    }
                }
                for (const auto& b : n.branches) {
                    self(self, b.cont, 0); // a message guards all open binders
                }
                return;
            }
        }
    };
    walk(walk, g.root_, 0);
    return g;
}

// ---------------------------------------------------------------------------
// Automaton semantics.

// The exchange-labelled machine of a global type: one state per subterm
// occurrence, message transitions for branches, epsilon moves for
// unfolding recursion and jumping back from a variable to its binder. Only
// termination states are final; when the type never terminates, an (
// unreachable) final state still exists so the machine is well-formed.
inline Fsm<SyncEvent> build_sync_automaton(const GlobalType& g) {
    Fsm<SyncEvent> m;
    std::vector<StateId> state_of(g.node_count());
    bool has_end = false;
    for (std::size_t id = 0; id < g.node_count(); ++id) {
        state_of[id] = m.add_state(g.subterm_text(id));
        if (g.node(id).kind == GlobalType::Kind::end) has_end = true;
    }
    std::optional<StateId> lone_end;
    if (!has_end) lone_end = m.add_state("0");

    for (std::size_t id = 0; id < g.node_count(); ++id) {
        const auto& n = g.node(id);
        switch (n.kind) {
            case GlobalType::Kind::end:
                m.add_final(state_of[id]);
                break;
            case GlobalType::Kind::choice:
                for (const auto& b : n.branches) {
                    m.add_transition(state_of[id], SyncEvent{n.sender, b.receiver, b.msg},
                                     state_of[b.cont]);
                }
                break;
            case GlobalType::Kind::rec:
                m.add_transition(state_of[id], std::nullopt, state_of[n.body]);
                break;
            case GlobalType::Kind::var:
                m.add_transition(state_of[id], std::nullopt, state_of[n.binder]);
                break;
        }
    }
    if (lone_end) m.add_final(*lone_end);
    m.set_initial(state_of[g.root()]);
    return m;
}

// Splits every exchange transition into its send half followed by its
// receive half through a fresh intermediate state. Epsilon moves, initial
// and final states carry over.
inline Fsm<Event> expand(const Fsm<SyncEvent>& a) {
    Fsm<Event> out;
    for (StateId s = 0; s < a.state_count(); ++s) out.add_state(a.state_name(s));
    for (StateId s = 0; s < a.state_count(); ++s) {
        for (const auto& t : a.transitions_from(s)) {
            if (!t.letter) {
                out.add_transition(t.from, std::nullopt, t.to);
            } else {
                StateId mid = out.add_state(a.state_name(s) + "~" + t.letter->to_string());
                out.add_transition(t.from, t.letter->send_half(), mid);
                out.add_transition(mid, t.letter->recv_half(), t.to);
            }
        }
    }
    out.set_initial(a.initial());
    for (StateId f : a.finals()) out.add_final(f);
    return out;
}

inline Fsm<Event> build_event_automaton(const GlobalType& g) {
    return expand(build_sync_automaton(g));
}

// ---------------------------------------------------------------------------
// Embedding into a chart graph.

inline Bmsc single_exchange_chart(const SyncEvent& e) {
    return Bmsc(PrefixMsc::from_rows({{e.from, {e.send_half()}}, {e.to, {e.recv_half()}}}));
}

// One empty-chart vertex per subterm occurrence plus one single-exchange
// vertex per branch; edges follow the term structure with variables
// jumping back to their binders. Termination occurrences are the terminal
// vertices.
inline Hmsc embed_hmsc(const GlobalType& g) {
    Hmsc h;
    auto empty_chart = std::make_shared<const Bmsc>(Bmsc(PrefixMsc::empty()));
    std::vector<VertexId> vertex_of(g.node_count());
    for (std::size_t id = 0; id < g.node_count(); ++id) {
        vertex_of[id] = h.add_vertex("g" + std::to_string(id), empty_chart);
    }
    for (std::size_t id = 0; id < g.node_count(); ++id) {
        const auto& n = g.node(id);
        switch (n.kind) {
            case GlobalType::Kind::end:
                h.add_terminal(vertex_of[id]);
                break;
            case GlobalType::Kind::rec:
                h.add_edge(vertex_of[id], vertex_of[n.body]);
                break;
            case GlobalType::Kind::var:
                h.add_edge(vertex_of[id], vertex_of[n.binder]);
                break;
            case GlobalType::Kind::choice:
                for (std::size_t j = 0; j < n.branches.size(); ++j) {
                    const auto& b = n.branches[j];
                    VertexId bv =
                        h.add_vertex("g" + std::to_string(id) + "_b" + std::to_string(j),
                                     single_exchange_chart(SyncEvent{n.sender, b.receiver, b.msg}));
                    h.add_edge(vertex_of[id], bv);
                    h.add_edge(bv, vertex_of[b.cont]);
                }
                break;
        }
    }
    h.set_initial(vertex_of[g.root()]);
    return h;
}

// Every vertex chart carries at most one send and one receive node.
inline bool is_one_hmsc(const Hmsc& h) {
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        const PrefixMsc& m = h.chart(v).msc();
        std::size_t sends = 0, recvs = 0;
        for (NodeId n = 0; n < m.node_count(); ++n) {
            m.label(n).is_send() ? ++sends : ++recvs;
        }
        if (sends > 1 || recvs > 1) return false;
    }
    return true;
}

// Folds a one-exchange-per-vertex graph back into an exchange-labelled
// machine: each vertex becomes an entry and an exit state joined by its
// exchange (or an epsilon move for an empty chart), and graph edges become
// epsilon moves from exits to entries.
inline Fsm<SyncEvent> qopt(const Hmsc& h) {
    Fsm<SyncEvent> m;
    std::vector<StateId> entry(h.vertex_count()), exit(h.vertex_count());
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        const PrefixMsc& chart = h.chart(v).msc();
        std::optional<SyncEvent> letter;
        if (chart.node_count() == 2 && chart.send_count() == 1 && chart.complete()) {
            for (NodeId n = 0; n < chart.node_count(); ++n) {
                const Event& e = chart.label(n);
                if (e.is_send()) letter = SyncEvent{e.actor, e.peer, e.msg};
            }
        } else if (chart.node_count() != 0) {
            throw validation_error(
                "qopt requires every vertex chart to be empty or a single exchange; vertex '" +
                h.vertex_name(v) + "' is neither");
        }
        entry[v] = m.add_state(h.vertex_name(v) + ".1");
        exit[v] = m.add_state(h.vertex_name(v) + ".2");
        m.add_transition(entry[v], letter, exit[v]);
    }
    for (VertexId v = 0; v < h.vertex_count(); ++v) {
        for (VertexId u : h.successors(v)) m.add_transition(exit[v], std::nullopt, entry[u]);
        if (h.is_terminal(v)) m.add_final(exit[v]);
    }
    m.set_initial(entry[h.initial()]);
    return m;
}

} // namespace chanrest
