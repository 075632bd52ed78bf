#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chanrest/core.hpp"

namespace chanrest {

using StateId = std::size_t;

// A finite state machine over an arbitrary letter type; nullopt letters
// are epsilon moves. Acceptance is by final state on finite words.
template <typename Letter>
class Fsm {
public:
    struct Transition {
        StateId from;
        std::optional<Letter> letter;
        StateId to;
    };

    StateId add_state(std::string name = {}) {
        if (name.empty()) name = "s" + std::to_string(names_.size());
        names_.push_back(std::move(name));
        out_.emplace_back();
        return names_.size() - 1;
    }

    void add_transition(StateId from, std::optional<Letter> letter, StateId to) {
        check_state(from);
        check_state(to);
        Transition t{from, std::move(letter), to};
        // Keep the transition list duplicate-free so searches stay small.
        for (const auto& existing : out_[from]) {
            if (existing.letter == t.letter && existing.to == t.to) return;
        }
        out_[from].push_back(std::move(t));
    }

    void set_initial(StateId s) {
        check_state(s);
        initial_ = s;
    }
    void add_final(StateId s) {
        check_state(s);
        finals_.insert(s);
    }

    std::size_t state_count() const { return names_.size(); }
    StateId initial() const { return initial_; }
    const std::set<StateId>& finals() const { return finals_; }
    bool is_final(StateId s) const { return finals_.count(s) > 0; }
    const std::string& state_name(StateId s) const {
        check_state(s);
        return names_[s];
    }
    const std::vector<Transition>& transitions_from(StateId s) const {
        check_state(s);
        return out_[s];
    }

    std::vector<Transition> all_transitions() const {
        std::vector<Transition> out;
        for (const auto& ts : out_) out.insert(out.end(), ts.begin(), ts.end());
        return out;
    }

    // States reachable by epsilon moves only, including the state itself.
    std::vector<StateId> eps_closure(StateId s) const {
        check_state(s);
        std::vector<bool> seen(state_count(), false);
        std::vector<StateId> stack{s}, out;
        seen[s] = true;
        while (!stack.empty()) {
            StateId v = stack.back();
            stack.pop_back();
            out.push_back(v);
            for (const auto& t : out_[v]) {
                if (!t.letter && !seen[t.to]) {
                    seen[t.to] = true;
                    stack.push_back(t.to);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<StateId> eps_closure(const std::vector<StateId>& set) const {
        std::vector<bool> seen(state_count(), false);
        std::vector<StateId> stack, out;
        for (StateId s : set) {
            if (!seen[s]) {
                seen[s] = true;
                stack.push_back(s);
            }
        }
        while (!stack.empty()) {
            StateId v = stack.back();
            stack.pop_back();
            out.push_back(v);
            for (const auto& t : out_[v]) {
                if (!t.letter && !seen[t.to]) {
                    seen[t.to] = true;
                    stack.push_back(t.to);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    void check_state(StateId s) const {
        if (s >= names_.size()) {
            throw validation_error("unknown state id " + std::to_string(s));
        }
    }

    std::vector<std::string> names_;
    std::vector<std::vector<Transition>> out_;
    StateId initial_ = 0;
    std::set<StateId> finals_;
};

// All accepted words of length at most max_len, epsilon moves free.
// Enumerates over the on-the-fly determinization, so each word is visited
// once.
template <typename Letter>
std::set<std::vector<Letter>> bounded_language(const Fsm<Letter>& a, std::size_t max_len) {
    std::set<std::vector<Letter>> out;
    if (a.state_count() == 0) return out;
    std::vector<Letter> word;

    auto rec = [&](auto&& self, const std::vector<StateId>& subset) -> void {
        for (StateId s : subset) {
            if (a.is_final(s)) {
                out.insert(word);
                break;
            }
        }
        if (word.size() == max_len) return;
        std::map<Letter, std::vector<StateId>> step;
        for (StateId s : subset) {
            for (const auto& t : a.transitions_from(s)) {
                if (t.letter) step[*t.letter].push_back(t.to);
            }
        }
        for (auto& [letter, targets] : step) {
            word.push_back(letter);
            self(self, a.eps_closure(targets));
            word.pop_back();
        }
    };
    rec(rec, a.eps_closure(a.initial()));
    return out;
}

// Witness for mutual weak simulation: pairs related in each direction.
struct WeakBisimWitness {
    std::vector<std::pair<StateId, StateId>> r1; // A-state, B-state
    std::vector<std::pair<StateId, StateId>> r2; // B-state, A-state
};

namespace detail {

// Greatest relation R with: every transition of `a` from a related state is
// matched by a weak transition of `b` to a related state, and every final
// state of `a` relates only to states of `b` that can reach a final state
// by epsilon moves. Such a relation containing the initial pair certifies
// language inclusion of `a` in `b`.
template <typename Letter>
std::vector<std::vector<bool>> greatest_weak_simulation(const Fsm<Letter>& a,
                                                        const Fsm<Letter>& b) {
    const std::size_t na = a.state_count(), nb = b.state_count();

    std::vector<std::vector<StateId>> closure_b(nb);
    std::vector<bool> eps_final_b(nb, false);
    for (StateId s = 0; s < nb; ++s) {
        closure_b[s] = b.eps_closure(s);
        for (StateId t : closure_b[s]) {
            if (b.is_final(t)) eps_final_b[s] = true;
        }
    }
    // Weak letter steps of b: epsilon*, letter, epsilon*.
    std::vector<std::map<Letter, std::set<StateId>>> weak_b(nb);
    for (StateId s = 0; s < nb; ++s) {
        for (StateId mid : closure_b[s]) {
            for (const auto& t : b.transitions_from(mid)) {
                if (!t.letter) continue;
                for (StateId end : closure_b[t.to]) weak_b[s][*t.letter].insert(end);
            }
        }
    }

    std::vector<std::vector<bool>> rel(na, std::vector<bool>(nb, true));
    for (StateId sa = 0; sa < na; ++sa) {
        if (!a.is_final(sa)) continue;
        for (StateId sb = 0; sb < nb; ++sb) {
            if (!eps_final_b[sb]) rel[sa][sb] = false;
        }
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId sa = 0; sa < na; ++sa) {
            for (StateId sb = 0; sb < nb; ++sb) {
                if (!rel[sa][sb]) continue;
                bool ok = true;
                for (const auto& t : a.transitions_from(sa)) {
                    bool matched = false;
                    if (t.letter) {
                        auto it = weak_b[sb].find(*t.letter);
                        if (it != weak_b[sb].end()) {
                            for (StateId tb : it->second) {
                                if (rel[t.to][tb]) {
                                    matched = true;
                                    break;
                                }
                            }
                        }
                    } else {
                        for (StateId tb : closure_b[sb]) {
                            if (rel[t.to][tb]) {
                                matched = true;
                                break;
                            }
                        }
                    }
                    if (!matched) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) {
                    rel[sa][sb] = false;
                    changed = true;
                }
            }
        }
    }
    return rel;
}

} // namespace detail

// Mutual weak simulation witness, or absent when one direction fails. A
// returned witness certifies that both machines accept the same finite
// words.
template <typename Letter>
std::optional<WeakBisimWitness> find_weak_bisimulation(const Fsm<Letter>& a,
                                                       const Fsm<Letter>& b) {
    auto r1 = detail::greatest_weak_simulation(a, b);
    auto r2 = detail::greatest_weak_simulation(b, a);
    if (!r1[a.initial()][b.initial()] || !r2[b.initial()][a.initial()]) return std::nullopt;

    WeakBisimWitness w;
    for (StateId sa = 0; sa < a.state_count(); ++sa) {
        for (StateId sb = 0; sb < b.state_count(); ++sb) {
            if (r1[sa][sb]) w.r1.emplace_back(sa, sb);
        }
    }
    for (StateId sb = 0; sb < b.state_count(); ++sb) {
        for (StateId sa = 0; sa < a.state_count(); ++sa) {
            if (r2[sb][sa]) w.r2.emplace_back(sb, sa);
        }
    }
    return w;
}

} // namespace chanrest
