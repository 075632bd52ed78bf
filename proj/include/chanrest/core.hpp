#pragma once

#include <cctype>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chanrest {

// Error taxonomy shared by all modules. Parsers throw parse_error with a
// position, structural checks throw validation_error, operations that
// require channel-compliant input throw compliance_error.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : error {
    using error::error;
};

struct validation_error : error {
    using error::error;
};

struct compliance_error : error {
    using error::error;
};

struct disabled_action_error : error {
    using error::error;
};

struct resource_limit_error : error {
    using error::error;
};

namespace detail {

inline void hash_combine(std::size_t& seed, std::size_t v) {
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

} // namespace detail

// A named process. Distinct names denote distinct processes.
struct ProcessId {
    std::string name;

    ProcessId() = default;
    explicit ProcessId(std::string n) : name(std::move(n)) {
        if (!detail::is_identifier(name)) {
            throw validation_error("invalid process name: '" + name + "'");
        }
    }

    auto operator<=>(const ProcessId&) const = default;
};

// A message value drawn from the finite message set of an input.
struct MessageLabel {
    std::string name;

    MessageLabel() = default;
    explicit MessageLabel(std::string n) : name(std::move(n)) {
        if (!detail::is_identifier(name)) {
            throw validation_error("invalid message name: '" + name + "'");
        }
    }

    auto operator<=>(const MessageLabel&) const = default;
};

// Directed point-to-point channel from one process to another.
struct Channel {
    ProcessId from;
    ProcessId to;

    auto operator<=>(const Channel&) const = default;
};

enum class EventKind : std::uint8_t { send, recv };

// One send or receive action. The actor performs the action:
// for a send, actor hands msg to the channel towards peer; for a receive,
// actor pops msg from the channel coming from peer.
// Text forms are fixed: send "P>Q!m", receive "P<Q?m".
struct Event {
    EventKind kind = EventKind::send;
    ProcessId actor;
    ProcessId peer;
    MessageLabel msg;

    Event() = default;
    Event(EventKind k, ProcessId a, ProcessId p, MessageLabel m)
        : kind(k), actor(std::move(a)), peer(std::move(p)), msg(std::move(m)) {
        if (actor == peer) {
            throw validation_error("self-directed event: " + actor.name);
        }
    }

    static Event send(ProcessId from, ProcessId to, MessageLabel m) {
        return Event(EventKind::send, std::move(from), std::move(to), std::move(m));
    }
    static Event recv(ProcessId at, ProcessId from, MessageLabel m) {
        return Event(EventKind::recv, std::move(at), std::move(from), std::move(m));
    }

    bool is_send() const { return kind == EventKind::send; }
    bool is_recv() const { return kind == EventKind::recv; }

    // The channel this event acts on; both halves of a matched pair
    // report the same channel.
    Channel channel() const {
        return is_send() ? Channel{actor, peer} : Channel{peer, actor};
    }

    std::string to_string() const {
        return actor.name + (is_send() ? ">" : "<") + peer.name +
               (is_send() ? "!" : "?") + msg.name;
    }

    auto operator<=>(const Event&) const = default;
};

// A combined send/receive exchange "P->Q:m" used by global-type automata.
struct SyncEvent {
    ProcessId from;
    ProcessId to;
    MessageLabel msg;

    SyncEvent() = default;
    SyncEvent(ProcessId f, ProcessId t, MessageLabel m)
        : from(std::move(f)), to(std::move(t)), msg(std::move(m)) {
        if (from == to) {
            throw validation_error("self-directed exchange: " + from.name);
        }
    }

    Event send_half() const { return Event::send(from, to, msg); }
    Event recv_half() const { return Event::recv(to, from, msg); }

    std::string to_string() const {
        return from.name + "->" + to.name + ":" + msg.name;
    }

    auto operator<=>(const SyncEvent&) const = default;
};

using Trace = std::vector<Event>;

// Parses an event token in the fixed "P>Q!m" / "P<Q?m" syntax.
inline Event parse_event(std::string_view token) {
    auto dir = token.find_first_of("<>");
    if (dir == std::string_view::npos) {
        throw parse_error("event token missing '>' or '<': '" + std::string(token) + "'");
    }
    bool send = token[dir] == '>';
    auto op = token.find(send ? '!' : '?', dir + 1);
    if (op == std::string_view::npos) {
        throw parse_error(std::string("event token missing '") + (send ? '!' : '?') +
                          "': '" + std::string(token) + "'");
    }
    try {
        ProcessId actor{std::string(token.substr(0, dir))};
        ProcessId peer{std::string(token.substr(dir + 1, op - dir - 1))};
        MessageLabel msg{std::string(token.substr(op + 1))};
        return Event(send ? EventKind::send : EventKind::recv, actor, peer, msg);
    } catch (const validation_error& e) {
        throw parse_error("bad event token '" + std::string(token) + "': " + e.what());
    }
}

inline SyncEvent parse_sync_event(std::string_view token) {
    auto arrow = token.find("->");
    auto colon = token.find(':');
    if (arrow == std::string_view::npos || colon == std::string_view::npos || colon < arrow) {
        throw parse_error("exchange token must look like P->Q:m, got '" +
                          std::string(token) + "'");
    }
    try {
        ProcessId from{std::string(token.substr(0, arrow))};
        ProcessId to{std::string(token.substr(arrow + 2, colon - arrow - 2))};
        MessageLabel msg{std::string(token.substr(colon + 1))};
        return SyncEvent(from, to, msg);
    } catch (const validation_error& e) {
        throw parse_error("bad exchange token '" + std::string(token) + "': " + e.what());
    }
}

inline std::string to_string(const Trace& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += w[i].to_string();
    }
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const Event& e) { return os << e.to_string(); }
inline std::ostream& operator<<(std::ostream& os, const SyncEvent& e) { return os << e.to_string(); }

} // namespace chanrest

template <>
struct std::hash<chanrest::ProcessId> {
    std::size_t operator()(const chanrest::ProcessId& p) const noexcept {
        return std::hash<std::string>{}(p.name);
    }
};

template <>
struct std::hash<chanrest::MessageLabel> {
    std::size_t operator()(const chanrest::MessageLabel& m) const noexcept {
        return std::hash<std::string>{}(m.name);
    }
};

template <>
struct std::hash<chanrest::Channel> {
    std::size_t operator()(const chanrest::Channel& c) const noexcept {
        std::size_t h = std::hash<std::string>{}(c.from.name);
        chanrest::detail::hash_combine(h, std::hash<std::string>{}(c.to.name));
        return h;
    }
};

template <>
struct std::hash<chanrest::Event> {
    std::size_t operator()(const chanrest::Event& e) const noexcept {
        std::size_t h = static_cast<std::size_t>(e.kind);
        chanrest::detail::hash_combine(h, std::hash<std::string>{}(e.actor.name));
        chanrest::detail::hash_combine(h, std::hash<std::string>{}(e.peer.name));
        chanrest::detail::hash_combine(h, std::hash<std::string>{}(e.msg.name));
        return h;
    }
};

template <>
struct std::hash<chanrest::SyncEvent> {
    std::size_t operator()(const chanrest::SyncEvent& e) const noexcept {
        std::size_t h = std::hash<std::string>{}(e.from.name);
        chanrest::detail::hash_combine(h, std::hash<std::string>{}(e.to.name));
        chanrest::detail::hash_combine(h, std::hash<std::string>{}(e.msg.name));
        return h;
    }
};

template <>
struct std::hash<chanrest::Trace> {
    std::size_t operator()(const chanrest::Trace& w) const noexcept {
        std::size_t h = w.size();
        for (const auto& e : w) {
            chanrest::detail::hash_combine(h, std::hash<chanrest::Event>{}(e));
        }
        return h;
    }
};
