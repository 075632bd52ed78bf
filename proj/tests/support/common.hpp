#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chanrest/core.hpp"
#include "chanrest/formats.hpp"
#include "chanrest/msc.hpp"

namespace chanrest::testing {

inline std::filesystem::path corpus_dir() { return CHANREST_CORPUS_DIR; }

inline std::filesystem::path corpus(const std::string& name) { return corpus_dir() / name; }

// Shorthand trace literal: "P>Q!m Q<P?m".
inline Trace tr(const std::string& text) { return parse_trace_text(text); }

inline ProcessId pid(const std::string& name) { return ProcessId{name}; }
inline MessageLabel msg(const std::string& name) { return MessageLabel{name}; }

// The crossing two-message word used all over the examples.
inline Trace w_cross() { return tr("P>Q!m1 Q>P!m2 Q<P?m1 P<Q?m2"); }

// The finished list-protocol word with no elements.
inline Trace w_list_nil() { return tr("P>Q!nil Q<P?nil Q>P!ack P<Q?ack"); }

inline PrefixMsc m_cross() { return load_msc_file(corpus("m_cross.msc")); }
inline PrefixMsc m_mixed() { return load_msc_file(corpus("m_mixed.msc")); }
inline PrefixMsc m_relay() { return load_msc_file(corpus("m_relay.msc")); }
inline PrefixMsc m_ring() { return load_msc_file(corpus("m_ring.msc")); }

} // namespace chanrest::testing
