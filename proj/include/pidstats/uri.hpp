#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace pidstats {

/// Decomposed, cleaned URI. `raw` keeps the input byte-exact for audit output.
struct NormalizedUri {
    std::optional<std::string> scheme;  // lowercase
    std::optional<std::string> host;    // lowercase, no escapes, no whitespace
    std::optional<uint16_t> port;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;
    bool had_scheme = false;
    bool degenerate = false;  // nothing parseable survived cleaning
    std::string raw;
};

/// Predicate for hosts whose path/query get full percent-decoding (the
/// resolver watch-list); unreserved octets are decoded everywhere regardless.
using HostPredicate = std::function<bool(std::string_view)>;

/// Clean and parse a raw link string:
///  1. strip whitespace (space, tab, CR, LF, FF, NBSP) everywhere;
///  2. decode &amp; &lt; &gt; &quot; &apos; and numeric character references;
///  3. percent-decode once: unreserved octets always, everything safe when the
///     host is a recognized resolver or the scheme is an original PID form;
///  4. lowercase scheme and host.
/// Never fails; unparseable leftovers land in `path` with degenerate set.
NormalizedUri normalize(std::string_view raw, const HostPredicate& resolver_hosts = nullptr);

/// Lowercase scheme, or "(none)" when absent.
std::string scheme_of(const NormalizedUri& uri);

/// Recompose components into a canonical string (used as sketch/filter key).
std::string recompose(const NormalizedUri& uri);

}  // namespace pidstats
