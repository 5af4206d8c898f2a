#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pidstats/bloom.hpp"
#include "pidstats/uri.hpp"

namespace pidstats {

enum class SchemeClass { DOI, Handle, Other };
enum class PidForm { Original, Actionable, Locating };
enum class PidSource { BodyLink, HeadLink, HeadMeta };

std::string to_string(SchemeClass c);
std::string to_string(PidForm f);
std::optional<SchemeClass> scheme_class_from_string(std::string_view s);

/// Hosts whose URIs are actionable PID forms, each mapped to a scheme class.
class ResolverWatchList {
public:
    static ResolverWatchList defaults();
    /// One entry per line: host<TAB>class, UTF-8, '#' comments.
    static ResolverWatchList load_file(const std::string& path);

    std::optional<SchemeClass> class_of(std::string_view host) const;
    bool contains(std::string_view host) const { return class_of(host).has_value(); }
    const std::map<std::string, SchemeClass>& entries() const { return entries_; }

    HostPredicate predicate() const;

private:
    std::map<std::string, SchemeClass> entries_;
};

struct PidObservation {
    PidForm form;
    SchemeClass scheme_class;
    std::string pid;  // canonical merge key, e.g. "10.1000/182"
    std::optional<std::string> resolver_host;
    PidSource source;
    NormalizedUri uri;
    std::optional<std::string> meta_name;  // set for head-meta observations
};

/// Canonical PID from an actionable or original-form URI: path without its
/// leading slash, query and fragment dropped; for info: URIs, the part after
/// the hdl/ or doi/ namespace prefix. Empty result reports nullopt.
std::optional<std::string> extract_pid(const NormalizedUri& uri);

/// Recognize a PID occurrence: actionable (watch-list host), original
/// (doi:/info: schemes) or locating (member of the supplied filter).
std::optional<PidObservation> classify(const NormalizedUri& uri, PidSource source,
                                       const ResolverWatchList& watch_list,
                                       const BloomFilter* locating_filter = nullptr);

/// Head meta whose content is an original-form DOI ("doi:10...." after
/// normalization); carries the meta name for tag tabulation.
struct HeadMetaEntry {
    std::optional<std::string> name;
    std::optional<std::string> content;
};

struct HeadLinkEntry {
    std::optional<std::string> rel;
    std::optional<std::string> href;
};

std::optional<PidObservation> scan_head_meta(const HeadMetaEntry& entry);
std::optional<PidObservation> scan_head_link(const HeadLinkEntry& entry);

}  // namespace pidstats
