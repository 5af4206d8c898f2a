#include "pidstats/classifier.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pidstats {

std::string to_string(SchemeClass c) {
    switch (c) {
    case SchemeClass::DOI: return "DOI";
    case SchemeClass::Handle: return "Handle";
    case SchemeClass::Other: return "Other";
    }
    return "Other";
}

std::string to_string(PidForm f) {
    switch (f) {
    case PidForm::Original: return "Original";
    case PidForm::Actionable: return "Actionable";
    case PidForm::Locating: return "Locating";
    }
    return "Original";
}

std::optional<SchemeClass> scheme_class_from_string(std::string_view s) {
    if (s == "DOI")
        return SchemeClass::DOI;
    if (s == "Handle")
        return SchemeClass::Handle;
    if (s == "Other")
        return SchemeClass::Other;
    return std::nullopt;
}

ResolverWatchList ResolverWatchList::defaults() {
    ResolverWatchList wl;
    wl.entries_ = {
        {"doi.org", SchemeClass::DOI},
        {"dx.doi.org", SchemeClass::DOI},
        {"dx.medra.org", SchemeClass::DOI},
        {"hdl.handle.net", SchemeClass::Handle},
        {"n2t.net", SchemeClass::Other},
    };
    return wl;
}

ResolverWatchList ResolverWatchList::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read watch list " + path);
    ResolverWatchList wl;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#')
            continue;
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected host<TAB>class");
        std::string host = line.substr(start, tab - start);
        std::string cls = line.substr(tab + 1);
        while (!cls.empty() && (cls.back() == ' ' || cls.back() == '\t'))
            cls.pop_back();
        for (char& c : host)
            c = char(std::tolower(static_cast<unsigned char>(c)));
        auto sc = scheme_class_from_string(cls);
        if (!sc)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown scheme class '" + cls + "'");
        wl.entries_[host] = *sc;
    }
    return wl;
}

std::optional<SchemeClass> ResolverWatchList::class_of(std::string_view host) const {
    auto it = entries_.find(std::string(host));
    return it == entries_.end() ? std::nullopt : std::optional(it->second);
}

HostPredicate ResolverWatchList::predicate() const {
    return [this](std::string_view host) { return contains(host); };
}

namespace {

// DOIs compare case-insensitively in the prefix (before the first slash);
// suffix case is preserved since handle suffixes are case-sensitive.
std::string canonical_pid(std::string pid, SchemeClass cls) {
    if (cls == SchemeClass::DOI) {
        size_t slash = pid.find('/');
        size_t end = slash == std::string::npos ? pid.size() : slash;
        for (size_t i = 0; i < end; ++i)
            pid[i] = char(std::tolower(static_cast<unsigned char>(pid[i])));
    }
    return pid;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::optional<std::string> extract_pid(const NormalizedUri& uri) {
    std::string pid;
    if (uri.scheme && *uri.scheme == "info") {
        std::string_view path = uri.path;
        if (starts_with(path, "hdl/"))
            pid = std::string(path.substr(4));
        else if (starts_with(path, "doi/"))
            pid = std::string(path.substr(4));
        else
            return std::nullopt;
    } else if (uri.scheme && *uri.scheme == "doi" && uri.host) {
        // doi://10.1000/182 puts the prefix in the authority slot
        pid = *uri.host + uri.path;
    } else {
        pid = uri.path;
        if (!pid.empty() && pid.front() == '/')
            pid.erase(0, 1);
    }
    if (pid.empty())
        return std::nullopt;
    return pid;
}

std::optional<PidObservation> classify(const NormalizedUri& uri, PidSource source,
                                       const ResolverWatchList& watch_list,
                                       const BloomFilter* locating_filter) {
    if (uri.host) {
        if (auto cls = watch_list.class_of(*uri.host)) {
            auto pid = extract_pid(uri);
            if (!pid)
                return std::nullopt;
            PidObservation obs;
            obs.form = PidForm::Actionable;
            obs.scheme_class = *cls;
            obs.pid = canonical_pid(std::move(*pid), *cls);
            obs.resolver_host = *uri.host;
            obs.source = source;
            obs.uri = uri;
            return obs;
        }
    }
    if (uri.scheme && (*uri.scheme == "doi" || *uri.scheme == "info")) {
        SchemeClass cls;
        if (*uri.scheme == "doi")
            cls = SchemeClass::DOI;
        else if (starts_with(uri.path, "hdl/"))
            cls = SchemeClass::Handle;
        else if (starts_with(uri.path, "doi/"))
            cls = SchemeClass::DOI;
        else
            return std::nullopt;  // other info: namespaces
        auto pid = extract_pid(uri);
        if (!pid)
            return std::nullopt;
        PidObservation obs;
        obs.form = PidForm::Original;
        obs.scheme_class = cls;
        obs.pid = canonical_pid(std::move(*pid), cls);
        obs.source = source;
        obs.uri = uri;
        return obs;
    }
    if (locating_filter) {
        std::string key = recompose(uri);
        if (!key.empty() && locating_filter->probe(key)) {
            PidObservation obs;
            obs.form = PidForm::Locating;
            obs.scheme_class = SchemeClass::Other;
            obs.pid = key;
            obs.source = source;
            obs.uri = uri;
            return obs;
        }
    }
    return std::nullopt;
}

namespace {

std::optional<PidObservation> original_doi_from(const std::string& value, PidSource source) {
    NormalizedUri uri = normalize(value);
    if (!uri.scheme || *uri.scheme != "doi")
        return std::nullopt;
    auto pid = extract_pid(uri);
    if (!pid || !starts_with(*pid, "10."))
        return std::nullopt;  // all DOIs carry the 10. directory prefix
    PidObservation obs;
    obs.form = PidForm::Original;
    obs.scheme_class = SchemeClass::DOI;
    obs.pid = canonical_pid(std::move(*pid), SchemeClass::DOI);
    obs.source = source;
    obs.uri = std::move(uri);
    return obs;
}

}  // namespace

std::optional<PidObservation> scan_head_meta(const HeadMetaEntry& entry) {
    if (!entry.content)
        return std::nullopt;
    auto obs = original_doi_from(*entry.content, PidSource::HeadMeta);
    if (obs)
        obs->meta_name = entry.name;
    return obs;
}

std::optional<PidObservation> scan_head_link(const HeadLinkEntry& entry) {
    if (!entry.href)
        return std::nullopt;
    return original_doi_from(*entry.href, PidSource::HeadLink);
}

}  // namespace pidstats
