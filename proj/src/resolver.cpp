#include "pidstats/resolver.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <condition_variable>
#include <set>
#include <thread>
#include <unistd.h>

using nlohmann::json;

namespace pidstats {

std::string to_string(ResolveOutcome o) {
    switch (o) {
    case ResolveOutcome::Resolved: return "resolved";
    case ResolveOutcome::HttpError: return "http_error";
    case ResolveOutcome::DnsFailure: return "dns_failure";
    case ResolveOutcome::ConnectTimeout: return "connect_timeout";
    case ResolveOutcome::TooManyHops: return "too_many_hops";
    case ResolveOutcome::RedirectLoop: return "redirect_loop";
    }
    return "http_error";
}

std::optional<ResolveOutcome> outcome_from_string(std::string_view s) {
    if (s == "resolved") return ResolveOutcome::Resolved;
    if (s == "http_error") return ResolveOutcome::HttpError;
    if (s == "dns_failure") return ResolveOutcome::DnsFailure;
    if (s == "connect_timeout") return ResolveOutcome::ConnectTimeout;
    if (s == "too_many_hops") return ResolveOutcome::TooManyHops;
    if (s == "redirect_loop") return ResolveOutcome::RedirectLoop;
    return std::nullopt;
}

namespace {

double mono_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// RFC 3986 dot-segment removal, enough for Location merging
std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string> segments;
    bool absolute = !path.empty() && path.front() == '/';
    bool trailing_slash = false;
    size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/')
            ++i;
        size_t end = path.find('/', i);
        std::string_view seg =
            path.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
        i = end == std::string_view::npos ? path.size() : end;
        trailing_slash = end != std::string_view::npos;
        if (seg == ".") {
            continue;
        } else if (seg == "..") {
            if (!segments.empty())
                segments.pop_back();
        } else if (!seg.empty()) {
            segments.emplace_back(seg);
        }
    }
    std::string out;
    for (const auto& seg : segments) {
        if (absolute || !out.empty())
            out += '/';
        out += seg;
    }
    if (absolute && out.empty())
        out = "/";
    if (trailing_slash && !out.empty() && out.back() != '/')
        out += '/';
    return out;
}

}  // namespace

std::string resolve_reference(const NormalizedUri& base, const std::string& location) {
    NormalizedUri ref = normalize(location);
    NormalizedUri out;
    if (ref.scheme) {
        out = ref;
    } else if (ref.host) {  // network-path reference
        out = ref;
        out.scheme = base.scheme;
    } else {
        out.scheme = base.scheme;
        out.host = base.host;
        out.port = base.port;
        if (ref.path.empty()) {
            out.path = base.path;
            out.query = ref.query ? ref.query : base.query;
        } else if (ref.path.front() == '/') {
            out.path = ref.path;
            out.query = ref.query;
        } else {
            size_t slash = base.path.rfind('/');
            std::string merged =
                slash == std::string::npos ? ref.path : base.path.substr(0, slash + 1) + ref.path;
            out.path = merged;
            out.query = ref.query;
        }
        out.fragment = ref.fragment;
    }
    out.path = remove_dot_segments(out.path);
    return recompose(out);
}

ResolutionCache::ResolutionCache(std::string path) : path_(std::move(path)) {
    if (std::FILE* in = std::fopen(path_.c_str(), "r")) {
        std::string line;
        char buf[1 << 14];
        while (std::fgets(buf, sizeof buf, in)) {
            line = buf;
            while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
                line.pop_back();
            if (line.empty())
                continue;
            json doc = json::parse(line, nullptr, false);
            if (doc.is_discarded())
                continue;  // torn trailing write from a crash
            RedirectResolution r;
            r.start = doc.value("start", "");
            for (const auto& hop : doc.value("hops", json::array()))
                r.hops.push_back({hop[0].get<int>(), hop[1].get<std::string>()});
            r.terminal_status = doc.value("terminal_status", 0);
            if (doc.contains("locating") && doc["locating"].is_string())
                r.locating = doc["locating"].get<std::string>();
            r.outcome = outcome_from_string(doc.value("outcome", "http_error"))
                            .value_or(ResolveOutcome::HttpError);
            if (!r.start.empty())
                entries_[r.start] = std::move(r);
        }
        std::fclose(in);
    }
    file_ = std::fopen(path_.c_str(), "a");
    if (!file_)
        throw std::runtime_error("cannot open resolution cache " + path_);
}

ResolutionCache::~ResolutionCache() {
    if (file_)
        std::fclose(file_);
}

std::optional<RedirectResolution> ResolutionCache::lookup(const std::string& start) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(start);
    return it == entries_.end() ? std::nullopt : std::optional(it->second);
}

void ResolutionCache::put(const RedirectResolution& r) {
    json doc;
    doc["start"] = r.start;
    json hops = json::array();
    for (const auto& hop : r.hops)
        hops.push_back(json::array({hop.status, hop.location}));
    doc["hops"] = std::move(hops);
    doc["terminal_status"] = r.terminal_status;
    if (r.locating)
        doc["locating"] = *r.locating;
    else
        doc["locating"] = nullptr;
    doc["outcome"] = to_string(r.outcome);
    doc["timestamp"] = uint64_t(std::time(nullptr));
    std::string line = doc.dump();
    line += '\n';

    std::lock_guard lock(mutex_);
    entries_[r.start] = r;
    std::fwrite(line.data(), 1, line.size(), file_);
}

void ResolutionCache::flush() {
    std::lock_guard lock(mutex_);
    std::fflush(file_);
    ::fsync(fileno(file_));
}

ResolverClient::ResolverClient(ResolverPolicy policy) : policy_(std::move(policy)) {}

void ResolverClient::rate_wait(const std::string& host) {
    if (policy_.per_host_rate <= 0.0)
        return;
    double interval = 1.0 / policy_.per_host_rate;
    double slot;
    {
        std::lock_guard lock(rate_mutex_);
        double now = mono_seconds();
        double& next = next_slot_[host];
        slot = next > now ? next : now;
        next = slot + interval;
    }
    double wait = slot - mono_seconds();
    if (wait > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
}

RedirectResolution ResolverClient::resolve(const std::string& uri) {
    RedirectResolution result;
    result.start = uri;
    double t0 = mono_seconds();

    NormalizedUri current = normalize(uri);
    std::set<std::string> seen{recompose(current)};

    for (int hop = 0;; ++hop) {
        if (!current.scheme || !current.host ||
            (*current.scheme != "http" && *current.scheme != "https")) {
            result.outcome = ResolveOutcome::HttpError;
            break;
        }
        if (hop > policy_.max_hops) {
            result.outcome = ResolveOutcome::TooManyHops;
            break;
        }

        std::string origin = *current.scheme + "://" + *current.host;
        if (current.port)
            origin += ":" + std::to_string(*current.port);
        std::string target = current.path.empty() ? "/" : current.path;
        if (current.query)
            target += "?" + *current.query;

        httplib::Client client(origin);
        client.set_follow_location(false);
        int sec = int(policy_.timeout_s);
        int usec = int((policy_.timeout_s - sec) * 1e6);
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        httplib::Headers headers{{"User-Agent", policy_.user_agent}};

        httplib::Result res{nullptr, httplib::Error::Unknown};
        for (int attempt = 0; attempt <= policy_.retries; ++attempt) {
            ++result.attempts;
            rate_wait(*current.host);
            res = client.Head(target, headers);
            if (res && policy_.get_fallback && res->status == 405) {
                ++result.attempts;
                rate_wait(*current.host);
                res = client.Get(target, headers);
            }
            if (res)
                break;
            bool retriable = res.error() == httplib::Error::Connection ||
                             res.error() == httplib::Error::ConnectionTimeout ||
                             res.error() == httplib::Error::Read;
            if (!retriable || attempt == policy_.retries)
                break;
            std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
        }

        if (!res) {
            result.outcome = res.error() == httplib::Error::ConnectionTimeout ||
                                     res.error() == httplib::Error::Read
                                 ? ResolveOutcome::ConnectTimeout
                                 : ResolveOutcome::DnsFailure;
            break;
        }

        int status = res->status;
        if (status >= 300 && status < 400 && res->has_header("Location")) {
            std::string location = res->get_header_value("Location");
            result.hops.push_back({status, location});
            std::string next = resolve_reference(current, location);
            current = normalize(next);
            std::string key = recompose(current);
            if (!seen.insert(key).second) {
                result.outcome = ResolveOutcome::RedirectLoop;
                result.terminal_status = status;
                result.elapsed_s = mono_seconds() - t0;
                return result;
            }
            continue;
        }

        result.terminal_status = status;
        if (status == 200) {
            result.outcome = ResolveOutcome::Resolved;
            result.locating = recompose(current);
        } else {
            result.outcome = ResolveOutcome::HttpError;
        }
        break;
    }

    result.elapsed_s = mono_seconds() - t0;
    return result;
}

std::vector<RedirectResolution> ResolverClient::resolve_batch(
    const std::vector<std::string>& uris, ResolutionCache* cache) {
    // dedup, preserving first-seen order for the work list
    std::vector<std::string> unique;
    std::map<std::string, size_t> index;
    for (const auto& uri : uris) {
        if (index.emplace(uri, unique.size()).second)
            unique.push_back(uri);
    }

    std::vector<std::optional<RedirectResolution>> resolved(unique.size());
    std::vector<size_t> todo;
    for (size_t i = 0; i < unique.size(); ++i) {
        if (cache) {
            if (auto hit = cache->lookup(unique[i])) {
                resolved[i] = std::move(*hit);
                continue;
            }
        }
        todo.push_back(i);
    }

    if (!todo.empty()) {
        std::mutex gate_mutex;
        std::condition_variable gate_cv;
        std::map<std::string, int> inflight;
        std::atomic<size_t> cursor{0};

        auto host_of = [](const std::string& uri) {
            NormalizedUri u = normalize(uri);
            return u.host ? *u.host : std::string();
        };

        auto worker = [&] {
            for (;;) {
                size_t slot = cursor.fetch_add(1);
                if (slot >= todo.size())
                    return;
                size_t i = todo[slot];
                std::string host = host_of(unique[i]);
                {
                    std::unique_lock lock(gate_mutex);
                    gate_cv.wait(lock,
                                 [&] { return inflight[host] < policy_.per_host_concurrency; });
                    ++inflight[host];
                }
                RedirectResolution r = resolve(unique[i]);
                {
                    std::lock_guard lock(gate_mutex);
                    --inflight[host];
                }
                gate_cv.notify_all();
                if (cache)
                    cache->put(r);
                resolved[i] = std::move(r);
            }
        };

        int width = std::max(1, std::min<int>(policy_.concurrency, int(todo.size())));
        std::vector<std::thread> threads;
        threads.reserve(size_t(width));
        for (int t = 0; t < width; ++t)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
        if (cache)
            cache->flush();
    }

    std::vector<RedirectResolution> out;
    out.reserve(uris.size());
    for (const auto& uri : uris)
        out.push_back(*resolved[index[uri]]);
    return out;
}

}  // namespace pidstats
