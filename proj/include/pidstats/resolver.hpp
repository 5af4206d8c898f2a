#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pidstats/uri.hpp"

namespace pidstats {

struct ResolverPolicy {
    int max_hops = 10;
    double timeout_s = 30.0;
    int retries = 2;               // extra attempts on connect/read failure
    double per_host_rate = 0.0;    // requests per second, 0 = unlimited
    int per_host_concurrency = 4;
    int concurrency = 8;           // global in-flight bound for batches
    std::string user_agent = "pidstats-resolver/0.1";
    bool get_fallback = false;     // retry with GET when a server rejects HEAD
};

enum class ResolveOutcome {
    Resolved,      // reached a 200
    HttpError,     // terminal 4xx/5xx
    DnsFailure,
    ConnectTimeout,
    TooManyHops,
    RedirectLoop,
};

std::string to_string(ResolveOutcome o);
std::optional<ResolveOutcome> outcome_from_string(std::string_view s);

struct Hop {
    int status = 0;
    std::string location;
};

struct RedirectResolution {
    std::string start;
    std::vector<Hop> hops;
    int terminal_status = 0;
    std::optional<std::string> locating;  // present iff outcome == Resolved
    ResolveOutcome outcome = ResolveOutcome::HttpError;
    double elapsed_s = 0.0;
    int attempts = 0;
};

/// Resolve a Location header against the URI that produced it.
std::string resolve_reference(const NormalizedUri& base, const std::string& location);

/// Append-only JSONL store of resolutions, loaded into memory on open;
/// flush() fsyncs, called at batch boundaries.
class ResolutionCache {
public:
    explicit ResolutionCache(std::string path);
    ~ResolutionCache();

    std::optional<RedirectResolution> lookup(const std::string& start) const;
    void put(const RedirectResolution& resolution);
    void flush();
    size_t size() const { return entries_.size(); }

private:
    std::string path_;
    std::FILE* file_ = nullptr;
    mutable std::mutex mutex_;
    std::map<std::string, RedirectResolution> entries_;
};

class ResolverClient {
public:
    explicit ResolverClient(ResolverPolicy policy);

    /// Follow HEAD redirects from an absolute http(s) URI until 200, error,
    /// loop or hop exhaustion; every hop is recorded in order.
    RedirectResolution resolve(const std::string& uri);

    /// Deduplicates inputs, serves warm entries from the cache, resolves the
    /// rest concurrently under the per-host bounds, writes fresh results back.
    /// Output order matches input order; individual failures never abort.
    std::vector<RedirectResolution> resolve_batch(const std::vector<std::string>& uris,
                                                  ResolutionCache* cache = nullptr);

    const ResolverPolicy& policy() const { return policy_; }

private:
    void rate_wait(const std::string& host);

    ResolverPolicy policy_;
    std::mutex rate_mutex_;
    std::map<std::string, double> next_slot_;  // host -> monotonic seconds
};

}  // namespace pidstats
