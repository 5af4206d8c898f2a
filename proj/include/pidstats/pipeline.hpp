#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pidstats/bloom.hpp"
#include "pidstats/classifier.hpp"
#include "pidstats/resolver.hpp"
#include "pidstats/tabulator.hpp"

namespace pidstats {

struct JobManifest {
    std::string release_id;
    std::vector<std::string> shard_paths;
    std::string watch_list_path;  // empty = built-in defaults
    std::string filter_path;      // empty = no locating pass
    ResolverPolicy policy;
    std::string output_dir = ".";
    int workers = 0;  // 0 = hardware concurrency
    int shard_retries = 2;
    double max_failure_pct = 10.0;
};

JobManifest load_job_manifest(const std::string& path);

/// Summary filename encodes release id + shard-path hash so merges cannot mix
/// releases or shards.
std::string shard_summary_path(const JobManifest& job, const std::string& shard_path);
std::string release_summary_path(const JobManifest& job);

/// Scan one archive into a summary; extraction failures become tallies.
ShardSummary scan_shard(const std::string& path, const ResolverWatchList& watch_list,
                        const BloomFilter* locating_filter = nullptr);

struct ScanOutcome {
    uint64_t shards_processed = 0;
    uint64_t shards_skipped = 0;  // resumed from existing summary files
    std::vector<std::string> failed_shards;
    ShardSummary merged;
    std::string release_summary_file;
    int exit_code = 0;  // 0 ok, 1 partial failures under threshold, 2 fatal
};

/// Worker-pool scan with retry, per-shard summary files and idempotent
/// resume; a final merge writes the release summary.
ScanOutcome scan_job(const JobManifest& job, bool resume);

struct ResolveStats {
    uint64_t total = 0;
    uint64_t resolved = 0;
    std::map<std::string, uint64_t> outcome_tallies;
    std::optional<double> success_pct() const {
        if (total == 0)
            return std::nullopt;
        return 100.0 * double(resolved) / double(total);
    }
};

/// Canonical actionable URI for one distinct PID (one representative resolver
/// host per scheme class, overridable for testing).
std::string representative_uri(SchemeClass cls, const std::string& pid,
                               const std::map<SchemeClass, std::string>& resolver_bases);

extern const std::map<SchemeClass, std::string> kDefaultResolverBases;

struct FilterBuildOptions {
    uint64_t provisioned_n = 0;  // 0 = distinct PID count
    double target_fpr = 1e-4;
    uint64_t seed = 0xb100f11eULL;
    std::map<SchemeClass, std::string> resolver_bases = {};  // empty = defaults
};

/// Resolve every distinct PID in the summary and build the locating filter
/// over the successes; the filter is still written when some PIDs fail.
ResolveStats resolve_and_build_filter(const ShardSummary& summary, ResolverClient& client,
                                      ResolutionCache* cache, const FilterBuildOptions& options,
                                      const std::string& filter_out_path);

}  // namespace pidstats
