#include "pidstats/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pidstats/hash.hpp"
#include "pidstats/wat_reader.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace pidstats {

JobManifest load_job_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read job manifest " + path);
    json doc = json::parse(in);

    JobManifest job;
    job.release_id = doc.at("release_id").get<std::string>();
    std::vector<std::string> shards;
    for (const auto& s : doc.at("shard_paths"))
        shards.push_back(s.get<std::string>());
    // deduplicate, preserving order
    for (const auto& s : shards)
        if (std::find(job.shard_paths.begin(), job.shard_paths.end(), s) ==
            job.shard_paths.end())
            job.shard_paths.push_back(s);
    if (job.shard_paths.empty())
        throw std::runtime_error("job manifest has no shard paths");
    job.watch_list_path = doc.value("watch_list_path", "");
    job.filter_path = doc.value("filter_path", "");
    job.output_dir = doc.value("output_dir", ".");
    job.workers = doc.value("workers", 0);
    job.shard_retries = doc.value("shard_retries", 2);
    job.max_failure_pct = doc.value("max_failure_pct", 10.0);
    if (doc.contains("policy")) {
        const json& p = doc["policy"];
        job.policy.max_hops = p.value("max_hops", job.policy.max_hops);
        job.policy.timeout_s = p.value("timeout_s", job.policy.timeout_s);
        job.policy.retries = p.value("retries", job.policy.retries);
        job.policy.per_host_rate = p.value("per_host_rate", job.policy.per_host_rate);
        job.policy.concurrency = p.value("concurrency", job.policy.concurrency);
        job.policy.user_agent = p.value("user_agent", job.policy.user_agent);
    }
    return job;
}

std::string shard_summary_path(const JobManifest& job, const std::string& shard_path) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  (unsigned long long)hash64(shard_path, 0x5a5a5a5aULL));
    return (fs::path(job.output_dir) / (job.release_id + "-" + hex + ".shard.json.gz")).string();
}

std::string release_summary_path(const JobManifest& job) {
    return (fs::path(job.output_dir) / (job.release_id + ".release.json.gz")).string();
}

ShardSummary scan_shard(const std::string& path, const ResolverWatchList& watch_list,
                        const BloomFilter* locating_filter) {
    ShardSummary summary;
    ArchiveReader reader = open_archive(path);
    while (auto item = reader.next()) {
        if (std::holds_alternative<ReadError>(*item))
            continue;  // already tallied by the reader
        const WatRecord& record = std::get<WatRecord>(*item);
        if (record.kind != RecordKind::Response)
            continue;
        auto extracted = extract_envelope(record);
        if (std::holds_alternative<ExtractError>(extracted)) {
            tally_error(summary, to_string(std::get<ExtractError>(extracted).kind));
            continue;
        }
        tabulate_page(summary, std::get<PageEnvelope>(extracted), watch_list, locating_filter);
    }
    for (const auto& [key, count] : reader.tallies()) {
        bool is_error = key == "malformed_record_header" || key == "corrupt_gzip";
        tally_error(summary, is_error ? key : "records_" + key, count);
    }
    return summary;
}

ScanOutcome scan_job(const JobManifest& job, bool resume) {
    fs::create_directories(job.output_dir);

    ResolverWatchList watch_list = job.watch_list_path.empty()
                                       ? ResolverWatchList::defaults()
                                       : ResolverWatchList::load_file(job.watch_list_path);
    std::optional<BloomFilter> filter;
    if (!job.filter_path.empty())
        filter = BloomFilter::load_file(job.filter_path);

    ScanOutcome outcome;
    std::mutex state_mutex;
    std::atomic<size_t> cursor{0};

    int workers = job.workers > 0 ? job.workers : int(std::thread::hardware_concurrency());
    if (workers < 1)
        workers = 1;
    workers = std::min<int>(workers, int(job.shard_paths.size()));

    auto worker = [&] {
        for (;;) {
            size_t i = cursor.fetch_add(1);
            if (i >= job.shard_paths.size())
                return;
            const std::string& shard = job.shard_paths[i];
            std::string out_path = shard_summary_path(job, shard);
            if (resume && fs::exists(out_path)) {
                std::lock_guard lock(state_mutex);
                ++outcome.shards_skipped;
                continue;
            }
            bool ok = false;
            for (int attempt = 0; attempt <= job.shard_retries && !ok; ++attempt) {
                try {
                    ShardSummary summary =
                        scan_shard(shard, watch_list, filter ? &*filter : nullptr);
                    std::string tmp = out_path + ".tmp";
                    save_summary(summary, tmp);
                    fs::rename(tmp, out_path);
                    ok = true;
                } catch (const std::exception&) {
                    // retry; persistent failures land on the failure list
                }
            }
            std::lock_guard lock(state_mutex);
            if (ok)
                ++outcome.shards_processed;
            else
                outcome.failed_shards.push_back(shard);
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(size_t(workers));
    for (int t = 0; t < workers; ++t)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();

    double failure_pct =
        100.0 * double(outcome.failed_shards.size()) / double(job.shard_paths.size());
    if (outcome.failed_shards.size() == job.shard_paths.size() ||
        failure_pct > job.max_failure_pct) {
        outcome.exit_code = 2;
        return outcome;
    }

    ShardSummary merged;
    for (const auto& shard : job.shard_paths) {
        std::string path = shard_summary_path(job, shard);
        if (!fs::exists(path))
            continue;  // failed shard
        merged = merge(merged, load_summary(path));
    }
    outcome.merged = std::move(merged);
    outcome.release_summary_file = release_summary_path(job);
    save_summary(outcome.merged, outcome.release_summary_file);
    outcome.exit_code = outcome.failed_shards.empty() ? 0 : 1;
    return outcome;
}

const std::map<SchemeClass, std::string> kDefaultResolverBases = {
    {SchemeClass::DOI, "https://doi.org"},
    {SchemeClass::Handle, "http://hdl.handle.net"},
    {SchemeClass::Other, "https://n2t.net"},
};

std::string representative_uri(SchemeClass cls, const std::string& pid,
                               const std::map<SchemeClass, std::string>& resolver_bases) {
    const auto& bases = resolver_bases.empty() ? kDefaultResolverBases : resolver_bases;
    return bases.at(cls) + "/" + pid;
}

ResolveStats resolve_and_build_filter(const ShardSummary& summary, ResolverClient& client,
                                      ResolutionCache* cache, const FilterBuildOptions& options,
                                      const std::string& filter_out_path) {
    std::vector<std::string> uris;
    for (const auto& [key, counts] : summary.pid_table.entries()) {
        if (auto parsed = parse_pid_table_key(key))
            uris.push_back(representative_uri(parsed->first, parsed->second,
                                              options.resolver_bases));
    }

    ResolveStats stats;
    stats.total = uris.size();

    uint64_t provisioned = options.provisioned_n ? options.provisioned_n
                                                 : std::max<uint64_t>(1, uris.size());
    BloomFilter filter(provisioned, options.target_fpr, options.seed);

    if (!uris.empty()) {
        auto resolutions = client.resolve_batch(uris, cache);
        for (const auto& r : resolutions) {
            ++stats.outcome_tallies[to_string(r.outcome)];
            if (r.locating) {
                ++stats.resolved;
                filter.insert(*r.locating);
            }
        }
    }
    filter.save_file(filter_out_path);
    return stats;
}

}  // namespace pidstats
