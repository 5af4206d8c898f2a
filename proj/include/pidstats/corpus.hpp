#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pidstats/tabulator.hpp"

namespace pidstats {

struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One planted value and the pages it appears on (repeat a page index for
/// multiplicity). Values are written clean; the generator obfuscates the
/// spelling (whitespace, entities, percent-escapes, case) under the seed.
struct Planting {
    enum class Kind { Actionable, OriginalBody, HeadMeta, HeadLink, Locating };
    Kind kind = Kind::Actionable;
    std::string value;       // clean canonical URI / original form / meta content
    std::string meta_name;   // for HeadMeta plantings
    bool expect_hit = false; // Locating plantings the filter should flag
    std::vector<uint32_t> pages;
};

struct CorpusSpec {
    uint64_t pages = 0;
    int shards = 1;
    uint64_t seed = 1;
    bool obfuscate = true;
    bool include_requests = false;
    std::vector<Planting> plantings;
    std::vector<std::pair<uint32_t, uint32_t>> duplicate_pages;  // (source, copy)
};

CorpusSpec load_corpus_spec(const std::string& path);
CorpusSpec corpus_spec_from_json(const std::string& json_text);

/// Exact expected counts for every table the tabulator produces, computed by
/// direct enumeration over the spec, independent of the scan path.
struct CorpusManifest {
    uint64_t pages = 0;
    std::map<std::string, uint64_t> record_counts;  // per record kind, all shards
    std::map<std::string, Counts> crawled_scheme, link_scheme, hosts, content_types, resolvers,
        pids, meta_names, locating;
    uint64_t body_originals = 0, head_links_originals = 0, head_metas_originals = 0;
    uint64_t distinct_uris = 0;
    uint64_t distinct_digests = 0;
    std::vector<std::string> shard_files;

    std::string to_json() const;
    static CorpusManifest from_json(const std::string& text);
};

/// Deterministically write WAT shard archives plus the expected-count
/// manifest; returns the manifest (also saved as <base>.manifest.json).
CorpusManifest generate_corpus(const CorpusSpec& spec, const std::string& out_dir,
                               const std::string& base_name);

/// Differences between expected and scanned counts, empty when they agree on
/// every table.
std::vector<std::string> manifest_mismatches(const CorpusManifest& manifest,
                                             const ShardSummary& summary);

}  // namespace pidstats
