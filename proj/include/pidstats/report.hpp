#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pidstats/crawl_stats.hpp"
#include "pidstats/tabulator.hpp"

namespace pidstats {

/// Published-count-shaped inputs for one crawl month; either taken from a
/// merged summary or supplied directly from recorded totals.
struct ReleaseInputs {
    std::string release_id;  // crawl-month label, e.g. "2014-04"
    CrawlStats stats;
    double link_total_raw = 0;       // token count of all body link URIs
    uint64_t actionable_uris = 0;    // actionable-form token count
    uint64_t distinct_pids = 0;
    std::map<std::string, uint64_t> scheme_class_distinct;  // class -> distinct PIDs
    uint64_t body_originals = 0;     // original-form tokens in body links
    uint64_t head_meta_originals = 0;
    FrequencyTable meta_name_table;
};

struct ReleaseReport {
    std::string release_id;
    CrawlStats crawl_stats;
    double link_total_raw = 0;
    double link_total_corrected = 0;  // raw * (1 - dup_uri_pct)
    uint64_t actionable_uris = 0;
    double actionable_ratio = 0;      // actionable / corrected, 5-decimal display
    uint64_t distinct_pids = 0;
    std::map<std::string, uint64_t> scheme_class_distinct;
    uint64_t body_originals = 0;
    uint64_t head_meta_originals = 0;
    double body_per_million_pages = 0;   // 2-decimal display
    double head_meta_per_10k_pages = 0;  // 2-decimal display
    std::vector<std::pair<std::string, uint64_t>> meta_name_ranking;
};

ReleaseInputs inputs_from_summary(const std::string& release_id, const ShardSummary& summary);
ReleaseInputs inputs_from_summary(const std::string& release_id, const ShardSummary& summary,
                                  const CrawlStats& stats);

ReleaseReport build_release_report(const ReleaseInputs& inputs);

struct LocatingReport {
    uint64_t distinct_pids = 0;       // distinct 2014-style actionable PIDs
    uint64_t actionable_tokens = 0;
    uint64_t resolved = 0;            // PIDs that yielded a locating form
    uint64_t distinct_hits = 0;       // locating URIs seen in the later crawl
    uint64_t hit_tokens = 0;
    int type_ratio_pct = 0;           // round(distinct_hits / distinct_pids)
    int token_ratio_pct = 0;          // round(hit_tokens / actionable_tokens)
};

LocatingReport build_locating_report(uint64_t distinct_pids, uint64_t actionable_tokens,
                                     uint64_t resolved, const FrequencyTable& locating_hits);

struct OverlapReport {
    uint64_t both = 0;
    uint64_t only_a = 0;
    uint64_t only_b = 0;
    // (not-a, not-b) is a structural zero
};

OverlapReport build_overlap_report(const std::set<std::string>& a, const std::set<std::string>& b);

/// Distinct PIDs split {a-only, both, b-only} x scheme class.
struct SchemeClassSplit {
    std::map<std::string, uint64_t> a_only, both, b_only;  // class label -> count
};

SchemeClassSplit build_scheme_class_report(const ShardSummary& a, const ShardSummary& b);

/// Descending by count, ties broken lexicographically by name.
std::vector<std::pair<std::string, uint64_t>> build_meta_ranking(const FrequencyTable& table);

// Output emission; every number is recomputable from the inputs alone.
std::string release_report_csv(const std::vector<ReleaseReport>& reports);
std::string meta_ranking_csv(const std::vector<std::pair<std::string, uint64_t>>& ranking);
std::string growth_series_csv(const std::vector<ReleaseReport>& reports);
std::string growth_series_svg(const std::vector<ReleaseReport>& reports);
std::string report_bundle_json(const std::vector<ReleaseReport>& reports);

}  // namespace pidstats
