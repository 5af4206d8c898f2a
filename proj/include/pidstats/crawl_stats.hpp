#pragma once

#include <cstdint>

namespace pidstats {

/// Duplicate-rate estimates for one crawl month. Both percentages are
/// "1 minus a ratio", floored at zero.
struct CrawlStats {
    uint64_t uris_crawled = 0;
    uint64_t pages_retrieved = 0;
    uint64_t distinct_digests = 0;
    double dup_uri_pct = 0.0;    // 100 * max(0, 1 - uris/pages)
    double dup_pages_pct = 0.0;  // 100 * max(0, 1 - digests/pages)
};

CrawlStats compute_crawl_stats(uint64_t uris_crawled, uint64_t pages_retrieved,
                               uint64_t distinct_digests);

/// Round to `decimals` places for display (half away from zero).
double round_display(double value, int decimals);

}  // namespace pidstats
