#include "pidstats/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

using nlohmann::json;

namespace pidstats {

namespace {

uint64_t llround_u64(double v) {
    return v <= 0 ? 0 : uint64_t(std::llround(v));
}

std::string fmt(double v, int decimals) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(decimals);
    out << v;
    return out.str();
}

}  // namespace

ReleaseInputs inputs_from_summary(const std::string& release_id, const ShardSummary& summary) {
    // crawl stats estimated from the summary's own sketches
    uint64_t uris = llround_u64(summary.uri_sketch.estimate());
    uint64_t digests = llround_u64(summary.page_digest_sketch.estimate());
    CrawlStats stats = compute_crawl_stats(uris, summary.pages ? summary.pages : 1, digests);
    return inputs_from_summary(release_id, summary, stats);
}

ReleaseInputs inputs_from_summary(const std::string& release_id, const ShardSummary& summary,
                                  const CrawlStats& stats) {
    ReleaseInputs in;
    in.release_id = release_id;
    in.stats = stats;
    double link_total = 0;
    for (const auto& [key, counts] : summary.link_scheme_table.entries())
        link_total += double(counts.tokens);
    in.link_total_raw = link_total;
    for (const auto& [key, counts] : summary.resolver_table.entries())
        in.actionable_uris += counts.tokens;
    for (const auto& [key, counts] : summary.pid_table.entries()) {
        if (auto parsed = parse_pid_table_key(key))
            in.scheme_class_distinct[to_string(parsed->first)] += 1;
    }
    in.distinct_pids = summary.pid_table.type_count();
    in.body_originals = summary.original_form_counts.body_links;
    in.head_meta_originals = summary.original_form_counts.head_metas;
    in.meta_name_table = summary.meta_name_table;
    return in;
}

ReleaseReport build_release_report(const ReleaseInputs& in) {
    ReleaseReport r;
    r.release_id = in.release_id;
    r.crawl_stats = in.stats;
    r.link_total_raw = in.link_total_raw;
    // display-precision duplicate estimate, matching the published correction
    double dup = round_display(in.stats.dup_uri_pct, 1) / 100.0;
    r.link_total_corrected = in.link_total_raw * (1.0 - dup);
    r.actionable_uris = in.actionable_uris;
    r.actionable_ratio = r.link_total_corrected > 0
                             ? round_display(double(in.actionable_uris) / r.link_total_corrected, 5)
                             : 0.0;
    r.distinct_pids = in.distinct_pids;
    r.scheme_class_distinct = in.scheme_class_distinct;
    r.body_originals = in.body_originals;
    r.head_meta_originals = in.head_meta_originals;
    double pages = double(in.stats.pages_retrieved);
    r.body_per_million_pages = round_display(double(in.body_originals) / pages * 1e6, 2);
    r.head_meta_per_10k_pages = round_display(double(in.head_meta_originals) / pages * 1e4, 2);
    r.meta_name_ranking = build_meta_ranking(in.meta_name_table);
    return r;
}

LocatingReport build_locating_report(uint64_t distinct_pids, uint64_t actionable_tokens,
                                     uint64_t resolved, const FrequencyTable& locating_hits) {
    LocatingReport r;
    r.distinct_pids = distinct_pids;
    r.actionable_tokens = actionable_tokens;
    r.resolved = resolved;
    r.distinct_hits = locating_hits.type_count();
    for (const auto& [key, counts] : locating_hits.entries())
        r.hit_tokens += counts.tokens;
    if (distinct_pids > 0)
        r.type_ratio_pct = int(std::lround(100.0 * double(r.distinct_hits) / double(distinct_pids)));
    if (actionable_tokens > 0)
        r.token_ratio_pct =
            int(std::lround(100.0 * double(r.hit_tokens) / double(actionable_tokens)));
    return r;
}

OverlapReport build_overlap_report(const std::set<std::string>& a,
                                   const std::set<std::string>& b) {
    OverlapMatrix m = overlap(a, b);
    return OverlapReport{m.both, m.only_a, m.only_b};
}

SchemeClassSplit build_scheme_class_report(const ShardSummary& a, const ShardSummary& b) {
    SchemeClassSplit split;
    const auto& ea = a.pid_table.entries();
    const auto& eb = b.pid_table.entries();
    auto class_label = [](const std::string& key) {
        auto parsed = parse_pid_table_key(key);
        return parsed ? to_string(parsed->first) : std::string("Other");
    };
    for (const auto& [key, counts] : ea) {
        if (eb.count(key))
            split.both[class_label(key)] += 1;
        else
            split.a_only[class_label(key)] += 1;
    }
    for (const auto& [key, counts] : eb)
        if (!ea.count(key))
            split.b_only[class_label(key)] += 1;
    return split;
}

std::vector<std::pair<std::string, uint64_t>> build_meta_ranking(const FrequencyTable& table) {
    std::vector<std::pair<std::string, uint64_t>> out;
    out.reserve(table.entries().size());
    for (const auto& [name, counts] : table.entries())
        out.emplace_back(name, counts.tokens);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second)
            return x.second > y.second;
        return x.first < y.first;
    });
    return out;
}

std::string release_report_csv(const std::vector<ReleaseReport>& reports) {
    std::ostringstream out;
    out << "release,uris_crawled,pages_retrieved,dup_uri_pct,distinct_digests,dup_pages_pct,"
           "link_total_raw,link_total_corrected,actionable_uris,actionable_ratio,distinct_pids,"
           "body_originals,head_meta_originals,body_per_million_pages,head_meta_per_10k_pages\n";
    for (const auto& r : reports) {
        out << r.release_id << ',' << r.crawl_stats.uris_crawled << ','
            << r.crawl_stats.pages_retrieved << ',' << fmt(round_display(r.crawl_stats.dup_uri_pct, 1), 1)
            << ',' << r.crawl_stats.distinct_digests << ','
            << fmt(round_display(r.crawl_stats.dup_pages_pct, 1), 1) << ','
            << fmt(r.link_total_raw, 0) << ',' << fmt(r.link_total_corrected, 0) << ','
            << r.actionable_uris << ',' << fmt(r.actionable_ratio, 5) << ',' << r.distinct_pids
            << ',' << r.body_originals << ',' << r.head_meta_originals << ','
            << fmt(r.body_per_million_pages, 2) << ',' << fmt(r.head_meta_per_10k_pages, 2)
            << '\n';
    }
    return out.str();
}

std::string meta_ranking_csv(const std::vector<std::pair<std::string, uint64_t>>& ranking) {
    std::ostringstream out;
    out << "name,count\n";
    for (const auto& [name, count] : ranking) {
        std::string escaped = name;
        bool quote = escaped.find_first_of(",\"\n") != std::string::npos;
        if (quote) {
            std::string q = "\"";
            for (char c : escaped) {
                q += c;
                if (c == '"')
                    q += '"';
            }
            q += '"';
            escaped = q;
        }
        out << escaped << ',' << count << '\n';
    }
    return out.str();
}

std::string growth_series_csv(const std::vector<ReleaseReport>& reports) {
    auto sorted = reports;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.release_id < b.release_id; });
    std::ostringstream out;
    out << "release,body_originals,body_per_million_pages,head_meta_originals,"
           "head_meta_per_10k_pages\n";
    for (const auto& r : sorted)
        out << r.release_id << ',' << r.body_originals << ',' << fmt(r.body_per_million_pages, 2)
            << ',' << r.head_meta_originals << ',' << fmt(r.head_meta_per_10k_pages, 2) << '\n';
    return out.str();
}

std::string growth_series_svg(const std::vector<ReleaseReport>& reports) {
    auto sorted = reports;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.release_id < b.release_id; });
    const double w = 640, h = 360, margin = 48;
    auto series_max = [&](auto getter) {
        double m = 0;
        for (const auto& r : sorted)
            m = std::max(m, getter(r));
        return m > 0 ? m : 1.0;
    };
    double max_body = series_max([](const auto& r) { return r.body_per_million_pages; });
    double max_meta = series_max([](const auto& r) { return r.head_meta_per_10k_pages; });

    auto polyline = [&](auto getter, double maxv, const char* color) {
        std::ostringstream pts;
        for (size_t i = 0; i < sorted.size(); ++i) {
            double x = margin + (w - 2 * margin) *
                                    (sorted.size() == 1 ? 0.5 : double(i) / double(sorted.size() - 1));
            double y = h - margin - (h - 2 * margin) * (getter(sorted[i]) / maxv);
            pts << fmt(x, 1) << ',' << fmt(y, 1) << ' ';
        }
        std::ostringstream out;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
            << pts.str() << "\"/>\n";
        return out.str();
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << margin << "\" y=\"24\" font-size=\"14\">doi: usage per release "
           "(blue: body per 10^6 pages, red: head meta per 10^4 pages)</text>\n";
    out << polyline([](const auto& r) { return r.body_per_million_pages; }, max_body, "#1f77b4");
    out << polyline([](const auto& r) { return r.head_meta_per_10k_pages; }, max_meta, "#d62728");
    for (size_t i = 0; i < sorted.size(); ++i) {
        double x = margin + (w - 2 * margin) *
                                (sorted.size() == 1 ? 0.5 : double(i) / double(sorted.size() - 1));
        out << "<text x=\"" << fmt(x - 20, 1) << "\" y=\"" << h - margin + 20
            << "\" font-size=\"11\">" << sorted[i].release_id << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string report_bundle_json(const std::vector<ReleaseReport>& reports) {
    json bundle = json::array();
    for (const auto& r : reports) {
        json obj;
        obj["release_id"] = r.release_id;
        obj["crawl_stats"] = {{"uris_crawled", r.crawl_stats.uris_crawled},
                              {"pages_retrieved", r.crawl_stats.pages_retrieved},
                              {"distinct_digests", r.crawl_stats.distinct_digests},
                              {"dup_uri_pct", round_display(r.crawl_stats.dup_uri_pct, 1)},
                              {"dup_pages_pct", round_display(r.crawl_stats.dup_pages_pct, 1)}};
        obj["link_total_raw"] = r.link_total_raw;
        obj["link_total_corrected"] = r.link_total_corrected;
        obj["actionable_uris"] = r.actionable_uris;
        obj["actionable_ratio"] = r.actionable_ratio;
        obj["distinct_pids"] = r.distinct_pids;
        obj["scheme_class_distinct"] = r.scheme_class_distinct;
        obj["body_originals"] = r.body_originals;
        obj["head_meta_originals"] = r.head_meta_originals;
        obj["body_per_million_pages"] = r.body_per_million_pages;
        obj["head_meta_per_10k_pages"] = r.head_meta_per_10k_pages;
        json ranking = json::array();
        for (const auto& [name, count] : r.meta_name_ranking)
            ranking.push_back(json::array({name, count}));
        obj["meta_name_ranking"] = std::move(ranking);
        bundle.push_back(std::move(obj));
    }
    return bundle.dump(2) + "\n";
}

}  // namespace pidstats
