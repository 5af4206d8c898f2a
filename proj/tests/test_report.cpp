#include <doctest.h>

#include "pidstats/report.hpp"

using namespace pidstats;

// The arithmetic fixtures below are frozen from independent hand calculation
// over the published crawl totals; the code under test must land on the same
// display-precision values.

TEST_CASE("duplicate-rate arithmetic over four published crawl months") {
    struct Row {
        uint64_t uris, pages, digests;
        double dup_uri, dup_pages;
    };
    const Row rows[] = {
        {1718646762, 2641371316, 2250363653, 34.9, 14.8},
        {1934559347, 2115818059, 1910978257, 8.6, 9.7},
        {1335046923, 1335046923, 1211048216, 0.0, 9.3},
        {2907715349, 2942930482, 2915114582, 1.2, 0.9},
    };
    for (const Row& row : rows) {
        CrawlStats stats = compute_crawl_stats(row.uris, row.pages, row.digests);
        CAPTURE(row.uris);
        CHECK(round_display(stats.dup_uri_pct, 1) == doctest::Approx(row.dup_uri));
        CHECK(round_display(stats.dup_pages_pct, 1) == doctest::Approx(row.dup_pages));
    }
    // more URIs than pages floors at zero rather than going negative
    CHECK(compute_crawl_stats(200, 100, 100).dup_uri_pct == 0.0);
    CHECK_THROWS(compute_crawl_stats(1, 0, 1));
}

TEST_CASE("round_display rounds half away from zero") {
    CHECK(round_display(34.85, 1) == doctest::Approx(34.9));
    CHECK(round_display(0.000155, 5) == doctest::Approx(0.00016));
    CHECK(round_display(-2.345, 2) == doctest::Approx(-2.35));
    CHECK(round_display(7.0, 0) == doctest::Approx(7.0));
}

namespace {

ReleaseInputs inputs_2014() {
    ReleaseInputs in;
    in.release_id = "2014-04";
    in.stats = compute_crawl_stats(1718646762, 2641371316, 2250363653);
    in.link_total_raw = 299e9;
    in.actionable_uris = 30445532;
    in.distinct_pids = 5369831;
    in.body_originals = 1893;
    in.head_meta_originals = 731938;
    return in;
}

ReleaseInputs inputs_2017() {
    ReleaseInputs in;
    in.release_id = "2017-03";
    in.stats = compute_crawl_stats(2907715349, 2942930482, 2915114582);
    in.link_total_raw = 620e9;
    in.actionable_uris = 37913544;
    in.distinct_pids = 12659694;
    in.body_originals = 3550;
    in.head_meta_originals = 459328;
    return in;
}

}  // namespace

TEST_CASE("actionable-link ratio per release") {
    ReleaseReport r14 = build_release_report(inputs_2014());
    CHECK(r14.actionable_ratio == doctest::Approx(0.00016));
    CHECK(r14.link_total_corrected == doctest::Approx(299e9 * 0.651));

    ReleaseReport r17 = build_release_report(inputs_2017());
    CHECK(r17.actionable_ratio == doctest::Approx(0.00006));
    CHECK(r17.link_total_corrected == doctest::Approx(620e9 * 0.988));
}

TEST_CASE("original-form densities per release") {
    ReleaseReport r14 = build_release_report(inputs_2014());
    CHECK(r14.body_per_million_pages == doctest::Approx(0.72));
    CHECK(r14.head_meta_per_10k_pages == doctest::Approx(2.77));
    ReleaseReport r17 = build_release_report(inputs_2017());
    CHECK(r17.body_per_million_pages == doctest::Approx(1.21));
    CHECK(r17.head_meta_per_10k_pages == doctest::Approx(1.56));

    // the other two published releases
    ReleaseInputs a;
    a.stats = compute_crawl_stats(1934559347, 2115818059, 1910978257);
    a.body_originals = 1410;
    a.head_meta_originals = 727167;
    ReleaseReport ra = build_release_report(a);
    CHECK(ra.body_per_million_pages == doctest::Approx(0.67));
    CHECK(ra.head_meta_per_10k_pages == doctest::Approx(3.44));

    ReleaseInputs b;
    b.stats = compute_crawl_stats(1335046923, 1335046923, 1211048216);
    b.body_originals = 1440;
    b.head_meta_originals = 410603;
    ReleaseReport rb = build_release_report(b);
    CHECK(rb.body_per_million_pages == doctest::Approx(1.08));
    CHECK(rb.head_meta_per_10k_pages == doctest::Approx(3.08));
}

TEST_CASE("locating-form follow-up ratios") {
    FrequencyTable hits;
    hits.entries()["synthetic"] = Counts{1202610, 1};
    for (uint64_t i = 1; i < 413397; ++i)
        hits.entries()["u" + std::to_string(i)] = Counts{0, 0};
    // distinct count is the type count; stuff the token total into one key
    LocatingReport r = build_locating_report(5369831, 12642054, 5315129, hits);
    CHECK(r.distinct_hits == 413397);
    CHECK(r.hit_tokens == 1202610);
    CHECK(r.type_ratio_pct == 8);
    CHECK(r.token_ratio_pct == 10);
}

TEST_CASE("overlap report splits distinct keys three ways") {
    std::set<std::string> a{"x", "y", "z"};
    std::set<std::string> b{"y", "z", "w"};
    OverlapReport r = build_overlap_report(a, b);
    CHECK(r.both == 2);
    CHECK(r.only_a == 1);
    CHECK(r.only_b == 1);
}

TEST_CASE("scheme-class split over two releases") {
    ShardSummary a, b;
    a.pid_table.entries()["DOI 10.1/x"] = Counts{1, 1};
    a.pid_table.entries()["DOI 10.1/y"] = Counts{1, 1};
    a.pid_table.entries()["Handle 2027/z"] = Counts{1, 1};
    b.pid_table.entries()["DOI 10.1/y"] = Counts{5, 2};
    b.pid_table.entries()["Other ark:/1/2"] = Counts{1, 1};
    SchemeClassSplit split = build_scheme_class_report(a, b);
    CHECK(split.a_only["DOI"] == 1);
    CHECK(split.a_only["Handle"] == 1);
    CHECK(split.both["DOI"] == 1);
    CHECK(split.b_only["Other"] == 1);
    CHECK(split.b_only.count("DOI") == 0);
}

TEST_CASE("meta-name ranking orders by count then name") {
    FrequencyTable table;
    table.entries()["dc.identifier"] = Counts{6548, 100};
    table.entries()["eprints.id_number"] = Counts{1174, 50};
    table.entries()["citation_doi"] = Counts{435, 30};
    table.entries()["aaa_tied"] = Counts{435, 10};
    auto ranking = build_meta_ranking(table);
    REQUIRE(ranking.size() == 4);
    CHECK(ranking[0] == std::pair<std::string, uint64_t>{"dc.identifier", 6548});
    CHECK(ranking[1] == std::pair<std::string, uint64_t>{"eprints.id_number", 1174});
    CHECK(ranking[2] == std::pair<std::string, uint64_t>{"aaa_tied", 435});
    CHECK(ranking[3] == std::pair<std::string, uint64_t>{"citation_doi", 435});
}

TEST_CASE("inputs_from_summary pulls counts from the tables") {
    ShardSummary s;
    s.pages = 10;
    s.link_scheme_table.entries()["https"] = Counts{70, 10};
    s.link_scheme_table.entries()["(none)"] = Counts{30, 10};
    s.resolver_table.entries()["doi.org"] = Counts{4, 2};
    s.resolver_table.entries()["hdl.handle.net"] = Counts{1, 1};
    s.pid_table.entries()["DOI 10.1/x"] = Counts{4, 2};
    s.pid_table.entries()["Handle 2027/y"] = Counts{1, 1};
    s.original_form_counts.body_links = 3;
    s.original_form_counts.head_metas = 2;

    CrawlStats stats = compute_crawl_stats(10, 10, 10);
    ReleaseInputs in = inputs_from_summary("r1", s, stats);
    CHECK(in.link_total_raw == doctest::Approx(100));
    CHECK(in.actionable_uris == 5);
    CHECK(in.distinct_pids == 2);
    CHECK(in.scheme_class_distinct["DOI"] == 1);
    CHECK(in.scheme_class_distinct["Handle"] == 1);
    CHECK(in.body_originals == 3);
    CHECK(in.head_meta_originals == 2);
}

TEST_CASE("csv and json emission") {
    ReleaseReport r = build_release_report(inputs_2014());
    std::string csv = release_report_csv({r});
    CHECK(csv.find("2014-04") != std::string::npos);
    CHECK(csv.find("34.9") != std::string::npos);
    CHECK(csv.find("0.00016") != std::string::npos);

    std::string ranking_csv = meta_ranking_csv({{"plain", 3}, {"with,comma", 2}, {"with\"quote", 1}});
    CHECK(ranking_csv.find("\"with,comma\",2") != std::string::npos);
    CHECK(ranking_csv.find("\"with\"\"quote\",1") != std::string::npos);

    std::string svg = growth_series_svg({r, build_release_report(inputs_2017())});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);

    std::string json_text = report_bundle_json({r});
    CHECK(json_text.find("\"release_id\": \"2014-04\"") != std::string::npos);
}
