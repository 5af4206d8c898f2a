#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "pidstats/corpus.hpp"
#include "pidstats/pipeline.hpp"

using namespace pidstats;
namespace fs = std::filesystem;

namespace {

CorpusManifest make_corpus(const std::string& dir) {
    CorpusSpec spec = corpus_spec_from_json(R"({
        "pages": 60, "shards": 4, "seed": 17,
        "plantings": [
            {"kind": "actionable", "value": "https://doi.org/10.10/job", "pages": [0, 0, 15, 40]},
            {"kind": "actionable", "value": "http://hdl.handle.net/2027/job", "pages": [7]},
            {"kind": "original-body", "value": "doi:10.20/orig", "pages": [9]}
        ]
    })");
    return generate_corpus(spec, dir, "c");
}

JobManifest job_for(const CorpusManifest& corpus, const std::string& out_dir) {
    JobManifest job;
    job.release_id = "testrel";
    job.shard_paths = corpus.shard_files;
    job.output_dir = out_dir;
    job.workers = 2;
    return job;
}

}  // namespace

TEST_CASE("scan_job produces per-shard summaries and a merged release") {
    CorpusManifest corpus = make_corpus("pipe_corpus");
    JobManifest job = job_for(corpus, "pipe_out");

    ScanOutcome outcome = scan_job(job, false);
    CHECK(outcome.exit_code == 0);
    CHECK(outcome.shards_processed == 4);
    CHECK(outcome.failed_shards.empty());
    CHECK(manifest_mismatches(corpus, outcome.merged).empty());

    // release summary on disk equals the in-memory merge
    ShardSummary released = load_summary(outcome.release_summary_file);
    CHECK(summaries_equal(released, outcome.merged));

    // per-shard files exist under release-scoped names
    for (const auto& shard : job.shard_paths) {
        CHECK(fs::exists(shard_summary_path(job, shard)));
    }

    SUBCASE("resume skips everything, result unchanged") {
        ScanOutcome again = scan_job(job, true);
        CHECK(again.exit_code == 0);
        CHECK(again.shards_skipped == 4);
        CHECK(again.shards_processed == 0);
        CHECK(summaries_equal(again.merged, outcome.merged));
    }

    SUBCASE("resume reprocesses exactly the missing shard") {
        fs::remove(shard_summary_path(job, job.shard_paths[2]));
        ScanOutcome again = scan_job(job, true);
        CHECK(again.shards_processed == 1);
        CHECK(again.shards_skipped == 3);
        CHECK(summaries_equal(again.merged, outcome.merged));
    }

    fs::remove_all("pipe_corpus");
    fs::remove_all("pipe_out");
}

TEST_CASE("pool width does not change the merged result") {
    CorpusManifest corpus = make_corpus("pipe_width_corpus");
    ShardSummary reference;
    for (int workers : {1, 2, 8}) {
        JobManifest job = job_for(corpus, "pipe_width_out");
        job.workers = workers;
        ScanOutcome outcome = scan_job(job, false);
        REQUIRE(outcome.exit_code == 0);
        if (workers == 1)
            reference = outcome.merged;
        else
            CHECK(summaries_equal(outcome.merged, reference));
        fs::remove_all("pipe_width_out");
    }
    fs::remove_all("pipe_width_corpus");
}

TEST_CASE("failure thresholds gate the exit code") {
    CorpusManifest corpus = make_corpus("pipe_fail_corpus");

    SUBCASE("one bad shard of five under a loose threshold → partial") {
        JobManifest job = job_for(corpus, "pipe_fail_out");
        job.shard_paths.push_back("pipe_fail_corpus/does-not-exist.wat.gz");
        job.max_failure_pct = 50.0;
        job.shard_retries = 0;
        ScanOutcome outcome = scan_job(job, false);
        CHECK(outcome.exit_code == 1);
        REQUIRE(outcome.failed_shards.size() == 1);
        CHECK(outcome.failed_shards[0] == "pipe_fail_corpus/does-not-exist.wat.gz");
        // merged summary still covers the good shards
        CHECK(manifest_mismatches(corpus, outcome.merged).empty());
    }

    SUBCASE("failures over the threshold → fatal") {
        JobManifest job = job_for(corpus, "pipe_fail_out");
        job.shard_paths.push_back("pipe_fail_corpus/missing.wat.gz");
        job.max_failure_pct = 10.0;  // 1/5 = 20% > 10%
        job.shard_retries = 0;
        CHECK(scan_job(job, false).exit_code == 2);
    }

    SUBCASE("every shard unreadable → fatal with full failure list") {
        JobManifest job;
        job.release_id = "allbad";
        job.shard_paths = {"nope1.wat.gz", "nope2.wat.gz"};
        job.output_dir = "pipe_fail_out";
        job.shard_retries = 0;
        job.max_failure_pct = 100.0;
        ScanOutcome outcome = scan_job(job, false);
        CHECK(outcome.exit_code == 2);
        CHECK(outcome.failed_shards.size() == 2);
    }

    fs::remove_all("pipe_fail_corpus");
    fs::remove_all("pipe_fail_out");
}

TEST_CASE("job manifests load from JSON with deduplication") {
    std::string path = "pipe_job.json";
    {
        std::ofstream out(path);
        out << R"({
            "release_id": "r1",
            "shard_paths": ["a.wat.gz", "b.wat.gz", "a.wat.gz"],
            "output_dir": "outdir",
            "workers": 3,
            "policy": {"max_hops": 5, "per_host_rate": 2.5}
        })";
    }
    JobManifest job = load_job_manifest(path);
    CHECK(job.release_id == "r1");
    REQUIRE(job.shard_paths.size() == 2);
    CHECK(job.workers == 3);
    CHECK(job.policy.max_hops == 5);
    CHECK(job.policy.per_host_rate == doctest::Approx(2.5));
    CHECK(shard_summary_path(job, "a.wat.gz") != shard_summary_path(job, "b.wat.gz"));
    {
        std::ofstream out(path);
        out << R"({"release_id": "r1", "shard_paths": []})";
    }
    CHECK_THROWS(load_job_manifest(path));
    fs::remove(path);
}

TEST_CASE("resolve_and_build_filter covers every distinct PID once") {
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Get(R"(/(10\..*))", [&](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        res.set_redirect("/landing/" + std::string(req.matches[1]), 302);
    });
    server.Get("/landing/.*", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 200;
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    ShardSummary summary;
    summary.pid_table.entries()["DOI 10.1/a"] = Counts{3, 2};
    summary.pid_table.entries()["DOI 10.1/b"] = Counts{1, 1};
    summary.pid_table.entries()["Handle 10.2/c"] = Counts{1, 1};

    ResolverPolicy policy;
    policy.timeout_s = 5.0;
    policy.retries = 0;
    ResolverClient client(policy);

    FilterBuildOptions options;
    options.resolver_bases = {{SchemeClass::DOI, base},
                              {SchemeClass::Handle, base},
                              {SchemeClass::Other, base}};
    std::string filter_path = "pipe_filter.bloom";
    ResolveStats stats = resolve_and_build_filter(summary, client, nullptr, options, filter_path);
    CHECK(stats.total == 3);
    CHECK(stats.resolved == 3);
    CHECK(stats.success_pct() == doctest::Approx(100.0));
    CHECK(requests == 3);

    BloomFilter filter = BloomFilter::load_file(filter_path);
    CHECK(filter.probe(base + "/landing/10.1/a"));
    CHECK(filter.probe(base + "/landing/10.2/c"));
    CHECK_FALSE(filter.probe(base + "/landing/10.9/zzz"));

    server.stop();
    listener.join();
    fs::remove(filter_path);
}

TEST_CASE("empty pid table gives an empty filter and undefined success") {
    ResolverPolicy policy;
    ResolverClient client(policy);
    ShardSummary empty;
    std::string filter_path = "pipe_empty_filter.bloom";
    ResolveStats stats = resolve_and_build_filter(empty, client, nullptr, {}, filter_path);
    CHECK(stats.total == 0);
    CHECK_FALSE(stats.success_pct().has_value());
    BloomFilter filter = BloomFilter::load_file(filter_path);
    CHECK(filter.inserted() == 0);
    fs::remove(filter_path);
}
