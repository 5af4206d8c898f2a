// Command-line driver: shard scanning, summary merging, PID resolution,
// locating-filter construction, rescans, report emission and synthetic corpus
// generation.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pidstats/corpus.hpp"
#include "pidstats/crawl_stats.hpp"
#include "pidstats/pipeline.hpp"
#include "pidstats/report.hpp"

namespace fs = std::filesystem;
using namespace pidstats;

namespace {

std::string cache_dir() {
    if (const char* env = std::getenv("PIDSTATS_CACHE_DIR"))
        return env;
    return ".";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

JobManifest job_from_options(const std::string& manifest_path, const std::string& watchlist,
                             const std::string& out_dir, int workers,
                             const std::string& filter_path, int max_hops,
                             const std::vector<std::string>& rates) {
    JobManifest job = load_job_manifest(manifest_path);
    if (!watchlist.empty())
        job.watch_list_path = watchlist;
    if (!out_dir.empty())
        job.output_dir = out_dir;
    if (workers > 0)
        job.workers = workers;
    if (!filter_path.empty())
        job.filter_path = filter_path;
    if (max_hops > 0)
        job.policy.max_hops = max_hops;
    for (const auto& spec : rates) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--rate expects HOST=N");
        // one global per-host rate; the last HOST=N wins
        job.policy.per_host_rate = std::stod(spec.substr(eq + 1));
    }
    return job;
}

int run_scan(const JobManifest& job, bool resume) {
    ScanOutcome outcome = scan_job(job, resume);
    std::cout << "processed " << outcome.shards_processed << " shard(s), skipped "
              << outcome.shards_skipped << ", failed " << outcome.failed_shards.size() << "\n";
    for (const auto& shard : outcome.failed_shards)
        std::cerr << "failed: " << shard << "\n";
    if (outcome.exit_code != 2)
        std::cout << "release summary: " << outcome.release_summary_file << "\n";
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persistent-identifier usage tabulation over Common Crawl WAT archives"};
    app.require_subcommand(1);

    std::string manifest_path, watchlist, out_dir, filter_path;
    std::vector<std::string> rates;
    int workers = 0, max_hops = 0;
    bool resume = false;
    uint64_t seed = 1;

    auto add_job_options = [&](CLI::App* cmd, bool with_filter) {
        cmd->add_option("--manifest", manifest_path, "job manifest JSON")->required();
        cmd->add_option("--watchlist", watchlist, "resolver watch-list file (host<TAB>class)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--workers", workers, "worker pool width (default: cores)");
        cmd->add_flag("--resume", resume, "skip shards whose summary files exist");
        cmd->add_option("--rate", rates, "per-host request rate, HOST=N per second");
        cmd->add_option("--max-hops", max_hops, "redirect chain bound");
        if (with_filter)
            cmd->add_option("--filter", filter_path, "locating filter file")->required();
    };

    CLI::App* scan_cmd = app.add_subcommand("scan", "tabulate shard summaries and merge");
    add_job_options(scan_cmd, false);

    CLI::App* rescan_cmd =
        app.add_subcommand("rescan", "scan with a locating filter for leak detection");
    add_job_options(rescan_cmd, true);

    CLI::App* merge_cmd = app.add_subcommand("merge", "merge summary files");
    std::vector<std::string> merge_inputs;
    std::string merge_out;
    merge_cmd->add_option("inputs", merge_inputs, "summary files (.json.gz)")->required();
    merge_cmd->add_option("--out", merge_out, "merged summary output")->required();

    CLI::App* resolve_cmd =
        app.add_subcommand("resolve", "HEAD-resolve distinct PIDs into the cache");
    std::string summary_path, resolver_base_doi, resolver_base_hdl, resolver_base_other;
    double rate = 0.0, timeout_s = 30.0;
    resolve_cmd->add_option("--summary", summary_path, "release summary file")->required();
    resolve_cmd->add_option("--rate", rate, "per-host requests per second");
    resolve_cmd->add_option("--timeout", timeout_s, "request timeout seconds");
    resolve_cmd->add_option("--max-hops", max_hops, "redirect chain bound");
    resolve_cmd->add_option("--doi-base", resolver_base_doi, "override DOI resolver base URL");
    resolve_cmd->add_option("--handle-base", resolver_base_hdl, "override handle resolver base");
    resolve_cmd->add_option("--other-base", resolver_base_other, "override n2t resolver base");

    CLI::App* filter_cmd =
        app.add_subcommand("buildfilter", "build the locating filter from cached resolutions");
    std::string filter_out;
    uint64_t provisioned = 0;
    double target_fpr = 1e-4;
    filter_cmd->add_option("--summary", summary_path, "release summary file")->required();
    filter_cmd->add_option("--out", filter_out, "filter output path")->required();
    filter_cmd->add_option("--provisioned", provisioned, "provisioned key count");
    filter_cmd->add_option("--fpr", target_fpr, "target false-positive rate");
    filter_cmd->add_option("--seed", seed, "filter hash seed");
    filter_cmd->add_option("--doi-base", resolver_base_doi, "override DOI resolver base URL");
    filter_cmd->add_option("--handle-base", resolver_base_hdl, "override handle resolver base");
    filter_cmd->add_option("--other-base", resolver_base_other, "override n2t resolver base");
    filter_cmd->add_option("--rate", rate, "per-host requests per second");
    filter_cmd->add_option("--timeout", timeout_s, "request timeout seconds");

    CLI::App* report_cmd = app.add_subcommand("report", "emit CSV/JSON/SVG report bundle");
    std::vector<std::string> report_inputs;
    std::string report_dir = ".";
    report_cmd
        ->add_option("inputs", report_inputs, "RELEASE_ID=summary.json.gz pairs, ordered")
        ->required();
    report_cmd->add_option("--out", report_dir, "report output directory");

    CLI::App* gen_cmd = app.add_subcommand("gencorpus", "generate a synthetic WAT corpus");
    std::string spec_path, base_name = "corpus";
    gen_cmd->add_option("--spec", spec_path, "corpus spec JSON")->required();
    gen_cmd->add_option("--out", out_dir, "output directory")->required();
    gen_cmd->add_option("--name", base_name, "archive base name");
    gen_cmd->add_option("--seed", seed, "override the spec seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*scan_cmd)
            return run_scan(job_from_options(manifest_path, watchlist, out_dir, workers, "",
                                             max_hops, rates),
                            resume);

        if (*rescan_cmd)
            return run_scan(job_from_options(manifest_path, watchlist, out_dir, workers,
                                             filter_path, max_hops, rates),
                            resume);

        if (*merge_cmd) {
            ShardSummary merged;
            for (const auto& input : merge_inputs)
                merged = merge(merged, load_summary(input));
            save_summary(merged, merge_out);
            std::cout << "merged " << merge_inputs.size() << " summaries into " << merge_out
                      << "\n";
            return 0;
        }

        if (*resolve_cmd || *filter_cmd) {
            ShardSummary summary = load_summary(summary_path);
            ResolverPolicy policy;
            policy.per_host_rate = rate;
            policy.timeout_s = timeout_s;
            if (max_hops > 0)
                policy.max_hops = max_hops;
            ResolverClient client(policy);
            ResolutionCache cache((fs::path(cache_dir()) / "resolutions.jsonl").string());

            FilterBuildOptions options;
            options.provisioned_n = provisioned;
            options.target_fpr = target_fpr;
            options.seed = seed;
            if (!resolver_base_doi.empty() || !resolver_base_hdl.empty() ||
                !resolver_base_other.empty()) {
                options.resolver_bases = kDefaultResolverBases;
                if (!resolver_base_doi.empty())
                    options.resolver_bases[SchemeClass::DOI] = resolver_base_doi;
                if (!resolver_base_hdl.empty())
                    options.resolver_bases[SchemeClass::Handle] = resolver_base_hdl;
                if (!resolver_base_other.empty())
                    options.resolver_bases[SchemeClass::Other] = resolver_base_other;
            }

            std::string filter_path_out =
                *filter_cmd ? filter_out : (fs::path(cache_dir()) / "scratch.bloom").string();
            ResolveStats stats =
                resolve_and_build_filter(summary, client, &cache, options, filter_path_out);
            if (*resolve_cmd)
                fs::remove(filter_path_out);

            auto pct = stats.success_pct();
            std::cout << "resolved " << stats.resolved << "/" << stats.total << " (";
            if (pct)
                std::cout << round_display(*pct, 1) << "%";
            else
                std::cout << "n/a";
            std::cout << " success)\n";
            for (const auto& [outcome, count] : stats.outcome_tallies)
                std::cout << "  " << outcome << ": " << count << "\n";
            if (*filter_cmd)
                std::cout << "filter: " << filter_out << "\n";
            return 0;
        }

        if (*report_cmd) {
            fs::create_directories(report_dir);
            std::vector<ReleaseReport> reports;
            for (const auto& input : report_inputs) {
                size_t eq = input.find('=');
                if (eq == std::string::npos)
                    throw std::runtime_error("report inputs are RELEASE_ID=summary.json.gz");
                std::string release_id = input.substr(0, eq);
                ShardSummary summary = load_summary(input.substr(eq + 1));
                reports.push_back(build_release_report(inputs_from_summary(release_id, summary)));
            }
            write_file((fs::path(report_dir) / "releases.csv").string(),
                       release_report_csv(reports));
            write_file((fs::path(report_dir) / "growth.csv").string(),
                       growth_series_csv(reports));
            write_file((fs::path(report_dir) / "growth.svg").string(),
                       growth_series_svg(reports));
            write_file((fs::path(report_dir) / "report.json").string(),
                       report_bundle_json(reports));
            if (!reports.empty())
                write_file((fs::path(report_dir) / "meta_ranking.csv").string(),
                           meta_ranking_csv(reports.back().meta_name_ranking));
            std::cout << "report bundle written to " << report_dir << "\n";
            return 0;
        }

        if (*gen_cmd) {
            CorpusSpec spec = load_corpus_spec(spec_path);
            if (gen_cmd->count("--seed"))
                spec.seed = seed;
            CorpusManifest manifest = generate_corpus(spec, out_dir, base_name);
            std::cout << "wrote " << manifest.shard_files.size() << " shard(s), "
                      << manifest.pages << " page(s); manifest " << base_name
                      << ".manifest.json\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
