#pragma once

// Subcommand implementations behind the CLI. Each returns normally on
// success and throws an ownmap::Error subclass otherwise.

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "synth.hpp"

namespace ownmap {

namespace detail {

inline void require_readable(const std::filesystem::path& p, const char* what) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) throw IoError(std::string(what) + " file not found: " + p.string());
}

}  // namespace detail

// Error of one (token, snapshot) job, with context.
struct JobFailure {
    TokenId token;
    Snapshot snapshot;
    std::exception_ptr error;
    std::string message;
};

struct MapSummary {
    std::vector<std::filesystem::path> written;
    std::vector<JobFailure> failures;
};

// Maps every (token, snapshot) and writes one JSON per job. A failing job
// leaves the other outputs intact; the caller decides how to surface it.
inline MapSummary cmd_map(const RunConfig& cfg) {
    detail::require_readable(cfg.events, "events");
    detail::require_readable(cfg.labels, "labels");
    detail::require_readable(cfg.contracts, "contracts");
    auto events = load_events(cfg.events.string(), cfg.workers);
    auto [labels, contracts] = load_registries(cfg.labels.string(), cfg.contracts.string());
    Engine engine(std::move(events), std::move(labels), std::move(contracts), cfg.tokens, cfg.mapper);

    struct Job {
        TokenId token;
        Snapshot snapshot;
    };
    std::vector<Job> jobs;
    for (const auto& s : cfg.snapshots)
        for (const auto& t : cfg.tokens) jobs.push_back({t, s});

    MapSummary summary;
    std::vector<std::optional<std::filesystem::path>> written(jobs.size());
    std::vector<std::optional<JobFailure>> failed(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto& job = jobs[i];
            try {
                const auto result = engine.map(job.token.address, job.snapshot);
                const auto path = cfg.mapping_path(job.token, job.snapshot);
                write_file_atomic(path, dump(mapping_to_json(result, job.snapshot)));
                written[i] = path;
            } catch (const std::exception& e) {
                failed[i] = JobFailure{job.token, job.snapshot, std::current_exception(),
                                       job.token.symbol + " @ block " + std::to_string(job.snapshot.block) + ": " +
                                           e.what()};
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(jobs.size())));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (written[i]) summary.written.push_back(*written[i]);
        if (failed[i]) summary.failures.push_back(std::move(*failed[i]));
    }
    return summary;
}

// Mapping outputs of the configured tokens, ordered by snapshot.
inline std::map<Address, std::vector<MappingRecord>> load_mappings(const RunConfig& cfg) {
    std::map<Address, std::vector<MappingRecord>> out;
    for (const auto& t : cfg.tokens) {
        auto& recs = out[t.address];
        for (const auto& s : cfg.snapshots) {
            const auto path = cfg.mapping_path(t, s);
            detail::require_readable(path, "mapping");
            auto rec = mapping_from_json(load_json_file(path.string()), path.string());
            rec.snapshot.date = s.date.empty() ? rec.snapshot.date : s.date;
            recs.push_back(std::move(rec));
        }
    }
    return out;
}

struct ReportFiles {
    std::filesystem::path csv;
    std::filesystem::path json;
};

inline ReportFiles cmd_report(const RunConfig& cfg) {
    const auto report = build_report(load_mappings(cfg), cfg.report);
    ReportFiles files{cfg.output_dir / "report.csv", cfg.output_dir / "report.json"};
    write_file_atomic(files.csv, report_csv(report));
    write_file_atomic(files.json, dump(report_json(report)));
    return files;
}

inline std::filesystem::path cmd_timeseries(const RunConfig& cfg) {
    const auto path = cfg.output_dir / "timeseries.csv";
    write_file_atomic(path, timeseries_csv(load_mappings(cfg)));
    return path;
}

inline ojson scenario_spec_to_json(const synth::ScenarioSpec& s) {
    ojson j;
    j["seed"] = s.seed;
    j["n_eoas"] = s.n_eoas;
    j["n_tokens"] = s.n_tokens;
    j["max_depth"] = s.max_depth;
    j["pool_mix"] = {{"liquidity_pool", s.pool_mix.liquidity_pool},
                     {"lending_pool", s.pool_mix.lending_pool},
                     {"staking", s.pool_mix.staking},
                     {"wrapper", s.pool_mix.wrapper}};
    j["exclusion_mix"] = {{"cex", s.exclusion_mix.cex}, {"burner", s.exclusion_mix.burner}, {"ftia", s.exclusion_mix.ftia}};
    j["snapshots"] = s.snapshots;
    j["unique_contract"] = s.unique_contract;
    if (s.unknown_contract_share) j["unknown_contract_share"] = *s.unknown_contract_share;
    j["window"] = s.window;
    return j;
}

// Writes a generated scenario as ordinary input files plus its truth and a
// ready-to-run config.
inline RunConfig write_scenario(const synth::Scenario& sc, const std::filesystem::path& dir) {
    RunConfig cfg;
    cfg.tokens = sc.tokens;
    cfg.snapshots = sc.snapshots;
    cfg.events = dir / "events.jsonl";
    cfg.labels = dir / "labels.json";
    cfg.contracts = dir / "contracts.json";
    cfg.output_dir = dir / "out";
    cfg.mapper.window = sc.spec.window;

    std::ostringstream events;
    write_events(events, sc.events);
    write_file_atomic(cfg.events, events.str());
    write_file_atomic(cfg.labels, dump(labels_to_json(sc.labels)));
    write_file_atomic(cfg.contracts, dump(contracts_to_json(sc.contracts)));
    write_file_atomic(dir / "truth.json", dump(truth_to_json(sc.truth)));
    ojson spec = scenario_spec_to_json(sc.spec);
    spec["attempts"] = sc.attempts;
    write_file_atomic(dir / "scenario.json", dump(spec));
    write_file_atomic(dir / "config.json", dump(config_to_json(cfg, dir)));
    return cfg;
}

inline RunConfig cmd_synth(const synth::ScenarioSpec& spec, const std::filesystem::path& dir) {
    return write_scenario(synth::generate(spec), dir);
}

// Differences between a mapping result and the truth for its token.
inline std::vector<std::string> compare_to_truth(const MappingResult& r, const synth::TokenTruth& truth) {
    std::vector<std::string> diffs;
    const std::string sym = r.table.token().symbol;
    auto diff_maps = [&](const auto& got, const auto& want, const char* what, auto key_name) {
        for (const auto& [k, v] : got) {
            auto it = want.find(k);
            if (it == want.end())
                diffs.push_back(sym + " " + what + " " + key_name(k) + ": got " + v.str() + ", expected none");
            else if (it->second != v)
                diffs.push_back(sym + " " + what + " " + key_name(k) + ": got " + v.str() + ", expected " + it->second.str());
        }
        for (const auto& [k, v] : want)
            if (!got.count(k)) diffs.push_back(sym + " " + what + " " + key_name(k) + ": missing, expected " + v.str());
    };
    diff_maps(r.table.entries(), truth.owners, "holder", [](const Address& a) { return a.hex(); });
    diff_maps(r.table.excluded(), truth.exclusions, "exclusion",
              [](const ExclusionKey& k) { return k.address.hex() + "/" + std::string(to_string(k.reason)); });
    std::map<AdjustmentCategory, Amount> got;
    for (const auto& a : r.adjustments)
        if (a.relevant) got[a.category] += a.amount.abs();
    diff_maps(got, truth.expected_adjustments, "adjustments",
              [](AdjustmentCategory c) { return std::string(to_string(c)); });
    if (r.table.minted() != truth.minted) diffs.push_back(sym + " minted differs");
    if (r.table.burned() != truth.burned) diffs.push_back(sym + " burned differs");
    return diffs;
}

// Compares the mapping outputs at the last snapshot with a truth file.
inline std::vector<std::string> cmd_validate(const RunConfig& cfg, const std::filesystem::path& truth_path) {
    detail::require_readable(truth_path, "truth");
    const auto truth = truth_from_json(load_json_file(truth_path.string()), truth_path.string());
    if (cfg.snapshots.empty()) return {"config has no snapshots"};
    auto last_only = cfg;
    last_only.snapshots = {cfg.snapshots.back()};
    const auto mappings = load_mappings(last_only);
    std::vector<std::string> diffs;
    for (const auto& [token, tt] : truth.tokens) {
        auto it = mappings.find(token);
        if (it == mappings.end() || it->second.empty()) {
            diffs.push_back("token " + token.hex() + " not in config");
            continue;
        }
        for (auto& d : compare_to_truth(it->second.back().result, tt)) diffs.push_back(std::move(d));
    }
    return diffs;
}

}  // namespace ownmap
