// ownmap: beneficial token ownership from normalized event logs.
//
// Exit codes:
//   0 success
//   1 usage error
//   2 I/O error (missing or unwritable file)
//   3 malformed input (parse, schema, duplicate event, negative balance)
//   4 coverage assertion failed (UnresolvedMajorHolder)
//   5 mapping cycle among contracts (CycleDetected)
//   6 other mapping failure (empty/insolvent pool, iteration cap, ...)
//   7 any other engine error
//   8 validate found differences from the truth file

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <ownmap/ownmap.hpp>

namespace {

enum Exit : int {
    ok = 0,
    usage = 1,
    io = 2,
    bad_input = 3,
    coverage = 4,
    cycle = 5,
    mapping = 6,
    other = 7,
    mismatch = 8,
};

int exit_code_for(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const ownmap::IoError&) {
        return io;
    } catch (const ownmap::UnresolvedMajorHolder&) {
        return coverage;
    } catch (const ownmap::CycleDetected&) {
        return cycle;
    } catch (const ownmap::MappingError&) {
        return mapping;
    } catch (const ownmap::ParseError&) {
        return bad_input;
    } catch (const ownmap::SchemaError&) {
        return bad_input;
    } catch (const ownmap::DuplicateEvent&) {
        return bad_input;
    } catch (const ownmap::NegativeBalance&) {
        return bad_input;
    } catch (const ownmap::NegativePosition&) {
        return bad_input;
    } catch (const ownmap::Error&) {
        return other;
    } catch (const std::filesystem::filesystem_error&) {
        return io;
    } catch (...) {
        return other;
    }
}

struct Overrides {
    std::string output_dir;
    unsigned workers = 0;
    std::size_t iteration_cap = 0;
    std::size_t window = 0;
    std::string gini_padding;
};

ownmap::RunConfig load(const std::string& path, const Overrides& o) {
    auto cfg = ownmap::load_config(path);
    if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
    if (o.workers) cfg.workers = o.workers;
    if (o.iteration_cap) cfg.mapper.iteration_cap = o.iteration_cap;
    if (o.window) cfg.mapper.window = o.window;
    if (!o.gini_padding.empty()) cfg.report.gini_padding = ownmap::parse_gini_padding(o.gini_padding);
    cfg.validate();
    return cfg;
}

std::vector<double> parse_mix(const std::string& text, std::size_t n, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
    if (out.size() != n) throw CLI::ValidationError(what, "expected " + std::to_string(n) + " comma-separated values");
    return out;
}

void add_common(CLI::App* cmd, std::string& config, Overrides& o) {
    cmd->add_option("-c,--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output-dir", o.output_dir, "output directory (overrides config and OWNMAP_OUTPUT_DIR)");
    cmd->add_option("-j,--workers", o.workers, "parallel (token, snapshot) jobs");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beneficial token ownership mapping and concentration metrics"};
    app.require_subcommand(1);

    std::string config;
    Overrides over;
    std::string truth_path;

    auto* map = app.add_subcommand("map", "reconstruct and remap holder tables for every token and snapshot");
    add_common(map, config, over);
    map->add_option("--iteration-cap", over.iteration_cap, "maximum mapping iterations");
    map->add_option("--window", over.window, "rows inspected per iteration");

    auto* report = app.add_subcommand("report", "concentration and integration tables from mapping outputs");
    add_common(report, config, over);
    report->add_option("--gini-padding", over.gini_padding, "pad | restrict")->check(CLI::IsMember({"pad", "restrict"}));

    auto* ts = app.add_subcommand("timeseries", "per-category wrapping-complexity series (long CSV)");
    add_common(ts, config, over);

    auto* validate = app.add_subcommand("validate", "compare mapping outputs with a truth file");
    add_common(validate, config, over);
    validate->add_option("-t,--truth", truth_path, "truth file (default: truth.json next to the config)");

    ownmap::synth::ScenarioSpec spec;
    std::string out_dir;
    std::string pool_mix;
    std::string exclusion_mix;
    bool no_unique = false;
    std::optional<double> unknown_share;
    auto* synth = app.add_subcommand("synth", "generate a synthetic scenario with known ownership");
    synth->add_option("-o,--out", out_dir, "scenario directory")->required();
    synth->add_option("--seed", spec.seed, "random seed");
    synth->add_option("--eoas", spec.n_eoas, "number of user accounts");
    synth->add_option("--tokens", spec.n_tokens, "number of base tokens");
    synth->add_option("--depth", spec.max_depth, "maximum nesting depth");
    synth->add_option("--snapshots", spec.snapshots, "number of monthly snapshots");
    synth->add_option("--window", spec.window, "mapper window the scenario must fit");
    synth->add_option("--pool-mix", pool_mix, "liquidity_pool,lending_pool,staking,wrapper probabilities");
    synth->add_option("--exclusion-mix", exclusion_mix, "cex,burner,ftia probabilities");
    synth->add_flag("--no-unique", no_unique, "omit the unique (escrow) contract");
    synth->add_option("--unknown-share", unknown_share, "add an unregistered contract holding this share of the first token");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*map) {
            const auto cfg = load(config, over);
            const auto summary = ownmap::cmd_map(cfg);
            for (const auto& p : summary.written) std::cout << p.generic_string() << "\n";
            if (!summary.failures.empty()) {
                for (const auto& f : summary.failures) std::cerr << "error: " << f.message << "\n";
                return exit_code_for(summary.failures.front().error);
            }
        } else if (*report) {
            const auto files = ownmap::cmd_report(load(config, over));
            std::cout << files.csv.generic_string() << "\n" << files.json.generic_string() << "\n";
        } else if (*ts) {
            std::cout << ownmap::cmd_timeseries(load(config, over)).generic_string() << "\n";
        } else if (*validate) {
            const auto cfg = load(config, over);
            const std::filesystem::path truth =
                truth_path.empty() ? std::filesystem::path(config).parent_path() / "truth.json" : std::filesystem::path(truth_path);
            const auto diffs = ownmap::cmd_validate(cfg, truth);
            for (const auto& d : diffs) std::cerr << d << "\n";
            if (!diffs.empty()) return mismatch;
            std::cout << "ok\n";
        } else if (*synth) {
            if (!pool_mix.empty()) {
                const auto v = parse_mix(pool_mix, 4, "--pool-mix");
                spec.pool_mix = {v[0], v[1], v[2], v[3]};
            }
            if (!exclusion_mix.empty()) {
                const auto v = parse_mix(exclusion_mix, 3, "--exclusion-mix");
                spec.exclusion_mix = {v[0], v[1], v[2]};
            }
            spec.unique_contract = !no_unique;
            spec.unknown_contract_share = unknown_share;
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return usage;
            }
            ownmap::cmd_synth(spec, out_dir);
            std::cout << (std::filesystem::path(out_dir) / "config.json").generic_string() << "\n";
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(std::current_exception());
    }
    return ok;
}
