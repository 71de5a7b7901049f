#pragma once

// Run configuration: a JSON document naming the tokens, snapshots and input
// files, plus mapper and report settings. Relative paths resolve against the
// directory of the config file. OWNMAP_OUTPUT_DIR overrides the output
// directory.

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "json_io.hpp"
#include "mapper.hpp"
#include "report.hpp"

namespace ownmap {

inline constexpr const char* output_dir_env = "OWNMAP_OUTPUT_DIR";

struct RunConfig {
    std::vector<TokenId> tokens;
    std::vector<Snapshot> snapshots;
    std::filesystem::path events;
    std::filesystem::path labels;
    std::filesystem::path contracts;
    std::filesystem::path output_dir = "out";
    MapperOptions mapper;
    ReportOptions report;
    unsigned workers = 1;

    void validate() const {
        for (std::size_t i = 1; i < snapshots.size(); ++i)
            if (snapshots[i].block <= snapshots[i - 1].block)
                throw SchemaError("snapshots", "blocks must be strictly increasing");
        std::set<std::string> symbols;
        std::set<Address> addresses;
        for (const auto& t : tokens) {
            if (!symbols.insert(t.symbol).second) throw SchemaError(t.address.hex(), "duplicate symbol " + t.symbol);
            if (!addresses.insert(t.address).second) throw SchemaError(t.address.hex(), "duplicate token");
        }
        if (mapper.window == 0) throw SchemaError("window", "must be positive");
        if (mapper.iteration_cap == 0) throw SchemaError("iteration_cap", "must be positive");
        if (workers == 0) throw SchemaError("workers", "must be positive");
    }

    std::filesystem::path mapping_dir() const { return output_dir / "mapping"; }
    std::filesystem::path mapping_path(const TokenId& t, const Snapshot& s) const {
        return mapping_dir() / (t.symbol + "_" + std::to_string(s.block) + ".json");
    }
};

inline GiniPadding parse_gini_padding(const std::string& s) {
    if (s == "pad") return GiniPadding::Pad;
    if (s == "restrict") return GiniPadding::Restrict;
    throw SchemaError("gini_padding", "expected 'pad' or 'restrict', got '" + s + "'");
}

inline std::string to_string(GiniPadding p) { return p == GiniPadding::Pad ? "pad" : "restrict"; }

inline RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw SchemaError("config", "document must be a JSON object");
    RunConfig cfg;
    auto path_field = [&](const char* key, bool required) -> std::filesystem::path {
        auto it = doc.find(key);
        if (it == doc.end()) {
            if (required) throw SchemaError("config", std::string("missing '") + key + "'");
            return {};
        }
        if (!it->is_string()) throw SchemaError("config", std::string("'") + key + "' must be a path string");
        std::filesystem::path p = it->get<std::string>();
        return p.is_absolute() ? p : base_dir / p;
    };
    try {
        for (const auto& t : doc.value("tokens", nlohmann::json::array())) cfg.tokens.push_back(token_from_json(t));
        for (const auto& s : doc.value("snapshots", nlohmann::json::array())) {
            Snapshot snap;
            snap.block = s.at("block").get<std::uint64_t>();
            snap.date = s.value("date", std::string{});
            cfg.snapshots.push_back(std::move(snap));
        }
        cfg.events = path_field("events", true);
        cfg.labels = path_field("labels", true);
        cfg.contracts = path_field("contracts", true);
        if (doc.contains("output_dir")) cfg.output_dir = path_field("output_dir", false);
        else cfg.output_dir = base_dir / "out";
        cfg.mapper.window = doc.value("window", cfg.mapper.window);
        cfg.mapper.iteration_cap = doc.value("iteration_cap", cfg.mapper.iteration_cap);
        if (doc.contains("coverage_threshold"))
            cfg.mapper.coverage_threshold = Amount::parse(doc["coverage_threshold"].get<std::string>());
        if (doc.contains("multi_token_threshold"))
            cfg.report.multi_token_threshold = Amount::parse(doc["multi_token_threshold"].get<std::string>());
        if (doc.contains("gini_padding")) cfg.report.gini_padding = parse_gini_padding(doc["gini_padding"].get<std::string>());
        cfg.workers = doc.value("workers", cfg.workers);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("config", e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError("config", e.what());
    }
    if (const char* env = std::getenv(output_dir_env); env && *env) cfg.output_dir = env;
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    const auto doc = load_json_file(path.string());
    return parse_config(doc, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

inline ojson config_to_json(const RunConfig& cfg, const std::filesystem::path& relative_to) {
    auto rel = [&](const std::filesystem::path& p) { return std::filesystem::relative(p, relative_to).generic_string(); };
    ojson j;
    ojson tokens = ojson::array();
    for (const auto& t : cfg.tokens) tokens.push_back(token_to_json(t));
    j["tokens"] = std::move(tokens);
    ojson snaps = ojson::array();
    for (const auto& s : cfg.snapshots) snaps.push_back({{"block", s.block}, {"date", s.date}});
    j["snapshots"] = std::move(snaps);
    j["events"] = rel(cfg.events);
    j["labels"] = rel(cfg.labels);
    j["contracts"] = rel(cfg.contracts);
    j["output_dir"] = rel(cfg.output_dir);
    j["window"] = cfg.mapper.window;
    j["iteration_cap"] = cfg.mapper.iteration_cap;
    j["coverage_threshold"] = cfg.mapper.coverage_threshold.str();
    j["multi_token_threshold"] = cfg.report.multi_token_threshold.str();
    j["gini_padding"] = to_string(cfg.report.gini_padding);
    j["workers"] = cfg.workers;
    return j;
}

}  // namespace ownmap
