#pragma once

// JSON forms of mapping results, ground truth and scenarios. Amounts are
// exact strings ("p" or "p/q"); maps are emitted in key order so output is
// byte-stable.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "events.hpp"
#include "mapper.hpp"
#include "registry.hpp"
#include "synth.hpp"

namespace ownmap {

using ojson = nlohmann::ordered_json;

inline ojson token_to_json(const TokenId& t) {
    ojson j;
    j["address"] = t.address.hex();
    j["symbol"] = t.symbol;
    j["decimals"] = t.decimals;
    j["protocol"] = t.protocol;
    return j;
}

inline TokenId token_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("address") || !j["address"].is_string())
        throw SchemaError("token", "token needs an 'address' string");
    TokenId t;
    t.address = detail::registry_key(j["address"].get<std::string>());
    t.symbol = j.value("symbol", t.address.hex());
    t.decimals = j.value("decimals", 18);
    t.protocol = j.value("protocol", std::string{});
    return t;
}

namespace detail {

inline Amount amount_field(const nlohmann::json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw SchemaError(where, std::string("missing amount '") + key + "'");
    try {
        return Amount::parse(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(where, e.what());
    }
}

inline ojson exclusions_to_json(const std::map<ExclusionKey, Amount>& m) {
    ojson arr = ojson::array();
    for (const auto& [k, v] : m) {
        ojson e;
        e["address"] = k.address.hex();
        e["reason"] = std::string(to_string(k.reason));
        e["amount"] = v.str();
        arr.push_back(std::move(e));
    }
    return arr;
}

inline std::map<ExclusionKey, Amount> exclusions_from_json(const nlohmann::json& arr, const std::string& where) {
    std::map<ExclusionKey, Amount> m;
    if (!arr.is_array()) throw SchemaError(where, "exclusions must be an array");
    for (const auto& e : arr) {
        const auto addr = registry_key(e.value("address", std::string{}));
        ExclusionReason reason;
        try {
            reason = parse_exclusion_reason(e.value("reason", std::string{}));
        } catch (const std::invalid_argument& ex) {
            throw SchemaError(where, ex.what());
        }
        m[ExclusionKey{addr, reason}] += amount_field(e, "amount", where);
    }
    return m;
}

inline ojson balances_to_json(const std::map<Address, Amount>& m) {
    ojson arr = ojson::array();
    for (const auto& [a, v] : m) {
        ojson e;
        e["address"] = a.hex();
        e["amount"] = v.str();
        arr.push_back(std::move(e));
    }
    return arr;
}

inline std::map<Address, Amount> balances_from_json(const nlohmann::json& arr, const std::string& where) {
    std::map<Address, Amount> m;
    if (!arr.is_array()) throw SchemaError(where, "balances must be an array");
    for (const auto& e : arr) m[registry_key(e.value("address", std::string{}))] += amount_field(e, "amount", where);
    return m;
}

}  // namespace detail

// Everything a report needs for one (token, snapshot).
struct MappingRecord {
    Snapshot snapshot;
    MappingResult result;
};

inline ojson mapping_to_json(const MappingResult& r, const Snapshot& at) {
    ojson j;
    j["token"] = token_to_json(r.table.token());
    j["snapshot"] = {{"block", at.block}, {"date", at.date}};
    j["iterations"] = r.iterations;
    j["max_depth"] = r.max_depth();
    j["minted"] = r.table.minted().str();
    j["burned"] = r.table.burned().str();
    j["holders"] = detail::balances_to_json(r.table.entries());
    j["excluded"] = detail::exclusions_to_json(r.table.excluded());
    j["new_exclusions"] = detail::exclusions_to_json(r.exclusions);
    ojson adj = ojson::array();
    for (const auto& a : r.adjustments) {
        ojson e;
        e["source"] = a.source.hex();
        e["beneficiary"] = a.beneficiary.hex();
        e["amount"] = a.amount.str();
        e["category"] = std::string(to_string(a.category));
        e["depth"] = a.depth;
        e["relevant"] = a.relevant;
        adj.push_back(std::move(e));
    }
    j["adjustments"] = std::move(adj);
    j["audit"] = r.audit;
    return j;
}

inline MappingRecord mapping_from_json(const nlohmann::json& j, const std::string& where = "mapping") {
    if (!j.is_object()) throw SchemaError(where, "mapping result must be an object");
    MappingRecord rec;
    try {
        const TokenId token = token_from_json(j.at("token"));
        rec.snapshot.block = j.at("snapshot").at("block").get<std::uint64_t>();
        rec.snapshot.date = j.at("snapshot").at("date").get<std::string>();
        HolderTable table(token, rec.snapshot.block);
        table.set_stage(TableStage::Mapped);
        table.record_mint(detail::amount_field(j, "minted", where));
        table.record_burn(detail::amount_field(j, "burned", where));
        for (const auto& [a, v] : detail::balances_from_json(j.at("holders"), where)) table.set(a, v);
        for (const auto& [k, v] : detail::exclusions_from_json(j.at("excluded"), where))
            table.add_exclusion(k.address, k.reason, v);
        rec.result.table = std::move(table);
        rec.result.exclusions = detail::exclusions_from_json(j.at("new_exclusions"), where);
        rec.result.iterations = j.at("iterations").get<std::size_t>();
        for (const auto& e : j.at("adjustments")) {
            Adjustment a;
            a.token = token;
            a.source = detail::registry_key(e.at("source").get<std::string>());
            a.beneficiary = detail::registry_key(e.at("beneficiary").get<std::string>());
            a.amount = detail::amount_field(e, "amount", where);
            a.category = parse_adjustment_category(e.at("category").get<std::string>());
            a.depth = e.at("depth").get<int>();
            a.relevant = e.at("relevant").get<bool>();
            rec.result.adjustments.push_back(std::move(a));
        }
        rec.result.audit = j.at("audit").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(where, e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(where, e.what());
    }
    return rec;
}

inline ojson truth_to_json(const synth::GroundTruth& truth) {
    ojson doc;
    ojson tokens = ojson::object();
    for (const auto& [token, tt] : truth.tokens) {
        ojson t;
        t["minted"] = tt.minted.str();
        t["burned"] = tt.burned.str();
        t["owners"] = detail::balances_to_json(tt.owners);
        t["exclusions"] = detail::exclusions_to_json(tt.exclusions);
        ojson adj = ojson::object();
        for (const auto& [c, v] : tt.expected_adjustments) adj[std::string(to_string(c))] = v.str();
        t["expected_adjustments"] = std::move(adj);
        tokens[token.hex()] = std::move(t);
    }
    doc["tokens"] = std::move(tokens);
    return doc;
}

inline synth::GroundTruth truth_from_json(const nlohmann::json& doc, const std::string& where = "truth") {
    synth::GroundTruth truth;
    try {
        for (const auto& [key, t] : doc.at("tokens").items()) {
            auto& tt = truth.tokens[detail::registry_key(key)];
            tt.minted = detail::amount_field(t, "minted", where);
            tt.burned = detail::amount_field(t, "burned", where);
            tt.owners = detail::balances_from_json(t.at("owners"), where);
            tt.exclusions = detail::exclusions_from_json(t.at("exclusions"), where);
            for (const auto& [c, v] : t.at("expected_adjustments").items())
                tt.expected_adjustments[parse_adjustment_category(c)] = Amount::parse(v.get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(where, e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(where, e.what());
    }
    return truth;
}

inline nlohmann::json load_json_file(const std::string& path) {
    return detail::parse_json_document(read_file(path), path);
}

// Writes through a temporary file and renames it into place, so a failed run
// never leaves a truncated output behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace ownmap
