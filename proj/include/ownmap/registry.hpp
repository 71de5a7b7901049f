#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "address.hpp"
#include "error.hpp"
#include "events.hpp"

namespace ownmap {

enum class LabelClass { Eoa, Burner, Cex, FtiaVesting, Multisig, Contract };

inline std::string_view to_string(LabelClass c) {
    switch (c) {
        case LabelClass::Eoa: return "eoa";
        case LabelClass::Burner: return "burner";
        case LabelClass::Cex: return "cex";
        case LabelClass::FtiaVesting: return "ftia_vesting";
        case LabelClass::Multisig: return "multisig";
        case LabelClass::Contract: return "contract";
    }
    return "eoa";
}

inline std::optional<LabelClass> parse_label_class(std::string_view s) {
    for (auto c : {LabelClass::Eoa, LabelClass::Burner, LabelClass::Cex, LabelClass::FtiaVesting, LabelClass::Multisig,
                   LabelClass::Contract})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

struct Label {
    LabelClass cls = LabelClass::Eoa;
    std::string protocol;
    std::string note;

    friend bool operator==(const Label&, const Label&) = default;
};

enum class ContractKind { LiquidityPool, LendingPool, Staking, Unique, ExcludedContract };

inline std::string_view to_string(ContractKind k) {
    switch (k) {
        case ContractKind::LiquidityPool: return "liquidity_pool";
        case ContractKind::LendingPool: return "lending_pool";
        case ContractKind::Staking: return "staking";
        case ContractKind::Unique: return "unique";
        case ContractKind::ExcludedContract: return "excluded_contract";
    }
    return "unique";
}

inline std::optional<ContractKind> parse_contract_kind(std::string_view s) {
    for (auto k : {ContractKind::LiquidityPool, ContractKind::LendingPool, ContractKind::Staking, ContractKind::Unique,
                   ContractKind::ExcludedContract})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

// Known `params` keys:
//   variant   on liquidity pools: "amm" (default), "wrapper", "basket",
//             "migration", "derivative". Anything but amm classifies as Other.
//   exclusion on excluded contracts: "non_circulating" for escrowed supply;
//             the default reason is unmappable_contract.
struct ContractInfo {
    ContractKind kind = ContractKind::Unique;
    std::string protocol;
    std::optional<Address> share_token;
    std::map<std::string, std::string> params;

    std::string param(const std::string& key, std::string fallback = {}) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    friend bool operator==(const ContractInfo&, const ContractInfo&) = default;
};

class LabelRegistry {
public:
    void set(const Address& a, Label l) { labels_[a] = std::move(l); }
    const Label* find(const Address& a) const {
        auto it = labels_.find(a);
        return it == labels_.end() ? nullptr : &it->second;
    }
    const std::map<Address, Label>& all() const noexcept { return labels_; }
    bool empty() const noexcept { return labels_.empty(); }

    friend bool operator==(const LabelRegistry&, const LabelRegistry&) = default;

private:
    std::map<Address, Label> labels_;
};

class ContractRegistry {
public:
    void set(const Address& a, ContractInfo info) {
        if ((info.kind == ContractKind::LiquidityPool || info.kind == ContractKind::LendingPool) && !info.share_token)
            throw SchemaError(a.hex(), std::string(to_string(info.kind)) + " requires share_token");
        contracts_[a] = std::move(info);
    }
    const ContractInfo* find(const Address& a) const {
        auto it = contracts_.find(a);
        return it == contracts_.end() ? nullptr : &it->second;
    }
    const std::map<Address, ContractInfo>& all() const noexcept { return contracts_; }
    bool empty() const noexcept { return contracts_.empty(); }

    friend bool operator==(const ContractRegistry&, const ContractRegistry&) = default;

private:
    std::map<Address, ContractInfo> contracts_;
};

namespace detail {

inline Address registry_key(const std::string& key) {
    try {
        return Address::parse(key);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(key, e.what());
    }
}

inline std::string optional_string(const nlohmann::json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw SchemaError(where, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
}

inline nlohmann::json parse_json_document(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(what, e.what());
    }
}

}  // namespace detail

inline LabelRegistry parse_labels(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("labels", "document must be a JSON object");
    LabelRegistry reg;
    for (const auto& [key, value] : doc.items()) {
        const auto addr = detail::registry_key(key);
        if (!value.is_object()) throw SchemaError(key, "label must be an object");
        Label label;
        auto cls = parse_label_class(detail::optional_string(value, "class", key));
        if (!cls) throw SchemaError(key, "unknown or missing class");
        label.cls = *cls;
        label.protocol = detail::optional_string(value, "protocol", key);
        label.note = detail::optional_string(value, "note", key);
        if (reg.find(addr)) throw SchemaError(key, "duplicate address");
        reg.set(addr, std::move(label));
    }
    return reg;
}

inline ContractRegistry parse_contracts(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("contracts", "document must be a JSON object");
    ContractRegistry reg;
    for (const auto& [key, value] : doc.items()) {
        const auto addr = detail::registry_key(key);
        if (!value.is_object()) throw SchemaError(key, "contract entry must be an object");
        ContractInfo info;
        auto kind = parse_contract_kind(detail::optional_string(value, "kind", key));
        if (!kind) throw SchemaError(key, "unknown or missing kind");
        info.kind = *kind;
        info.protocol = detail::optional_string(value, "protocol", key);
        const auto share = detail::optional_string(value, "share_token", key);
        if (!share.empty()) info.share_token = detail::registry_key(share);
        if (auto p = value.find("params"); p != value.end() && !p->is_null()) {
            if (!p->is_object()) throw SchemaError(key, "params must be an object");
            for (const auto& [pk, pv] : p->items()) {
                if (!pv.is_string()) throw SchemaError(key, "param '" + pk + "' must be a string");
                info.params[pk] = pv.get<std::string>();
            }
        }
        if (reg.find(addr)) throw SchemaError(key, "duplicate address");
        reg.set(addr, std::move(info));
    }
    return reg;
}

inline nlohmann::ordered_json labels_to_json(const LabelRegistry& reg) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [addr, label] : reg.all()) {
        nlohmann::ordered_json e;
        e["class"] = std::string(to_string(label.cls));
        if (!label.protocol.empty()) e["protocol"] = label.protocol;
        if (!label.note.empty()) e["note"] = label.note;
        doc[addr.hex()] = std::move(e);
    }
    return doc;
}

inline nlohmann::ordered_json contracts_to_json(const ContractRegistry& reg) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [addr, info] : reg.all()) {
        nlohmann::ordered_json e;
        e["kind"] = std::string(to_string(info.kind));
        e["protocol"] = info.protocol;
        if (info.share_token) e["share_token"] = info.share_token->hex();
        if (!info.params.empty()) {
            nlohmann::ordered_json p = nlohmann::ordered_json::object();
            for (const auto& [k, v] : info.params) p[k] = v;
            e["params"] = std::move(p);
        }
        doc[addr.hex()] = std::move(e);
    }
    return doc;
}

inline std::pair<LabelRegistry, ContractRegistry> load_registries(const std::string& labels_path,
                                                                   const std::string& contracts_path) {
    auto labels = parse_labels(detail::parse_json_document(read_file(labels_path), labels_path));
    auto contracts = parse_contracts(detail::parse_json_document(read_file(contracts_path), contracts_path));
    return {std::move(labels), std::move(contracts)};
}

}  // namespace ownmap
