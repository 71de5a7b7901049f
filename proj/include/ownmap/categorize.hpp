#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "registry.hpp"
#include "types.hpp"

namespace ownmap {

enum class Category {
    IncludedEoa,
    Multisig,
    Burner,
    Cex,
    FtiaVesting,
    LiquidityPool,
    LendingPool,
    Staking,
    Unique,
    ExcludedContract,
    UnknownContract,
};

inline constexpr std::array all_categories{
    Category::IncludedEoa,   Category::Multisig,    Category::Burner,  Category::Cex,
    Category::FtiaVesting,   Category::LiquidityPool, Category::LendingPool, Category::Staking,
    Category::Unique,        Category::ExcludedContract, Category::UnknownContract};

inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::IncludedEoa: return "included_eoa";
        case Category::Multisig: return "multisig";
        case Category::Burner: return "burner";
        case Category::Cex: return "cex";
        case Category::FtiaVesting: return "ftia_vesting";
        case Category::LiquidityPool: return "liquidity_pool";
        case Category::LendingPool: return "lending_pool";
        case Category::Staking: return "staking";
        case Category::Unique: return "unique";
        case Category::ExcludedContract: return "excluded_contract";
        case Category::UnknownContract: return "unknown_contract";
    }
    return "unknown_contract";
}

// Contract registry entries take precedence over labels. Unlabeled addresses
// are treated as plain accounts; an address labeled as bytecode-bearing
// without a registry entry is an unknown contract.
inline Category categorize(const Address& addr, const LabelRegistry& labels, const ContractRegistry& contracts) {
    if (const auto* info = contracts.find(addr)) {
        switch (info->kind) {
            case ContractKind::LiquidityPool: return Category::LiquidityPool;
            case ContractKind::LendingPool: return Category::LendingPool;
            case ContractKind::Staking: return Category::Staking;
            case ContractKind::Unique: return Category::Unique;
            case ContractKind::ExcludedContract: return Category::ExcludedContract;
        }
    }
    if (const auto* label = labels.find(addr)) {
        switch (label->cls) {
            case LabelClass::Eoa: return Category::IncludedEoa;
            case LabelClass::Burner: return Category::Burner;
            case LabelClass::Cex: return Category::Cex;
            case LabelClass::FtiaVesting: return Category::FtiaVesting;
            case LabelClass::Multisig: return Category::Multisig;
            case LabelClass::Contract: return Category::UnknownContract;
        }
    }
    return Category::IncludedEoa;
}

struct InclusionDecision {
    enum class Action { Include, Exclude, Map };
    Action action = Action::Include;
    std::optional<ExclusionReason> reason;  // set iff action == Exclude

    static InclusionDecision include() { return {Action::Include, std::nullopt}; }
    static InclusionDecision exclude(ExclusionReason r) { return {Action::Exclude, r}; }
    static InclusionDecision map() { return {Action::Map, std::nullopt}; }

    bool is_include() const noexcept { return action == Action::Include; }
    bool is_exclude() const noexcept { return action == Action::Exclude; }
    bool is_map() const noexcept { return action == Action::Map; }

    friend bool operator==(const InclusionDecision&, const InclusionDecision&) = default;
};

inline InclusionDecision inclusion_decision(Category c) {
    switch (c) {
        case Category::Burner: return InclusionDecision::exclude(ExclusionReason::Burner);
        case Category::Cex: return InclusionDecision::exclude(ExclusionReason::CexCustody);
        case Category::FtiaVesting: return InclusionDecision::exclude(ExclusionReason::FtiaVesting);
        case Category::ExcludedContract: return InclusionDecision::exclude(ExclusionReason::UnmappableContract);
        case Category::LiquidityPool:
        case Category::LendingPool:
        case Category::Staking:
        case Category::Unique: return InclusionDecision::map();
        case Category::IncludedEoa:
        case Category::Multisig:
        case Category::UnknownContract: return InclusionDecision::include();
    }
    return InclusionDecision::include();
}

// Registry-aware refinement: escrow contracts flagged non-circulating are
// excluded under that reason instead of the generic one.
inline InclusionDecision inclusion_decision(const Address& addr, const LabelRegistry& labels,
                                            const ContractRegistry& contracts) {
    const auto cat = categorize(addr, labels, contracts);
    auto decision = inclusion_decision(cat);
    if (cat == Category::ExcludedContract && contracts.find(addr)->param("exclusion") == "non_circulating")
        decision.reason = ExclusionReason::NonCirculating;
    return decision;
}

inline AdjustmentCategory classify_contract(const ContractInfo& info, std::string_view token_protocol) {
    switch (info.kind) {
        case ContractKind::Staking:
            return (!info.protocol.empty() && info.protocol == token_protocol) ? AdjustmentCategory::InternalStaking
                                                                               : AdjustmentCategory::ExternalStaking;
        case ContractKind::LiquidityPool: {
            const auto variant = info.param("variant", "amm");
            return variant == "amm" ? AdjustmentCategory::AmmLiquidity : AdjustmentCategory::Other;
        }
        case ContractKind::LendingPool: return AdjustmentCategory::LendingBorrowing;
        case ContractKind::Unique:
        case ContractKind::ExcludedContract: return AdjustmentCategory::Other;
    }
    return AdjustmentCategory::Other;
}

inline AdjustmentCategory classify_adjustment(const Adjustment& adj, const ContractRegistry& contracts,
                                              std::string_view token_protocol) {
    const auto* info = contracts.find(adj.source);
    if (!info) return AdjustmentCategory::Other;
    return classify_contract(*info, token_protocol);
}

}  // namespace ownmap
