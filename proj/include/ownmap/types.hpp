#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>

#include "address.hpp"
#include "amount.hpp"

namespace ownmap {

struct TokenId {
    Address address;
    std::string symbol;
    int decimals = 18;
    // Protocol the token belongs to; decides internal vs external staking.
    std::string protocol;

    friend bool operator==(const TokenId& a, const TokenId& b) { return a.address == b.address; }
    friend auto operator<=>(const TokenId& a, const TokenId& b) { return a.address <=> b.address; }
};

struct Snapshot {
    std::uint64_t block = 0;
    std::string date;  // ISO-8601, YYYY-MM-DD
};

enum class AdjustmentCategory { InternalStaking, ExternalStaking, AmmLiquidity, LendingBorrowing, Other };

inline constexpr std::array all_adjustment_categories{
    AdjustmentCategory::InternalStaking, AdjustmentCategory::ExternalStaking, AdjustmentCategory::AmmLiquidity,
    AdjustmentCategory::LendingBorrowing, AdjustmentCategory::Other};

enum class ExclusionReason {
    Burner,
    CexCustody,
    FtiaVesting,
    UnmappableContract,
    SelfMappedBurn,
    FutureRewards,
    NonCirculating,
};

inline constexpr std::array all_exclusion_reasons{
    ExclusionReason::Burner,         ExclusionReason::CexCustody,    ExclusionReason::FtiaVesting,
    ExclusionReason::UnmappableContract, ExclusionReason::SelfMappedBurn, ExclusionReason::FutureRewards,
    ExclusionReason::NonCirculating};

inline std::string_view to_string(AdjustmentCategory c) {
    switch (c) {
        case AdjustmentCategory::InternalStaking: return "internal_staking";
        case AdjustmentCategory::ExternalStaking: return "external_staking";
        case AdjustmentCategory::AmmLiquidity: return "amm_liquidity";
        case AdjustmentCategory::LendingBorrowing: return "lending_borrowing";
        case AdjustmentCategory::Other: return "other";
    }
    return "other";
}

inline AdjustmentCategory parse_adjustment_category(std::string_view s) {
    for (auto c : all_adjustment_categories)
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown adjustment category '" + std::string(s) + "'");
}

inline std::string_view to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::Burner: return "burner";
        case ExclusionReason::CexCustody: return "cex_custody";
        case ExclusionReason::FtiaVesting: return "ftia_vesting";
        case ExclusionReason::UnmappableContract: return "unmappable_contract";
        case ExclusionReason::SelfMappedBurn: return "self_mapped_burn";
        case ExclusionReason::FutureRewards: return "future_rewards";
        case ExclusionReason::NonCirculating: return "non_circulating";
    }
    return "unmappable_contract";
}

inline ExclusionReason parse_exclusion_reason(std::string_view s) {
    for (auto r : all_exclusion_reasons)
        if (to_string(r) == s) return r;
    throw std::invalid_argument("unknown exclusion reason '" + std::string(s) + "'");
}

// Reasons that count as destroyed supply for the inclusion ratio.
inline bool counts_as_burned(ExclusionReason r) {
    return r == ExclusionReason::Burner || r == ExclusionReason::SelfMappedBurn;
}

struct ExclusionKey {
    Address address;
    ExclusionReason reason = ExclusionReason::UnmappableContract;

    friend bool operator==(const ExclusionKey&, const ExclusionKey&) = default;
    friend auto operator<=>(const ExclusionKey&, const ExclusionKey&) = default;
};

enum class TableStage { Raw, Mapped };

// Signed balances of one token at one block. Zero entries are never stored.
class HolderTable {
public:
    HolderTable() = default;
    HolderTable(TokenId token, std::uint64_t block) : token_(std::move(token)), block_(block) {}

    const TokenId& token() const noexcept { return token_; }
    std::uint64_t block() const noexcept { return block_; }
    TableStage stage() const noexcept { return stage_; }
    void set_stage(TableStage s) noexcept { stage_ = s; }

    const std::map<Address, Amount>& entries() const noexcept { return entries_; }
    const std::map<ExclusionKey, Amount>& excluded() const noexcept { return excluded_; }

    // Total ever minted and burned through the zero address up to `block`.
    const Amount& minted() const noexcept { return minted_; }
    const Amount& burned() const noexcept { return burned_; }
    void record_mint(const Amount& a) { minted_ += a; }
    void record_burn(const Amount& a) { burned_ += a; }

    void credit(const Address& a, const Amount& delta) {
        if (delta.is_zero()) return;
        auto [it, inserted] = entries_.try_emplace(a, delta);
        if (!inserted) {
            it->second += delta;
            if (it->second.is_zero()) entries_.erase(it);
        }
    }

    void set(const Address& a, const Amount& value) {
        if (value.is_zero())
            entries_.erase(a);
        else
            entries_[a] = value;
    }

    Amount balance(const Address& a) const {
        auto it = entries_.find(a);
        return it == entries_.end() ? Amount{} : it->second;
    }

    bool contains(const Address& a) const { return entries_.count(a) != 0; }

    void add_exclusion(const Address& a, ExclusionReason reason, const Amount& amount) {
        if (amount.is_zero()) return;
        auto [it, inserted] = excluded_.try_emplace(ExclusionKey{a, reason}, amount);
        if (!inserted) {
            it->second += amount;
            if (it->second.is_zero()) excluded_.erase(it);
        }
    }

    // Moves the whole entry of `a` into the exclusion log.
    void exclude(const Address& a, ExclusionReason reason) {
        auto it = entries_.find(a);
        if (it == entries_.end()) return;
        add_exclusion(a, reason, it->second);
        entries_.erase(it);
    }

    Amount entries_total() const {
        Amount s;
        for (const auto& [_, v] : entries_) s += v;
        return s;
    }

    Amount excluded_total() const {
        Amount s;
        for (const auto& [_, v] : excluded_) s += v;
        return s;
    }

    // sum(entries) + sum(excluded) == minted - burned
    bool conserves() const { return entries_total() + excluded_total() == minted_ - burned_; }

    friend bool operator==(const HolderTable&, const HolderTable&) = default;

private:
    TokenId token_;
    std::uint64_t block_ = 0;
    TableStage stage_ = TableStage::Raw;
    std::map<Address, Amount> entries_;
    std::map<ExclusionKey, Amount> excluded_;
    Amount minted_;
    Amount burned_;
};

struct Adjustment {
    TokenId token;
    Address source;
    Address beneficiary;
    Amount amount;  // negative for mapped debt
    AdjustmentCategory category = AdjustmentCategory::Other;
    int depth = 1;
    // False when the beneficiary is itself excluded (e.g. an exchange staking
    // customer funds); such adjustments do not count toward wrapping complexity.
    bool relevant = true;

    friend bool operator==(const Adjustment&, const Adjustment&) = default;
};

// Canonical adjustment order: (depth, source, beneficiary), credits before debts.
inline bool adjustment_order(const Adjustment& a, const Adjustment& b) {
    return std::forward_as_tuple(a.depth, a.source, a.beneficiary, b.amount) <
           std::forward_as_tuple(b.depth, b.source, b.beneficiary, a.amount);
}

}  // namespace ownmap
