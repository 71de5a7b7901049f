#pragma once

// Category-specific remapping of one custodial balance.
//
// Every rule reduces to a weighted split of an amount R held by a contract:
// the weights are share-token balances (pools), receipt balances plus
// borrower debts (lending), or per-owner positions plus an undistributed
// remainder (staking, unique). Splits are exact, so the parts always sum to
// R. A contract's own weight is never credited back to it; that slice is
// excluded as burned.

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ledger.hpp"
#include "types.hpp"

namespace ownmap {

struct Credit {
    Address beneficiary;
    Amount amount;
    Address via;        // token in which the beneficiary's claim is held
    bool debt = false;  // borrower leg of a lending split
};

struct Split {
    std::vector<Credit> credits;
    std::vector<std::pair<ExclusionReason, Amount>> exclusions;
    std::vector<std::string> audit;

    Amount credited_total() const {
        Amount s;
        for (const auto& c : credits) s += c.amount;
        return s;
    }
    Amount excluded_total() const {
        Amount s;
        for (const auto& [_, v] : exclusions) s += v;
        return s;
    }
};

namespace detail {

inline void push_exclusion(Split& split, ExclusionReason reason, const Amount& amount) {
    if (amount.is_zero()) return;
    for (auto& [r, v] : split.exclusions)
        if (r == reason) {
            v += amount;
            return;
        }
    split.exclusions.emplace_back(reason, amount);
}

}  // namespace detail

// R split over the positive balances of a share token.
inline Split split_pro_rata(const Address& pool, const Amount& amount, const HolderTable& share_holders) {
    Split split;
    if (amount.is_zero()) return split;
    Amount supply;
    for (const auto& [_, bal] : share_holders.entries())
        if (bal.sign() > 0) supply += bal;
    if (supply.is_zero()) throw EmptyPool(pool.hex());
    const Address via = share_holders.token().address;
    for (const auto& [holder, bal] : share_holders.entries()) {
        if (bal.sign() <= 0) continue;
        const Amount part = amount * bal / supply;
        if (holder == pool)
            detail::push_exclusion(split, ExclusionReason::SelfMappedBurn, part);
        else
            split.credits.push_back({holder, part, via, false});
    }
    return split;
}

// Direct holdings of a lending pool. Receipt holders share the gross
// deposits (pool balance plus outstanding debt); borrowers carry their debt
// as a negative leg, so the legs net to the pool balance.
inline Split split_lending(const Address& pool, const Amount& pool_balance, const HolderTable& receipt_holders,
                           const PositionLedger& ledger) {
    const Amount debts = ledger.total_debts();
    if (debts > ledger.total_stakes()) throw InsolventPool(pool.hex());
    Split split = split_pro_rata(pool, pool_balance + debts, receipt_holders);
    for (const auto& [borrower, debt] : ledger.debts) {
        if (borrower == pool) {
            detail::push_exclusion(split, ExclusionReason::SelfMappedBurn, -debt);
            continue;
        }
        split.credits.push_back({borrower, -debt, ledger.token, true});
    }
    return split;
}

enum class LedgerSplitMode {
    // R is the contract's direct balance in the ledger token; owner
    // positions are paid out at face value and the rest is the remainder.
    Direct,
    // R reached the contract through its holding of the ledger token; it is
    // split in proportion to positions plus the recorded reserve.
    Attributed,
};

// Staking and unique contracts. `remainder_reason` labels whatever is not
// owed to a position holder (future rewards, unmappable leftovers).
// `strict` makes over-allocation an error instead of a pro-rata haircut.
inline Split split_ledger(const Address& contract, const Amount& amount, const PositionLedger& ledger,
                          LedgerSplitMode mode, ExclusionReason remainder_reason, bool strict) {
    Split split;
    if (amount.is_zero()) return split;
    std::map<Address, Amount> owed;
    for (const auto& [owner, v] : ledger.stakes) owed[owner] += v;
    for (const auto& [owner, v] : ledger.accrued_rewards) owed[owner] += v;
    Amount owed_total;
    for (const auto& [_, v] : owed) owed_total += v;

    Amount remainder;
    if (mode == LedgerSplitMode::Direct) {
        remainder = amount - owed_total;
        if (remainder.sign() < 0) {
            if (strict) throw OverAllocated(contract.hex());
            split.audit.push_back("positions of " + contract.hex() + " exceed its balance; paid pro rata");
            remainder = Amount{};
        }
    } else {
        remainder = ledger.undistributed_reserve;
    }

    const Amount weight_total = owed_total + remainder;
    if (weight_total.is_zero()) {
        detail::push_exclusion(split, remainder_reason, amount);
        return split;
    }
    for (const auto& [owner, w] : owed) {
        const Amount part = amount * w / weight_total;
        if (owner == contract)
            detail::push_exclusion(split, ExclusionReason::SelfMappedBurn, part);
        else
            split.credits.push_back({owner, part, ledger.token, false});
    }
    detail::push_exclusion(split, remainder_reason, amount * remainder / weight_total);
    return split;
}

namespace detail {

inline std::vector<Adjustment> apply_split(HolderTable& table, const Address& source, const Split& split,
                                           AdjustmentCategory category, int depth) {
    table.set(source, Amount{});
    std::map<std::pair<Address, bool>, Amount> merged;
    for (const auto& c : split.credits) merged[{c.beneficiary, c.debt}] += c.amount;
    std::vector<Adjustment> out;
    for (const auto& [key, amount] : merged) {
        if (amount.is_zero()) continue;
        table.credit(key.first, amount);
        out.push_back(Adjustment{table.token(), source, key.first, amount, category, depth, true});
    }
    for (const auto& [reason, amount] : split.exclusions) table.add_exclusion(source, reason, amount);
    std::sort(out.begin(), out.end(), adjustment_order);
    return out;
}

}  // namespace detail

using RemapOutcome = std::pair<std::vector<Adjustment>, HolderTable>;

inline RemapOutcome map_liquidity_pool(const Address& pool, HolderTable table, const HolderTable& share_holders,
                                       AdjustmentCategory category = AdjustmentCategory::AmmLiquidity) {
    const auto split = split_pro_rata(pool, table.balance(pool), share_holders);
    auto adjustments = detail::apply_split(table, pool, split, category, 1);
    return {std::move(adjustments), std::move(table)};
}

inline RemapOutcome map_lending_pool(const Address& pool, HolderTable table, const HolderTable& receipt_holders,
                                     const PositionLedger& ledger) {
    const auto split = split_lending(pool, table.balance(pool), receipt_holders, ledger);
    auto adjustments = detail::apply_split(table, pool, split, AdjustmentCategory::LendingBorrowing, 1);
    return {std::move(adjustments), std::move(table)};
}

inline RemapOutcome map_staking(const Address& contract, HolderTable table, const PositionLedger& ledger,
                                AdjustmentCategory category = AdjustmentCategory::InternalStaking) {
    const auto split = split_ledger(contract, table.balance(contract), ledger, LedgerSplitMode::Direct,
                                    ExclusionReason::FutureRewards, false);
    auto adjustments = detail::apply_split(table, contract, split, category, 1);
    return {std::move(adjustments), std::move(table)};
}

inline RemapOutcome map_unique(const Address& contract, HolderTable table,
                               const std::map<Address, Amount>& explicit_owners) {
    PositionLedger ledger;
    ledger.contract = contract;
    ledger.token = table.token().address;
    ledger.stakes = explicit_owners;
    const auto split = split_ledger(contract, table.balance(contract), ledger, LedgerSplitMode::Direct,
                                    ExclusionReason::UnmappableContract, true);
    auto adjustments = detail::apply_split(table, contract, split, AdjustmentCategory::Other, 1);
    return {std::move(adjustments), std::move(table)};
}

}  // namespace ownmap
