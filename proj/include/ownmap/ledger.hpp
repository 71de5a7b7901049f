#pragma once

// Balance and position reconstruction at a snapshot block.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "events.hpp"
#include "types.hpp"

namespace ownmap {

// Token metadata lookup. Tokens that are only seen in events (share tokens,
// receipts) get a placeholder id whose symbol is the address.
class TokenBook {
public:
    TokenBook() = default;
    explicit TokenBook(std::span<const TokenId> tokens) {
        for (const auto& t : tokens) add(t);
    }

    void add(const TokenId& t) { tokens_[t.address] = t; }

    TokenId lookup(const Address& a) const {
        auto it = tokens_.find(a);
        if (it != tokens_.end()) return it->second;
        TokenId t;
        t.address = a;
        t.symbol = a.hex();
        return t;
    }

    bool contains(const Address& a) const { return tokens_.count(a) != 0; }
    const std::map<Address, TokenId>& all() const noexcept { return tokens_; }

private:
    std::map<Address, TokenId> tokens_;
};

namespace detail {

inline void apply_transfer(HolderTable& table, const LedgerEvent& ev) {
    const Amount amount(ev.amount);
    if (ev.from->is_zero()) {
        table.record_mint(amount);
    } else {
        const Amount have = table.balance(*ev.from);
        if (have < amount) throw NegativeBalance(ev.from->hex(), ev.block);
        table.credit(*ev.from, -amount);
    }
    if (ev.to->is_zero())
        table.record_burn(amount);
    else
        table.credit(*ev.to, amount);
}

}  // namespace detail

// Folds every transfer of `token` up to and including the snapshot block.
inline HolderTable build_holder_table(std::span<const LedgerEvent> events, const TokenId& token, const Snapshot& at) {
    HolderTable table(token, at.block);
    for (const auto& ev : events) {
        if (ev.block > at.block) break;
        if (ev.kind != EventKind::Transfer || ev.token != token.address) continue;
        detail::apply_transfer(table, ev);
    }
    return table;
}

// One pass over the stream producing a table for every token seen.
inline std::map<Address, HolderTable> build_holder_tables(std::span<const LedgerEvent> events, const TokenBook& book,
                                                          const Snapshot& at) {
    std::map<Address, HolderTable> tables;
    for (const auto& ev : events) {
        if (ev.block > at.block) break;
        if (ev.kind != EventKind::Transfer) continue;
        auto it = tables.find(ev.token);
        if (it == tables.end()) it = tables.emplace(ev.token, HolderTable(book.lookup(ev.token), at.block)).first;
        detail::apply_transfer(it->second, ev);
    }
    return tables;
}

struct PositionLedger {
    Address contract;
    Address token;
    std::map<Address, Amount> stakes;  // deposits and stakes
    std::map<Address, Amount> debts;   // outstanding borrows, stored positive
    std::map<Address, Amount> accrued_rewards;
    Amount balance;                    // contract's own token balance
    Amount undistributed_reserve;      // balance + debts - stakes - accrued, floored at 0
    std::vector<std::string> audit;

    static Amount total(const std::map<Address, Amount>& m) {
        Amount s;
        for (const auto& [_, v] : m) s += v;
        return s;
    }
    Amount total_stakes() const { return total(stakes); }
    Amount total_debts() const { return total(debts); }
    Amount total_accrued() const { return total(accrued_rewards); }
    bool empty() const { return stakes.empty() && debts.empty() && accrued_rewards.empty(); }

    friend bool operator==(const PositionLedger&, const PositionLedger&) = default;
};

namespace detail {

struct Positions {
    std::map<Address, Amount> stakes;
    std::map<Address, Amount> debts;
    std::map<Address, Amount> accrued;
};

inline void bump(std::map<Address, Amount>& m, const Address& owner, const Amount& delta, const char* what) {
    auto [it, inserted] = m.try_emplace(owner);
    it->second += delta;
    if (it->second.sign() < 0) throw NegativePosition(owner.hex(), what);
    if (it->second.is_zero()) m.erase(it);
}

inline void merge_into(std::map<Address, Amount>& dst, const std::map<Address, Amount>& src) {
    for (const auto& [k, v] : src) {
        auto& slot = dst[k];
        slot += v;
        if (slot.is_zero()) dst.erase(k);
    }
}

}  // namespace detail

// Replays position events of `contract` (in any token, so migrations can be
// followed) and reports the positions held in `token` at the snapshot.
inline PositionLedger build_position_ledger(std::span<const LedgerEvent> events, const Address& contract,
                                            const Address& token, const Snapshot& at) {
    std::map<Address, detail::Positions> positions;
    Amount balance;
    for (const auto& ev : events) {
        if (ev.block > at.block) break;
        if (ev.kind == EventKind::Transfer) {
            if (ev.token != token) continue;
            if (*ev.to == contract) balance += Amount(ev.amount);
            if (*ev.from == contract) balance -= Amount(ev.amount);
            continue;
        }
        if (!ev.contract || *ev.contract != contract) continue;
        auto& pos = positions[ev.token];
        const Amount amount(ev.amount);
        switch (ev.kind) {
            case EventKind::Deposit:
            case EventKind::Stake: detail::bump(pos.stakes, *ev.owner, amount, "stake"); break;
            case EventKind::Withdraw:
            case EventKind::Unstake: detail::bump(pos.stakes, *ev.owner, -amount, "unstake exceeds stake"); break;
            case EventKind::Borrow: detail::bump(pos.debts, *ev.owner, amount, "borrow"); break;
            case EventKind::Repay: detail::bump(pos.debts, *ev.owner, -amount, "repay exceeds debt"); break;
            case EventKind::RewardAccrued: detail::bump(pos.accrued, *ev.owner, amount, "accrue"); break;
            case EventKind::RewardPaid:
                detail::bump(pos.accrued, *ev.owner, -amount, "payout exceeds accrued reward");
                break;
            case EventKind::Migrate: {
                if (*ev.to == ev.token) break;
                auto moved = std::move(pos);
                positions.erase(ev.token);
                auto& dst = positions[*ev.to];
                detail::merge_into(dst.stakes, moved.stakes);
                detail::merge_into(dst.debts, moved.debts);
                detail::merge_into(dst.accrued, moved.accrued);
                break;
            }
            case EventKind::Transfer: break;
        }
    }

    PositionLedger ledger;
    ledger.contract = contract;
    ledger.token = token;
    ledger.balance = balance;
    if (auto it = positions.find(token); it != positions.end()) {
        ledger.stakes = std::move(it->second.stakes);
        ledger.debts = std::move(it->second.debts);
        ledger.accrued_rewards = std::move(it->second.accrued);
    }
    const Amount reserve = balance + ledger.total_debts() - ledger.total_stakes() - ledger.total_accrued();
    if (reserve.sign() < 0) {
        ledger.audit.push_back("reserve of " + contract.hex() + " in " + token.hex() + " clamped from " + reserve.str() +
                               " to 0 at block " + std::to_string(at.block));
    } else {
        ledger.undistributed_reserve = reserve;
    }
    return ledger;
}

}  // namespace ownmap
