#pragma once

/**
 * Iterative beneficial-ownership mapping for one (token, snapshot).
 *
 * Each iteration ranks the working table by amount (descending, ties by
 * address), inspects the top `window` rows, excludes rows that belong to
 * excluded categories and remaps rows held by mappable contracts. Credits
 * produced in an iteration are applied when the iteration ends, so an
 * adjustment's depth is the number of custody layers it sits below the
 * holder table. The loop stops after the first iteration that maps nothing.
 *
 * Every row remembers which token its claim is held in ("via"). A staking
 * contract that received an amount because it holds LP tokens splits that
 * amount by its LP-token stakes, while its direct holdings of the mapped
 * token are split by the ledger of that token.
 */

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "categorize.hpp"
#include "ledger.hpp"
#include "registry.hpp"
#include "remap.hpp"
#include "types.hpp"

namespace ownmap {

using LedgerProvider = std::function<const PositionLedger*(const Address& contract, const Address& token)>;
using ShareTableProvider = std::function<const HolderTable*(const Address& token)>;

struct MapperOptions {
    std::size_t window = 1000;
    std::size_t iteration_cap = 50;
    // Unknown contracts strictly above this share of relevant supply fail the run.
    Amount coverage_threshold = Amount(mpz_class(1), mpz_class(1000));
};

struct MappingResult {
    HolderTable table;
    std::vector<Adjustment> adjustments;
    std::map<ExclusionKey, Amount> exclusions;  // added by this run
    std::size_t iterations = 0;
    std::vector<std::string> audit;

    int max_depth() const {
        int d = 0;
        for (const auto& a : adjustments) d = std::max(d, a.depth);
        return d;
    }
};

struct MappingInputs {
    const LabelRegistry& labels;
    const ContractRegistry& contracts;
    LedgerProvider ledgers;
    ShareTableProvider share_tables;
};

namespace detail {

struct WorkingRow {
    std::map<Address, Amount> parts;  // via token -> amount
    Amount rank_bonus;                // outstanding loans of an unsettled lending pool

    Amount total() const {
        Amount s;
        for (const auto& [_, v] : parts) s += v;
        return s;
    }
};

class DependencyGraph {
public:
    // Records source -> target; throws if target already reaches source.
    void add(const Address& source, const Address& target) {
        if (source == target) return;
        if (edges_[source].count(target)) return;
        std::vector<Address> path;
        std::set<Address> seen;
        if (reach(target, source, seen, path)) {
            std::vector<std::string> names{source.hex()};
            for (const auto& p : path) names.push_back(p.hex());
            throw CycleDetected(std::move(names));
        }
        edges_[source].insert(target);
    }

private:
    bool reach(const Address& from, const Address& goal, std::set<Address>& seen, std::vector<Address>& path) const {
        path.push_back(from);
        if (from == goal) return true;
        if (seen.insert(from).second) {
            if (auto it = edges_.find(from); it != edges_.end())
                for (const auto& next : it->second)
                    if (reach(next, goal, seen, path)) return true;
        }
        path.pop_back();
        return false;
    }

    std::map<Address, std::set<Address>> edges_;
};

inline PositionLedger empty_ledger(const Address& contract, const Address& token) {
    PositionLedger blank;
    blank.contract = contract;
    blank.token = token;
    return blank;
}

}  // namespace detail

inline MappingResult run_iterative_mapping(const HolderTable& initial, const MappingInputs& in,
                                           const MapperOptions& options = {}) {
    const TokenId& token = initial.token();
    const Address& self_token = token.address;

    auto ledger_for = [&](const Address& contract, const Address& t) -> const PositionLedger* {
        return in.ledgers ? in.ledgers(contract, t) : nullptr;
    };
    auto shares_for = [&](const std::optional<Address>& t) -> const HolderTable* {
        return (t && in.share_tables) ? in.share_tables(*t) : nullptr;
    };

    std::map<Address, detail::WorkingRow> rows;
    for (const auto& [addr, amount] : initial.entries()) rows[addr].parts[self_token] = amount;

    // Fully lent-out pools hold little or nothing of the token yet still owe
    // their depositors; seed them so their loans get mapped.
    std::set<Address> lending_settled;
    if (initial.stage() == TableStage::Raw) {
        for (const auto& [addr, info] : in.contracts.all()) {
            if (info.kind != ContractKind::LendingPool) continue;
            if (const auto* ledger = ledger_for(addr, self_token); ledger && ledger->total_debts().sign() > 0)
                rows[addr].rank_bonus = ledger->total_debts();
        }
    } else {
        for (const auto& [addr, info] : in.contracts.all())
            if (info.kind == ContractKind::LendingPool) lending_settled.insert(addr);
    }

    MappingResult result;
    detail::DependencyGraph graph;
    std::map<Address, InclusionDecision> decisions;
    auto decide = [&](const Address& a) -> const InclusionDecision& {
        auto it = decisions.find(a);
        if (it == decisions.end()) it = decisions.emplace(a, inclusion_decision(a, in.labels, in.contracts)).first;
        return it->second;
    };
    auto add_exclusion = [&](const Address& a, ExclusionReason r, const Amount& v) {
        if (v.is_zero()) return;
        auto& slot = result.exclusions[ExclusionKey{a, r}];
        slot += v;
        if (slot.is_zero()) result.exclusions.erase(ExclusionKey{a, r});
    };

    bool converged = false;
    for (std::size_t iteration = 1; iteration <= options.iteration_cap; ++iteration) {
        // Exclusion is a label lookup, so it is not limited to the window.
        for (auto it = rows.begin(); it != rows.end();) {
            const auto& decision = decide(it->first);
            if (!decision.is_exclude()) {
                ++it;
                continue;
            }
            add_exclusion(it->first, *decision.reason, it->second.total());
            it = rows.erase(it);
        }

        std::vector<std::pair<Amount, Address>> ranked;
        ranked.reserve(rows.size());
        for (const auto& [addr, row] : rows) ranked.emplace_back(row.total() + row.rank_bonus, addr);
        const std::size_t take = std::min(options.window, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
        ranked.resize(take);

        std::map<Address, std::map<Address, Amount>> pending;
        std::vector<Adjustment> produced;
        bool mapped_any = false;
        const int depth = static_cast<int>(iteration);

        for (const auto& [_, addr] : ranked) {
            const auto& decision = decide(addr);
            if (decision.is_include()) continue;
            detail::WorkingRow row = std::move(rows[addr]);
            rows.erase(addr);
            if (decision.is_exclude()) {
                add_exclusion(addr, *decision.reason, row.total());
                continue;
            }

            mapped_any = true;
            const ContractInfo& info = *in.contracts.find(addr);
            Split split;
            auto absorb = [&split](Split&& part) {
                for (auto& c : part.credits) split.credits.push_back(std::move(c));
                for (auto& [r, v] : part.exclusions) detail::push_exclusion(split, r, v);
                for (auto& a : part.audit) split.audit.push_back(std::move(a));
            };
            auto unmappable = [&](const Amount& v, const std::string& why) {
                detail::push_exclusion(split, ExclusionReason::UnmappableContract, v);
                split.audit.push_back(why);
            };

            switch (info.kind) {
                case ContractKind::LiquidityPool: {
                    const auto* holders = shares_for(info.share_token);
                    for (const auto& [via, amount] : row.parts) {
                        try {
                            if (!holders) throw EmptyPool(addr.hex());
                            absorb(split_pro_rata(addr, amount, *holders));
                        } catch (const EmptyPool&) {
                            unmappable(amount, "pool " + addr.hex() + " has no share supply");
                        }
                    }
                    break;
                }
                case ContractKind::LendingPool: {
                    const auto* receipts = shares_for(info.share_token);
                    for (const auto& [via, amount] : row.parts) {
                        if (via == self_token) continue;
                        try {
                            if (!receipts) throw EmptyPool(addr.hex());
                            absorb(split_pro_rata(addr, amount, *receipts));
                        } catch (const EmptyPool&) {
                            unmappable(amount, "lending pool " + addr.hex() + " has no receipt supply");
                        }
                    }
                    const auto direct_it = row.parts.find(self_token);
                    const Amount direct = direct_it == row.parts.end() ? Amount{} : direct_it->second;
                    if (lending_settled.count(addr)) {
                        // Loans were mapped earlier; later direct amounts are plain claims.
                        if (!direct.is_zero()) {
                            try {
                                if (!receipts) throw EmptyPool(addr.hex());
                                absorb(split_pro_rata(addr, direct, *receipts));
                            } catch (const EmptyPool&) {
                                unmappable(direct, "lending pool " + addr.hex() + " has no receipt supply");
                            }
                        }
                    } else {
                        lending_settled.insert(addr);
                        const auto blank = detail::empty_ledger(addr, self_token);
                        const auto* ledger = ledger_for(addr, self_token);
                        try {
                            if (!receipts) throw EmptyPool(addr.hex());
                            absorb(split_lending(addr, direct, *receipts, ledger ? *ledger : blank));
                        } catch (const EmptyPool&) {
                            unmappable(direct, "lending pool " + addr.hex() + " has no receipt supply");
                        }
                    }
                    break;
                }
                case ContractKind::Staking:
                case ContractKind::Unique: {
                    const bool staking = info.kind == ContractKind::Staking;
                    const auto remainder = staking ? ExclusionReason::FutureRewards : ExclusionReason::UnmappableContract;
                    for (const auto& [via, amount] : row.parts) {
                        const auto* ledger = ledger_for(addr, via);
                        if (via == self_token) {
                            const auto blank = detail::empty_ledger(addr, via);
                            absorb(split_ledger(addr, amount, ledger ? *ledger : blank, LedgerSplitMode::Direct,
                                                remainder, !staking));
                        } else if (!ledger || (ledger->empty() && ledger->undistributed_reserve.is_zero())) {
                            unmappable(amount, "no positions of " + addr.hex() + " in " + via.hex());
                        } else {
                            absorb(split_ledger(addr, amount, *ledger, LedgerSplitMode::Attributed, remainder, false));
                        }
                    }
                    break;
                }
                case ContractKind::ExcludedContract: break;  // decided as Exclude above
            }

            for (auto& a : split.audit) result.audit.push_back(std::move(a));
            for (const auto& [reason, amount] : split.exclusions) add_exclusion(addr, reason, amount);

            const auto category = classify_contract(info, token.protocol);
            std::map<std::pair<Address, bool>, Amount> merged;
            for (const auto& c : split.credits) {
                if (c.amount.is_zero()) continue;
                merged[{c.beneficiary, c.debt}] += c.amount;
                auto& slot = pending[c.beneficiary][c.via];
                slot += c.amount;
            }
            for (const auto& [key, amount] : merged) {
                if (amount.is_zero()) continue;
                const auto& bdec = decide(key.first);
                if (bdec.is_map()) graph.add(addr, key.first);
                produced.push_back(Adjustment{token, addr, key.first, amount, category, depth, !bdec.is_exclude()});
            }
        }

        for (auto& [addr, parts] : pending) {
            auto& row = rows[addr];
            for (auto& [via, amount] : parts) {
                auto& slot = row.parts[via];
                slot += amount;
                if (slot.is_zero()) row.parts.erase(via);
            }
            if (row.parts.empty() && row.rank_bonus.is_zero()) rows.erase(addr);
        }
        for (auto& a : produced) result.adjustments.push_back(std::move(a));

        if (!mapped_any) {
            result.iterations = iteration;
            converged = true;
            break;
        }
    }
    if (!converged) throw IterationLimitExceeded(options.iteration_cap);

    HolderTable table(token, initial.block());
    table.set_stage(TableStage::Mapped);
    table.record_mint(initial.minted());
    table.record_burn(initial.burned());
    for (const auto& [key, amount] : initial.excluded()) table.add_exclusion(key.address, key.reason, amount);
    for (const auto& [key, amount] : result.exclusions) table.add_exclusion(key.address, key.reason, amount);
    for (const auto& [addr, row] : rows) table.set(addr, row.total());

    const Amount relevant = table.entries_total();
    if (relevant.sign() > 0) {
        const Amount limit = relevant * options.coverage_threshold;
        for (const auto& [addr, amount] : table.entries()) {
            if (amount <= limit) continue;
            if (categorize(addr, in.labels, in.contracts) == Category::UnknownContract)
                throw UnresolvedMajorHolder(addr.hex(), (amount / relevant).to_double());
        }
    }

    std::sort(result.adjustments.begin(), result.adjustments.end(), adjustment_order);
    result.table = std::move(table);
    return result;
}

}  // namespace ownmap
