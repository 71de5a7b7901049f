#pragma once

// Ownership-concentration and ecosystem-integration statistics over mapped
// holder tables. Everything is computed exactly and converted to double at
// the end, so scale invariance holds bit for bit.

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "types.hpp"

namespace ownmap {

// Sum of all included net balances; debts count negatively.
inline Amount relevant_supply(const HolderTable& table) {
    Amount s = table.entries_total();
    if (s.sign() <= 0) throw NonPositiveSupply();
    return s;
}

// Positive balances in ranking order (amount desc, address asc).
inline std::vector<std::pair<Address, Amount>> ranked_holders(const HolderTable& table) {
    std::vector<std::pair<Address, Amount>> out;
    for (const auto& [a, v] : table.entries())
        if (v.sign() > 0) out.emplace_back(a, v);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return out;
}

inline std::size_t owner_count(const HolderTable& table) {
    std::size_t n = 0;
    for (const auto& [_, v] : table.entries())
        if (v.sign() > 0) ++n;
    return n;
}

inline Amount top_n_share_exact(const HolderTable& table, std::size_t n) {
    if (n == 0) throw std::invalid_argument("top_n_share needs n >= 1");
    const Amount supply = relevant_supply(table);
    const auto ranked = ranked_holders(table);
    Amount sum;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) sum += ranked[i].second;
    return sum / supply;
}

inline double top_n_share(const HolderTable& table, std::size_t n) { return top_n_share_exact(table, n).to_double(); }

// Smallest k such that the top k holders own at least `p` of relevant supply.
inline std::size_t top_pct_count(const HolderTable& table, const Amount& p) {
    if (p.sign() <= 0 || p >= Amount(1)) throw std::invalid_argument("top_pct_count needs 0 < p < 1");
    const Amount target = relevant_supply(table) * p;
    const auto ranked = ranked_holders(table);
    Amount sum;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        sum += ranked[k].second;
        if (sum >= target) return k + 1;
    }
    return ranked.size();
}

enum class GiniPadding {
    Pad,       // fewer than 500 holders are padded with zero balances
    Restrict,  // use only the holders that exist
};

// G = sum_i sum_j |x_i - x_j| / (2 n^2 mean(x)), in closed form over the
// ascending order: sum_i (2i - n - 1) x_i / (n * sum x).
inline Amount gini_exact(std::vector<Amount> values, std::size_t n) {
    if (n == 0 || values.empty()) return Amount{};
    std::sort(values.begin(), values.end());
    const std::size_t pad = n > values.size() ? n - values.size() : 0;
    Amount weighted;
    Amount total;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const long long i = static_cast<long long>(pad + k + 1);
        weighted += values[k] * Amount(2 * i - static_cast<long long>(n) - 1);
        total += values[k];
    }
    if (total.is_zero()) return Amount{};
    return weighted / (Amount(static_cast<long long>(n)) * total);
}

inline double gini_500(const HolderTable& table, GiniPadding padding = GiniPadding::Pad) {
    constexpr std::size_t cohort = 500;
    const auto ranked = ranked_holders(table);
    std::vector<Amount> top;
    for (std::size_t i = 0; i < std::min(cohort, ranked.size()); ++i) top.push_back(ranked[i].second);
    const std::size_t n = padding == GiniPadding::Pad ? cohort : top.size();
    return gini_exact(std::move(top), n).to_double();
}

inline double inclusion_pct(const Amount& relevant, const Amount& total_supply, const Amount& burned) {
    if (total_supply <= burned) throw std::invalid_argument("total supply must exceed burned supply");
    return (relevant / (total_supply - burned)).to_double();
}

struct WrappingComplexity {
    Amount total;
    std::map<AdjustmentCategory, Amount> by_category;

    double total_value() const { return total.to_double(); }
    double category_value(AdjustmentCategory c) const {
        auto it = by_category.find(c);
        return it == by_category.end() ? 0.0 : it->second.to_double();
    }
};

// sum |omega_i| / S over adjustments whose beneficiary is not excluded.
inline WrappingComplexity wrapping_complexity(std::span<const Adjustment> adjustments, const Amount& relevant) {
    if (relevant.sign() <= 0) throw NonPositiveSupply();
    std::map<AdjustmentCategory, Amount> sums;
    for (const auto& a : adjustments)
        if (a.relevant) sums[a.category] += a.amount.abs();
    WrappingComplexity out;
    for (const auto& [c, v] : sums) {
        out.by_category[c] = v / relevant;
        out.total += out.by_category[c];
    }
    return out;
}

inline Amount shorted_exact(const HolderTable& table) {
    const Amount supply = relevant_supply(table);
    Amount shorts;
    for (const auto& [_, v] : table.entries())
        if (v.sign() < 0) shorts -= v;
    return shorts / supply;
}

inline double shorted_pct(const HolderTable& table) { return shorted_exact(table).to_double(); }

inline constexpr std::array<int, 4> multi_token_levels{1, 2, 3, 4};

// For n in 1..4: addresses holding at least `threshold` of the focus token's
// relevant supply and at least `threshold` of n or more other tokens.
inline std::map<int, std::size_t> multi_token_holdings(const std::map<Address, HolderTable>& tables,
                                                       const Address& focus,
                                                       const Amount& threshold = Amount(mpz_class(1), mpz_class(1000))) {
    std::map<int, std::size_t> counts;
    for (int n : multi_token_levels) counts[n] = 0;
    auto focus_it = tables.find(focus);
    if (focus_it == tables.end() || tables.size() < 2) return counts;

    auto qualifiers = [&threshold](const HolderTable& t) {
        std::vector<Address> out;
        const Amount s = t.entries_total();
        if (s.sign() <= 0) return out;
        const Amount limit = s * threshold;
        for (const auto& [a, v] : t.entries())
            if (v.sign() > 0 && v >= limit) out.push_back(a);
        return out;  // sorted: map order
    };

    const auto focus_set = qualifiers(focus_it->second);
    std::map<Address, int> others;
    for (const auto& a : focus_set) others[a] = 0;
    for (const auto& [token, table] : tables) {
        if (token == focus) continue;
        for (const auto& a : qualifiers(table))
            if (auto it = others.find(a); it != others.end()) ++it->second;
    }
    for (const auto& [_, k] : others)
        for (int n : multi_token_levels)
            if (k >= n) ++counts[n];
    return counts;
}

inline constexpr std::array<std::size_t, 5> top_n_levels{5, 10, 50, 100, 500};

struct ConcentrationReport {
    std::size_t owner_count = 0;
    std::map<std::size_t, double> top_n_share;  // n in {5,10,50,100,500}
    std::map<int, std::size_t> top_pct_count;   // p in {50,99}
    double gini_500 = 0.0;

    friend bool operator==(const ConcentrationReport&, const ConcentrationReport&) = default;
};

struct IntegrationReport {
    Amount relevant_supply;
    double inclusion_pct = 0.0;
    double wrapping_complexity = 0.0;
    std::map<AdjustmentCategory, double> wrapping_by_category;
    std::map<int, std::size_t> multi_token;
    double shorted_pct = 0.0;

    friend bool operator==(const IntegrationReport&, const IntegrationReport&) = default;
};

inline ConcentrationReport concentration_report(const HolderTable& table, GiniPadding padding = GiniPadding::Pad) {
    ConcentrationReport r;
    r.owner_count = owner_count(table);
    for (auto n : top_n_levels) r.top_n_share[n] = top_n_share(table, n);
    r.top_pct_count[50] = top_pct_count(table, Amount(mpz_class(1), mpz_class(2)));
    r.top_pct_count[99] = top_pct_count(table, Amount(mpz_class(99), mpz_class(100)));
    r.gini_500 = gini_500(table, padding);
    return r;
}

// Supply destroyed for the inclusion ratio: zero-address burns, burner
// custody and self-mapped (permanently stuck) share tokens.
inline Amount burned_supply(const HolderTable& mapped) {
    Amount b = mapped.burned();
    for (const auto& [key, v] : mapped.excluded())
        if (counts_as_burned(key.reason)) b += v;
    return b;
}

inline IntegrationReport integration_report(const HolderTable& mapped, std::span<const Adjustment> adjustments,
                                            const std::map<Address, HolderTable>& all_tables,
                                            const Amount& threshold = Amount(mpz_class(1), mpz_class(1000))) {
    IntegrationReport r;
    r.relevant_supply = relevant_supply(mapped);
    r.inclusion_pct = inclusion_pct(r.relevant_supply, mapped.minted(), burned_supply(mapped));
    const auto wc = wrapping_complexity(adjustments, r.relevant_supply);
    r.wrapping_complexity = wc.total_value();
    for (auto c : all_adjustment_categories) r.wrapping_by_category[c] = wc.category_value(c);
    r.multi_token = multi_token_holdings(all_tables, mapped.token().address, threshold);
    r.shorted_pct = shorted_pct(mapped);
    return r;
}

}  // namespace ownmap
