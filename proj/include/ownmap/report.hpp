#pragma once

// Table rows for ownership concentration and ecosystem integration, their
// CSV/JSON forms, and the long-format per-category wrapping series.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "json_io.hpp"
#include "metrics.hpp"
#include "trend.hpp"

namespace ownmap {

struct ReportOptions {
    GiniPadding gini_padding = GiniPadding::Pad;
    Amount multi_token_threshold = Amount(mpz_class(1), mpz_class(1000));
};

struct ReportRow {
    TokenId token;
    Snapshot snapshot;
    ConcentrationReport concentration;
    IntegrationReport integration;
};

// Concentration columns that get trend and volatility rows.
inline const std::vector<std::string>& concentration_columns() {
    static const std::vector<std::string> cols{"Owner #", "Top 5",  "Top 10",  "Top 50",  "Top 100",
                                               "Top 500", "Top 50%", "Top 99%", "Gini 500"};
    return cols;
}

inline std::vector<double> concentration_values(const ConcentrationReport& c) {
    return {static_cast<double>(c.owner_count),
            c.top_n_share.at(5),
            c.top_n_share.at(10),
            c.top_n_share.at(50),
            c.top_n_share.at(100),
            c.top_n_share.at(500),
            static_cast<double>(c.top_pct_count.at(50)),
            static_cast<double>(c.top_pct_count.at(99)),
            c.gini_500};
}

struct TokenReport {
    TokenId token;
    std::vector<ReportRow> rows;  // by snapshot
    std::optional<std::vector<TrendEntry>> trend;  // per concentration column, trailing 12 snapshots

    bool insufficient_history() const { return !trend.has_value(); }
};

// `records[token]` holds that token's mapping results ordered by snapshot.
inline std::vector<TokenReport> build_report(const std::map<Address, std::vector<MappingRecord>>& records,
                                             const ReportOptions& options = {}) {
    // Mapped tables of every token per snapshot block, for multi-token holdings.
    std::map<std::uint64_t, std::map<Address, HolderTable>> by_block;
    for (const auto& [token, recs] : records)
        for (const auto& r : recs) by_block[r.snapshot.block].emplace(token, r.result.table);

    std::vector<TokenReport> out;
    for (const auto& [token, recs] : records) {
        TokenReport tr;
        if (!recs.empty()) tr.token = recs.front().result.table.token();
        for (const auto& r : recs) {
            ReportRow row;
            row.token = r.result.table.token();
            row.snapshot = r.snapshot;
            row.concentration = concentration_report(r.result.table, options.gini_padding);
            row.integration = integration_report(r.result.table, r.result.adjustments, by_block.at(r.snapshot.block),
                                                 options.multi_token_threshold);
            tr.rows.push_back(std::move(row));
        }
        if (tr.rows.size() >= min_history_points) {
            std::vector<TrendEntry> entries;
            const std::size_t first = tr.rows.size() - min_history_points;
            for (std::size_t col = 0; col < concentration_columns().size(); ++col) {
                std::vector<double> series;
                for (std::size_t i = first; i < tr.rows.size(); ++i)
                    series.push_back(concentration_values(tr.rows[i].concentration)[col]);
                entries.push_back(trend_and_vol(series));
            }
            tr.trend = std::move(entries);
        }
        out.push_back(std::move(tr));
    }
    return out;
}

namespace detail {

inline std::string fixed(double v, int places) { return Amount::from_double(v).to_fixed(places); }

inline std::string pct(double v) { return fixed(v * 100.0, 2) + "%"; }

inline std::string signed_pct(double v) {
    std::string s = fixed(v, 2);
    if (s.front() != '-') s = "+" + s;
    return s + "%";
}

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += csv_cell(cells[i]);
    }
    return line + "\n";
}

inline std::string category_column(AdjustmentCategory c) {
    return "Wrapping Complexity (" + std::string(to_string(c)) + ")";
}

}  // namespace detail

inline const std::string dagger = "\xE2\x80\xA0";

inline std::vector<std::string> report_header() {
    std::vector<std::string> h{"Token", "Row", "Date", "Block"};
    for (const auto& c : concentration_columns()) h.push_back(c);
    h.push_back("Inclusion %");
    h.push_back("Wrapping Complexity");
    for (auto c : all_adjustment_categories) h.push_back(detail::category_column(c));
    for (int n : multi_token_levels) h.push_back("Multi-Token Holdings " + std::to_string(n) + "+");
    h.push_back("Shorted");
    return h;
}

inline std::string token_label(const TokenReport& tr) {
    return tr.token.symbol + (tr.insufficient_history() ? dagger : std::string{});
}

inline std::vector<std::string> snapshot_cells(const TokenReport& tr, const ReportRow& row) {
    std::vector<std::string> cells{token_label(tr), "snapshot", row.snapshot.date, std::to_string(row.snapshot.block)};
    const auto& c = row.concentration;
    cells.push_back(std::to_string(c.owner_count));
    for (auto n : top_n_levels) cells.push_back(detail::pct(c.top_n_share.at(n)));
    cells.push_back(std::to_string(c.top_pct_count.at(50)));
    cells.push_back(std::to_string(c.top_pct_count.at(99)));
    cells.push_back(detail::pct(c.gini_500));
    const auto& i = row.integration;
    cells.push_back(detail::pct(i.inclusion_pct));
    cells.push_back(detail::pct(i.wrapping_complexity));
    for (auto cat : all_adjustment_categories) cells.push_back(detail::pct(i.wrapping_by_category.at(cat)));
    for (int n : multi_token_levels) cells.push_back(std::to_string(i.multi_token.at(n)));
    cells.push_back(detail::pct(i.shorted_pct));
    return cells;
}

inline std::string report_csv(const std::vector<TokenReport>& report) {
    const auto header = report_header();
    std::string out = detail::csv_line(header);
    for (const auto& tr : report) {
        for (const auto& row : tr.rows) out += detail::csv_line(snapshot_cells(tr, row));
        if (!tr.trend) continue;
        const auto& last = tr.rows.back().snapshot;
        std::vector<std::string> trend{token_label(tr), "Trend", last.date, std::to_string(last.block)};
        std::vector<std::string> sigma{token_label(tr), "σ 12m", last.date, std::to_string(last.block)};
        for (const auto& e : *tr.trend) {
            trend.push_back(detail::signed_pct(e.trend_pct_per_month));
            sigma.push_back(detail::fixed(e.sigma_12m, 4));
        }
        trend.resize(header.size());
        sigma.resize(header.size());
        out += detail::csv_line(trend);
        out += detail::csv_line(sigma);
    }
    return out;
}

inline ojson report_json(const std::vector<TokenReport>& report) {
    ojson doc = ojson::array();
    for (const auto& tr : report) {
        ojson t;
        t["token"] = token_to_json(tr.token);
        t["insufficient_history"] = tr.insufficient_history();
        ojson rows = ojson::array();
        for (const auto& row : tr.rows) {
            ojson r;
            r["Date"] = row.snapshot.date;
            r["Block"] = row.snapshot.block;
            const auto vals = concentration_values(row.concentration);
            for (std::size_t k = 0; k < vals.size(); ++k) {
                if (k == 0 || k == 6 || k == 7)
                    r[concentration_columns()[k]] = static_cast<std::uint64_t>(vals[k]);
                else
                    r[concentration_columns()[k]] = vals[k];
            }
            const auto& i = row.integration;
            r["Relevant Supply"] = i.relevant_supply.str();
            r["Inclusion %"] = i.inclusion_pct;
            r["Wrapping Complexity"] = i.wrapping_complexity;
            for (auto c : all_adjustment_categories) r[detail::category_column(c)] = i.wrapping_by_category.at(c);
            ojson mt = ojson::object();
            for (int n : multi_token_levels) mt[std::to_string(n) + "+"] = i.multi_token.at(n);
            r["Multi-Token Holdings"] = std::move(mt);
            r["Shorted"] = i.shorted_pct;
            rows.push_back(std::move(r));
        }
        t["rows"] = std::move(rows);
        if (tr.trend) {
            ojson trend = ojson::object();
            ojson sigma = ojson::object();
            for (std::size_t k = 0; k < tr.trend->size(); ++k) {
                trend[concentration_columns()[k]] = (*tr.trend)[k].trend_pct_per_month;
                sigma[concentration_columns()[k]] = (*tr.trend)[k].sigma_12m;
            }
            t["Trend"] = std::move(trend);
            t["σ 12m"] = std::move(sigma);
        }
        doc.push_back(std::move(t));
    }
    return doc;
}

// Long-format (token, date, category, value) rows of relevant wrapping
// complexity per category; categories with no adjustments are omitted.
inline std::string timeseries_csv(const std::map<Address, std::vector<MappingRecord>>& records) {
    std::string out = detail::csv_line({"token", "date", "category", "value"});
    for (const auto& [token, recs] : records) {
        for (const auto& r : recs) {
            const Amount relevant = relevant_supply(r.result.table);
            const auto wc = wrapping_complexity(r.result.adjustments, relevant);
            for (auto c : all_adjustment_categories) {
                auto it = wc.by_category.find(c);
                if (it == wc.by_category.end() || it->second.is_zero()) continue;
                out += detail::csv_line({r.result.table.token().symbol, r.snapshot.date, std::string(to_string(c)),
                                         it->second.to_fixed(12)});
            }
        }
    }
    return out;
}

}  // namespace ownmap
