// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <ownmap/ownmap.hpp>

using namespace ownmap;

namespace {

constexpr double oracle_runtime_limit_s = 60.0;
constexpr double gini_tolerance = 1e-12;
constexpr double slope_tolerance = 1e-10;
const Amount sushi_tolerance_pp = Amount(mpz_class(1), mpz_class(10));

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
    void check(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
};

const std::filesystem::path data_dir = OWNMAP_TEST_DATA;

struct LoadedFixture {
    RunConfig cfg;
    std::unique_ptr<Engine> engine;
    synth::GroundTruth truth;
};

LoadedFixture load_fixture(const char* name) {
    LoadedFixture f;
    f.cfg = load_config(data_dir / name / "config.json");
    auto [labels, contracts] = load_registries(f.cfg.labels.string(), f.cfg.contracts.string());
    f.engine = std::make_unique<Engine>(load_events(f.cfg.events.string()), std::move(labels), std::move(contracts),
                                        f.cfg.tokens, f.cfg.mapper);
    const auto truth_path = data_dir / name / "truth.json";
    f.truth = truth_from_json(load_json_file(truth_path.string()), truth_path.string());
    return f;
}

const TokenId& token_by_symbol(const RunConfig& cfg, const std::string& symbol) {
    for (const auto& t : cfg.tokens)
        if (t.symbol == symbol) return t;
    throw std::runtime_error("fixture has no token " + symbol);
}

synth::ScenarioSpec oracle_spec(std::uint64_t i) {
    synth::ScenarioSpec spec;
    spec.seed = 1000 + i;
    // sizes spread log-uniformly from 30 to 10^4 EOAs, with the largest size
    // hit exactly every tenth scenario
    const double u = static_cast<double>((i * 37) % 100) / 99.0;
    spec.n_eoas = i % 10 == 9 ? 10'000 : static_cast<std::size_t>(std::round(std::pow(10.0, 1.5 + 2.5 * u)));
    spec.max_depth = static_cast<int>(i % 6);
    spec.n_tokens = 1 + i % 4;
    spec.snapshots = 1;
    return spec;
}

Outcome oracle_equivalence() {
    Outcome o;
    constexpr std::size_t scenarios = 100;
    std::set<ContractKind> kinds;
    std::size_t largest = 0;
    int deepest = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < scenarios; ++i) {
        const auto spec = oracle_spec(i);
        const auto sc = synth::generate(spec);
        for (const auto& [_, info] : sc.contracts.all()) kinds.insert(info.kind);
        largest = std::max(largest, spec.n_eoas);
        deepest = std::max(deepest, static_cast<int>(sc.max_layer));
        Engine engine(sc.events, sc.labels, sc.contracts, sc.tokens, {});
        for (const auto& t : sc.tokens) {
            const auto diffs = compare_to_truth(engine.map(t.address, sc.snapshots.back()), sc.truth.tokens.at(t.address));
            if (!diffs.empty()) o.fail("seed " + std::to_string(spec.seed) + ": " + diffs.front());
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto k : {ContractKind::LiquidityPool, ContractKind::LendingPool, ContractKind::Staking, ContractKind::Unique})
        o.check(kinds.count(k) != 0, std::string("no scenario contained a ") + std::string(to_string(k)));
    o.check(elapsed < oracle_runtime_limit_s, "took " + std::to_string(elapsed) + " s");
    std::ostringstream d;
    d << scenarios << " scenarios, up to " << largest << " EOAs, depth up to " << deepest << ", " << std::fixed;
    d.precision(1);
    d << elapsed << " s";
    if (o.pass) o.detail = d.str();
    else o.detail += " (" + d.str() + ")";
    return o;
}

Outcome worked_example() {
    Outcome o;
    auto f = load_fixture("yfi_cream");
    const auto& yfi = token_by_symbol(f.cfg, "YFI");
    const auto r = f.engine->map(yfi.address, f.cfg.snapshots.back());
    o.check(r.max_depth() == 3, "mapping layers = " + std::to_string(r.max_depth()));
    const auto diffs = compare_to_truth(r, f.truth.tokens.at(yfi.address));
    o.check(diffs.empty(), diffs.empty() ? "" : diffs.front());
    // the stakers of the pool share end up owning YFI that only ever sat in
    // the lending pool
    const Address lending = Address::parse("0x00000000000000000000000000000000000000a1");
    const Address pool = Address::parse("0x00000000000000000000000000000000000000b1");
    const Address staking = Address::parse("0x000000000000000000000000000000000000005a");
    for (const auto& a : {lending, pool, staking}) o.check(!r.table.contains(a), a.hex() + " still holds YFI");
    bool staker_credit = false;
    for (const auto& adj : r.adjustments) staker_credit |= adj.source == staking && adj.depth == 3 && adj.amount.sign() > 0;
    o.check(staker_credit, "no third-layer credit from the staking contract");
    if (o.pass) o.detail = "3 layers, stakers own the underlying";
    return o;
}

Outcome complexity_four() {
    Outcome o;
    auto f = load_fixture("wrap4");
    const auto& x = token_by_symbol(f.cfg, "X");
    const auto r = f.engine->map(x.address, f.cfg.snapshots.back());
    const auto wc = wrapping_complexity(r.adjustments, relevant_supply(r.table));
    o.check(wc.total == Amount(4), "complexity = " + wc.total.str());
    if (o.pass) o.detail = "complexity " + wc.total.to_fixed(3);
    return o;
}

Outcome sushi_anchor() {
    Outcome o;
    const Amount supply(10'000);
    auto adjustments_for = [&](std::array<long, 4> basis_points) {
        const std::array cats{AdjustmentCategory::InternalStaking, AdjustmentCategory::ExternalStaking,
                              AdjustmentCategory::AmmLiquidity, AdjustmentCategory::LendingBorrowing};
        std::vector<Adjustment> adjs;
        for (std::size_t i = 0; i < 4; ++i) {
            Adjustment a;
            a.amount = Amount(basis_points[i]);
            a.category = cats[i];
            adjs.push_back(a);
        }
        return adjs;
    };
    const Amount reported(mpz_class(1099), mpz_class(10));  // percent
    // components exactly as printed
    const auto as_printed = wrapping_complexity(adjustments_for({2820, 4930, 3010, 220}), supply);
    const Amount total_pct = as_printed.total * Amount(100);
    o.check((total_pct - reported).abs() <= sushi_tolerance_pp, "printed components total " + total_pct.to_fixed(2) + "%");
    // unrounded components consistent with the printed one-decimal values
    const auto consistent = wrapping_complexity(adjustments_for({2824, 4934, 3014, 218}), supply);
    for (const auto& [cat, v] : consistent.by_category) {
        const auto shown = (v * Amount(100)).to_fixed(1);
        o.check(shown == "28.2" || shown == "49.3" || shown == "30.1" || shown == "2.2",
                "component renders as " + shown);
    }
    const auto shown_total = detail::pct(consistent.total.to_double());
    o.check(((consistent.total * Amount(100)) - reported).abs() <= sushi_tolerance_pp, "total " + shown_total);
    if (o.pass)
        o.detail = "printed components sum to " + total_pct.to_fixed(1) + "%, rounding-consistent set reports " + shown_total;
    return o;
}

// Plain double loop over the zero-padded vector.
double double_loop_gini(std::vector<double> x, std::size_t n) {
    x.resize(std::max(n, x.size()), 0.0);
    double total = 0.0, sum_abs = 0.0;
    for (double xi : x) {
        total += xi;
        for (double xj : x) sum_abs += std::fabs(xi - xj);
    }
    const double m = static_cast<double>(x.size());
    return sum_abs / (2.0 * m * m * (total / m));
}

Outcome gini_correctness() {
    Outcome o;
    std::mt19937_64 rng(500);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        HolderTable t(TokenId{Address::from_index(1, 0x70), "G", 18, "g"}, 1);
        std::vector<double> values;
        const bool heavy = rep % 2 == 0;
        for (std::uint64_t i = 1; i <= 500; ++i) {
            const long v = heavy ? static_cast<long>(std::pow(10.0, static_cast<double>(rng() % 9000) / 1000.0))
                                 : static_cast<long>(rng() % 1'000'000 + 1);
            t.credit(Address::from_index(i, 0x01), Amount(static_cast<long long>(v)));
            values.push_back(static_cast<double>(v));
        }
        const double err = std::fabs(gini_500(t) - double_loop_gini(values, 500));
        worst = std::max(worst, err);
    }
    o.check(worst <= gini_tolerance, "max deviation " + std::to_string(worst));

    HolderTable equal(TokenId{Address::from_index(1, 0x70), "G", 18, "g"}, 1);
    for (std::uint64_t i = 1; i <= 500; ++i) equal.credit(Address::from_index(i, 0x01), Amount(77));
    HolderTable single(TokenId{Address::from_index(1, 0x70), "G", 18, "g"}, 1);
    single.credit(Address::from_index(1, 0x01), Amount(77));
    o.check(gini_500(equal) == 0.0, "equal balances give " + std::to_string(gini_500(equal)));
    o.check(gini_500(single) == 499.0 / 500.0, "single holder gives " + std::to_string(gini_500(single)));
    if (o.pass) {
        std::ostringstream d;
        d << "1000 vectors, max deviation " << worst << "; degenerate 0 and " << gini_500(single);
        o.detail = d.str();
    }
    return o;
}

Outcome conservation_suite() {
    Outcome o;
    std::size_t runs = 0;
    auto check_engine = [&](Engine& engine, const std::vector<TokenId>& tokens, const Snapshot& at, const std::string& what) {
        for (const auto& t : tokens) {
            ++runs;
            const auto raw = engine.raw_table(t.address, at);
            const auto r = engine.map(t.address, at);
            Amount excluded;
            for (const auto& [_, v] : r.exclusions) excluded += v;
            o.check(raw.entries_total() == r.table.entries_total() + excluded, what + " " + t.symbol + " does not conserve");
            o.check(r.table.conserves(), what + " " + t.symbol + " table does not balance against mints");

            MappingInputs in{engine.labels(), engine.contracts(),
                             [&](const Address& c, const Address& tok) -> const PositionLedger* {
                                 return engine.ledger(c, tok, at);
                             },
                             [&](const Address& tok) -> const HolderTable* {
                                 const auto& tables = engine.raw_tables(at);
                                 auto it = tables.find(tok);
                                 return it == tables.end() ? nullptr : &it->second;
                             }};
            const auto again = run_iterative_mapping(r.table, in, engine.options());
            o.check(again.adjustments.empty(), what + " " + t.symbol + " second run produced adjustments");
            o.check(again.table.entries() == r.table.entries(), what + " " + t.symbol + " second run changed the table");

            const auto first = dump(mapping_to_json(r, at));
            Engine fresh(engine.events(), engine.labels(), engine.contracts(), tokens, engine.options());
            o.check(dump(mapping_to_json(fresh.map(t.address, at), at)) == first, what + " " + t.symbol + " rerun differs");
        }
    };
    for (const char* name : {"yfi_cream", "wrap4"}) {
        auto f = load_fixture(name);
        check_engine(*f.engine, f.cfg.tokens, f.cfg.snapshots.back(), name);
    }
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        synth::ScenarioSpec spec;
        spec.seed = 7000 + seed;
        spec.n_eoas = 100 + seed * 97;
        spec.max_depth = static_cast<int>(seed % 6);
        spec.n_tokens = 1 + seed % 3;
        spec.snapshots = 2;
        const auto sc = synth::generate(spec);
        Engine engine(sc.events, sc.labels, sc.contracts, sc.tokens, {});
        for (const auto& s : sc.snapshots) check_engine(engine, sc.tokens, s, "seed " + std::to_string(spec.seed));
    }
    if (o.pass) o.detail = std::to_string(runs) + " runs conserve exactly, are idempotent and reproducible";
    return o;
}

Outcome coverage_assertion() {
    Outcome o;
    synth::ScenarioSpec spec;
    spec.seed = 77;
    spec.n_eoas = 500;
    spec.n_tokens = 1;
    spec.max_depth = 2;

    spec.unknown_contract_share = 0.002;
    {
        const auto sc = synth::generate(spec);
        Engine engine(sc.events, sc.labels, sc.contracts, sc.tokens, {});
        try {
            engine.map(sc.tokens.front().address, sc.snapshots.back());
            o.fail("0.2% unknown contract was accepted");
        } catch (const UnresolvedMajorHolder& e) {
            o.check(std::fabs(e.share() - 0.002) < 1e-9, "reported share " + std::to_string(e.share()));
        }
    }
    spec.unknown_contract_share = 0.0005;
    {
        const auto sc = synth::generate(spec);
        Engine engine(sc.events, sc.labels, sc.contracts, sc.tokens, {});
        const auto r = engine.map(sc.tokens.front().address, sc.snapshots.back());
        std::optional<Address> unknown;
        for (const auto& [a, label] : sc.labels.all())
            if (label.cls == LabelClass::Contract && !sc.contracts.find(a)) unknown = a;
        o.check(unknown.has_value(), "scenario has no unknown contract");
        if (unknown) {
            o.check(categorize(*unknown, sc.labels, sc.contracts) == Category::UnknownContract, "not categorized unknown");
            o.check(inclusion_decision(categorize(*unknown, sc.labels, sc.contracts)).is_include(), "not included");
            o.check(r.table.contains(*unknown), "0.05% unknown contract missing from the mapped table");
            const double share = (r.table.balance(*unknown) / r.table.entries_total()).to_double();
            o.check(std::fabs(share - 0.0005) < 1e-6, "unknown contract holds " + std::to_string(share));
        }
        const auto diffs = compare_to_truth(r, sc.truth.tokens.at(sc.tokens.front().address));
        o.check(diffs.empty(), diffs.empty() ? "" : diffs.front());
    }
    if (o.pass) o.detail = "0.2% raises UnresolvedMajorHolder, 0.05% is included";
    return o;
}

Outcome metrics_consistency() {
    Outcome o;
    std::mt19937_64 rng(800);
    std::size_t concentrated = 0;
    const Amount half(mpz_class(1), mpz_class(2));
    for (int rep = 0; rep < 1000; ++rep) {
        HolderTable t(TokenId{Address::from_index(1, 0x70), "M", 18, "m"}, 1);
        const int shape = rep % 4;
        const std::size_t n = shape == 3 ? rng() % 20 + 1 : rng() % 800 + 1;
        for (std::uint64_t i = 1; i <= n; ++i) {
            long v = 0;
            if (shape == 0) v = static_cast<long>(rng() % 1000 + 1);
            if (shape == 1) v = static_cast<long>(std::pow(10.0, static_cast<double>(rng() % 12000) / 1000.0)) + 1;
            if (shape == 2) v = static_cast<long>(rng() % 5 + 1);
            if (shape == 3) v = static_cast<long>(rng() % 100 + 1);
            t.credit(Address::from_index(i, 0x01), Amount(static_cast<long long>(v)));
        }
        if (rep % 7 == 0) t.credit(Address::from_index(n + 1, 0x01), Amount(-static_cast<long long>(rng() % 50 + 1)));
        if (t.entries_total().sign() <= 0) continue;
        for (const auto& p : {half, Amount(mpz_class(99), mpz_class(100)), Amount(mpz_class(1), mpz_class(10))}) {
            const auto k = top_pct_count(t, p);
            if (k == 0 || top_n_share_exact(t, k) < p || (k > 1 && top_n_share_exact(t, k - 1) >= p))
                o.fail("top_pct_count not minimal on table " + std::to_string(rep));
        }
        if (top_n_share_exact(t, 5) >= half) {
            ++concentrated;
            o.check(top_pct_count(t, half) <= 5, "top 5 >= 50% but count above 5 on table " + std::to_string(rep));
        }
    }
    // Shaped like the CRV row: top 5 hold 56.92% and two addresses pass half.
    HolderTable crv(TokenId{Address::from_index(2, 0x70), "CRV", 18, "curve"}, 1);
    const std::vector<long> top{30'000, 21'000, 3'000, 1'500, 1'420};
    for (std::size_t i = 0; i < top.size(); ++i) crv.credit(Address::from_index(i + 1, 0x01), Amount(top[i]));
    for (std::uint64_t i = 0; i < 86'160 / 120; ++i) crv.credit(Address::from_index(100 + i, 0x01), Amount(60));
    const auto crv_top5 = detail::pct(top_n_share(crv, 5));
    o.check(crv_top5 == "56.92%", "CRV-like top 5 renders " + crv_top5);
    o.check(top_pct_count(crv, half) == 2, "CRV-like count " + std::to_string(top_pct_count(crv, half)));
    o.check(concentrated > 100, "only " + std::to_string(concentrated) + " concentrated tables");
    if (o.pass)
        o.detail = "1000 tables minimal, " + std::to_string(concentrated) + " with top 5 >= 50% all within 5; CRV pattern " +
                   crv_top5 + " -> 2";
    return o;
}

double normal_equation_slope(const std::vector<double>& y) {
    mpq_class n(static_cast<long>(y.size())), st, stt, sy, sty;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const mpq_class tt(static_cast<long>(t)), yy(y[t]);
        st += tt;
        stt += tt * tt;
        sy += yy;
        sty += tt * yy;
    }
    return mpq_class((n * sty - st * sy) / (n * stt - st * st)).get_d();
}

Outcome trend_check() {
    Outcome o;
    std::mt19937_64 rng(900);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> y(16);
        const double base = static_cast<double>(rng() % 1000) / 10.0;
        for (auto& v : y) v = base + static_cast<double>(rng() % 1'000'000) / 1e4 - 50.0;
        worst = std::max(worst, std::fabs(trend_and_vol(y).slope - normal_equation_slope(y)));
    }
    o.check(worst <= slope_tolerance, "max slope deviation " + std::to_string(worst));
    for (double c : {0.0, 0.5692, 1.0, 1234.5}) {
        const auto e = trend_and_vol(std::vector<double>(16, c));
        o.check(e.trend_pct_per_month == 0.0 && e.sigma_12m == 0.0, "constant series " + std::to_string(c) + " not flat");
    }
    if (o.pass) {
        std::ostringstream d;
        d << "1000 series, max slope deviation " << worst << "; constant series flat";
        o.detail = d.str();
    }
    return o;
}

// A valid random history of transfers and contract positions.
std::vector<LedgerEvent> random_history(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<Address> tokens{Address::from_index(1, 0x70), Address::from_index(2, 0x70),
                                      Address::from_index(3, 0x70)};
    const Address staking = Address::from_index(1, 0x32);
    std::map<std::pair<Address, Address>, long> bal;
    std::map<Address, long> stakes;
    std::vector<LedgerEvent> out;
    std::uint64_t block = 1, log = 0;
    while (out.size() < n) {
        if (rng() % 3 == 0) {
            ++block;
            log = 0;
        }
        LedgerEvent ev;
        ev.block = block;
        ev.log_index = log++;
        const Address who = Address::from_index(rng() % 2000 + 1, 0x01);
        const auto& token = tokens[rng() % tokens.size()];
        ev.token = token;
        long& have = bal[{token, who}];
        const auto pick = rng() % 10;
        if (have == 0 || pick == 0) {
            ev.kind = EventKind::Transfer;
            ev.from = Address::zero();
            ev.to = who;
            const long amt = static_cast<long>(rng() % 1'000'000 + 1);
            ev.amount = amt;
            have += amt;
        } else if (pick == 1 && token == tokens[0]) {
            ev.kind = EventKind::Stake;
            ev.contract = staking;
            ev.owner = who;
            const long amt = static_cast<long>(rng() % 1000 + 1);
            ev.amount = amt;
            stakes[who] += amt;
        } else if (pick == 2 && token == tokens[0] && stakes[who] > 0) {
            ev.kind = EventKind::Unstake;
            ev.contract = staking;
            ev.owner = who;
            const long amt = static_cast<long>(rng() % static_cast<unsigned long>(stakes[who]) + 1);
            ev.amount = amt;
            stakes[who] -= amt;
        } else {
            ev.kind = EventKind::Transfer;
            ev.from = who;
            ev.to = rng() % 40 == 0 ? Address::zero() : Address::from_index(rng() % 2000 + 1, 0x01);
            const long amt = static_cast<long>(rng() % static_cast<unsigned long>(have) + 1);
            ev.amount = amt;
            have -= amt;
            if (!ev.to->is_zero()) bal[{token, *ev.to}] += amt;
        }
        out.push_back(ev);
    }
    return out;
}

Outcome ingestion_order() {
    Outcome o;
    constexpr std::size_t n = 100'000;
    const auto sorted = random_history(n, 1010);
    auto shuffled = sorted;
    std::mt19937_64 rng(2020);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto text = [](const std::vector<LedgerEvent>& evs) {
        std::ostringstream s;
        write_events(s, evs);
        return s.str();
    };
    const auto a = parse_events(text(sorted));
    const auto b = parse_events(text(shuffled), 4);
    o.check(a.size() == n && b.size() == n, "event count differs");
    o.check(text(a) == text(b), "canonical streams differ");
    const TokenBook book;
    const Address staking = Address::from_index(1, 0x32);
    const Address staked_token = Address::from_index(1, 0x70);
    std::size_t compared = 0;
    for (std::uint64_t block : {a.back().block / 4, a.back().block / 2, a.back().block}) {
        const Snapshot at{block, ""};
        const auto ta = build_holder_tables(a, book, at);
        const auto tb = build_holder_tables(b, book, at);
        o.check(ta == tb, "holder tables differ at block " + std::to_string(block));
        compared += ta.size();
        o.check(build_position_ledger(a, staking, staked_token, at) == build_position_ledger(b, staking, staked_token, at),
                "position ledgers differ at block " + std::to_string(block));
    }
    if (o.pass) o.detail = std::to_string(n) + " events, " + std::to_string(compared) + " tables identical";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"worked example (YFI/Cream/CRPT)", worked_example},
        {"wrapping complexity 4", complexity_four},
        {"SUSHI composition", sushi_anchor},
        {"Gini correctness", gini_correctness},
        {"conservation, idempotence, determinism", conservation_suite},
        {"coverage assertion", coverage_assertion},
        {"metrics consistency", metrics_consistency},
        {"trend", trend_check},
        {"ingestion order", ingestion_order},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        if (!o.pass) ++failures;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
