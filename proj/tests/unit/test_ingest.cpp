#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include <ownmap/events.hpp>
#include <ownmap/ledger.hpp>
#include <ownmap/registry.hpp>

using namespace ownmap;

namespace {

Address addr(std::uint64_t n) { return Address::from_index(n, 0x01); }
const Address token_a = Address::from_index(1, 0x70);
const Address token_b = Address::from_index(2, 0x70);
const Address pool = Address::from_index(1, 0x30);

LedgerEvent transfer(const Address& token, const Address& from, const Address& to, long amount, std::uint64_t block,
                     std::uint64_t log = 0) {
    LedgerEvent ev;
    ev.kind = EventKind::Transfer;
    ev.token = token;
    ev.from = from;
    ev.to = to;
    ev.amount = amount;
    ev.block = block;
    ev.log_index = log;
    return ev;
}

LedgerEvent position(EventKind kind, const Address& token, const Address& owner, long amount, std::uint64_t block,
                     std::uint64_t log = 0) {
    LedgerEvent ev;
    ev.kind = kind;
    ev.token = token;
    ev.contract = pool;
    ev.owner = owner;
    ev.amount = amount;
    ev.block = block;
    ev.log_index = log;
    return ev;
}

TokenId tok(const Address& a) { return TokenId{a, "T", 18, "p"}; }

// Random valid transfer history over a few tokens: every transfer is funded
// at the point it happens in (block, log) order.
std::vector<LedgerEvent> random_stream(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::map<std::pair<Address, Address>, long> bal;
    std::vector<Address> tokens{token_a, token_b, Address::from_index(3, 0x70)};
    std::vector<LedgerEvent> out;
    std::uint64_t block = 1, log = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng() % 4 == 0) {
            ++block;
            log = 0;
        }
        const auto& t = tokens[rng() % tokens.size()];
        const Address from = addr(rng() % 200 + 1);
        const Address to = addr(rng() % 200 + 1);
        long& have = bal[{t, from}];
        if (have == 0 || rng() % 5 == 0) {
            const long amt = static_cast<long>(rng() % 1'000'000 + 1);
            out.push_back(transfer(t, Address::zero(), from, amt, block, log++));
            have += amt;
            continue;
        }
        const long amt = static_cast<long>(rng() % static_cast<unsigned long>(have) + 1);
        const Address dst = rng() % 50 == 0 ? Address::zero() : to;
        out.push_back(transfer(t, from, dst, amt, block, log++));
        have -= amt;
        if (!dst.is_zero()) bal[{t, dst}] += amt;
    }
    return out;
}

std::string to_jsonl(const std::vector<LedgerEvent>& events) {
    std::ostringstream out;
    write_events(out, events);
    return out.str();
}

}  // namespace

TEST(LoadEvents, EmptyInputGivesEmptyStream) {
    EXPECT_TRUE(parse_events("").empty());
    EXPECT_TRUE(parse_events("\n\n").empty());
    const auto path = std::filesystem::temp_directory_path() / "ownmap_empty_events.jsonl";
    std::ofstream(path).close();
    EXPECT_TRUE(load_events(path.string()).empty());
    std::filesystem::remove(path);
}

TEST(LoadEvents, ReordersByBlock) {
    const auto text = to_jsonl({transfer(token_a, addr(1), addr(2), 5, 9), transfer(token_a, Address::zero(), addr(1), 5, 3)});
    const auto events = parse_events(text);
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[0].block, 3u);
    EXPECT_EQ(events[1].block, 9u);
}

TEST(LoadEvents, ParseErrorsCarryLineNumbers) {
    const std::string ok = event_to_line(transfer(token_a, Address::zero(), addr(1), 5, 1));
    try {
        parse_events(ok + "\n" + ok.substr(0, 10) + "\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_events(R"({"kind":"transfer","token":"0x01","from":"0x0","to":"0x0","amount":"1","block":1,"log_index":0})"),
                 ParseError);
    EXPECT_THROW(parse_events(R"({"kind":"mint","token":")" + token_a.hex() + R"(","amount":"1","block":1,"log_index":0})"),
                 ParseError);
    auto bad_amount = event_to_json(transfer(token_a, Address::zero(), addr(1), 5, 1));
    bad_amount["amount"] = "-5";
    EXPECT_THROW(parse_events(bad_amount.dump()), ParseError);
    auto no_owner = event_to_json(position(EventKind::Stake, token_a, addr(1), 5, 1));
    no_owner.erase("owner");
    EXPECT_THROW(parse_events(no_owner.dump()), ParseError);
}

TEST(LoadEvents, DuplicatePositionRejected) {
    const auto a = transfer(token_a, Address::zero(), addr(1), 5, 4, 2);
    auto b = transfer(token_a, Address::zero(), addr(2), 7, 4, 2);
    EXPECT_THROW(parse_events(to_jsonl({a, b})), DuplicateEvent);
    b.kind = EventKind::Deposit;
    b.contract = pool;
    b.owner = addr(2);
    EXPECT_THROW(parse_events(to_jsonl({a, b})), DuplicateEvent);
}

TEST(LoadEvents, MissingFileIsIoError) { EXPECT_THROW(load_events("/nonexistent/ownmap/events.jsonl"), IoError); }

TEST(LoadEvents, ShuffledStreamGivesIdenticalTables) {
    const auto sorted = random_stream(100'000, 42);
    auto shuffled = sorted;
    std::mt19937_64 rng(9);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const auto a = parse_events(to_jsonl(sorted));
    const auto b = parse_events(to_jsonl(shuffled), 4);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(to_jsonl(a), to_jsonl(b));

    const TokenBook book;
    const Snapshot at{a.back().block, "2020-09-15"};
    EXPECT_EQ(build_holder_tables(a, book, at), build_holder_tables(b, book, at));
}

TEST(LoadEvents, PartitionedParseMatchesSerial) {
    const auto text = to_jsonl(random_stream(20'000, 1));
    EXPECT_EQ(to_jsonl(parse_events(text, 1)), to_jsonl(parse_events(text, 3)));
    EXPECT_EQ(to_jsonl(parse_events(text, 1)), to_jsonl(parse_events(text, 8)));
}

TEST(HolderTable, MintThenTransfer) {
    const std::vector<LedgerEvent> events{transfer(token_a, Address::zero(), addr(1), 100, 1),
                                          transfer(token_a, addr(1), addr(2), 40, 2)};
    const auto t = build_holder_table(events, tok(token_a), {10, ""});
    EXPECT_EQ(t.entries().size(), 2u);
    EXPECT_EQ(t.balance(addr(1)), Amount(60));
    EXPECT_EQ(t.balance(addr(2)), Amount(40));
    EXPECT_EQ(t.minted(), Amount(100));
}

TEST(HolderTable, NoEventsGivesEmptyTable) {
    const auto t = build_holder_table({}, tok(token_a), {10, ""});
    EXPECT_TRUE(t.entries().empty());
    EXPECT_TRUE(t.conserves());
}

TEST(HolderTable, SnapshotStopsAtBlock) {
    const std::vector<LedgerEvent> events{transfer(token_a, Address::zero(), addr(1), 100, 1),
                                          transfer(token_a, addr(1), addr(2), 40, 5)};
    const auto t = build_holder_table(events, tok(token_a), {4, ""});
    EXPECT_EQ(t.balance(addr(1)), Amount(100));
    EXPECT_FALSE(t.contains(addr(2)));
}

TEST(HolderTable, ZeroBalancesAbsentAndBurnsCounted) {
    const std::vector<LedgerEvent> events{transfer(token_a, Address::zero(), addr(1), 100, 1),
                                          transfer(token_a, addr(1), addr(2), 100, 2),
                                          transfer(token_a, addr(2), Address::zero(), 30, 3)};
    const auto t = build_holder_table(events, tok(token_a), {10, ""});
    EXPECT_FALSE(t.contains(addr(1)));
    EXPECT_EQ(t.balance(addr(2)), Amount(70));
    EXPECT_EQ(t.burned(), Amount(30));
    EXPECT_EQ(t.entries_total(), t.minted() - t.burned());
}

TEST(HolderTable, OverdraftIsNegativeBalance) {
    const std::vector<LedgerEvent> events{transfer(token_a, Address::zero(), addr(1), 10, 1),
                                          transfer(token_a, addr(1), addr(2), 11, 7)};
    try {
        build_holder_table(events, tok(token_a), {10, ""});
        FAIL() << "expected NegativeBalance";
    } catch (const NegativeBalance& e) {
        EXPECT_EQ(e.address(), addr(1).hex());
        EXPECT_EQ(e.block(), 7u);
    }
}

// Replays the JSON text with plain maps of decimal strings, without the
// engine's event model.
TEST(HolderTable, MatchesNaiveReplayOracle) {
    const auto events = random_stream(1000, 77);
    const std::string text = to_jsonl(events);
    std::map<std::string, std::map<std::string, mpz_class>> oracle;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const mpz_class amt(j["amount"].get<std::string>(), 10);
        const auto t = j["token"].get<std::string>();
        const auto from = j["from"].get<std::string>();
        const auto to = j["to"].get<std::string>();
        if (from != Address::zero().hex()) oracle[t][from] -= amt;
        if (to != Address::zero().hex()) oracle[t][to] += amt;
    }
    const auto tables = build_holder_tables(parse_events(text), TokenBook{}, {events.back().block, ""});
    for (const auto& [t, holders] : oracle) {
        const auto& table = tables.at(Address::parse(t));
        std::size_t nonzero = 0;
        for (const auto& [a, v] : holders) {
            if (v == 0) continue;
            ++nonzero;
            EXPECT_EQ(table.balance(Address::parse(a)), Amount(v)) << a;
        }
        EXPECT_EQ(table.entries().size(), nonzero);
        EXPECT_TRUE(table.conserves());
    }
}

TEST(HolderTable, ConservesAtEveryPrefix) {
    const auto events = random_stream(3000, 5);
    for (std::uint64_t b = 1; b <= events.back().block; b += 37)
        for (const auto& [_, t] : build_holder_tables(events, TokenBook{}, {b, ""})) EXPECT_TRUE(t.conserves());
}

TEST(PositionLedger, StakesAndAccrual) {
    const std::vector<LedgerEvent> events{
        position(EventKind::Stake, token_a, addr(1), 400, 1), position(EventKind::Stake, token_a, addr(2), 200, 2),
        position(EventKind::RewardAccrued, token_a, addr(1), 10, 3)};
    const auto l = build_position_ledger(events, pool, token_a, {10, ""});
    EXPECT_EQ(l.stakes, (std::map<Address, Amount>{{addr(1), Amount(400)}, {addr(2), Amount(200)}}));
    EXPECT_EQ(l.accrued_rewards, (std::map<Address, Amount>{{addr(1), Amount(10)}}));
    EXPECT_TRUE(l.debts.empty());
}

TEST(PositionLedger, StakeThenUnstakeIsEmpty) {
    const std::vector<LedgerEvent> events{position(EventKind::Stake, token_a, addr(1), 100, 1),
                                          position(EventKind::Unstake, token_a, addr(1), 100, 2)};
    EXPECT_TRUE(build_position_ledger(events, pool, token_a, {10, ""}).stakes.empty());
}

TEST(PositionLedger, OverdrawnPositionsThrow) {
    EXPECT_THROW(build_position_ledger(std::vector{position(EventKind::Stake, token_a, addr(1), 5, 1),
                                                   position(EventKind::Unstake, token_a, addr(1), 6, 2)},
                                       pool, token_a, {10, ""}),
                 NegativePosition);
    EXPECT_THROW(build_position_ledger(std::vector{position(EventKind::Repay, token_a, addr(1), 1, 1)}, pool, token_a,
                                       {10, ""}),
                 NegativePosition);
    EXPECT_THROW(build_position_ledger(std::vector{position(EventKind::RewardAccrued, token_a, addr(1), 3, 1),
                                                   position(EventKind::RewardPaid, token_a, addr(1), 4, 2)},
                                       pool, token_a, {10, ""}),
                 NegativePosition);
}

TEST(PositionLedger, ReserveFromBalance) {
    const std::vector<LedgerEvent> events{
        transfer(token_a, Address::zero(), pool, 1000, 1, 0),  // reward budget
        transfer(token_a, Address::zero(), addr(1), 300, 1, 1),
        transfer(token_a, addr(1), pool, 300, 2, 0),
        position(EventKind::Stake, token_a, addr(1), 300, 2, 1),
        position(EventKind::RewardAccrued, token_a, addr(1), 50, 3, 0),
    };
    const auto l = build_position_ledger(events, pool, token_a, {10, ""});
    EXPECT_EQ(l.balance, Amount(1300));
    EXPECT_EQ(l.undistributed_reserve, Amount(950));
    EXPECT_TRUE(l.audit.empty());
}

TEST(PositionLedger, NegativeReserveIsClampedWithAudit) {
    const std::vector<LedgerEvent> events{position(EventKind::Stake, token_a, addr(1), 300, 2)};
    const auto l = build_position_ledger(events, pool, token_a, {10, ""});
    EXPECT_EQ(l.undistributed_reserve, Amount(0));
    ASSERT_EQ(l.audit.size(), 1u);
}

TEST(PositionLedger, LendingDebtsTracked) {
    const std::vector<LedgerEvent> events{
        position(EventKind::Deposit, token_a, addr(1), 100, 1), position(EventKind::Borrow, token_a, addr(2), 60, 2),
        position(EventKind::Repay, token_a, addr(2), 20, 3), position(EventKind::Withdraw, token_a, addr(1), 10, 4)};
    const auto l = build_position_ledger(events, pool, token_a, {10, ""});
    EXPECT_EQ(l.stakes.at(addr(1)), Amount(90));
    EXPECT_EQ(l.debts.at(addr(2)), Amount(40));
}

TEST(PositionLedger, MigrationMovesPositions) {
    LedgerEvent migrate;
    migrate.kind = EventKind::Migrate;
    migrate.token = token_a;
    migrate.contract = pool;
    migrate.to = token_b;
    migrate.amount = 0;
    migrate.block = 5;
    const std::vector<LedgerEvent> events{position(EventKind::Stake, token_a, addr(1), 70, 1), migrate,
                                          position(EventKind::Stake, token_b, addr(2), 30, 6)};
    const auto before = build_position_ledger(events, pool, token_a, {4, ""});
    EXPECT_EQ(before.stakes.at(addr(1)), Amount(70));
    const auto old_token = build_position_ledger(events, pool, token_a, {10, ""});
    EXPECT_TRUE(old_token.stakes.empty());
    const auto new_token = build_position_ledger(events, pool, token_b, {10, ""});
    EXPECT_EQ(new_token.stakes, (std::map<Address, Amount>{{addr(1), Amount(70)}, {addr(2), Amount(30)}}));
}

TEST(PositionLedger, RandomSequencesMatchReplayOracle) {
    std::mt19937_64 rng(13);
    std::vector<LedgerEvent> events;
    std::map<Address, long> stakes, debts, accrued;
    for (std::uint64_t b = 1; b <= 2000; ++b) {
        const Address who = addr(rng() % 12 + 1);
        const auto pick = rng() % 6;
        auto emit = [&](EventKind k, long amt, std::map<Address, long>& m, long sign) {
            events.push_back(position(k, token_a, who, amt, b));
            m[who] += sign * amt;
        };
        if (pick == 0) emit(EventKind::Stake, static_cast<long>(rng() % 1000 + 1), stakes, 1);
        if (pick == 1 && stakes[who] > 0) emit(EventKind::Unstake, static_cast<long>(rng() % stakes[who] + 1), stakes, -1);
        if (pick == 2) emit(EventKind::Borrow, static_cast<long>(rng() % 1000 + 1), debts, 1);
        if (pick == 3 && debts[who] > 0) emit(EventKind::Repay, static_cast<long>(rng() % debts[who] + 1), debts, -1);
        if (pick == 4) emit(EventKind::RewardAccrued, static_cast<long>(rng() % 100 + 1), accrued, 1);
        if (pick == 5 && accrued[who] > 0) emit(EventKind::RewardPaid, static_cast<long>(rng() % accrued[who] + 1), accrued, -1);
    }
    const auto l = build_position_ledger(events, pool, token_a, {5000, ""});
    auto expect_matches = [](const std::map<Address, Amount>& got, const std::map<Address, long>& want) {
        std::size_t nonzero = 0;
        for (const auto& [a, v] : want) {
            if (v == 0) continue;
            ++nonzero;
            EXPECT_EQ(got.at(a), Amount(static_cast<long long>(v)));
        }
        EXPECT_EQ(got.size(), nonzero);
    };
    expect_matches(l.stakes, stakes);
    expect_matches(l.debts, debts);
    expect_matches(l.accrued_rewards, accrued);
}

TEST(EventIndexTest, GroupsByContract) {
    const std::vector<LedgerEvent> events{transfer(token_a, Address::zero(), pool, 5, 1),
                                          position(EventKind::Stake, token_a, addr(1), 5, 2),
                                          transfer(token_a, addr(3), addr(4), 2, 3)};
    const EventIndex index(events);
    EXPECT_EQ(index.for_contract(pool).size(), 2u);
    EXPECT_EQ(index.for_contract(addr(4)).size(), 1u);
    EXPECT_TRUE(index.for_contract(addr(9)).empty());
}

TEST(Registries, EmptyDocuments) {
    EXPECT_TRUE(parse_labels(nlohmann::json::object()).empty());
    EXPECT_TRUE(parse_contracts(nlohmann::json::object()).empty());
}

TEST(Registries, PoolWithoutShareTokenRejected) {
    const auto doc = nlohmann::json::parse(R"({")" + pool.hex() + R"(": {"kind": "lending_pool", "protocol": "x"}})");
    try {
        parse_contracts(doc);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.address(), pool.hex());
    }
    EXPECT_THROW(parse_contracts(nlohmann::json::parse(R"({")" + pool.hex() + R"(": {"kind": "liquidity_pool"}})")),
                 SchemaError);
}

TEST(Registries, MalformedEntriesRejected) {
    EXPECT_THROW(parse_labels(nlohmann::json::parse(R"({"0x12": {"class": "eoa"}})")), SchemaError);
    EXPECT_THROW(parse_labels(nlohmann::json::parse(R"({")" + pool.hex() + R"(": {"class": "whale"}})")), SchemaError);
    EXPECT_THROW(parse_contracts(nlohmann::json::parse(R"({")" + pool.hex() + R"(": {"kind": "vault"}})")), SchemaError);
    EXPECT_THROW(parse_labels(nlohmann::json::array()), SchemaError);
}

TEST(Registries, RoundTrip) {
    LabelRegistry labels;
    labels.set(addr(1), Label{LabelClass::Cex, {}, "hot wallet"});
    labels.set(addr(2), Label{LabelClass::Multisig, "dao", {}});
    labels.set(pool, Label{LabelClass::Contract, "dex", "pool"});
    ContractRegistry contracts;
    contracts.set(pool, ContractInfo{ContractKind::LiquidityPool, "dex", token_b, {{"variant", "amm"}}});
    contracts.set(Address::from_index(2, 0x30), ContractInfo{ContractKind::Staking, "farm", std::nullopt, {}});
    contracts.set(Address::from_index(3, 0x30), ContractInfo{ContractKind::LendingPool, "lend", token_a, {}});

    EXPECT_EQ(parse_labels(nlohmann::json::parse(labels_to_json(labels).dump())), labels);
    EXPECT_EQ(parse_contracts(nlohmann::json::parse(contracts_to_json(contracts).dump())), contracts);

    const auto dir = std::filesystem::temp_directory_path() / "ownmap_registry_rt";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "labels.json") << labels_to_json(labels).dump(2);
    std::ofstream(dir / "contracts.json") << contracts_to_json(contracts).dump(2);
    const auto [l2, c2] = load_registries((dir / "labels.json").string(), (dir / "contracts.json").string());
    EXPECT_EQ(l2, labels);
    EXPECT_EQ(c2, contracts);
    std::filesystem::remove_all(dir);
}
