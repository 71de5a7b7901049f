#pragma once

/**
 * Synthetic token ecosystems with known beneficial ownership.
 *
 * The generator plays the role of every token and custodial contract: it
 * emits the same normalized events a chain extractor would, and records who
 * owns what while doing so. Ground truth is never inferred from the event
 * stream. Each wrapper token has a fixed composition (units of underlying
 * per share unit), so a position's underlying claim is simply
 * balance * composition, and the truth for an account is the sum over its
 * wallet balances, staked positions, unclaimed rewards and debts.
 *
 * Layering: base tokens sit at level 0; a contract created at level d takes
 * at least one input token produced at level d-1. Lending pools only lend
 * base tokens, staking contracts issue no share token and therefore end a
 * chain.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "categorize.hpp"
#include "events.hpp"
#include "ledger.hpp"
#include "metrics.hpp"
#include "registry.hpp"
#include "types.hpp"

namespace ownmap::synth {

struct PoolMix {
    double liquidity_pool = 0.35;
    double lending_pool = 0.25;
    double staking = 0.25;
    double wrapper = 0.15;
};

struct ExclusionMix {
    double cex = 0.5;
    double burner = 0.25;
    double ftia = 0.25;
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    std::size_t n_eoas = 100;
    std::size_t n_tokens = 2;
    int max_depth = 2;
    PoolMix pool_mix;
    ExclusionMix exclusion_mix;
    std::size_t snapshots = 1;
    bool unique_contract = true;
    // Adds an unregistered bytecode account holding this fraction of the
    // first token's relevant supply (coverage-assertion scenarios).
    std::optional<double> unknown_contract_share;
    // Mapper window the scenario must fit: every custodial claim ranks inside it.
    std::size_t window = 1000;

    void validate() const {
        const double pools = pool_mix.liquidity_pool + pool_mix.lending_pool + pool_mix.staking + pool_mix.wrapper;
        const double excl = exclusion_mix.cex + exclusion_mix.burner + exclusion_mix.ftia;
        if (std::abs(pools - 1.0) > 1e-9) throw std::invalid_argument("pool_mix must sum to 1");
        if (std::abs(excl - 1.0) > 1e-9) throw std::invalid_argument("exclusion_mix must sum to 1");
        for (double p : {pool_mix.liquidity_pool, pool_mix.lending_pool, pool_mix.staking, pool_mix.wrapper,
                         exclusion_mix.cex, exclusion_mix.burner, exclusion_mix.ftia})
            if (p < 0) throw std::invalid_argument("probabilities must be non-negative");
        if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
        if (n_tokens < 1 || n_eoas < 1) throw std::invalid_argument("need at least one token and one account");
        if (snapshots < 1) throw std::invalid_argument("need at least one snapshot");
    }
};

struct TokenTruth {
    std::map<Address, Amount> owners;
    std::map<ExclusionKey, Amount> exclusions;
    std::map<AdjustmentCategory, Amount> expected_adjustments;  // sum |omega| per category
    Amount minted;
    Amount burned;  // through the zero address

    friend bool operator==(const TokenTruth&, const TokenTruth&) = default;
};

struct GroundTruth {
    std::map<Address, TokenTruth> tokens;  // base tokens only

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Scenario {
    ScenarioSpec spec;
    std::vector<TokenId> tokens;        // base tokens, analysed
    std::vector<TokenId> share_tokens;  // LP, receipt and wrapper tokens
    std::vector<LedgerEvent> events;
    LabelRegistry labels;
    ContractRegistry contracts;
    std::vector<Snapshot> snapshots;
    GroundTruth truth;  // at the last snapshot
    std::size_t max_layer = 0;  // deepest level actually built
    std::size_t attempts = 1;   // draws needed to fit the window
};

namespace detail {

// Deterministic helpers over mt19937_64, whose output sequence is fixed by
// the standard (distribution objects are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t next() { return eng_(); }
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {  // inclusive
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return eng_();
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do x = eng_();
        while (x >= limit);
        return lo + x % span;
    }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[uniform(0, v.size() - 1)]; }
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform(0, i - 1)]);
    }

private:
    std::mt19937_64 eng_;
};

inline mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

enum class Role { Eoa, Multisig, Cex, Burner, Ftia, Escrow, Pool, Lending, Staking, Unique, Unknown };

struct PoolState {
    Address address;
    Address share;
    std::vector<std::pair<Address, mpz_class>> inputs;  // token, weight numerator
    mpz_class denom = 1;                                // weights are numerator / denom per share unit
    bool wrapper = false;
};

struct LendingState {
    Address address;
    Address token;
    Address receipt;
    std::map<Address, mpz_class> debts;
};

struct StakingState {
    Address address;
    Address stake_token;
    Address reward_token;
    std::map<Address, mpz_class> stakes;
    std::map<Address, mpz_class> accrued;
    mpz_class funded;
    mpz_class accrued_total;
};

struct UniqueState {
    Address address;
    Address token;
    std::map<Address, mpz_class> locks;
};

class Simulator {
public:
    Simulator(const ScenarioSpec& spec, std::uint64_t stream) : spec_(spec), rng_(stream) {}

    std::optional<Scenario> run() {
        spec_.validate();
        make_tokens();
        make_accounts();
        mint_initial();
        make_exclusions();
        if (spec_.unique_contract) make_unique();
        build_layers();
        churn();
        if (!fits_window()) return std::nullopt;
        if (spec_.unknown_contract_share) add_unknown_contract(*spec_.unknown_contract_share);
        return finish();
    }

private:
    // -- event emission ---------------------------------------------------
    void begin_block() {
        ++block_;
        log_ = 0;
    }

    void emit(LedgerEvent ev) {
        ev.block = block_;
        ev.log_index = log_++;
        events_.push_back(std::move(ev));
    }

    void transfer(const Address& token, const Address& from, const Address& to, const mpz_class& amount) {
        if (amount <= 0) return;
        if (!from.is_zero()) {
            auto& have = bal_[token][from];
            if (have < amount) throw std::logic_error("synth: overdraft");
            have -= amount;
            if (have == 0) bal_[token].erase(from);
        } else {
            minted_[token] += amount;
        }
        if (!to.is_zero())
            bal_[token][to] += amount;
        else
            burned_[token] += amount;
        LedgerEvent ev;
        ev.kind = EventKind::Transfer;
        ev.token = token;
        ev.from = from;
        ev.to = to;
        ev.amount = amount;
        emit(std::move(ev));
    }

    void position(EventKind kind, const Address& contract, const Address& token, const Address& owner,
                  const mpz_class& amount) {
        LedgerEvent ev;
        ev.kind = kind;
        ev.token = token;
        ev.contract = contract;
        ev.owner = owner;
        ev.amount = amount;
        emit(std::move(ev));
    }

    mpz_class balance(const Address& token, const Address& who) const {
        auto t = bal_.find(token);
        if (t == bal_.end()) return 0;
        auto it = t->second.find(who);
        return it == t->second.end() ? mpz_class(0) : it->second;
    }

    Address fresh(std::uint8_t tag) { return Address::from_index(++addr_counter_, tag); }

    mpz_class random_amount() {
        mpz_class base = static_cast<unsigned long>(rng_.uniform(1, 1'000'000));
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, 12);
        mpz_class v = base * scale + static_cast<unsigned long>(rng_.uniform(0, 999'999));
        if (rng_.chance(0.02)) v *= 50;
        return v;
    }

    mpz_class fraction_of(const mpz_class& v, double lo, double hi) {
        const auto permille = static_cast<unsigned long>(lo * 1000 + rng_.unit() * (hi - lo) * 1000);
        return floor_div(v * permille, 1000);
    }

    // -- setup --------------------------------------------------------------
    void make_tokens() {
        for (std::size_t i = 0; i < spec_.n_tokens; ++i) {
            TokenId t;
            t.address = fresh(0x70);
            t.symbol = "TK" + std::to_string(i + 1);
            t.decimals = 18;
            t.protocol = "proto" + std::to_string(i + 1);
            base_.push_back(t);
            comp_[t.address][t.address] = Amount(1);
            level_tokens_[0].push_back(t.address);
        }
    }

    void make_accounts() {
        for (std::size_t i = 0; i < spec_.n_eoas; ++i) {
            const auto a = fresh(0x01);
            eoas_.push_back(a);
            if (rng_.chance(0.05)) {
                role_[a] = Role::Multisig;
                labels_.set(a, Label{LabelClass::Multisig, {}, "multisig wallet"});
            } else {
                role_[a] = Role::Eoa;
                if (rng_.chance(0.1)) labels_.set(a, Label{LabelClass::Eoa, {}, {}});
            }
        }
    }

    void mint_initial() {
        for (const auto& t : base_) {
            begin_block();
            bool any = false;
            for (const auto& a : eoas_) {
                if (!rng_.chance(0.8)) continue;
                transfer(t.address, Address::zero(), a, random_amount());
                any = true;
            }
            if (!any) transfer(t.address, Address::zero(), eoas_.front(), random_amount());
        }
    }

    std::vector<Address> holders_of(const Address& token, bool eoa_only = true) const {
        std::vector<Address> out;
        auto t = bal_.find(token);
        if (t == bal_.end()) return out;
        for (const auto& [a, v] : t->second) {
            if (v <= 0) continue;
            if (eoa_only) {
                auto r = role_.find(a);
                if (r == role_.end() || (r->second != Role::Eoa && r->second != Role::Multisig)) continue;
            }
            out.push_back(a);
        }
        return out;
    }

    void make_exclusions() {
        for (const auto& t : base_) {
            const std::size_t count = rng_.uniform(1, 3);
            for (std::size_t k = 0; k < count; ++k) {
                const double u = rng_.unit();
                const auto& mix = spec_.exclusion_mix;
                begin_block();
                if (u < mix.cex) {
                    const auto cex = fresh(0x40);
                    role_[cex] = Role::Cex;
                    labels_.set(cex, Label{LabelClass::Cex, {}, "exchange hot wallet"});
                    auto holders = holders_of(t.address);
                    rng_.shuffle(holders);
                    holders.resize(std::min<std::size_t>(holders.size(), std::max<std::size_t>(1, holders.size() / 20)));
                    for (const auto& h : holders) transfer(t.address, h, cex, fraction_of(balance(t.address, h), 0.1, 0.5));
                } else if (u < mix.cex + mix.burner) {
                    const auto burner = fresh(0x41);
                    role_[burner] = Role::Burner;
                    labels_.set(burner, Label{LabelClass::Burner, {}, "burn address"});
                    auto holders = holders_of(t.address);
                    for (std::size_t i = 0; i < std::min<std::size_t>(3, holders.size()); ++i) {
                        const auto& h = rng_.pick(holders);
                        transfer(t.address, h, burner, fraction_of(balance(t.address, h), 0.05, 0.2));
                    }
                } else {
                    const auto vest = fresh(0x42);
                    role_[vest] = Role::Ftia;
                    labels_.set(vest, Label{LabelClass::FtiaVesting, {}, "team vesting"});
                    transfer(t.address, Address::zero(), vest, random_amount() * 20);
                }
            }
            if (rng_.chance(0.5)) {
                begin_block();
                const auto escrow = fresh(0x43);
                role_[escrow] = Role::Escrow;
                labels_.set(escrow, Label{LabelClass::Contract, {}, "treasury"});
                ContractInfo info;
                info.kind = ContractKind::ExcludedContract;
                info.protocol = t.protocol;
                if (rng_.chance(0.5)) info.params["exclusion"] = "non_circulating";
                contracts_.set(escrow, info);
                transfer(t.address, Address::zero(), escrow, random_amount() * 10);
            }
            if (rng_.chance(0.5)) {
                begin_block();
                auto holders = holders_of(t.address);
                const auto& h = rng_.pick(holders);
                transfer(t.address, h, Address::zero(), fraction_of(balance(t.address, h), 0.01, 0.1));
            }
        }
    }

    void make_unique() {
        const auto& t = rng_.pick(base_);
        UniqueState u;
        u.address = fresh(0x35);
        u.token = t.address;
        role_[u.address] = Role::Unique;
        labels_.set(u.address, Label{LabelClass::Contract, t.protocol, "vote escrow"});
        contracts_.set(u.address, ContractInfo{ContractKind::Unique, t.protocol, std::nullopt, {}});
        auto holders = holders_of(t.address);
        rng_.shuffle(holders);
        holders.resize(std::min<std::size_t>(holders.size(), rng_.uniform(scaled(10, 40), scaled(80, 8))));
        for (const auto& h : holders) {
            begin_block();
            const auto amt = fraction_of(balance(t.address, h), 0.3, 0.9);
            if (amt <= 0) continue;
            transfer(t.address, h, u.address, amt);
            position(EventKind::Stake, u.address, t.address, h, amt);
            u.locks[h] += amt;
        }
        if (!holders.empty()) {
            begin_block();
            const auto& h = rng_.pick(holders);
            transfer(t.address, h, u.address, fraction_of(balance(t.address, h), 0.05, 0.2));
        }
        uniques_.push_back(std::move(u));
    }

    // -- contracts ------------------------------------------------------------
    enum class Kind { LiquidityPool, Lending, Staking, Wrapper };

    Kind sample_kind(bool base_only_allowed) {
        for (;;) {
            const double u = rng_.unit();
            const auto& m = spec_.pool_mix;
            Kind k = u < m.liquidity_pool                       ? Kind::LiquidityPool
                     : u < m.liquidity_pool + m.lending_pool     ? Kind::Lending
                     : u < m.liquidity_pool + m.lending_pool + m.staking ? Kind::Staking
                                                                  : Kind::Wrapper;
            if (k == Kind::Lending && !base_only_allowed) {
                if (m.lending_pool >= 1.0) return Kind::Staking;
                continue;
            }
            return k;
        }
    }

    std::string protocol_of(const Address& token) const {
        for (const auto& t : base_)
            if (t.address == token) return t.protocol;
        return "defi";
    }

    void register_share(const Address& share, const std::string& symbol) {
        TokenId t;
        t.address = share;
        t.symbol = symbol;
        t.decimals = 18;
        shares_.push_back(t);
    }

    void build_layers() {
        for (int level = 1; level <= spec_.max_depth; ++level) {
            const auto& prev = level_tokens_[static_cast<std::size_t>(level - 1)];
            if (prev.empty()) break;
            const std::size_t count = rng_.uniform(1, 3);
            bool built = false;
            for (std::size_t c = 0; c < count; ++c) {
                const auto primary = rng_.pick(prev);
                const bool primary_is_base = level == 1;
                Kind kind = sample_kind(primary_is_base);
                bool ok = false;
                switch (kind) {
                    case Kind::LiquidityPool: ok = build_pool(level, primary, false); break;
                    case Kind::Wrapper: ok = build_pool(level, primary, true); break;
                    case Kind::Lending: ok = build_lending(level, primary); break;
                    case Kind::Staking: ok = build_staking(primary); break;
                }
                built = built || ok;
            }
            if (built) max_layer_ = static_cast<std::size_t>(level);
        }
    }

    // Accounts that hold every input token.
    std::vector<Address> candidates(const std::vector<Address>& tokens) const {
        std::vector<Address> out = holders_of(tokens.front());
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            std::vector<Address> next;
            for (const auto& a : out)
                if (balance(tokens[i], a) > 0) next.push_back(a);
            out = std::move(next);
        }
        return out;
    }

    // Participation grows with the population so custodial rows keep ranking
    // inside the mapper's window: at least `floor`, or one in `per` accounts.
    std::size_t scaled(std::size_t floor, std::size_t per) const { return std::max(floor, spec_.n_eoas / per); }

    std::vector<Address> choose_participants(std::vector<Address> cands, std::size_t lo, std::size_t hi) {
        rng_.shuffle(cands);
        cands.resize(std::min<std::size_t>(cands.size(), rng_.uniform(lo, hi)));
        std::sort(cands.begin(), cands.end());
        return cands;
    }

    bool build_pool(int level, const Address& primary, bool wrapper) {
        std::vector<Address> inputs{primary};
        if (!wrapper) {
            std::vector<Address> pool_candidates;
            for (std::size_t l = 0; l < static_cast<std::size_t>(level); ++l)
                for (const auto& t : level_tokens_[l])
                    if (t != primary) pool_candidates.push_back(t);
            if (!pool_candidates.empty()) inputs.push_back(rng_.pick(pool_candidates));
        }
        auto people = choose_participants(candidates(inputs), scaled(20, 40), scaled(200, 6));
        if (people.size() < 3) return false;

        PoolState pool;
        pool.address = fresh(0x30);
        pool.share = fresh(0x71);
        pool.wrapper = wrapper;
        pool.denom = wrapper ? 1 : static_cast<unsigned long>(rng_.pick(std::vector<std::uint64_t>{1, 3, 7}));
        for (const auto& t : inputs)
            pool.inputs.emplace_back(t, wrapper ? mpz_class(1) : mpz_class(static_cast<unsigned long>(rng_.uniform(1, 5))));

        bool deposited = false;
        for (const auto& p : people) {
            // largest q (a multiple of denom) affordable in every input
            mpz_class max_units;
            bool first = true;
            for (const auto& [t, w] : pool.inputs) {
                const mpz_class units = floor_div(balance(t, p) * pool.denom, w);
                if (first || units < max_units) max_units = units;
                first = false;
            }
            mpz_class q = fraction_of(max_units, 0.3, 1.0);
            q = floor_div(q, pool.denom) * pool.denom;
            if (q <= 0) continue;
            begin_block();
            for (const auto& [t, w] : pool.inputs) transfer(t, p, pool.address, floor_div(q * w, pool.denom));
            transfer(pool.share, Address::zero(), p, q);
            deposited = true;
        }
        if (!deposited) return false;

        auto& comp = comp_[pool.share];
        for (const auto& [t, w] : pool.inputs)
            for (const auto& [base, per] : comp_[t]) comp[base] += per * Amount(w, pool.denom);

        role_[pool.address] = Role::Pool;
        const std::string proto = wrapper ? protocol_of(primary) : "dex" + std::to_string(rng_.uniform(1, 3));
        labels_.set(pool.address, Label{LabelClass::Contract, proto, wrapper ? "wrapper" : "amm pool"});
        ContractInfo info{ContractKind::LiquidityPool, proto, pool.share, {}};
        if (wrapper) info.params["variant"] = "wrapper";
        contracts_.set(pool.address, info);
        register_share(pool.share, (wrapper ? "W" : "LP") + std::to_string(pools_.size() + 1));
        level_tokens_[static_cast<std::size_t>(level)].push_back(pool.share);
        pools_.push_back(std::move(pool));
        return true;
    }

    bool build_lending(int level, const Address& token) {
        auto people = choose_participants(holders_of(token), scaled(20, 40), scaled(200, 6));
        if (people.size() < 3) return false;
        LendingState pool;
        pool.address = fresh(0x31);
        pool.token = token;
        pool.receipt = fresh(0x72);
        bool deposited = false;
        for (const auto& p : people) {
            const auto amt = fraction_of(balance(token, p), 0.3, 0.9);
            if (amt <= 0) continue;
            begin_block();
            transfer(token, p, pool.address, amt);
            position(EventKind::Deposit, pool.address, token, p, amt);
            transfer(pool.receipt, Address::zero(), p, amt);
            deposited = true;
        }
        if (!deposited) return false;

        // Borrowers take part of the liquidity; some resell what they borrowed.
        auto borrowers = choose_participants(holders_of(token), 2, 15);
        for (const auto& b : borrowers) {
            const auto liquidity = balance(token, pool.address);
            const auto amt = fraction_of(liquidity, 0.02, 0.12);
            if (amt <= 0) continue;
            begin_block();
            position(EventKind::Borrow, pool.address, token, b, amt);
            transfer(token, pool.address, b, amt);
            pool.debts[b] += amt;
            if (rng_.chance(0.5)) {
                const auto& buyer = rng_.pick(eoas_);
                if (buyer != b) transfer(token, b, buyer, fraction_of(balance(token, b), 0.3, 0.9));
            }
        }
        // Partial repayments and withdrawals.
        for (auto& [b, debt] : pool.debts) {
            if (!rng_.chance(0.3)) continue;
            const mpz_class amt = std::min(fraction_of(debt, 0.1, 0.5), balance(token, b));
            if (amt <= 0) continue;
            begin_block();
            position(EventKind::Repay, pool.address, token, b, amt);
            transfer(token, b, pool.address, amt);
            debt -= amt;
        }
        for (const auto& p : people) {
            if (!rng_.chance(0.2)) continue;
            const mpz_class amt = std::min(fraction_of(balance(pool.receipt, p), 0.1, 0.5), balance(token, pool.address));
            if (amt <= 0) continue;
            begin_block();
            position(EventKind::Withdraw, pool.address, token, p, amt);
            transfer(pool.receipt, p, Address::zero(), amt);
            transfer(token, pool.address, p, amt);
        }
        for (auto it = pool.debts.begin(); it != pool.debts.end();)
            it = it->second == 0 ? pool.debts.erase(it) : std::next(it);

        comp_[pool.receipt] = comp_[token];
        role_[pool.address] = Role::Lending;
        const std::string proto = "lend" + std::to_string(rng_.uniform(1, 2));
        labels_.set(pool.address, Label{LabelClass::Contract, proto, "lending market"});
        contracts_.set(pool.address, ContractInfo{ContractKind::LendingPool, proto, pool.receipt, {}});
        register_share(pool.receipt, "c" + std::to_string(lendings_.size() + 1));
        level_tokens_[static_cast<std::size_t>(level)].push_back(pool.receipt);
        lendings_.push_back(std::move(pool));
        return true;
    }

    bool build_staking(const Address& stake_token) {
        auto people = choose_participants(holders_of(stake_token), scaled(10, 40), scaled(150, 6));
        if (people.empty()) return false;
        StakingState s;
        s.address = fresh(0x32);
        s.stake_token = stake_token;
        s.reward_token = rng_.pick(base_).address;
        const std::string proto = rng_.chance(0.5) ? protocol_of(s.reward_token) : "farm" + std::to_string(rng_.uniform(1, 3));

        begin_block();
        s.funded = random_amount() * 30;
        transfer(s.reward_token, Address::zero(), s.address, s.funded);

        bool staked = false;
        for (const auto& p : people) {
            const auto amt = fraction_of(balance(stake_token, p), 0.3, 1.0);
            if (amt <= 0) continue;
            begin_block();
            transfer(stake_token, p, s.address, amt);
            position(EventKind::Stake, s.address, stake_token, p, amt);
            s.stakes[p] += amt;
            staked = true;
        }
        if (!staked) return false;

        // Rewards accrue from the funded reserve; some are paid out, some stakes are withdrawn.
        begin_block();
        for (const auto& [p, _] : s.stakes) {
            const auto cap = s.funded - s.accrued_total;
            const auto amt = floor_div(cap, 40 + static_cast<unsigned long>(rng_.uniform(0, 40)));
            if (amt <= 0 || !rng_.chance(0.7)) continue;
            position(EventKind::RewardAccrued, s.address, s.reward_token, p, amt);
            s.accrued[p] += amt;
            s.accrued_total += amt;
        }
        for (auto& [p, acc] : s.accrued) {
            if (!rng_.chance(0.3)) continue;
            const auto amt = fraction_of(acc, 0.2, 1.0);
            if (amt <= 0) continue;
            begin_block();
            position(EventKind::RewardPaid, s.address, s.reward_token, p, amt);
            transfer(s.reward_token, s.address, p, amt);
            acc -= amt;
        }
        for (auto& [p, st] : s.stakes) {
            if (!rng_.chance(0.15)) continue;
            const auto amt = fraction_of(st, 0.1, 0.6);
            if (amt <= 0) continue;
            begin_block();
            position(EventKind::Unstake, s.address, stake_token, p, amt);
            transfer(stake_token, s.address, p, amt);
            st -= amt;
        }
        for (auto* m : {&s.stakes, &s.accrued})
            for (auto it = m->begin(); it != m->end();) it = it->second == 0 ? m->erase(it) : std::next(it);

        role_[s.address] = Role::Staking;
        labels_.set(s.address, Label{LabelClass::Contract, proto, "staking rewards"});
        contracts_.set(s.address, ContractInfo{ContractKind::Staking, proto, std::nullopt, {}});
        stakings_.push_back(std::move(s));
        return true;
    }

    // Transfers of share tokens between accounts, redemption of pool shares,
    // and the occasional share token sent to its own pool.
    void churn() {
        for (const auto& pool : pools_) {
            auto holders = holders_of(pool.share);
            for (std::size_t i = 0; i < std::min<std::size_t>(holders.size(), 10); ++i) {
                const auto& from = rng_.pick(holders);
                const auto& to = rng_.pick(eoas_);
                if (from == to) continue;
                begin_block();
                transfer(pool.share, from, to, fraction_of(balance(pool.share, from), 0.1, 0.5));
            }
            if (!holders.empty() && rng_.chance(0.4)) {
                const auto& p = rng_.pick(holders);
                mpz_class q = fraction_of(balance(pool.share, p), 0.1, 0.5);
                q = floor_div(q, pool.denom) * pool.denom;
                if (q > 0) {
                    begin_block();
                    transfer(pool.share, p, Address::zero(), q);
                    for (const auto& [t, w] : pool.inputs) transfer(t, pool.address, p, floor_div(q * w, pool.denom));
                }
            }
            if (!holders.empty() && rng_.chance(0.3)) {
                const auto& p = rng_.pick(holders);
                begin_block();
                transfer(pool.share, p, pool.address, fraction_of(balance(pool.share, p), 0.05, 0.3));
            }
        }
        for (const auto& l : lendings_) {
            auto holders = holders_of(l.receipt);
            for (std::size_t i = 0; i < std::min<std::size_t>(holders.size(), 5); ++i) {
                const auto& from = rng_.pick(holders);
                const auto& to = rng_.pick(eoas_);
                if (from == to) continue;
                begin_block();
                transfer(l.receipt, from, to, fraction_of(balance(l.receipt, from), 0.1, 0.5));
            }
        }
        for (const auto& t : base_) {
            auto holders = holders_of(t.address);
            for (std::size_t i = 0; i < std::min<std::size_t>(holders.size(), 20); ++i) {
                const auto& from = rng_.pick(holders);
                const auto& to = rng_.pick(eoas_);
                if (from == to) continue;
                begin_block();
                transfer(t.address, from, to, fraction_of(balance(t.address, from), 0.05, 0.5));
            }
        }
    }

    // -- truth ------------------------------------------------------------------
    Amount claim(const Address& token, const Address& base) const {
        auto c = comp_.find(token);
        if (c == comp_.end()) return {};
        auto it = c->second.find(base);
        return it == c->second.end() ? Amount{} : it->second;
    }

    static void add_owner(TokenTruth& t, const Address& who, const Amount& v) {
        if (v.is_zero()) return;
        auto& slot = t.owners[who];
        slot += v;
        if (slot.is_zero()) t.owners.erase(who);
    }

    static void add_excl(TokenTruth& t, const Address& who, ExclusionReason r, const Amount& v) {
        if (v.is_zero()) return;
        t.exclusions[ExclusionKey{who, r}] += v;
    }

    static void add_adj(TokenTruth& t, AdjustmentCategory c, const Amount& v) {
        if (v.is_zero()) return;
        t.expected_adjustments[c] += v.abs();
    }

    std::map<Address, const PoolState*> pool_by_share() const {
        std::map<Address, const PoolState*> m;
        for (const auto& p : pools_) m[p.share] = &p;
        return m;
    }

    GroundTruth compute_truth() const {
        GroundTruth truth;
        for (const auto& t : base_) {
            auto& tt = truth.tokens[t.address];
            tt.minted = Amount(minted_.count(t.address) ? minted_.at(t.address) : mpz_class(0));
            tt.burned = Amount(burned_.count(t.address) ? burned_.at(t.address) : mpz_class(0));
        }
        std::map<Address, const PoolState*> pool_share = pool_by_share();
        std::map<Address, const LendingState*> lending_receipt;
        for (const auto& l : lendings_) lending_receipt[l.receipt] = &l;

        // Wallet balances.
        for (const auto& [token, holders] : bal_) {
            for (const auto& [who, raw] : holders) {
                const Amount units(raw);
                auto role_it = role_.find(who);
                const Role role = role_it == role_.end() ? Role::Eoa : role_it->second;
                for (auto& [base, tt] : truth.tokens) {
                    const Amount v = units * claim(token, base);
                    if (v.is_zero()) continue;
                    switch (role) {
                        case Role::Eoa:
                        case Role::Multisig:
                        case Role::Unknown: add_owner(tt, who, v); break;
                        case Role::Cex: add_excl(tt, who, ExclusionReason::CexCustody, v); break;
                        case Role::Burner: add_excl(tt, who, ExclusionReason::Burner, v); break;
                        case Role::Ftia: add_excl(tt, who, ExclusionReason::FtiaVesting, v); break;
                        case Role::Escrow: {
                            const auto* info = contracts_.find(who);
                            add_excl(tt, who,
                                     info->param("exclusion") == "non_circulating" ? ExclusionReason::NonCirculating
                                                                                   : ExclusionReason::UnmappableContract,
                                     v);
                            break;
                        }
                        case Role::Pool: {
                            // Holdings of other tokens back the pool's shares; its own shares are stuck.
                            auto ps = pool_share.find(token);
                            if (ps != pool_share.end() && ps->second->address == who)
                                add_excl(tt, who, ExclusionReason::SelfMappedBurn, v);
                            break;
                        }
                        case Role::Lending: {
                            auto lr = lending_receipt.find(token);
                            if (lr != lending_receipt.end() && lr->second->address == who)
                                add_excl(tt, who, ExclusionReason::SelfMappedBurn, v);
                            break;
                        }
                        case Role::Staking:
                        case Role::Unique: break;  // handled from positions below
                    }
                }
            }
        }

        // Custodial contracts: beneficiaries and the flow of adjustments.
        for (const auto& p : pools_) {
            for (auto& [base, tt] : truth.tokens) {
                const Amount per = claim(p.share, base);
                if (per.is_zero()) continue;
                Amount outside;
                for (const auto& [who, raw] : bal_.count(p.share) ? bal_.at(p.share) : std::map<Address, mpz_class>{})
                    if (who != p.address) outside += Amount(raw);
                add_adj(tt, p.wrapper ? AdjustmentCategory::Other : AdjustmentCategory::AmmLiquidity, outside * per);
            }
        }
        for (const auto& l : lendings_) {
            for (auto& [base, tt] : truth.tokens) {
                const Amount per = claim(l.token, base);
                if (per.is_zero()) continue;
                Amount outside;
                for (const auto& [who, raw] : bal_.count(l.receipt) ? bal_.at(l.receipt) : std::map<Address, mpz_class>{})
                    if (who != l.address) outside += Amount(raw);
                Amount debts;
                for (const auto& [b, d] : l.debts) {
                    add_owner(tt, b, -Amount(d) * per);
                    debts += Amount(d);
                }
                add_adj(tt, AdjustmentCategory::LendingBorrowing, (outside + debts) * per);
            }
        }
        for (const auto& s : stakings_) {
            const auto* info = contracts_.find(s.address);
            for (auto& [base, tt] : truth.tokens) {
                const TokenId& tok = *std::find_if(base_.begin(), base_.end(), [&](const TokenId& x) { return x.address == base; });
                const auto category = classify_contract(*info, tok.protocol);
                Amount flow;
                const Amount per = claim(s.stake_token, base);
                if (!per.is_zero())
                    for (const auto& [o, st] : s.stakes) {
                        add_owner(tt, o, Amount(st) * per);
                        flow += Amount(st) * per;
                    }
                if (s.reward_token == base) {
                    for (const auto& [o, acc] : s.accrued) {
                        add_owner(tt, o, Amount(acc));
                        flow += Amount(acc);
                    }
                    add_excl(tt, s.address, ExclusionReason::FutureRewards, Amount(mpz_class(s.funded - s.accrued_total)));
                }
                add_adj(tt, category, flow);
            }
        }
        for (const auto& u : uniques_) {
            auto& tt = truth.tokens[u.token];
            Amount locked;
            for (const auto& [o, v] : u.locks) {
                add_owner(tt, o, Amount(v));
                locked += Amount(v);
            }
            add_adj(tt, AdjustmentCategory::Other, locked);
            add_excl(tt, u.address, ExclusionReason::UnmappableContract,
                     Amount(balance(u.token, u.address)) - locked);
        }
        for (auto& [_, tt] : truth.tokens)
            for (auto it = tt.exclusions.begin(); it != tt.exclusions.end();)
                it = it->second.is_zero() ? tt.exclusions.erase(it) : std::next(it);
        return truth;
    }

    // Conservative check, from the constructive state only, that the mapper's
    // window sees every custodial claim. A claim travels along chains of
    // custody (X held by C0, C0's share token held by C1, ...); the smallest
    // piece a contract can receive is the flow of a single chain. Every such
    // flow must beat an upper bound on the row of the k-th largest account,
    // with k leaving room for all contract and excluded rows.
    bool fits_window() const {
        const auto truth = compute_truth();
        std::size_t special = 0;
        for (const auto& [_, r] : role_)
            if (r != Role::Eoa && r != Role::Multisig) ++special;
        if (special >= spec_.window) return false;
        const std::size_t k = spec_.window - special;

        std::map<Address, Address> issuer;  // share token -> contract
        for (const auto& p : pools_) issuer[p.share] = p.address;
        for (const auto& l : lendings_) issuer[l.receipt] = l.address;
        std::map<Address, Address> share_of;
        for (const auto& [share, c] : issuer) share_of[c] = share;
        auto is_contract = [this](const Address& a) {
            auto r = role_.find(a);
            return r != role_.end() &&
                   (r->second == Role::Pool || r->second == Role::Lending || r->second == Role::Staking ||
                    r->second == Role::Unique);
        };

        for (const auto& t : base_) {
            const auto& tt = truth.tokens.at(t.address);
            std::map<Address, Amount> upper = tt.owners;
            for (const auto& l : lendings_)
                if (l.token == t.address)
                    for (const auto& [b, d] : l.debts) upper[b] += Amount(d);
            std::vector<Amount> rows;
            for (const auto& [_, v] : upper) rows.push_back(v);
            if (rows.size() < k) continue;
            std::nth_element(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k - 1), rows.end(),
                             std::greater<>());
            const Amount cutoff = rows[k - 1];

            // Depth-first over custody chains starting at direct holdings.
            std::vector<std::pair<Address, Amount>> stack;
            if (auto it = bal_.find(t.address); it != bal_.end())
                for (const auto& [who, raw] : it->second)
                    if (is_contract(who)) stack.emplace_back(who, Amount(raw));
            for (const auto& l : lendings_) {
                if (l.token != t.address) continue;
                Amount debts;
                for (const auto& [_, d] : l.debts) debts += Amount(d);
                if (debts.is_zero()) continue;
                bool found = false;
                for (auto& [who, flow] : stack)
                    if (who == l.address) {
                        flow += debts;
                        found = true;
                    }
                if (!found) stack.emplace_back(l.address, debts);
            }
            while (!stack.empty()) {
                auto [c, flow] = stack.back();
                stack.pop_back();
                if (flow <= cutoff) return false;
                auto sh = share_of.find(c);
                if (sh == share_of.end()) continue;
                auto holders = bal_.find(sh->second);
                if (holders == bal_.end()) continue;
                Amount supply;
                for (const auto& [_, raw] : holders->second) supply += Amount(raw);
                for (const auto& [who, raw] : holders->second)
                    if (who != c && is_contract(who)) stack.emplace_back(who, flow * Amount(raw) / supply);
            }
        }
        return true;
    }

    void add_unknown_contract(double share) {
        const auto& token = base_.front().address;
        const auto truth = compute_truth();
        Amount relevant;
        for (const auto& [_, v] : truth.tokens.at(token).owners) relevant += v;
        // h = p * (S + h)  =>  h = p * S / (1 - p)
        const Amount p = Amount::from_double(share);
        const Amount h = relevant * p / (Amount(1) - p);
        mpz_class raw = floor_div(h.numerator(), h.denominator());
        const auto unknown = fresh(0x50);
        role_[unknown] = Role::Unknown;
        labels_.set(unknown, Label{LabelClass::Contract, {}, "unverified contract"});
        begin_block();
        transfer(token, Address::zero(), unknown, raw);
    }

    Scenario finish() {
        Scenario sc;
        sc.truth = compute_truth();
        sc.spec = spec_;
        sc.tokens = base_;
        sc.share_tokens = shares_;
        sc.events = std::move(events_);
        sc.labels = std::move(labels_);
        sc.contracts = std::move(contracts_);
        sc.max_layer = max_layer_;
        const std::uint64_t last = block_ + 1;
        const std::size_t n = spec_.snapshots;
        for (std::size_t i = 0; i < n; ++i) {
            Snapshot s;
            s.block = n == 1 ? last : 1 + (last - 1) * (i + 1) / n;
            s.date = month_date(i);
            sc.snapshots.push_back(s);
        }
        return sc;
    }

    static std::string month_date(std::size_t i) {
        const std::size_t month0 = 5 + i;  // June 2019, zero-based month
        const std::size_t year = 2019 + month0 / 12;
        const std::size_t month = month0 % 12 + 1;
        return std::to_string(year) + "-" + (month < 10 ? "0" : "") + std::to_string(month) + "-15";
    }

    ScenarioSpec spec_;
    Rng rng_;
    std::uint64_t block_ = 0;
    std::uint64_t log_ = 0;
    std::uint64_t addr_counter_ = 0;
    std::vector<LedgerEvent> events_;
    std::map<Address, std::map<Address, mpz_class>> bal_;
    std::map<Address, mpz_class> minted_;
    std::map<Address, mpz_class> burned_;
    std::map<Address, std::map<Address, Amount>> comp_;  // token -> base -> units per token unit
    std::map<std::size_t, std::vector<Address>> level_tokens_;
    std::vector<TokenId> base_;
    std::vector<TokenId> shares_;
    std::vector<Address> eoas_;
    std::map<Address, Role> role_;
    LabelRegistry labels_;
    ContractRegistry contracts_;
    std::vector<PoolState> pools_;
    std::vector<LendingState> lendings_;
    std::vector<StakingState> stakings_;
    std::vector<UniqueState> uniques_;
    std::size_t max_layer_ = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

inline constexpr std::size_t max_generation_attempts = 64;

// Draws scenarios from streams derived from the seed until one fits the
// mapper window. The result depends only on the spec.
inline Scenario generate(const ScenarioSpec& spec) {
    for (std::size_t attempt = 0; attempt < max_generation_attempts; ++attempt) {
        const std::uint64_t stream = attempt == 0 ? spec.seed : detail::splitmix64(spec.seed + attempt);
        if (auto sc = detail::Simulator(spec, stream).run()) {
            sc->attempts = attempt + 1;
            return std::move(*sc);
        }
    }
    throw std::runtime_error("synth: no draw fits the mapper window; use fewer accounts or a larger window");
}

// Metrics computed straight from ground truth with deliberately plain
// implementations (double-loop Gini, full sorts), as a second opinion on
// the main metric path.
struct OracleMetrics {
    ConcentrationReport concentration;
    IntegrationReport integration;
};

inline Amount oracle_gini(std::vector<Amount> values, std::size_t n) {
    if (n == 0 || values.empty()) return Amount{};
    values.resize(std::max(n, values.size()));  // zero padding
    Amount sum_abs;
    Amount total;
    for (const auto& xi : values) {
        total += xi;
        for (const auto& xj : values) sum_abs += (xi - xj).abs();
    }
    if (total.is_zero()) return Amount{};
    // sum |xi - xj| / (2 n^2 mean) with mean = total / n
    return sum_abs / (Amount(2) * Amount(static_cast<long long>(values.size())) * total);
}

inline OracleMetrics oracle_metrics(const GroundTruth& truth, const Address& token,
                                    GiniPadding padding = GiniPadding::Pad,
                                    const Amount& threshold = Amount(mpz_class(1), mpz_class(1000))) {
    const auto& tt = truth.tokens.at(token);
    OracleMetrics m;
    Amount supply;
    Amount shorts;
    std::vector<Amount> positive;
    for (const auto& [_, v] : tt.owners) {
        supply += v;
        if (v.sign() > 0) positive.push_back(v);
        if (v.sign() < 0) shorts -= v;
    }
    std::sort(positive.begin(), positive.end(), [](const Amount& a, const Amount& b) { return a > b; });

    auto& c = m.concentration;
    c.owner_count = positive.size();
    for (std::size_t n : {5u, 10u, 50u, 100u, 500u}) {
        Amount top;
        for (std::size_t i = 0; i < positive.size() && i < n; ++i) top += positive[i];
        c.top_n_share[n] = (top / supply).to_double();
    }
    for (int pct : {50, 99}) {
        Amount running;
        std::size_t k = 0;
        while (k < positive.size()) {
            running += positive[k++];
            if (running / supply >= Amount(pct) / Amount(100)) break;
        }
        c.top_pct_count[pct] = k;
    }
    std::vector<Amount> cohort(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(500, positive.size())));
    const std::size_t n = padding == GiniPadding::Pad ? 500 : cohort.size();
    c.gini_500 = oracle_gini(std::move(cohort), n).to_double();

    auto& g = m.integration;
    g.relevant_supply = supply;
    Amount burned = tt.burned;
    for (const auto& [k, v] : tt.exclusions)
        if (k.reason == ExclusionReason::Burner || k.reason == ExclusionReason::SelfMappedBurn) burned += v;
    g.inclusion_pct = (supply / (tt.minted - burned)).to_double();
    Amount wrapped;
    for (auto cat : all_adjustment_categories) {
        auto it = tt.expected_adjustments.find(cat);
        const Amount v = it == tt.expected_adjustments.end() ? Amount{} : it->second / supply;
        g.wrapping_by_category[cat] = v.to_double();
        wrapped += v;
    }
    g.wrapping_complexity = wrapped.to_double();
    g.shorted_pct = (shorts / supply).to_double();

    auto big = [&threshold](const TokenTruth& t) {
        std::set<Address> out;
        Amount s;
        for (const auto& [_, v] : t.owners) s += v;
        if (s.sign() <= 0) return out;
        for (const auto& [a, v] : t.owners)
            if (v.sign() > 0 && v / s >= threshold) out.insert(a);
        return out;
    };
    const auto mine = big(tt);
    std::map<Address, int> others;
    for (const auto& [other, ot] : truth.tokens) {
        if (other == token) continue;
        for (const auto& a : big(ot))
            if (mine.count(a)) ++others[a];
    }
    for (int level : {1, 2, 3, 4}) {
        std::size_t count = 0;
        for (const auto& [_, k] : others)
            if (k >= level) ++count;
        g.multi_token[level] = truth.tokens.size() < 2 ? 0 : count;
    }
    return m;
}

}  // namespace ownmap::synth
