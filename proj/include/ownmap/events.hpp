#pragma once

// Normalized ledger events, one JSON object per line:
//
//   {"kind":"transfer","token":"0x..","from":"0x..","to":"0x..","amount":"100","block":7,"log_index":0}
//   {"kind":"stake","token":"0x..","contract":"0x..","owner":"0x..","amount":"40","block":9,"log_index":3}
//
// Amounts are decimal strings of integer raw units. Position events
// (deposit/withdraw/borrow/repay/stake/unstake/reward_*) only update the
// contract's bookkeeping; token movement is always a separate transfer.
// `migrate` moves every position of `contract` in `token` onto token `to`.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "address.hpp"
#include "amount.hpp"
#include "error.hpp"

namespace ownmap {

enum class EventKind { Transfer, Deposit, Withdraw, Borrow, Repay, Stake, Unstake, RewardAccrued, RewardPaid, Migrate };

inline std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Transfer: return "transfer";
        case EventKind::Deposit: return "deposit";
        case EventKind::Withdraw: return "withdraw";
        case EventKind::Borrow: return "borrow";
        case EventKind::Repay: return "repay";
        case EventKind::Stake: return "stake";
        case EventKind::Unstake: return "unstake";
        case EventKind::RewardAccrued: return "reward_accrued";
        case EventKind::RewardPaid: return "reward_paid";
        case EventKind::Migrate: return "migrate";
    }
    return "transfer";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::Transfer, EventKind::Deposit, EventKind::Withdraw, EventKind::Borrow, EventKind::Repay,
                   EventKind::Stake, EventKind::Unstake, EventKind::RewardAccrued, EventKind::RewardPaid,
                   EventKind::Migrate})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct LedgerEvent {
    EventKind kind = EventKind::Transfer;
    Address token;
    std::optional<Address> contract;
    std::optional<Address> from;
    std::optional<Address> to;
    std::optional<Address> owner;
    mpz_class amount;
    std::uint64_t block = 0;
    std::uint64_t log_index = 0;

    bool is_position() const noexcept { return kind != EventKind::Transfer; }

    friend bool operator==(const LedgerEvent&, const LedgerEvent&) = default;
};

inline bool event_order(const LedgerEvent& a, const LedgerEvent& b) {
    if (a.block != b.block) return a.block < b.block;
    return a.log_index < b.log_index;
}

namespace detail {

inline Address require_address(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) throw ParseError(line, std::string("missing address field '") + key + "'");
    try {
        return Address::parse(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
    }
}

inline std::optional<Address> optional_address(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return require_address(obj, key, line);
}

inline std::uint64_t require_uint(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_unsigned())
        throw ParseError(line, std::string("missing non-negative integer '") + key + "'");
    return it->get<std::uint64_t>();
}

}  // namespace detail

inline LedgerEvent parse_event(std::string_view text, std::size_t line) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line, e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "event is not a JSON object");

    LedgerEvent ev;
    auto kind_it = obj.find("kind");
    if (kind_it == obj.end() || !kind_it->is_string()) throw ParseError(line, "missing 'kind'");
    auto kind = parse_event_kind(kind_it->get<std::string>());
    if (!kind) throw ParseError(line, "unknown kind '" + kind_it->get<std::string>() + "'");
    ev.kind = *kind;
    ev.token = detail::require_address(obj, "token", line);
    ev.contract = detail::optional_address(obj, "contract", line);
    ev.from = detail::optional_address(obj, "from", line);
    ev.to = detail::optional_address(obj, "to", line);
    ev.owner = detail::optional_address(obj, "owner", line);

    auto amount_it = obj.find("amount");
    if (amount_it == obj.end() || !amount_it->is_string()) throw ParseError(line, "amount must be a decimal string");
    const auto amount_text = amount_it->get<std::string>();
    if (amount_text.empty() || !std::all_of(amount_text.begin(), amount_text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ParseError(line, "amount must be a non-negative integer string");
    ev.amount = mpz_class(amount_text, 10);
    ev.block = detail::require_uint(obj, "block", line);
    ev.log_index = detail::require_uint(obj, "log_index", line);

    switch (ev.kind) {
        case EventKind::Transfer:
            if (!ev.from || !ev.to) throw ParseError(line, "transfer needs 'from' and 'to'");
            break;
        case EventKind::Migrate:
            if (!ev.contract || !ev.to) throw ParseError(line, "migrate needs 'contract' and 'to'");
            break;
        default:
            if (!ev.contract || !ev.owner) throw ParseError(line, "position event needs 'contract' and 'owner'");
            break;
    }
    return ev;
}

inline nlohmann::ordered_json event_to_json(const LedgerEvent& ev) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(ev.kind));
    j["token"] = ev.token.hex();
    if (ev.contract) j["contract"] = ev.contract->hex();
    if (ev.from) j["from"] = ev.from->hex();
    if (ev.to) j["to"] = ev.to->hex();
    if (ev.owner) j["owner"] = ev.owner->hex();
    j["amount"] = ev.amount.get_str(10);
    j["block"] = ev.block;
    j["log_index"] = ev.log_index;
    return j;
}

inline std::string event_to_line(const LedgerEvent& ev) { return event_to_json(ev).dump(); }

// Sorts by (block, log_index) and rejects any repeated position.
inline void canonicalize_events(std::vector<LedgerEvent>& events) {
    std::stable_sort(events.begin(), events.end(), event_order);
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].block == events[i - 1].block && events[i].log_index == events[i - 1].log_index)
            throw DuplicateEvent(events[i].block, events[i].log_index);
}

// Parses JSON Lines text. With workers > 1 the lines are split into
// contiguous partitions parsed concurrently; the merged result is re-sorted
// so it does not depend on the partitioning.
inline std::vector<LedgerEvent> parse_events(std::string_view text, unsigned workers = 1) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) lines.emplace_back(line_no, line);
        pos = end + 1;
    }

    auto parse_range = [&lines](std::size_t begin, std::size_t end) {
        std::vector<LedgerEvent> out;
        out.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) out.push_back(parse_event(lines[i].second, lines[i].first));
        return out;
    };

    std::vector<LedgerEvent> events;
    workers = std::max(1u, workers);
    if (workers == 1 || lines.size() < 4096) {
        events = parse_range(0, lines.size());
    } else {
        const std::size_t chunk = (lines.size() + workers - 1) / workers;
        std::vector<std::future<std::vector<LedgerEvent>>> parts;
        for (std::size_t b = 0; b < lines.size(); b += chunk)
            parts.push_back(std::async(std::launch::async, parse_range, b, std::min(lines.size(), b + chunk)));
        for (auto& part : parts) {
            auto chunk_events = part.get();
            events.insert(events.end(), std::make_move_iterator(chunk_events.begin()),
                          std::make_move_iterator(chunk_events.end()));
        }
    }
    canonicalize_events(events);
    return events;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<LedgerEvent> load_events(const std::string& path, unsigned workers = 1) {
    return parse_events(read_file(path), workers);
}

inline void write_events(std::ostream& out, std::span<const LedgerEvent> events) {
    for (const auto& ev : events) out << event_to_line(ev) << '\n';
}

// Events grouped by the contract they concern: position events by
// `contract`, transfers by both endpoints. Keeps per-contract ledger
// reconstruction from rescanning the whole stream.
class EventIndex {
public:
    explicit EventIndex(std::span<const LedgerEvent> events) : events_(events) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& ev = events[i];
            if (ev.kind == EventKind::Transfer) {
                by_contract_[*ev.from].push_back(i);
                if (*ev.to != *ev.from) by_contract_[*ev.to].push_back(i);
            } else {
                by_contract_[*ev.contract].push_back(i);
            }
        }
    }

    std::span<const LedgerEvent> all() const noexcept { return events_; }

    std::vector<LedgerEvent> for_contract(const Address& contract) const {
        std::vector<LedgerEvent> out;
        auto it = by_contract_.find(contract);
        if (it == by_contract_.end()) return out;
        out.reserve(it->second.size());
        for (auto i : it->second) out.push_back(events_[i]);
        return out;
    }

private:
    std::span<const LedgerEvent> events_;
    std::unordered_map<Address, std::vector<std::size_t>> by_contract_;
};

}  // namespace ownmap
