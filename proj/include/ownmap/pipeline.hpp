#pragma once

// Ingest-to-mapping driver shared by the CLI and the tests: holds the
// canonical event stream, builds the holder tables of every token per
// snapshot and serves position ledgers to the mapper on demand.

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "events.hpp"
#include "ledger.hpp"
#include "mapper.hpp"
#include "registry.hpp"

namespace ownmap {

class Engine {
public:
    Engine(std::vector<LedgerEvent> events, LabelRegistry labels, ContractRegistry contracts,
           std::span<const TokenId> tokens, MapperOptions options = {})
        : events_(std::move(events)),
          labels_(std::move(labels)),
          contracts_(std::move(contracts)),
          book_(tokens),
          options_(std::move(options)) {
        canonicalize_events(events_);
        index_ = std::make_unique<EventIndex>(events_);
    }

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const std::vector<LedgerEvent>& events() const noexcept { return events_; }
    const LabelRegistry& labels() const noexcept { return labels_; }
    const ContractRegistry& contracts() const noexcept { return contracts_; }
    const TokenBook& book() const noexcept { return book_; }
    const MapperOptions& options() const noexcept { return options_; }

    // Raw holder tables of every token seen in the stream at `at`.
    const std::map<Address, HolderTable>& raw_tables(const Snapshot& at) {
        std::lock_guard lock(mu_);
        auto& state = state_for(at);
        return state.tables;
    }

    HolderTable raw_table(const Address& token, const Snapshot& at) {
        const auto& tables = raw_tables(at);
        auto it = tables.find(token);
        if (it != tables.end()) return it->second;
        return HolderTable(book_.lookup(token), at.block);
    }

    MappingResult map(const Address& token, const Snapshot& at) {
        const auto& tables = raw_tables(at);
        HolderTable initial = raw_table(token, at);
        MappingInputs inputs{
            labels_,
            contracts_,
            [this, at](const Address& c, const Address& t) { return ledger(c, t, at); },
            [&tables](const Address& t) -> const HolderTable* {
                auto it = tables.find(t);
                return it == tables.end() ? nullptr : &it->second;
            },
        };
        return run_iterative_mapping(initial, inputs, options_);
    }

    // Maps several tokens at one snapshot, `workers` at a time.
    std::map<Address, MappingResult> map_all(std::span<const Address> tokens, const Snapshot& at, unsigned workers = 1) {
        raw_tables(at);
        std::map<Address, MappingResult> out;
        if (workers <= 1 || tokens.size() <= 1) {
            for (const auto& t : tokens) out.emplace(t, map(t, at));
            return out;
        }
        std::size_t next = 0;
        while (next < tokens.size()) {
            std::vector<std::pair<Address, std::future<MappingResult>>> batch;
            for (unsigned w = 0; w < workers && next < tokens.size(); ++w, ++next) {
                const Address t = tokens[next];
                batch.emplace_back(t, std::async(std::launch::async, [this, t, at] { return map(t, at); }));
            }
            for (auto& [t, f] : batch) out.emplace(t, f.get());
        }
        return out;
    }

    const PositionLedger* ledger(const Address& contract, const Address& token, const Snapshot& at) {
        std::lock_guard lock(mu_);
        auto& state = state_for(at);
        const auto key = std::make_pair(contract, token);
        auto it = state.ledgers.find(key);
        if (it == state.ledgers.end()) {
            auto ev = contract_events_.find(contract);
            if (ev == contract_events_.end()) ev = contract_events_.emplace(contract, index_->for_contract(contract)).first;
            it = state.ledgers.emplace(key, build_position_ledger(ev->second, contract, token, at)).first;
        }
        return &it->second;
    }

private:
    struct SnapshotState {
        std::map<Address, HolderTable> tables;
        std::map<std::pair<Address, Address>, PositionLedger> ledgers;
    };

    SnapshotState& state_for(const Snapshot& at) {
        auto it = states_.find(at.block);
        if (it == states_.end()) {
            SnapshotState s;
            s.tables = build_holder_tables(events_, book_, at);
            it = states_.emplace(at.block, std::move(s)).first;
        }
        return it->second;
    }

    std::vector<LedgerEvent> events_;
    LabelRegistry labels_;
    ContractRegistry contracts_;
    TokenBook book_;
    MapperOptions options_;
    std::unique_ptr<EventIndex> index_;
    std::mutex mu_;
    std::map<std::uint64_t, SnapshotState> states_;
    std::map<Address, std::vector<LedgerEvent>> contract_events_;
};

}  // namespace ownmap
