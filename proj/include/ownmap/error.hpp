#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ownmap {

// Root of every error the engine raises. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateEvent : public Error {
public:
    DuplicateEvent(std::uint64_t block, std::uint64_t log_index)
        : Error("duplicate event at block " + std::to_string(block) + " log_index " +
                std::to_string(log_index)),
          block_(block), log_index_(log_index) {}
    std::uint64_t block() const noexcept { return block_; }
    std::uint64_t log_index() const noexcept { return log_index_; }

private:
    std::uint64_t block_;
    std::uint64_t log_index_;
};

class SchemaError : public Error {
public:
    SchemaError(std::string address, const std::string& reason)
        : Error("schema error for " + address + ": " + reason), address_(std::move(address)) {}
    const std::string& address() const noexcept { return address_; }

private:
    std::string address_;
};

class ZeroDenominator : public Error {
public:
    ZeroDenominator() : Error("zero denominator") {}
};

class NegativeBalance : public Error {
public:
    NegativeBalance(std::string address, std::uint64_t block)
        : Error("negative balance for " + address + " at block " + std::to_string(block)),
          address_(std::move(address)), block_(block) {}
    const std::string& address() const noexcept { return address_; }
    std::uint64_t block() const noexcept { return block_; }

private:
    std::string address_;
    std::uint64_t block_;
};

class NegativePosition : public Error {
public:
    explicit NegativePosition(std::string owner, const std::string& detail = {})
        : Error("negative position for " + owner + (detail.empty() ? "" : " (" + detail + ")")),
          owner_(std::move(owner)) {}
    const std::string& owner() const noexcept { return owner_; }

private:
    std::string owner_;
};

// Mapping-stage errors carry the contract they were raised for.
class MappingError : public Error {
public:
    MappingError(std::string address, const std::string& what)
        : Error(what), address_(std::move(address)) {}
    const std::string& address() const noexcept { return address_; }

private:
    std::string address_;
};

class EmptyPool : public MappingError {
public:
    explicit EmptyPool(std::string pool)
        : MappingError(pool, "share supply is zero for pool " + pool) {}
};

class InsolventPool : public MappingError {
public:
    explicit InsolventPool(std::string pool)
        : MappingError(pool, "debts exceed deposits in lending pool " + pool) {}
};

class OverAllocated : public MappingError {
public:
    explicit OverAllocated(std::string contract)
        : MappingError(contract, "explicit owners exceed balance of " + contract) {}
};

class UnresolvedMajorHolder : public MappingError {
public:
    UnresolvedMajorHolder(std::string address, double share)
        : MappingError(address, "unresolved contract " + address + " holds " +
                                    std::to_string(share * 100.0) + "% of relevant supply"),
          share_(share) {}
    double share() const noexcept { return share_; }

private:
    double share_;
};

class CycleDetected : public MappingError {
public:
    explicit CycleDetected(std::vector<std::string> path)
        : MappingError(path.empty() ? std::string{} : path.front(), describe(path)),
          path_(std::move(path)) {}
    const std::vector<std::string>& path() const noexcept { return path_; }

private:
    static std::string describe(const std::vector<std::string>& path) {
        std::string out = "mapping cycle:";
        for (const auto& p : path) out += " " + p;
        return out;
    }
    std::vector<std::string> path_;
};

class IterationLimitExceeded : public MappingError {
public:
    explicit IterationLimitExceeded(std::size_t cap)
        : MappingError({}, "iteration limit of " + std::to_string(cap) + " exceeded") {}
};

class NonPositiveSupply : public Error {
public:
    NonPositiveSupply() : Error("relevant supply is not positive") {}
};

class InsufficientHistory : public Error {
public:
    explicit InsufficientHistory(std::size_t points)
        : Error("insufficient history: " + std::to_string(points) + " points, need 12"), points_(points) {}
    std::size_t points() const noexcept { return points_; }

private:
    std::size_t points_;
};

}  // namespace ownmap
