#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ownmap {

// 20-byte account identifier. Input may use any hex casing (EIP-55 checksums
// included); output is always lowercase.
class Address {
public:
    static constexpr std::size_t size = 20;

    constexpr Address() = default;
    explicit constexpr Address(const std::array<std::uint8_t, size>& bytes) : bytes_(bytes) {}

    static Address parse(std::string_view text) {
        if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
        if (text.size() != size * 2)
            throw std::invalid_argument("address must have 40 hex digits: '" + std::string(text) + "'");
        std::array<std::uint8_t, size> out{};
        for (std::size_t i = 0; i < size; ++i) {
            const int hi = nibble(text[2 * i]);
            const int lo = nibble(text[2 * i + 1]);
            if (hi < 0 || lo < 0) throw std::invalid_argument("address has non-hex digit: '" + std::string(text) + "'");
            out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        }
        return Address(out);
    }

    // Low bytes of `n` big-endian; handy for fixtures and synthetic ids.
    static Address from_index(std::uint64_t n, std::uint8_t tag = 0) {
        std::array<std::uint8_t, size> out{};
        out[0] = tag;
        for (std::size_t i = 0; i < 8; ++i) out[size - 1 - i] = static_cast<std::uint8_t>(n >> (8 * i));
        return Address(out);
    }

    static constexpr Address zero() { return Address{}; }

    bool is_zero() const noexcept {
        for (auto b : bytes_)
            if (b != 0) return false;
        return true;
    }

    friend std::ostream& operator<<(std::ostream& os, const Address& a) { return os << a.hex(); }

    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out = "0x";
        out.reserve(2 + size * 2);
        for (auto b : bytes_) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0xf]);
        }
        return out;
    }

    const std::array<std::uint8_t, size>& bytes() const noexcept { return bytes_; }

    friend constexpr bool operator==(const Address&, const Address&) = default;
    friend constexpr auto operator<=>(const Address&, const Address&) = default;

private:
    static constexpr int nibble(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    }

    std::array<std::uint8_t, size> bytes_{};
};

}  // namespace ownmap

template <>
struct std::hash<ownmap::Address> {
    std::size_t operator()(const ownmap::Address& a) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto b : a.bytes()) h = (h ^ b) * 1099511628211ull;
        return h;
    }
};
