#include "relaysim/types.hpp"

#include <stdexcept>

namespace relaysim {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
}

std::uint64_t fnv1a64(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (; *s; ++s) {
        h ^= static_cast<std::uint8_t>(*s);
        h *= 0x100000001b3ull;
    }
    return h;
}
}  // namespace

std::string to_hex(const Hash256& h) {
    std::string out;
    out.reserve(64);
    for (auto x : h.b) {
        out.push_back(kHexDigits[x >> 4]);
        out.push_back(kHexDigits[x & 0xf]);
    }
    return out;
}

Hash256 hash_from_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::invalid_argument("hash hex must be 64 chars");
    Hash256 h;
    for (int i = 0; i < 32; ++i)
        h.b[i] = static_cast<std::uint8_t>(hex_val(hex[2 * i]) * 16 + hex_val(hex[2 * i + 1]));
    return h;
}

std::string to_hex(const Address& a) {
    std::string out = "0x";
    for (int i = 15; i >= 0; --i) out.push_back(kHexDigits[(a.v >> (4 * i)) & 0xf]);
    return out;
}

std::uint64_t mod_big_endian(const Hash256& digest, std::uint64_t m) {
    if (m == 0) throw std::invalid_argument("modulus must be positive");
    // Horner over the big-endian bytes; r < m <= 2^56 keeps r*256+byte in range.
    std::uint64_t r = 0;
    for (auto byte : digest.b) r = (r * 256 + byte) % m;
    return r;
}

const char* err_name(Err e) {
    switch (e) {
        case Err::None: return "None";
        case Err::InsufficientBalance: return "InsufficientBalance";
        case Err::OutOfRange: return "OutOfRange";
        case Err::InsufficientCollateral: return "InsufficientCollateral";
        case Err::AlreadyRegistered: return "AlreadyRegistered";
        case Err::NotRegistered: return "NotRegistered";
        case Err::StillUnbonding: return "StillUnbonding";
        case Err::NotUnbonding: return "NotUnbonding";
        case Err::EmptyRelayerSet: return "EmptyRelayerSet";
        case Err::UnknownTask: return "UnknownTask";
        case Err::AlreadyAssigned: return "AlreadyAssigned";
        case Err::WrongAllocation: return "WrongAllocation";
        case Err::InvalidTimeout: return "InvalidTimeout";
        case Err::DuplicateDelivery: return "DuplicateDelivery";
        case Err::UnknownRequest: return "UnknownRequest";
        case Err::PastTimeout: return "PastTimeout";
        case Err::InvalidReceipt: return "InvalidReceipt";
        case Err::AlreadyAcked: return "AlreadyAcked";
        case Err::TaskTimedOut: return "TaskTimedOut";
        case Err::InvalidProof: return "InvalidProof";
        case Err::NotTimedOut: return "NotTimedOut";
        case Err::AlreadyResolved: return "AlreadyResolved";
        case Err::StaleHeader: return "StaleHeader";
        case Err::ConfigError: return "ConfigError";
        case Err::MalformedTrace: return "MalformedTrace";
        case Err::IncomparableConfigs: return "IncomparableConfigs";
    }
    return "Unknown";
}

Rng::Rng(std::uint64_t seed, const char* stream) : Rng(seed ^ fnv1a64(stream)) {}

std::uint64_t Rng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    // rejection sampling keeps the draw unbiased and deterministic
    std::uint64_t limit = ~0ull - (~0ull % n + 1) % n;
    std::uint64_t x;
    do {
        x = next();
    } while (x > limit);
    return x % n;
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

}  // namespace relaysim
