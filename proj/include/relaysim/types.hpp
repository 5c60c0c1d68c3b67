#pragma once
#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <variant>
#include <vector>

namespace relaysim {

using Tokens = std::int64_t;
using TimeUs = std::int64_t;  // simulation time, integer microseconds
using Height = std::int64_t;
using RelayerId = std::int64_t;

inline constexpr TimeUs kSecond = 1'000'000;

inline TimeUs secs_to_us(double s) { return static_cast<TimeUs>(s * 1e6 + (s >= 0 ? 0.5 : -0.5)); }
inline double us_to_secs(TimeUs t) { return static_cast<double>(t) / 1e6; }

// Opaque public-key stand-in. Ordered so tie-breaks over submitters are total.
struct Address {
    std::uint64_t v{0};
    friend auto operator<=>(const Address&, const Address&) = default;
};

struct Hash256 {
    std::array<std::uint8_t, 32> b{};
    friend auto operator<=>(const Hash256&, const Hash256&) = default;
    bool is_zero() const {
        for (auto x : b)
            if (x) return false;
        return true;
    }
};

std::string to_hex(const Hash256& h);
Hash256 hash_from_hex(const std::string& hex);
std::string to_hex(const Address& a);

// Digest reduced modulo m as a big-endian unsigned integer.
std::uint64_t mod_big_endian(const Hash256& digest, std::uint64_t m);

enum class Err {
    None,
    // chain
    InsufficientBalance,
    OutOfRange,
    // membership
    InsufficientCollateral,
    AlreadyRegistered,
    NotRegistered,
    StillUnbonding,
    NotUnbonding,
    // allocation
    EmptyRelayerSet,
    UnknownTask,
    AlreadyAssigned,
    WrongAllocation,
    // transfer
    InvalidTimeout,
    // delivery
    DuplicateDelivery,
    UnknownRequest,
    PastTimeout,
    // acknowledgement
    InvalidReceipt,
    AlreadyAcked,
    TaskTimedOut,
    // timeout reporting
    InvalidProof,
    NotTimedOut,
    AlreadyResolved,
    // header relay
    StaleHeader,
    // driver-level
    ConfigError,
    MalformedTrace,
    IncomparableConfigs,
};

const char* err_name(Err e);

template <typename T>
class Result {
  public:
    Result(T value) : v_(std::move(value)) {}
    Result(Err e) : v_(e) {}
    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }
    const T& value() const { return std::get<T>(v_); }
    T& value() { return std::get<T>(v_); }
    Err error() const { return ok() ? Err::None : std::get<Err>(v_); }

  private:
    std::variant<T, Err> v_;
};

// Canonical serialization buffer. All integers big-endian, fixed width.
class ByteWriter {
  public:
    void u8(std::uint8_t x) { buf_.push_back(x); }
    void u64(std::uint64_t x) {
        for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    }
    void i64(std::int64_t x) { u64(static_cast<std::uint64_t>(x)); }
    void hash(const Hash256& h) { buf_.insert(buf_.end(), h.b.begin(), h.b.end()); }
    void address(const Address& a) { u64(a.v); }
    void str(const std::string& s) {
        u64(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    const std::vector<std::uint8_t>& bytes() const { return buf_; }

  private:
    std::vector<std::uint8_t> buf_;
};

// Deterministic RNG front-end. Distributions are hand-rolled so traces do not
// depend on the standard library's implementation-defined ones.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    Rng(std::uint64_t seed, const char* stream);

    std::uint64_t next();
    std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
    double unit();                         // uniform in [0, 1)
    // uniform in (0, bound_us], the synchronous-network delay draw
    TimeUs delay(TimeUs bound_us) { return 1 + static_cast<TimeUs>(below(static_cast<std::uint64_t>(bound_us))); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

  private:
    std::uint64_t state_;
};

}  // namespace relaysim
