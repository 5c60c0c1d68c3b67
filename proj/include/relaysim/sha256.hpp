#pragma once
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "relaysim/types.hpp"

namespace relaysim {

// FIPS 180-4 SHA-256. This is the protocol hash H used for transaction ids,
// receipts and the modulo-hash allocation rule.
class Sha256 {
  public:
    Sha256();
    void update(const std::uint8_t* data, std::size_t len);
    void update(const std::vector<std::uint8_t>& data) { update(data.data(), data.size()); }
    void update(const std::string& s) { update(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()); }
    Hash256 finalize();

    static Hash256 digest(const std::uint8_t* data, std::size_t len);
    static Hash256 digest(const std::vector<std::uint8_t>& data) { return digest(data.data(), data.size()); }
    static Hash256 digest(const std::string& s) {
        return digest(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    }

  private:
    void compress(const std::uint8_t block[64]);

    std::uint32_t h_[8];
    std::uint64_t bitlen_{0};
    std::uint8_t buf_[64];
    std::size_t buflen_{0};
};

}  // namespace relaysim
