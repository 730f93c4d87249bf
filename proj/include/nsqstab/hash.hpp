#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include "nsqstab/block.hpp"

namespace nsqstab {

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

/// Hash of a plant matrix: group sizes followed by the row-major entry bits.
inline std::uint64_t plant_hash(const PlantMatrix& A) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int pi : A.structure.sizes()) {
        std::uint64_t v = static_cast<std::uint64_t>(pi);
        h = fnv1a64(&v, sizeof v, h);
    }
    for (Eigen::Index i = 0; i < A.data.rows(); ++i)
        for (Eigen::Index j = 0; j < A.data.cols(); ++j) {
            double x = A.data(i, j);
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            h = fnv1a64(&bits, sizeof bits, h);
        }
    return h;
}

} // namespace nsqstab
