#pragma once

#include <cstddef>

#include "qcollide/kernels.hpp"

namespace qcollide::kernels {

struct KernelTable {
    void (*apply_gate2)(cplx* state, std::size_t size, int shift_a, int shift_b, const Gate4& gate);
    cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);
    double (*norm2)(const cplx* a, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(QCOLLIDE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(QCOLLIDE_HAVE_NEON)
const KernelTable& neon_table();
#endif

// Insert a zero bit at position `bit` of `x`.
inline std::size_t insert_zero(std::size_t x, int bit) {
    const std::size_t low = x & ((std::size_t{1} << bit) - 1);
    return ((x >> bit) << (bit + 1)) | low;
}

// Gate re-indexed so that basis index 2*bit_hi + bit_lo, hi/lo by bit shift.
inline Gate4 gate_in_shift_order(const Gate4& g, int shift_a, int shift_b) {
    if (shift_a > shift_b) return g;
    Gate4 out{};
    constexpr int perm[4] = {0, 2, 1, 3};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) out[4 * perm[r] + perm[c]] = g[4 * r + c];
    }
    return out;
}

}  // namespace qcollide::kernels
