#include <algorithm>

#include "kernels_internal.hpp"

namespace qcollide::kernels {
namespace {

void apply_gate2_scalar(cplx* state, std::size_t size, int shift_a, int shift_b, const Gate4& gate) {
    const Gate4 g = gate_in_shift_order(gate, shift_a, shift_b);
    const int hi = std::max(shift_a, shift_b);
    const int lo = std::min(shift_a, shift_b);
    const std::size_t mhi = std::size_t{1} << hi;
    const std::size_t mlo = std::size_t{1} << lo;
    for (std::size_t k = 0; k < size / 4; ++k) {
        const std::size_t base = insert_zero(insert_zero(k, lo), hi);
        const std::size_t idx[4] = {base, base | mlo, base | mhi, base | mhi | mlo};
        const cplx in[4] = {state[idx[0]], state[idx[1]], state[idx[2]], state[idx[3]]};
        for (int r = 0; r < 4; ++r) {
            state[idx[r]] = g[4 * r] * in[0] + g[4 * r + 1] * in[1] + g[4 * r + 2] * in[2] +
                            g[4 * r + 3] * in[3];
        }
    }
}

cplx cdot_scalar(const cplx* a, const cplx* b, std::size_t n) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2_scalar(const cplx* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(a[i]);
    return acc;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{apply_gate2_scalar, cdot_scalar, norm2_scalar};
    return table;
}

}  // namespace qcollide::kernels
