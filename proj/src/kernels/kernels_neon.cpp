// NEON variants for aarch64; one complex double per 128-bit register.

#include <arm_neon.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace qcollide::kernels {
namespace {

inline float64x2_t load1(const cplx* p) { return vld1q_f64(reinterpret_cast<const double*>(p)); }
inline void store1(cplx* p, float64x2_t v) { vst1q_f64(reinterpret_cast<double*>(p), v); }

// g * x with g pre-split as (re, re) and (-im, im).
inline float64x2_t cmul(float64x2_t g_re, float64x2_t g_im_signed, float64x2_t x) {
    const float64x2_t x_sw = vextq_f64(x, x, 1);
    return vfmaq_f64(vmulq_f64(g_re, x), g_im_signed, x_sw);
}

void apply_gate2_neon(cplx* state, std::size_t size, int shift_a, int shift_b, const Gate4& gate) {
    const Gate4 g = gate_in_shift_order(gate, shift_a, shift_b);
    const int hi = std::max(shift_a, shift_b);
    const int lo = std::min(shift_a, shift_b);
    const std::size_t mhi = std::size_t{1} << hi;
    const std::size_t mlo = std::size_t{1} << lo;
    float64x2_t g_re[16];
    float64x2_t g_im[16];
    for (int i = 0; i < 16; ++i) {
        g_re[i] = vdupq_n_f64(g[i].real());
        const double im[2] = {-g[i].imag(), g[i].imag()};
        g_im[i] = vld1q_f64(im);
    }
    for (std::size_t k = 0; k < size / 4; ++k) {
        const std::size_t base = insert_zero(insert_zero(k, lo), hi);
        cplx* p[4] = {state + base, state + (base | mlo), state + (base | mhi), state + (base | mhi | mlo)};
        const float64x2_t in[4] = {load1(p[0]), load1(p[1]), load1(p[2]), load1(p[3])};
        float64x2_t out[4];
        for (int r = 0; r < 4; ++r) {
            float64x2_t acc = cmul(g_re[4 * r], g_im[4 * r], in[0]);
            for (int c = 1; c < 4; ++c) acc = vaddq_f64(acc, cmul(g_re[4 * r + c], g_im[4 * r + c], in[c]));
            out[r] = acc;
        }
        for (int r = 0; r < 4; ++r) store1(p[r], out[r]);
    }
}

cplx cdot_neon(const cplx* a, const cplx* b, std::size_t n) {
    // lanes: (ar*br, ai*bi) and (ar*bi, ai*br)
    float64x2_t acc_re = vdupq_n_f64(0.0);
    float64x2_t acc_im = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t va = load1(a + i);
        const float64x2_t vb = load1(b + i);
        acc_re = vfmaq_f64(acc_re, va, vb);
        acc_im = vfmaq_f64(acc_im, va, vextq_f64(vb, vb, 1));
    }
    return {vgetq_lane_f64(acc_re, 0) + vgetq_lane_f64(acc_re, 1),
            vgetq_lane_f64(acc_im, 0) - vgetq_lane_f64(acc_im, 1)};
}

double norm2_neon(const cplx* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t v = load1(a + i);
        acc = vfmaq_f64(acc, v, v);
    }
    return vaddvq_f64(acc);
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table{apply_gate2_neon, cdot_neon, norm2_neon};
    return table;
}

}  // namespace qcollide::kernels
