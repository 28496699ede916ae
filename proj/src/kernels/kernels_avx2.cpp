// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// is only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace qcollide::kernels {
namespace {

// Broadcast scalar g times two packed complex values.
inline __m256d cmul_scalar(__m256d g_re, __m256d g_im, __m256d v) {
    const __m256d v_sw = _mm256_permute_pd(v, 0b0101);
    return _mm256_fmaddsub_pd(g_re, v, _mm256_mul_pd(g_im, v_sw));
}

// Lane-wise complex product of two packed pairs.
inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d a_re = _mm256_movedup_pd(a);
    const __m256d a_im = _mm256_permute_pd(a, 0b1111);
    const __m256d b_sw = _mm256_permute_pd(b, 0b0101);
    return _mm256_fmaddsub_pd(a_re, b, _mm256_mul_pd(a_im, b_sw));
}

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

// Both gate bits above bit 0: groups k and k+1 sit at adjacent addresses, so each
// register holds the same gate slot for two groups.
void apply_pairs_of_groups(cplx* state, std::size_t size, int hi, int lo, const Gate4& g) {
    const std::size_t mhi = std::size_t{1} << hi;
    const std::size_t mlo = std::size_t{1} << lo;
    __m256d g_re[16];
    __m256d g_im[16];
    for (int i = 0; i < 16; ++i) {
        g_re[i] = _mm256_set1_pd(g[i].real());
        g_im[i] = _mm256_set1_pd(g[i].imag());
    }
    for (std::size_t k = 0; k < size / 4; k += 2) {
        const std::size_t base = insert_zero(insert_zero(k, lo), hi);
        cplx* p[4] = {state + base, state + (base | mlo), state + (base | mhi), state + (base | mhi | mlo)};
        const __m256d in[4] = {load2(p[0]), load2(p[1]), load2(p[2]), load2(p[3])};
        __m256d out[4];
        for (int r = 0; r < 4; ++r) {
            __m256d acc = cmul_scalar(g_re[4 * r], g_im[4 * r], in[0]);
            acc = _mm256_add_pd(acc, cmul_scalar(g_re[4 * r + 1], g_im[4 * r + 1], in[1]));
            acc = _mm256_add_pd(acc, cmul_scalar(g_re[4 * r + 2], g_im[4 * r + 2], in[2]));
            acc = _mm256_add_pd(acc, cmul_scalar(g_re[4 * r + 3], g_im[4 * r + 3], in[3]));
            out[r] = acc;
        }
        for (int r = 0; r < 4; ++r) store2(p[r], out[r]);
    }
}

// Low gate bit is bit 0: (x0,x1) and (x2,x3) are contiguous pairs. Outputs are
// built column-wise from broadcast inputs.
void apply_bit0_pairs(cplx* state, std::size_t size, int hi, const Gate4& g) {
    const std::size_t mhi = std::size_t{1} << hi;
    __m256d col_top[4];
    __m256d col_bot[4];
    for (int c = 0; c < 4; ++c) {
        col_top[c] = _mm256_setr_pd(g[c].real(), g[c].imag(), g[4 + c].real(), g[4 + c].imag());
        col_bot[c] = _mm256_setr_pd(g[8 + c].real(), g[8 + c].imag(), g[12 + c].real(), g[12 + c].imag());
    }
    for (std::size_t k = 0; k < size / 4; ++k) {
        const std::size_t base = insert_zero(insert_zero(k, 0), hi);
        const __m256d p0 = load2(state + base);
        const __m256d p1 = load2(state + (base | mhi));
        const __m256d x[4] = {
            _mm256_permute2f128_pd(p0, p0, 0x00), _mm256_permute2f128_pd(p0, p0, 0x11),
            _mm256_permute2f128_pd(p1, p1, 0x00), _mm256_permute2f128_pd(p1, p1, 0x11)};
        __m256d top = cmul(col_top[0], x[0]);
        __m256d bot = cmul(col_bot[0], x[0]);
        for (int c = 1; c < 4; ++c) {
            top = _mm256_add_pd(top, cmul(col_top[c], x[c]));
            bot = _mm256_add_pd(bot, cmul(col_bot[c], x[c]));
        }
        store2(state + base, top);
        store2(state + (base | mhi), bot);
    }
}

void apply_gate2_avx2(cplx* state, std::size_t size, int shift_a, int shift_b, const Gate4& gate) {
    const Gate4 g = gate_in_shift_order(gate, shift_a, shift_b);
    const int hi = std::max(shift_a, shift_b);
    const int lo = std::min(shift_a, shift_b);
    if (lo == 0) {
        apply_bit0_pairs(state, size, hi, g);
    } else {
        apply_pairs_of_groups(state, size, hi, lo, g);
    }
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cplx cdot_avx2(const cplx* a, const cplx* b, std::size_t n) {
    // re = sum(ar*br + ai*bi), im = sum(ar*bi - ai*br)
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = load2(a + i);
        const __m256d vb = load2(b + i);
        acc_re = _mm256_fmadd_pd(va, vb, acc_re);
        acc_im = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), acc_im);
    }
    const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
    cplx acc(hsum(acc_re), hsum(_mm256_mul_pd(acc_im, sign)));
    for (; i < n; ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2_avx2(const cplx* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = load2(a + i);
        const __m256d v1 = load2(a + i + 2);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += std::norm(a[i]);
    return acc;
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{apply_gate2_avx2, cdot_avx2, norm2_avx2};
    return table;
}

}  // namespace qcollide::kernels
