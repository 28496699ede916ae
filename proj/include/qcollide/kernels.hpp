// kernels.hpp — inner loops of the multi-qubit evolution
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The active
// variant is chosen once at startup from CPU features; QCOLLIDE_ISA=scalar|avx2|neon
// in the environment or set_isa() overrides it.

#pragma once

#include <array>
#include <complex>
#include <span>
#include <string_view>
#include <vector>

namespace qcollide::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2, neon };

// Row-major 4x4 gate on the ordered qubit pair (a, b): basis index 2*bit_a + bit_b.
using Gate4 = std::array<cplx, 16>;

std::string_view isa_name(Isa isa);
// Variants compiled in and supported by this CPU; scalar is always first.
std::vector<Isa> available_isas();
Isa active_isa();
// Throws std::invalid_argument when the variant is unavailable here.
void set_isa(Isa isa);

// state has 2^num_qubits amplitudes; qubit 0 is the most significant bit.
void apply_gate2(std::span<cplx> state, int num_qubits, int qubit_a, int qubit_b, const Gate4& gate);
// sum_i conj(a_i) * b_i
cplx cdot(std::span<const cplx> a, std::span<const cplx> b);
// sum_i |a_i|^2
double norm2(std::span<const cplx> a);

// Explicit-variant entry points, for equivalence testing.
void apply_gate2(Isa isa, std::span<cplx> state, int num_qubits, int qubit_a, int qubit_b,
                 const Gate4& gate);
cplx cdot(Isa isa, std::span<const cplx> a, std::span<const cplx> b);
double norm2(Isa isa, std::span<const cplx> a);

}  // namespace qcollide::kernels
