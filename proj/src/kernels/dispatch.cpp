#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace qcollide::kernels {
namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(QCOLLIDE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(QCOLLIDE_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa best_isa() {
    if (const char* env = std::getenv("QCOLLIDE_ISA")) {
        const std::string want(env);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (want == isa_name(isa) && cpu_supports(isa)) return isa;
        }
    }
    if (cpu_supports(Isa::avx2)) return Isa::avx2;
    if (cpu_supports(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{best_isa()};
    return isa;
}

const KernelTable& table(Isa isa) {
    if (!cpu_supports(isa)) {
        throw std::invalid_argument("kernel variant " + std::string(isa_name(isa)) +
                                    " is not available on this machine");
    }
    switch (isa) {
#if defined(QCOLLIDE_HAVE_AVX2)
        case Isa::avx2:
            return avx2_table();
#endif
#if defined(QCOLLIDE_HAVE_NEON)
        case Isa::neon:
            return neon_table();
#endif
        default:
            return scalar_table();
    }
}

void check_gate_args(std::span<cplx> state, int num_qubits, int qubit_a, int qubit_b) {
    if (num_qubits < 2 || num_qubits > 30 || state.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("apply_gate2: state size does not match qubit count");
    }
    if (qubit_a == qubit_b || qubit_a < 0 || qubit_b < 0 || qubit_a >= num_qubits ||
        qubit_b >= num_qubits) {
        throw std::invalid_argument("apply_gate2: invalid qubit pair");
    }
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::scalar};
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (cpu_supports(isa)) out.push_back(isa);
    }
    return out;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (!cpu_supports(isa)) {
        throw std::invalid_argument("kernel variant " + std::string(isa_name(isa)) +
                                    " is not available on this machine");
    }
    active().store(isa, std::memory_order_relaxed);
}

void apply_gate2(Isa isa, std::span<cplx> state, int num_qubits, int qubit_a, int qubit_b,
                 const Gate4& gate) {
    check_gate_args(state, num_qubits, qubit_a, qubit_b);
    table(isa).apply_gate2(state.data(), state.size(), num_qubits - 1 - qubit_a,
                           num_qubits - 1 - qubit_b, gate);
}

cplx cdot(Isa isa, std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cdot: length mismatch");
    return table(isa).cdot(a.data(), b.data(), a.size());
}

double norm2(Isa isa, std::span<const cplx> a) { return table(isa).norm2(a.data(), a.size()); }

void apply_gate2(std::span<cplx> state, int num_qubits, int qubit_a, int qubit_b, const Gate4& gate) {
    apply_gate2(active_isa(), state, num_qubits, qubit_a, qubit_b, gate);
}

cplx cdot(std::span<const cplx> a, std::span<const cplx> b) { return cdot(active_isa(), a, b); }

double norm2(std::span<const cplx> a) { return norm2(active_isa(), a); }

}  // namespace qcollide::kernels
