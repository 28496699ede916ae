#include "qcollide/channel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace qcollide {

BathSpec BathSpec::from_temperature(double beta, double energy) {
    if (std::isnan(beta) || !std::isfinite(energy) || !(energy > 0.0)) {
        throw std::invalid_argument("bath needs beta (may be +inf) and energy E > 0");
    }
    const double p = 0.5 * (1.0 + std::tanh(beta * energy));
    return BathSpec(p, beta, energy);
}

BathSpec BathSpec::from_population(double p) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw std::invalid_argument("bath population p must lie in [0,1]");
    }
    return BathSpec(p, std::nullopt, std::nullopt);
}

double BathSpec::inverse_two_cosh() const {
    if (beta_ && energy_) {
        const double x = *beta_ * *energy_;
        if (std::isinf(x)) return 0.0;
        return 1.0 / (2.0 * std::cosh(x));
    }
    return std::sqrt(p_ * (1.0 - p_));
}

Mat2 bath_state(const BathSpec& b) {
    Mat2 xi = Mat2::Zero();
    xi(0, 0) = b.p();
    xi(1, 1) = b.q();
    return xi;
}

cplx lambda(double p, double theta, double alpha) {
    const double q = 1.0 - p;
    return std::polar(1.0, alpha) * (p * std::polar(1.0, -theta) + q * std::polar(1.0, theta));
}

Mat2 apply_channel(const Mat4& u, const Mat2& rho, const Mat2& xi) {
    const MatX joint = u * kron(rho, xi) * u.adjoint();
    static constexpr std::array<int, 1> kSystem{0};
    return partial_trace(joint, kSystem);
}

QubitState apply_collision(const QubitState& rho, const MachineParams& m, const BathSpec& b) {
    const double c = std::cos(m.phi);
    const double s = std::sin(m.phi);
    const double d = rho.d() * c * c + b.p() * s * s;
    const cplx k = c * lambda(b.p(), m.theta, m.alpha) * rho.k();
    return QubitState(d, k);
}

QubitState apply_collision_matrix(const QubitState& rho, const MachineParams& m, const BathSpec& b) {
    const Mat2 out = apply_channel(build_machine(m), rho.to_matrix(), bath_state(b));
    return QubitState(out(0, 0).real(), out(0, 1));
}

Trajectory iterate(const QubitState& rho0, const MachineParams& m, const BathSpec& b, int n,
                   IterationPath path) {
    if (n < 0) throw std::invalid_argument("iterate: negative step count");
    m.validate();
    Trajectory out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(rho0);
    if (path == IterationPath::analytic) {
        for (int i = 0; i < n; ++i) out.push_back(apply_collision(out.back(), m, b));
        return out;
    }
    const Mat4 u = build_machine(m);
    const Mat2 xi = bath_state(b);
    Mat2 rho = rho0.to_matrix();
    for (int i = 0; i < n; ++i) {
        rho = apply_channel(u, rho, xi);
        out.emplace_back(rho(0, 0).real(), rho(0, 1));
    }
    return out;
}

double closed_form_d(double d0, double p, double phi, int n) {
    if (n < 0) throw std::invalid_argument("closed_form_d: negative step count");
    const double c2n = std::pow(std::cos(phi), 2.0 * n);
    return (1.0 - c2n) * p + c2n * d0;
}

cplx closed_form_k(cplx k0, cplx lam, double phi, int n) {
    if (n < 0) throw std::invalid_argument("closed_form_k: negative step count");
    // binary powering; std::pow on complex goes through log and fails at zero
    cplx base = lam * std::cos(phi);
    cplx acc = 1.0;
    for (unsigned e = static_cast<unsigned>(n); e != 0; e >>= 1) {
        if (e & 1U) acc *= base;
        base *= base;
    }
    return k0 * acc;
}

StationarityReport check_stationarity(const Mat4& u, std::span<const double> ps) {
    StationarityReport report;
    for (double p : ps) {
        const Mat2 xi = bath_state(BathSpec::from_population(p));
        const MatX prod = kron(xi, xi);
        const double dev = max_abs(u * prod * u.adjoint() - prod);
        if (dev >= report.max_deviation) {
            report.max_deviation = dev;
            report.worst_p = p;
        }
    }
    return report;
}

StationarityReport check_stationarity(const MachineParams& m, std::span<const double> ps) {
    return check_stationarity(build_machine(m), ps);
}

bool dynamically_equivalent(const MachineParams& m1, const MachineParams& m2, double tol) {
    m1.validate();
    m2.validate();
    if (std::abs(m1.phi - m2.phi) > tol) return false;
    static constexpr std::array<double, 6> kProbe{0.0, 0.2, 0.35, 0.5, 0.8, 1.0};
    // Both lambdas have modulus 1 at p = 0, so the reference phase is well defined.
    const cplx ref = lambda(0.0, m2.theta, m2.alpha) / lambda(0.0, m1.theta, m1.alpha);
    for (double p : kProbe) {
        const cplx l1 = lambda(p, m1.theta, m1.alpha);
        const cplx l2 = lambda(p, m2.theta, m2.alpha);
        if (std::abs(l2 - ref * l1) > tol) return false;
    }
    return true;
}

}  // namespace qcollide
