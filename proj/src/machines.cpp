#include "qcollide/machines.hpp"

#include <cmath>
#include <stdexcept>

namespace qcollide {

void MachineParams::validate() const {
    if (!std::isfinite(phi) || !std::isfinite(theta) || !std::isfinite(alpha)) {
        throw std::invalid_argument("machine angles must be finite");
    }
    if (phi < 0.0 || phi > M_PI / 2 + 1e-12) {
        throw std::invalid_argument("machine phi must lie in [0, pi/2]");
    }
}

Mat4 build_machine(const MachineParams& m) {
    m.validate();
    const double c = std::cos(m.phi);
    const double s = std::sin(m.phi);
    const cplx e_plus = std::polar(1.0, m.theta + m.alpha);
    const cplx e_minus = std::polar(1.0, m.theta - m.alpha);
    const cplx i(0.0, 1.0);

    Mat4 u = Mat4::Zero();
    u(0, 0) = 1.0;
    u(3, 3) = 1.0;
    // column |01>
    u(1, 1) = e_plus * c;
    u(2, 1) = e_plus * i * s;
    // column |10>
    u(2, 2) = e_minus * c;
    u(1, 2) = e_minus * i * s;
    return u;
}

Mat4 build_v(double phi, double theta) { return build_machine({phi, theta, 0.0}); }

Mat4 hamiltonian_form(double phi, double theta) {
    const Mat2 x = pauli_x();
    const Mat2 y = pauli_y();
    const Mat2 z = pauli_z();
    const MatX xx = kron(x, x);
    const MatX yy = kron(y, y);
    const MatX zz = kron(z, z);
    return 0.5 * (phi * (xx + yy) - theta * zz);
}

Mat2 phase_gate(double x) {
    Mat2 u = Mat2::Zero();
    u(0, 0) = 1.0;
    u(1, 1) = std::polar(1.0, x);
    return u;
}

Mat4 gauge_transform(const Mat4& u, double alpha, double beta) {
    const MatX left = kron(Mat2::Identity(), phase_gate(alpha));
    const MatX right = kron(Mat2::Identity(), phase_gate(beta));
    return left * u * right;
}

Mat4 swap_gate() {
    Mat4 u = Mat4::Zero();
    u(0, 0) = 1.0;
    u(1, 2) = 1.0;
    u(2, 1) = 1.0;
    u(3, 3) = 1.0;
    return u;
}

double reduce_theta(double theta) {
    double r = theta - M_PI * std::round(theta / M_PI);
    if (r <= -M_PI / 2 + 1e-12) r += M_PI;
    return r;
}

CanonicalParams canonical_params(double phi, double theta) {
    return {phi / 2, phi / 2, -reduce_theta(theta) / 2};
}

bool lu_equivalent(const MachineParams& m1, const MachineParams& m2, double tol) {
    m1.validate();
    m2.validate();
    if (std::abs(m1.phi - m2.phi) > tol) return false;
    const double delta = m1.theta - m2.theta;
    return std::abs(delta - M_PI * std::round(delta / M_PI)) <= tol;
}

bool is_basis_independent(const Mat4& u, int trials, double tol, Rng& rng) {
    if (trials <= 0) throw std::invalid_argument("is_basis_independent needs trials > 0");
    for (int t = 0; t < trials; ++t) {
        const Mat2 w = haar_qubit_unitary(rng);
        const MatX ww = kron(w, w);
        const MatX rotated = ww * u * ww.adjoint();
        if (phase_insensitive_distance(rotated, u) > tol) return false;
    }
    return true;
}

}  // namespace qcollide
