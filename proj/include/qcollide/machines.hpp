// machines.hpp — the energy-conserving two-qubit machines U(phi, theta, alpha)
//
// Basis order |00>, |01>, |10>, |11> with the system as the first factor:
//   |00> -> |00>,  |11> -> |11>
//   |01> -> e^{i(theta+alpha)} (cos(phi)|01> + i sin(phi)|10>)
//   |10> -> e^{i(theta-alpha)} (cos(phi)|10> + i sin(phi)|01>)

#pragma once

#include "qcollide/linalg.hpp"
#include "qcollide/rng.hpp"

namespace qcollide {

struct MachineParams {
    double phi = 0.0;    // dissipation angle, [0, pi/2]
    double theta = 0.0;  // dephasing angle
    double alpha = 0.0;  // axis-redefinition angle

    // Throws std::invalid_argument on non-finite angles or phi outside [0, pi/2].
    void validate() const;
    // phi > 0: the iterated channel converges to the bath state.
    bool is_thermalizing() const { return phi > 0.0; }
};

// Local-unitary canonical coordinates of exp(i sum_j mu_j sigma_j (x) sigma_j).
struct CanonicalParams {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double mu_z = 0.0;
};

Mat4 build_machine(const MachineParams& m);
// The alpha = 0 representative, diagonal in the Bell basis.
Mat4 build_v(double phi, double theta);
// H with e^{i theta/2} exp(iH) = build_v(phi, theta).
Mat4 hamiltonian_form(double phi, double theta);

Mat2 phase_gate(double x);
// (I (x) u(alpha)) U (I (x) u(beta)); leaves the induced channel unchanged.
Mat4 gauge_transform(const Mat4& u, double alpha, double beta);

Mat4 swap_gate();

// Reduce theta mod pi into (-pi/2, pi/2]; a boundary tie maps to +pi/2.
double reduce_theta(double theta);
CanonicalParams canonical_params(double phi, double theta);
bool lu_equivalent(const MachineParams& m1, const MachineParams& m2, double tol = 1e-9);

// True iff (w (x) w) U (w (x) w)^H matches U up to a global phase, in the sense
// phase_insensitive_distance <= tol, for `trials` Haar-random w.
bool is_basis_independent(const Mat4& u, int trials, double tol, Rng& rng);

}  // namespace qcollide
