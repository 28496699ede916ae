// entanglement.hpp — Wootters concurrence and the entangling power of a machine

#pragma once

#include "qcollide/channel.hpp"
#include "qcollide/linalg.hpp"
#include "qcollide/machines.hpp"

namespace qcollide {

// C = max(0, l1 - l2 - l3 - l4), l_i the decreasing square roots of the
// eigenvalues of rho (Y(x)Y) rho* (Y(x)Y). Throws on an invalid density matrix.
double concurrence(const Mat4& rho, const Tolerances& tol = {});
double concurrence(const DensityMatrix& rho);

struct BlochGrid {
    int n_theta = 32;  // polar samples, both poles included
    int n_phi = 64;    // azimuthal samples over [0, 2pi)
};

struct EntanglingPowerResult {
    double value = 0.0;
    // Maximizing system input cos(t/2)|0> + e^{i f} sin(t/2)|1>.
    double bloch_theta = 0.0;
    double bloch_phi = 0.0;
    Vec2 argmax_state = Vec2::Zero();
};

// max over pure system inputs of concurrence(U (psi psi^H (x) xi) U^H). Pure inputs
// suffice because concurrence is convex and the map rho -> U(rho (x) xi)U^H is linear.
// Coarse Bloch-sphere grid, then a Nelder-Mead polish to refine_tol in the angles.
EntanglingPowerResult entangling_power(const MachineParams& m, const BathSpec& b,
                                       const BlochGrid& grid = {}, double refine_tol = 1e-10);

// p sin(2 phi), stated for p >= q.
double entangling_power_closed(double p, double phi);

}  // namespace qcollide
