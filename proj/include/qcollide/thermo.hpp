// thermo.hpp — continuous-collision limit, relaxation times, fluctuation-dissipation

#pragma once

#include <span>
#include <vector>

#include "qcollide/channel.hpp"

namespace qcollide {

struct RelaxationRates {
    double T1 = 0.0;
    double T2 = 0.0;
    double Tpf = 0.0;  // +inf when theta = 0
    double tau0 = 0.0;

    // T2 = 2 T1 within a relative 1e-12.
    bool bound_saturated() const;
};

// T1 = tau0/phi^2, Tpf = tau0/(2 theta^2), 1/T2 = 1/(2 T1) + p q / Tpf.
RelaxationRates rates_from_machine(double phi, double theta, double tau0, double p);

double continuous_d(double t, double d0, double p, double T1);
double continuous_k_mag(double t, double k0_mag, double T2);

struct LimitPoint {
    double tau0 = 0.0;
    long steps = 0;
    double phi = 0.0;
    double theta = 0.0;
    double d_discrete = 0.0;
    double d_continuous = 0.0;
    double k_discrete = 0.0;
    double k_continuous = 0.0;
    double d_error = 0.0;
    double k_error = 0.0;
};

struct LimitReport {
    std::vector<LimitPoint> points;
    // Least-squares slope of log(error) against log(tau0); ~1 for a first-order limit.
    double d_order = 0.0;
    double k_order = 0.0;
};

// For each tau0 the machine is phi = sqrt(tau0/T1), theta = sqrt(tau0/(2 Tpf)),
// run for n = t/tau0 collisions (rounded) and compared with the exponentials.
LimitReport discrete_limit_check(double T1, double Tpf, double p, double t, double d0, double k0_mag,
                                 std::span<const double> tau0s);

// 1 - cos(phi)^(2n)
double dissipation(double phi, int n);

// Measure xi in the P0/P1 basis, evolve each branch n collisions, and form
// F = sqrt(p Tr(delta_0 A)^2 + q Tr(delta_1 A)^2) with delta_j = rho_j - P_j.
double fd_protocol_simulated(const MachineParams& m, const BathSpec& b, const Mat2& a, int n);
// The protocol value for every n in [0, n_max] from one pair of branch runs.
std::vector<double> fd_protocol_series(const MachineParams& m, const BathSpec& b, const Mat2& a, int n_max);
// D(n) |Tr(A sigma_z)| / (2 cosh(beta E))
double fd_closed_form(const Mat2& a, const BathSpec& b, double phi, int n);
// Same with D(t) = 1 - exp(-t/T1).
double fd_closed_form_continuous(const Mat2& a, const BathSpec& b, double t, double T1);

struct RelaxationFit {
    double T1 = 0.0;
    double T2 = 0.0;
};

inline constexpr int kFitSkip = 5;
inline constexpr double kFitFloor = 1e-12;

// Log-linear least squares on |d_n - p| and |k_n| against t = n tau0,
// skipping the first kFitSkip points and stopping once a series falls to
// the round-off floor kFitFloor.
RelaxationFit fit_relaxation(const Trajectory& traj, double p, double tau0);

}  // namespace qcollide
