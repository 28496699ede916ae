// channel.hpp — one collision rho -> Tr_B[U (rho (x) xi) U^H] and its iteration

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qcollide/linalg.hpp"
#include "qcollide/machines.hpp"

namespace qcollide {

// Thermal ancilla xi = p P0 + q P1. Built from (beta, E) with
// p = (1 + tanh(beta E)) / 2, or from p directly (any p in [0,1], for scans).
class BathSpec {
public:
    static BathSpec from_temperature(double beta, double energy);
    static BathSpec from_population(double p);

    double p() const { return p_; }
    double q() const { return 1.0 - p_; }
    std::optional<double> beta() const { return beta_; }
    std::optional<double> energy() const { return energy_; }
    // 1 / (2 cosh(beta E)); equals sqrt(p q).
    double inverse_two_cosh() const;

private:
    BathSpec(double p, std::optional<double> beta, std::optional<double> energy)
        : p_(p), beta_(beta), energy_(energy) {}

    double p_;
    std::optional<double> beta_;
    std::optional<double> energy_;
};

using Trajectory = std::vector<QubitState>;

enum class IterationPath { analytic, matrix };

Mat2 bath_state(const BathSpec& b);

cplx lambda(double p, double theta, double alpha);

// Tr_B[U (rho (x) xi) U^H] for an arbitrary two-qubit U.
Mat2 apply_channel(const Mat4& u, const Mat2& rho, const Mat2& xi);

// d' = d cos^2(phi) + p sin^2(phi),  k' = cos(phi) lambda k.
QubitState apply_collision(const QubitState& rho, const MachineParams& m, const BathSpec& b);
// Same map through 4x4 conjugation and partial trace.
QubitState apply_collision_matrix(const QubitState& rho, const MachineParams& m, const BathSpec& b);

// Entries 0..n; entry 0 is rho0.
Trajectory iterate(const QubitState& rho0, const MachineParams& m, const BathSpec& b, int n,
                   IterationPath path = IterationPath::analytic);

double closed_form_d(double d0, double p, double phi, int n);
cplx closed_form_k(cplx k0, cplx lambda, double phi, int n);

struct StationarityReport {
    double max_deviation = 0.0;
    double worst_p = 0.0;
};

// max over p of max_abs(U (xi (x) xi) U^H - xi (x) xi).
StationarityReport check_stationarity(const Mat4& u, std::span<const double> ps);
StationarityReport check_stationarity(const MachineParams& m, std::span<const double> ps);

// Same dissipation angle, and decoherence factors lambda(p) that agree for every p
// up to one p-independent phase (a fixed rotation of the x-y axes).
bool dynamically_equivalent(const MachineParams& m1, const MachineParams& m2, double tol = 1e-9);

}  // namespace qcollide
