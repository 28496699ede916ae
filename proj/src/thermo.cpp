#include "qcollide/thermo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcollide {
namespace {

void require_hermitian(const Mat2& a) {
    if (!a.allFinite() || max_abs(a - a.adjoint()) > 1e-12) {
        throw std::invalid_argument("observable must be a finite Hermitian 2x2 matrix");
    }
}

// Slope of y against x by ordinary least squares.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (x.size() < 2 || denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

bool RelaxationRates::bound_saturated() const {
    return std::abs(T2 - 2.0 * T1) <= 1e-12 * (2.0 * T1);
}

RelaxationRates rates_from_machine(double phi, double theta, double tau0, double p) {
    if (!(tau0 > 0.0) || !std::isfinite(tau0)) throw std::invalid_argument("tau0 must be > 0");
    if (!(phi > 0.0) || !std::isfinite(phi)) throw std::invalid_argument("rates need phi > 0");
    if (!std::isfinite(theta) || !(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("rates need finite theta and p in [0,1]");
    }
    RelaxationRates r;
    r.tau0 = tau0;
    r.T1 = tau0 / (phi * phi);
    r.Tpf = theta == 0.0 ? std::numeric_limits<double>::infinity() : tau0 / (2.0 * theta * theta);
    const double pq = p * (1.0 - p);
    r.T2 = 1.0 / (1.0 / (2.0 * r.T1) + pq / r.Tpf);
    return r;
}

double continuous_d(double t, double d0, double p, double T1) {
    const double e = std::exp(-t / T1);
    return e * d0 + (1.0 - e) * p;
}

double continuous_k_mag(double t, double k0_mag, double T2) { return std::exp(-t / T2) * k0_mag; }

LimitReport discrete_limit_check(double T1, double Tpf, double p, double t, double d0, double k0_mag,
                                 std::span<const double> tau0s) {
    if (!(T1 > 0.0) || !(Tpf > 0.0) || !(t >= 0.0)) {
        throw std::invalid_argument("limit check needs T1 > 0, Tpf > 0, t >= 0");
    }
    LimitReport report;
    const double inv_t2 = 1.0 / (2.0 * T1) + p * (1.0 - p) / Tpf;
    std::vector<double> log_tau, log_de, log_ke;
    for (double tau0 : tau0s) {
        LimitPoint pt;
        pt.tau0 = tau0;
        pt.steps = std::lround(t / tau0);
        pt.phi = std::sqrt(tau0 / T1);
        pt.theta = std::sqrt(tau0 / (2.0 * Tpf));
        if (pt.phi > M_PI / 2) throw std::invalid_argument("tau0 too large for the requested T1");
        const int n = static_cast<int>(pt.steps);
        pt.d_discrete = closed_form_d(d0, p, pt.phi, n);
        pt.k_discrete = std::abs(closed_form_k(k0_mag, lambda(p, pt.theta, 0.0), pt.phi, n));
        pt.d_continuous = continuous_d(t, d0, p, T1);
        pt.k_continuous = continuous_k_mag(t, k0_mag, 1.0 / inv_t2);
        pt.d_error = std::abs(pt.d_discrete - pt.d_continuous);
        pt.k_error = std::abs(pt.k_discrete - pt.k_continuous);
        report.points.push_back(pt);
        if (pt.d_error > 0.0 && pt.k_error > 0.0) {
            log_tau.push_back(std::log(tau0));
            log_de.push_back(std::log(pt.d_error));
            log_ke.push_back(std::log(pt.k_error));
        }
    }
    report.d_order = ls_slope(log_tau, log_de);
    report.k_order = ls_slope(log_tau, log_ke);
    return report;
}

double dissipation(double phi, int n) { return 1.0 - std::pow(std::cos(phi), 2.0 * n); }

std::vector<double> fd_protocol_series(const MachineParams& m, const BathSpec& b, const Mat2& a, int n_max) {
    require_hermitian(a);
    // branch j starts from the measured eigenstate P_j
    const Trajectory from0 = iterate(QubitState(1.0, 0.0), m, b, n_max, IterationPath::matrix);
    const Trajectory from1 = iterate(QubitState(0.0, 0.0), m, b, n_max, IterationPath::matrix);
    std::vector<double> out;
    out.reserve(from0.size());
    for (std::size_t n = 0; n < from0.size(); ++n) {
        const Mat2 delta0 = from0[n].to_matrix() - projector0();
        const Mat2 delta1 = from1[n].to_matrix() - projector1();
        const double t0 = (delta0 * a).trace().real();
        const double t1 = (delta1 * a).trace().real();
        out.push_back(std::sqrt(b.p() * t0 * t0 + b.q() * t1 * t1));
    }
    return out;
}

double fd_protocol_simulated(const MachineParams& m, const BathSpec& b, const Mat2& a, int n) {
    return fd_protocol_series(m, b, a, n).back();
}

double fd_closed_form(const Mat2& a, const BathSpec& b, double phi, int n) {
    require_hermitian(a);
    return dissipation(phi, n) * b.inverse_two_cosh() * std::abs((a * pauli_z()).trace().real());
}

double fd_closed_form_continuous(const Mat2& a, const BathSpec& b, double t, double T1) {
    require_hermitian(a);
    const double d = 1.0 - std::exp(-t / T1);
    return d * b.inverse_two_cosh() * std::abs((a * pauli_z()).trace().real());
}

RelaxationFit fit_relaxation(const Trajectory& traj, double p, double tau0) {
    if (!(tau0 > 0.0)) throw std::invalid_argument("fit_relaxation: tau0 must be > 0");
    std::vector<double> td, yd, tk, yk;
    for (std::size_t n = kFitSkip; n < traj.size(); ++n) {
        const double t = static_cast<double>(n) * tau0;
        const double dd = std::abs(traj[n].d() - p);
        const double kk = std::abs(traj[n].k());
        if (dd > kFitFloor && td.size() == n - kFitSkip) {
            td.push_back(t);
            yd.push_back(std::log(dd));
        }
        if (kk > kFitFloor && tk.size() == n - kFitSkip) {
            tk.push_back(t);
            yk.push_back(std::log(kk));
        }
    }
    if (td.size() < 2 || tk.size() < 2) {
        throw std::invalid_argument("fit_relaxation: too few nonzero samples after the skip window");
    }
    return {-1.0 / ls_slope(td, yd), -1.0 / ls_slope(tk, yk)};
}

}  // namespace qcollide
