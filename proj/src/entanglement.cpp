#include "qcollide/entanglement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qcollide {
namespace {

constexpr double kRankCut = 1e-13;

Mat4 spin_flip_operator() {
    const Mat2 y = pauli_y();
    return kron(y, y);
}

// The squared l_i are the eigenvalues of sqrt(rho) rho_tilde sqrt(rho). Writing
// rho = E W E^H, they are the squared singular values of the symmetric matrix
// tau = W^1/2 E^H Y conj(E) W^1/2. Eigenvalues of rho below kRankCut are treated
// as exact zeros so that rank-deficient states keep full precision.
double concurrence_unchecked(const Mat4& rho) {
    const Mat4 herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat4> es(herm);
    Eigen::Vector4d roots;
    for (int i = 0; i < 4; ++i) {
        const double w = es.eigenvalues()(i);
        roots(i) = w > kRankCut ? std::sqrt(w) : 0.0;
    }
    const Mat4& e = es.eigenvectors();
    const Mat4 tau = roots.cast<cplx>().asDiagonal() * (e.adjoint() * spin_flip_operator() * e.conjugate()) *
                     roots.cast<cplx>().asDiagonal();
    Eigen::JacobiSVD<Mat4> svd(tau);
    std::array<double, 4> l{};
    for (int i = 0; i < 4; ++i) l[i] = svd.singularValues()(i);
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

Vec2 bloch_state(double theta, double phi) {
    return Vec2(std::cos(theta / 2), std::polar(std::sin(theta / 2), phi));
}

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Nelder-Mead minimization in two variables.
Point2 nelder_mead(const std::function<double(Point2)>& f, Point2 start, double step, double tol,
                   int max_iter) {
    std::array<Point2, 3> s{start, {start.x + step, start.y}, {start.x, start.y + step}};
    std::array<double, 3> v{f(s[0]), f(s[1]), f(s[2])};
    auto lerp = [](Point2 a, Point2 b, double t) { return Point2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; };

    for (int it = 0; it < max_iter; ++it) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
        const int best = order[0], mid = order[1], worst = order[2];

        const double size = std::max(std::hypot(s[mid].x - s[best].x, s[mid].y - s[best].y),
                                     std::hypot(s[worst].x - s[best].x, s[worst].y - s[best].y));
        if (size < tol) break;

        const Point2 centroid{0.5 * (s[best].x + s[mid].x), 0.5 * (s[best].y + s[mid].y)};
        const Point2 refl = lerp(centroid, s[worst], -1.0);
        const double fr = f(refl);
        if (fr < v[best]) {
            const Point2 exp = lerp(centroid, s[worst], -2.0);
            const double fe = f(exp);
            if (fe < fr) {
                s[worst] = exp;
                v[worst] = fe;
            } else {
                s[worst] = refl;
                v[worst] = fr;
            }
        } else if (fr < v[mid]) {
            s[worst] = refl;
            v[worst] = fr;
        } else {
            const bool outside = fr < v[worst];
            const Point2 con = outside ? lerp(centroid, refl, 0.5) : lerp(centroid, s[worst], 0.5);
            const double fc = f(con);
            if (fc < (outside ? fr : v[worst])) {
                s[worst] = con;
                v[worst] = fc;
            } else {
                for (int i : {mid, worst}) {
                    s[i] = lerp(s[best], s[i], 0.5);
                    v[i] = f(s[i]);
                }
            }
        }
    }
    const int best = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
    return s[best];
}

}  // namespace

double concurrence(const Mat4& rho, const Tolerances& tol) {
    if (!validate_density(rho, tol)) throw std::invalid_argument("concurrence: invalid density matrix");
    return concurrence_unchecked(rho);
}

double concurrence(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw std::invalid_argument("concurrence needs a two-qubit state");
    return concurrence_unchecked(Mat4(rho.mat()));
}

EntanglingPowerResult entangling_power(const MachineParams& m, const BathSpec& b, const BlochGrid& grid,
                                       double refine_tol) {
    if (grid.n_theta < 32 || grid.n_phi < 64) {
        throw std::invalid_argument("entangling_power needs at least a 32x64 Bloch grid");
    }
    const Mat4 u = build_machine(m);
    const Mat2 xi = bath_state(b);
    auto objective = [&](double theta, double phi) {
        const Vec2 psi = bloch_state(theta, phi);
        const Mat2 rho = psi * psi.adjoint();
        const Mat4 out = u * Mat4(kron(rho, xi)) * u.adjoint();
        return concurrence_unchecked(out);
    };

    EntanglingPowerResult best;
    best.value = -1.0;
    for (int i = 0; i < grid.n_theta; ++i) {
        const double theta = M_PI * i / (grid.n_theta - 1);
        for (int j = 0; j < grid.n_phi; ++j) {
            const double phi = 2.0 * M_PI * j / grid.n_phi;
            const double c = objective(theta, phi);
            if (c > best.value) {
                best.value = c;
                best.bloch_theta = theta;
                best.bloch_phi = phi;
            }
        }
    }

    const double step = M_PI / (grid.n_theta - 1);
    const Point2 refined = nelder_mead([&](Point2 pt) { return -objective(pt.x, pt.y); },
                                       {best.bloch_theta, best.bloch_phi}, step, refine_tol, 4000);
    const double refined_value = objective(refined.x, refined.y);
    if (refined_value > best.value) {
        best.value = refined_value;
        // fold the polar angle back into [0, pi]
        double theta = std::remainder(refined.x, 2.0 * M_PI);
        double phi = refined.y;
        if (theta < 0.0) {
            theta = -theta;
            phi += M_PI;
        }
        best.bloch_theta = theta;
        best.bloch_phi = std::fmod(std::fmod(phi, 2.0 * M_PI) + 2.0 * M_PI, 2.0 * M_PI);
    }
    best.argmax_state = bloch_state(best.bloch_theta, best.bloch_phi);
    return best;
}

double entangling_power_closed(double p, double phi) { return p * std::sin(2.0 * phi); }

}  // namespace qcollide
