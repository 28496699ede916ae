#include "qcollide/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "qcollide/rng.hpp"

namespace qcollide {

bool is_power_of_two_dim(long dim) {
    return dim >= 2 && dim <= (1L << kMaxQubits) && (dim & (dim - 1)) == 0;
}

int qubit_count(long dim) {
    int n = 0;
    while ((1L << n) < dim) ++n;
    return n;
}

ComplexSquareMatrix::ComplexSquareMatrix(MatX m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
        throw std::invalid_argument("matrix is not square");
    }
    if (!is_power_of_two_dim(m_.rows())) {
        throw std::invalid_argument("matrix dimension " + std::to_string(m_.rows()) +
                                    " is not a power of two in [2, 4096]");
    }
    if (!m_.allFinite()) {
        throw std::invalid_argument("matrix has non-finite entries");
    }
}

ComplexSquareMatrix ComplexSquareMatrix::identity(int dim) {
    return ComplexSquareMatrix(MatX::Identity(dim, dim));
}

int ComplexSquareMatrix::num_qubits() const { return qubit_count(m_.rows()); }

DensityMatrix::DensityMatrix(ComplexSquareMatrix m, const Tolerances& tol) : m_(std::move(m)) {
    if (!validate_density(m_.mat(), tol)) {
        throw std::invalid_argument("not a valid density matrix");
    }
}

DensityMatrix::DensityMatrix(MatX m, const Tolerances& tol)
    : DensityMatrix(ComplexSquareMatrix(std::move(m)), tol) {}

DensityMatrix DensityMatrix::pure(const VecX& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw std::invalid_argument("zero state vector");
    VecX v = psi / n;
    return DensityMatrix(MatX(v * v.adjoint()));
}

QubitState::QubitState(double d, cplx k, double tol) : d_(d), k_(k) {
    if (!std::isfinite(d) || !std::isfinite(k.real()) || !std::isfinite(k.imag())) {
        throw std::invalid_argument("qubit state has non-finite parameters");
    }
    if (d < -tol || d > 1.0 + tol) {
        throw std::invalid_argument("population d outside [0,1]");
    }
    if (std::norm(k) > d * (1.0 - d) + tol) {
        throw std::invalid_argument("coherence |k| exceeds sqrt(d(1-d))");
    }
}

QubitState QubitState::from_matrix(const Mat2& rho, const Tolerances& tol) {
    if (!validate_density(rho, tol)) {
        throw std::invalid_argument("not a valid qubit density matrix");
    }
    return QubitState(rho(0, 0).real(), rho(0, 1), tol.psd);
}

Mat2 QubitState::to_matrix() const {
    Mat2 m;
    m << cplx(d_, 0.0), k_, std::conj(k_), cplx(1.0 - d_, 0.0);
    return m;
}

Mat2 pauli_x() {
    Mat2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Mat2 pauli_y() {
    Mat2 m;
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}

Mat2 pauli_z() {
    Mat2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Mat2 projector0() {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 1.0;
    return m;
}

Mat2 projector1() {
    Mat2 m = Mat2::Zero();
    m(1, 1) = 1.0;
    return m;
}

MatX kron(const MatX& a, const MatX& b) {
    MatX out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

ComplexSquareMatrix tensor(const ComplexSquareMatrix& a, const ComplexSquareMatrix& b) {
    if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
        throw std::invalid_argument("tensor product exceeds 2^12 dimensions");
    }
    return ComplexSquareMatrix(kron(a.mat(), b.mat()));
}

MatX partial_trace(const MatX& rho, std::span<const int> keep) {
    if (rho.rows() != rho.cols() || !is_power_of_two_dim(rho.rows())) {
        throw std::invalid_argument("partial_trace needs a square 2^n matrix");
    }
    const int n = qubit_count(rho.rows());
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");

    std::vector<int> kept(keep.begin(), keep.end());
    std::sort(kept.begin(), kept.end());
    if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
        throw std::invalid_argument("partial_trace: duplicate qubit index");
    }
    if (kept.front() < 0 || kept.back() >= n) {
        throw std::out_of_range("partial_trace: qubit index out of range");
    }

    long kept_mask = 0;
    for (int q : kept) kept_mask |= 1L << (n - 1 - q);
    const int nk = static_cast<int>(kept.size());

    // Scatter a kept-subsystem index into the full index (kept bits only).
    std::vector<long> scatter(1L << nk, 0);
    for (long small = 0; small < (1L << nk); ++small) {
        long full = 0;
        for (int i = 0; i < nk; ++i) {
            if (small & (1L << (nk - 1 - i))) full |= 1L << (n - 1 - kept[i]);
        }
        scatter[small] = full;
    }
    std::vector<long> gather(1L << n, 0);
    for (long small = 0; small < (1L << nk); ++small) gather[scatter[small]] = small;

    MatX out = MatX::Zero(1L << nk, 1L << nk);
    for (long r = 0; r < rho.rows(); ++r) {
        const long traced = r & ~kept_mask;
        const long rk = gather[r & kept_mask];
        for (long ck = 0; ck < (1L << nk); ++ck) {
            out(rk, ck) += rho(r, traced | scatter[ck]);
        }
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
    return DensityMatrix(partial_trace(rho.mat(), keep));
}

double trace_distance(const MatX& rho, const MatX& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    MatX diff = rho - sigma;
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatX> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double fidelity(const VecX& psi, const MatX& sigma) {
    if (psi.size() != sigma.rows()) throw std::invalid_argument("fidelity: dimension mismatch");
    const double f = (psi.adjoint() * sigma * psi)(0, 0).real();
    return std::clamp(f, 0.0, 1.0);
}

bool is_unitary(const MatX& u, double tol) {
    if (u.rows() != u.cols()) return false;
    const MatX g = u.adjoint() * u - MatX::Identity(u.rows(), u.cols());
    return max_abs(g) <= tol;
}

bool validate_density(const MatX& rho, const Tolerances& tol) {
    if (rho.rows() != rho.cols() || rho.rows() == 0 || !rho.allFinite()) return false;
    if (max_abs(rho - rho.adjoint()) > tol.herm) return false;
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > tol.trace) return false;
    const MatX h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<MatX> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol.psd;
}

double phase_insensitive_distance(const MatX& a, const MatX& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("phase_insensitive_distance: dimension mismatch");
    }
    const cplx overlap = (a.adjoint() * b).trace();
    return 1.0 - std::abs(overlap) / static_cast<double>(a.rows());
}

MatX expi_hermitian(const MatX& h) {
    Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (h + h.adjoint()));
    const auto& vals = es.eigenvalues();
    VecX phases(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) phases(i) = std::polar(1.0, vals(i));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double max_abs(const MatX& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// rng.hpp

double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Mat2 haar_qubit_unitary(Rng& rng) {
    const double eta = std::asin(std::sqrt(uniform01(rng)));
    const double chi = uniform(rng, 0.0, 2.0 * M_PI);
    const double psi = uniform(rng, 0.0, 2.0 * M_PI);
    const double global = uniform(rng, 0.0, 2.0 * M_PI);
    const cplx a = std::polar(std::cos(eta), chi);
    const cplx b = std::polar(std::sin(eta), psi);
    Mat2 w;
    w << a, -std::conj(b), b, std::conj(a);
    return std::polar(1.0, global) * w;
}

VecX random_pure_state(int dim, Rng& rng) {
    VecX v(dim);
    for (int i = 0; i < dim; ++i) {
        const double re = standard_normal(rng);
        const double im = standard_normal(rng);
        v(i) = cplx(re, im);
    }
    return v / v.norm();
}

MatX random_density(int dim, Rng& rng) {
    MatX g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const double re = standard_normal(rng);
            const double im = standard_normal(rng);
            g(i, j) = cplx(re, im);
        }
    }
    MatX rho = g * g.adjoint();
    return rho / rho.trace().real();
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qcollide
