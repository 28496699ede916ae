// linalg.hpp — dense complex linear algebra on 2^k-dimensional qubit spaces
//
// Qubit ordering: qubit 0 is the system, qubits 1..n are ancillas in collision
// order. Tensor products follow qubit order, so qubit 0 is the leftmost factor
// and the most significant bit of a basis index.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qcollide {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using MatX = Eigen::MatrixXcd;
using Vec2 = Eigen::Vector2cd;
using VecX = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 12;

struct Tolerances {
    double herm = 1e-10;
    double trace = 1e-10;
    double psd = 1e-9;
};

// Dense complex matrix with power-of-two dimension in [2, 2^12] and finite entries.
class ComplexSquareMatrix {
public:
    explicit ComplexSquareMatrix(MatX m);

    static ComplexSquareMatrix identity(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    int num_qubits() const;
    const MatX& mat() const { return m_; }
    cplx operator()(int r, int c) const { return m_(r, c); }

private:
    MatX m_;
};

// Hermitian, unit-trace, positive semidefinite within the given tolerances.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexSquareMatrix m, const Tolerances& tol = {});
    explicit DensityMatrix(MatX m, const Tolerances& tol = {});

    static DensityMatrix pure(const VecX& psi);

    int dim() const { return m_.dim(); }
    int num_qubits() const { return m_.num_qubits(); }
    const MatX& mat() const { return m_.mat(); }
    const ComplexSquareMatrix& matrix() const { return m_; }

private:
    ComplexSquareMatrix m_;
};

// Single-qubit state d·P0 + (1-d)·P1 + k|0><1| + k*|1><0|.
class QubitState {
public:
    // Throws std::invalid_argument unless d in [0,1] and |k|^2 <= d(1-d) (within tol).
    QubitState(double d, cplx k, double tol = 1e-12);

    static QubitState from_matrix(const Mat2& rho, const Tolerances& tol = {});

    double d() const { return d_; }
    cplx k() const { return k_; }
    Mat2 to_matrix() const;

private:
    double d_;
    cplx k_;
};

Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
Mat2 projector0();
Mat2 projector1();

bool is_power_of_two_dim(long dim);
int qubit_count(long dim);

// Kronecker product. The strong-typed form enforces the 2^12 dimension cap.
MatX kron(const MatX& a, const MatX& b);
ComplexSquareMatrix tensor(const ComplexSquareMatrix& a, const ComplexSquareMatrix& b);

// Reduced matrix on the kept qubits (ascending order is imposed).
MatX partial_trace(const MatX& rho, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

double trace_distance(const MatX& rho, const MatX& sigma);
// <psi|sigma|psi> for normalized psi, clamped to [0,1].
double fidelity(const VecX& psi, const MatX& sigma);
bool is_unitary(const MatX& u, double tol);
bool validate_density(const MatX& rho, const Tolerances& tol = {});

// 1 - |Tr(a^H b)|/dim: zero iff a and b agree up to a global phase.
double phase_insensitive_distance(const MatX& a, const MatX& b);

// exp(iH) for Hermitian H via its eigendecomposition.
MatX expi_hermitian(const MatX& h);

double max_abs(const MatX& m);

}  // namespace qcollide
