#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace oracle {

namespace {

int bit_of(long index, int qubit, int num_qubits) {
    return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1);
}

Mat2 trace_out_second(const Mat4& x) {
    Mat2 g = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) g(i, j) += x(2 * i + k, 2 * j + k);
    return g;
}

Mat2 trace_out_first(const Mat4& x) {
    Mat2 g = Mat2::Zero();
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i) g(k, l) += x(2 * i + k, 2 * i + l);
    return g;
}

Mat4 kron2(const Mat2& a, const Mat2& b) { return Mat4(kron_by_index(a, b)); }

// The unitary W maximizing |Tr(W G)|, namely V U^H for G = U S V^H.
Mat2 best_unitary(const Mat2& g) {
    Eigen::JacobiSVD<Mat2> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().adjoint();
}

}  // namespace

MatX kron_by_index(const MatX& a, const MatX& b) {
    MatX out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            for (long k = 0; k < b.rows(); ++k)
                for (long l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

MatX partial_trace_by_sum(const MatX& rho, int num_qubits, const std::vector<int>& keep) {
    std::vector<int> kept = keep;
    std::sort(kept.begin(), kept.end());
    std::vector<int> traced;
    for (int q = 0; q < num_qubits; ++q) {
        if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);
    }
    const long dim_out = 1L << kept.size();
    const long dim_env = 1L << traced.size();
    auto compose = [&](long sys, long env) {
        long idx = 0;
        for (int q = 0; q < num_qubits; ++q) {
            int bit = 0;
            const auto ks = std::find(kept.begin(), kept.end(), q);
            if (ks != kept.end()) {
                const int pos = static_cast<int>(ks - kept.begin());
                bit = static_cast<int>((sys >> (kept.size() - 1 - pos)) & 1);
            } else {
                const int pos = static_cast<int>(std::find(traced.begin(), traced.end(), q) - traced.begin());
                bit = static_cast<int>((env >> (traced.size() - 1 - pos)) & 1);
            }
            idx = (idx << 1) | bit;
        }
        return idx;
    };
    MatX out = MatX::Zero(dim_out, dim_out);
    for (long r = 0; r < dim_out; ++r)
        for (long c = 0; c < dim_out; ++c)
            for (long e = 0; e < dim_env; ++e) out(r, c) += rho(compose(r, e), compose(c, e));
    return out;
}

Mat2 channel_by_sum(const Mat4& u, const Mat2& rho, const Mat2& xi) {
    Mat4 joint;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 2; ++l) joint(2 * i + k, 2 * j + l) = rho(i, j) * xi(k, l);
    Mat4 out = Mat4::Zero();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) out(r, c) += u(r, a) * joint(a, b) * std::conj(u(c, b));
    return trace_out_second(out);
}

Mat4 machine_from_basis_action(double phi, double theta, double alpha) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const cplx i(0.0, 1.0);
    Mat4 u = Mat4::Zero();
    u(0, 0) = 1.0;
    u(3, 3) = 1.0;
    const cplx e01 = std::exp(i * (theta + alpha));
    const cplx e10 = std::exp(i * (theta - alpha));
    u(1, 1) = e01 * c;  // |01> -> |01>
    u(2, 1) = e01 * i * s;  // |01> -> |10>
    u(2, 2) = e10 * c;
    u(1, 2) = e10 * i * s;
    return u;
}

Mat4 expi_via_bell_basis(const Mat4& h) {
    const double r = 1.0 / std::sqrt(2.0);
    Mat4 bell = Mat4::Zero();
    bell(0, 0) = 1.0;   // |00>
    bell(3, 1) = 1.0;   // |11>
    bell(1, 2) = r;     // Psi+
    bell(2, 2) = r;
    bell(1, 3) = r;     // Psi-
    bell(2, 3) = -r;
    const Mat4 hb = bell.adjoint() * h * bell;
    // The |00>, |11> block may be non-diagonal; exponentiate it via its own eigenbasis.
    Eigen::SelfAdjointEigenSolver<Mat2> block(Mat2(hb.topLeftCorner<2, 2>()));
    Mat4 eb = Mat4::Zero();
    eb.topLeftCorner<2, 2>() = block.eigenvectors() *
                               block.eigenvalues().unaryExpr([](double x) { return std::exp(cplx(0, x)); }).asDiagonal() *
                               block.eigenvectors().adjoint();
    for (int k = 2; k < 4; ++k) {
        if (std::abs(hb(k, 0)) + std::abs(hb(k, 1)) + std::abs(hb(k, 5 - k)) > 1e-12) {
            throw std::invalid_argument("expi_via_bell_basis: H is not Bell-block diagonal");
        }
        eb(k, k) = std::exp(cplx(0, hb(k, k).real()));
    }
    return bell * eb * bell.adjoint();
}

double concurrence_brute(const Mat4& rho) {
    Mat2 y;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    Mat4 yy;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) yy(2 * i + k, 2 * j + l) = y(i, j) * y(k, l);
    const Mat4 flipped = yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Mat4> es(rho * flipped, false);
    std::vector<double> l;
    for (int i = 0; i < 4; ++i) l.push_back(std::sqrt(std::max(es.eigenvalues()(i).real(), 0.0)));
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

MatX embed_gate(const Mat4& gate, int num_qubits, int qa, int qb) {
    const long dim = 1L << num_qubits;
    const long mask = (1L << (num_qubits - 1 - qa)) | (1L << (num_qubits - 1 - qb));
    MatX full = MatX::Zero(dim, dim);
    for (long r = 0; r < dim; ++r) {
        for (long c = 0; c < dim; ++c) {
            if ((r & ~mask) != (c & ~mask)) continue;
            const int gr = 2 * bit_of(r, qa, num_qubits) + bit_of(r, qb, num_qubits);
            const int gc = 2 * bit_of(c, qa, num_qubits) + bit_of(c, qb, num_qubits);
            full(r, c) = gate(gr, gc);
        }
    }
    return full;
}

std::vector<cplx> apply_gate_dense(const std::vector<cplx>& state, int num_qubits, int qa, int qb,
                                   const qcollide::kernels::Gate4& gate) {
    Mat4 g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = gate[4 * r + c];
    const MatX full = embed_gate(g, num_qubits, qa, qb);
    const VecX in = Eigen::Map<const VecX>(state.data(), static_cast<long>(state.size()));
    const VecX out = full * in;
    return {out.data(), out.data() + out.size()};
}

double lu_overlap(const Mat4& u1, const Mat4& u2, int restarts, qcollide::Rng& rng) {
    double best = 0.0;
    for (int r = 0; r < restarts; ++r) {
        Mat2 a = qcollide::haar_qubit_unitary(rng);
        Mat2 b = qcollide::haar_qubit_unitary(rng);
        Mat2 c = qcollide::haar_qubit_unitary(rng);
        Mat2 d = qcollide::haar_qubit_unitary(rng);
        const Mat2 id = Mat2::Identity();
        double value = 0.0;
        for (int sweep = 0; sweep < 500; ++sweep) {
            // |Tr((A(x)B) K)| with K = U1 (C(x)D) U2^H
            Mat4 k = u1 * kron2(c, d) * u2.adjoint();
            a = best_unitary(trace_out_second(kron2(id, b) * k));
            b = best_unitary(trace_out_first(k * kron2(a, id)));
            // |Tr((C(x)D) L)| with L = U2^H (A(x)B) U1
            const Mat4 l = u2.adjoint() * kron2(a, b) * u1;
            c = best_unitary(trace_out_second(kron2(id, d) * l));
            d = best_unitary(trace_out_first(l * kron2(c, id)));
            k = u1 * kron2(c, d) * u2.adjoint();
            const double next = std::abs((kron2(a, b) * k).trace()) / 4.0;
            if (std::abs(next - value) < 1e-15) {
                value = next;
                break;
            }
            value = next;
        }
        best = std::max(best, value);
    }
    return best;
}

}  // namespace oracle
