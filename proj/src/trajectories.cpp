#include "qcollide/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

namespace qcollide {
namespace {

kernels::Gate4 to_gate(const Mat4& u) {
    kernels::Gate4 g{};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) g[4 * r + c] = u(r, c);
    }
    return g;
}

// Runs body(i) for i in [0, count) on up to hardware_concurrency threads.
// Each index writes only its own output slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, Body body) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

// Pure state drawn from the eigen-decomposition of rho0.
Vec2 sample_initial_state(const Mat2& rho0, Rng& rng) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (rho0 + rho0.adjoint()));
    const double w0 = std::max(es.eigenvalues()(0), 0.0);
    const double w1 = std::max(es.eigenvalues()(1), 0.0);
    const int pick = uniform01(rng) * (w0 + w1) < w0 ? 0 : 1;
    return es.eigenvectors().col(pick);
}

void validate_state_input(const Mat2& rho0) {
    if (!validate_density(rho0)) throw std::invalid_argument("initial system state is not a density matrix");
}

void run_collisions(JointState& js, CollisionRecord& rec, int first_label, int count, const MachineParams& m,
                    const BathSpec& b, Rng& rng, const ForwardOptions& opt) {
    const Mat4 u = build_machine(m);
    const Mat2 xi = bath_state(b);
    for (int i = 0; i < count; ++i) {
        const int label = first_label + i;
        CollisionEntry entry{label, m, -1};
        if (js.mode() == Mode::exact) {
            js.append_mixed_ancilla(label, xi);
        } else {
            if (static_cast<int>(js.live_ancillas().size()) >= opt.max_live_ancillas) {
                const int oldest = js.live_ancillas().front();
                rec.retired.push_back({oldest, js.retire(oldest, rng)});
            }
            entry.outcome = uniform01(rng) < b.p() ? 0 : 1;
            js.append_basis_ancilla(label, entry.outcome);
        }
        js.apply(u, 0, js.qubit_of(label));
        rec.collisions.push_back(entry);
    }
}

void check_run_size(int n, Mode mode, const ForwardOptions& opt) {
    if (n < 0) throw std::invalid_argument("collision count must be non-negative");
    if (mode == Mode::exact && n > kMaxExactAncillas) {
        throw std::invalid_argument("exact mode supports at most 11 ancillas");
    }
    if (mode == Mode::sampled) {
        if (opt.max_live_ancillas < 1 || opt.max_live_ancillas > kMaxLiveSampledAncillas) {
            throw std::invalid_argument("sampled mode keeps between 1 and 20 live ancillas");
        }
        if (!opt.retire_when_full && n > opt.max_live_ancillas) {
            throw std::invalid_argument("sampled mode supports at most " + std::to_string(opt.max_live_ancillas) +
                                        " ancillas without retirement");
        }
    }
}

FidelityStats summarize(const std::vector<double>& xs) {
    FidelityStats s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / s.count;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
    s.std_error = s.stddev / std::sqrt(static_cast<double>(s.count));
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    return s;
}

}  // namespace

JointState JointState::exact(const Mat2& rho0) {
    validate_state_input(rho0);
    std::vector<cplx> data(4);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) data[2 * r + c] = rho0(r, c);
    }
    return JointState(Mode::exact, 1, std::move(data));
}

JointState JointState::sampled(const Vec2& psi0) {
    const double n = psi0.norm();
    if (!(n > 0.0) || !psi0.allFinite()) throw std::invalid_argument("initial state vector must be nonzero");
    return JointState(Mode::sampled, 1, {psi0(0) / n, psi0(1) / n});
}

int JointState::qubit_of(int ancilla) const {
    const auto it = std::find(ancillas_.begin(), ancillas_.end(), ancilla);
    if (it == ancillas_.end()) throw std::invalid_argument("ancilla " + std::to_string(ancilla) + " is not live");
    return static_cast<int>(it - ancillas_.begin()) + 1;
}

Mat2 JointState::reduced_system() const {
    if (mode_ == Mode::sampled) {
        const std::size_t half = data_.size() / 2;
        const std::span<const cplx> top(data_.data(), half);
        const std::span<const cplx> bot(data_.data() + half, half);
        Mat2 rho;
        const cplx off = kernels::cdot(bot, top);
        rho << kernels::norm2(top), off, std::conj(off), kernels::norm2(bot);
        return rho;
    }
    return reduced_qubit(0);
}

Mat2 JointState::reduced_qubit(int qubit) const {
    if (qubit < 0 || qubit >= num_qubits_) throw std::out_of_range("reduced_qubit: qubit out of range");
    const std::size_t dim = std::size_t{1} << num_qubits_;
    const int shift = num_qubits_ - 1 - qubit;
    const std::size_t mask = std::size_t{1} << shift;
    Mat2 out = Mat2::Zero();
    for (std::size_t r = 0; r < dim; ++r) {
        const int a = (r & mask) ? 1 : 0;
        for (int b = 0; b < 2; ++b) {
            const std::size_t c = (r & ~mask) | (b ? mask : 0);
            if (mode_ == Mode::exact) {
                out(a, b) += data_[r * dim + c];
            } else {
                out(a, b) += data_[r] * std::conj(data_[c]);
            }
        }
    }
    return out;
}

double JointState::trace() const {
    if (mode_ == Mode::sampled) return kernels::norm2(data_);
    const std::size_t dim = std::size_t{1} << num_qubits_;
    double t = 0.0;
    for (std::size_t i = 0; i < dim; ++i) t += data_[i * dim + i].real();
    return t;
}

double JointState::purity() const {
    const double n2 = kernels::norm2(data_);
    return mode_ == Mode::sampled ? n2 * n2 : n2;
}

void JointState::apply(const Mat4& u, int qubit_a, int qubit_b) {
    if (mode_ == Mode::sampled) {
        kernels::apply_gate2(data_, num_qubits_, qubit_a, qubit_b, to_gate(u));
        return;
    }
    // rho -> U rho U^H: U on the row qubits, conj(U) on the column qubits.
    const int doubled = 2 * num_qubits_;
    kernels::apply_gate2(data_, doubled, qubit_a, qubit_b, to_gate(u));
    kernels::apply_gate2(data_, doubled, num_qubits_ + qubit_a, num_qubits_ + qubit_b, to_gate(u.conjugate()));
}

void JointState::append_mixed_ancilla(int label, const Mat2& xi) {
    if (mode_ != Mode::exact) throw std::logic_error("mixed ancillas need exact mode");
    if (num_qubits_ + 1 > kMaxQubits) throw std::invalid_argument("exact joint state exceeds 12 qubits");
    const std::size_t dim = std::size_t{1} << num_qubits_;
    const std::size_t new_dim = dim * 2;
    std::vector<cplx> next(new_dim * new_dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            const cplx v = data_[r * dim + c];
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) next[((r << 1) | a) * new_dim + ((c << 1) | b)] = v * xi(a, b);
            }
        }
    }
    data_ = std::move(next);
    ++num_qubits_;
    ancillas_.push_back(label);
}

void JointState::append_basis_ancilla(int label, int bit) {
    if (mode_ != Mode::sampled) throw std::logic_error("basis ancillas need sampled mode");
    if (num_qubits_ + 1 > kMaxLiveSampledAncillas + 1) {
        throw std::invalid_argument("sampled joint state exceeds 21 qubits");
    }
    std::vector<cplx> next(data_.size() * 2, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < data_.size(); ++i) next[(i << 1) | static_cast<std::size_t>(bit)] = data_[i];
    data_ = std::move(next);
    ++num_qubits_;
    ancillas_.push_back(label);
}

int JointState::retire(int label, Rng& rng) {
    if (mode_ != Mode::sampled) throw std::logic_error("retirement needs sampled mode");
    const int qubit = qubit_of(label);
    const int shift = num_qubits_ - 1 - qubit;
    const std::size_t mask = std::size_t{1} << shift;
    double p0 = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const double w = std::norm(data_[i]);
        total += w;
        if (!(i & mask)) p0 += w;
    }
    const int outcome = uniform01(rng) * total < p0 ? 0 : 1;
    const double keep = outcome == 0 ? p0 : total - p0;
    const double scale = 1.0 / std::sqrt(keep);
    std::vector<cplx> next(data_.size() / 2);
    const std::size_t low = mask - 1;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (((i & mask) != 0) != (outcome == 1)) continue;
        next[((i >> (shift + 1)) << shift) | (i & low)] = data_[i] * scale;
    }
    data_ = std::move(next);
    --num_qubits_;
    ancillas_.erase(ancillas_.begin() + (qubit - 1));
    return outcome;
}

ForwardResult forward_run(const Mat2& rho0, int n, const MachineParams& m, const BathSpec& b, Mode mode,
                          std::uint64_t seed, const ForwardOptions& opt) {
    validate_state_input(rho0);
    m.validate();
    check_run_size(n, mode, opt);
    Rng rng(seed);
    JointState js = mode == Mode::exact ? JointState::exact(rho0) : JointState::sampled(sample_initial_state(rho0, rng));
    CollisionRecord rec;
    run_collisions(js, rec, 1, n, m, b, rng, opt);
    return {std::move(js), std::move(rec)};
}

Mat2 reverse_run(JointState js, const CollisionRecord& rec, std::span<const int> order) {
    if (!rec.reversible()) throw std::invalid_argument("record has measured-out ancillas; cannot reverse");
    const int n = static_cast<int>(rec.collisions.size());
    std::vector<int> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
        if (sorted[i] != i) throw std::invalid_argument("reversal order is not a permutation of the collisions");
    }
    if (static_cast<int>(sorted.size()) != n) {
        throw std::invalid_argument("reversal order does not cover every collision");
    }
    for (int idx : order) {
        const CollisionEntry& e = rec.collisions[idx];
        js.apply(build_machine(e.machine).adjoint(), 0, js.qubit_of(e.ancilla));
    }
    return js.reduced_system();
}

std::vector<int> correct_reverse_order(int n) {
    std::vector<int> order(n);
    std::iota(order.rbegin(), order.rend(), 0);
    return order;
}

ReconstructionReport reconstruction_experiment(const Vec2& psi0, int n, const MachineParams& m,
                                               const BathSpec& b, Mode mode, int trials,
                                               std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("reconstruction needs at least two collisions");
    if (trials < 1) throw std::invalid_argument("reconstruction needs trials >= 1");
    m.validate();
    const ForwardOptions opt;
    check_run_size(n, mode, opt);
    const Vec2 psi = psi0 / psi0.norm();

    Rng rng(seed);
    JointState js = mode == Mode::exact ? JointState::exact(psi * psi.adjoint()) : JointState::sampled(psi);
    CollisionRecord rec;
    run_collisions(js, rec, 1, n, m, b, rng, opt);

    ReconstructionReport report;
    const std::vector<int> correct = correct_reverse_order(n);
    report.correct_fidelity = fidelity(psi, reverse_run(js, rec, correct));
    report.no_key_fidelity = fidelity(psi, js.reduced_system());

    if (n <= kEnumerateUpTo) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            if (perm != correct) report.wrong_orders.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        report.enumerated = true;
    } else {
        double total = 1.0;
        for (int i = 2; i <= n; ++i) total *= i;
        const std::size_t want = static_cast<std::size_t>(std::min<double>(trials, total - 1.0));
        Rng order_rng(sub_seed(seed, 1));
        std::set<std::vector<int>> seen;
        std::vector<int> perm(n);
        while (report.wrong_orders.size() < want) {
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = n - 1; i > 0; --i) {
                std::swap(perm[i], perm[uniform_index(order_rng, static_cast<std::size_t>(i) + 1)]);
            }
            if (perm == correct || !seen.insert(perm).second) continue;
            report.wrong_orders.push_back(perm);
        }
        report.enumerated = want + 1 == static_cast<std::size_t>(total);
    }

    report.wrong_fidelities.assign(report.wrong_orders.size(), 0.0);
    parallel_for(report.wrong_orders.size(), [&](std::size_t i) {
        report.wrong_fidelities[i] = fidelity(psi, reverse_run(js, rec, report.wrong_orders[i]));
    });
    report.wrong_order = summarize(report.wrong_fidelities);
    return report;
}

ReducedStatesReport reduced_states_check(const JointState& js, const BathSpec& b) {
    const Mat2 xi = bath_state(b);
    ReducedStatesReport report;
    report.system_distance = trace_distance(js.reduced_system(), xi);
    for (int q = 1; q < js.num_qubits(); ++q) {
        report.ancilla_distances.push_back(trace_distance(js.reduced_qubit(q), xi));
    }
    return report;
}

std::vector<PopulationEstimate> sample_populations(const Mat2& rho0, std::span<const int> steps,
                                                   const MachineParams& m, const BathSpec& b,
                                                   int trajectories, std::uint64_t seed,
                                                   int max_live_ancillas) {
    validate_state_input(rho0);
    m.validate();
    if (trajectories < 2) throw std::invalid_argument("sample_populations needs at least two trajectories");
    if (steps.empty()) return {};
    if (*std::min_element(steps.begin(), steps.end()) < 0) throw std::invalid_argument("negative step");
    const int last = *std::max_element(steps.begin(), steps.end());
    ForwardOptions opt;
    opt.max_live_ancillas = max_live_ancillas;
    opt.retire_when_full = true;
    check_run_size(last, Mode::sampled, opt);

    const std::size_t ns = steps.size();
    std::vector<double> samples(static_cast<std::size_t>(trajectories) * ns);
    parallel_for(static_cast<std::size_t>(trajectories), [&](std::size_t t) {
        Rng rng(sub_seed(seed, t));
        JointState js = JointState::sampled(sample_initial_state(rho0, rng));
        CollisionRecord rec;
        std::vector<double> d_at(static_cast<std::size_t>(last) + 1);
        d_at[0] = js.reduced_system()(0, 0).real();
        for (int k = 1; k <= last; ++k) {
            run_collisions(js, rec, k, 1, m, b, rng, opt);
            d_at[k] = js.reduced_system()(0, 0).real();
        }
        for (std::size_t s = 0; s < ns; ++s) samples[t * ns + s] = d_at[steps[s]];
    });

    std::vector<PopulationEstimate> out;
    for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> xs(trajectories);
        for (int t = 0; t < trajectories; ++t) xs[t] = samples[t * ns + s];
        const FidelityStats st = summarize(xs);
        out.push_back({steps[s], st.mean, st.std_error});
    }
    return out;
}

}  // namespace qcollide
