// trajectories.hpp — system plus explicit ancillas, forward collisions and their reversal
//
// Exact mode keeps the joint density matrix (ancillas start in xi). Sampled mode
// keeps a joint pure state with each ancilla drawn from {|0> w.p. p, |1> w.p. q};
// averaging over draws reproduces exact mode because xi is diagonal.
// Ancillas are tensored in right before their collision. Untouched ancillas are
// in a product state, so this is the same as starting from xi^{(x)n}.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qcollide/channel.hpp"
#include "qcollide/kernels.hpp"
#include "qcollide/linalg.hpp"
#include "qcollide/machines.hpp"
#include "qcollide/rng.hpp"

namespace qcollide {

enum class Mode { exact, sampled };

inline constexpr int kMaxExactAncillas = 11;
inline constexpr int kMaxLiveSampledAncillas = 20;

struct CollisionEntry {
    int ancilla = 0;  // ancilla label, 1-based, in collision order
    MachineParams machine;
    int outcome = -1;  // sampled mode: basis state the ancilla was drawn in
};

struct RetiredAncilla {
    int ancilla = 0;
    int outcome = 0;  // computational-basis measurement result
};

// The classical key: which ancilla met the system, with which machine, in which order.
struct CollisionRecord {
    std::vector<CollisionEntry> collisions;
    std::vector<RetiredAncilla> retired;

    bool reversible() const { return retired.empty(); }
};

class JointState {
public:
    static JointState exact(const Mat2& rho0);
    static JointState sampled(const Vec2& psi0);

    Mode mode() const { return mode_; }
    int num_qubits() const { return num_qubits_; }
    // Ancilla labels in qubit order; qubit i+1 carries live_ancillas()[i].
    const std::vector<int>& live_ancillas() const { return ancillas_; }
    int qubit_of(int ancilla) const;
    // Exact: row-major density matrix. Sampled: state vector.
    std::span<const cplx> data() const { return data_; }

    Mat2 reduced_system() const;
    Mat2 reduced_qubit(int qubit) const;
    // Exact: Tr(rho). Sampled: <psi|psi>.
    double trace() const;
    // Exact: Tr(rho^2). Sampled: <psi|psi>^2.
    double purity() const;

    void apply(const Mat4& u, int qubit_a, int qubit_b);
    void append_mixed_ancilla(int label, const Mat2& xi);
    void append_basis_ancilla(int label, int bit);
    // Measure a live ancilla in the computational basis and drop it (sampled mode).
    int retire(int label, Rng& rng);

private:
    JointState(Mode mode, int num_qubits, std::vector<cplx> data)
        : mode_(mode), num_qubits_(num_qubits), data_(std::move(data)) {}

    Mode mode_;
    int num_qubits_;
    std::vector<cplx> data_;
    std::vector<int> ancillas_;
};

struct ForwardOptions {
    int max_live_ancillas = kMaxLiveSampledAncillas;
    // Sampled mode only: when the live-ancilla cap is reached, measure out the
    // oldest ancilla instead of failing. The record is then no longer reversible.
    bool retire_when_full = false;
};

struct ForwardResult {
    JointState state;
    CollisionRecord record;
};

// Collisions k = 1..n of the system (qubit 0) with fresh ancilla k.
ForwardResult forward_run(const Mat2& rho0, int n, const MachineParams& m, const BathSpec& b, Mode mode,
                          std::uint64_t seed, const ForwardOptions& opt = {});

// Undo collisions in the given order: order[i] indexes rec.collisions. Returns the
// reduced system state.
Mat2 reverse_run(JointState js, const CollisionRecord& rec, std::span<const int> order);

std::vector<int> correct_reverse_order(int n);

struct FidelityStats {
    int count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double std_error = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct ReconstructionReport {
    double correct_fidelity = 0.0;
    double no_key_fidelity = 0.0;
    FidelityStats wrong_order;
    bool enumerated = false;  // all wrong orders were tried
    std::vector<std::vector<int>> wrong_orders;
    std::vector<double> wrong_fidelities;
};

inline constexpr int kDefaultWrongOrderTrials = 200;
inline constexpr int kEnumerateUpTo = 5;

// (a) reverse with the key, (b) reverse in wrong orders, (c) leave thermalized.
// n <= 5 tries every wrong order; otherwise min(trials, n! - 1) distinct random ones.
ReconstructionReport reconstruction_experiment(const Vec2& psi0, int n, const MachineParams& m,
                                               const BathSpec& b, Mode mode, int trials,
                                               std::uint64_t seed);

struct ReducedStatesReport {
    double system_distance = 0.0;
    std::vector<double> ancilla_distances;  // in live_ancillas() order
};

ReducedStatesReport reduced_states_check(const JointState& js, const BathSpec& b);

struct PopulationEstimate {
    int step = 0;
    double mean_d = 0.0;
    double std_error = 0.0;
};

// Sampled-mode Monte Carlo of d^(n): mean and standard error of the reduced
// system population over `trajectories` runs, at each requested step.
std::vector<PopulationEstimate> sample_populations(const Mat2& rho0, std::span<const int> steps,
                                                   const MachineParams& m, const BathSpec& b,
                                                   int trajectories, std::uint64_t seed,
                                                   int max_live_ancillas = 4);

}  // namespace qcollide
