// experiments.hpp — reproducible experiment commands behind the qcollide CLI
//
// Configuration precedence: command-line flags > JSON config file > defaults.
// Angles are radians unless `degrees` is set, in which case every angle
// (from any layer) is converted once after merging.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qcollide/channel.hpp"
#include "qcollide/machines.hpp"

namespace qcollide {

struct SweepRange {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;

    std::vector<double> values() const;
};

struct ExperimentConfig {
    std::string command;
    double phi = 0.3;
    double theta = 0.0;
    double alpha = 0.0;
    std::optional<double> p;
    std::optional<double> beta;
    double energy = 1.0;
    std::optional<int> steps;  // per-command default when unset
    double tau0 = 1e-3;
    std::uint64_t seed = 1;
    std::string mode = "exact";
    std::optional<std::string> out;
    std::optional<std::string> format;
    bool degrees = false;

    // initial system state for thermalize / rates
    double d0 = 0.2;
    double k0_re = 0.4;
    double k0_im = 0.0;
    std::string path = "analytic";

    // fd observable as (a00, a11, Re a01, Im a01)
    std::array<double, 4> observable{1.0, -1.0, 0.0, 0.0};

    // entangle
    std::optional<SweepRange> sweep_phi;
    std::optional<SweepRange> sweep_theta;
    std::optional<SweepRange> sweep_p;
    int grid_theta = 32;
    int grid_phi = 64;
    double refine_tol = 1e-10;

    // irreversibility
    int trials = 200;
    bool per_trial = false;
    int max_live_ancillas = 20;

    // classify: second machine
    std::optional<double> phi2;
    std::optional<double> theta2;
    std::optional<double> alpha2;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInvariantFailure = 2;

inline constexpr std::array<std::string_view, 7> kCommands{
    "thermalize", "rates", "fd", "entangle", "irreversibility", "classify", "verify"};

// Overlay a JSON document on cfg. Unknown keys and ill-typed values throw ValidationError.
void apply_config_json(ExperimentConfig& cfg, std::string_view json_text);
// Convert degrees, then check every field. Throws ValidationError.
void finalize_config(ExperimentConfig& cfg);
// Resolved configuration as a single-line JSON object.
std::string config_to_json(const ExperimentConfig& cfg);

BathSpec resolve_bath(const ExperimentConfig& cfg);
MachineParams resolve_machine(const ExperimentConfig& cfg);

// Run a finalized configuration, writing the result document to out.
int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

// Full command-line entry point; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcollide
