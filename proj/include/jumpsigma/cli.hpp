// cli.hpp: Batch front-end: configuration, pipelines and CSV output

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jumpsigma/lindblad.hpp"

namespace jumpsigma::cli {

enum class ModelKind { qubit, lambda };
enum class Mode { mc, master, both };
enum class InitialKind { ground, excited, thermal };

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

struct RunConfig {
    ModelKind model = ModelKind::qubit;
    double rabi = 1.0;
    /// Negative means "use the model default" (0.1 qubit, 1.0 lambda).
    double gamma_minus = -1.0;
    /// Negative means "use the model default" (1.0 qubit, 1.25 lambda).
    double omega_over_t = -1.0;
    double t_max = 20.0;
    double dt = 1e-3;
    std::uint64_t trajectories = 10000;
    std::uint64_t seed = 0;
    double bin_width = 0.5;
    std::size_t sample_every = 50;
    std::string output_path = "entropy_production.csv";
    Mode mode = Mode::both;
    InitialKind initial = InitialKind::ground;
    /// 0 = one per hardware thread.
    std::size_t workers = 0;
    /// Declared channel frequency relative to the level splitting; anything
    /// but 1 makes the eigen-operator check fail. Diagnostic only.
    double channel_omega_scale = 1.0;
};

/// Fills model-dependent defaults.
RunConfig resolved(RunConfig config);

/// Throws ValidationError on inconsistent settings.
void check(const RunConfig& config);

LindbladModel make_model(const RunConfig& config);
double closed_form_sigma(const RunConfig& config);

/// One-line "key=value;..." rendering echoed into the CSV header.
std::string describe(const RunConfig& config);

/// Runs the requested pipelines and writes the CSV. Returns an ExitCode;
/// diagnostics go to `err`, the summary to `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Builds and checks the model without simulating; prints a report.
int validate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line entry point (`jumpsigma [run|validate] --flags`).
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace jumpsigma::cli
