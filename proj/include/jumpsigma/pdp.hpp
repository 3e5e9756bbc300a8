// pdp.hpp: Quantum-jump (piecewise deterministic) trajectory engine

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "jumpsigma/lindblad.hpp"
#include "jumpsigma/operators.hpp"

namespace jumpsigma {

struct JumpEvent {
    double time = 0.0;
    std::size_t channel = 0;
    JumpDirection direction = JumpDirection::minus;

    friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

/// One realization sampled on `grid`. counts_minus[i][k] is the number of
/// emissions on channel i up to and including grid[k].
struct TrajectoryRecord {
    std::vector<double> grid;
    std::vector<StateVector> states;
    std::vector<JumpEvent> events;
    std::vector<std::vector<std::uint32_t>> counts_minus;
    std::vector<std::vector<std::uint32_t>> counts_plus;
    /// Largest per-step total jump probability encountered.
    double max_step_probability = 0.0;

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Per-trajectory random stream keyed by (master seed, trajectory index).
/// Streams with the same key replay the same sequence.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t index);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

private:
    std::uint64_t seed_, index_;
    std::mt19937_64 engine_;
};

struct JumpProbability {
    std::size_t channel = 0;
    JumpDirection direction = JumpDirection::minus;
    double probability = 0.0;
};

/// Per-step total jump probability above which the step size is rejected.
inline constexpr double kMaxStepJumpProbability = 0.5;
/// Per-step total jump probability above which results carry O(dt) bias
/// worth warning about.
inline constexpr double kWarnStepJumpProbability = 0.1;

struct SimulationOptions {
    /// When false, selected jumps are counted but the state is left as is.
    /// Only useful for checking the jump statistics of a frozen state.
    bool apply_jumps = true;
};

/// Everything that depends only on (model, dt): the fourth-order Taylor
/// propagator of h_eff and the jump operators in sparse form. Immutable after
/// construction and safe to share between threads.
class PdpEngine {
public:
    PdpEngine(const LindbladModel& model, double dt);

    const LindbladModel& model() const { return model_; }
    double dt() const { return dt_; }
    /// I + X + X^2/2 + X^3/6 + X^4/24 with X = -i h_eff dt.
    const Operator& propagator() const { return propagator_; }

    /// Normalized no-jump evolution over one step.
    StateVector drift(const StateVector& psi) const;
    /// Norm squared after one no-jump step, before renormalization.
    double drift_norm_squared(const StateVector& psi) const;

    TrajectoryRecord simulate(const StateVector& psi0, double t_max, std::size_t sample_every, RngStream& rng,
                              SimulationOptions opts = {}) const;

private:
    struct SparseEntry {
        std::uint32_t row, col;
        cplx value;
    };
    struct JumpOp {
        std::size_t channel;
        JumpDirection direction;
        double weight;  // rate * dt
        std::vector<SparseEntry> entries;
    };

    template <std::size_t D>
    TrajectoryRecord simulate_fixed(const StateVector& psi0, std::size_t n_steps, std::size_t sample_every,
                                    RngStream& rng, SimulationOptions opts) const;

    LindbladModel model_;
    double dt_;
    Operator propagator_;
    std::vector<JumpOp> jumps_;
    Operator jump_weight_;  // dt * damping
    bool jump_weight_diagonal_ = false;
};

/// One no-jump step of length dt: normalized propagator applied to psi.
/// Throws StepSizeError if the unnormalized norm falls below 1e-12.
StateVector deterministic_step(const LindbladModel& model, const StateVector& psi, double dt);

/// gamma_i^(+-) ||A_i^(+-) psi||^2 dt for every channel, minus before plus.
/// Throws StepSizeError if the total exceeds kMaxStepJumpProbability.
std::vector<JumpProbability> jump_probabilities(const LindbladModel& model, const StateVector& psi, double dt);

/// A psi / ||A psi||. Throws ImpossibleJumpError if ||A psi|| <= 1e-12.
StateVector apply_jump(const StateVector& psi, const DecayChannel& channel, JumpDirection direction);

/// Fixed-step jump scheme: one uniform draw per step decides whether a jump
/// occurs and which one; otherwise the state drifts under h_eff.
TrajectoryRecord simulate_trajectory(const LindbladModel& model, const StateVector& psi0, double t_max, double dt,
                                     std::size_t sample_every, RngStream& rng, SimulationOptions opts = {});

/// Number of dt steps in t_max; throws ValidationError unless t_max is an
/// integer multiple of dt to 1e-9 relative.
std::size_t step_count(double t_max, double dt);

} // namespace jumpsigma
