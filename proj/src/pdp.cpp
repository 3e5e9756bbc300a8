// pdp.cpp: Quantum-jump trajectory engine

#include "jumpsigma/pdp.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "jumpsigma/errors.hpp"

namespace jumpsigma {

namespace {

constexpr std::size_t kMaxFastDim = 16;
constexpr double kMinDriftNormSquared = 1e-24;  // norm 1e-12
constexpr double kMinJumpNorm = 1e-12;
constexpr double kMaxDriftScale = 0.01;         // dt * max rate

void require_unit_norm(const StateVector& psi, const char* who) {
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << who << ": state norm " << psi.norm() << " is not 1";
        throw ValidationError(msg.str());
    }
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t index) : seed_(seed), index_(index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x6a75u /* stream tag */};
    engine_.seed(seq);
}

std::size_t step_count(double t_max, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t_max > 0.0)) throw ValidationError("t_max must be positive");
    const double ratio = t_max / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
        std::ostringstream msg;
        msg << "t_max = " << t_max << " is not an integer multiple of dt = " << dt;
        throw ValidationError(msg.str());
    }
    return static_cast<std::size_t>(n);
}

PdpEngine::PdpEngine(const LindbladModel& model, double dt) : model_(model), dt_(dt) {
    if (!(dt > 0.0)) throw ValidationError("PdpEngine: dt must be positive");
    if (dt * model.max_rate() > kMaxDriftScale) {
        std::ostringstream msg;
        msg << "PdpEngine: dt * max rate = " << dt * model.max_rate() << " exceeds " << kMaxDriftScale;
        throw StepSizeError(msg.str());
    }
    if (model.dim() > kMaxFastDim) throw ValidationError("PdpEngine: dimension above 16 is not supported");

    const std::size_t d = model.dim();
    const Operator x = model.h_eff() * cplx(0.0, -dt);
    propagator_ = Operator::identity(d);
    Operator term = Operator::identity(d);
    for (int n = 1; n <= 4; ++n) {
        term = term * x * (1.0 / n);
        propagator_ += term;
    }

    for (std::size_t i = 0; i < model.channels().size(); ++i) {
        const auto& ch = model.channels()[i];
        for (auto dir : {JumpDirection::minus, JumpDirection::plus}) {
            JumpOp op{i, dir, ch.rate(dir) * dt, {}};
            const Operator& a = ch.jump(dir);
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c)
                    if (a(r, c) != cplx{})
                        op.entries.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), a(r, c)});
            jumps_.push_back(std::move(op));
        }
    }
    jump_weight_ = model.damping() * dt;
    jump_weight_diagonal_ = true;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            if (r != c && jump_weight_(r, c) != cplx{}) jump_weight_diagonal_ = false;
}

double PdpEngine::drift_norm_squared(const StateVector& psi) const { return (propagator_ * psi).norm_squared(); }

StateVector PdpEngine::drift(const StateVector& psi) const {
    StateVector next = propagator_ * psi;
    const double n2 = next.norm_squared();
    if (n2 < kMinDriftNormSquared) throw StepSizeError("deterministic step lost the whole norm; reduce dt");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : next.amplitudes()) a *= inv;
    return next;
}

template <std::size_t D>
TrajectoryRecord PdpEngine::simulate_fixed(const StateVector& psi0, std::size_t n_steps, std::size_t sample_every,
                                           RngStream& rng, SimulationOptions opts) const {
    const std::size_t d = D > 0 ? D : model_.dim();
    const std::size_t n_channels = model_.channels().size();
    const std::size_t n_samples = n_steps / sample_every + 1;

    TrajectoryRecord rec;
    rec.grid.reserve(n_samples);
    rec.states.reserve(n_samples);
    rec.counts_minus.assign(n_channels, {});
    rec.counts_plus.assign(n_channels, {});
    for (std::size_t i = 0; i < n_channels; ++i) {
        rec.counts_minus[i].reserve(n_samples);
        rec.counts_plus[i].reserve(n_samples);
    }

    std::array<cplx, kMaxFastDim * kMaxFastDim> prop{};
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) prop[r * d + c] = propagator_(r, c);

    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < jumps_.size(); ++k)
        if (jumps_[k].weight > 0.0 && !jumps_[k].entries.empty()) active.push_back(k);
    std::vector<double> probs(active.size());

    // Total jump probability psi^dag K psi with K = dt * damping.
    std::array<double, kMaxFastDim> k_diag{};
    std::array<cplx, kMaxFastDim * kMaxFastDim> k_full{};
    for (std::size_t r = 0; r < d; ++r) {
        k_diag[r] = jump_weight_(r, r).real();
        for (std::size_t c = 0; c < d; ++c) k_full[r * d + c] = jump_weight_(r, c);
    }
    const bool k_is_diagonal = jump_weight_diagonal_;

    std::array<cplx, kMaxFastDim> psi{}, next{}, target{};
    for (std::size_t k = 0; k < d; ++k) psi[k] = psi0[k];

    std::vector<std::uint32_t> n_minus(n_channels, 0), n_plus(n_channels, 0);

    auto sample = [&](std::size_t step) {
        rec.grid.push_back(static_cast<double>(step) * dt_);
        StateVector s(d);
        for (std::size_t k = 0; k < d; ++k) s[k] = psi[k];
        rec.states.push_back(std::move(s));
        for (std::size_t i = 0; i < n_channels; ++i) {
            rec.counts_minus[i].push_back(n_minus[i]);
            rec.counts_plus[i].push_back(n_plus[i]);
        }
    };

    auto jump_target = [&](const JumpOp& op) {
        for (std::size_t k = 0; k < d; ++k) target[k] = 0.0;
        for (const auto& e : op.entries) target[e.row] += e.value * psi[e.col];
        double n2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) n2 += std::norm(target[k]);
        return n2;
    };

    auto total_probability = [&]() {
        double total = 0.0;
        if (k_is_diagonal) {
            for (std::size_t r = 0; r < d; ++r) total += k_diag[r] * std::norm(psi[r]);
            return total;
        }
        for (std::size_t r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += k_full[r * d + c] * psi[c];
            total += (std::conj(psi[r]) * acc).real();
        }
        return total;
    };

    sample(0);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double u = rng.uniform();

        const double total = total_probability();
        if (total > rec.max_step_probability) {
            rec.max_step_probability = total;
            if (total > kMaxStepJumpProbability) {
                std::ostringstream msg;
                msg << "total jump probability per step " << total << " exceeds " << kMaxStepJumpProbability
                    << "; reduce dt";
                throw StepSizeError(msg.str());
            }
        }

        std::size_t chosen = active.size();
        if (u < total) {
            // Inverse CDF in channel order, minus before plus; u equal to a
            // cumulative threshold resolves to the lower index.
            for (std::size_t a = 0; a < active.size(); ++a) probs[a] = jumps_[active[a]].weight * jump_target(jumps_[active[a]]);
            double cum = 0.0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                cum += probs[a];
                if (probs[a] > 0.0 && u <= cum) {
                    chosen = a;
                    break;
                }
            }
            if (chosen == active.size()) {
                // Rounding left u just above the last cumulative sum.
                for (std::size_t a = active.size(); a-- > 0;)
                    if (probs[a] > 0.0) {
                        chosen = a;
                        break;
                    }
            }
        }

        if (chosen < active.size()) {
            const JumpOp& op = jumps_[active[chosen]];
            rec.events.push_back({static_cast<double>(step + 1) * dt_, op.channel, op.direction});
            (op.direction == JumpDirection::minus ? n_minus : n_plus)[op.channel] += 1;

            if (opts.apply_jumps) {
                const double n2 = jump_target(op);
                const double norm = std::sqrt(n2);
                if (norm <= kMinJumpNorm) throw ImpossibleJumpError("selected jump has vanishing amplitude");
                const double inv = 1.0 / norm;
                for (std::size_t k = 0; k < d; ++k) psi[k] = target[k] * inv;
            }
        } else {
            double n2 = 0.0;
            for (std::size_t r = 0; r < d; ++r) {
                cplx acc = 0.0;
                for (std::size_t c = 0; c < d; ++c) acc += prop[r * d + c] * psi[c];
                next[r] = acc;
                n2 += std::norm(acc);
            }
            if (n2 < kMinDriftNormSquared) throw StepSizeError("deterministic step lost the whole norm; reduce dt");
            const double inv = 1.0 / std::sqrt(n2);
            for (std::size_t k = 0; k < d; ++k) psi[k] = next[k] * inv;
        }

        if ((step + 1) % sample_every == 0) sample(step + 1);
    }
    return rec;
}

TrajectoryRecord PdpEngine::simulate(const StateVector& psi0, double t_max, std::size_t sample_every,
                                     RngStream& rng, SimulationOptions opts) const {
    if (psi0.dim() != model_.dim()) throw ValidationError("simulate: initial state has the wrong dimension");
    require_unit_norm(psi0, "simulate");
    if (sample_every == 0) throw ValidationError("simulate: sample_every must be at least 1");
    const std::size_t n_steps = step_count(t_max, dt_);
    switch (model_.dim()) {
    case 2: return simulate_fixed<2>(psi0, n_steps, sample_every, rng, opts);
    case 3: return simulate_fixed<3>(psi0, n_steps, sample_every, rng, opts);
    case 4: return simulate_fixed<4>(psi0, n_steps, sample_every, rng, opts);
    default: return simulate_fixed<0>(psi0, n_steps, sample_every, rng, opts);
    }
}

StateVector deterministic_step(const LindbladModel& model, const StateVector& psi, double dt) {
    if (psi.dim() != model.dim()) throw ValidationError("deterministic_step: dimension mismatch");
    require_unit_norm(psi, "deterministic_step");
    return PdpEngine(model, dt).drift(psi);
}

std::vector<JumpProbability> jump_probabilities(const LindbladModel& model, const StateVector& psi, double dt) {
    if (!(dt > 0.0)) throw ValidationError("jump_probabilities: dt must be positive");
    std::vector<JumpProbability> out;
    double total = 0.0;
    for (std::size_t i = 0; i < model.channels().size(); ++i) {
        const auto& ch = model.channels()[i];
        for (auto dir : {JumpDirection::minus, JumpDirection::plus}) {
            const double p = ch.rate(dir) * (ch.jump(dir) * psi).norm_squared() * dt;
            total += p;
            out.push_back({i, dir, p});
        }
    }
    if (total > kMaxStepJumpProbability) {
        std::ostringstream msg;
        msg << "jump_probabilities: total " << total << " exceeds " << kMaxStepJumpProbability << "; reduce dt";
        throw StepSizeError(msg.str());
    }
    return out;
}

StateVector apply_jump(const StateVector& psi, const DecayChannel& channel, JumpDirection direction) {
    StateVector target = channel.jump(direction) * psi;
    const double norm = target.norm();
    if (norm <= kMinJumpNorm) throw ImpossibleJumpError("apply_jump: jump operator annihilates the state");
    for (auto& a : target.amplitudes()) a /= norm;
    return target;
}

TrajectoryRecord simulate_trajectory(const LindbladModel& model, const StateVector& psi0, double t_max, double dt,
                                     std::size_t sample_every, RngStream& rng, SimulationOptions opts) {
    return PdpEngine(model, dt).simulate(psi0, t_max, sample_every, rng, opts);
}

} // namespace jumpsigma
