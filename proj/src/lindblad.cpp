// lindblad.cpp: Open-system model, master equation and entropy functionals

#include "jumpsigma/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jumpsigma/errors.hpp"

namespace jumpsigma {

double eigen_operator_residual(const Operator& h0, const Operator& lower, double omega) {
    return (commutator(h0, lower) + lower * omega).max_abs();
}

LindbladModel build_model(Operator h0, Operator hp, std::vector<ChannelSpec> channels, double temperature,
                          Picture picture) {
    if (h0.dim() == 0) throw ValidationError("build_model: empty H0");
    if (hp.dim() != h0.dim()) throw ValidationError("build_model: H0 and Hp dimensions differ");
    if (!h0.is_hermitian(kHermitianTol)) throw ValidationError("build_model: H0 is not Hermitian");
    if (!hp.is_hermitian(kHermitianTol)) throw ValidationError("build_model: Hp is not Hermitian");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
        throw ValidationError("build_model: temperature must be finite and >= 0");

    LindbladModel m;
    m.temperature_ = temperature;
    m.picture_ = picture;
    m.damping_ = Operator(h0.dim());

    for (std::size_t i = 0; i < channels.size(); ++i) {
        auto& spec = channels[i];
        std::ostringstream who;
        who << "channel " << i;
        if (spec.lower.dim() != h0.dim())
            throw ValidationError("build_model: " + who.str() + " has the wrong dimension");
        if (!(spec.omega > 0.0) || !std::isfinite(spec.omega))
            throw ValidationError("build_model: " + who.str() + " needs a positive Bohr frequency");
        if (!(spec.gamma_minus >= 0.0) || !std::isfinite(spec.gamma_minus))
            throw ValidationError("build_model: " + who.str() + " has a negative or non-finite rate");
        const double residual = eigen_operator_residual(h0, spec.lower, spec.omega);
        if (residual > kEigenOperatorTol) {
            std::ostringstream msg;
            msg << "build_model: " << who.str() << " violates [H0, A-] = -omega A- (residual " << residual
                << ", omega " << spec.omega << ")";
            throw ValidationError(msg.str());
        }

        DecayChannel ch;
        ch.raise = spec.lower.adjoint();
        ch.lower = std::move(spec.lower);
        ch.omega = spec.omega;
        ch.gamma_minus = spec.gamma_minus;
        if (temperature > 0.0) {
            ch.gamma_plus = spec.gamma_minus * std::exp(-spec.omega / temperature);
            ch.entropy_quantum = spec.omega / temperature;
        } else {
            ch.gamma_plus = 0.0;
            ch.entropy_quantum = std::numeric_limits<double>::infinity();
        }
        m.damping_ += (ch.raise * ch.lower) * ch.gamma_minus + (ch.lower * ch.raise) * ch.gamma_plus;
        m.channels_.push_back(std::move(ch));
    }

    m.hamiltonian_ = picture == Picture::schroedinger ? h0 + hp : hp;
    m.h_eff_ = m.hamiltonian_ - m.damping_ * cplx(0.0, 0.5);
    m.h0_ = std::move(h0);
    m.hp_ = std::move(hp);
    return m;
}

double LindbladModel::max_rate() const {
    double r = 0.0;
    for (const auto& ch : channels_) r = std::max({r, ch.gamma_minus, ch.gamma_plus});
    const auto eig = hermitian_eigen(hamiltonian_);
    r = std::max(r, eig.values.back() - eig.values.front());
    return r;
}

double LindbladModel::min_positive_rate() const {
    double r = 0.0;
    for (const auto& ch : channels_)
        for (double g : {ch.gamma_minus, ch.gamma_plus})
            if (g > 0.0 && (r == 0.0 || g < r)) r = g;
    return r;
}

Operator dissipator(const LindbladModel& model, const Operator& rho) {
    if (rho.dim() != model.dim()) throw ValidationError("dissipator: dimension mismatch");
    Operator out = (model.damping() * rho + rho * model.damping()) * -0.5;
    for (const auto& ch : model.channels()) {
        if (ch.gamma_minus != 0.0) out += (ch.lower * rho * ch.raise) * ch.gamma_minus;
        if (ch.gamma_plus != 0.0) out += (ch.raise * rho * ch.lower) * ch.gamma_plus;
    }
    return out;
}

Operator liouvillian_apply(const LindbladModel& model, const Operator& rho) {
    if (rho.dim() != model.dim()) throw ValidationError("liouvillian_apply: dimension mismatch");
    return commutator(model.hamiltonian(), rho) * cplx(0.0, -1.0) + dissipator(model, rho);
}

namespace {

void rk4_step(const LindbladModel& model, Operator& rho, double h) {
    const Operator k1 = liouvillian_apply(model, rho);
    const Operator k2 = liouvillian_apply(model, rho + k1 * (0.5 * h));
    const Operator k3 = liouvillian_apply(model, rho + k2 * (0.5 * h));
    const Operator k4 = liouvillian_apply(model, rho + k3 * h);
    rho += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);

    rho = hermitian_part(rho);
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-12) rho *= 1.0 / tr;
}

constexpr double kIntegrationPsdTol = 1e-6;

} // namespace

double default_master_step(const LindbladModel& model) {
    const double r = model.max_rate();
    return r > 0.0 ? 1e-3 / r : 1e-3;
}

std::vector<DensityMatrix> integrate_master(const LindbladModel& model, const DensityMatrix& rho0,
                                            std::span<const double> t_grid, double dt) {
    if (!(dt > 0.0)) throw ValidationError("integrate_master: dt must be positive");
    if (t_grid.empty() || t_grid.front() != 0.0) throw ValidationError("integrate_master: grid must start at 0");
    if (rho0.dim() != model.dim()) throw ValidationError("integrate_master: dimension mismatch");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] >= t_grid[k - 1])) throw ValidationError("integrate_master: grid must be increasing");

    std::vector<DensityMatrix> out;
    out.reserve(t_grid.size());
    out.push_back(rho0);

    Operator rho = rho0.op();
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double span = t_grid[k] - t_grid[k - 1];
        if (span > 0.0) {
            const auto n = static_cast<long>(std::ceil(span / dt - 1e-9));
            const double h = span / static_cast<double>(std::max(n, 1L));
            for (long s = 0; s < std::max(n, 1L); ++s) rk4_step(model, rho, h);
        }
        try {
            out.emplace_back(rho, kIntegrationPsdTol);
        } catch (const InvalidStateError& e) {
            std::ostringstream msg;
            msg << "integrate_master: state invalid at t = " << t_grid[k] << " (" << e.what()
                << "); reduce dt";
            throw IntegrationError(msg.str());
        }
    }
    return out;
}

namespace {

struct Boltzmann {
    EigenDecomposition energies;
    std::vector<double> log_weights;  // ln p_k, normalized
};

Boltzmann boltzmann(const LindbladModel& model) {
    const double t = model.temperature();
    if (!(t > 0.0)) throw ValidationError("Gibbs state requires T > 0");
    Boltzmann b{hermitian_eigen(model.h0()), {}};
    const double e0 = b.energies.values.front();
    double z = 0.0;
    for (double e : b.energies.values) z += std::exp(-(e - e0) / t);
    const double log_z = std::log(z);
    for (double e : b.energies.values) b.log_weights.push_back(-(e - e0) / t - log_z);
    return b;
}

Operator log_gibbs(const LindbladModel& model) {
    const auto b = boltzmann(model);
    std::size_t k = 0;
    // apply_spectral visits eigenvalues in order, so index alongside.
    return apply_spectral(b.energies, [&](double) { return b.log_weights[k++]; });
}

} // namespace

DensityMatrix gibbs_state(const LindbladModel& model) {
    const auto b = boltzmann(model);
    std::size_t k = 0;
    Operator rho = apply_spectral(b.energies, [&](double) { return std::exp(b.log_weights[k++]); });
    rho = hermitian_part(rho);
    rho *= 1.0 / rho.trace().real();
    return DensityMatrix(std::move(rho));
}

DensityMatrix stationary_state(const LindbladModel& model, StationaryOptions opts) {
    if (model.channels().empty()) throw ValidationError("stationary_state: model has no channels");
    const double slowest = model.min_positive_rate();
    if (!(slowest > 0.0)) throw ValidationError("stationary_state: all channel rates vanish");

    const double t_cap = opts.cap_in_relaxation_times / slowest;
    const double h = 0.05 / model.max_rate();
    constexpr int kCheckEvery = 100;

    Operator rho = DensityMatrix::maximally_mixed(model.dim()).op();
    double t = 0.0;
    while (true) {
        if (liouvillian_apply(model, rho).max_abs() <= opts.residual_tol) break;
        if (t >= t_cap) {
            std::ostringstream msg;
            msg << "stationary_state: no convergence to residual " << opts.residual_tol << " by t = " << t_cap;
            throw NoStationaryStateError(msg.str());
        }
        for (int s = 0; s < kCheckEvery; ++s) rk4_step(model, rho, h);
        t += kCheckEvery * h;
    }
    return DensityMatrix(std::move(rho));
}

namespace {
void require_positive_temperature(const LindbladModel& model, const char* who) {
    if (!(model.temperature() > 0.0)) throw ValidationError(std::string(who) + ": requires T > 0");
}
} // namespace

double entropy_flux(const LindbladModel& model, const DensityMatrix& rho) {
    require_positive_temperature(model, "entropy_flux");
    if (rho.dim() != model.dim()) throw ValidationError("entropy_flux: dimension mismatch");
    double j = 0.0;
    for (const auto& ch : model.channels()) {
        const double down = ch.gamma_minus * trace_of_product(ch.raise * ch.lower, rho).real();
        const double up = ch.gamma_plus * trace_of_product(ch.lower * ch.raise, rho).real();
        j += ch.entropy_quantum * (down - up);
    }
    return j;
}

double entropy_rate_dissipative(const LindbladModel& model, const DensityMatrix& rho) {
    return -trace_of_product(dissipator(model, rho), matrix_log_on_support(rho)).real();
}

double entropy_rate_unitary(const LindbladModel& model, const DensityMatrix& rho) {
    const Operator unitary = commutator(model.hamiltonian(), rho.op()) * cplx(0.0, -1.0);
    return -trace_of_product(unitary, matrix_log_on_support(rho)).real();
}

double entropy_production_functional(const LindbladModel& model, const DensityMatrix& rho) {
    require_positive_temperature(model, "entropy_production_functional");
    if (rho.dim() != model.dim()) throw ValidationError("entropy_production_functional: dimension mismatch");
    const Operator rel = matrix_log_on_support(rho) - log_gibbs(model);
    return -trace_of_product(dissipator(model, rho), rel).real();
}

EntropyBalance entropy_balance(const LindbladModel& model, const DensityMatrix& rho) {
    EntropyBalance b;
    b.dsdt = entropy_rate_dissipative(model, rho) + entropy_rate_unitary(model, rho);
    b.flux = entropy_flux(model, rho);
    b.sigma = entropy_production_functional(model, rho);
    return b;
}

} // namespace jumpsigma
