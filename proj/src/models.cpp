// models.cpp: Driven qubit and Lambda-configuration models

#include "jumpsigma/models.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "jumpsigma/errors.hpp"

namespace jumpsigma::models {

namespace {

void require_finite_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite and positive");
}

void require_rate(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite and >= 0");
}

double temperature_of(double omega, double omega_over_t) {
    return std::isinf(omega_over_t) ? 0.0 : omega / omega_over_t;
}

} // namespace

double absorption_rate(double gamma_minus, double omega_over_t) {
    return std::isinf(omega_over_t) ? 0.0 : gamma_minus * std::exp(-omega_over_t);
}

LindbladModel driven_qubit(const QubitParams& p) {
    require_finite_positive(p.rabi, "rabi");
    require_rate(p.gamma_minus, "gamma_minus");
    require_finite_positive(p.omega_over_t, "omega_over_t");
    require_finite_positive(p.omega, "omega");

    using namespace qubit_basis;
    const auto e = StateVector::basis(2, excited), g = StateVector::basis(2, ground);
    const Operator lower = Operator::outer(g, e);
    const Operator raise = Operator::outer(e, g);
    Operator h0 = Operator::diagonal({0.5 * p.omega, -0.5 * p.omega});
    Operator hp = (raise + lower) * (-0.5 * p.rabi);
    return build_model(std::move(h0), std::move(hp), {{lower, p.omega, p.gamma_minus}},
                       temperature_of(p.omega, p.omega_over_t), Picture::interaction);
}

double stationary_sigma_qubit(const QubitParams& p) {
    const double gp = absorption_rate(p.gamma_minus, p.omega_over_t);
    const double gamma = p.gamma_minus + gp;
    const double r = gamma / p.rabi;
    return p.omega_over_t * (p.gamma_minus - gp) / (2.0 + r * r);
}

double stationary_inversion_qubit(const QubitParams& p) {
    const double gamma = p.gamma_minus + absorption_rate(p.gamma_minus, p.omega_over_t);
    return -stationary_sigma_qubit(p) * gamma / (p.omega_over_t * p.rabi * p.rabi);
}

double inversion(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw ValidationError("inversion: qubit state expected");
    return (rho(qubit_basis::excited, qubit_basis::excited) - rho(qubit_basis::ground, qubit_basis::ground)).real();
}

LindbladModel lambda_system(const LambdaParams& p) {
    require_rate(p.rabi, "rabi");
    require_rate(p.gamma_minus, "gamma_minus");
    if (!(p.omega_over_t > 0.0)) throw ValidationError("omega_over_t must be positive");
    require_finite_positive(p.omega, "omega");

    using namespace lambda_basis;
    const auto e0 = StateVector::basis(3, excited);
    const auto gp1 = StateVector::basis(3, ground_p);
    const auto gm1 = StateVector::basis(3, ground_m);
    const double s = 1.0 / std::sqrt(2.0);
    const Operator a1 = Operator::outer(gm1, e0) * s;
    const Operator a2 = Operator::outer(gp1, e0) * s;

    Operator h0 = Operator::diagonal({0.5 * p.omega, -0.5 * p.omega, -0.5 * p.omega});
    // Hermitian part of h_eff = -(i/2) [[g-, W, -W], [-W, g+/2, 0], [W, 0, g+/2]].
    Operator hp(3);
    const cplx half_i_rabi(0.0, 0.5 * p.rabi);
    hp(excited, ground_p) = -half_i_rabi;
    hp(excited, ground_m) = half_i_rabi;
    hp(ground_p, excited) = half_i_rabi;
    hp(ground_m, excited) = -half_i_rabi;

    return build_model(std::move(h0), std::move(hp), {{a1, p.omega, p.gamma_minus}, {a2, p.omega, p.gamma_minus}},
                       temperature_of(p.omega, p.omega_over_t), Picture::interaction);
}

double stationary_sigma_lambda(const LambdaParams& p) {
    if (std::isinf(p.omega_over_t)) return 0.0;
    const double gp = absorption_rate(p.gamma_minus, p.omega_over_t);
    return p.omega_over_t * gp * stationary_coherence_lambda(p);
}

double stationary_coherence_lambda(const LambdaParams& p) {
    const double gm = p.gamma_minus;
    const double gp = absorption_rate(gm, p.omega_over_t);
    if (p.rabi == 0.0) return 0.0;  // limit of the expression below as rabi -> 0 with gp > 0
    const double a = gm + 0.5 * gp;
    return (gm - gp) / (2.0 * gm + 4.0 * gp + gp / (p.rabi * p.rabi) * a * a);
}

StateVector dark_state() {
    const double s = 1.0 / std::sqrt(2.0);
    StateVector v(3);
    v[lambda_basis::ground_p] = s;
    v[lambda_basis::ground_m] = s;
    return v;
}

LindbladModel mix_channels(const LindbladModel& model, double omega, const Operator& u) {
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < model.channels().size(); ++i)
        if (std::abs(model.channels()[i].omega - omega) <= 1e-12 * std::max(1.0, std::abs(omega)))
            selected.push_back(i);
    if (selected.empty()) throw ValidationError("mix_channels: no channel at the requested frequency");
    if (u.dim() != selected.size()) {
        std::ostringstream msg;
        msg << "mix_channels: " << selected.size() << " channels at omega = " << omega << " but u is " << u.dim()
            << "x" << u.dim();
        throw ValidationError(msg.str());
    }
    if ((u * u.adjoint() - Operator::identity(u.dim())).max_abs() > 1e-10)
        throw ValidationError("mix_channels: mixing matrix is not unitary");

    const auto& first = model.channels()[selected.front()];
    for (std::size_t i : selected)
        if (model.channels()[i].gamma_minus != first.gamma_minus)
            throw ValidationError("mix_channels: channels at the same frequency have different rates");

    std::vector<ChannelSpec> specs;
    for (std::size_t i = 0; i < model.channels().size(); ++i) {
        const auto& ch = model.channels()[i];
        specs.push_back({ch.lower, ch.omega, ch.gamma_minus});
    }
    for (std::size_t a = 0; a < selected.size(); ++a) {
        Operator mixed(model.dim());
        for (std::size_t b = 0; b < selected.size(); ++b)
            mixed += model.channels()[selected[b]].lower * u(a, b);
        specs[selected[a]].lower = std::move(mixed);
    }
    return build_model(model.h0(), model.hp(), std::move(specs), model.temperature(), model.picture());
}

} // namespace jumpsigma::models
