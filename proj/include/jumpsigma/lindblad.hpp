// lindblad.hpp: Open-system model, master equation and entropy functionals

#pragma once

#include <span>
#include <string>
#include <vector>

#include "jumpsigma/operators.hpp"

namespace jumpsigma {

inline constexpr double kEigenOperatorTol = 1e-9;

enum class Picture { schroedinger, interaction };

enum class JumpDirection { minus, plus };

/// One dissipation channel. `lower` is the emission operator A-, `raise` its
/// adjoint A+. Emission rate gamma_minus and absorption rate gamma_plus obey
/// gamma_plus = gamma_minus * exp(-omega / T).
struct DecayChannel {
    Operator lower;
    Operator raise;
    double omega = 0.0;
    double gamma_minus = 0.0;
    double gamma_plus = 0.0;
    /// omega / T, entropy carried into the reservoir by one emission.
    /// +inf at T = 0.
    double entropy_quantum = 0.0;

    const Operator& jump(JumpDirection dir) const { return dir == JumpDirection::minus ? lower : raise; }
    double rate(JumpDirection dir) const { return dir == JumpDirection::minus ? gamma_minus : gamma_plus; }
};

/// What the caller supplies per channel; gamma_plus is derived.
struct ChannelSpec {
    Operator lower;
    double omega = 0.0;
    double gamma_minus = 0.0;
};

class LindbladModel {
public:
    std::size_t dim() const { return h0_.dim(); }
    const Operator& h0() const { return h0_; }
    const Operator& hp() const { return hp_; }
    const std::vector<DecayChannel>& channels() const { return channels_; }
    double temperature() const { return temperature_; }
    Picture picture() const { return picture_; }

    /// Hermitian generator of the coherent part in the model's picture:
    /// h0 + hp (Schroedinger) or hp (interaction).
    const Operator& hamiltonian() const { return hamiltonian_; }
    /// H - (i/2) sum_i (g-_i A+A- + g+_i A-A+)
    const Operator& h_eff() const { return h_eff_; }
    /// sum_i (g-_i A+A- + g+_i A-A+), i.e. 2i (h_eff - H).
    const Operator& damping() const { return damping_; }

    /// Largest of the rates and the spectral radius scale of H, used to pick
    /// default step sizes.
    double max_rate() const;
    /// Smallest positive channel rate, 0 if none.
    double min_positive_rate() const;

private:
    friend LindbladModel build_model(Operator, Operator, std::vector<ChannelSpec>, double, Picture);

    Operator h0_, hp_, hamiltonian_, h_eff_, damping_;
    std::vector<DecayChannel> channels_;
    double temperature_ = 0.0;
    Picture picture_ = Picture::interaction;
};

/// Validates Hermiticity, the eigen-operator relation [H0, A-] = -omega A-
/// and rate signs, derives gamma_plus from the thermal relation and assembles
/// h_eff. Throws ValidationError naming the offending channel.
LindbladModel build_model(Operator h0, Operator hp, std::vector<ChannelSpec> channels, double temperature,
                          Picture picture);

/// ||[H0, A-] + omega A-||_max for one channel.
double eigen_operator_residual(const Operator& h0, const Operator& lower, double omega);

Operator dissipator(const LindbladModel& model, const Operator& rho);
Operator liouvillian_apply(const LindbladModel& model, const Operator& rho);

/// Classical RK4 on d rho / dt = L(rho) with internal step <= dt, landing
/// exactly on each requested grid time. Throws IntegrationError if an
/// output state develops an eigenvalue below -1e-6.
std::vector<DensityMatrix> integrate_master(const LindbladModel& model, const DensityMatrix& rho0,
                                            std::span<const double> t_grid, double dt);

/// Default master-equation step: 1e-3 over the fastest model scale.
double default_master_step(const LindbladModel& model);

/// exp(-H0/T)/Z. Requires T > 0.
DensityMatrix gibbs_state(const LindbladModel& model);

struct StationaryOptions {
    double residual_tol = 1e-10;
    /// Integration cap expressed in units of 1/min positive rate.
    double cap_in_relaxation_times = 1e3;
};

/// Long-time integration from the maximally mixed state until
/// ||L(rho)||_max <= residual_tol. Throws NoStationaryStateError at the cap.
DensityMatrix stationary_state(const LindbladModel& model, StationaryOptions opts = {});

/// J = sum_i (omega_i/T) tr{g-_i A+A- rho - g+_i A-A+ rho}. Requires T > 0.
double entropy_flux(const LindbladModel& model, const DensityMatrix& rho);

/// -tr{D(rho) ln rho}: the dissipative part of dS/dt.
double entropy_rate_dissipative(const LindbladModel& model, const DensityMatrix& rho);

/// -tr{-i[H, rho] ln rho}; identically zero, exposed so callers can check it.
double entropy_rate_unitary(const LindbladModel& model, const DensityMatrix& rho);

/// sigma[rho] = -tr{D(rho)(ln rho - ln rho_th)}. Requires T > 0.
double entropy_production_functional(const LindbladModel& model, const DensityMatrix& rho);

struct EntropyBalance {
    double dsdt = 0.0;   // -tr{L(rho) ln rho}
    double flux = 0.0;   // J
    double sigma = 0.0;  // functional form
};

EntropyBalance entropy_balance(const LindbladModel& model, const DensityMatrix& rho);

} // namespace jumpsigma
