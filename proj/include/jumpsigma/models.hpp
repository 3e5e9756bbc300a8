// models.hpp: Driven qubit and Lambda-configuration models with closed forms

#pragma once

#include "jumpsigma/lindblad.hpp"
#include "jumpsigma/operators.hpp"

namespace jumpsigma::models {

/// Resonantly driven two-level system in the interaction picture.
/// Frequencies are in units of the reference frequency; the Bohr frequency
/// `omega` only enters through omega_over_t and the eigen-operator check.
struct QubitParams {
    double rabi = 1.0;
    double gamma_minus = 0.1;
    double omega_over_t = 1.0;
    double omega = 1.0;
};

/// Three-level Lambda scheme |e,0>, |g,+1>, |g,-1> in the interaction picture.
/// omega_over_t may be +inf for a zero-temperature reservoir.
struct LambdaParams {
    double rabi = 1.0;
    double gamma_minus = 1.0;
    double omega_over_t = 1.25;
    double omega = 1.0;
};

namespace qubit_basis {
inline constexpr std::size_t excited = 0;
inline constexpr std::size_t ground = 1;
} // namespace qubit_basis

namespace lambda_basis {
inline constexpr std::size_t excited = 0;   // |e, 0>
inline constexpr std::size_t ground_p = 1;  // |g, +1>
inline constexpr std::size_t ground_m = 2;  // |g, -1>
} // namespace lambda_basis

/// gamma_minus * exp(-omega/T), 0 at T = 0.
double absorption_rate(double gamma_minus, double omega_over_t);

/// Basis (|e>, |g>), H0 = diag(omega/2, -omega/2), Hp = -(rabi/2)(A+ + A-),
/// one channel A- = |g><e|.
LindbladModel driven_qubit(const QubitParams& p);

/// Closed-form stationary entropy production rate of the driven qubit.
double stationary_sigma_qubit(const QubitParams& p);

/// Stationary inversion rho_ee - rho_gg implied by the closed form.
double stationary_inversion_qubit(const QubitParams& p);

/// rho_ee - rho_gg of a qubit state in the (|e>, |g>) basis.
double inversion(const DensityMatrix& rho);

/// Two emission channels A-_1 = |g,-1><e,0|/sqrt2, A-_2 = |g,+1><e,0|/sqrt2
/// at the same frequency, and the drive reconstructed from the Hermitian part
/// of the non-Hermitian Hamiltonian.
LindbladModel lambda_system(const LambdaParams& p);

/// Closed-form stationary entropy production rate of the Lambda scheme;
/// exactly 0 at T = 0.
double stationary_sigma_lambda(const LambdaParams& p);

/// Stationary ground-state coherence rho_23 implied by the closed form.
double stationary_coherence_lambda(const LambdaParams& p);

/// (|g,+1> + |g,-1>)/sqrt2.
StateVector dark_state();

/// Replaces the channels at Bohr frequency `omega` (within 1e-12) by
/// A~_a = sum_b u_ab A_b. The selected channels must share their rates and
/// u must be unitary within 1e-10.
LindbladModel mix_channels(const LindbladModel& model, double omega, const Operator& u);

} // namespace jumpsigma::models
