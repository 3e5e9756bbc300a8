#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "jumpsigma/errors.hpp"
#include "jumpsigma/models.hpp"
#include "oracles.hpp"

using namespace jumpsigma;
using namespace jumpsigma::models;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_dev(const Operator& a, const Operator& b) { return (a - b).max_abs(); }

} // namespace

TEST_CASE("absorption_rate") {
    CHECK(absorption_rate(0.1, 1.0) == doctest::Approx(0.036787944117144235).epsilon(1e-14));
    CHECK(absorption_rate(1.0, kInf) == 0.0);
}

TEST_CASE("closed-form reference values") {
    CHECK(stationary_sigma_qubit({}) == doctest::Approx(0.031313079341120396).epsilon(1e-12));
    CHECK(stationary_inversion_qubit({}) == doctest::Approx(-0.00428325174704888).epsilon(1e-12));
    CHECK(stationary_sigma_lambda({}) == doctest::Approx(0.07258218671820615).epsilon(1e-12));
    CHECK(stationary_coherence_lambda({}) == doctest::Approx(0.2026693793992571).epsilon(1e-12));
    CHECK(stationary_sigma_lambda({1.0, 1.0, 5.0, 1.0}) == doctest::Approx(0.01645383094073829).epsilon(1e-12));
    CHECK(stationary_sigma_lambda({1.0, 1.0, 10.0, 1.0}) == doctest::Approx(0.0002269635824836475).epsilon(1e-12));
    CHECK(stationary_sigma_lambda({1.0, 1.0, 20.0, 1.0}) == doctest::Approx(2.0611536075693184e-08).epsilon(1e-12));
    CHECK(stationary_sigma_lambda({1.0, 1.0, kInf, 1.0}) == 0.0);
}

TEST_CASE("driven qubit structure") {
    const auto m = driven_qubit({});
    CHECK(m.dim() == 2);
    CHECK(m.picture() == Picture::interaction);
    CHECK(m.temperature() == doctest::Approx(1.0));
    REQUIRE(m.channels().size() == 1);
    const auto& ch = m.channels()[0];
    CHECK(ch.lower(qubit_basis::ground, qubit_basis::excited) == cplx(1.0));
    CHECK(ch.lower.max_abs() == 1.0);
    CHECK(m.hp()(qubit_basis::excited, qubit_basis::ground) == cplx(-0.5));
    CHECK(m.hp()(qubit_basis::ground, qubit_basis::excited) == cplx(-0.5));
    CHECK(eigen_operator_residual(m.h0(), ch.lower, 1.0) <= 1e-9);

    CHECK_THROWS_AS(driven_qubit({0.0, 0.1, 1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(driven_qubit({1.0, -0.1, 1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(driven_qubit({1.0, 0.1, kInf, 1.0}), ValidationError);
}

TEST_CASE("Lambda system structure and effective Hamiltonian") {
    const double rabi = 0.7, gm = 1.3, ot = 0.9;
    const auto m = lambda_system({rabi, gm, ot, 1.0});
    const double gp = gm * std::exp(-ot);
    using namespace lambda_basis;
    REQUIRE(m.channels().size() == 2);
    for (const auto& ch : m.channels()) CHECK(eigen_operator_residual(m.h0(), ch.lower, 1.0) <= 1e-9);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(m.channels()[0].lower(ground_m, excited).real() == doctest::Approx(s));
    CHECK(m.channels()[1].lower(ground_p, excited).real() == doctest::Approx(s));

    Operator expected(3);
    expected(excited, excited) = cplx(0.0, -0.5 * gm);
    expected(ground_p, ground_p) = cplx(0.0, -0.25 * gp);
    expected(ground_m, ground_m) = cplx(0.0, -0.25 * gp);
    expected(excited, ground_p) = cplx(0.0, -0.5 * rabi);
    expected(excited, ground_m) = cplx(0.0, 0.5 * rabi);
    expected(ground_p, excited) = cplx(0.0, 0.5 * rabi);
    expected(ground_m, excited) = cplx(0.0, -0.5 * rabi);
    CHECK(max_dev(m.h_eff(), expected) <= 1e-15);

    CHECK(lambda_system({1.0, 1.0, kInf, 1.0}).temperature() == 0.0);
    CHECK_THROWS_AS(lambda_system({1.0, 1.0, -1.0, 1.0}), ValidationError);
}

TEST_CASE("dark state is decoupled from the drive and stationary at zero temperature") {
    const auto m = lambda_system({1.0, 1.0, kInf, 1.0});
    const auto dark = dark_state();
    CHECK(dark.norm() == doctest::Approx(1.0));
    const StateVector driven = m.hp() * dark;
    CHECK(driven.norm() <= 1e-15);
    CHECK(liouvillian_apply(m, DensityMatrix::pure(dark)).max_abs() <= 1e-15);
}

TEST_CASE("inversion") {
    CHECK(inversion(DensityMatrix::pure(StateVector::basis(2, qubit_basis::excited))) == 1.0);
    CHECK(inversion(DensityMatrix::maximally_mixed(2)) == 0.0);
    CHECK_THROWS_AS(inversion(DensityMatrix::maximally_mixed(3)), ValidationError);
}

TEST_CASE("closed forms agree with the null-space stationary state across parameters") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> rabi(0.2, 3.0), gamma(0.05, 2.0), beta(0.1, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
        const QubitParams qp{rabi(rng), gamma(rng), beta(rng), 1.0};
        const auto qm = driven_qubit(qp);
        const DensityMatrix qrho(oracle::from_eigen(oracle::null_space_stationary(qm)));
        CHECK(inversion(qrho) == doctest::Approx(stationary_inversion_qubit(qp)).epsilon(1e-9));
        CHECK(oracle::sigma(qm, oracle::to_eigen(qrho.op())) ==
              doctest::Approx(stationary_sigma_qubit(qp)).epsilon(1e-8));

        const LambdaParams lp{rabi(rng), gamma(rng), beta(rng), 1.0};
        const auto lm = lambda_system(lp);
        const DensityMatrix lrho(oracle::from_eigen(oracle::null_space_stationary(lm)));
        CHECK(lrho(lambda_basis::ground_p, lambda_basis::ground_m).real() ==
              doctest::Approx(stationary_coherence_lambda(lp)).epsilon(1e-9));
        CHECK(oracle::sigma(lm, oracle::to_eigen(lrho.op())) ==
              doctest::Approx(stationary_sigma_lambda(lp)).epsilon(1e-8));
    }
}

TEST_CASE("mix_channels leaves the dissipator and sigma unchanged") {
    const auto m = lambda_system({});
    const double c = 1.0 / std::sqrt(2.0);
    const std::vector<Operator> mixes = {Operator::identity(2), Operator{{0.0, 1.0}, {1.0, 0.0}},
                                         Operator{{c, -c}, {c, c}}, Operator{{c, cplx(0.0, c)}, {cplx(0.0, c), c}}};
    std::mt19937_64 rng(8);
    std::vector<DensityMatrix> states;
    for (int k = 0; k < 20; ++k) states.push_back(oracle::random_density(3, rng));

    for (const auto& u : mixes) {
        const auto mixed = mix_channels(m, 1.0, u);
        REQUIRE(mixed.channels().size() == 2);
        for (const auto& rho : states) {
            CHECK(max_dev(dissipator(mixed, rho), dissipator(m, rho)) <= 1e-12);
            CHECK(std::abs(entropy_production_functional(mixed, rho) - entropy_production_functional(m, rho)) <=
                  1e-10);
        }
    }
    const auto swapped = mix_channels(m, 1.0, mixes[1]);
    CHECK(max_dev(swapped.channels()[0].lower, m.channels()[1].lower) == 0.0);
}

TEST_CASE("mix_channels input validation") {
    const auto m = lambda_system({});
    CHECK_THROWS_AS(mix_channels(m, 2.0, Operator::identity(2)), ValidationError);
    CHECK_THROWS_AS(mix_channels(m, 1.0, Operator::identity(3)), ValidationError);
    CHECK_THROWS_AS(mix_channels(m, 1.0, Operator{{1.0, 0.1}, {0.0, 1.0}}), ValidationError);

    const double s = 1.0 / std::sqrt(2.0);
    const auto e0 = StateVector::basis(3, 0);
    const auto unequal = build_model(Operator::diagonal({0.5, -0.5, -0.5}), Operator(3),
                                     {{Operator::outer(StateVector::basis(3, 2), e0) * s, 1.0, 1.0},
                                      {Operator::outer(StateVector::basis(3, 1), e0) * s, 1.0, 0.5}},
                                     1.0, Picture::interaction);
    CHECK_THROWS_AS(mix_channels(unequal, 1.0, Operator::identity(2)), ValidationError);
}
