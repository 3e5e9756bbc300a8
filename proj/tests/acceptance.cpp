// acceptance.cpp: End-to-end acceptance checks, one PASS/FAIL line each

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jumpsigma/cli.hpp"
#include "jumpsigma/ensemble.hpp"
#include "jumpsigma/lindblad.hpp"
#include "jumpsigma/models.hpp"
#include "jumpsigma/pdp.hpp"
#include "oracles.hpp"

using namespace jumpsigma;

namespace {

constexpr double kQubitSigma = 0.031313;
constexpr double kLambdaSigma = 0.072582;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<DensityMatrix> random_states(std::size_t d, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<DensityMatrix> out;
    for (std::size_t k = 0; k < n; ++k) {
        const auto rho = oracle::random_density(d, rng);
        if (k % 4 == 3) {
            const double w = 1.0 - 1e-6 * u(rng);
            const Operator basis = oracle::random_unitary(d, rng);
            StateVector psi(d);
            for (std::size_t r = 0; r < d; ++r) psi[r] = basis(r, 0);
            out.emplace_back(Operator::projector(psi) * w + rho.op() * (1.0 - w));
        } else {
            out.push_back(rho);
        }
    }
    return out;
}

/// Bin-averaged master-equation sigma on the Monte Carlo bins:
/// (S(right) - S(left)) / w + mean of J over the bin.
std::vector<double> master_bin_sigma(const LindbladModel& m, const DensityMatrix& rho0, double t_max, double bin_width,
                                     double dt) {
    const std::size_t per_bin = 100;
    const std::size_t n_bins = static_cast<std::size_t>(std::llround(t_max / bin_width));
    std::vector<double> grid;
    for (std::size_t k = 0; k <= n_bins * per_bin; ++k) grid.push_back(bin_width * static_cast<double>(k) / per_bin);
    const auto states = integrate_master(m, rho0, grid, dt);
    std::vector<double> s(states.size()), j(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
        s[k] = von_neumann_entropy(states[k]);
        j[k] = entropy_flux(m, states[k]);
    }
    std::vector<double> out;
    const double h = bin_width / per_bin;
    for (std::size_t b = 0; b < n_bins; ++b) {
        const std::size_t lo = b * per_bin, hi = lo + per_bin;
        double integral = 0.0;  // Simpson, per_bin even
        for (std::size_t k = lo; k <= hi; ++k) {
            const double w = (k == lo || k == hi) ? 1.0 : ((k - lo) % 2 ? 4.0 : 2.0);
            integral += w * j[k];
        }
        integral *= h / 3.0;
        out.push_back((s[hi] - s[lo]) / bin_width + integral / bin_width);
    }
    return out;
}

double late_mean(const EnsembleStats& st, double from, double to) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < st.bin_centers.size(); ++b)
        if (st.bin_centers[b] >= from && st.bin_centers[b] <= to) {
            sum += st.sigma_hat[b];
            ++n;
        }
    return sum / static_cast<double>(n);
}

double late_stderr(const EnsembleStats& st, double from, double to) {
    double var = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < st.bin_centers.size(); ++b)
        if (st.bin_centers[b] >= from && st.bin_centers[b] <= to) {
            var += st.stderr_sigma[b] * st.stderr_sigma[b];
            ++n;
        }
    return std::sqrt(var) / static_cast<double>(n);
}

EnsembleStats run_mc(const LindbladModel& m, const StateVector& psi0, double t_max, std::uint64_t n,
                     std::uint64_t seed, double bin_width) {
    EnsembleRunConfig cfg;
    cfg.t_max = t_max;
    cfg.dt = 1e-3;
    cfg.sample_every = 50;
    cfg.n_trajectories = n;
    cfg.seed = seed;
    return summarize(run_ensemble(m, InitialEnsemble::pure(psi0), cfg), m, bin_width);
}

Outcome mc_vs_master(const LindbladModel& m, const StateVector& psi0, double t_max, double sigma_ref,
                     std::uint64_t seed, bool check_bins) {
    const double w = 0.5;
    const auto st = run_mc(m, psi0, t_max, 100000, seed, w);
    const double late = late_mean(st, t_max - 5.0, t_max);
    const double rel = std::abs(late - sigma_ref) / sigma_ref;
    std::ostringstream d;
    d << "late mean sigma = " << fmt("%.6f", late) << " +- " << fmt("%.6f", late_stderr(st, t_max - 5.0, t_max))
      << " vs " << sigma_ref << " (rel " << fmt("%.4f", rel) << ", need <= 0.05)";
    bool pass = rel <= 0.05;
    if (check_bins) {
        const auto ref = master_bin_sigma(m, DensityMatrix::pure(psi0), t_max, w, 1e-3);
        std::size_t agree = 0;
        for (std::size_t b = 0; b < ref.size(); ++b)
            if (std::abs(st.sigma_hat[b] - ref[b]) <= 3.0 * st.stderr_sigma[b]) ++agree;
        const double frac = static_cast<double>(agree) / static_cast<double>(ref.size());
        double window = 0.0;
        std::size_t n_window = 0;
        for (std::size_t b = 0; b < ref.size(); ++b)
            if (st.bin_centers[b] >= t_max - 5.0) {
                window += ref[b];
                ++n_window;
            }
        window /= static_cast<double>(n_window);
        d << "; master-equation mean over the same window = " << fmt("%.6f", window) << " (rel "
          << fmt("%.4f", std::abs(window - sigma_ref) / sigma_ref) << ")";
        d << "; bins within 3 stderr of master: " << agree << "/" << ref.size() << " (need >= 95%)";
        pass = pass && frac >= 0.95;
    }
    return {pass, d.str()};
}

Outcome criterion1() {
    return mc_vs_master(models::driven_qubit({}), StateVector::basis(2, models::qubit_basis::ground), 20.0, kQubitSigma,
                        1, true);
}

Outcome criterion2() {
    const auto m = models::lambda_system({});
    const auto psi0 = StateVector::basis(3, models::lambda_basis::ground_p);
    auto mc = mc_vs_master(m, psi0, 20.0, kLambdaSigma, 2, true);

    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(1.0 * k);
    const auto states = integrate_master(m, DensityMatrix::pure(psi0), grid, 1e-3);
    const double closed = models::stationary_sigma_lambda({});
    double worst = 0.0;
    for (std::size_t k = 30; k < states.size(); ++k)
        worst = std::max(worst, std::abs(entropy_production_functional(m, states[k]) - closed) / closed);
    mc.pass = mc.pass && worst <= 1e-4;
    mc.detail += "; master sigma for t >= 30 within " + fmt("%.2e", worst) + " relative (need <= 1e-4)";
    return mc;
}

Outcome criterion3() {
    std::ostringstream d;
    bool pass = true;
    const std::vector<std::pair<LindbladModel, StateVector>> cases = {
        {models::driven_qubit({}), StateVector::basis(2, models::qubit_basis::ground)},
        {models::lambda_system({}), StateVector::basis(3, models::lambda_basis::ground_p)}};
    const char* names[] = {"qubit", "lambda"};
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& [m, psi0] = cases[c];
        EnsembleRunConfig cfg;
        cfg.t_max = 20.0;
        cfg.dt = 1e-3;
        cfg.sample_every = 50;
        cfg.n_trajectories = 10000;
        cfg.seed = 3 + c;
        const auto acc = run_ensemble(m, InitialEnsemble::pure(psi0), cfg);
        const auto st = summarize(acc, m, 0.5);
        const auto master = integrate_master(m, DensityMatrix::pure(psi0), acc.grid(), 1e-3);
        double worst = 0.0;
        for (std::size_t k = 0; k < master.size(); ++k) worst = std::max(worst, trace_distance(st.rho_hat[k], master[k]));
        pass = pass && worst <= 0.05;
        d << (c ? "; " : "") << names[c] << " max trace distance " << fmt("%.4f", worst);
    }
    d << " (need <= 0.05)";
    return {pass, d.str()};
}

Outcome criterion4() {
    std::ostringstream d;
    bool pass = true;
    const std::vector<LindbladModel> cases = {models::driven_qubit({}), models::lambda_system({})};
    const char* names[] = {"qubit", "lambda"};
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& m = cases[c];
        const auto states = random_states(m.dim(), 1000, 40 + c);
        const auto partners = random_states(m.dim(), 1000, 50 + c);
        std::mt19937_64 rng(60 + c);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double min_sigma = std::numeric_limits<double>::infinity(), worst_convexity = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < states.size(); ++k) {
            const double s1 = entropy_production_functional(m, states[k]);
            const double s2 = entropy_production_functional(m, partners[k]);
            min_sigma = std::min(min_sigma, s1);
            const double lambda = unit(rng);
            const DensityMatrix mix(states[k].op() * lambda + partners[k].op() * (1.0 - lambda));
            worst_convexity =
                std::max(worst_convexity, entropy_production_functional(m, mix) - (lambda * s1 + (1.0 - lambda) * s2));
        }
        const double at_gibbs = std::abs(entropy_production_functional(m, gibbs_state(m)));
        pass = pass && min_sigma >= -1e-9 && at_gibbs <= 1e-9 && worst_convexity <= 1e-9;
        d << (c ? "; " : "") << names[c] << ": min sigma " << fmt("%.3e", min_sigma) << ", |sigma[rho_th]| "
          << fmt("%.1e", at_gibbs) << ", max convexity excess " << fmt("%.1e", worst_convexity);
    }
    d << " (1000 states and 1000 triples each)";
    return {pass, d.str()};
}

Outcome criterion5() {
    double worst_zero = 0.0, worst_energy = 0.0, worst_balance = 0.0;
    for (double ot : {0.5, 1.0, 1.25, 5.0}) {
        for (const auto& m : {models::driven_qubit({1.0, 0.1, ot, 1.0}), models::lambda_system({1.0, 1.0, ot, 1.0})}) {
            worst_zero = std::max(worst_zero, dissipator(m, gibbs_state(m)).max_abs());
            for (const auto& rho : random_states(m.dim(), 250, static_cast<std::uint64_t>(ot * 100) + m.dim())) {
                const auto b = entropy_balance(m, rho);
                const double energy = trace_of_product(m.h0(), dissipator(m, rho)).real();
                const double target = -m.temperature() * b.flux;
                worst_energy = std::max(worst_energy, std::abs(energy - target) / std::max(std::abs(target), 1e-300));
                worst_balance = std::max(worst_balance, std::abs(b.sigma - (b.dsdt + b.flux)));
            }
        }
    }
    std::ostringstream d;
    d << "||D(rho_th)||max " << fmt("%.1e", worst_zero) << " (<= 1e-10); tr{H0 D} vs -T J rel "
      << fmt("%.1e", worst_energy) << " (<= 1e-9); |sigma - dS/dt - J| " << fmt("%.1e", worst_balance) << " (<= 1e-9)";
    return {worst_zero <= 1e-10 && worst_energy <= 1e-9 && worst_balance <= 1e-9, d.str()};
}

Outcome criterion6() {
    const auto q = models::driven_qubit({});
    const auto l = models::lambda_system({});
    const double q_closed = models::stationary_sigma_qubit({}), l_closed = models::stationary_sigma_lambda({});

    const double q_sigma = entropy_production_functional(q, stationary_state(q));
    const double l_sigma = entropy_production_functional(l, stationary_state(l));
    const auto q_null = oracle::null_space_stationary(q), l_null = oracle::null_space_stationary(l);
    const double q_oracle = oracle::sigma(q, q_null), l_oracle = oracle::sigma(l, l_null);
    const double q_state = (oracle::to_eigen(stationary_state(q).op()) - q_null).cwiseAbs().maxCoeff();
    const double l_state = (oracle::to_eigen(stationary_state(l).op()) - l_null).cwiseAbs().maxCoeff();

    const double e1 = std::abs(q_sigma - q_closed) / q_closed, e2 = std::abs(l_sigma - l_closed) / l_closed;
    const double e3 = std::abs(q_oracle - q_closed) / q_closed, e4 = std::abs(l_oracle - l_closed) / l_closed;
    std::ostringstream d;
    d << "qubit rel " << fmt("%.1e", e1) << ", lambda rel " << fmt("%.1e", e2) << "; null-space oracle rel "
      << fmt("%.1e", e3) << ", " << fmt("%.1e", e4) << "; state deviation " << fmt("%.1e", q_state) << ", "
      << fmt("%.1e", l_state) << " (need <= 1e-6)";
    return {std::max({e1, e2, e3, e4, q_state, l_state}) <= 1e-6, d.str()};
}

Outcome criterion7() {
    const auto m = models::lambda_system({});
    const auto states = random_states(3, 100, 70);
    std::vector<double> base;
    for (const auto& rho : states) base.push_back(entropy_production_functional(m, rho));
    std::mt19937_64 rng(71);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto mixed = models::mix_channels(m, 1.0, oracle::random_unitary(2, rng));
        for (std::size_t j = 0; j < states.size(); ++j)
            worst = std::max(worst, std::abs(entropy_production_functional(mixed, states[j]) - base[j]));
    }
    return {worst <= 1e-10, "max |delta sigma| " + fmt("%.1e", worst) + " over 20 unitaries x 100 states (need <= 1e-10)"};
}

Outcome criterion8() {
    const auto m = models::lambda_system({1.0, 1.0, 20.0, 1.0});
    const std::vector<double> grid{0.0, 20.0};
    const auto states = integrate_master(m, DensityMatrix::pure(StateVector::basis(3, models::lambda_basis::ground_p)),
                                         grid, 1e-3);
    const auto dark = models::dark_state();
    const double fidelity = inner(dark, states.back().op() * dark).real();
    const double s5 = models::stationary_sigma_lambda({1.0, 1.0, 5.0, 1.0});
    const double s10 = models::stationary_sigma_lambda({1.0, 1.0, 10.0, 1.0});
    const double s20 = models::stationary_sigma_lambda({1.0, 1.0, 20.0, 1.0});
    std::ostringstream d;
    d << "dark-state fidelity at t = 20: " << fmt("%.6f", fidelity) << " (need >= 0.99); sigma(5, 10, 20) = "
      << fmt("%.3e", s5) << ", " << fmt("%.3e", s10) << ", " << fmt("%.3e", s20);
    return {fidelity >= 0.99 && s5 > s10 && s10 > s20 && s20 > 0.0, d.str()};
}

Outcome criterion9() {
    const double gamma = 1.0, dt = 1e-3;
    const Operator a = Operator::outer(StateVector::basis(2, 1), StateVector::basis(2, 0));
    const auto m = build_model(Operator::diagonal({0.5, -0.5}), Operator(2), {{a, 1.0, gamma}}, 0.0, Picture::interaction);
    const PdpEngine engine(m, dt);
    const std::size_t n = 10000;
    double sum = 0.0, sum2 = 0.0;
    std::size_t censored = 0;
    for (std::size_t k = 0; k < n; ++k) {
        RngStream rng(9, k);
        const auto rec = engine.simulate(StateVector::basis(2, 0), 25.0, 25000, rng);
        if (rec.events.empty()) {
            ++censored;
            continue;
        }
        sum += rec.events.front().time;
        sum2 += rec.events.front().time * rec.events.front().time;
    }
    const double mean = sum / static_cast<double>(n - censored);
    const double se = std::sqrt((sum2 / static_cast<double>(n - censored) - mean * mean) / static_cast<double>(n - censored));
    std::ostringstream d;
    d << "mean first jump time " << fmt("%.5f", mean) << " +- " << fmt("%.5f", se) << " vs " << 1.0 / gamma
      << " (need within 3 stderr; censored " << censored << ")";
    return {censored == 0 && std::abs(mean - 1.0 / gamma) <= 3.0 * se, d.str()};
}

Outcome criterion10() {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "jumpsigma_acceptance";
    fs::create_directories(dir);
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    };
    bool pass = true;
    std::ostringstream d;
    for (auto model : {cli::ModelKind::qubit, cli::ModelKind::lambda}) {
        cli::RunConfig c;
        c.model = model;
        c.t_max = 5.0;
        c.trajectories = 2000;
        c.seed = 42;
        std::vector<std::string> outputs;
        for (std::size_t workers : {1u, 1u, 2u, 7u}) {
            c.workers = workers;
            c.output_path = (dir / ("run" + std::to_string(outputs.size()) + ".csv")).string();
            std::ostringstream out, err;
            if (cli::run(c, out, err) != cli::kExitOk) return {false, "run failed: " + err.str()};
            outputs.push_back(slurp(c.output_path));
        }
        bool same = !outputs[0].empty();
        for (const auto& o : outputs) same = same && o == outputs[0];
        pass = pass && same;
        d << (model == cli::ModelKind::qubit ? "qubit" : "; lambda") << (same ? " identical" : " DIFFERENT");
    }
    d << " across 2 repeats and 1, 2, 7 workers";
    return {pass, d.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 qubit Monte Carlo matches master equation and stationary sigma", criterion1},
        {"2 Lambda Monte Carlo and master equation reach stationary sigma", criterion2},
        {"3 trajectory average equals master-equation state", criterion3},
        {"4 second law: positivity, Gibbs zero, convexity", criterion4},
        {"5 zero-mode, energy-flux and balance identities", criterion5},
        {"6 stationary state and closed forms agree", criterion6},
        {"7 degenerate-channel mixing invariance", criterion7},
        {"8 dark-state limit", criterion8},
        {"9 waiting-time law", criterion9},
        {"10 deterministic CSV output", criterion10},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << " [" << fmt("%.1f", secs) << " s]"
                  << std::endl;
        if (!o.pass) ++failures;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
