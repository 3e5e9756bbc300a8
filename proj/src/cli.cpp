// cli.cpp: Batch front-end: configuration, pipelines and CSV output

#include "jumpsigma/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "jumpsigma/ensemble.hpp"
#include "jumpsigma/errors.hpp"
#include "jumpsigma/models.hpp"
#include "jumpsigma/pdp.hpp"

namespace jumpsigma::cli {

namespace {

const char* name(ModelKind m) { return m == ModelKind::qubit ? "qubit" : "lambda"; }

const char* name(Mode m) {
    switch (m) {
    case Mode::mc: return "mc";
    case Mode::master: return "master";
    default: return "both";
    }
}

const char* name(InitialKind k) {
    switch (k) {
    case InitialKind::ground: return "ground";
    case InitialKind::excited: return "excited";
    default: return "thermal";
    }
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool runs_mc(Mode m) { return m != Mode::master; }
bool runs_master(Mode m) { return m != Mode::mc; }

bool is_multiple(double a, double b) {
    const double r = a / b;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r) && std::round(r) >= 1.0;
}

} // namespace

RunConfig resolved(RunConfig c) {
    if (c.gamma_minus < 0.0) c.gamma_minus = c.model == ModelKind::qubit ? 0.1 : 1.0;
    if (c.omega_over_t < 0.0) c.omega_over_t = c.model == ModelKind::qubit ? 1.0 : 1.25;
    return c;
}

void check(const RunConfig& raw) {
    const RunConfig c = resolved(raw);
    auto fail = [](const std::string& m) { throw ValidationError(m); };
    if (!(c.rabi > 0.0) || !std::isfinite(c.rabi)) fail("--rabi must be positive");
    if (!std::isfinite(c.gamma_minus)) fail("--gamma-minus must be finite");
    if (!(c.omega_over_t > 0.0) || !std::isfinite(c.omega_over_t)) fail("--omega-over-t must be finite and positive");
    if (!(c.dt > 0.0)) fail("--dt must be positive");
    if (!(c.t_max > c.dt)) fail("--t-max must exceed --dt");
    if (c.sample_every == 0) fail("--sample-every must be at least 1");
    if (!is_multiple(c.t_max, c.dt)) fail("--t-max must be a whole number of --dt steps");
    if (!(c.channel_omega_scale > 0.0)) fail("--channel-omega-scale must be positive");
    if (runs_mc(c.mode)) {
        if (c.trajectories < 1) fail("--trajectories must be at least 1 in mc modes");
        if (!(c.bin_width >= 5.0 * c.dt)) fail("--bin-width must be at least 5 * dt");
        const double sample_interval = static_cast<double>(c.sample_every) * c.dt;
        if (!is_multiple(c.bin_width, sample_interval))
            fail("--bin-width must be a whole number of sampling intervals (sample-every * dt)");
        if (c.t_max < 3.0 * c.bin_width) fail("--t-max must span at least 3 bins");
    }
}

LindbladModel make_model(const RunConfig& raw) {
    const RunConfig c = resolved(raw);
    LindbladModel model = c.model == ModelKind::qubit
                              ? models::driven_qubit({c.rabi, c.gamma_minus, c.omega_over_t, 1.0})
                              : models::lambda_system({c.rabi, c.gamma_minus, c.omega_over_t, 1.0});
    if (c.channel_omega_scale != 1.0) {
        std::vector<ChannelSpec> specs;
        for (const auto& ch : model.channels())
            specs.push_back({ch.lower, ch.omega * c.channel_omega_scale, ch.gamma_minus});
        model = build_model(model.h0(), model.hp(), std::move(specs), model.temperature(), model.picture());
    }
    return model;
}

double closed_form_sigma(const RunConfig& raw) {
    const RunConfig c = resolved(raw);
    return c.model == ModelKind::qubit
               ? models::stationary_sigma_qubit({c.rabi, c.gamma_minus, c.omega_over_t, 1.0})
               : models::stationary_sigma_lambda({c.rabi, c.gamma_minus, c.omega_over_t, 1.0});
}

std::string describe(const RunConfig& raw) {
    const RunConfig c = resolved(raw);
    std::ostringstream s;
    s << "model=" << name(c.model) << ";rabi=" << num(c.rabi) << ";gamma-minus=" << num(c.gamma_minus)
      << ";omega-over-t=" << num(c.omega_over_t) << ";t-max=" << num(c.t_max) << ";dt=" << num(c.dt)
      << ";trajectories=" << c.trajectories << ";seed=" << c.seed << ";bin-width=" << num(c.bin_width)
      << ";sample-every=" << c.sample_every << ";mode=" << name(c.mode) << ";initial=" << name(c.initial);
    return s.str();
}

namespace {

InitialEnsemble initial_ensemble(const RunConfig& c, const LindbladModel& model) {
    switch (c.initial) {
    case InitialKind::thermal: return InitialEnsemble::thermal(model);
    case InitialKind::excited:
        return InitialEnsemble::pure(StateVector::basis(
            model.dim(), c.model == ModelKind::qubit ? models::qubit_basis::excited : models::lambda_basis::excited));
    default:
        return InitialEnsemble::pure(StateVector::basis(
            model.dim(), c.model == ModelKind::qubit ? models::qubit_basis::ground : models::lambda_basis::ground_p));
    }
}

struct Row {
    double t = 0.0;
    bool mc = false;
    std::map<std::string, double> values;
};

struct MasterSeries {
    std::vector<double> grid, entropy, flux, sigma;
    std::vector<std::vector<double>> counts_minus, counts_plus;
};

MasterSeries run_master(const RunConfig& c, const LindbladModel& model, const DensityMatrix& rho0,
                        const std::vector<double>& grid) {
    MasterSeries m;
    m.grid = grid;
    const auto states = integrate_master(model, rho0, grid, c.dt);
    const std::size_t nch = model.channels().size();
    m.counts_minus.assign(nch, std::vector<double>(grid.size(), 0.0));
    m.counts_plus.assign(nch, std::vector<double>(grid.size(), 0.0));
    std::vector<double> prev_minus(nch), prev_plus(nch);
    for (std::size_t k = 0; k < states.size(); ++k) {
        m.entropy.push_back(von_neumann_entropy(states[k]));
        m.flux.push_back(entropy_flux(model, states[k]));
        m.sigma.push_back(entropy_production_functional(model, states[k]));
        for (std::size_t i = 0; i < nch; ++i) {
            const auto& ch = model.channels()[i];
            const double down = ch.gamma_minus * trace_of_product(ch.raise * ch.lower, states[k]).real();
            const double up = ch.gamma_plus * trace_of_product(ch.lower * ch.raise, states[k]).real();
            if (k > 0) {
                const double h = grid[k] - grid[k - 1];
                m.counts_minus[i][k] = m.counts_minus[i][k - 1] + 0.5 * h * (down + prev_minus[i]);
                m.counts_plus[i][k] = m.counts_plus[i][k - 1] + 0.5 * h * (up + prev_plus[i]);
            }
            prev_minus[i] = down;
            prev_plus[i] = up;
        }
    }
    return m;
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& v, double t) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return v.front();
    if (it == grid.end()) return v.back();
    const auto k = static_cast<std::size_t>(it - grid.begin());
    const double w = (t - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return (1.0 - w) * v[k - 1] + w * v[k];
}

double late_mean(const std::vector<double>& t, const std::vector<double>& v, double from) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k] >= from) {
            s += v[k];
            ++n;
        }
    return n ? s / static_cast<double>(n) : std::nan("");
}

std::string render_csv(const RunConfig& c, std::size_t n_channels, const std::vector<Row>& rows) {
    std::vector<std::string> columns = {"t",      "S_mc",         "S_me",     "J_mc",
                                        "J_me",   "sigma_mc",     "stderr_sigma",
                                        "sigma_me", "sigma_stationary"};
    for (std::size_t i = 0; i < n_channels; ++i) {
        columns.push_back("N_minus_mean_" + std::to_string(i));
        columns.push_back("N_plus_mean_" + std::to_string(i));
    }
    std::ostringstream s;
    s << "# seed=" << c.seed << "\n";
    s << "# config=" << describe(c) << "\n";
    s << "source";
    for (const auto& col : columns) s << "," << col;
    s << "\n";
    for (const auto& row : rows) {
        s << (row.mc ? "mc" : "me");
        for (const auto& col : columns) {
            s << ",";
            if (col == "t") {
                s << num(row.t);
                continue;
            }
            const auto it = row.values.find(col);
            if (it != row.values.end()) s << num(it->second);
        }
        s << "\n";
    }
    return s.str();
}

} // namespace

int run(const RunConfig& raw, std::ostream& out, std::ostream& err) {
    bool wrote = false;
    const RunConfig c = resolved(raw);
    try {
        check(c);
        const LindbladModel model = make_model(c);
        const double sigma_s = closed_form_sigma(c);
        const InitialEnsemble initial = initial_ensemble(c, model);
        const std::size_t nch = model.channels().size();

        const std::size_t n_steps = step_count(c.t_max, c.dt);
        std::vector<double> grid;
        for (std::size_t s = 0; s <= n_steps; s += c.sample_every) grid.push_back(static_cast<double>(s) * c.dt);

        std::vector<Row> rows;
        std::optional<MasterSeries> master;
        std::optional<EnsembleStats> stats;

        if (runs_master(c.mode)) {
            master = run_master(c, model, initial.density(), grid);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                Row r{grid[k], false, {}};
                r.values["S_me"] = master->entropy[k];
                r.values["J_me"] = master->flux[k];
                r.values["sigma_me"] = master->sigma[k];
                r.values["sigma_stationary"] = sigma_s;
                for (std::size_t i = 0; i < nch; ++i) {
                    r.values["N_minus_mean_" + std::to_string(i)] = master->counts_minus[i][k];
                    r.values["N_plus_mean_" + std::to_string(i)] = master->counts_plus[i][k];
                }
                rows.push_back(std::move(r));
            }
        }

        if (runs_mc(c.mode)) {
            EnsembleRunConfig ec;
            ec.t_max = c.t_max;
            ec.dt = c.dt;
            ec.sample_every = c.sample_every;
            ec.n_trajectories = c.trajectories;
            ec.seed = c.seed;
            ec.workers = c.workers;
            const auto acc = run_ensemble(model, initial, ec);
            if (acc.max_step_probability() > kWarnStepJumpProbability)
                err << "warning: per-step jump probability reached " << acc.max_step_probability()
                    << "; results carry O(dt) bias, consider a smaller --dt\n";
            stats = summarize(acc, model, c.bin_width);
            for (std::size_t b = 0; b < stats->bin_centers.size(); ++b) {
                const double t = stats->bin_centers[b];
                Row r{t, true, {}};
                r.values["S_mc"] = stats->entropy_at_center[b];
                r.values["J_mc"] = stats->flux_hat[b];
                r.values["sigma_mc"] = stats->sigma_hat[b];
                r.values["stderr_sigma"] = stats->stderr_sigma[b];
                r.values["sigma_stationary"] = sigma_s;
                for (std::size_t i = 0; i < nch; ++i) {
                    r.values["N_minus_mean_" + std::to_string(i)] =
                        interpolate(stats->grid, stats->mean_counts_minus[i], t);
                    r.values["N_plus_mean_" + std::to_string(i)] =
                        interpolate(stats->grid, stats->mean_counts_plus[i], t);
                }
                rows.push_back(std::move(r));
            }
        }

        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            if (a.t != b.t) return a.t < b.t;
            return !a.mc && b.mc;
        });

        const std::string csv = render_csv(c, nch, rows);
        {
            std::ofstream f(c.output_path, std::ios::binary | std::ios::trunc);
            wrote = true;
            if (!f) throw ValidationError("cannot open output file " + c.output_path);
            f << csv;
            f.flush();
            if (!f) throw ValidationError("failed writing output file " + c.output_path);
        }

        const double late = 0.75 * c.t_max;
        out << "model " << name(c.model) << ": closed-form stationary sigma = " << num(sigma_s) << "\n";
        if (master) out << "master equation: mean sigma for t >= " << late << " = " << num(late_mean(grid, master->sigma, late)) << "\n";
        if (stats) {
            out << "monte carlo (" << stats->n_trajectories << " trajectories): mean sigma for t >= " << late
                << " = " << num(late_mean(stats->bin_centers, stats->sigma_hat, late)) << "\n";
            if (master) {
                std::size_t agree = 0;
                for (std::size_t b = 0; b < stats->bin_centers.size(); ++b) {
                    const double me = interpolate(grid, master->sigma, stats->bin_centers[b]);
                    if (std::abs(stats->sigma_hat[b] - me) <= 3.0 * stats->stderr_sigma[b]) ++agree;
                }
                out << "bins within 3 stderr of the master equation: " << agree << "/" << stats->bin_centers.size()
                    << "\n";
            }
        }
        out << "wrote " << c.output_path << "\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        if (wrote) std::filesystem::remove(c.output_path);
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        if (wrote) std::filesystem::remove(c.output_path);
        return kExitNumerical;
    }
}

int validate(const RunConfig& raw, std::ostream& out, std::ostream& err) {
    const RunConfig c = resolved(raw);
    try {
        const LindbladModel model = make_model(c);
        out << "model " << name(c.model) << " (dimension " << model.dim() << ", " << model.channels().size()
            << " channels, T = " << num(model.temperature()) << ")\n";
        bool kms_ok = true;
        for (std::size_t i = 0; i < model.channels().size(); ++i) {
            const auto& ch = model.channels()[i];
            const double expected = ch.gamma_minus * std::exp(-ch.omega / model.temperature());
            const bool ok = std::abs(ch.gamma_plus - expected) <= 1e-12 * std::max(expected, 1e-300);
            kms_ok = kms_ok && ok;
            out << "  channel " << i << ": omega = " << num(ch.omega) << ", gamma- = " << num(ch.gamma_minus)
                << ", gamma+ = " << num(ch.gamma_plus) << ", eigen-operator residual = "
                << eigen_operator_residual(model.h0(), ch.lower, ch.omega) << ", KMS " << (ok ? "ok" : "FAILED")
                << "\n";
        }
        std::map<double, std::size_t> by_omega;
        for (const auto& ch : model.channels()) ++by_omega[ch.omega];
        for (const auto& [omega, count] : by_omega)
            if (count > 1)
                out << "  degenerate spectrum: " << count << " channels share omega = " << num(omega)
                    << " (mixing them leaves sigma unchanged)\n";

        const auto rho_th = gibbs_state(model);
        out << "  Gibbs state diagonal:";
        for (std::size_t k = 0; k < model.dim(); ++k) out << " " << num(rho_th(k, k).real());
        out << "\n";
        out << "  closed-form stationary sigma = " << num(closed_form_sigma(c)) << "\n";
        out << "  recommended dt = " << num(default_master_step(model)) << "\n";
        if (!kms_ok) {
            out << "FAILED\n";
            return kExitValidation;
        }
        out << "OK\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        out << "FAILED: " << e.what() << "\n";
        err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Entropy production of driven open quantum systems: master equation and quantum-jump Monte Carlo"};
    app.set_config("--config", "", "Read options from a file of `key = value` lines; flags take precedence");

    const std::map<std::string, ModelKind> model_map{{"qubit", ModelKind::qubit}, {"lambda", ModelKind::lambda}};
    const std::map<std::string, Mode> mode_map{{"mc", Mode::mc}, {"master", Mode::master}, {"both", Mode::both}};
    const std::map<std::string, InitialKind> initial_map{
        {"ground", InitialKind::ground}, {"excited", InitialKind::excited}, {"thermal", InitialKind::thermal}};

    app.add_option("--model", c.model, "qubit or lambda")->transform(CLI::CheckedTransformer(model_map));
    app.add_option("--rabi", c.rabi, "Rabi frequency (reference unit)");
    app.add_option("--gamma-minus", c.gamma_minus, "Emission rate in units of the Rabi frequency");
    app.add_option("--omega-over-t", c.omega_over_t, "Bohr frequency over temperature");
    app.add_option("--t-max", c.t_max, "Simulated time");
    app.add_option("--dt", c.dt, "Time step");
    app.add_option("--trajectories", c.trajectories, "Number of Monte Carlo trajectories");
    app.add_option("--seed", c.seed, "Master seed for the per-trajectory random streams");
    app.add_option("--bin-width", c.bin_width, "Time bin for the Monte Carlo rate estimators");
    app.add_option("--sample-every", c.sample_every, "Store trajectory states every N steps");
    app.add_option("--output-path,-o", c.output_path, "CSV output file");
    app.add_option("--mode", c.mode, "mc, master or both")->transform(CLI::CheckedTransformer(mode_map));
    app.add_option("--initial", c.initial, "ground, excited or thermal")
        ->transform(CLI::CheckedTransformer(initial_map));
    app.add_option("--workers", c.workers, "Worker threads (0 = hardware concurrency)");
    app.add_option("--channel-omega-scale", c.channel_omega_scale,
                   "Declared channel frequency over the level splitting (diagnostic)");

    auto* run_cmd = app.add_subcommand("run", "Run the configured pipelines (default)")->fallthrough();
    auto* validate_cmd = app.add_subcommand("validate", "Check the model and print a report")->fallthrough();
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    }
    (void)run_cmd;
    if (validate_cmd->parsed()) return validate(c, out, err);
    return run(c, out, err);
}

} // namespace jumpsigma::cli
