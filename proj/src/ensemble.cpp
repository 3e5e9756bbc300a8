// ensemble.cpp: Monte Carlo aggregation of jump trajectories

#include "jumpsigma/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "jumpsigma/errors.hpp"

namespace jumpsigma {

InitialEnsemble InitialEnsemble::pure(StateVector psi) {
    InitialEnsemble e;
    e.weights = {1.0};
    e.states = {psi.normalized()};
    return e;
}

InitialEnsemble InitialEnsemble::thermal(const LindbladModel& model) {
    const auto eig = hermitian_eigen(gibbs_state(model).op());
    InitialEnsemble e;
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        StateVector v(model.dim());
        for (std::size_t r = 0; r < model.dim(); ++r) v[r] = eig.vectors(r, k);
        e.weights.push_back(std::max(eig.values[k], 0.0));
        e.states.push_back(v.normalized());
    }
    return e;
}

namespace {

double checked_total(const InitialEnsemble& e) {
    if (e.states.empty() || e.states.size() != e.weights.size())
        throw ValidationError("InitialEnsemble: weights and states must be non-empty and of equal length");
    double total = 0.0;
    for (double w : e.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("InitialEnsemble: weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("InitialEnsemble: all weights vanish");
    return total;
}

} // namespace

StateVector InitialEnsemble::draw(RngStream& rng) const {
    const double total = checked_total(*this);
    if (states.size() == 1) return states.front();
    const double u = rng.uniform() * total;
    double cum = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        cum += weights[k];
        if (weights[k] > 0.0 && u < cum) return states[k];
    }
    for (std::size_t k = states.size(); k-- > 0;)
        if (weights[k] > 0.0) return states[k];
    throw ValidationError("InitialEnsemble: all weights vanish");
}

DensityMatrix InitialEnsemble::density() const {
    const double total = checked_total(*this);
    Operator rho(states.front().dim());
    for (std::size_t k = 0; k < states.size(); ++k) rho += Operator::projector(states[k]) * (weights[k] / total);
    return DensityMatrix(std::move(rho));
}

// ---------------------------------------------------------------------------

EnsembleAccumulator::Sums& EnsembleAccumulator::Sums::operator+=(const Sums& o) {
    n += o.n;
    for (std::size_t k = 0; k < projectors.size(); ++k) projectors[k] += o.projectors[k];
    for (std::size_t k = 0; k < counts_minus.size(); ++k) counts_minus[k] += o.counts_minus[k];
    for (std::size_t k = 0; k < counts_plus.size(); ++k) counts_plus[k] += o.counts_plus[k];
    return *this;
}

EnsembleAccumulator::Sums& EnsembleAccumulator::Sums::operator-=(const Sums& o) {
    n -= o.n;
    for (std::size_t k = 0; k < projectors.size(); ++k) projectors[k] -= o.projectors[k];
    for (std::size_t k = 0; k < counts_minus.size(); ++k) counts_minus[k] -= o.counts_minus[k];
    for (std::size_t k = 0; k < counts_plus.size(); ++k) counts_plus[k] -= o.counts_plus[k];
    return *this;
}

EnsembleAccumulator::EnsembleAccumulator(std::vector<double> grid, std::size_t dim, std::size_t n_channels,
                                         std::size_t n_groups)
    : grid_(std::move(grid)), dim_(dim), n_channels_(n_channels) {
    if (grid_.empty()) throw ValidationError("EnsembleAccumulator: empty grid");
    if (dim_ == 0) throw ValidationError("EnsembleAccumulator: zero dimension");
    if (n_groups == 0) throw ValidationError("EnsembleAccumulator: need at least one group");
    groups_.assign(n_groups, empty_sums());
}

EnsembleAccumulator::Sums EnsembleAccumulator::empty_sums() const {
    Sums s;
    s.projectors.assign(grid_.size() * dim_ * dim_, cplx{});
    s.counts_minus.assign(n_channels_ * grid_.size(), 0.0);
    s.counts_plus.assign(n_channels_ * grid_.size(), 0.0);
    return s;
}

void EnsembleAccumulator::add(const TrajectoryRecord& record, std::uint64_t trajectory_index) {
    const std::size_t n_grid = grid_.size();
    if (record.grid.size() != n_grid || record.states.size() != n_grid)
        throw ValidationError("EnsembleAccumulator: record grid does not match");
    for (std::size_t k = 0; k < n_grid; ++k)
        if (std::abs(record.grid[k] - grid_[k]) > 1e-12 * std::max(1.0, std::abs(grid_[k])))
            throw ValidationError("EnsembleAccumulator: record grid does not match");
    if (record.counts_minus.size() != n_channels_ || record.counts_plus.size() != n_channels_)
        throw ValidationError("EnsembleAccumulator: record channel count does not match");

    Sums& g = groups_[trajectory_index % groups_.size()];
    g.n += 1;
    const std::size_t d = dim_;
    for (std::size_t k = 0; k < n_grid; ++k) {
        const StateVector& psi = record.states[k];
        if (psi.dim() != d) throw ValidationError("EnsembleAccumulator: state dimension does not match");
        cplx* out = &g.projectors[k * d * d];
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) out[r * d + c] += psi[r] * std::conj(psi[c]);
    }
    for (std::size_t i = 0; i < n_channels_; ++i)
        for (std::size_t k = 0; k < n_grid; ++k) {
            g.counts_minus[i * n_grid + k] += record.counts_minus[i][k];
            g.counts_plus[i * n_grid + k] += record.counts_plus[i][k];
        }
    max_step_probability_ = std::max(max_step_probability_, record.max_step_probability);
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
    if (other.grid_ != grid_ || other.dim_ != dim_ || other.n_channels_ != n_channels_ ||
        other.groups_.size() != groups_.size())
        throw ValidationError("EnsembleAccumulator: cannot merge accumulators of different shape");
    for (std::size_t g = 0; g < groups_.size(); ++g) groups_[g] += other.groups_[g];
    max_step_probability_ = std::max(max_step_probability_, other.max_step_probability_);
}

std::uint64_t EnsembleAccumulator::n_trajectories() const {
    std::uint64_t n = 0;
    for (const auto& g : groups_) n += g.n;
    return n;
}

EnsembleAccumulator::Sums EnsembleAccumulator::total() const {
    Sums s = empty_sums();
    for (const auto& g : groups_) s += g;
    return s;
}

// ---------------------------------------------------------------------------

namespace {

struct BinLayout {
    std::size_t stride = 0;  // grid intervals per bin
    std::size_t n_bins = 0;
    double width = 0.0;
};

BinLayout bin_layout(const std::vector<double>& grid, double bin_width) {
    if (grid.size() < 2) throw ValidationError("binning needs at least two grid points");
    if (!(bin_width > 0.0)) throw ValidationError("bin width must be positive");
    const double h = grid[1] - grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (std::abs((grid[k] - grid[k - 1]) - h) > 1e-9 * h)
            throw ValidationError("binning needs a uniform grid");
    const double ratio = bin_width / h;
    const double m = std::round(ratio);
    if (m < 1.0 || std::abs(ratio - m) > 1e-6 * ratio) {
        std::ostringstream msg;
        msg << "bin width " << bin_width << " is not a whole number of sampling intervals (" << h << ")";
        throw ValidationError(msg.str());
    }
    BinLayout b;
    b.stride = static_cast<std::size_t>(m);
    b.n_bins = (grid.size() - 1) / b.stride;
    b.width = static_cast<double>(b.stride) * h;
    if (b.n_bins == 0) throw ValidationError("bin width exceeds the sampled time span");
    return b;
}

DensityMatrix mean_state(const EnsembleAccumulator::Sums& s, std::size_t k, std::size_t d) {
    if (s.n == 0) throw ValidationError("ensemble is empty");
    Operator rho(d);
    const double inv = 1.0 / static_cast<double>(s.n);
    const cplx* src = &s.projectors[k * d * d];
    for (std::size_t e = 0; e < d * d; ++e) rho.entries()[e] = src[e] * inv;
    return DensityMatrix(hermitian_part(rho));
}

std::vector<double> bin_flux(const EnsembleAccumulator::Sums& s, const LindbladModel& model, std::size_t n_grid,
                             const BinLayout& bins) {
    if (!(model.temperature() > 0.0)) throw ValidationError("entropy flux estimate requires T > 0");
    std::vector<double> flux(bins.n_bins, 0.0);
    const double inv_n = 1.0 / static_cast<double>(s.n);
    for (std::size_t i = 0; i < model.channels().size(); ++i) {
        const double q = model.channels()[i].entropy_quantum;
        for (std::size_t b = 0; b < bins.n_bins; ++b) {
            const std::size_t lo = i * n_grid + b * bins.stride, hi = lo + bins.stride;
            const double dn = (s.counts_minus[hi] - s.counts_minus[lo]) - (s.counts_plus[hi] - s.counts_plus[lo]);
            flux[b] += q * dn * inv_n / bins.width;
        }
    }
    return flux;
}

std::vector<double> bin_dsdt(const EnsembleAccumulator::Sums& s, std::size_t d, const BinLayout& bins) {
    std::vector<double> edge_entropy(bins.n_bins + 1);
    for (std::size_t b = 0; b <= bins.n_bins; ++b)
        edge_entropy[b] = von_neumann_entropy(mean_state(s, b * bins.stride, d));
    std::vector<double> dsdt(bins.n_bins);
    for (std::size_t b = 0; b < bins.n_bins; ++b) dsdt[b] = (edge_entropy[b + 1] - edge_entropy[b]) / bins.width;
    return dsdt;
}

/// sqrt((G-1)/G * sum_g (x_{-g} - mean)^2) per component.
std::vector<double> jackknife(const std::vector<std::vector<double>>& replicates, std::size_t n_bins) {
    std::vector<double> out(n_bins, std::numeric_limits<double>::quiet_NaN());
    const std::size_t g = replicates.size();
    if (g < 2) return out;
    for (std::size_t b = 0; b < n_bins; ++b) {
        double mean = 0.0;
        for (const auto& r : replicates) mean += r[b];
        mean /= static_cast<double>(g);
        double ss = 0.0;
        for (const auto& r : replicates) ss += (r[b] - mean) * (r[b] - mean);
        out[b] = std::sqrt(static_cast<double>(g - 1) / static_cast<double>(g) * ss);
    }
    return out;
}

} // namespace

EnsembleStats summarize(const EnsembleAccumulator& acc, const LindbladModel& model, double bin_width) {
    if (model.dim() != acc.dim() || model.channels().size() != acc.n_channels())
        throw ValidationError("summarize: model does not match the accumulated ensemble");
    if (!(model.temperature() > 0.0)) throw ValidationError("summarize: entropy estimators require T > 0");
    const auto& grid = acc.grid();
    const BinLayout bins = bin_layout(grid, bin_width);
    if (bins.n_bins < 3) throw ValidationError("summarize: need at least 3 bins");

    const std::size_t n_grid = grid.size(), d = acc.dim();
    const auto total = acc.total();
    if (total.n == 0) throw ValidationError("summarize: ensemble is empty");

    EnsembleStats st;
    st.grid = grid;
    st.n_trajectories = total.n;
    for (std::size_t k = 0; k < n_grid; ++k) {
        st.rho_hat.push_back(mean_state(total, k, d));
        st.entropy.push_back(von_neumann_entropy(st.rho_hat.back()));
    }
    const double inv_n = 1.0 / static_cast<double>(total.n);
    for (std::size_t i = 0; i < acc.n_channels(); ++i) {
        st.mean_counts_minus.emplace_back(n_grid);
        st.mean_counts_plus.emplace_back(n_grid);
        for (std::size_t k = 0; k < n_grid; ++k) {
            st.mean_counts_minus[i][k] = total.counts_minus[i * n_grid + k] * inv_n;
            st.mean_counts_plus[i][k] = total.counts_plus[i * n_grid + k] * inv_n;
        }
    }

    for (std::size_t b = 0; b < bins.n_bins; ++b) {
        const std::size_t lo = b * bins.stride;
        st.bin_centers.push_back(grid[lo] + 0.5 * bins.width);
        const double mid = 0.5 * static_cast<double>(bins.stride);
        const auto k0 = lo + static_cast<std::size_t>(std::floor(mid));
        const double frac = mid - std::floor(mid);
        st.entropy_at_center.push_back(frac == 0.0 ? st.entropy[k0]
                                                   : (1.0 - frac) * st.entropy[k0] + frac * st.entropy[k0 + 1]);
    }

    st.flux_hat = bin_flux(total, model, n_grid, bins);
    {
        std::vector<double> edge(bins.n_bins + 1);
        for (std::size_t b = 0; b <= bins.n_bins; ++b) edge[b] = st.entropy[b * bins.stride];
        for (std::size_t b = 0; b < bins.n_bins; ++b)
            st.dsdt_hat.push_back((edge[b + 1] - edge[b]) / bins.width);
    }
    for (std::size_t b = 0; b < bins.n_bins; ++b) st.sigma_hat.push_back(st.dsdt_hat[b] + st.flux_hat[b]);

    std::vector<std::vector<double>> sigma_reps, flux_reps;
    for (std::size_t g = 0; g < acc.n_groups(); ++g) {
        const auto& grp = acc.group(g);
        if (grp.n == 0 || grp.n == total.n) continue;
        auto rest = total;
        rest -= grp;
        auto flux = bin_flux(rest, model, n_grid, bins);
        auto dsdt = bin_dsdt(rest, d, bins);
        std::vector<double> sigma(bins.n_bins);
        for (std::size_t b = 0; b < bins.n_bins; ++b) sigma[b] = flux[b] + dsdt[b];
        sigma_reps.push_back(std::move(sigma));
        flux_reps.push_back(std::move(flux));
    }
    st.stderr_sigma = jackknife(sigma_reps, bins.n_bins);
    st.stderr_flux = jackknife(flux_reps, bins.n_bins);

    EnsembleAccumulator::Sums even, odd;
    bool have_even = false, have_odd = false;
    for (std::size_t g = 0; g < acc.n_groups(); ++g) {
        auto& half = (g % 2 == 0) ? even : odd;
        auto& have = (g % 2 == 0) ? have_even : have_odd;
        if (!have) {
            half = acc.group(g);
            have = true;
        } else {
            half += acc.group(g);
        }
    }
    st.dsdt_split_error.assign(bins.n_bins, std::numeric_limits<double>::quiet_NaN());
    if (have_even && have_odd && even.n > 0 && odd.n > 0) {
        const auto a = bin_dsdt(even, d, bins), b = bin_dsdt(odd, d, bins);
        for (std::size_t k = 0; k < bins.n_bins; ++k) st.dsdt_split_error[k] = 0.5 * std::abs(a[k] - b[k]);
    }
    return st;
}

// ---------------------------------------------------------------------------

namespace {

EnsembleAccumulator accumulate(std::span<const TrajectoryRecord> records) {
    if (records.empty()) throw ValidationError("no trajectory records");
    const auto& first = records.front();
    if (first.states.empty()) throw ValidationError("trajectory record has no samples");
    EnsembleAccumulator acc(first.grid, first.states.front().dim(), first.counts_minus.size());
    for (std::size_t j = 0; j < records.size(); ++j) acc.add(records[j], j);
    return acc;
}

} // namespace

DensityMatrix estimate_density(std::span<const TrajectoryRecord> records, std::size_t grid_index) {
    const auto acc = accumulate(records);
    if (grid_index >= acc.grid().size()) throw ValidationError("estimate_density: grid index out of range");
    return mean_state(acc.total(), grid_index, acc.dim());
}

std::vector<double> estimate_flux(std::span<const TrajectoryRecord> records, const LindbladModel& model,
                                  double bin_width) {
    const auto acc = accumulate(records);
    if (model.channels().size() != acc.n_channels()) throw ValidationError("estimate_flux: channel count mismatch");
    return bin_flux(acc.total(), model, acc.grid().size(), bin_layout(acc.grid(), bin_width));
}

SigmaEstimate estimate_sigma(std::span<const TrajectoryRecord> records, const LindbladModel& model,
                             double bin_width) {
    const auto st = summarize(accumulate(records), model, bin_width);
    return {st.bin_centers, st.sigma_hat, st.stderr_sigma};
}

// ---------------------------------------------------------------------------

EnsembleAccumulator run_ensemble(const LindbladModel& model, const InitialEnsemble& initial,
                                 const EnsembleRunConfig& config) {
    if (config.n_trajectories == 0) throw ValidationError("run_ensemble: need at least one trajectory");
    if (config.sample_every == 0) throw ValidationError("run_ensemble: sample_every must be at least 1");
    if (config.n_groups == 0) throw ValidationError("run_ensemble: need at least one group");

    const PdpEngine engine(model, config.dt);
    const std::size_t n_steps = step_count(config.t_max, config.dt);
    std::vector<double> grid;
    for (std::size_t s = 0; s <= n_steps; s += config.sample_every) grid.push_back(static_cast<double>(s) * config.dt);

    std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<std::size_t>({workers, config.n_groups, config.n_trajectories});

    std::vector<EnsembleAccumulator> partial(workers,
                                             EnsembleAccumulator(grid, model.dim(), model.channels().size(),
                                                                 config.n_groups));
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&](std::size_t w) {
        try {
            for (std::size_t g = w; g < config.n_groups; g += workers)
                for (std::uint64_t j = g; j < config.n_trajectories; j += config.n_groups) {
                    {
                        std::lock_guard lock(failure_mutex);
                        if (failure) return;
                    }
                    RngStream rng(config.seed, j);
                    const StateVector psi0 = initial.draw(rng);
                    partial[w].add(engine.simulate(psi0, config.t_max, config.sample_every, rng), j);
                }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    EnsembleAccumulator result = std::move(partial.front());
    for (std::size_t w = 1; w < workers; ++w) result.merge(partial[w]);
    return result;
}

} // namespace jumpsigma
