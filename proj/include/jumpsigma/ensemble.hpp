// ensemble.hpp: Monte Carlo aggregation of jump trajectories

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jumpsigma/lindblad.hpp"
#include "jumpsigma/operators.hpp"
#include "jumpsigma/pdp.hpp"

namespace jumpsigma {

inline constexpr std::size_t kDefaultJackknifeGroups = 64;

/// Distribution of initial pure states. A single state with weight 1 is
/// deterministic and draws nothing from the stream.
struct InitialEnsemble {
    std::vector<double> weights;
    std::vector<StateVector> states;

    static InitialEnsemble pure(StateVector psi);
    /// Eigenvectors of the Gibbs state with their Boltzmann weights.
    static InitialEnsemble thermal(const LindbladModel& model);

    StateVector draw(RngStream& rng) const;
    DensityMatrix density() const;
};

/// Running sums over trajectories, split into jackknife groups by
/// trajectory index modulo the group count. Merging is exact whenever the
/// operands own disjoint groups, which makes parallel reductions independent
/// of how trajectories were distributed across workers.
class EnsembleAccumulator {
public:
    EnsembleAccumulator(std::vector<double> grid, std::size_t dim, std::size_t n_channels,
                        std::size_t n_groups = kDefaultJackknifeGroups);

    void add(const TrajectoryRecord& record, std::uint64_t trajectory_index);
    void merge(const EnsembleAccumulator& other);

    const std::vector<double>& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }
    std::size_t n_channels() const { return n_channels_; }
    std::size_t n_groups() const { return groups_.size(); }
    std::uint64_t n_trajectories() const;
    double max_step_probability() const { return max_step_probability_; }

    /// Sums restricted to one group, or to every group.
    struct Sums {
        std::uint64_t n = 0;
        std::vector<cplx> projectors;      // grid x dim x dim
        std::vector<double> counts_minus;  // channel x grid
        std::vector<double> counts_plus;

        Sums& operator+=(const Sums& o);
        Sums& operator-=(const Sums& o);
    };

    const Sums& group(std::size_t g) const { return groups_[g]; }
    /// Sum over all groups in group order.
    Sums total() const;

private:
    Sums empty_sums() const;

    std::vector<double> grid_;
    std::size_t dim_, n_channels_;
    std::vector<Sums> groups_;
    double max_step_probability_ = 0.0;
};

/// Aggregated estimators. Bin b spans [grid[b*m], grid[(b+1)*m]] where
/// m = bin_width / grid spacing; per-bin quantities are reported at the bin
/// center.
struct EnsembleStats {
    std::vector<double> grid;
    std::vector<DensityMatrix> rho_hat;
    std::vector<double> entropy;

    std::vector<double> bin_centers;
    std::vector<double> entropy_at_center;
    std::vector<double> flux_hat;
    std::vector<double> dsdt_hat;
    std::vector<double> sigma_hat;
    /// Delete-a-group jackknife over the full sigma estimator.
    std::vector<double> stderr_sigma;
    /// Same jackknife over the flux term alone.
    std::vector<double> stderr_flux;
    /// Half-ensemble estimate of the dS/dt error: |even groups - odd groups| / 2.
    std::vector<double> dsdt_split_error;

    std::vector<std::vector<double>> mean_counts_minus;  // channel x grid
    std::vector<std::vector<double>> mean_counts_plus;
    std::uint64_t n_trajectories = 0;
};

/// Requires T > 0, at least 3 bins and a bin width that is a whole number
/// of grid intervals.
EnsembleStats summarize(const EnsembleAccumulator& acc, const LindbladModel& model, double bin_width);

/// (1/N) sum_j |psi_j><psi_j| at grid point k.
DensityMatrix estimate_density(std::span<const TrajectoryRecord> records, std::size_t grid_index);

/// Per-bin sum_i (omega_i/T) (dN-_i - dN+_i) / bin_width, ensemble averaged.
std::vector<double> estimate_flux(std::span<const TrajectoryRecord> records, const LindbladModel& model,
                                  double bin_width);

struct SigmaEstimate {
    std::vector<double> centers;
    std::vector<double> sigma;
    std::vector<double> stderr;
};

/// sigma = dS/dt + J per bin, dS/dt as the centered difference of the
/// entropy of the mean state across each bin.
SigmaEstimate estimate_sigma(std::span<const TrajectoryRecord> records, const LindbladModel& model,
                             double bin_width);

struct EnsembleRunConfig {
    double t_max = 0.0;
    double dt = 0.0;
    std::size_t sample_every = 1;
    std::uint64_t n_trajectories = 0;
    std::uint64_t seed = 0;
    /// 0 selects std::thread::hardware_concurrency().
    std::size_t workers = 0;
    std::size_t n_groups = kDefaultJackknifeGroups;
};

/// Simulates trajectories 0..n-1 with stream (seed, index) each and reduces
/// them. The result is bit-identical for any worker count.
EnsembleAccumulator run_ensemble(const LindbladModel& model, const InitialEnsemble& initial,
                                 const EnsembleRunConfig& config);

} // namespace jumpsigma
