#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snq/shotnoise.hpp"
#include "snq/stats.hpp"

namespace snq {

struct ArrivalStream {
  std::vector<double> epochs;   // strictly increasing, all <= path horizon
  std::size_t component = 0;    // driving intensity component

  void write_csv(std::ostream& os) const;
};

// Thinning with a piecewise-exact bound: between shots the intensity decays,
// so the level at the left endpoint of each inter-shot interval dominates.
ArrivalStream sample_thinning(const ShotNoisePath& path, std::size_t component, RngStream& rng);

// Exact inversion of the integrated rate; the closed-form interval capacity is
// level * (1 - e^{-r L}) / r. Distributionally identical to thinning and kept
// as an independent cross-check of it.
ArrivalStream sample_inversion(const ShotNoisePath& path, std::size_t component, RngStream& rng);

// Var(count)/E(count) over fresh paths, with a delta-method standard error.
EstimateWithCI dispersion_index(const ShotNoiseSpec& spec, double horizon, std::uint64_t reps,
                                std::uint64_t master_seed, int threads = 1);

// Law-of-total-variance value 1 + Var(int_0^T L) / E(int_0^T L) implied by the
// intensity moments; the analytic counterpart of dispersion_index.
double dispersion_index_analytic(const ShotNoiseSpec& spec, double horizon);

}  // namespace snq
