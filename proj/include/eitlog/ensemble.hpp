#ifndef EITLOG_ENSEMBLE_HPP
#define EITLOG_ENSEMBLE_HPP

#include "eitlog/conductivity.hpp"
#include "eitlog/mesh.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace eitlog {

/// Deterministic uniform generator; identical streams across platforms for
/// a given seed (raw mt19937_64 bits, no distribution objects).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next_bits() { return gen_(); }
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next_bits() %
                                     static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

struct EnsembleSpec {
    enum class Rule { SmoothBumps, Inclusions };
    std::uint64_t seed = 1;
    int count = 10;
    Rule rule = Rule::SmoothBumps;
    double lo = 0.5; // pointwise lower bound
    double hi = 2.0; // pointwise upper bound
};

/// Seeded family of conductivities with hard pointwise bounds.
class ConductivityEnsemble {
public:
    explicit ConductivityEnsemble(EnsembleSpec spec) : spec_(spec) {}
    const EnsembleSpec& spec() const { return spec_; }

    /// All samples; deterministic in the seed, independent of call order.
    std::vector<ConductivityField> generate(const DiskMesh& mesh) const;

private:
    EnsembleSpec spec_;
};

/// Single smooth-bump sample within [lo, hi].
ConductivityField sample_smooth(const DiskMesh& mesh, Rng& rng, double lo,
                                double hi);

/// Piecewise-constant background with 1-3 disk inclusions, within [lo, hi].
ConductivityField sample_inclusions(const DiskMesh& mesh, Rng& rng, double lo,
                                    double hi);

/// Bounded perturbation direction with sup-norm amplitude; every fourth
/// draw is constant so that constant-direction degeneracies stay exercised.
ConductivityField sample_direction(const DiskMesh& mesh, Rng& rng,
                                   double amplitude, int index);

/// sigma2 = sigma1 + nonnegative bumps, capped at hi; ordered pointwise.
std::pair<ConductivityField, ConductivityField> sample_monotone_pair(
    const DiskMesh& mesh, Rng& rng, double lo, double hi);

} // namespace eitlog

#endif
