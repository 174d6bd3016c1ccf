#include "eitlog/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace eitlog {

namespace {

// splitmix64, used to derive independent per-sample seeds
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

void clamp_field(ConductivityField& f, double lo, double hi) {
    f.values = f.values.cwiseMax(lo).cwiseMin(hi);
}

} // namespace

ConductivityField sample_smooth(const DiskMesh& mesh, Rng& rng, double lo,
                                double hi) {
    const double background = rng.uniform(0.8 * lo + 0.2 * hi, 0.2 * lo + 0.8 * hi);
    const int n_bumps = rng.uniform_int(1, 3);
    struct Bump {
        double cx, cy, amp, w;
    };
    std::vector<Bump> bumps;
    for (int b = 0; b < n_bumps; ++b) {
        Bump bump;
        bump.cx = rng.uniform(-0.6, 0.6);
        bump.cy = rng.uniform(-0.6, 0.6);
        bump.amp = rng.uniform(-0.5, 0.5) * (hi - lo);
        bump.w = rng.uniform(0.15, 0.5);
        bumps.push_back(bump);
    }
    ConductivityField f =
        ConductivityField::from_function(mesh, [&](double x, double y) {
            double v = background;
            for (const Bump& b : bumps) {
                const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
                v += b.amp * std::exp(-d2 / (b.w * b.w));
            }
            return v;
        });
    clamp_field(f, lo, hi);
    return f;
}

ConductivityField sample_inclusions(const DiskMesh& mesh, Rng& rng, double lo,
                                    double hi) {
    const double background = std::sqrt(lo * hi);
    const int n_inc = rng.uniform_int(1, 3);
    struct Disk {
        double cx, cy, radius, value;
    };
    std::vector<Disk> disks;
    for (int d = 0; d < n_inc; ++d) {
        Disk disk;
        disk.cx = rng.uniform(-0.6, 0.6);
        disk.cy = rng.uniform(-0.6, 0.6);
        disk.radius = rng.uniform(0.1, 0.35);
        disk.value = rng.uniform() < 0.5 ? lo : hi;
        disks.push_back(disk);
    }
    ConductivityField f =
        ConductivityField::from_function(mesh, [&](double x, double y) {
            double v = background;
            for (const Disk& d : disks) {
                const double dist2 =
                    (x - d.cx) * (x - d.cx) + (y - d.cy) * (y - d.cy);
                if (dist2 < d.radius * d.radius) v = d.value;
            }
            return v;
        });
    clamp_field(f, lo, hi);
    return f;
}

ConductivityField sample_direction(const DiskMesh& mesh, Rng& rng,
                                   double amplitude, int index) {
    if (index % 4 == 3) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        return ConductivityField::constant(mesh, sign * amplitude);
    }
    const double cx = rng.uniform(-0.6, 0.6), cy = rng.uniform(-0.6, 0.6);
    const double w = rng.uniform(0.2, 0.6);
    const double s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    ConductivityField f =
        ConductivityField::from_function(mesh, [&](double x, double y) {
            const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            return s * std::exp(-d2 / (w * w));
        });
    const double sup = f.sup_norm();
    f.values *= amplitude / sup;
    return f;
}

std::pair<ConductivityField, ConductivityField> sample_monotone_pair(
    const DiskMesh& mesh, Rng& rng, double lo, double hi) {
    ConductivityField sigma1 = sample_smooth(mesh, rng, lo, 0.5 * (lo + hi));
    const double cx = rng.uniform(-0.5, 0.5), cy = rng.uniform(-0.5, 0.5);
    const double radius = rng.uniform(0.15, 0.4);
    const double lift = rng.uniform(0.2, 0.8) * (hi - lo);
    ConductivityField sigma2 = sigma1;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const Eigen::Vector2d c = mesh.centroid(t);
        const double d2 = (c.x() - cx) * (c.x() - cx) + (c.y() - cy) * (c.y() - cy);
        if (d2 < radius * radius) sigma2.values[t] += lift;
    }
    clamp_field(sigma2, lo, hi);
    // clamping could in principle dip below sigma1 where sigma1 == hi
    sigma2.values = sigma2.values.cwiseMax(sigma1.values);
    return {std::move(sigma1), std::move(sigma2)};
}

std::vector<ConductivityField> ConductivityEnsemble::generate(
    const DiskMesh& mesh) const {
    std::vector<ConductivityField> samples;
    samples.reserve(static_cast<size_t>(spec_.count));
    for (int i = 0; i < spec_.count; ++i) {
        Rng rng(mix(spec_.seed + static_cast<std::uint64_t>(i)));
        samples.push_back(spec_.rule == EnsembleSpec::Rule::SmoothBumps
                              ? sample_smooth(mesh, rng, spec_.lo, spec_.hi)
                              : sample_inclusions(mesh, rng, spec_.lo, spec_.hi));
    }
    return samples;
}

} // namespace eitlog
