#pragma once

#include <cmath>
#include <cstdint>

namespace stochtube {

// Counter-based noise source. Every draw is a pure function of
// (seed, stream, step, draw index), so batches of trajectories can be
// generated in any order, on any number of workers, with bit-identical
// results.
namespace rng {

// SplitMix64 finalizer; bijective mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t step, std::uint64_t draw) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (stream + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (step + 0xbf58476d1ce4e5b9ULL));
    h = mix64(h ^ draw);
    return h;
}

// Uniform in (0, 1]; never returns 0 so it is safe under log().
inline double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Standard normal pair (Box-Muller) from two counter draws.
inline void normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                        std::uint64_t pair_index, double& z0, double& z1) {
    const double u1 = to_unit_open(hash(seed, stream, step, 2 * pair_index));
    const double u2 = to_unit(hash(seed, stream, step, 2 * pair_index + 1));
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    z0 = mag * std::cos(ang);
    z1 = mag * std::sin(ang);
}

// Fill n standard normals for one (seed, stream, step) cell.
inline void fill_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                         double* out, int n) {
    int i = 0;
    std::uint64_t pair = 0;
    while (i + 1 < n) {
        normal_pair(seed, stream, step, pair++, out[i], out[i + 1]);
        i += 2;
    }
    if (i < n) {
        double z0, z1;
        normal_pair(seed, stream, step, pair, z0, z1);
        out[i] = z0;
    }
}

// Seed for the i-th trajectory of a batch.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return hash(master_seed, 0x7261745374726dULL, index, 0);
}

// Uniform sample in [lo, hi] for coordinate `dim` of sample `index`.
inline double uniform_in(std::uint64_t seed, std::uint64_t index, std::uint64_t dim,
                         double lo, double hi) {
    return lo + to_unit(hash(seed, index, dim, 1)) * (hi - lo);
}

}  // namespace rng
}  // namespace stochtube
