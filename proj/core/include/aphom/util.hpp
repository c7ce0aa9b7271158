#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aphom {

/// Spatial point / shift vector. Components beyond the active dimension are zero.
using Vec = std::array<double, 3>;

inline Vec makeVec(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// ----------------------------------------------------------------------------
// Error taxonomy. The CLI maps categories onto its exit-code contract.
// ----------------------------------------------------------------------------
enum class ErrorKind { Config, Field, Solver, Assertion, Internal };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// ----------------------------------------------------------------------------
// Deterministic pseudo-random and low-discrepancy sampling
// ----------------------------------------------------------------------------

/// splitmix64: tiny deterministic generator for probe vectors and noise.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, second discarded).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::uint64_t state_;
};

/// Van der Corput radical inverse in the given base.
inline double radicalInverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, x = 0.0;
    while (i > 0) {
        x += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return x;
}

/// Halton point in [0,1)^dim; `seed` offsets the sequence so distinct plans decorrelate.
inline Vec haltonPoint(std::uint64_t index, int dim, std::uint64_t seed = 0) {
    static const unsigned bases[3] = {2, 3, 5};
    Vec p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = radicalInverse(index + 1 + seed, bases[k]);
    return p;
}

// ----------------------------------------------------------------------------
// FNV-1a hashing (report determinism checks; not cryptographic)
// ----------------------------------------------------------------------------
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

std::string hexHash(std::uint64_t h);

// ----------------------------------------------------------------------------
// Minimal fork-join helper. Tasks must be independent; each writes only its
// own output slot, so the result is identical for any thread count.
// ----------------------------------------------------------------------------
void parallelFor(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Resolve a thread-count request: n>0 honored, else APHOM_THREADS, else 1.
int resolveThreads(int requested);

}  // namespace aphom
