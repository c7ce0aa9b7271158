#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aphom/tensor.hpp"
#include "aphom/util.hpp"

namespace aphom::coeff {

/// One term of a real trigonometric polynomial: cosAmp*cos(omega.y) + sinAmp*sin(omega.y).
struct TrigMode {
    Vec omega{0.0, 0.0, 0.0};
    Tensor4 cosAmp;
    Tensor4 sinAmp;
};

/// A(y) = constTerm + sum of modes. Finite trigonometric polynomials only;
/// general limits are approximated by adding modes.
class CoefficientField {
  public:
    int dim = 1;
    int m = 1;
    double mu = 1.0;  // claimed ellipticity constant
    Tensor4 constTerm;
    std::vector<TrigMode> modes;
    std::optional<std::vector<double>> periodLattice;

    Tensor4 evaluate(const Vec& y) const {
        Tensor4 t = constTerm;
        for (const TrigMode& mode : modes) {
            const double phase = dot(mode.omega, y);
            const double c = std::cos(phase), s = std::sin(phase);
            const std::vector<double>& ca = mode.cosAmp.data();
            const std::vector<double>& sa = mode.sinAmp.data();
            std::vector<double>& out = t.data();
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += c * ca[k] + s * sa[k];
        }
        return t;
    }

    /// Single entry without materializing the full tensor (hot path in assembly).
    double entry(const Vec& y, int i, int alpha, int j, int beta) const {
        const std::size_t f = constTerm.flat(i, alpha, j, beta);
        double v = constTerm.data()[f];
        for (const TrigMode& mode : modes) {
            const double phase = dot(mode.omega, y);
            v += std::cos(phase) * mode.cosAmp.data()[f] + std::sin(phase) * mode.sinAmp.data()[f];
        }
        return v;
    }

    bool isScalarIsotropic() const;  // all mixed (i != j) couplings vanish identically and m == 1

    CoefficientField adjointField() const;

    /// Largest |omega| over modes; 0 for constant fields.
    double maxFrequency() const;

    /// Longest period axis when periodLattice is present, else the longest
    /// quasi-period 2*pi/|omega_min|.
    double longestPeriod() const;

    /// Sufficient ellipticity certificate:
    ///   lambda_min(sym(constTerm)) - sum_k (||cos_k||_2 + ||sin_k||_2) >= mu  and
    ///   lambda_max(sym(constTerm)) + sum_k (...) <= 1/mu.
    /// Returns {lower, upper} margins (certified lambda bounds).
    std::pair<double, double> ellipticityCertificate() const;
    bool certifiedElliptic() const;

    std::string toJson() const;
    std::string hash() const;

    static CoefficientField fromJson(const std::string& text);
    static CoefficientField load(const std::string& path);
    void save(const std::string& path) const;
};

/// Ordered shift pairs (y_i, z_i); order k = pairs.size().
struct DifferenceSpec {
    std::vector<std::pair<Vec, Vec>> pairs;
    int order() const { return static_cast<int>(pairs.size()); }
};

/// Iterated difference of a scalar sample function:
///   D_{y1 z1} ... D_{yk zk} (g)(x), expanded over all 2^k shift sums.
double difference(const std::function<double(const Vec&)>& g, const DifferenceSpec& spec, const Vec& x);

/// Same applied entrywise to a coefficient field.
Tensor4 difference(const CoefficientField& field, const DifferenceSpec& spec, const Vec& x);

// ----------------------------------------------------------------------------
// Sampling plans for the sup/inf estimators. All randomness is a deterministic
// function of the seed; identical plans give identical estimates.
// ----------------------------------------------------------------------------
struct SamplingPlan {
    int centers = 64;        // window centers per S^p_R evaluation
    int quadPerAxis = 33;    // trapezoid points per axis across one window
    int shifts = 64;         // sup_y samples per nesting level
    int zPerAxis = 16;       // inf lattice spacing = L / zPerAxis
    double supRadius = 32.0; // half-width of the sampled box for centers and shifts
    std::uint64_t seed = 0;

    SamplingPlan scaled(double factor) const {
        SamplingPlan p = *this;
        p.centers = std::max(4, static_cast<int>(p.centers * factor));
        p.shifts = std::max(4, static_cast<int>(p.shifts * factor));
        return p;
    }
};

/// Windowed sup norm estimate: max over sampled centers x of
/// (average over the cube [x-R, x+R]^d of |g|^p)^(1/p). A lower bound on the
/// true sup that converges as the plan refines.
double sNorm(const std::function<double(const Vec&)>& g, double p, double R, int dim, const SamplingPlan& plan);

/// rho_k(L, R): nested sup/inf over shifts of the partition sum of S^p_R
/// norms of iterated differences of A. k in {1, 2}. The exponent p follows
/// k/p = 1/2 - 1/qbar with the configured reverse-Holder exponent qbar.
double rho(const CoefficientField& field, int k, double L, double R, const SamplingPlan& plan, double qbar = 4.0);

/// rho over a list of L values sharing one nested z-candidate set, so the
/// result is non-increasing in L by construction.
std::vector<double> rhoSweep(const CoefficientField& field, int k, const std::vector<double>& Ls, double R,
                             const SamplingPlan& plan, double qbar = 4.0);

/// Windowed mean over the cube [-R, R]^d; resolution adapts to the fastest mode.
Tensor4 meanValue(const CoefficientField& field, double R, const SamplingPlan& plan);
double meanValue(const std::function<double(const Vec&)>& g, double R, int dim, const SamplingPlan& plan);

/// omega_k(g; L, R): the rho machinery with p = 2 and a single k-fold
/// difference, applied to an arbitrary sampled function.
double omega(const std::function<double(const Vec&)>& g, int dim, int k, double L, double R,
             const SamplingPlan& plan, const std::vector<double>* periodHint = nullptr);

double exponentP(int k, double qbar);

}  // namespace aphom::coeff
