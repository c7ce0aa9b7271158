#include "aphom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aphom {

SymEig symmetricEigen(const std::vector<double>& input, int n) {
    std::vector<double> a = input;
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto at = [&](std::vector<double>& mat, int r, int c) -> double& {
        return mat[static_cast<std::size_t>(r) * n + c];
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
        if (off < 1e-30) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(v, k, p), vkq = at(v, k, q);
                    at(v, k, p) = c * vkp - s * vkq;
                    at(v, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymEig out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = at(a, i, i);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return out.values[x] < out.values[y]; });

    std::vector<double> sortedVals(n);
    std::vector<double> sortedVecs(static_cast<std::size_t>(n) * n);
    for (int c = 0; c < n; ++c) {
        sortedVals[c] = out.values[order[c]];
        for (int r = 0; r < n; ++r) sortedVecs[static_cast<std::size_t>(r) * n + c] = at(v, r, order[c]);
    }
    out.values = std::move(sortedVals);
    out.vectors = std::move(sortedVecs);
    return out;
}

double spectralNorm(const std::vector<double>& a, int n) {
    // lambda_max(A^T A)^(1/2)
    std::vector<double> ata(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += a[static_cast<std::size_t>(k) * n + i] * a[static_cast<std::size_t>(k) * n + j];
            ata[static_cast<std::size_t>(i) * n + j] = s;
        }
    SymEig e = symmetricEigen(ata, n);
    return std::sqrt(std::max(0.0, e.values.back()));
}

}  // namespace aphom
