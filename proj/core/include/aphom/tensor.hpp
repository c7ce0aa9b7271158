#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "aphom/linalg.hpp"

namespace aphom {

/// Coefficient tensor indexed (i, alpha, j, beta): i,j spatial in [0,d),
/// alpha,beta component in [0,m). Row-major in exactly that index order,
/// which also matches the on-disk field format.
class Tensor4 {
  public:
    Tensor4() : d_(0), m_(0) {}
    Tensor4(int d, int m) : d_(d), m_(m), a_(static_cast<std::size_t>(d) * m * d * m, 0.0) {}

    int dim() const { return d_; }
    int msize() const { return m_; }
    std::size_t size() const { return a_.size(); }

    double& operator()(int i, int alpha, int j, int beta) { return a_[flat(i, alpha, j, beta)]; }
    double operator()(int i, int alpha, int j, int beta) const { return a_[flat(i, alpha, j, beta)]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    std::size_t flat(int i, int alpha, int j, int beta) const {
        return static_cast<std::size_t>(((i * m_ + alpha) * d_ + j) * m_ + beta);
    }

    Tensor4& operator+=(const Tensor4& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Tensor4& operator-=(const Tensor4& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    Tensor4& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    /// Swap the index pairs (i,alpha) <-> (j,beta); the adjoint A*.
    Tensor4 adjoint() const {
        Tensor4 t(d_, m_);
        for (int i = 0; i < d_; ++i)
            for (int al = 0; al < m_; ++al)
                for (int j = 0; j < d_; ++j)
                    for (int be = 0; be < m_; ++be) t(j, be, i, al) = (*this)(i, al, j, be);
        return t;
    }

    /// View as the (d*m) x (d*m) matrix M[(i,alpha),(j,beta)].
    std::vector<double> asMatrix() const { return a_; }

    double frobenius() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    double maxAbs() const {
        double s = 0.0;
        for (double v : a_) s = std::max(s, std::abs(v));
        return s;
    }

    /// Quadratic form a_{ij}^{ab} xi_i^a xi_j^b with xi as a (d*m) vector
    /// flattened like the matrix view.
    double quadForm(const std::vector<double>& xi) const {
        const int n = d_ * m_;
        double q = 0.0;
        for (int r = 0; r < n; ++r) {
            double row = 0.0;
            for (int c = 0; c < n; ++c) row += a_[static_cast<std::size_t>(r) * n + c] * xi[c];
            q += xi[r] * row;
        }
        return q;
    }

    Tensor4 symmetricPart() const {
        Tensor4 s = *this;
        Tensor4 t = adjoint();
        for (std::size_t k = 0; k < s.a_.size(); ++k) s.a_[k] = 0.5 * (s.a_[k] + t.a_[k]);
        return s;
    }

    Tensor4 skewPart() const {
        Tensor4 s = *this;
        Tensor4 t = adjoint();
        for (std::size_t k = 0; k < s.a_.size(); ++k) s.a_[k] = 0.5 * (s.a_[k] - t.a_[k]);
        return s;
    }

    /// Eigenvalue range of the symmetric part.
    std::pair<double, double> symEigRange() const {
        SymEig e = symmetricEigen(symmetricPart().asMatrix(), d_ * m_);
        return {e.values.front(), e.values.back()};
    }

    double spectral() const { return spectralNorm(a_, d_ * m_); }

  private:
    int d_, m_;
    std::vector<double> a_;
};

inline Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
inline Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }

}  // namespace aphom
