// Reference implementations kept independent of the library code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

// population covariance, plain loops
inline Mat covariance(const Mat& x) {
    const std::size_t n = x.size(), p = x[0].size();
    std::vector<double> mu(p, 0.0);
    for (const auto& r : x)
        for (std::size_t j = 0; j < p; ++j) mu[j] += r[j] / static_cast<double>(n);
    Mat c(p, std::vector<double>(p, 0.0));
    for (const auto& r : x)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b) c[a][b] += (r[a] - mu[a]) * (r[b] - mu[b]);
    for (auto& row : c)
        for (auto& v : row) v /= static_cast<double>(n);
    return c;
}

// Cyclic Jacobi rotations. Returns eigenpairs sorted by descending eigenvalue;
// vectors[i] is the i-th eigenvector.
struct Eigen {
    std::vector<double> values;
    Mat vectors;
};

inline Eigen jacobi(Mat a) {
    const std::size_t p = a.size();
    Mat v(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                if (std::abs(a[i][j]) < 1e-300) continue;
                const double theta = (a[j][j] - a[i][i]) / (2 * a[i][j]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double aki = a[k][i], akj = a[k][j];
                    a[k][i] = c * aki - s * akj;
                    a[k][j] = s * aki + c * akj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double aik = a[i][k], ajk = a[j][k];
                    a[i][k] = c * aik - s * ajk;
                    a[j][k] = s * aik + c * ajk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vki = v[k][i], vkj = v[k][j];
                    v[k][i] = c * vki - s * vkj;
                    v[k][j] = s * vki + c * vkj;
                }
            }
        }
    }
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return a[l][l] > a[r][r]; });
    Eigen out;
    for (auto i : order) {
        out.values.push_back(a[i][i]);
        std::vector<double> col(p);
        for (std::size_t k = 0; k < p; ++k) col[k] = v[k][i];
        out.vectors.push_back(col);
    }
    return out;
}

// projection of centred x onto the top-k eigenvectors, n x k
inline Mat pca_project(const Mat& x, std::size_t k) {
    const std::size_t n = x.size(), p = x[0].size();
    const auto e = jacobi(covariance(x));
    std::vector<double> mu(p, 0.0);
    for (const auto& r : x)
        for (std::size_t j = 0; j < p; ++j) mu[j] += r[j] / static_cast<double>(n);
    Mat z(n, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < p; ++j) z[i][c] += (x[i][j] - mu[j]) * e.vectors[c][j];
    return z;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double va = saa / n - (sa / n) * (sa / n), vb = sbb / n - (sb / n) * (sb / n);
    return cov / std::sqrt(va * vb);
}

}  // namespace oracle
