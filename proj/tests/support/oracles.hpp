#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library except to obtain the object under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 4.0e-7 * pi;

/// Bessel J_n(z), n = 0 or 1, by its power series. Adequate for |z| < 10.
inline cplx bessel_j(int n, cplx z)
{
    const cplx q = -0.25 * z * z;
    cplx term = n == 0 ? cplx(1.0) : 0.5 * z;
    cplx sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + n));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return sum;
}

inline double skin_depth(double f, double sigma, double mu = mu0)
{
    return std::sqrt(2.0 / (2.0 * pi * f * mu * sigma));
}

/// Internal impedance per unit length of a round wire, e^{+jwt} convention.
inline cplx wire_internal_impedance(double a, double sigma, double f, double mu = mu0)
{
    const cplx k = cplx(1.0, -1.0) / skin_depth(f, sigma, mu);
    return k * bessel_j(0, k * a) / (2.0 * pi * a * sigma * bessel_j(1, k * a));
}

inline double dc_resistance(double a, double sigma) { return 1.0 / (sigma * pi * a * a); }

/// Azimuthal H inside a round wire carrying peak current I.
inline cplx wire_h_phi(double r, double a, double sigma, double f, cplx I, double mu = mu0)
{
    const cplx k = cplx(1.0, -1.0) / skin_depth(f, sigma, mu);
    return I / (2.0 * pi * a) * bessel_j(1, k * r) / bessel_j(1, k * a);
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

struct TriPoint {
    std::array<double, 3> lambda;
    double weight;  // fraction of the area
};

/// Collapsed (Duffy) product rule on the reference triangle with n x n
/// points; exact for polynomials of degree 2n - 2.
inline std::vector<TriPoint> collapsed_rule(int n)
{
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    std::vector<TriPoint> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double s = 0.5 * (x[i] + 1.0);
            const double t = 0.5 * (x[j] + 1.0);
            const double l1 = s * (1.0 - t);
            const double l2 = t;
            // area element of the collapse is (1 - t) ds dt over the unit square,
            // normalised by the reference area 1/2
            out.push_back({{1.0 - l1 - l2, l1, l2}, 0.25 * w[i] * w[j] * (1.0 - t) * 2.0});
        }
    return out;
}

/// Central finite-difference Jacobian of a map R^3 -> R^3.
inline Eigen::Matrix3d fd_jacobian(const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& f,
                                   const Eigen::Vector3d& p, double h = 1e-6)
{
    Eigen::Matrix3d J;
    for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(k) = h;
        J.col(k) = (f(p + e) - f(p - e)) / (2.0 * h);
    }
    return J;
}

/// Rank over GF(2) of a set of 0/1 vectors.
inline int gf2_rank(std::vector<std::vector<char>> rows)
{
    int rank = 0;
    if (rows.empty())
        return 0;
    const std::size_t cols = rows[0].size();
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[r][c]) {
                pivot = r;
                break;
            }
        if (pivot < 0)
            continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            if (r != rank && rows[r][c])
                for (std::size_t k = c; k < cols; ++k)
                    rows[r][k] ^= rows[rank][k];
        ++rank;
    }
    return rank;
}

/// Richardson extrapolation from three values on meshes h, h/2, h/4.
struct Richardson {
    double limit;
    double order;
};

inline Richardson richardson(double f1, double f2, double f3)
{
    const double p = std::log(std::abs((f1 - f2) / (f2 - f3))) / std::log(2.0);
    const double r = std::pow(2.0, p);
    return {f3 + (f3 - f2) / (r - 1.0), p};
}

}  // namespace oracle
