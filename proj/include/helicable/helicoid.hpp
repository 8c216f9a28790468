#pragma once

// Helicoidal change of coordinates and the transformed material tensors.
//
// A point p_xyz in Cartesian coordinates maps to helicoidal coordinates
// (u, v, w) by rotating the (x, y) plane by -z*tau, where tau = alpha/beta is
// the twist rate. Geometry that is invariant along a screw motion becomes
// invariant along w, so the eddy-current problem can be posed on the w = 0
// cross-section with anisotropic, w-invariant material tensors.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helicable/error.hpp"

namespace helicable {

enum class Frame { cartesian, helicoidal };

/// Three coordinates tagged with the frame they are expressed in.
template <Frame F>
struct Point3 {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    static constexpr Frame frame = F;

    constexpr Point3() = default;
    constexpr Point3(double a, double b, double c) : c0(a), c1(b), c2(c) {}

    [[nodiscard]] Eigen::Vector3d vec() const { return {c0, c1, c2}; }
    [[nodiscard]] bool finite() const
    {
        return std::isfinite(c0) && std::isfinite(c1) && std::isfinite(c2);
    }
};

using CartesianPoint = Point3<Frame::cartesian>;
using HelicoidalPoint = Point3<Frame::helicoidal>;

using Mat3 = Eigen::Matrix3d;

class TwistMap {
public:
    /// alpha: total twist angle [rad] over the longitudinal length beta [m].
    TwistMap(double alpha, double beta) : alpha_(alpha), beta_(beta)
    {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw ConfigError("twist: beta must be positive and finite");
        if (!std::isfinite(alpha))
            throw ConfigError("twist: alpha must be finite");
        tau_ = alpha_ / beta_;
        if (!std::isfinite(tau_))
            throw ConfigError("twist: twist rate alpha/beta is not finite");
    }

    static TwistMap untwisted(double beta = 1.0) { return TwistMap(0.0, beta); }

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double beta() const { return beta_; }
    /// Twist rate [rad/m].
    [[nodiscard]] double tau() const { return tau_; }

private:
    double alpha_;
    double beta_;
    double tau_;
};

inline HelicoidalPoint map_to_helicoidal(const CartesianPoint& p, const TwistMap& twist)
{
    const double angle = p.c2 * twist.tau();
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {p.c0 * c + p.c1 * s, -p.c0 * s + p.c1 * c, p.c2};
}

inline CartesianPoint map_to_cartesian(const HelicoidalPoint& p, const TwistMap& twist)
{
    const double angle = p.c2 * twist.tau();
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {p.c0 * c - p.c1 * s, p.c0 * s + p.c1 * c, p.c2};
}

/// Jacobian of the helicoidal-to-Cartesian map at p_uvw.
inline Mat3 jacobian_inv_map(const HelicoidalPoint& p, const TwistMap& twist)
{
    const double tau = twist.tau();
    const double angle = p.c2 * tau;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = p.c0 * c - p.c1 * s;
    const double y = p.c0 * s + p.c1 * c;
    Mat3 j;
    j << c, -s, -tau * y,
         s,  c,  tau * x,
         0.0, 0.0, 1.0;
    return j;
}

// The tensors below use the closed forms of J^-1 J^-T and J^T J. Both only
// depend on (u, v): the w-dependence of the Jacobian is a pure rotation of the
// (x, y) rows, which cancels in either product. det(J) is identically one.

/// J^-1 J^-T det(J) without the scalar conductivity.
inline Mat3 conductivity_shape(double u, double v, double tau)
{
    const double tu = tau * u;
    const double tv = tau * v;
    Mat3 m;
    m << 1.0 + tv * tv, -tu * tv,       tv,
         -tu * tv,      1.0 + tu * tu, -tu,
         tv,            -tu,            1.0;
    return m;
}

/// J^T J / det(J) without the scalar reluctivity.
inline Mat3 reluctivity_shape(double u, double v, double tau)
{
    const double tu = tau * u;
    const double tv = tau * v;
    Mat3 m;
    m << 1.0, 0.0, -tv,
         0.0, 1.0,  tu,
         -tv, tu,   1.0 + tu * tu + tv * tv;
    return m;
}

/// Material constants of one region.
struct RegionMaterial {
    double sigma = 0.0;  ///< [S/m]
    double nu = 0.0;     ///< [m/H]
};

inline constexpr double mu0 = 4.0e-7 * 3.14159265358979323846;
inline constexpr double nu0 = 1.0 / mu0;

/// Region materials indexed by region tag: 0 is the insulation, i >= 1 is
/// conductor i.
class MaterialSpec {
public:
    MaterialSpec(RegionMaterial insulation, std::vector<RegionMaterial> conductors)
        : insulation_(insulation), conductors_(std::move(conductors))
    {
        if (insulation_.sigma != 0.0)
            throw ConfigError("materials: insulation must have sigma = 0");
        if (!(insulation_.nu > 0.0) || !std::isfinite(insulation_.nu))
            throw ConfigError("materials: insulation nu must be positive");
        for (std::size_t i = 0; i < conductors_.size(); ++i) {
            const auto& m = conductors_[i];
            const std::string which = "materials: conductor " + std::to_string(i + 1);
            if (!(m.sigma > 0.0) || !std::isfinite(m.sigma))
                throw ConfigError(which + " must have sigma > 0");
            if (!(m.nu > 0.0) || !std::isfinite(m.nu))
                throw ConfigError(which + " must have nu > 0");
        }
    }

    /// Same material for all `n` conductors.
    static MaterialSpec uniform(int n, double sigma, double nu_conductor = nu0,
                                double nu_insulation = nu0)
    {
        return MaterialSpec({0.0, nu_insulation},
                            std::vector<RegionMaterial>(static_cast<std::size_t>(n),
                                                        RegionMaterial{sigma, nu_conductor}));
    }

    [[nodiscard]] int conductor_count() const { return static_cast<int>(conductors_.size()); }

    [[nodiscard]] const RegionMaterial& region(int tag) const
    {
        if (tag == 0)
            return insulation_;
        if (tag < 0 || tag > conductor_count())
            throw MeshError("no material for region tag " + std::to_string(tag));
        return conductors_[static_cast<std::size_t>(tag - 1)];
    }

private:
    RegionMaterial insulation_;
    std::vector<RegionMaterial> conductors_;
};

inline Mat3 conductivity_tensor(const HelicoidalPoint& p, double sigma, const TwistMap& twist)
{
    return sigma * conductivity_shape(p.c0, p.c1, twist.tau());
}

inline Mat3 conductivity_tensor(const HelicoidalPoint& p, const MaterialSpec& mat, int region,
                                const TwistMap& twist)
{
    return conductivity_tensor(p, mat.region(region).sigma, twist);
}

inline Mat3 reluctivity_tensor(const HelicoidalPoint& p, double nu, const TwistMap& twist)
{
    return nu * reluctivity_shape(p.c0, p.c1, twist.tau());
}

inline Mat3 reluctivity_tensor(const HelicoidalPoint& p, const MaterialSpec& mat, int region,
                               const TwistMap& twist)
{
    return reluctivity_tensor(p, mat.region(region).nu, twist);
}

}  // namespace helicable
