#pragma once

#include <stdexcept>
#include <string>

namespace zrp {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 6.28318530717958647692;
inline constexpr double sqrt_pi = 1.77245385090551602730;
inline constexpr double sqrt_two = 1.41421356237309504880;
inline constexpr double sqrt_two_pi = 2.50662827463100050242;

/// Thrown when an iterative quadrature fails to contract to its target.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a tabulated sampling density fails its normalization guard;
/// the caller must refine the table grids.
class table_error : public std::runtime_error {
public:
    explicit table_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace zrp
