#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace emd {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

/// Tolerances shared across modules.
namespace tol {
inline constexpr double alg = 1e-10;       // exact-algebra identities
inline constexpr double inversion = 1e-8;  // identities that pass through a matrix inverse
inline constexpr double pd_rel = 1e-12;    // positive definiteness, relative to the norm
inline constexpr double pole = 1e-13;      // divisor magnitude treated as a pole
inline constexpr double rank_rel = 1e-8;   // numerical rank, relative to sigma_max
inline constexpr double lift = 1e-8;       // normalized least-squares lift residual
}  // namespace tol

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct PoleError : Error {
    using Error::Error;
};
struct LookupError : Error {
    using Error::Error;
};
struct InstabilityError : Error {
    using Error::Error;
};
struct FileError : Error {
    using Error::Error;
};

}  // namespace emd
