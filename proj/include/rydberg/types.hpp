#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rydberg {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cplx>;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

// Frequencies are given to the API as ordinary frequencies in MHz. Generators
// carry angular units (rad/us). This is the one place the factor lives.
inline constexpr double angular(double mhz) { return kTwoPi * mhz; }

// Bad user input: malformed config, inconsistent geometry, missing data.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integrator or optimizer gave up.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rydberg
