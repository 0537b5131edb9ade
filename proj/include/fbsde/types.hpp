#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace fbsde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<Vec>;
using MatRef = Eigen::Ref<Mat>;
using CVecRef = Eigen::Ref<const Vec>;
using CMatRef = Eigen::Ref<const Mat>;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree with the declared problem dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A coefficient produced NaN/Inf or otherwise failed at a sampled point.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Unknown catalog entry or other name lookup failure.
class LookupError : public Error {
public:
    using Error::Error;
};

/// A problem object could not be assembled (missing callbacks, bad inputs).
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Forward simulation broke down (singular per-step factor).
class SimulationError : public Error {
public:
    using Error::Error;
};

/// Least-squares fit failed (rank deficiency without ridge, too few samples).
class RegressionError : public Error {
public:
    using Error::Error;
};

/// Run configuration text is malformed or violates the schema.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace fbsde
