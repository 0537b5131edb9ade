#pragma once

#include "fbsde/bsde.hpp"

#include <vector>

namespace fbsde::detail {

// Backward problem on a simulated grid, seen by the Picard-regression engine.
// Values are q-vectors, controls q x d (column-major). Regression happens in a
// per-path frame; to_frame/from_frame default to the identity.
class BackwardSystem {
public:
    virtual ~BackwardSystem() = default;

    virtual std::int64_t paths() const = 0;
    virtual const TimeGrid& grid() const = 0;
    virtual int value_dim() const = 0;
    virtual int noise_dim() const = 0;

    virtual int state_dim() const = 0;
    virtual void state(std::int64_t m, int k, double* out) const = 0;
    virtual int feature_count() const = 0;
    /// Features of path m at step k from its normalized state.
    virtual void features(std::int64_t m, int k, const double* normalized, double* out) const = 0;

    virtual void terminal(std::int64_t m, double* out) const = 0;
    virtual const double* dw(std::int64_t m, int k) const = 0;
    virtual void driver(std::int64_t m, int k, const double* y, const double* z,
                        double* out) const = 0;

    /// Applies the frame map to a q x cols column-major block in place.
    virtual void to_frame(std::int64_t, int, double*, int) const {}
    virtual void from_frame(std::int64_t, int, double*, int) const {}
};

struct EngineSettings {
    int picard_max = 30;
    double picard_tol = 1e-4;
    double beta = 1.0;
    double ridge = 1e-10;
    bool store_processes = false;
};

struct EngineResult {
    std::vector<RegressionModel> models;
    std::vector<double> picard_residuals;
    bool converged = false;
    int iterations = 0;
    Vec value;
    Vec std_error;
    std::vector<double> y;  ///< M x (N+1) x q when stored
    std::vector<double> z;  ///< M x N x (q x d) when stored
};

EngineResult run_picard(const BackwardSystem& system, const EngineSettings& settings);

} // namespace fbsde::detail
