#pragma once

#include "fbsde/types.hpp"

#include <vector>

namespace fbsde {

/// All monomials of a `dim`-dimensional state up to total degree `degree`, in
/// graded lexicographic order. The first monomial is the constant 1.
class MonomialBasis {
public:
    MonomialBasis() = default;
    MonomialBasis(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }
    const std::vector<std::vector<int>>& exponents() const { return exponents_; }

    /// out[0..size()) for the given state[0..dim()).
    void eval(const double* state, double* out) const;

private:
    int dim_ = 0;
    int degree_ = 0;
    std::vector<std::vector<int>> exponents_;
};

/// Ridge least-squares map features -> targets. Features are centered and
/// scaled internally; the intercept is never penalized, so the fitted mean
/// always equals the target mean. Zero-variance feature columns are absorbed
/// into the intercept.
struct LinearFit {
    Vec feature_mean;        ///< F
    Vec feature_scale;       ///< F, 0 for dropped columns
    std::vector<int> kept;   ///< indices of active feature columns
    Mat coef;                ///< kept x q, on standardized features
    Vec target_mean;         ///< q

    int feature_count() const { return static_cast<int>(feature_mean.size()); }
    int target_count() const { return static_cast<int>(target_mean.size()); }

    /// out[0..q) for one feature row.
    void predict(const double* features, double* out) const;
    /// Predictions for every row of `features`.
    Mat predict(const CMatRef& features) const;
};

struct FitResult {
    LinearFit model;
    Mat fitted;  ///< M x q
};

/// Least squares of targets (M x q) on features (M x F). Requires M > F or
/// ridge > 0. With ridge == 0 a rank-deficient system raises RegressionError.
/// Reductions run in a fixed chunk order, so the result is bitwise independent
/// of the worker count.
FitResult fit_conditional(const CMatRef& features, const CMatRef& targets, double ridge);

/// Fit only, without materializing the fitted values.
LinearFit fit_linear(const CMatRef& features, const CMatRef& targets, double ridge);

} // namespace fbsde
