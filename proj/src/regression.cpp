#include "fbsde/regression.hpp"

#include "fbsde/parallel.hpp"

#include <cmath>

namespace fbsde {
namespace {

void enumerate(int dim, int remaining, int pos, std::vector<int>& current,
               std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        current[pos] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[pos] = e;
        enumerate(dim, remaining - e, pos + 1, current, out);
    }
}

// Sum of per-chunk partials in chunk order.
template <class Partial, class Body>
Partial ordered_sum(std::size_t n, const Partial& zero, Body&& body) {
    std::vector<Partial> partials(chunk_count(n), zero);
    for_each_chunk(n, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        body(partials[chunk], begin, end);
    });
    Partial total = zero;
    for (const auto& p : partials) total += p;
    return total;
}

} // namespace

MonomialBasis::MonomialBasis(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 0 || degree < 0) throw ConfigError("monomial basis: dim and degree must be >= 0");
    if (dim == 0) {
        exponents_.push_back({});
        return;
    }
    std::vector<int> current(dim, 0);
    for (int t = 0; t <= degree; ++t) enumerate(dim, t, 0, current, exponents_);
}

void MonomialBasis::eval(const double* state, double* out) const {
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        double v = 1.0;
        const auto& e = exponents_[i];
        for (int j = 0; j < dim_; ++j) {
            for (int p = 0; p < e[j]; ++p) v *= state[j];
        }
        out[i] = v;
    }
}

void LinearFit::predict(const double* features, double* out) const {
    const int q = target_count();
    for (int j = 0; j < q; ++j) out[j] = target_mean[j];
    for (std::size_t r = 0; r < kept.size(); ++r) {
        const int f = kept[r];
        const double z = (features[f] - feature_mean[f]) / feature_scale[f];
        for (int j = 0; j < q; ++j) out[j] += z * coef(static_cast<Eigen::Index>(r), j);
    }
}

Mat LinearFit::predict(const CMatRef& features) const {
    if (features.cols() != feature_count()) {
        throw DimensionError("predict: expected " + std::to_string(feature_count()) +
                             " feature columns, got " + std::to_string(features.cols()));
    }
    Mat out(features.rows(), target_count());
    Eigen::RowVectorXd row(features.cols());
    Eigen::RowVectorXd result(target_count());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        row = features.row(i);
        predict(row.data(), result.data());
        out.row(i) = result;
    }
    return out;
}

LinearFit fit_linear(const CMatRef& X, const CMatRef& Y, double ridge) {
    const auto M = X.rows();
    const auto F = X.cols();
    const auto q = Y.cols();
    if (Y.rows() != M) {
        throw DimensionError("fit: features have " + std::to_string(M) + " rows, targets " +
                             std::to_string(Y.rows()));
    }
    if (M < 1) throw RegressionError("fit: no samples");
    if (!(ridge >= 0.0)) throw RegressionError("fit: ridge must be >= 0");
    const auto n = static_cast<std::size_t>(M);
    const double inv_m = 1.0 / static_cast<double>(M);

    LinearFit fit;
    Eigen::RowVectorXd zero_x = Eigen::RowVectorXd::Zero(F);
    Eigen::RowVectorXd zero_y = Eigen::RowVectorXd::Zero(q);
    fit.feature_mean = ordered_sum(n, zero_x, [&](Eigen::RowVectorXd& acc, std::size_t b,
                                                  std::size_t e) {
                           acc = X.middleRows(b, e - b).colwise().sum();
                       }).transpose() * inv_m;
    fit.target_mean = ordered_sum(n, zero_y, [&](Eigen::RowVectorXd& acc, std::size_t b,
                                                 std::size_t e) {
                          acc = Y.middleRows(b, e - b).colwise().sum();
                      }).transpose() * inv_m;
    const Eigen::RowVectorXd mx = fit.feature_mean.transpose();
    const Eigen::RowVectorXd my = fit.target_mean.transpose();
    const Eigen::RowVectorXd var =
        ordered_sum(n, zero_x, [&](Eigen::RowVectorXd& acc, std::size_t b, std::size_t e) {
            acc = (X.middleRows(b, e - b).rowwise() - mx).array().square().colwise().sum();
        }) * inv_m;

    fit.feature_scale = Vec::Zero(F);
    for (Eigen::Index j = 0; j < F; ++j) {
        const double sd = std::sqrt(var[j]);
        if (sd > 1e-10 * std::max(1.0, std::abs(mx[j]))) {
            fit.feature_scale[j] = sd;
            fit.kept.push_back(static_cast<int>(j));
        }
    }
    const auto P = static_cast<Eigen::Index>(fit.kept.size());
    fit.coef = Mat::Zero(P, q);
    if (P == 0) return fit;
    if (ridge == 0.0 && M <= P) {
        throw RegressionError("fit: " + std::to_string(M) + " samples for " + std::to_string(P) +
                              " active features; use ridge > 0");
    }

    Eigen::RowVectorXd kept_mean(P), kept_inv_scale(P);
    for (Eigen::Index r = 0; r < P; ++r) {
        kept_mean[r] = mx[fit.kept[r]];
        kept_inv_scale[r] = 1.0 / fit.feature_scale[fit.kept[r]];
    }
    struct Normal {
        Mat G, b;
        Normal& operator+=(const Normal& o) {
            G += o.G;
            b += o.b;
            return *this;
        }
    };
    const Normal zero{Mat::Zero(P, P), Mat::Zero(P, q)};
    Normal ne = ordered_sum(n, zero, [&](Normal& acc, std::size_t b, std::size_t e) {
        const auto rows = static_cast<Eigen::Index>(e - b);
        Mat Z(rows, P);
        for (Eigen::Index r = 0; r < P; ++r) {
            Z.col(r) = (X.col(fit.kept[r]).segment(b, rows).array() - kept_mean[r]) *
                       kept_inv_scale[r];
        }
        acc.G.noalias() = Z.transpose() * Z;
        acc.b.noalias() = Z.transpose() * (Y.middleRows(b, rows).rowwise() - my);
    });
    ne.G *= inv_m;
    ne.b *= inv_m;
    ne.G.diagonal().array() += ridge;

    const Eigen::LDLT<Mat> ldlt(ne.G);
    const Vec pivots = ldlt.vectorD();
    const double max_pivot = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * max_pivot)) {
        if (ridge == 0.0) {
            throw RegressionError("fit: rank-deficient normal equations; use ridge > 0");
        }
        throw RegressionError("fit: normal equations are numerically singular");
    }
    fit.coef = ldlt.solve(ne.b);
    if (!fit.coef.allFinite()) throw RegressionError("fit: non-finite coefficients");
    return fit;
}

FitResult fit_conditional(const CMatRef& features, const CMatRef& targets, double ridge) {
    FitResult result;
    result.model = fit_linear(features, targets, ridge);
    result.fitted = result.model.predict(features);
    return result;
}

} // namespace fbsde
