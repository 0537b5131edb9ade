#include "picard_engine.hpp"

#include "fbsde/parallel.hpp"

#include <cmath>

namespace fbsde::detail {
namespace {

class Engine {
public:
    Engine(const BackwardSystem& system, const EngineSettings& settings)
        : sys_(system),
          set_(settings),
          M_(system.paths()),
          N_(system.grid().N),
          q_(system.value_dim()),
          d_(system.noise_dim()),
          width_(q_ + q_ * d_),
          F_(system.feature_count()),
          n_(static_cast<std::size_t>(M_)) {}

    EngineResult run() {
        normalize();
        zeta_.resize(M_, q_);
        for_each_chunk(n_, [&](std::size_t, std::size_t b, std::size_t e) {
            Vec buf(q_);
            for (std::size_t m = b; m < e; ++m) {
                sys_.terminal(static_cast<std::int64_t>(m), buf.data());
                zeta_.row(static_cast<Eigen::Index>(m)) = buf.transpose();
            }
        });

        EngineResult out;
        auto models = pass(nullptr, nullptr, out);
        for (int n = 1; n <= set_.picard_max; ++n) {
            double residual = 0.0;
            models = pass(&models, &residual, out);
            out.picard_residuals.push_back(residual);
            out.iterations = n;
            if (!std::isfinite(residual)) throw RegressionError("Picard residual is not finite");
            if (residual <= set_.picard_tol) {
                out.converged = true;
                break;
            }
        }
        out.models = std::move(models);
        if (set_.store_processes) materialize(out);
        return out;
    }

private:
    const BackwardSystem& sys_;
    EngineSettings set_;
    std::int64_t M_;
    int N_, q_, d_, width_, F_;
    std::size_t n_;
    std::vector<Vec> shift_, scale_;
    Mat zeta_;

    // Chunk partial sums combined in chunk order.
    template <class Body>
    Vec ordered_sum(int width, Body&& body) const {
        std::vector<Vec> partial(chunk_count(n_), Vec::Zero(width));
        for_each_chunk(n_, [&](std::size_t c, std::size_t b, std::size_t e) {
            body(partial[c], b, e);
        });
        Vec total = Vec::Zero(width);
        for (const auto& p : partial) total += p;
        return total;
    }

    void normalize() {
        const int sd = sys_.state_dim();
        shift_.assign(N_, Vec::Zero(sd));
        scale_.assign(N_, Vec::Ones(sd));
        const double inv_m = 1.0 / static_cast<double>(M_);
        for (int k = 0; k < N_; ++k) {
            const Vec mean = ordered_sum(sd, [&](Vec& acc, std::size_t b, std::size_t e) {
                                 Vec s(sd);
                                 for (std::size_t m = b; m < e; ++m) {
                                     sys_.state(static_cast<std::int64_t>(m), k, s.data());
                                     acc += s;
                                 }
                             }) * inv_m;
            const Vec var = ordered_sum(sd, [&](Vec& acc, std::size_t b, std::size_t e) {
                                Vec s(sd);
                                for (std::size_t m = b; m < e; ++m) {
                                    sys_.state(static_cast<std::int64_t>(m), k, s.data());
                                    acc += (s - mean).cwiseAbs2();
                                }
                            }) * inv_m;
            shift_[k] = mean;
            for (int j = 0; j < sd; ++j) {
                const double s = std::sqrt(var[j]);
                scale_[k][j] = s > 1e-12 * std::max(1.0, std::abs(mean[j])) ? s : 1.0;
            }
        }
    }

    void layer_features(int k, Mat& phi) const {
        phi.resize(M_, F_);
        for_each_chunk(n_, [&](std::size_t, std::size_t b, std::size_t e) {
            Vec s(sys_.state_dim());
            Vec f(F_);
            for (std::size_t m = b; m < e; ++m) {
                const auto mi = static_cast<std::int64_t>(m);
                sys_.state(mi, k, s.data());
                s = (s - shift_[k]).cwiseQuotient(scale_[k]);
                sys_.features(mi, k, s.data(), f.data());
                phi.row(static_cast<Eigen::Index>(m)) = f.transpose();
            }
        });
    }

    // (y, vec z) of path m at step k in the original frame.
    void predict(const LinearFit& fit, const Mat& phi, std::int64_t m, int k, Vec& row,
                 Vec& out) const {
        row = phi.row(static_cast<Eigen::Index>(m)).transpose();
        fit.predict(row.data(), out.data());
        sys_.from_frame(m, k, out.data(), 1);
        sys_.from_frame(m, k, out.data() + q_, d_);
    }

    std::vector<RegressionModel> pass(const std::vector<RegressionModel>* old, double* residual,
                                      EngineResult& out) {
        const double dt = sys_.grid().dt();
        const double inv_dt = 1.0 / dt;
        const double inv_m = 1.0 / static_cast<double>(M_);
        std::vector<RegressionModel> models(N_);
        Mat S = Mat::Zero(M_, q_);  // S_{k+1}, then S_k
        Mat targets(M_, width_);
        Mat y_old(old ? M_ : 0, q_);
        Mat phi;
        if (residual) *residual = 0.0;

        for (int k = N_ - 1; k >= 0; --k) {
            layer_features(k, phi);
            for_each_chunk(n_, [&](std::size_t, std::size_t b, std::size_t e) {
                Vec row(F_), pred(width_), f(q_), yt(q_);
                Mat zt(q_, d_);
                for (std::size_t mm = b; mm < e; ++mm) {
                    const auto m = static_cast<std::int64_t>(mm);
                    const auto r = static_cast<Eigen::Index>(mm);
                    const Eigen::Map<const Vec> dw(sys_.dw(m, k), d_);
                    yt = zeta_.row(r).transpose() + S.row(r).transpose();
                    if (old) {
                        // The previous y_k is F_k-measurable, so removing it
                        // from the z target only lowers the variance.
                        predict((*old)[k].fit, phi, m, k, row, pred);
                        y_old.row(r) = pred.head(q_).transpose();
                        zt.noalias() = (yt - pred.head(q_)) * dw.transpose() * inv_dt;
                        sys_.driver(m, k, pred.data(), pred.data() + q_, f.data());
                        S.row(r) += dt * f.transpose();
                        yt += dt * f;
                    } else {
                        zt.noalias() = yt * dw.transpose() * inv_dt;
                    }
                    sys_.to_frame(m, k, zt.data(), d_);
                    targets.row(r).tail(q_ * d_) = Eigen::Map<const Vec>(zt.data(), q_ * d_);
                    if (k == 0) {
                        targets.row(r).head(q_) = yt.transpose();  // Gamma_0 = I
                    } else {
                        sys_.to_frame(m, k, yt.data(), 1);
                        targets.row(r).head(q_) = yt.transpose();
                    }
                }
            });
            if (k == 0) layer0_stats(targets.leftCols(q_), out);

            RegressionModel& model = models[k];
            model.state_shift = shift_[k];
            model.state_scale = scale_[k];
            model.fit = fit_linear(phi, targets, set_.ridge);
            if (!old) {
                model.fit.coef.rightCols(q_ * d_).setZero();
                model.fit.target_mean.tail(q_ * d_).setZero();
            }

            if (residual) {
                const Vec sq = ordered_sum(1, [&](Vec& acc, std::size_t b, std::size_t e) {
                    Vec row(F_), pred(width_);
                    for (std::size_t mm = b; mm < e; ++mm) {
                        const auto m = static_cast<std::int64_t>(mm);
                        predict(model.fit, phi, m, k, row, pred);
                        acc[0] += (pred.head(q_) - y_old.row(static_cast<Eigen::Index>(mm))
                                                       .transpose())
                                      .squaredNorm();
                    }
                });
                *residual += std::exp(set_.beta * sys_.grid().t(k)) * sq[0] * inv_m * dt;
            }
        }
        if (residual) *residual = std::sqrt(*residual);
        return models;
    }

    void layer0_stats(const Mat& values, EngineResult& out) const {
        const double inv_m = 1.0 / static_cast<double>(M_);
        const Vec mean = ordered_sum(q_, [&](Vec& acc, std::size_t b, std::size_t e) {
                             acc = values.middleRows(b, e - b).colwise().sum().transpose();
                         }) * inv_m;
        const Vec ss = ordered_sum(q_, [&](Vec& acc, std::size_t b, std::size_t e) {
            acc = (values.middleRows(b, e - b).rowwise() - mean.transpose())
                      .array()
                      .square()
                      .colwise()
                      .sum()
                      .transpose();
        });
        out.value = mean;
        out.std_error = Vec::Zero(q_);
        if (M_ > 1) {
            out.std_error = (ss / static_cast<double>(M_ - 1)).cwiseSqrt() * std::sqrt(inv_m);
        }
    }

    void materialize(EngineResult& out) const {
        const auto stride_y = static_cast<std::size_t>(N_ + 1) * q_;
        const auto stride_z = static_cast<std::size_t>(N_) * q_ * d_;
        out.y.assign(n_ * stride_y, 0.0);
        out.z.assign(n_ * stride_z, 0.0);
        Mat phi;
        for (int k = 0; k < N_; ++k) {
            layer_features(k, phi);
            for_each_chunk(n_, [&](std::size_t, std::size_t b, std::size_t e) {
                Vec row(F_), pred(width_);
                for (std::size_t mm = b; mm < e; ++mm) {
                    const auto m = static_cast<std::int64_t>(mm);
                    predict(out.models[k].fit, phi, m, k, row, pred);
                    std::copy_n(pred.data(), q_, out.y.data() + mm * stride_y + k * q_);
                    std::copy_n(pred.data() + q_, q_ * d_,
                                out.z.data() + mm * stride_z + static_cast<std::size_t>(k) * q_ * d_);
                }
            });
        }
        for (std::size_t m = 0; m < n_; ++m) {
            for (int j = 0; j < q_; ++j) {
                out.y[m * stride_y + static_cast<std::size_t>(N_) * q_ + j] =
                    zeta_(static_cast<Eigen::Index>(m), j);
            }
        }
    }
};

} // namespace

EngineResult run_picard(const BackwardSystem& system, const EngineSettings& settings) {
    return Engine(system, settings).run();
}

} // namespace fbsde::detail
