#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library's solver paths.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <numbers>
#include <type_traits>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// exp(M) by Eigen's scaling and squaring (Pade) implementation.
inline Mat expm(const Mat& m) { return m.exp(); }

/// Gauss-Hermite rule for the weight exp(-x^2), by the Golub-Welsch eigenproblem.
struct GaussHermite {
    Vec nodes;
    Vec weights;

    explicit GaussHermite(int n) {
        Mat J = Mat::Zero(n, n);
        for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
        Eigen::SelfAdjointEigenSolver<Mat> eig(J);
        nodes = eig.eigenvalues();
        weights = std::sqrt(std::numbers::pi) * eig.eigenvectors().row(0).transpose().cwiseAbs2();
    }

    /// E[f(x + sqrt(tau) Z)], Z ~ N(0, 1).
    template <class F>
    auto gaussian_mean(F&& f, double x, double tau) const {
        using R = std::decay_t<decltype(f(x))>;
        R acc = f(x) * 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i) {
            acc += weights[i] * f(x + std::sqrt(2.0 * tau) * nodes[i]);
        }
        return R(acc / std::sqrt(std::numbers::pi));
    }
};

/// Backward method of lines on a 2pi-periodic grid for a d=1 system
///   u_s + 1/2 sigma^2 u_xx + drift u_x + P u_x + Q u = 0,  u(T) = u0,
/// fourth-order central differences in x, classical RK4 in s.
class PeriodicLineSolver {
public:
    PeriodicLineSolver(int cells, double sigma, double drift, Mat P, Mat Q)
        : n_(cells), h_(2.0 * std::numbers::pi / cells), sigma_(sigma), drift_(drift),
          P_(std::move(P)), Q_(std::move(Q)) {}

    /// Grid values u(s, x_j), x_j = j h, component-major rows (d1 x cells).
    Mat solve(const std::function<Vec(double)>& u0, double horizon, int steps) const {
        const auto d1 = P_.rows();
        Mat U(d1, n_);
        for (int j = 0; j < n_; ++j) U.col(j) = u0(j * h_);
        const double tau = horizon / steps;
        for (int k = 0; k < steps; ++k) {
            const Mat k1 = rhs(U);
            const Mat k2 = rhs(U + 0.5 * tau * k1);
            const Mat k3 = rhs(U + 0.5 * tau * k2);
            const Mat k4 = rhs(U + tau * k3);
            U += tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return U;
    }

    /// Periodic trigonometric interpolation of grid values at x.
    Vec interpolate(const Mat& U, double x) const {
        // Fourier coefficients by direct DFT; the grid is small.
        const auto d1 = U.rows();
        Vec out = Vec::Zero(d1);
        const int half = n_ / 2;
        for (int q = -half; q <= half; ++q) {
            const double weight = (std::abs(q) == half) ? 0.5 : 1.0;
            for (Eigen::Index l = 0; l < d1; ++l) {
                double re = 0.0, im = 0.0;
                for (int j = 0; j < n_; ++j) {
                    re += U(l, j) * std::cos(q * j * h_);
                    im -= U(l, j) * std::sin(q * j * h_);
                }
                out[l] += weight * (re * std::cos(q * x) - im * std::sin(q * x)) / n_;
            }
        }
        return out;
    }

    double spacing() const { return h_; }

private:
    // Time to go tau = T - s, so du/dtau = L u.
    Mat rhs(const Mat& U) const {
        const auto d1 = U.rows();
        Mat out(d1, n_);
        const auto at = [&](int j) { return U.col(((j % n_) + n_) % n_); };
        for (int j = 0; j < n_; ++j) {
            const Vec ux = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h_);
            const Vec uxx = (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) -
                             at(j - 2)) /
                            (12.0 * h_ * h_);
            out.col(j) = 0.5 * sigma_ * sigma_ * uxx + drift_ * ux + P_ * ux + Q_ * at(j);
        }
        return out;
    }

    int n_;
    double h_;
    double sigma_;
    double drift_;
    Mat P_;
    Mat Q_;
};

/// Sixth-order central first and second derivatives of a vector function of
/// one variable.
template <class F>
Vec central_d1(F&& f, double x, double h) {
    return (f(x + 3 * h) - 9.0 * f(x + 2 * h) + 45.0 * f(x + h) - 45.0 * f(x - h) +
            9.0 * f(x - 2 * h) - f(x - 3 * h)) /
           (60.0 * h);
}

template <class F>
Vec central_d2(F&& f, double x, double h) {
    return (2.0 * f(x + 3 * h) - 27.0 * f(x + 2 * h) + 270.0 * f(x + h) - 490.0 * f(x) +
            270.0 * f(x - h) - 27.0 * f(x - 2 * h) + 2.0 * f(x - 3 * h)) /
           (180.0 * h * h);
}

/// Sample mean and standard error of a list of numbers.
struct Moments {
    double mean = 0.0;
    double std_error = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (v.size() - 1.0) / v.size())};
}

} // namespace oracle
