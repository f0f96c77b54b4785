#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "bucket/classifier.hpp"

namespace bucket {
namespace {

/// Lazily computed kernel rows over the training set.
class KernelRowCache {
public:
    KernelRowCache(const FeatureMatrix& rows, const KernelSpec& spec)
        : rows_(rows), spec_(spec), cache_(rows.rows()) {}

    const std::vector<double>& row(std::size_t i) {
        auto& r = cache_[i];
        if (r.empty()) {
            r.resize(rows_.rows());
            auto xi = rows_.row(i);
            for (std::size_t t = 0; t < rows_.rows(); ++t) r[t] = kernel(xi, rows_.row(t), spec_);
        }
        return r;
    }

private:
    const FeatureMatrix& rows_;
    KernelSpec spec_;
    std::vector<std::vector<double>> cache_;
};

/// Largest KKT violation max_{I_up}(-y G) - min_{I_low}(-y G); also returns the pair.
double violation(const std::vector<double>& y, const std::vector<double>& alpha, const std::vector<double>& grad,
                 double c, std::size_t& i, std::size_t& j) {
    const std::size_t n = y.size();
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    i = n;
    j = n;
    for (std::size_t t = 0; t < n; ++t) {
        const bool up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
        const bool low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
        double v = -y[t] * grad[t];
        if (up && v > gmax) {
            gmax = v;
            i = t;
        }
        if (low && v < gmin) {
            gmin = v;
            j = t;
        }
    }
    return (i == n || j == n) ? 0.0 : gmax - gmin;
}

/// Solves the equality-constrained problem on the current free set exactly.
/// Kept only when the result stays inside the box and violates KKT no more
/// than the SMO iterate.
void polish(const std::vector<double>& y, double c, KernelRowCache& cache, std::vector<double>& alpha,
            std::vector<double>& grad, double& gap) {
    const std::size_t n = y.size();
    std::vector<std::size_t> free;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < c) free.push_back(t);
    }
    const auto f = static_cast<Eigen::Index>(free.size());
    if (f == 0) return;

    // [Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B], with
    // Q_FB a_B = (G + 1)_F - Q_FF a_F.
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs(f + 1);
    double bound_sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!(alpha[t] > 0.0 && alpha[t] < c)) bound_sum += y[t] * alpha[t];
    }
    for (Eigen::Index a = 0; a < f; ++a) {
        const std::size_t ia = free[static_cast<std::size_t>(a)];
        const auto& row = cache.row(ia);
        double q_free = 0.0;
        for (Eigen::Index b = 0; b < f; ++b) {
            const std::size_t ib = free[static_cast<std::size_t>(b)];
            sys(a, b) = y[ia] * y[ib] * row[ib];
            q_free += sys(a, b) * alpha[ib];
        }
        sys(a, f) = y[ia];
        sys(f, a) = y[ia];
        rhs(a) = 1.0 - (grad[ia] + 1.0 - q_free);
    }
    rhs(f) = -bound_sum;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (!lu.isInvertible()) return;
    Eigen::VectorXd sol = lu.solve(rhs);

    std::vector<double> next = alpha;
    for (Eigen::Index a = 0; a < f; ++a) {
        double v = sol(a);
        if (!std::isfinite(v) || v < 0.0 || v > c) return;
        next[free[static_cast<std::size_t>(a)]] = v;
    }
    std::vector<double> next_grad = grad;
    for (std::size_t ia : free) {
        const double delta = next[ia] - alpha[ia];
        if (delta == 0.0) continue;
        const auto& row = cache.row(ia);
        for (std::size_t t = 0; t < n; ++t) next_grad[t] += y[t] * y[ia] * row[t] * delta;
    }
    std::size_t i = 0;
    std::size_t j = 0;
    const double next_gap = violation(y, next, next_grad, c, i, j);
    if (!(next_gap <= gap)) return;
    alpha = std::move(next);
    grad = std::move(next_grad);
    gap = next_gap;
}

}  // namespace

double SvmModel::decision_value(std::span<const double> x) const {
    double f = bias;
    for (std::size_t s = 0; s < support_vectors.size(); ++s) {
        f += coefficients[s] * bucket::kernel(support_vectors[s], x, kernel);
    }
    return f;
}

SvmModel train_svm(const SvmConfig& config, const FeatureMatrix& rows, std::span<const Label> labels,
                   const KernelSpec& spec) {
    const std::size_t n = rows.rows();
    const double c = config.box;
    constexpr double tau = 1e-12;

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = to_int(labels[i]);

    KernelRowCache cache(rows, spec);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = kernel(rows.row(i), rows.row(i), spec);

    // Dual: min 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij, 0 <= a <= C, y'a = 0.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    SvmModel model;
    model.config = config;
    model.kernel = spec;

    int iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    while (true) {
        // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over I_low,
        // equivalently the pair with the largest error difference E_j - E_i.
        std::size_t i = n;
        std::size_t j = n;
        gap = violation(y, alpha, grad, c, i, j);
        if (gap <= config.tolerance) {
            model.converged = true;
            break;
        }
        if (iter >= config.max_iter) break;
        ++iter;

        const auto& ki = cache.row(i);
        const auto& kj = cache.row(j);
        const double qij = y[i] * y[j] * ki[j];
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        if (y[i] != y[j]) {
            double quad = diag[i] + diag[j] + 2.0 * qij;
            if (quad <= 0.0) quad = tau;
            double delta = (-grad[i] - grad[j]) / quad;
            double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = diag[i] + diag[j] - 2.0 * qij;
            if (quad <= 0.0) quad = tau;
            double delta = (grad[i] - grad[j]) / quad;
            double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    if (model.converged) polish(y, c, cache, alpha, grad, gap);

    // Bias from free vectors, or the midpoint of the feasible interval.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);

    model.bias = -rho;
    model.iterations = iter;
    model.kkt_residual = gap;
    model.alpha = alpha;
    model.train_labels.assign(labels.begin(), labels.end());
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            auto r = rows.row(t);
            model.support_vectors.emplace_back(r.begin(), r.end());
            model.coefficients.push_back(alpha[t] * y[t]);
        }
    }

    std::vector<double> margins(n);
    for (std::size_t t = 0; t < n; ++t) {
        // f(x_t) = y_t * (G_t + 1) + b, reusing the solver gradient.
        margins[t] = y[t] * (grad[t] + 1.0) + model.bias;
    }
    model.calibration = fit_platt(margins, labels);
    return model;
}

}  // namespace bucket
