#include "bucket/calibration.hpp"

#include <cmath>
#include <vector>

namespace bucket {

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double SigmoidCalibration::positive_probability(double margin) const noexcept {
    return sigmoid(slope * margin + offset);
}

SigmoidCalibration fit_platt(std::span<const double> margins, std::span<const Label> labels) {
    // Platt's method in the numerically careful form of Lin, Lin and Weng.
    // Internally P(+1|f) = 1/(1+exp(A f + B)); the result is reported as slope=-A, offset=-B.
    const std::size_t n = margins.size();
    double prior_pos = 0.0;
    double prior_neg = 0.0;
    for (Label l : labels) (l == Label::positive ? prior_pos : prior_neg) += 1.0;

    SigmoidCalibration identity;
    if (n == 0 || prior_pos == 0.0 || prior_neg == 0.0) return identity;

    const double hi = (prior_pos + 1.0) / (prior_pos + 2.0);
    const double lo = 1.0 / (prior_neg + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == Label::positive ? hi : lo;

    constexpr int max_iter = 100;
    constexpr double min_step = 1e-10;
    constexpr double sigma = 1e-12;
    constexpr double eps = 1e-5;

    double a = 0.0;
    double b = std::log((prior_neg + 1.0) / (prior_pos + 1.0));

    auto objective = [&](double aa, double bb) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double fab = margins[i] * aa + bb;
            if (fab >= 0.0) {
                f += t[i] * fab + std::log1p(std::exp(-fab));
            } else {
                f += (t[i] - 1.0) * fab + std::log1p(std::exp(fab));
            }
        }
        return f;
    };

    double fval = objective(a, b);
    // A stalled line search near the optimum still yields a usable fit; only
    // running out of iterations (diverging slope) counts as degenerate.
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma;
        double h22 = sigma;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double fab = margins[i] * a + b;
            double p;
            double q;
            if (fab >= 0.0) {
                double e = std::exp(-fab);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                double e = std::exp(fab);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            double d2 = p * q;
            h11 += margins[i] * margins[i] * d2;
            h22 += d2;
            h21 += margins[i] * d2;
            double d1 = t[i] - p;
            g1 += margins[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) {
            converged = true;
            break;
        }
        double det = h11 * h22 - h21 * h21;
        double da = -(h22 * g1 - h21 * g2) / det;
        double db = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * da + g2 * db;

        double step = 1.0;
        bool accepted = false;
        while (step >= min_step) {
            double na = a + step * da;
            double nb = b + step * db;
            double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if (!accepted) {
            converged = true;
            break;
        }
    }

    SigmoidCalibration out{-a, -b, false};
    if (!converged || !std::isfinite(out.slope) || !std::isfinite(out.offset) || out.slope <= 0.0) {
        return identity;
    }
    return out;
}

}  // namespace bucket
