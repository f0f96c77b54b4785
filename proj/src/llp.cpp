#include <cmath>
#include <vector>

#include "bucket/classifier.hpp"

namespace bucket {
namespace {

double logistic_loss(double z) {
    // log(1 + exp(-z)), stable for large |z|.
    return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

}  // namespace

double LlpModel::decision_value(std::span<const double> x) const {
    double f = 0.0;
    for (std::size_t j = 0; j < train_rows.size(); ++j) {
        if (weights[j] != 0.0) f += weights[j] * bucket::kernel(train_rows[j], x, kernel);
    }
    return f;
}

std::vector<double> llp_gradient(std::span<const double> gram, std::span<const Label> labels,
                                 std::span<const double> weights, double regularization) {
    // J(w) = sum_i log(1 + exp(-y_i f_i)) + lambda/2 w'Kw, f = Kw.
    // dJ/dw = K (lambda w - y .* sigmoid(-y .* f)).
    const std::size_t n = labels.size();
    std::vector<double> f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) f[i] += gram[i * n + j] * weights[j];
    }
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = to_int(labels[i]);
        r[i] = regularization * weights[i] - y * sigmoid(-y * f[i]);
    }
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) g[i] += gram[i * n + j] * r[j];
    }
    return g;
}

LlpModel train_llp(const LlpConfig& config, const FeatureMatrix& rows, std::span<const Label> labels,
                   const KernelSpec& spec) {
    const std::size_t n = rows.rows();
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double k = kernel(rows.row(i), rows.row(j), spec);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    auto matvec = [&](const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* gi = gram.data() + i * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += gi[j] * v[j];
            out[i] = s;
        }
        return out;
    };

    const double lambda = config.regularization;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = to_int(labels[i]);

    std::vector<double> w(n, config.init);
    std::vector<double> f = matvec(w);
    auto objective = [&](const std::vector<double>& ww, const std::vector<double>& ff) {
        double j = 0.0;
        double reg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            j += logistic_loss(y[i] * ff[i]);
            reg += ww[i] * ff[i];
        }
        return j + 0.5 * lambda * reg;
    };
    double obj = objective(w, f);

    // Gradient descent with Armijo backtracking; the step grows after every accepted move.
    double step = 1.0;
    int iter = 0;
    double gnorm = 0.0;
    std::vector<double> r(n);
    std::vector<double> wn(n);
    std::vector<double> fn(n);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) r[i] = lambda * w[i] - y[i] * sigmoid(-y[i] * f[i]);
        std::vector<double> g = matvec(r);
        double g2 = 0.0;
        for (double v : g) g2 += v * v;
        gnorm = std::sqrt(g2);
        if (gnorm <= config.gradient_tolerance || iter >= config.max_iter) break;
        ++iter;

        std::vector<double> kg = matvec(g);
        bool moved = false;
        while (step > 1e-20) {
            for (std::size_t i = 0; i < n; ++i) {
                wn[i] = w[i] - step * g[i];
                fn[i] = f[i] - step * kg[i];
            }
            double cand = objective(wn, fn);
            if (cand <= obj - 1e-4 * step * g2) {
                w.swap(wn);
                f.swap(fn);
                obj = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        step *= 2.0;
    }

    LlpModel model;
    model.config = config;
    model.kernel = spec;
    model.weights = w;
    model.iterations = iter;
    model.gradient_norm = gnorm;
    model.train_rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = rows.row(i);
        model.train_rows.emplace_back(row.begin(), row.end());
    }
    model.calibration = fit_platt(f, labels);
    return model;
}

}  // namespace bucket
