// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bucket/balance.hpp"
#include "bucket/classifier.hpp"
#include "bucket/ensemble.hpp"
#include "bucket/harness.hpp"
#include "bucket/io.hpp"
#include "bucket/metrics.hpp"
#include "bucket/rng.hpp"
#include "oracles/oracles.hpp"
#include "support/synthetic.hpp"

using namespace bucket;

namespace {

constexpr Label P = Label::positive;
constexpr Label N = Label::negative;

struct Verdict {
    bool pass = true;
    std::string detail;
    int failures = 0;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (failures++ < 5) detail += (detail.empty() ? "" : "; ") + what;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

FeatureMatrix matrix(const std::vector<std::vector<double>>& rows) {
    std::vector<double> v;
    for (const auto& r : rows) v.insert(v.end(), r.begin(), r.end());
    return FeatureMatrix("m", rows.size(), rows.front().size(), v);
}

// ---------------------------------------------------------------------------

Verdict fusion_oracle() {
    Verdict v;
    auto t0 = Clock::now();
    auto rng = seeded_rng(1, "acceptance/fusion");
    long long compared = 0;
    for (std::size_t n = 1; n <= 9; ++n) {
        for (std::size_t m = 1; n * m <= 9; ++m) {
            const std::size_t cells = n * m;
            for (std::uint32_t code = 0; code < (1u << cells); ++code) {
                std::vector<Label> d(cells);
                std::vector<std::vector<int>> od(n, std::vector<int>(m));
                for (std::size_t k = 0; k < cells; ++k) {
                    d[k] = (code >> k) & 1u ? P : N;
                    od[k / m][k % m] = to_int(d[k]);
                }
                for (int rep = 0; rep < 100; ++rep) {
                    // Every other matrix uses coarse scores so DS ties occur.
                    const bool coarse = rep % 2 == 1;
                    std::vector<double> s(cells);
                    std::vector<std::vector<double>> os(n, std::vector<double>(m));
                    for (std::size_t k = 0; k < cells; ++k) {
                        s[k] = coarse ? 0.5 + 0.1 * static_cast<double>(rng.uniform_index(6)) : rng.uniform01();
                        os[k / m][k % m] = s[k];
                    }
                    DecisionRecord rec(n, m, d, s);
                    for (bool prefer : {true, false}) {
                        auto ours = fuse(rec, prefer ? TieBreak::prefer_positive : TieBreak::lowest_index);
                        auto ref = oracle::fuse(od, os, prefer);
                        bool same = to_int(ours.final) == ref.final && ours.final_score == ref.final_score;
                        for (std::size_t f = 0; f < m; ++f) {
                            same = same && to_int(ours.dm[f]) == ref.dm[f] && ours.ds[f] == ref.ds[f];
                        }
                        v.require(same, fmt::format("mismatch n={} m={} code={}", n, m, code));
                        ++compared;
                    }
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    v.require(secs < 10.0, fmt::format("took {:.2f}s", secs));
    if (v.pass) v.detail = fmt::format("{} fusions compared in {:.2f}s", compared, secs);
    return v;
}

Verdict metric_arithmetic() {
    Verdict v;
    auto m = compute_metrics({8, 2, 7, 3});
    const double expected[8] = {0.7273, 0.7778, 0.8000, 0.7000, 0.7500, 0.7619, 0.7368, 0.5025};
    auto got = m.ordered();
    for (std::size_t k = 0; k < 8; ++k) {
        v.require(got[k] && std::abs(*got[k] - expected[k]) <= 5e-4,
                  fmt::format("{} = {}", MetricSet::names[k], got[k].value_or(-1)));
    }

    auto rng = seeded_rng(2, "acceptance/metrics");
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Confusion c;
        do {
            auto draw = [&] { return rng.uniform01() < 0.15 ? 0 : rng.uniform_index(rng.uniform01() < 0.5 ? 20 : 5000); };
            c = {draw(), draw(), draw(), draw()};
        } while (c.total() == 0);
        auto ours = compute_metrics(c).ordered();
        auto ref = oracle::metrics(c.tp, c.fp, c.tn, c.fn);
        for (std::size_t k = 0; k < 8; ++k) {
            v.require(ours[k].has_value() == ref.v[k].has_value(), "definedness differs from oracle");
            if (ours[k] && ref.v[k]) worst = std::max(worst, std::abs(*ours[k] - *ref.v[k]));
        }
        auto a = compute_metrics(c);
        auto b = compute_metrics({c.tn, c.fn, c.tp, c.fp});
        v.require(a.tpr == b.tnr && a.tnr == b.tpr && a.ppv == b.npv && a.npv == b.ppv && a.f1p == b.f1n &&
                      a.f1n == b.f1p && a.acc == b.acc && a.mcc == b.mcc,
                  "label swap asymmetry");
    }
    v.require(worst <= 1e-12, fmt::format("oracle deviation {:.3g}", worst));
    if (v.pass) v.detail = fmt::format("example within 5e-4, max oracle deviation {:.3g}, swap symmetric", worst);
    return v;
}

Verdict svm_correctness() {
    Verdict v;
    auto rng = seeded_rng(3, "acceptance/svm");
    double worst_sum = 0.0;
    double worst_kkt = 0.0;
    for (int ds = 0; ds < 20; ++ds) {
        // Linearly separable 2D set with a margin band removed.
        double angle = 2.0 * M_PI * rng.uniform01();
        double wx = std::cos(angle), wy = std::sin(angle);
        double offset = rng.uniform01() - 0.5;
        std::vector<std::vector<double>> pts;
        std::vector<Label> labels;
        while (pts.size() < 40) {
            double x = 6.0 * rng.uniform01() - 3.0;
            double y = 6.0 * rng.uniform01() - 3.0;
            double side = wx * x + wy * y + offset;
            if (std::abs(side) < 0.3) continue;
            pts.push_back({x, y});
            labels.push_back(side > 0 ? P : N);
        }
        if (std::count(labels.begin(), labels.end(), P) == 0 || std::count(labels.begin(), labels.end(), N) == 0) {
            --ds;
            continue;
        }
        auto rows = matrix(pts);
        for (auto kt : {KernelType::gaussian, KernelType::polynomial}) {
            SvmConfig cfg;
            cfg.kernel = kt;
            auto model = train({"svm", cfg}, rows, labels);
            const auto& svm = std::get<SvmModel>(model.model);
            v.require(svm.converged, fmt::format("dataset {} did not converge", ds));
            double sum = 0.0;
            for (std::size_t i = 0; i < svm.alpha.size(); ++i) {
                v.require(svm.alpha[i] >= 0.0 && svm.alpha[i] <= cfg.box, "alpha outside [0, C]");
                sum += svm.alpha[i] * to_int(labels[i]);
                if (svm.alpha[i] > 1e-8 && svm.alpha[i] < cfg.box - 1e-8) {
                    worst_kkt = std::max(worst_kkt, std::abs(to_int(labels[i]) * svm.decision_value(rows.row(i)) - 1.0));
                }
            }
            worst_sum = std::max(worst_sum, std::abs(sum));
        }
    }
    v.require(worst_sum <= 1e-6, fmt::format("|sum alpha y| = {:.3g}", worst_sum));
    v.require(worst_kkt <= 5e-3, fmt::format("KKT residual {:.3g}", worst_kkt));

    // XOR with the gaussian kernel.
    auto xor_rows = matrix({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    std::vector<Label> xor_labels{N, N, P, P};
    auto xor_model = train({"svm", SvmConfig{}}, xor_rows, xor_labels);
    int xor_errors = 0;
    for (std::size_t i = 0; i < 4; ++i) xor_errors += predict(xor_model, xor_rows.row(i)).decision != xor_labels[i];
    v.require(xor_errors == 0, fmt::format("XOR training errors: {}", xor_errors));

    // 4-point problems against exhaustive active-set enumeration.
    double worst_qp = 0.0;
    std::vector<std::pair<std::vector<std::vector<double>>, std::vector<Label>>> problems{{
        {{0, 0}, {1, 1}, {0, 1}, {1, 0}}, xor_labels}};
    for (int t = 0; t < 20; ++t) {
        std::vector<std::vector<double>> pts(4, std::vector<double>(2));
        for (auto& p : pts) for (auto& x : p) x = 2.0 * rng.normal();
        problems.push_back({pts, {P, N, t % 2 ? P : N, t % 3 ? N : P}});
    }
    for (const auto& [pts, labels] : problems) {
        for (auto kt : {KernelType::gaussian, KernelType::polynomial}) {
            SvmConfig cfg;
            cfg.kernel = kt;
            auto rows = matrix(pts);
            auto model = train({"svm", cfg}, rows, labels);
            const auto& svm = std::get<SvmModel>(model.model);
            Eigen::MatrixXd k(4, 4);
            Eigen::VectorXd y(4);
            for (int i = 0; i < 4; ++i) {
                y(i) = to_int(labels[static_cast<std::size_t>(i)]);
                for (int j = 0; j < 4; ++j) {
                    k(i, j) = kernel(rows.row(static_cast<std::size_t>(i)), rows.row(static_cast<std::size_t>(j)), svm.kernel);
                }
            }
            auto ref = oracle::solve_svm_dual(k, y, cfg.box);
            v.require(ref.found, "oracle found no KKT point");
            if (!ref.found) continue;
            // Alphas are unique only when K is strictly positive definite; the
            // objective is always unique, so it is compared as well.
            Eigen::VectorXd a(4);
            for (int i = 0; i < 4; ++i) a(i) = svm.alpha[static_cast<std::size_t>(i)];
            Eigen::MatrixXd q = (y * y.transpose()).cwiseProduct(k);
            double obj = 0.5 * a.dot(q * a) - a.sum();
            worst_qp = std::max(worst_qp, std::abs(obj - ref.objective));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
            if (es.eigenvalues().minCoeff() > 1e-6) worst_qp = std::max(worst_qp, (a - ref.alpha).cwiseAbs().maxCoeff());
        }
    }
    v.require(worst_qp <= 1e-4, fmt::format("4-point dual deviation {:.3g}", worst_qp));
    if (v.pass) {
        v.detail = fmt::format("max |sum alpha y| {:.2g}, max KKT residual {:.2g}, XOR separated, 4-point deviation {:.2g}",
                               worst_sum, worst_kkt, worst_qp);
    }
    return v;
}

Verdict knn_oracle() {
    Verdict v;
    auto rng = seeded_rng(4, "acceptance/knn");
    long long queries_checked = 0;
    for (int ds = 0; ds < 100; ++ds) {
        const std::size_t n = 5 + rng.uniform_index(36);
        const std::size_t q = 50 - n < 10 ? 50 - n : 10;
        const std::size_t d = 2 + rng.uniform_index(10);
        std::vector<std::vector<double>> train_pts(n, std::vector<double>(d));
        std::vector<std::vector<double>> queries(q, std::vector<double>(d));
        std::vector<Label> labels(n);
        std::vector<int> y(n);
        // Some datasets draw from a small integer grid so rank ties occur.
        const bool grid = ds % 3 == 0;
        auto draw = [&] { return grid ? static_cast<double>(rng.uniform_index(4)) : rng.normal(); };
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& x : train_pts[i]) x = draw();
            labels[i] = i < 2 ? (i == 0 ? P : N) : (rng.uniform01() < 0.5 ? P : N);
            y[i] = to_int(labels[i]);
        }
        for (auto& p : queries) for (auto& x : p) x = draw();
        for (auto dist : {RankDistance::spearman, RankDistance::correlation}) {
            for (int k : {3, 4}) {
                auto model = train({"knn", KnnConfig{k, dist}}, matrix(train_pts), labels);
                auto ref = oracle::knn_classify(train_pts, y, queries, k, dist == RankDistance::spearman);
                for (std::size_t i = 0; i < q; ++i) {
                    v.require(to_int(predict(model, queries[i]).decision) == ref[i],
                              fmt::format("dataset {} query {} differs", ds, i));
                    ++queries_checked;
                }
            }
        }
    }

    long long invariance_checked = 0;
    const std::vector<std::function<double(double)>> transforms{
        [](double x) { return std::exp(x); }, [](double x) { return x * x * x + 2.0 * x; },
        [](double x) { return std::atan(x) * 7.0 - 3.0; }};
    for (int ds = 0; ds < 30; ++ds) {
        const std::size_t n = 20;
        const std::size_t d = 6;
        std::vector<std::vector<double>> pts(n + 10, std::vector<double>(d));
        for (auto& p : pts) for (auto& x : p) x = rng.normal();
        std::vector<Label> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = i % 2 ? P : N;
        // Ranks are taken across the entries of a vector, so one strictly
        // increasing map is applied to every entry.
        const auto& map = transforms[static_cast<std::size_t>(ds) % transforms.size()];
        auto moved = pts;
        for (auto& p : moved) {
            for (auto& x : p) x = map(x);
        }
        for (int k : {3, 4}) {
            auto a = train({"knn", KnnConfig{k, RankDistance::spearman}},
                           matrix({pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n)}), labels);
            auto b = train({"knn", KnnConfig{k, RankDistance::spearman}},
                           matrix({moved.begin(), moved.begin() + static_cast<std::ptrdiff_t>(n)}), labels);
            for (std::size_t i = n; i < n + 10; ++i) {
                auto pa = predict(a, pts[i]);
                auto pb = predict(b, moved[i]);
                v.require(pa.decision == pb.decision && pa.score == pb.score, "rank invariance violated");
                ++invariance_checked;
            }
        }
    }
    if (v.pass) {
        v.detail = fmt::format("{} oracle queries equal, {} transformed queries invariant", queries_checked,
                               invariance_checked);
    }
    return v;
}

Verdict kmeans_balance() {
    Verdict v;
    auto rng = seeded_rng(5, "acceptance/kmeans");
    auto random_image = [&](std::size_t w, std::size_t h) {
        std::vector<Rgb> px(w * h);
        for (auto& p : px) for (auto& c : p) c = static_cast<std::uint8_t>(rng.uniform_index(256));
        return PixelImage(w, h, px);
    };
    for (int i = 0; i < 50; ++i) {
        auto img = random_image(8 + rng.uniform_index(10), 8 + rng.uniform_index(10));
        const int k = 1 + static_cast<int>(rng.uniform_index(6));
        auto r = kmeans_colors(img, k, static_cast<std::uint64_t>(i));
        for (std::size_t s = 1; s < r.sse_history.size(); ++s) {
            v.require(r.sse_history[s] <= r.sse_history[s - 1], fmt::format("SSE increased on image {}", i));
        }
    }

    auto img = random_image(11, 9);
    auto one = kmeans_colors(img, 1, 0);
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (const auto& p : img.pixels) sum += p[c];
        const double mean = sum / static_cast<double>(img.pixels.size());
        v.require(std::abs(one.centroids[0][c] - mean) <= 1e-9, "k=1 centroid is not the mean");
        v.require(one.quantized.pixels[0][c] == static_cast<std::uint8_t>(std::lround(mean)), "k=1 rounding");
    }

    std::vector<Rgb> two;
    for (int i = 0; i < 64; ++i) two.push_back(i % 5 == 0 ? Rgb{30, 180, 60} : Rgb{220, 20, 240});
    PixelImage two_img(8, 8, two);
    auto r2 = kmeans_colors(two_img, 2, 7);
    v.require(r2.quantized == two_img && r2.sse_history.back() == 0.0, "two-color image not reconstructed");

    // Execute the plan: every assignment yields one quantized minority image.
    for (auto [majority, minority] : {std::pair{100, 70}, std::pair{119, 87}}) {
        std::vector<Label> labels(static_cast<std::size_t>(majority), N);
        labels.insert(labels.end(), static_cast<std::size_t>(minority), P);
        if (majority == 119) {
            for (auto& l : labels) l = opposite(l);
        }
        auto plan = plan_balance(labels, 11);
        std::size_t pos = std::count(labels.begin(), labels.end(), P);
        std::size_t neg = labels.size() - pos;
        for (const auto& a : plan.assignments) {
            auto out = kmeans_colors(random_image(6, 6), a.k, a.source);
            v.require(out.quantized.pixels.size() == 36, "augmentation produced no image");
            (labels[a.source] == P ? pos : neg) += 1;
        }
        v.require(pos == neg && pos == static_cast<std::size_t>(majority),
                  fmt::format("{}/{} balanced to {}/{}", majority, minority, pos, neg));
    }
    if (v.pass) v.detail = "SSE monotone on 50 images, k=1 mean, two-color exact, 100/70->100/100, 119/87->119/119";
    return v;
}

Verdict protocol() {
    Verdict v;
    PipelineConfig cfg;
    cfg.seed = 6;
    auto labels = testsupport::alternating_labels(70, 100);
    for (const auto& p : make_splits(labels, cfg)) {
        v.require(p.train.size() == 136 && p.test.size() == 34,
                  fmt::format("split {}/{}", p.train.size(), p.test.size()));
    }

    cfg.iterations = 1000;
    double total = 0.0;
    for (const auto& p : make_splits(labels, cfg)) {
        std::set<std::size_t> distinct(p.bootstrap.begin(), p.bootstrap.end());
        total += static_cast<double>(distinct.size()) / static_cast<double>(p.bootstrap.size());
    }
    const double fraction = total / 1000.0;
    v.require(std::abs(fraction - 0.632) <= 0.02, fmt::format("distinct fraction {:.4f}", fraction));

    // Reproducibility across worker counts, including an augmented dataset.
    auto ds = testsupport::informative_and_noise(60, 6, 1.5, 6);
    PipelineConfig run;
    run.seed = 42;
    run.iterations = 3;
    run.workers = 1;
    auto r1 = evaluate(ds, run);
    run.workers = 8;
    auto r8 = evaluate(ds, run);
    bool identical = io::emit_report(r1, io::ReportFormat::csv) == io::emit_report(r8, io::ReportFormat::csv);
    for (std::size_t i = 0; i < r1.iterations.size(); ++i) {
        identical = identical && r1.iterations[i].cell_confusion == r8.iterations[i].cell_confusion;
        for (std::size_t j = 0; j < r1.iterations[i].images.size(); ++j) {
            const auto& a = r1.iterations[i].images[j].fusion;
            const auto& b = r8.iterations[i].images[j].fusion;
            identical = identical && a.dm == b.dm && a.ds == b.ds && a.final == b.final;
        }
    }
    v.require(identical, "reports differ between 1 and 8 workers");

    // No leakage: every plan over an augmented dataset passes the structural check.
    LabeledDataset aug;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == N || i % 3 != 0) keep.push_back(i);
    }
    for (std::size_t i : keep) {
        aug.ids.push_back(ds.ids[i]);
        aug.labels.push_back(ds.labels[i]);
    }
    for (const auto& view : ds.views) aug.views.push_back(view.select_rows(keep));
    const std::size_t originals = aug.size();
    aug.augmented_from.assign(originals, std::nullopt);
    std::vector<std::size_t> extra_rows;
    std::size_t pos = std::count(aug.labels.begin(), aug.labels.end(), P);
    for (std::size_t i = 0, added = 0; added + pos < originals - pos; ++i) {
        if (aug.labels[i % originals] != P) continue;
        aug.ids.push_back(aug.ids[i % originals] + "_km2_" + std::to_string(added));
        aug.labels.push_back(P);
        aug.augmented_from.push_back(i % originals);
        extra_rows.push_back(i % originals);
        ++added;
    }
    for (auto& view : aug.views) {
        std::vector<double> values(view.values().begin(), view.values().end());
        for (std::size_t r : extra_rows) {
            auto row = view.row(r);
            values.insert(values.end(), row.begin(), row.end());
        }
        view = FeatureMatrix(view.name(), aug.size(), view.cols(), values);
    }
    aug.validate();
    PipelineConfig leak_cfg;
    leak_cfg.seed = 9;
    leak_cfg.iterations = 200;
    std::size_t plans = 0;
    for (const auto& p : make_splits(aug, leak_cfg)) {
        try {
            check_no_leakage(p, aug);
        } catch (const ContractViolation& e) {
            v.require(false, e.what());
        }
        ++plans;
    }
    if (v.pass) {
        v.detail = fmt::format("136/34 splits, distinct fraction {:.4f}, 1 vs 8 workers identical, {} plans leak-free",
                               fraction, plans);
    }
    return v;
}

Verdict synthetic_end_to_end() {
    Verdict v;
    auto t0 = Clock::now();
    double fused_sum = 0.0;
    double best_sum = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto ds = testsupport::informative_and_noise(200, seed);
        PipelineConfig cfg;
        cfg.seed = seed;
        auto report = evaluate(ds, cfg);
        const double fused = *compute_metrics(report.aggregate).acc;
        double best = 0.0;
        for (std::size_t c = 0; c < report.classifier_names.size(); ++c) {
            for (std::size_t f = 0; f < report.feature_set_names.size(); ++f) {
                Confusion total;
                for (std::size_t it = 0; it < report.iterations.size(); ++it) total += report.cell_confusion(it, c, f);
                best = std::max(best, *compute_metrics(total).acc);
            }
        }
        fused_sum += fused;
        best_sum += best;
        per_seed += fmt::format("{}{:.3f}/{:.3f}", per_seed.empty() ? "" : " ", fused, best);
    }
    const double fused = fused_sum / 10.0;
    const double best = best_sum / 10.0;
    const double secs = seconds_since(t0);
    v.require(fused >= best - 0.05, fmt::format("fused {:.4f} vs best cell {:.4f} (per seed fused/best: {})", fused,
                                                best, per_seed));
    v.require(secs < 120.0, fmt::format("took {:.1f}s", secs));
    if (v.pass) v.detail = fmt::format("mean fused ACC {:.4f}, mean best cell ACC {:.4f}, {:.1f}s", fused, best, secs);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"fusion oracle equivalence", fusion_oracle},
        {"metric arithmetic", metric_arithmetic},
        {"svm correctness", svm_correctness},
        {"knn oracle", knn_oracle},
        {"k-means and balancing", kmeans_balance},
        {"evaluation protocol", protocol},
        {"synthetic end-to-end", synthetic_end_to_end},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = fmt::format("exception: {}", e.what());
        }
        std::cout << fmt::format("{} {}: {}", v.pass ? "PASS" : "FAIL", name, v.detail) << std::endl;
        failed += v.pass ? 0 : 1;
    }
    std::cout << fmt::format("{}/{} criteria passed", criteria.size() - static_cast<std::size_t>(failed), criteria.size())
              << std::endl;
    return failed == 0 ? 0 : 1;
}
