#include "bucket/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace bucket::io {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_full(double v) { return fmt::format("{:.17g}", v); }

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view what) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(fmt::format("{}: unexpected field '{}'", what, key));
        }
    }
}

KernelType parse_kernel(const std::string& s) {
    if (s == "polynomial") return KernelType::polynomial;
    if (s == "gaussian") return KernelType::gaussian;
    if (s == "rbf") return KernelType::rbf;
    throw ConfigError(fmt::format("unknown kernel '{}'", s));
}

std::optional<double> parse_scale(const json& v) {
    if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
    if (v.is_number()) return v.get<double>();
    throw ConfigError("kernel_scale must be \"auto\" or a positive number");
}

json metric_json(const Metric& m) { return m ? json(*m) : json(nullptr); }

std::string scope_name(std::size_t iteration) { return std::to_string(iteration + 1); }

}  // namespace

Label parse_label(std::string_view token) {
    token = trim(token);
    if (token == "melanoma" || token == "+1" || token == "1") return Label::positive;
    if (token == "not-melanoma" || token == "-1") return Label::negative;
    throw DataError(DataErrorKind::unknown_label, fmt::format("unknown label token '{}'", token));
}

FeatureFile parse_feature_file(std::istream& in, std::string_view source) {
    FeatureFile file;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::set<std::string, std::less<>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = trim(line);
        if (text.empty()) continue;
        auto fields = split_commas(text);
        if (!have_header) {
            if (fields.size() != 3 || fields[0] != "feature_set") {
                throw DataError(DataErrorKind::parse,
                                fmt::format("{}:{}: expected header 'feature_set,<name>,<dim>'", source, line_no));
            }
            auto dim = parse_double(fields[2]);
            if (!dim || *dim < 1 || std::floor(*dim) != *dim) {
                throw DataError(DataErrorKind::parse, fmt::format("{}:{}: bad dimensionality '{}'", source, line_no, fields[2]));
            }
            file.name = std::string(fields[1]);
            file.dim = static_cast<std::size_t>(*dim);
            have_header = true;
            continue;
        }
        if (fields.size() != file.dim + 2) {
            throw DataError(DataErrorKind::dimension_mismatch,
                            fmt::format("{}:{}: expected {} feature values, got {}", source, line_no, file.dim,
                                        fields.size() < 2 ? 0 : fields.size() - 2));
        }
        std::string id(fields[0]);
        if (id.empty()) throw DataError(DataErrorKind::parse, fmt::format("{}:{}: empty image id", source, line_no));
        if (!seen.insert(id).second) {
            throw DataError(DataErrorKind::duplicate_id, fmt::format("{}:{}: duplicate image id '{}'", source, line_no, id));
        }
        Label label;
        try {
            label = parse_label(fields[1]);
        } catch (const DataError& e) {
            throw DataError(DataErrorKind::unknown_label, fmt::format("{}:{}: {}", source, line_no, e.what()));
        }
        for (std::size_t k = 0; k < file.dim; ++k) {
            auto v = parse_double(fields[k + 2]);
            if (!v) {
                throw DataError(DataErrorKind::parse,
                                fmt::format("{}:{}: cannot parse value '{}'", source, line_no, fields[k + 2]));
            }
            if (!std::isfinite(*v)) {
                throw DataError(DataErrorKind::non_finite,
                                fmt::format("{}:{}: non-finite value in column {}", source, line_no, k + 1));
            }
            file.values.push_back(*v);
        }
        file.ids.push_back(std::move(id));
        file.labels.push_back(label);
    }
    if (!have_header) throw DataError(DataErrorKind::parse, fmt::format("{}: empty feature file", source));
    if (auto width = known_layer_width(file.name); width && *width != file.dim) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("{}: layer '{}' has width {}, header declares {}", source, file.name, *width, file.dim));
    }
    return file;
}

FeatureFile read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open feature file '{}'", path.string()));
    return parse_feature_file(in, path.string());
}

void write_feature_file(std::ostream& out, const FeatureMatrix& m, const std::vector<std::string>& ids,
                        const std::vector<Label>& labels) {
    out << "feature_set," << m.name() << ',' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << ids[i] << ',' << (labels[i] == Label::positive ? "melanoma" : "not-melanoma");
        for (double v : m.row(i)) out << ',' << format_full(v);
        out << '\n';
    }
}

Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("manifest is not valid JSON: {}", e.what()));
    }
    try {
        if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
        check_keys(doc, {"name", "features", "image_dir", "augmentation"}, "manifest");
        Manifest m;
        m.name = doc.value("name", std::string{});
        if (!doc.contains("features") || !doc["features"].is_array() || doc["features"].empty()) {
            throw ConfigError("manifest needs a non-empty 'features' array");
        }
        for (const auto& f : doc["features"]) {
            ManifestEntry e;
            if (f.is_string()) {
                e.path = resolve_path(base_dir, f.get<std::string>());
            } else {
                check_keys(f, {"path", "dim"}, "manifest feature entry");
                e.path = resolve_path(base_dir, f.at("path").get<std::string>());
                if (f.contains("dim")) {
                    auto d = f["dim"].get<long long>();
                    if (d < 1) throw ConfigError("manifest feature 'dim' must be positive");
                    e.dim = static_cast<std::size_t>(d);
                }
            }
            m.features.push_back(std::move(e));
        }
        if (doc.contains("image_dir")) m.image_dir = resolve_path(base_dir, doc["image_dir"].get<std::string>());
        if (doc.contains("augmentation")) m.augmentation = resolve_path(base_dir, doc["augmentation"].get<std::string>());
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed manifest: {}", e.what()));
    }
}

Manifest read_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_text(path), path.parent_path());
}

LabeledDataset assemble_dataset(std::vector<FeatureFile> files,
                                const std::vector<std::pair<std::string, std::string>>& augmentation) {
    if (files.empty()) throw DataError("no feature files");
    const auto& ref = files.front();
    std::map<std::string, Label> ref_labels;
    for (std::size_t i = 0; i < ref.ids.size(); ++i) ref_labels.emplace(ref.ids[i], ref.labels[i]);

    for (std::size_t f = 1; f < files.size(); ++f) {
        const auto& other = files[f];
        std::set<std::string> ids(other.ids.begin(), other.ids.end());
        std::vector<std::string> missing;
        std::vector<std::string> extra;
        for (const auto& [id, _] : ref_labels) {
            if (!ids.count(id)) missing.push_back(id);
        }
        for (const auto& id : ids) {
            if (!ref_labels.count(id)) extra.push_back(id);
        }
        if (!missing.empty() || !extra.empty()) {
            throw DataError(DataErrorKind::id_set_mismatch,
                            fmt::format("feature set '{}' ids differ from '{}': missing [{}], extra [{}]", other.name,
                                        ref.name, fmt::join(missing, ", "), fmt::join(extra, ", ")));
        }
        for (std::size_t i = 0; i < other.ids.size(); ++i) {
            if (ref_labels.at(other.ids[i]) != other.labels[i]) {
                throw DataError(DataErrorKind::unknown_label,
                                fmt::format("image '{}' is labelled differently in '{}' and '{}'", other.ids[i],
                                            ref.name, other.name));
            }
        }
    }

    LabeledDataset ds;
    for (const auto& [id, label] : ref_labels) {
        ds.ids.push_back(id);
        ds.labels.push_back(label);
    }
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < ds.ids.size(); ++i) position.emplace(ds.ids[i], i);

    for (auto& file : files) {
        std::vector<std::size_t> row_of(file.ids.size());
        for (std::size_t i = 0; i < file.ids.size(); ++i) row_of[i] = position.at(file.ids[i]);
        std::vector<double> values(file.values.size());
        for (std::size_t i = 0; i < file.ids.size(); ++i) {
            std::copy_n(file.values.begin() + static_cast<std::ptrdiff_t>(i * file.dim), file.dim,
                        values.begin() + static_cast<std::ptrdiff_t>(row_of[i] * file.dim));
        }
        ds.views.emplace_back(file.name, ds.ids.size(), file.dim, std::move(values));
    }

    if (!augmentation.empty()) {
        ds.augmented_from.assign(ds.size(), std::nullopt);
        for (const auto& [id, source] : augmentation) {
            auto it = position.find(id);
            auto src = position.find(source);
            if (it == position.end()) {
                throw DataError(DataErrorKind::id_set_mismatch, fmt::format("augmented id '{}' has no feature rows", id));
            }
            if (src == position.end()) {
                throw DataError(DataErrorKind::id_set_mismatch,
                                fmt::format("augmentation source '{}' has no feature rows", source));
            }
            ds.augmented_from[it->second] = src->second;
        }
    }
    ds.validate();
    return ds;
}

LabeledDataset load_dataset(const Manifest& manifest) {
    std::vector<FeatureFile> files;
    for (const auto& entry : manifest.features) {
        files.push_back(read_feature_file(entry.path));
        if (entry.dim && *entry.dim != files.back().dim) {
            throw DataError(DataErrorKind::dimension_mismatch,
                            fmt::format("'{}' declares {} columns but the manifest expects {}", entry.path.string(),
                                        files.back().dim, *entry.dim));
        }
    }
    std::vector<std::pair<std::string, std::string>> augmentation;
    if (manifest.augmentation) {
        std::istringstream in(read_text(*manifest.augmentation));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto text = trim(line);
            if (text.empty()) continue;
            auto fields = split_commas(text);
            if (line_no == 1 && fields[0] == "id") continue;
            if (fields.size() < 2) {
                throw DataError(DataErrorKind::parse,
                                fmt::format("{}:{}: expected 'id,source_id'", manifest.augmentation->string(), line_no));
            }
            augmentation.emplace_back(std::string(fields[0]), std::string(fields[1]));
        }
    }
    return assemble_dataset(std::move(files), augmentation);
}

std::vector<std::pair<std::string, Label>> read_labels_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::vector<std::pair<std::string, Label>> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty()) continue;
        auto fields = split_commas(text);
        if (fields.size() != 2) {
            throw DataError(DataErrorKind::parse, fmt::format("{}:{}: expected 'image_id,label'", path.string(), line_no));
        }
        if (out.empty() && (fields[0] == "image_id" || fields[0] == "id")) continue;
        std::string id(fields[0]);
        if (!seen.insert(id).second) {
            throw DataError(DataErrorKind::duplicate_id, fmt::format("{}:{}: duplicate id '{}'", path.string(), line_no, id));
        }
        out.emplace_back(std::move(id), parse_label(fields[1]));
    }
    return out;
}

std::vector<ClassifierConfig> parse_classifier_configs(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("classifier config is not valid JSON: {}", e.what()));
    }
    if (!doc.is_array() || doc.empty()) throw ConfigError("classifier config must be a non-empty JSON array");
    std::vector<ClassifierConfig> out;
    try {
        for (const auto& c : doc) {
            const std::string kind = c.at("kind").get<std::string>();
            ClassifierConfig cfg;
            cfg.name = c.value("name", fmt::format("{}-{}", kind, out.size()));
            if (kind == "svm") {
                check_keys(c, {"name", "kind", "kernel", "kernel_scale", "degree", "box", "max_iter", "tolerance"}, cfg.name);
                SvmConfig s;
                if (c.contains("kernel")) s.kernel = parse_kernel(c["kernel"].get<std::string>());
                if (c.contains("kernel_scale")) s.kernel_scale = parse_scale(c["kernel_scale"]);
                s.degree = c.value("degree", s.degree);
                s.box = c.value("box", s.box);
                s.max_iter = c.value("max_iter", s.max_iter);
                s.tolerance = c.value("tolerance", s.tolerance);
                cfg.params = s;
            } else if (kind == "llp") {
                check_keys(c, {"name", "kind", "kernel", "kernel_scale", "degree", "regularization", "max_iter", "init"},
                           cfg.name);
                LlpConfig l;
                if (c.contains("kernel")) l.kernel = parse_kernel(c["kernel"].get<std::string>());
                if (c.contains("kernel_scale")) l.kernel_scale = parse_scale(c["kernel_scale"]);
                l.degree = c.value("degree", l.degree);
                l.regularization = c.value("regularization", l.regularization);
                l.max_iter = c.value("max_iter", l.max_iter);
                l.init = c.value("init", l.init);
                cfg.params = l;
            } else if (kind == "knn") {
                check_keys(c, {"name", "kind", "neighbors", "distance"}, cfg.name);
                KnnConfig k;
                k.neighbors = c.value("neighbors", k.neighbors);
                const std::string dist = c.value("distance", std::string("spearman"));
                if (dist == "spearman") k.distance = RankDistance::spearman;
                else if (dist == "correlation") k.distance = RankDistance::correlation;
                else throw ConfigError(fmt::format("{}: unknown distance '{}'", cfg.name, dist));
                cfg.params = k;
            } else {
                throw ConfigError(fmt::format("unknown classifier kind '{}'", kind));
            }
            cfg.validate();
            out.push_back(std::move(cfg));
        }
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed classifier config: {}", e.what()));
    }
    return out;
}

std::string format_metric_row(const MetricSet& metrics) {
    std::string out;
    for (const auto& m : metrics.ordered()) {
        if (!out.empty()) out += ' ';
        out += m ? fmt::format("{:.2f}", *m) : std::string("—");
    }
    return out;
}

std::string emit_report(const EvalReport& report, ReportFormat format, bool verbose) {
    struct Row {
        std::string scope;
        Confusion c;
    };
    std::vector<Row> rows;
    rows.push_back({"aggregate", report.aggregate});
    for (std::size_t i = 0; i < report.iterations.size(); ++i) rows.push_back({scope_name(i), report.iterations[i].confusion});

    std::string out;
    switch (format) {
        case ReportFormat::table: {
            out += fmt::format("{:<12} {}", "scope", "TPR  TNR  PPV  NPV  ACC  F1p  F1n  MCC");
            if (verbose) out += "  ACCprev";
            out += '\n';
            for (const auto& r : rows) {
                auto ms = compute_metrics(r.c);
                std::string label = r.scope == "aggregate" ? r.scope : "iteration " + r.scope;
                out += fmt::format("{:<12} {}", label, format_metric_row(ms));
                if (verbose) out += fmt::format("  {:.2f}", *ms.acc_prevalence);
                out += '\n';
            }
            break;
        }
        case ReportFormat::csv: {
            out += "scope,tp,fp,tn,fn";
            for (auto name : MetricSet::names) out += fmt::format(",{}", name);
            if (verbose) out += ",ACC_prevalence";
            out += '\n';
            for (const auto& r : rows) {
                auto ms = compute_metrics(r.c);
                out += fmt::format("{},{},{},{},{}", r.scope, r.c.tp, r.c.fp, r.c.tn, r.c.fn);
                for (const auto& m : ms.ordered()) out += ',' + (m ? format_full(*m) : std::string("null"));
                if (verbose) out += ',' + format_full(*ms.acc_prevalence);
                out += '\n';
            }
            break;
        }
        case ReportFormat::jsonl: {
            for (const auto& r : rows) {
                auto ms = compute_metrics(r.c);
                json j;
                j["scope"] = r.scope;
                j["tp"] = r.c.tp;
                j["fp"] = r.c.fp;
                j["tn"] = r.c.tn;
                j["fn"] = r.c.fn;
                auto ordered = ms.ordered();
                for (std::size_t k = 0; k < ordered.size(); ++k) j[std::string(MetricSet::names[k])] = metric_json(ordered[k]);
                if (verbose) j["ACC_prevalence"] = metric_json(ms.acc_prevalence);
                out += j.dump();
                out += '\n';
            }
            break;
        }
    }
    return out;
}

std::vector<ReportRow> parse_report(std::string_view text, ReportFormat format) {
    std::vector<ReportRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (format == ReportFormat::csv) {
        if (!std::getline(in, line)) throw DataError(DataErrorKind::parse, "empty csv report");
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto f = split_commas(line);
            if (f.size() < 13) throw DataError(DataErrorKind::parse, "csv report row too short");
            ReportRow r;
            r.scope = std::string(f[0]);
            auto count = [&](std::string_view s) {
                std::uint64_t v = 0;
                auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec != std::errc() || p != s.data() + s.size()) throw DataError(DataErrorKind::parse, "bad count");
                return v;
            };
            r.confusion = {count(f[1]), count(f[2]), count(f[3]), count(f[4])};
            for (std::size_t k = 0; k < 8; ++k) {
                if (f[5 + k] == "null") continue;
                auto v = parse_double(f[5 + k]);
                if (!v) throw DataError(DataErrorKind::parse, "bad metric value");
                r.metrics[k] = *v;
            }
            rows.push_back(std::move(r));
        }
    } else if (format == ReportFormat::jsonl) {
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json j = json::parse(line);
            ReportRow r;
            r.scope = j.at("scope").get<std::string>();
            r.confusion = {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
                           j.at("tn").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>()};
            for (std::size_t k = 0; k < 8; ++k) {
                const auto& v = j.at(std::string(MetricSet::names[k]));
                if (!v.is_null()) r.metrics[k] = v.get<double>();
            }
            rows.push_back(std::move(r));
        }
    } else {
        throw ContractViolation("parse_report supports csv and jsonl only");
    }
    return rows;
}

}  // namespace bucket::io
