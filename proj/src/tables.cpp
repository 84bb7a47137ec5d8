#include "msspeech/tables.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msspeech/error.hpp"

namespace msspeech {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, long line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad numeric field '" + s + "'", line_no);
    }
}

std::string feature_header() {
    std::string h = "subject_id,cohort,age_years,gender_code";
    for (const auto& name : feature_names()) h += "," + name;
    return h;
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// feature table

std::string feature_table_to_csv(const FeatureTable& table) {
    std::ostringstream os;
    os << feature_header() << '\n';
    for (const auto& row : table) {
        os << row.subject_id << ',' << row.cohort << ',' << format_double(row.age_years) << ','
           << row.gender_code;
        for (const auto& name : feature_names()) {
            os << ',' << format_double(feature_by_name(row.features, name));
        }
        os << '\n';
    }
    return os.str();
}

FeatureTable feature_table_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    long line_no = 0;

    if (!std::getline(is, line)) throw ParseError("empty feature table", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != feature_header()) {
        throw ParseError("feature table header mismatch; expected '" + feature_header() + "'",
                         line_no);
    }

    FeatureTable table;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4 + feature_names().size()) {
            throw ParseError("feature table row has wrong column count", line_no);
        }
        SubjectFeatures row;
        row.subject_id = fields[0];
        row.cohort = fields[1];
        row.age_years = parse_double(fields[2], line_no);
        row.gender_code = static_cast<int>(parse_double(fields[3], line_no));
        double* slots[12] = {
            &row.features.speech_duration_s,   &row.features.silence_to_speech_ratio,
            &row.features.vowel_to_speech_ratio, &row.features.csi_vowel_duration,
            &row.features.csi_f0,              &row.features.f0_quantile_diff,
            &row.features.unvoiced_stop_mean_ms, &row.features.csi_intensity,
            &row.features.s_centroid_sd_hz,    &row.features.f1_sd_hz,
            &row.features.f2_sd_hz,            &row.features.f3_sd_hz};
        for (std::size_t j = 0; j < 12; ++j) *slots[j] = parse_double(fields[4 + j], line_no);
        table.push_back(std::move(row));
    }
    return table;
}

FeatureColumnTable to_column_table(const FeatureTable& table) {
    FeatureColumnTable out;
    for (const auto& row : table) out.subject_ids.push_back(row.subject_id);
    for (const auto& name : feature_names()) {
        std::vector<double> col;
        col.reserve(table.size());
        for (const auto& row : table) col.push_back(feature_by_name(row.features, name));
        out.columns.emplace_back(name, std::move(col));
    }
    return out;
}

Dataset to_dataset(const FeatureTable& table) {
    Dataset ds;
    for (const auto& row : table) {
        std::string cohort = row.cohort;
        for (auto& c : cohort) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        Label label;
        if (cohort == "case") label = Label::Case;
        else if (cohort == "control") label = Label::Control;
        else throw FormatError("unknown cohort '" + row.cohort + "' for " + row.subject_id);
        ds.rows.push_back(
            {row.subject_id, label,
             build_model_vector(row.features, row.age_years, row.gender_code)});
    }
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// manifest

std::vector<ManifestRow> read_manifest(const std::string& manifest_path) {
    const std::string text = read_text_file(manifest_path);
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();

    std::istringstream is(text);
    std::string line;
    long line_no = 0;
    if (!std::getline(is, line)) throw ParseError("empty manifest", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "subject_id,cohort,age_years,gender_code,wav_path,annotation_path") {
        throw ParseError("manifest header mismatch", line_no);
    }

    std::vector<ManifestRow> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) throw ParseError("manifest row needs 6 columns", line_no);
        ManifestRow row;
        row.subject_id = fields[0];
        row.cohort = fields[1];
        row.age_years = parse_double(fields[2], line_no);
        row.gender_code = static_cast<int>(parse_double(fields[3], line_no));
        auto resolve = [&base](const std::string& p) {
            const std::filesystem::path fp(p);
            return fp.is_absolute() ? fp.string() : (base / fp).string();
        };
        row.wav_path = resolve(fields[4]);
        row.annotation_path = resolve(fields[5]);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// reports

std::string validation_report_csv(const std::vector<ValidationRow>& rows) {
    std::ostringstream os;
    os << "feature,r,p_one_sided,n,significant\n";
    for (const auto& row : rows) {
        os << row.feature << ',' << format_double(row.result.r) << ','
           << format_double(row.result.p_one_sided) << ',' << row.result.n << ','
           << bool_str(row.significant) << '\n';
    }
    return os.str();
}

std::string validation_report_json(const std::vector<ValidationRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows) {
        j.push_back({{"feature", row.feature},
                     {"r", row.result.r},
                     {"p_one_sided", row.result.p_one_sided},
                     {"n", row.result.n},
                     {"significant", row.significant}});
    }
    return j.dump(2) + "\n";
}

std::string ks_report_csv(const std::vector<KSRow>& rows) {
    std::ostringstream os;
    os << "feature,d_statistic,p_value,significant,borderline\n";
    for (const auto& row : rows) {
        os << row.feature << ',' << format_double(row.result.d_statistic) << ','
           << format_double(row.result.p_value) << ',' << bool_str(row.significant) << ','
           << bool_str(row.borderline) << '\n';
    }
    return os.str();
}

std::string ks_report_json(const std::vector<KSRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows) {
        j.push_back({{"feature", row.feature},
                     {"d_statistic", row.result.d_statistic},
                     {"p_value", row.result.p_value},
                     {"n1", row.result.n1},
                     {"n2", row.result.n2},
                     {"exact_p", row.result.exact_p},
                     {"ties", row.result.ties},
                     {"significant", row.significant},
                     {"borderline", row.borderline}});
    }
    return j.dump(2) + "\n";
}

std::string glm_report_csv(const GLMReport& report) {
    std::ostringstream os;
    os << "variable,coefficient,std_error,z,p_value,borderline,converged\n";
    auto line = [&os, &report](const GLMTerm& t) {
        os << t.name << ',' << format_double(t.coefficient) << ','
           << format_double(t.std_error) << ',' << format_double(t.z) << ','
           << format_double(t.p_two_sided) << ',' << bool_str(t.p_two_sided < 0.1) << ','
           << bool_str(report.fit.converged) << '\n';
    };
    line(report.fit.intercept);
    for (const auto& t : report.fit.terms) line(t);
    return os.str();
}

std::string glm_report_json(const GLMReport& report) {
    nlohmann::json terms = nlohmann::json::array();
    auto term_json = [](const GLMTerm& t) {
        return nlohmann::json{{"variable", t.name},
                              {"coefficient", t.coefficient},
                              {"std_error", t.std_error},
                              {"z", t.z},
                              {"p_value", t.p_two_sided},
                              {"borderline", t.p_two_sided < 0.1}};
    };
    terms.push_back(term_json(report.fit.intercept));
    for (const auto& t : report.fit.terms) terms.push_back(term_json(t));
    nlohmann::json j = {{"converged", report.fit.converged},
                        {"n_iterations", report.fit.n_iterations},
                        {"terms", terms}};
    return j.dump(2) + "\n";
}

std::string model_report_csv(const std::vector<ModelReport>& reports) {
    std::ostringstream os;
    os << "model,accuracy,sensitivity,specificity,mean_auc\n";
    for (const auto& r : reports) {
        os << r.model_name << ',' << format_double(r.accuracy) << ','
           << format_double(r.sensitivity) << ',' << format_double(r.specificity) << ','
           << format_double(r.mean_auc) << '\n';
    }
    return os.str();
}

std::string model_report_json(const std::vector<ModelReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) {
        j.push_back({{"model", r.model_name},
                     {"accuracy", r.accuracy},
                     {"sensitivity", r.sensitivity},
                     {"specificity", r.specificity},
                     {"mean_auc", r.mean_auc},
                     {"per_fold_auc", r.per_fold_auc}});
    }
    return j.dump(2) + "\n";
}

}  // namespace msspeech
