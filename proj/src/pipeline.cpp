#include "msspeech/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "msspeech/audio_io.hpp"
#include "msspeech/error.hpp"

namespace msspeech {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "'");
    }
}

PhonemeClassMap load_class_map(const RunConfig& cfg) {
    if (!cfg.class_map_path) return default_czech_class_map();
    return PhonemeClassMap::from_json(read_text_file(*cfg.class_map_path));
}

AnnotationTier load_annotation(const std::string& path) {
    const std::string text = read_text_file(path);
    std::string lower = path;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower.size() >= 9 && lower.substr(lower.size() - 9) == ".textgrid") {
        const auto tiers = parse_textgrid(text);
        if (tiers.empty()) throw FormatError("TextGrid has no interval tier: " + path);
        return tiers.front().second;
    }
    return parse_interval_csv(text);
}

std::string severity_name(QCSeverity s) {
    return s == QCSeverity::Error ? "ERROR" : "WARNING";
}

// the 7 validated features (bold rows of Table 1 / rows of Table 2)
const std::vector<std::string>& validated_feature_names() {
    static const std::vector<std::string> names(model_vector_names().begin(),
                                                model_vector_names().begin() + 7);
    return names;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    bool pitch_step_set = false;
    bool lpc_order_set = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: expected 'key = value', got '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "class_map") {
            cfg.class_map_path = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
        } else if (key == "format") {
            if (value == "csv") cfg.format = OutputFormat::Csv;
            else if (value == "json") cfg.format = OutputFormat::Json;
            else throw ConfigError("config: format must be csv or json");
        } else if (key == "models") {
            cfg.models.clear();
            std::string item;
            std::istringstream ms(value);
            while (std::getline(ms, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                if (!is_known_model_spec(item)) {
                    throw ConfigError("config: unknown model '" + item + "'");
                }
                cfg.models.push_back(item);
            }
            if (cfg.models.empty()) throw ConfigError("config: empty model list");
        } else if (key == "pitch.floor_hz") {
            cfg.analysis.pitch.floor_hz = to_double(value, key);
        } else if (key == "pitch.ceiling_hz") {
            cfg.analysis.pitch.ceiling_hz = to_double(value, key);
        } else if (key == "pitch.time_step_s") {
            cfg.analysis.pitch.time_step_s = to_double(value, key);
            pitch_step_set = true;
        } else if (key == "pitch.voicing_threshold") {
            cfg.analysis.pitch.voicing_threshold = to_double(value, key);
        } else if (key == "formant.max_formant_hz") {
            cfg.analysis.formant.max_formant_hz = to_double(value, key);
        } else if (key == "formant.n_formants") {
            cfg.analysis.formant.n_formants = static_cast<int>(to_double(value, key));
        } else if (key == "formant.lpc_order") {
            cfg.analysis.formant.lpc_order = static_cast<int>(to_double(value, key));
            lpc_order_set = true;
        } else if (key == "formant.window_s") {
            cfg.analysis.formant.window_s = to_double(value, key);
        } else if (key == "formant.time_step_s") {
            cfg.analysis.formant.time_step_s = to_double(value, key);
        } else if (key == "formant.preemphasis_from_hz") {
            cfg.analysis.formant.preemphasis_from_hz = to_double(value, key);
        } else if (key == "intensity.window_s") {
            cfg.analysis.intensity_window_s = to_double(value, key);
        } else if (key == "intensity.time_step_s") {
            cfg.analysis.intensity_step_s = to_double(value, key);
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    // derived defaults: the pitch step tracks the floor, the LPC order the
    // formant count, unless explicitly overridden
    if (!pitch_step_set) cfg.analysis.pitch.time_step_s = 0.75 / cfg.analysis.pitch.floor_hz;
    if (!lpc_order_set) cfg.analysis.formant.lpc_order = 2 * cfg.analysis.formant.n_formants;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_text_file(path));
}

// ---------------------------------------------------------------------------

FeatureTable cmd_extract(const std::string& manifest_path, const RunConfig& cfg,
                         const std::string& out_path) {
    const auto manifest = read_manifest(manifest_path);
    if (manifest.empty()) throw FormatError("manifest has no rows: " + manifest_path);
    const PhonemeClassMap class_map = load_class_map(cfg);

    FeatureTable table;
    std::ostringstream qc_log;
    qc_log << "subject_id,severity,message\n";

    for (const auto& row : manifest) {
        try {
            const Waveform audio = read_wav(row.wav_path);
            const AnnotationTier tier = load_annotation(row.annotation_path);

            const QCReport qc = qc_check(tier, audio.duration_s());
            for (const auto& f : qc) {
                qc_log << row.subject_id << ',' << severity_name(f.severity) << ',' << f.message
                       << '\n';
            }
            if (has_error(qc)) {
                qc_log << row.subject_id << ",ERROR,subject excluded from feature table\n";
                continue;
            }

            SubjectFeatures sf;
            sf.subject_id = row.subject_id;
            sf.cohort = row.cohort;
            sf.age_years = row.age_years;
            sf.gender_code = row.gender_code;
            sf.features = extract_all(audio, tier, class_map, cfg.analysis);
            table.push_back(std::move(sf));
        } catch (const std::exception& e) {
            qc_log << row.subject_id << ",ERROR," << e.what() << '\n';
            qc_log << row.subject_id << ",ERROR,subject excluded from feature table\n";
        }
    }

    write_text_file(out_path + ".qc.log", qc_log.str());
    if (table.empty()) {
        throw InsufficientDataError("cmd_extract: every manifest row failed; see " + out_path +
                                    ".qc.log");
    }
    write_text_file(out_path, feature_table_to_csv(table));
    return table;
}

std::vector<ValidationRow> cmd_validate(const std::string& auto_table_path,
                                        const std::string& reference_table_path,
                                        const RunConfig& cfg, const std::string& out_path) {
    const FeatureTable auto_table = feature_table_from_csv(read_text_file(auto_table_path));
    const FeatureTable ref_table = feature_table_from_csv(read_text_file(reference_table_path));

    const auto results = validate_features(to_column_table(auto_table),
                                           to_column_table(ref_table));
    std::vector<ValidationRow> rows;
    for (const auto& [name, corr] : results) {
        rows.push_back({name, corr, corr.p_one_sided < 0.05});
    }
    write_text_file(out_path, cfg.format == OutputFormat::Json ? validation_report_json(rows)
                                                               : validation_report_csv(rows));
    return rows;
}

std::vector<KSRow> cmd_ks(const std::string& feature_table_path, const RunConfig& cfg,
                          const std::string& out_path) {
    const FeatureTable table = feature_table_from_csv(read_text_file(feature_table_path));
    const Dataset ds = to_dataset(table);  // validates both cohorts present

    std::vector<KSRow> rows;
    for (std::size_t j = 0; j < validated_feature_names().size(); ++j) {
        std::vector<double> cases, controls;
        for (const auto& r : ds.rows) {
            (r.label == Label::Case ? cases : controls).push_back(r.vector[j]);
        }
        KSRow row;
        row.feature = validated_feature_names()[j];
        row.result = ks_two_sample(cases, controls);
        row.significant = row.result.p_value < 0.05;
        row.borderline = row.result.p_value < 0.1;
        rows.push_back(std::move(row));
    }
    write_text_file(out_path, cfg.format == OutputFormat::Json ? ks_report_json(rows)
                                                               : ks_report_csv(rows));
    return rows;
}

GLMReport cmd_glm(const std::string& feature_table_path, const RunConfig& cfg,
                  const std::string& out_path) {
    const FeatureTable table = feature_table_from_csv(read_text_file(feature_table_path));
    const Dataset ds = to_dataset(table);
    if (ds.rows.size() <= 10) throw InsufficientDataError("cmd_glm: needs more than 10 rows");

    const auto& names = model_vector_names();
    std::vector<std::vector<double>> columns(names.size());
    std::vector<int> outcomes;
    for (const auto& r : ds.rows) {
        for (std::size_t j = 0; j < names.size(); ++j) columns[j].push_back(r.vector[j]);
        outcomes.push_back(r.label == Label::Case ? 1 : 0);
    }

    GLMReport report;
    report.variable_names.assign(names.begin(), names.end());
    report.fit = logistic_glm(columns, report.variable_names, outcomes);
    write_text_file(out_path, cfg.format == OutputFormat::Json ? glm_report_json(report)
                                                               : glm_report_csv(report));
    return report;
}

std::vector<ModelReport> cmd_train(const std::string& feature_table_path, const RunConfig& cfg,
                                   const std::string& out_path) {
    const FeatureTable table = feature_table_from_csv(read_text_file(feature_table_path));
    const Dataset ds = to_dataset(table);

    CVConfig cv;
    cv.seed = cfg.seed;
    const auto reports = train_eval_suite(ds, cv, cfg.models);
    write_text_file(out_path, cfg.format == OutputFormat::Json ? model_report_json(reports)
                                                               : model_report_csv(reports));
    return reports;
}

std::string cmd_synth(const std::string& spec_path, const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override) {
    testkit::CohortSpec spec;
    if (!spec_path.empty()) spec = testkit::CohortSpec::from_json(read_text_file(spec_path));
    if (seed_override) spec.seed = *seed_override;
    return testkit::synth_cohort(spec, out_dir);
}

}  // namespace msspeech
