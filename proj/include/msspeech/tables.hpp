#pragma once

#include <string>
#include <vector>

#include "msspeech/features.hpp"
#include "msspeech/ml.hpp"
#include "msspeech/stats.hpp"

namespace msspeech {

// One feature-table row (the CSV schema: subject_id,cohort,age_years,
// gender_code followed by the 12 feature columns).
struct SubjectFeatures {
    std::string subject_id;
    std::string cohort;  // "case" or "control"
    double age_years = 0.0;
    int gender_code = 0;
    FeatureSet features;
};

using FeatureTable = std::vector<SubjectFeatures>;

std::string feature_table_to_csv(const FeatureTable& table);
FeatureTable feature_table_from_csv(const std::string& text);

// the 12-feature columns keyed by name, for the validation correlations
FeatureColumnTable to_column_table(const FeatureTable& table);

// length-9 model vectors labeled by cohort
Dataset to_dataset(const FeatureTable& table);

struct ManifestRow {
    std::string subject_id;
    std::string cohort;
    double age_years = 0.0;
    int gender_code = 0;
    std::string wav_path;
    std::string annotation_path;
};

// header: subject_id,cohort,age_years,gender_code,wav_path,annotation_path;
// relative paths resolve against the manifest's directory
std::vector<ManifestRow> read_manifest(const std::string& manifest_path);

// -- report rows --------------------------------------------------------------

struct ValidationRow {
    std::string feature;
    CorrelationResult result;
    bool significant = false;  // p < 0.05
};

struct KSRow {
    std::string feature;
    KSResult result;
    bool significant = false;  // p < 0.05
    bool borderline = false;   // p < 0.1
};

struct GLMReport {
    GLMResult fit;
    std::vector<std::string> variable_names;
};

std::string validation_report_csv(const std::vector<ValidationRow>& rows);
std::string validation_report_json(const std::vector<ValidationRow>& rows);

std::string ks_report_csv(const std::vector<KSRow>& rows);
std::string ks_report_json(const std::vector<KSRow>& rows);

std::string glm_report_csv(const GLMReport& report);
std::string glm_report_json(const GLMReport& report);

std::string model_report_csv(const std::vector<ModelReport>& reports);
std::string model_report_json(const std::vector<ModelReport>& reports);

// shared numeric formatting for reports (deterministic, round-trip safe)
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace msspeech
