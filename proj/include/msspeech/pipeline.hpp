#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msspeech/tables.hpp"
#include "msspeech/testkit.hpp"

namespace msspeech {

enum class OutputFormat { Csv, Json };

struct RunConfig {
    std::optional<std::string> class_map_path;
    AnalysisConfig analysis;
    std::uint64_t seed = 1;
    std::vector<std::string> models = default_model_specs();
    OutputFormat format = OutputFormat::Csv;
};

// `key = value` lines, '#' comments; unknown keys are rejected.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Extracts features for every manifest row. Per-subject QC findings go to
// <out_path>.qc.log; subjects with ERROR findings (or decode failures) are
// excluded from the table and listed there. Throws only if no row succeeds.
FeatureTable cmd_extract(const std::string& manifest_path, const RunConfig& cfg,
                         const std::string& out_path);

// Table 1 analogue: per-feature correlation of the automatic table against a
// reference table, flagged at p < 0.05.
std::vector<ValidationRow> cmd_validate(const std::string& auto_table_path,
                                        const std::string& reference_table_path,
                                        const RunConfig& cfg, const std::string& out_path);

// Table 2 analogue: two-sample K-S over the 7 validated features.
std::vector<KSRow> cmd_ks(const std::string& feature_table_path, const RunConfig& cfg,
                          const std::string& out_path);

// Table 3 analogue: logistic GLM over the 9 model-vector columns.
GLMReport cmd_glm(const std::string& feature_table_path, const RunConfig& cfg,
                  const std::string& out_path);

// Table 4 analogue: the classification battery.
std::vector<ModelReport> cmd_train(const std::string& feature_table_path, const RunConfig& cfg,
                                   const std::string& out_path);

// Synthesizes a cohort; empty spec path uses defaults. Returns manifest path.
std::string cmd_synth(const std::string& spec_path, const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override);

}  // namespace msspeech
