#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "msspeech/error.hpp"
#include "msspeech/pipeline.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string format;
    std::string out;
};

msspeech::RunConfig resolve_config(const GlobalOpts& g) {
    msspeech::RunConfig cfg;
    if (!g.config_path.empty()) cfg = msspeech::load_run_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (!g.format.empty()) {
        if (g.format == "csv") cfg.format = msspeech::OutputFormat::Csv;
        else if (g.format == "json") cfg.format = msspeech::OutputFormat::Json;
        else throw msspeech::ConfigError("--format must be csv or json");
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automated speech analysis for MS dysarthria studies: feature extraction, "
                 "validation statistics, and classification"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "key = value run configuration file");
    app.add_option("--seed", g.seed, "seed overriding the config file");
    app.add_option("--format", g.format, "report format: csv or json");
    app.add_option("--out", g.out, "output file (or directory for synth)");

    std::string manifest_path, auto_table, reference_table, feature_table, spec_path;

    auto* extract = app.add_subcommand("extract", "extract features for a manifest of "
                                                  "WAV + annotation pairs");
    extract->add_option("manifest", manifest_path, "manifest CSV")->required();

    auto* validate = app.add_subcommand("validate", "correlate automatic features against a "
                                                    "reference feature table");
    validate->add_option("auto_table", auto_table, "automatically extracted feature CSV")
        ->required();
    validate->add_option("reference_table", reference_table, "reference feature CSV")
        ->required();

    auto* ks = app.add_subcommand("ks", "two-sample K-S tests over the validated features");
    ks->add_option("features", feature_table, "feature CSV")->required();

    auto* glm = app.add_subcommand("glm", "logistic GLM adjustment over the model vector");
    glm->add_option("features", feature_table, "feature CSV")->required();

    auto* train = app.add_subcommand("train", "train and evaluate the classifier battery");
    train->add_option("features", feature_table, "feature CSV")->required();

    auto* synth = app.add_subcommand("synth", "synthesize a cohort of recordings");
    synth->add_option("--spec", spec_path, "cohort spec JSON (defaults when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        const msspeech::RunConfig cfg = resolve_config(g);
        if (extract->parsed()) {
            if (g.out.empty()) throw msspeech::ConfigError("extract requires --out");
            const auto table = msspeech::cmd_extract(manifest_path, cfg, g.out);
            std::cerr << "extracted " << table.size() << " subjects -> " << g.out << "\n";
        } else if (validate->parsed()) {
            if (g.out.empty()) throw msspeech::ConfigError("validate requires --out");
            msspeech::cmd_validate(auto_table, reference_table, cfg, g.out);
        } else if (ks->parsed()) {
            if (g.out.empty()) throw msspeech::ConfigError("ks requires --out");
            msspeech::cmd_ks(feature_table, cfg, g.out);
        } else if (glm->parsed()) {
            if (g.out.empty()) throw msspeech::ConfigError("glm requires --out");
            msspeech::cmd_glm(feature_table, cfg, g.out);
        } else if (train->parsed()) {
            if (g.out.empty()) throw msspeech::ConfigError("train requires --out");
            msspeech::cmd_train(feature_table, cfg, g.out);
        } else if (synth->parsed()) {
            if (g.out.empty()) throw msspeech::ConfigError("synth requires --out directory");
            const std::string manifest = msspeech::cmd_synth(spec_path, g.out, g.seed);
            std::cerr << "manifest: " << manifest << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
