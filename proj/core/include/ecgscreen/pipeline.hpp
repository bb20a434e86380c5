#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "ecgscreen/metadata.hpp"
#include "ecgscreen/metrics.hpp"
#include "ecgscreen/mlp.hpp"
#include "ecgscreen/preprocess.hpp"

namespace ecgscreen {

/// End-to-end dataset construction. Both builders split first and compute
/// normalization statistics from the training portion only, unless
/// paper_faithful asks for global statistics.

struct SyntheticConfig {
    std::size_t n = 200;
    double class_margin = 2.0;
    std::uint64_t seed = 0;
    double noise_std = 0.0;
    double fraction = 0.75;
    bool paper_faithful = false;
};

BuiltDataset build_synthetic_dataset(const SyntheticConfig& config);

struct RealDataConfig {
    std::filesystem::path dataset_root;
    std::string metadata_file = "ptbxl_database.csv";
    int sampling_rate = 100; // 100 or 500
    std::set<std::string> positive_codes = default_positive_codes();
    double likelihood_threshold = kDefaultLikelihoodThreshold;
    ControlPolicy control_policy = ControlPolicy::NormMatched;
    std::size_t cohort_cap = 0; // 0 = no cap; otherwise total records, balanced
    double fraction = 0.75;
    std::uint64_t seed = 0;
    bool include_demographics = false;
    bool paper_faithful = false;
    bool lenient_metadata = false;
};

struct RealDataset {
    BuiltDataset data;
    CohortCatalog catalog;
};

/// Loads the metadata catalog, selects the cohort, reads every WFDB record
/// at the requested resolution and assembles the normalized dataset.
RealDataset build_real_dataset(const RealDataConfig& config);

/// Resolves a PTB-XL record path for the given sampling rate: the metadata
/// filename column when present, else the conventional records100/...
/// layout derived from the numeric id.
std::filesystem::path resolve_record_path(const std::filesystem::path& root,
                                          const RecordMeta& meta, int sampling_rate);

struct Evaluation {
    EvalReport report;
    std::vector<double> scores;
    std::vector<int> labels;
};

/// Screens every example through the model and assembles the full report
/// (threshold 0.5, strict > for positive). Throws UndefinedRoc when the
/// subset contains a single class.
Evaluation evaluate_examples(const MlpModel& model,
                             std::span<const LabeledExample* const> examples);

} // namespace ecgscreen
