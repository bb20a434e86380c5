#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecgscreen/errors.hpp"
#include "ecgscreen/mlp.hpp"
#include "ecgscreen/pipeline.hpp"

namespace ecgscreen::cli {

// Exit codes: 0 success, 2 input/data error, 3 training divergence,
// 4 model/record incompatibility.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIncompatible = 4;

/// Thrown when a model and a record/dataset cannot be combined.
class Incompatible : public Error {
public:
    using Error::Error;
};

struct DatasetOptions {
    bool synthetic = false;
    std::size_t n = 200;
    double margin = 2.0;
    double noise_std = 0.0;

    std::filesystem::path dataset_root;
    std::string metadata_file = "ptbxl_database.csv";
    int sampling_rate = 100;
    std::vector<std::string> positive_codes;
    double likelihood_threshold = kDefaultLikelihoodThreshold;
    std::string control_policy = "norm-matched";
    std::size_t cohort_size = 0;
    bool include_demographics = false;
    bool lenient = false;

    double fraction = 0.75;
    std::uint64_t seed = 0;
    bool paper_faithful = false;
    std::filesystem::path cache; // load when present, else build and save
};

struct StatsOptions {
    std::filesystem::path dataset_root;
    std::string metadata_file = "ptbxl_database.csv";
    std::filesystem::path output_dir = ".";
};

struct CohortOptions {
    std::filesystem::path dataset_root;
    std::string metadata_file = "ptbxl_database.csv";
    std::vector<std::string> positive_codes;
    double likelihood_threshold = kDefaultLikelihoodThreshold;
    std::string control_policy = "norm-matched";
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = ".";
};

struct SplitOptions {
    std::size_t n = 0; // when nonzero, split synthetic ids 0..n-1
    std::filesystem::path cache;
    double fraction = 0.75;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = ".";
};

struct TrainOptions {
    DatasetOptions dataset;
    TrainConfig config;
    std::string hidden = "256,64";
    double val_fraction = 0.0; // >0 carves a validation split out of train
    std::filesystem::path output_dir = ".";
};

struct EvalOptions {
    std::filesystem::path model;
    DatasetOptions dataset;
    std::string subset = "test"; // test | train | all
    std::filesystem::path output_dir = ".";
};

struct ScreenOptions {
    std::filesystem::path record; // .hea path
    std::filesystem::path model;
};

int cmd_stats(const StatsOptions& options);
int cmd_cohort(const CohortOptions& options);
int cmd_split(const SplitOptions& options);
int cmd_train(const TrainOptions& options);
int cmd_eval(const EvalOptions& options);
int cmd_screen(const ScreenOptions& options);

} // namespace ecgscreen::cli
