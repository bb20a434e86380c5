#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = ecgscreen::cli;

namespace {

// --dataset-root falls back to the ECGSCREEN_DATA environment variable.
std::filesystem::path default_dataset_root() {
    const char* env = std::getenv("ECGSCREEN_DATA");
    return env ? std::filesystem::path(env) : std::filesystem::path();
}

void add_dataset_options(CLI::App* cmd, cli::DatasetOptions& d) {
    cmd->add_flag("--synthetic", d.synthetic, "Use the synthetic generator instead of PTB-XL");
    cmd->add_option("--n", d.n, "Synthetic dataset size");
    cmd->add_option("--margin", d.margin, "Synthetic class margin (in measurement tolerances)");
    cmd->add_option("--noise-std", d.noise_std, "Synthetic additive noise, mV");
    cmd->add_option("--dataset-root", d.dataset_root, "PTB-XL directory");
    cmd->add_option("--metadata", d.metadata_file, "Metadata file name within the root");
    cmd->add_option("--sampling-rate", d.sampling_rate, "Record resolution, Hz")
        ->check(CLI::IsMember({100, 500}));
    cmd->add_option("--codes", d.positive_codes, "Positive diagnostic codes");
    cmd->add_option("--threshold", d.likelihood_threshold, "Code likelihood threshold [0,100]");
    cmd->add_option("--control-policy", d.control_policy, "norm-matched | norm-all");
    cmd->add_option("--cohort-size", d.cohort_size, "Cap on total cohort records (0 = all)");
    cmd->add_flag("--include-demographics", d.include_demographics,
                  "Append age/sex/height/weight to the inputs");
    cmd->add_flag("--lenient", d.lenient, "Skip malformed metadata rows instead of failing");
    cmd->add_option("--fraction", d.fraction, "Training fraction of the split");
    cmd->add_option("--seed", d.seed, "Seed for cohort sampling, split and training");
    cmd->add_flag("--paper-faithful", d.paper_faithful,
                  "Normalize over the full dataset instead of the training split");
    cmd->add_option("--cache", d.cache, "Dataset cache file (loaded if present, else written)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ecgscreen: ECG ingestion, RVH/RAE criteria and DNN screening for "
                 "pulmonary hypertension"};
    app.require_subcommand(1);

    cli::StatsOptions stats_options;
    stats_options.dataset_root = default_dataset_root();
    auto* stats_cmd = app.add_subcommand("stats", "Dataset distribution tables");
    stats_cmd->add_option("--dataset-root", stats_options.dataset_root, "PTB-XL directory");
    stats_cmd->add_option("--metadata", stats_options.metadata_file, "Metadata file name");
    stats_cmd->add_option("--output-dir", stats_options.output_dir, "Where tables are written");

    cli::CohortOptions cohort_options;
    cohort_options.dataset_root = default_dataset_root();
    auto* cohort_cmd = app.add_subcommand("cohort", "Select positives and matched controls");
    cohort_cmd->add_option("--dataset-root", cohort_options.dataset_root, "PTB-XL directory");
    cohort_cmd->add_option("--metadata", cohort_options.metadata_file, "Metadata file name");
    cohort_cmd->add_option("--codes", cohort_options.positive_codes, "Positive diagnostic codes");
    cohort_cmd->add_option("--threshold", cohort_options.likelihood_threshold,
                           "Code likelihood threshold [0,100]");
    cohort_cmd->add_option("--control-policy", cohort_options.control_policy,
                           "norm-matched | norm-all");
    cohort_cmd->add_option("--seed", cohort_options.seed, "Control sampling seed");
    cohort_cmd->add_option("--output-dir", cohort_options.output_dir, "Where cohort.csv is written");

    cli::SplitOptions split_options;
    auto* split_cmd = app.add_subcommand("split", "Deterministic train/test split");
    split_cmd->add_option("--n", split_options.n, "Split ids 0..n-1");
    split_cmd->add_option("--cache", split_options.cache, "Split the examples of a cache file");
    split_cmd->add_option("--fraction", split_options.fraction, "Training fraction");
    split_cmd->add_option("--seed", split_options.seed, "Shuffle seed");
    split_cmd->add_option("--output-dir", split_options.output_dir, "Where split.csv is written");

    cli::TrainOptions train_options;
    train_options.dataset.dataset_root = default_dataset_root();
    auto* train_cmd = app.add_subcommand("train", "Train the screening network");
    add_dataset_options(train_cmd, train_options.dataset);
    train_cmd->add_option("--epochs", train_options.config.epochs, "Epoch budget");
    train_cmd->add_option("--lr0", train_options.config.lr0, "Initial learning rate");
    train_cmd->add_option("--decay", train_options.config.decay_rate,
                          "Exponential learning-rate decay per epoch, (0,1]");
    train_cmd->add_option("--batch-size", train_options.config.batch_size, "Mini-batch size");
    train_cmd->add_option("--patience", train_options.config.patience,
                          "Tolerated non-improving epochs before early stop");
    train_cmd->add_option("--min-delta", train_options.config.min_delta,
                          "Required validation-loss improvement");
    train_cmd->add_option("--hidden", train_options.hidden, "Hidden layer sizes, e.g. 256,64");
    train_cmd->add_flag("--multi-label", train_options.config.multi_label,
                        "Two outputs (RVH, RAE) instead of one screening probability");
    train_cmd->add_option("--val-fraction", train_options.val_fraction,
                          "Optional three-way split: validation share carved from train");
    train_cmd->add_option("--output-dir", train_options.output_dir, "Artifact directory");

    cli::EvalOptions eval_options;
    eval_options.dataset.dataset_root = default_dataset_root();
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model");
    eval_cmd->add_option("--model", eval_options.model, "Model file")->required();
    add_dataset_options(eval_cmd, eval_options.dataset);
    eval_cmd->add_option("--subset", eval_options.subset, "test | train | all");
    eval_cmd->add_option("--output-dir", eval_options.output_dir, "Report directory");

    cli::ScreenOptions screen_options;
    auto* screen_cmd = app.add_subcommand("screen", "Screen one WFDB record");
    screen_cmd->add_option("--record", screen_options.record, "Path to the .hea file")->required();
    screen_cmd->add_option("--model", screen_options.model, "Model file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (stats_cmd->parsed()) return cli::cmd_stats(stats_options);
        if (cohort_cmd->parsed()) return cli::cmd_cohort(cohort_options);
        if (split_cmd->parsed()) return cli::cmd_split(split_options);
        if (train_cmd->parsed()) return cli::cmd_train(train_options);
        if (eval_cmd->parsed()) return cli::cmd_eval(eval_options);
        if (screen_cmd->parsed()) return cli::cmd_screen(screen_options);
    } catch (const cli::Incompatible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitIncompatible;
    } catch (const ecgscreen::DivergenceError& e) {
        std::cerr << "error: training diverged: " << e.what() << "\n";
        return cli::kExitDivergence;
    } catch (const ecgscreen::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitDataError;
    }
    return cli::kExitOk;
}
