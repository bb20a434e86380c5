#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecgscreen/features.hpp"
#include "ecgscreen/metadata.hpp"
#include "ecgscreen/metrics.hpp"
#include "ecgscreen/synth.hpp"
#include "ecgscreen/wfdb.hpp"

namespace ecgscreen::cli {

namespace fs = std::filesystem;

namespace {

void write_table(const fs::path& path, const std::string& contents) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ControlPolicy parse_policy(const std::string& name) {
    if (name == "norm-matched") return ControlPolicy::NormMatched;
    if (name == "norm-all") return ControlPolicy::NormAll;
    throw ConfigError("unknown control policy: " + name);
}

std::set<std::string> codes_or_default(const std::vector<std::string>& codes) {
    if (codes.empty()) return default_positive_codes();
    return std::set<std::string>(codes.begin(), codes.end());
}

RealDataConfig to_real_config(const DatasetOptions& d) {
    RealDataConfig config;
    config.dataset_root = d.dataset_root;
    config.metadata_file = d.metadata_file;
    config.sampling_rate = d.sampling_rate;
    config.positive_codes = codes_or_default(d.positive_codes);
    config.likelihood_threshold = d.likelihood_threshold;
    config.control_policy = parse_policy(d.control_policy);
    config.cohort_cap = d.cohort_size;
    config.fraction = d.fraction;
    config.seed = d.seed;
    config.include_demographics = d.include_demographics;
    config.paper_faithful = d.paper_faithful;
    config.lenient_metadata = d.lenient;
    return config;
}

BuiltDataset obtain_dataset(const DatasetOptions& options) {
    if (!options.cache.empty() && fs::exists(options.cache)) {
        std::cout << "loading cached dataset from " << options.cache.string() << "\n";
        return cache_read(options.cache);
    }
    BuiltDataset dataset;
    if (options.synthetic) {
        SyntheticConfig config;
        config.n = options.n;
        config.class_margin = options.margin;
        config.seed = options.seed;
        config.noise_std = options.noise_std;
        config.fraction = options.fraction;
        config.paper_faithful = options.paper_faithful;
        dataset = build_synthetic_dataset(config);
    } else {
        if (options.dataset_root.empty())
            throw ConfigError("no dataset: pass --synthetic or --dataset-root "
                              "(or set ECGSCREEN_DATA)");
        dataset = build_real_dataset(to_real_config(options)).data;
    }
    if (!options.cache.empty()) {
        cache_write(dataset, options.cache);
        std::cout << "dataset cached to " << options.cache.string() << "\n";
    }
    return dataset;
}

std::vector<std::size_t> parse_hidden(const std::string& spec) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        sizes.push_back(static_cast<std::size_t>(std::stoul(item)));
    }
    if (sizes.empty()) throw ConfigError("empty --hidden specification");
    return sizes;
}

} // namespace

int cmd_stats(const StatsOptions& options) {
    const fs::path metadata_path = options.dataset_root / options.metadata_file;
    auto metas = load_metadata(read_text(metadata_path));

    std::map<std::string, std::string> descriptions;
    const fs::path statements = options.dataset_root / "scp_statements.csv";
    if (fs::exists(statements)) descriptions = load_code_descriptions(read_text(statements));

    const double threshold = kDefaultLikelihoodThreshold;
    std::map<std::string, std::size_t> labels = {{"rvh_and_rae", 0},
                                                 {"rvh_only", 0},
                                                 {"rae_only", 0},
                                                 {"norm", 0},
                                                 {"other", 0}};
    std::map<std::string, std::size_t> codes;
    std::array<std::size_t, 10> age_bins{};
    std::size_t age_unknown = 0;
    std::size_t male = 0, female = 0, sex_unknown = 0;

    for (const auto& meta : metas) {
        const bool rvh = code_positive(meta, "RVH", threshold);
        const bool rae = code_positive(meta, "RAO/RAE", threshold);
        const bool mentions = meta.scp_codes.count("RVH") || meta.scp_codes.count("RAO/RAE");
        if (rvh && rae) ++labels["rvh_and_rae"];
        else if (rvh) ++labels["rvh_only"];
        else if (rae) ++labels["rae_only"];
        else if (!mentions && code_positive(meta, "NORM", threshold)) ++labels["norm"];
        else ++labels["other"];

        for (const auto& [code, likelihood] : meta.scp_codes) {
            (void)likelihood;
            ++codes[code];
        }
        if (meta.age) {
            auto bin = static_cast<std::size_t>(std::clamp(*meta.age / 10.0, 0.0, 9.0));
            ++age_bins[bin];
        } else {
            ++age_unknown;
        }
        switch (meta.sex) {
            case Sex::Male: ++male; break;
            case Sex::Female: ++female; break;
            case Sex::Unknown: ++sex_unknown; break;
        }
    }

    std::ostringstream label_table;
    label_table << "category,count\n";
    for (const auto& [category, count] : labels) label_table << category << ',' << count << '\n';

    std::ostringstream age_table;
    age_table << "decade,count\n";
    for (std::size_t b = 0; b < age_bins.size(); ++b) {
        std::string name = b == 9 ? "90+" : std::to_string(b * 10) + "-" + std::to_string(b * 10 + 9);
        age_table << name << ',' << age_bins[b] << '\n';
    }
    age_table << "unknown," << age_unknown << '\n';

    std::ostringstream sex_table;
    sex_table << "sex,count\n"
              << "male," << male << "\nfemale," << female << "\nunknown," << sex_unknown << '\n';

    std::ostringstream code_table;
    code_table << "code,count,description\n";
    for (const auto& [code, count] : codes) {
        auto it = descriptions.find(code);
        std::string description = it == descriptions.end() ? "" : it->second;
        // Keep the table parseable: quote the free-text column.
        std::string quoted = "\"";
        for (char c : description) quoted += (c == '"') ? std::string("\"\"") : std::string(1, c);
        quoted += "\"";
        code_table << code << ',' << count << ',' << quoted << '\n';
    }

    write_table(options.output_dir / "labels.csv", label_table.str());
    write_table(options.output_dir / "age_hist.csv", age_table.str());
    write_table(options.output_dir / "sex.csv", sex_table.str());
    write_table(options.output_dir / "codes.csv", code_table.str());

    std::cout << "records=" << metas.size() << "\n" << label_table.str()
              << "tables written to " << options.output_dir.string() << "\n";
    return kExitOk;
}

int cmd_cohort(const CohortOptions& options) {
    const fs::path metadata_path = options.dataset_root / options.metadata_file;
    auto metas = load_metadata(read_text(metadata_path));
    CohortCatalog catalog = select_cohort(metas, codes_or_default(options.positive_codes),
                                          options.likelihood_threshold,
                                          parse_policy(options.control_policy), options.seed);

    std::ostringstream table;
    table << "record_id,group,rvh,rae\n";
    auto emit = [&](const std::set<std::string>& ids, const char* group) {
        for (const auto& id : ids) {
            const RecordMeta* meta = catalog.find(id);
            table << id << ',' << group << ','
                  << (code_positive(*meta, "RVH", options.likelihood_threshold) ? 1 : 0) << ','
                  << (code_positive(*meta, "RAO/RAE", options.likelihood_threshold) ? 1 : 0)
                  << '\n';
        }
    };
    emit(catalog.positive_ids, "positive");
    emit(catalog.control_ids, "control");
    write_table(options.output_dir / "cohort.csv", table.str());

    std::cout << "positives=" << catalog.positive_ids.size()
              << " controls=" << catalog.control_ids.size() << "\ncohort written to "
              << (options.output_dir / "cohort.csv").string() << "\n";
    return kExitOk;
}

int cmd_split(const SplitOptions& options) {
    DatasetSplit result;
    if (options.n > 0) {
        std::vector<std::string> ids;
        ids.reserve(options.n);
        for (std::size_t i = 0; i < options.n; ++i) ids.push_back(std::to_string(i));
        result = split(std::span<const std::string>(ids), options.fraction, options.seed);
    } else if (!options.cache.empty()) {
        BuiltDataset dataset = cache_read(options.cache);
        result = split(std::span<const LabeledExample>(dataset.examples), options.fraction,
                       options.seed);
    } else {
        throw ConfigError("split: pass --n or --cache");
    }

    std::ostringstream table;
    table << "record_id,subset\n";
    for (const auto& id : result.train_ids) table << id << ",train\n";
    for (const auto& id : result.test_ids) table << id << ",test\n";
    write_table(options.output_dir / "split.csv", table.str());

    std::cout << "train=" << result.train_ids.size() << " test=" << result.test_ids.size()
              << "\nsplit written to " << (options.output_dir / "split.csv").string() << "\n";
    return kExitOk;
}

int cmd_train(const TrainOptions& options) {
    BuiltDataset dataset = obtain_dataset(options.dataset);

    auto train_ptrs = dataset.subset(dataset.split.train_ids);
    auto test_ptrs = dataset.subset(dataset.split.test_ids);
    if (train_ptrs.empty() || test_ptrs.empty())
        throw EmptyDataset("train: empty train or test split");

    std::vector<const LabeledExample*> val_ptrs = test_ptrs;
    if (options.val_fraction > 0.0) {
        // Optional three-way split: carve validation out of the training ids.
        DatasetSplit carve = split(std::span<const std::string>(dataset.split.train_ids),
                                   1.0 - options.val_fraction, options.dataset.seed + 1);
        train_ptrs = dataset.subset(carve.train_ids);
        val_ptrs = dataset.subset(carve.test_ids);
    }

    TrainConfig config = options.config;
    config.seed = options.dataset.seed;
    config.hidden_sizes = parse_hidden(options.hidden);

    TrainResult trained = train(train_ptrs, val_ptrs, config);
    Evaluation eval = evaluate_examples(trained.model, val_ptrs);

    fs::create_directories(options.output_dir);
    ModelBundle bundle{trained.model, dataset.stats, dataset.sampling_rate,
                       dataset.samples_per_lead, dataset.include_demographics};
    save_model(bundle, options.output_dir / "model.ecgm");
    emit_report(eval.report, trained.history, options.output_dir / "");

    const EpochStats& final_epoch = trained.history.epochs.back();
    const AccuracyReadings readings = accuracy_readings(trained.history);
    const OverfitDiagnosis overfit = overfit_check(trained.history);
    std::cout.precision(6);
    std::cout << std::fixed
              << "epochs_run=" << trained.history.epochs.size()
              << " best_epoch=" << trained.history.best_epoch << "\n"
              << "train_accuracy=" << final_epoch.train_acc
              << " val_accuracy=" << final_epoch.val_acc << "\n"
              << "val_accuracy_best=" << readings.best_epoch
              << " val_accuracy_mean=" << readings.mean << "\n"
              << "test_accuracy=" << eval.report.accuracy << " f1=" << eval.report.f1
              << " auc=" << eval.report.auc << "\n"
              << "overfit_flagged=" << (overfit.flagged ? "yes" : "no") << "\n"
              << "artifacts written to " << options.output_dir.string() << "\n";
    return kExitOk;
}

int cmd_eval(const EvalOptions& options) {
    ModelBundle bundle = load_model(options.model);
    BuiltDataset dataset = obtain_dataset(options.dataset);

    std::vector<const LabeledExample*> subset;
    if (options.subset == "train") subset = dataset.subset(dataset.split.train_ids);
    else if (options.subset == "test") subset = dataset.subset(dataset.split.test_ids);
    else if (options.subset == "all") {
        for (const auto& ex : dataset.examples) subset.push_back(&ex);
    } else {
        throw ConfigError("eval: --subset must be train, test or all");
    }
    if (subset.empty()) throw EmptyDataset("eval: empty subset");
    if (subset.front()->input.size() != bundle.model.input_size())
        throw Incompatible("eval: dataset input length " +
                           std::to_string(subset.front()->input.size()) +
                           " does not match model input " +
                           std::to_string(bundle.model.input_size()));

    Evaluation eval = evaluate_examples(bundle.model, subset);
    fs::create_directories(options.output_dir);
    emit_report(eval.report, TrainHistory{}, options.output_dir / "");

    std::cout.precision(6);
    std::cout << std::fixed << "n=" << subset.size() << " accuracy=" << eval.report.accuracy
              << " f1=" << eval.report.f1 << " auc=" << eval.report.auc << "\n"
              << "report written to " << options.output_dir.string() << "\n";
    return kExitOk;
}

int cmd_screen(const ScreenOptions& options) {
    ModelBundle bundle = load_model(options.model);
    if (bundle.include_demographics)
        throw Incompatible("screen: model requires demographics, which a bare record lacks");

    EcgRecord record = wfdb::read_record(options.record);
    if (std::lround(record.sampling_rate) != std::lround(bundle.sampling_rate))
        throw Incompatible("screen: record sampling rate " +
                           std::to_string(record.sampling_rate) + " does not match model (" +
                           std::to_string(bundle.sampling_rate) + ")");
    if (record.samples_per_lead() != bundle.samples_per_lead)
        throw Incompatible("screen: record length " + std::to_string(record.samples_per_lead()) +
                           " does not match model (" + std::to_string(bundle.samples_per_lead) +
                           ")");

    auto normalized = normalize(record, bundle.stats);
    std::vector<double> input;
    input.reserve(kNumLeads * record.samples_per_lead());
    for (const auto& lead : normalized) input.insert(input.end(), lead.begin(), lead.end());
    if (input.size() != bundle.model.input_size())
        throw Incompatible("screen: input length " + std::to_string(input.size()) +
                           " does not match model input " +
                           std::to_string(bundle.model.input_size()));

    Screening screening = predict(bundle.model, input);

    nlohmann::json out;
    out["record_id"] = record.record_id;
    out["sampling_rate"] = record.sampling_rate;
    out["probability"] = screening.probability;
    out["positive"] = screening.positive;
    out["label"] = screening.positive ? "positive" : "negative";
    out["per_output"] = screening.per_output;

    // Rule-based criteria run alongside the network.
    try {
        FiducialSet fiducials = extract_fiducials(record);
        CriteriaResult criteria = evaluate_criteria(fiducials);
        out["criteria"] = {
            {"right_axis_deviation", criteria.right_axis_deviation},
            {"tall_narrow_r_v1", criteria.tall_narrow_r_v1},
            {"r_gt_s_v1", criteria.r_gt_s_v1},
            {"rae_flag", criteria.rae_flag},
            {"rvh_positive", criteria.rvh_positive},
            {"axis_undefined", criteria.axis_undefined},
        };
        out["fiducials"] = {
            {"beats", fiducials.r_peak_indices.size()},
            {"r_amp_v1", fiducials.r_amp_v1},
            {"s_amp_v1", fiducials.s_amp_v1},
            {"qrs_duration_ms", fiducials.qrs_duration_ms},
            {"p_amp_ii", fiducials.p_amp_ii},
        };
        if (fiducials.frontal_axis_deg)
            out["fiducials"]["frontal_axis_deg"] = *fiducials.frontal_axis_deg;
        else
            out["fiducials"]["frontal_axis_deg"] = nullptr;
    } catch (const NoBeats& e) {
        out["criteria"] = nullptr;
        out["criteria_error"] = e.what();
    } catch (const TooShort& e) {
        out["criteria"] = nullptr;
        out["criteria_error"] = e.what();
    }

    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

} // namespace ecgscreen::cli
