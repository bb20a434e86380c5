#include "ecgscreen/pipeline.hpp"

#include <algorithm>
#include <random>

#include "ecgscreen/errors.hpp"
#include "ecgscreen/synth.hpp"
#include "ecgscreen/wfdb.hpp"
#include "internal/fsio.hpp"

namespace ecgscreen {

BuiltDataset build_synthetic_dataset(const SyntheticConfig& config) {
    BuiltDataset dataset;
    dataset.examples = generate_training_set(config.n, config.class_margin, config.seed,
                                             config.noise_std);
    dataset.sampling_rate = 100.0;
    dataset.samples_per_lead =
        static_cast<std::uint32_t>(dataset.examples.front().input.size() / kNumLeads);
    dataset.include_demographics = false;
    dataset.split = split(std::span<const LabeledExample>(dataset.examples), config.fraction,
                          config.seed);

    std::vector<const LabeledExample*> stats_source;
    if (config.paper_faithful) {
        for (const auto& ex : dataset.examples) stats_source.push_back(&ex);
    } else {
        stats_source = dataset.subset(dataset.split.train_ids);
    }
    dataset.stats = compute_norm_stats(stats_source, dataset.samples_per_lead);
    for (auto& ex : dataset.examples) normalize_flat(ex, dataset.stats, dataset.samples_per_lead);
    return dataset;
}

RealDataset build_real_dataset(const RealDataConfig& config) {
    const auto metadata_path = config.dataset_root / config.metadata_file;
    auto metas = load_metadata(fsio::read_text_file(metadata_path),
                               MetadataOptions{.lenient = config.lenient_metadata});

    RealDataset result;
    result.catalog = select_cohort(metas, config.positive_codes, config.likelihood_threshold,
                                   config.control_policy, config.seed);

    std::vector<std::string> positives(result.catalog.positive_ids.begin(),
                                       result.catalog.positive_ids.end());
    std::vector<std::string> controls(result.catalog.control_ids.begin(),
                                      result.catalog.control_ids.end());
    if (config.cohort_cap > 0) {
        const std::size_t per_class = config.cohort_cap / 2;
        std::mt19937_64 rng(config.seed);
        std::shuffle(positives.begin(), positives.end(), rng);
        std::shuffle(controls.begin(), controls.end(), rng);
        if (positives.size() > per_class) positives.resize(per_class);
        if (controls.size() > config.cohort_cap - positives.size())
            controls.resize(config.cohort_cap - positives.size());
    }

    std::vector<std::string> ids;
    ids.insert(ids.end(), positives.begin(), positives.end());
    ids.insert(ids.end(), controls.begin(), controls.end());
    std::sort(ids.begin(), ids.end());

    std::vector<EcgRecord> records;
    records.reserve(ids.size());
    for (const auto& id : ids) {
        const RecordMeta* meta = result.catalog.find(id);
        auto path = resolve_record_path(config.dataset_root, *meta, config.sampling_rate);
        EcgRecord record = wfdb::read_record(path);
        record.record_id = id; // keep the catalog id, not the file stem
        if (std::lround(record.sampling_rate) != config.sampling_rate)
            throw FormatError("record " + id + ": sampling rate " +
                              std::to_string(record.sampling_rate) + ", expected " +
                              std::to_string(config.sampling_rate));
        records.push_back(std::move(record));
    }
    if (records.empty()) throw EmptyCohort("no records could be loaded");

    BuiltDataset& data = result.data;
    data.sampling_rate = config.sampling_rate;
    data.samples_per_lead = static_cast<std::uint32_t>(records.front().samples_per_lead());
    data.include_demographics = config.include_demographics;
    data.split = split(std::span<const std::string>(ids), config.fraction, config.seed);

    if (config.paper_faithful) {
        data.stats = compute_norm_stats(records);
    } else {
        std::vector<EcgRecord> train_records;
        for (const auto& id : data.split.train_ids) {
            auto it = std::find_if(records.begin(), records.end(),
                                   [&](const EcgRecord& r) { return r.record_id == id; });
            train_records.push_back(*it);
        }
        data.stats = compute_norm_stats(train_records);
    }
    data.examples = make_examples(records, result.catalog, data.stats,
                                  config.include_demographics);
    return result;
}

std::filesystem::path resolve_record_path(const std::filesystem::path& root,
                                          const RecordMeta& meta, int sampling_rate) {
    const std::string& column = sampling_rate == 500 ? meta.filename_hr : meta.filename_lr;
    if (!column.empty()) return root / (column + ".hea");

    // PTB-XL convention: records100/01000/01234_lr.hea, ids zero-padded to 5.
    long id = 0;
    try {
        id = std::stol(meta.record_id);
    } catch (const std::exception&) {
        throw IoError("record " + meta.record_id + ": no filename column and id is not numeric");
    }
    auto padded = [](long v) {
        std::string s = std::to_string(v);
        return s.size() < 5 ? std::string(5 - s.size(), '0') + s : s;
    };
    const char* dir = sampling_rate == 500 ? "records500" : "records100";
    const char* suffix = sampling_rate == 500 ? "_hr" : "_lr";
    return root / dir / padded((id / 1000) * 1000) / (padded(id) + suffix + ".hea");
}

Evaluation evaluate_examples(const MlpModel& model,
                             std::span<const LabeledExample* const> examples) {
    if (examples.empty()) throw EmptyInput("evaluate_examples: no examples");
    Evaluation eval;
    std::vector<int> predictions;
    for (const auto* ex : examples) {
        Screening s = predict(model, ex->input);
        eval.scores.push_back(s.probability);
        eval.labels.push_back(ex->label);
        predictions.push_back(s.positive ? 1 : 0);
    }
    eval.report.accuracy = accuracy(predictions, eval.labels);
    eval.report.confusion = confusion_counts(predictions, eval.labels);
    eval.report.f1 = f1_score(eval.report.confusion);
    RocResult roc = roc_auc(eval.scores, eval.labels);
    eval.report.roc_points = std::move(roc.points);
    eval.report.auc = roc.auc;
    return eval;
}

} // namespace ecgscreen
