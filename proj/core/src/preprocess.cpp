#include "ecgscreen/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ecgscreen/errors.hpp"
#include "internal/binio.hpp"
#include "internal/fsio.hpp"

namespace ecgscreen {

NormStats compute_norm_stats(std::span<const EcgRecord> train_records) {
    if (train_records.empty()) throw EmptyDataset("cannot compute normalization stats: no records");
    for (const auto& record : train_records) record.validate();

    NormStats stats;
    for (int l = 0; l < kNumLeads; ++l) {
        // Two-pass mean/variance over the concatenated samples of the lead.
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& record : train_records) {
            for (double v : record.leads[l]) sum += v;
            n += record.leads[l].size();
        }
        double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (const auto& record : train_records) {
            for (double v : record.leads[l]) sq += (v - mean) * (v - mean);
        }
        stats.mean[l] = mean;
        stats.stddev[l] = std::sqrt(sq / static_cast<double>(n));
    }
    return stats;
}

NormStats compute_norm_stats(std::span<const LabeledExample* const> examples,
                             std::size_t samples_per_lead) {
    if (examples.empty()) throw EmptyDataset("cannot compute normalization stats: no examples");
    NormStats stats;
    for (int l = 0; l < kNumLeads; ++l) {
        const std::size_t offset = static_cast<std::size_t>(l) * samples_per_lead;
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto* ex : examples) {
            if (ex->input.size() < offset + samples_per_lead)
                throw ShapeError("example " + ex->record_id + ": input too short for lead layout");
            for (std::size_t s = 0; s < samples_per_lead; ++s) sum += ex->input[offset + s];
            n += samples_per_lead;
        }
        double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (const auto* ex : examples)
            for (std::size_t s = 0; s < samples_per_lead; ++s) {
                double d = ex->input[offset + s] - mean;
                sq += d * d;
            }
        stats.mean[l] = mean;
        stats.stddev[l] = std::sqrt(sq / static_cast<double>(n));
    }
    return stats;
}

void normalize_flat(LabeledExample& example, const NormStats& stats,
                    std::size_t samples_per_lead) {
    for (int l = 0; l < kNumLeads; ++l) {
        const std::size_t offset = static_cast<std::size_t>(l) * samples_per_lead;
        for (std::size_t s = 0; s < samples_per_lead; ++s) {
            double& v = example.input[offset + s];
            v = stats.stddev[l] == 0.0 ? 0.0 : (v - stats.mean[l]) / stats.stddev[l];
        }
    }
}

std::vector<std::vector<double>> normalize(const EcgRecord& record, const NormStats& stats) {
    std::vector<std::vector<double>> out(kNumLeads);
    for (int l = 0; l < kNumLeads; ++l) {
        out[l].resize(record.leads[l].size());
        if (stats.stddev[l] == 0.0) continue; // zero-std guard: all zeros
        for (std::size_t s = 0; s < record.leads[l].size(); ++s)
            out[l][s] = (record.leads[l][s] - stats.mean[l]) / stats.stddev[l];
    }
    return out;
}

namespace {

void append_demographics(std::vector<double>& input, const RecordMeta& meta) {
    // Scaled value + presence flag per numeric field; sex as one signed slot.
    input.push_back(meta.age ? *meta.age / 100.0 : 0.0);
    input.push_back(meta.age ? 1.0 : 0.0);
    input.push_back(meta.sex == Sex::Male ? -1.0 : meta.sex == Sex::Female ? 1.0 : 0.0);
    input.push_back(meta.height ? *meta.height / 200.0 : 0.0);
    input.push_back(meta.height ? 1.0 : 0.0);
    input.push_back(meta.weight ? *meta.weight / 150.0 : 0.0);
    input.push_back(meta.weight ? 1.0 : 0.0);
}

} // namespace

std::vector<LabeledExample> make_examples(std::span<const EcgRecord> records,
                                          const CohortCatalog& catalog,
                                          const NormStats& stats,
                                          bool include_demographics) {
    std::vector<LabeledExample> examples;
    examples.reserve(records.size());
    std::size_t expected_samples = 0;

    for (const auto& record : records) {
        if (expected_samples == 0) expected_samples = record.samples_per_lead();
        if (record.samples_per_lead() != expected_samples)
            throw ShapeError("record " + record.record_id + " has " +
                             std::to_string(record.samples_per_lead()) + " samples per lead, expected " +
                             std::to_string(expected_samples));

        const RecordMeta* meta = catalog.find(record.record_id);
        if (!meta) throw ShapeError("record " + record.record_id + " is not in the catalog");

        LabeledExample ex;
        ex.record_id = record.record_id;
        auto normalized = normalize(record, stats);
        ex.input.reserve(kNumLeads * expected_samples +
                         (include_demographics ? kDemographicSlots : 0));
        for (const auto& lead : normalized)
            ex.input.insert(ex.input.end(), lead.begin(), lead.end());
        if (include_demographics) append_demographics(ex.input, *meta);

        ex.rvh = code_positive(*meta, "RVH", catalog.likelihood_threshold);
        ex.rae = code_positive(*meta, "RAO/RAE", catalog.likelihood_threshold);
        ex.label = catalog.positive_ids.count(record.record_id) ? 1 : 0;
        examples.push_back(std::move(ex));
    }
    return examples;
}

DatasetSplit split(std::span<const std::string> ids, double fraction, std::uint64_t seed) {
    if (ids.size() < 2) throw TooFewExamples("need at least 2 examples to split");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split fraction must be in (0,1)");

    std::vector<std::string> shuffled(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    auto n_train = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(shuffled.size())));
    if (n_train > shuffled.size()) n_train = shuffled.size();

    DatasetSplit result;
    result.fraction = fraction;
    result.seed = seed;
    result.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
    result.test_ids.assign(shuffled.begin() + n_train, shuffled.end());
    return result;
}

DatasetSplit split(std::span<const LabeledExample> examples, double fraction, std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(examples.size());
    for (const auto& ex : examples) ids.push_back(ex.record_id);
    return split(ids, fraction, seed);
}

std::vector<const LabeledExample*> BuiltDataset::subset(std::span<const std::string> ids) const {
    std::vector<const LabeledExample*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = std::find_if(examples.begin(), examples.end(),
                               [&](const LabeledExample& ex) { return ex.record_id == id; });
        if (it == examples.end()) throw ShapeError("split id not found in dataset: " + id);
        out.push_back(&*it);
    }
    return out;
}

namespace {

constexpr char kCacheMagic[4] = {'E', 'C', 'G', 'P'};

} // namespace

void cache_write(const BuiltDataset& dataset, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kCacheMagic, kCacheMagic + 4);
    binio::put_u16(bytes, kCacheVersion);
    binio::put_u32(bytes, static_cast<std::uint32_t>(dataset.examples.size()));

    const std::uint32_t input_len =
        dataset.examples.empty() ? 0 : static_cast<std::uint32_t>(dataset.examples[0].input.size());
    binio::put_u32(bytes, input_len);
    binio::put_f64(bytes, dataset.sampling_rate);
    binio::put_u32(bytes, dataset.samples_per_lead);
    bytes.push_back(dataset.include_demographics ? 1 : 0);
    for (double m : dataset.stats.mean) binio::put_f64(bytes, m);
    for (double s : dataset.stats.stddev) binio::put_f64(bytes, s);

    for (const auto& ex : dataset.examples) {
        if (ex.input.size() != input_len)
            throw ShapeError("cache_write: inconsistent input length for " + ex.record_id);
        binio::put_string(bytes, ex.record_id);
        bytes.push_back(static_cast<std::uint8_t>(ex.label));
        bytes.push_back(ex.rvh ? 1 : 0);
        bytes.push_back(ex.rae ? 1 : 0);
        for (double v : ex.input) binio::put_f64(bytes, v);
    }

    binio::put_f64(bytes, dataset.split.fraction);
    binio::put_u64(bytes, dataset.split.seed);
    binio::put_u32(bytes, static_cast<std::uint32_t>(dataset.split.train_ids.size()));
    for (const auto& id : dataset.split.train_ids) binio::put_string(bytes, id);
    binio::put_u32(bytes, static_cast<std::uint32_t>(dataset.split.test_ids.size()));
    for (const auto& id : dataset.split.test_ids) binio::put_string(bytes, id);

    binio::put_u64(bytes, binio::fnv1a64(bytes));
    fsio::write_file_atomic(path, bytes);
}

BuiltDataset cache_read(const std::filesystem::path& path) {
    auto bytes = fsio::read_file(path);
    if (bytes.size() < 4 + 2 + 8) throw CorruptCache(path.string() + ": file too small");
    if (!std::equal(kCacheMagic, kCacheMagic + 4, bytes.begin()))
        throw CorruptCache(path.string() + ": bad magic");

    std::uint16_t version =
        static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
    if (version != kCacheVersion)
        throw VersionError(path.string() + ": cache version " + std::to_string(version) +
                           ", supported " + std::to_string(kCacheVersion));

    std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 8);
    binio::Reader tail(std::span<const std::uint8_t>(bytes.data() + bytes.size() - 8, 8),
                       path.string() + ": truncated checksum");
    if (tail.u64() != binio::fnv1a64(body))
        throw CorruptCache(path.string() + ": checksum mismatch");

    binio::Reader reader(body, path.string() + ": truncated payload");
    reader.u32(); // magic, already checked
    reader.u16(); // version, already checked

    BuiltDataset dataset;
    std::uint32_t count = reader.u32();
    std::uint32_t input_len = reader.u32();
    dataset.sampling_rate = reader.f64();
    dataset.samples_per_lead = reader.u32();
    dataset.include_demographics = reader.u8() != 0;
    for (int l = 0; l < kNumLeads; ++l) dataset.stats.mean[l] = reader.f64();
    for (int l = 0; l < kNumLeads; ++l) dataset.stats.stddev[l] = reader.f64();

    dataset.examples.resize(count);
    for (auto& ex : dataset.examples) {
        ex.record_id = reader.string();
        ex.label = reader.u8();
        ex.rvh = reader.u8() != 0;
        ex.rae = reader.u8() != 0;
        ex.input.resize(input_len);
        for (auto& v : ex.input) v = reader.f64();
    }

    dataset.split.fraction = reader.f64();
    dataset.split.seed = reader.u64();
    dataset.split.train_ids.resize(reader.u32());
    for (auto& id : dataset.split.train_ids) id = reader.string();
    dataset.split.test_ids.resize(reader.u32());
    for (auto& id : dataset.split.test_ids) id = reader.string();

    if (reader.remaining() != 0) throw CorruptCache(path.string() + ": trailing bytes in payload");
    return dataset;
}

} // namespace ecgscreen
