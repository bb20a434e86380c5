#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecgscreen/metadata.hpp"
#include "ecgscreen/record.hpp"

namespace ecgscreen {

/// One training example: the row-major flattening of the normalized 12xN
/// matrix, optionally followed by encoded demographics. label is 1 when the
/// record carries RVH or RAO/RAE; the sub-labels say which.
struct LabeledExample {
    std::string record_id;
    std::vector<double> input;
    int label = 0;
    bool rvh = false;
    bool rae = false;
};

struct DatasetSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    double fraction = 0.75;
    std::uint64_t seed = 0;
};

/// Per-lead mean and population standard deviation, computed from the
/// training split only.
struct NormStats {
    std::array<double, kNumLeads> mean{};
    std::array<double, kNumLeads> stddev{};
};

/// Number of input slots appended per example when demographics are
/// included: age, height, weight each contribute (scaled value, presence
/// flag); sex contributes one signed slot.
inline constexpr std::size_t kDemographicSlots = 7;

NormStats compute_norm_stats(std::span<const EcgRecord> train_records);

/// Same statistics computed from already-flattened example inputs, whose
/// first 12 * samples_per_lead slots hold the leads row-major.
NormStats compute_norm_stats(std::span<const LabeledExample* const> examples,
                             std::size_t samples_per_lead);

/// (x - mean) / std per lead; leads with zero std map to all zeros.
std::vector<std::vector<double>> normalize(const EcgRecord& record, const NormStats& stats);

/// In-place normalization of a flattened example's lead slots.
void normalize_flat(LabeledExample& example, const NormStats& stats,
                    std::size_t samples_per_lead);

/// Flattens normalized records into LabeledExamples. Every record id must
/// resolve in the catalog; all records must share one sample count.
std::vector<LabeledExample> make_examples(std::span<const EcgRecord> records,
                                          const CohortCatalog& catalog,
                                          const NormStats& stats,
                                          bool include_demographics);

/// Seeded uniform shuffle then cut; |train| = round(fraction * n).
DatasetSplit split(std::span<const std::string> ids, double fraction, std::uint64_t seed);
DatasetSplit split(std::span<const LabeledExample> examples, double fraction, std::uint64_t seed);

/// Everything the downstream stages need, and exactly what the cache file
/// stores: normalized examples, the split, and the preprocessing context
/// required to apply the same transform to new records.
struct BuiltDataset {
    std::vector<LabeledExample> examples;
    DatasetSplit split;
    NormStats stats;
    double sampling_rate = 0.0;
    std::uint32_t samples_per_lead = 0;
    bool include_demographics = false;

    std::vector<const LabeledExample*> subset(std::span<const std::string> ids) const;
};

/// Binary cache, format documented in docs/formats.md. Writes are atomic
/// (temp file + rename). Reading verifies magic, version and checksum.
void cache_write(const BuiltDataset& dataset, const std::filesystem::path& path);
BuiltDataset cache_read(const std::filesystem::path& path);

inline constexpr std::uint16_t kCacheVersion = 1;

} // namespace ecgscreen
