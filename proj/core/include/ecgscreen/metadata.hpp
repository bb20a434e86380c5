#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ecgscreen {

enum class Sex { Male, Female, Unknown };

/// One metadata row: demographics plus the diagnostic-code map. Likelihoods
/// are 0..100; a likelihood of 0 means the code was stated without
/// quantification and counts as present.
struct RecordMeta {
    std::string record_id;
    std::optional<double> age;    // years
    Sex sex = Sex::Unknown;
    std::optional<double> height; // cm
    std::optional<double> weight; // kg
    std::map<std::string, double> scp_codes;
    std::string filename_lr; // relative record path at 100 Hz, may be empty
    std::string filename_hr; // relative record path at 500 Hz, may be empty
};

inline constexpr double kDefaultLikelihoodThreshold = 50.0;

/// Default PH-surrogate codes: right ventricular hypertrophy and right
/// atrial overload/enlargement.
const std::set<std::string>& default_positive_codes();

/// True when `code` is attached to the record with likelihood >= threshold,
/// or with likelihood 0 (stated but unquantified).
bool code_positive(const RecordMeta& meta, const std::string& code, double threshold);

enum class ControlPolicy {
    NormMatched, // NORM-only records, seeded sample matched to positive count
    NormAll,     // every eligible NORM-only record
};

struct CohortCatalog {
    std::vector<RecordMeta> entries;
    std::set<std::string> positive_ids;
    std::set<std::string> control_ids;
    std::set<std::string> positive_codes;
    double likelihood_threshold = kDefaultLikelihoodThreshold;

    const RecordMeta* find(const std::string& record_id) const;
};

struct MetadataOptions {
    /// When true, rows whose code map fails to parse are skipped instead of
    /// raising RowError.
    bool lenient = false;
};

/// Parses a PTB-XL style metadata file. Required columns: a record id
/// (ecg_id or record_id), age, sex, height, weight, scp_codes. Missing
/// numeric fields become absent values, never zero.
std::vector<RecordMeta> load_metadata(std::string_view csv_text, MetadataOptions options = {});

/// Parses a code-description table (scp_statements.csv): first column is the
/// code, and a `description` column when present supplies the text.
std::map<std::string, std::string> load_code_descriptions(std::string_view csv_text);

/// Selects the study cohort: positives are records carrying any positive
/// code per `code_positive`; controls follow the policy. Deterministic for a
/// fixed seed. Throws EmptyCohort when no positives match.
CohortCatalog select_cohort(const std::vector<RecordMeta>& meta,
                            const std::set<std::string>& positive_codes,
                            double likelihood_threshold,
                            ControlPolicy control_policy,
                            std::uint64_t seed);

/// select_cohort with the default codes, threshold and matched-NORM policy.
CohortCatalog select_cohort(const std::vector<RecordMeta>& meta, std::uint64_t seed);

} // namespace ecgscreen
