#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ecgscreen/features.hpp"
#include "ecgscreen/preprocess.hpp"
#include "ecgscreen/record.hpp"

namespace ecgscreen {

/// Parameters for one synthetic record. The generator plants these values
/// so the feature extractor can be checked against known ground truth.
struct SynthParams {
    double heart_rate_bpm = 60.0;  // [30, 220]
    double r_amp_v1 = 0.5;         // mV
    double s_amp_v1 = 0.8;         // mV, magnitude
    double qrs_duration_ms = 90.0;
    double target_axis_deg = 40.0; // frontal-plane QRS axis
    double p_amp_ii = 0.10;        // mV
    double noise_std = 0.0;        // mV, white noise per lead
    double sampling_rate = 100.0;  // Hz
    double duration_s = 10.0;
    std::uint64_t seed = 0;
    std::string record_id = "synth";
};

/// Builds a 12-lead record from Gaussian P-QRS-T bumps. Beat centers land
/// on the sample grid; leads I and II are synthesized so the net QRS area
/// in (I, aVF) points exactly at target_axis_deg, and III/aVR/aVL/aVF are
/// derived from them. Returns the record together with the flags the
/// parameters imply under the same thresholds evaluate_criteria uses.
std::pair<EcgRecord, CriteriaResult> generate(const SynthParams& params,
                                              const CriteriaThresholds& thresholds = {});

/// Per-quantity measurement tolerances the class margins are expressed in:
/// amplitudes 0.05 mV, axis 5 degrees, QRS duration 15 ms.
struct SynthTolerances {
    double amplitude_mv = 0.05;
    double axis_deg = 5.0;
    double qrs_ms = 15.0;
};

/// Balanced labeled set: n/2 positives whose parameters clear every RVH
/// threshold by >= class_margin tolerances, and n/2 negatives below every
/// threshold by the same margin. Inputs are the raw (un-normalized)
/// row-major flattenings; deterministic per seed.
std::vector<LabeledExample> generate_training_set(std::size_t n, double class_margin,
                                                  std::uint64_t seed,
                                                  double noise_std = 0.0);

/// The record (not yet flattened) together with its intended flags, for
/// callers that need the waveform itself.
struct SynthCase {
    SynthParams params;
    EcgRecord record;
    CriteriaResult intended;
};
std::vector<SynthCase> generate_cases(std::size_t n, double class_margin, std::uint64_t seed,
                                      double noise_std = 0.0);

/// Row-major flattening of a record's leads (no normalization).
std::vector<double> flatten_record(const EcgRecord& record);

} // namespace ecgscreen
