#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ecgscreen/record.hpp"

namespace ecgscreen {

/// Per-record beat measurements, aggregated as medians across beats.
struct FiducialSet {
    std::vector<std::size_t> r_peak_indices;
    double r_amp_v1 = 0.0;       // mV, max positive deflection from baseline
    double s_amp_v1 = 0.0;       // mV, magnitude of the first negative deflection after R
    double qrs_duration_ms = 0.0;
    std::optional<double> frontal_axis_deg; // (-180, +180]; empty when below the magnitude floor
    double p_amp_ii = 0.0;       // mV, from the 200-60 ms pre-QRS window in lead II
};

/// Standard ECG criteria constants. The defaults encode the usual textbook
/// numbers; all are configurable.
struct CriteriaThresholds {
    double tall_r_v1_mv = 0.7;    // R in V1 at least this tall
    double right_axis_deg = 90.0; // axis strictly beyond = right axis deviation
    double narrow_qrs_ms = 120.0; // QRS strictly under = narrow
    double p_pulmonale_mv = 0.25; // P in II at least this tall = RAE
};

struct CriteriaResult {
    bool right_axis_deviation = false;
    bool tall_narrow_r_v1 = false;
    bool r_gt_s_v1 = false;
    bool rae_flag = false;
    bool rvh_positive = false; // any of the three RVH flags
    bool axis_undefined = false; // warning: axis below floor, RAD reported false
};

/// Minimum net QRS magnitude sqrt(I^2 + aVF^2), in mV*ms, below which the
/// frontal axis is undefined.
inline constexpr double kAxisMagnitudeFloor = 2.0;

/// Band-pass / differentiate / square / integrate detector with an adaptive
/// threshold and a 200 ms refractory window. Needs at least 2 s of signal.
std::vector<std::size_t> detect_r_peaks(std::span<const double> lead_signal,
                                        double sampling_rate);

/// Measures R/S amplitude and QRS duration in V1, P amplitude in II, and
/// the frontal axis from net QRS areas in I and aVF. Throws NoBeats when
/// r_peaks is empty or no beat fits its measurement windows.
FiducialSet measure_beats(const EcgRecord& record, std::span<const std::size_t> r_peaks);

/// atan2(aVF, I) in degrees, range (-180, +180]. Inputs in mV*ms. Throws
/// AxisUndefined below the magnitude floor.
double frontal_axis(double net_qrs_i, double net_qrs_avf,
                    double magnitude_floor = kAxisMagnitudeFloor);

CriteriaResult evaluate_criteria(const FiducialSet& fiducials,
                                 const CriteriaThresholds& thresholds = {});

/// Detection + measurement in one call: picks the detection lead (largest
/// peak-to-peak among II, V1, I), falls back to the others if it finds no
/// beats.
FiducialSet extract_fiducials(const EcgRecord& record);

} // namespace ecgscreen
