#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ecgscreen {

inline constexpr int kNumLeads = 12;

/// Standard 12-lead order used throughout: limb leads, augmented leads,
/// then the precordial leads.
inline constexpr std::array<std::string_view, kNumLeads> kLeadNames = {
    "I", "II", "III", "aVR", "aVL", "aVF",
    "V1", "V2", "V3", "V4", "V5", "V6",
};

/// Case-insensitive lookup of a lead name ("AVR" and "aVR" both match).
/// Returns -1 for unknown names.
int lead_index(std::string_view name);

/// A calibrated 12-lead recording. Samples are in millivolts, one row per
/// lead in kLeadNames order, all rows the same length.
struct EcgRecord {
    std::string record_id;
    double sampling_rate = 0.0; // Hz
    std::vector<std::vector<double>> leads;

    std::size_t samples_per_lead() const {
        return leads.empty() ? 0 : leads.front().size();
    }

    /// Throws ShapeError / CalibrationError if the invariants do not hold:
    /// exactly 12 equal-length rows, every value finite.
    void validate() const;
};

} // namespace ecgscreen
