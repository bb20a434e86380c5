#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecgscreen/record.hpp"

namespace ecgscreen::wfdb {

/// Only storage format 16 (16-bit little-endian two's complement,
/// lead-interleaved sample frames) is supported; anything else is rejected.
enum class StorageFormat { Fmt16 };

struct LeadSpec {
    std::string lead_name;
    StorageFormat storage_format = StorageFormat::Fmt16;
    double adc_gain = 0.0; // ADC units per millivolt
    int baseline = 0;      // ADC units at 0 mV
    std::string file_name;
};

struct SignalHeader {
    std::string record_id;
    int num_leads = 0;
    double sampling_rate = 0.0; // Hz
    std::size_t samples_per_lead = 0;
    std::vector<LeadSpec> leads;
};

/// Parses the text of a .hea file. The first line carries
/// "record_name num_leads sampling_rate samples_per_lead"; each following
/// non-comment line describes one lead. '#' lines are ignored.
SignalHeader parse_header(std::string_view text);

/// Decodes raw .dat bytes to ADC integers, one row per header lead, without
/// applying calibration. Throws TruncatedSignal if the byte count does not
/// equal num_leads * samples_per_lead * 2.
std::vector<std::vector<int16_t>> decode_adc(std::span<const std::uint8_t> bytes,
                                             const SignalHeader& header);

/// Applies (adc - baseline) / adc_gain per lead and reorders rows into the
/// standard kLeadNames order. Throws CalibrationError on zero gain and
/// FormatError if the header leads are not exactly the 12 standard names.
EcgRecord calibrate(const std::vector<std::vector<int16_t>>& adc,
                    const SignalHeader& header);

/// decode_adc followed by calibrate.
EcgRecord decode_signal(std::span<const std::uint8_t> bytes, const SignalHeader& header);

/// Encodes ADC rows into the Fmt16 interleaved little-endian layout.
std::vector<std::uint8_t> encode_adc(const std::vector<std::vector<int16_t>>& adc);

/// Reads a record from disk given the path of its .hea file. All leads must
/// live in a single .dat file next to the header.
EcgRecord read_record(const std::filesystem::path& hea_path);

/// Writes record.hea / record.dat into `dir`, quantizing samples with the
/// given gain and baseline. Values are clamped to the int16 range.
void write_record(const EcgRecord& record, const std::filesystem::path& dir,
                  double adc_gain = 1000.0, int baseline = 0);

} // namespace ecgscreen::wfdb
