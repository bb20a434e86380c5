#include "ecgscreen/wfdb.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ecgscreen/errors.hpp"
#include "internal/binio.hpp"
#include "internal/fsio.hpp"

namespace ecgscreen::wfdb {

namespace {

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.emplace_back(line.substr(start, i - start));
    }
    return fields;
}

double parse_number(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw FormatError(std::string("trailing junk in ") + what + ": " + s);
        return v;
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception&) {
        throw FormatError(std::string("cannot parse ") + what + ": " + s);
    }
}

long parse_integer(const std::string& s, const char* what) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError(std::string("cannot parse ") + what + ": " + s);
    return v;
}

// Gain field shapes seen in headers: "1000", "1000.0(0)/mV", "1000/mV".
// The parenthesized value is the baseline; when absent the ADC-zero column
// stands in for it.
struct GainSpec {
    double gain;
    bool has_baseline;
    int baseline;
};

GainSpec parse_gain(const std::string& field) {
    GainSpec spec{0.0, false, 0};
    std::string s = field;
    if (auto slash = s.find('/'); slash != std::string::npos) s = s.substr(0, slash);
    if (auto open = s.find('('); open != std::string::npos) {
        auto close = s.find(')', open);
        if (close == std::string::npos) throw FormatError("unterminated baseline in gain: " + field);
        spec.has_baseline = true;
        spec.baseline = static_cast<int>(parse_integer(s.substr(open + 1, close - open - 1), "baseline"));
        s = s.substr(0, open);
    }
    spec.gain = parse_number(s, "adc gain");
    return spec;
}

} // namespace

SignalHeader parse_header(std::string_view text) {
    std::vector<std::string> lines;
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            std::string_view line = (nl == std::string_view::npos)
                                        ? text.substr(pos)
                                        : text.substr(pos, nl - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            // Skip blank and comment lines.
            bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
            if (!blank && line.front() != '#') lines.emplace_back(line);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
    }
    if (lines.empty()) throw FormatError("empty header");

    auto first = split_ws(lines[0]);
    if (first.size() < 4)
        throw FormatError("malformed record line: expected 'name leads rate samples'");

    SignalHeader header;
    // Record name may carry segment/duration suffixes ("name/n"); keep the stem.
    header.record_id = first[0].substr(0, first[0].find('/'));
    long leads = parse_integer(first[1], "lead count");
    if (leads <= 0) throw FormatError("non-positive lead count");
    header.num_leads = static_cast<int>(leads);
    header.sampling_rate = parse_number(first[2], "sampling rate");
    if (header.sampling_rate <= 0) throw FormatError("non-positive sampling rate");
    long samples = parse_integer(first[3], "sample count");
    if (samples <= 0) throw FormatError("non-positive sample count");
    header.samples_per_lead = static_cast<std::size_t>(samples);

    if (lines.size() - 1 != static_cast<std::size_t>(header.num_leads))
        throw FormatError("declared " + std::to_string(header.num_leads) + " leads but found " +
                          std::to_string(lines.size() - 1) + " signal lines");

    for (int i = 0; i < header.num_leads; ++i) {
        auto fields = split_ws(lines[1 + i]);
        // filename format gain [adcres adczero initval checksum blocksize] description
        if (fields.size() < 3)
            throw FormatError("signal line " + std::to_string(i + 1) + ": too few fields");

        LeadSpec lead;
        lead.file_name = fields[0];

        // The format field may carry xN/:skew/+offset suffixes; none of those
        // are supported, only plain 16.
        const std::string& fmt = fields[1];
        if (fmt != "16")
            throw UnsupportedFormat("storage format '" + fmt + "' (only format 16 is supported)");
        lead.storage_format = StorageFormat::Fmt16;

        GainSpec gain = parse_gain(fields[2]);
        lead.adc_gain = gain.gain;
        if (gain.has_baseline) {
            lead.baseline = gain.baseline;
        } else if (fields.size() >= 5) {
            lead.baseline = static_cast<int>(parse_integer(fields[4], "adc zero"));
        }
        if (lead.adc_gain <= 0)
            throw FormatError("signal line " + std::to_string(i + 1) + ": non-positive adc gain");

        // Description = everything after the 8 numeric columns when present,
        // else the last field.
        if (fields.size() >= 9) {
            std::string name = fields[8];
            for (std::size_t j = 9; j < fields.size(); ++j) name += " " + fields[j];
            lead.lead_name = name;
        } else {
            lead.lead_name = fields.back();
        }
        header.leads.push_back(std::move(lead));
    }
    return header;
}

std::vector<std::vector<int16_t>> decode_adc(std::span<const std::uint8_t> bytes,
                                             const SignalHeader& header) {
    const std::size_t expected =
        static_cast<std::size_t>(header.num_leads) * header.samples_per_lead * 2;
    if (bytes.size() != expected)
        throw TruncatedSignal("record " + header.record_id + ": expected " +
                              std::to_string(expected) + " signal bytes, got " +
                              std::to_string(bytes.size()));
    std::vector<std::vector<int16_t>> adc(header.num_leads,
                                          std::vector<int16_t>(header.samples_per_lead));
    std::size_t pos = 0;
    for (std::size_t s = 0; s < header.samples_per_lead; ++s) {
        for (int l = 0; l < header.num_leads; ++l) {
            std::uint16_t raw =
                static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
            adc[l][s] = static_cast<int16_t>(raw);
            pos += 2;
        }
    }
    return adc;
}

EcgRecord calibrate(const std::vector<std::vector<int16_t>>& adc, const SignalHeader& header) {
    if (header.num_leads != kNumLeads)
        throw FormatError("record " + header.record_id + ": expected 12 leads, header has " +
                          std::to_string(header.num_leads));
    EcgRecord record;
    record.record_id = header.record_id;
    record.sampling_rate = header.sampling_rate;
    record.leads.assign(kNumLeads, {});

    std::array<bool, kNumLeads> seen{};
    for (int l = 0; l < header.num_leads; ++l) {
        const LeadSpec& spec = header.leads[l];
        int idx = lead_index(spec.lead_name);
        if (idx < 0)
            throw FormatError("record " + header.record_id + ": unknown lead name '" +
                              spec.lead_name + "'");
        if (seen[idx])
            throw FormatError("record " + header.record_id + ": duplicate lead '" +
                              spec.lead_name + "'");
        seen[idx] = true;
        if (spec.adc_gain == 0.0)
            throw CalibrationError("record " + header.record_id + ": zero adc gain on lead " +
                                   spec.lead_name);
        std::vector<double> mv(adc[l].size());
        for (std::size_t s = 0; s < adc[l].size(); ++s)
            mv[s] = (static_cast<double>(adc[l][s]) - spec.baseline) / spec.adc_gain;
        record.leads[idx] = std::move(mv);
    }
    record.validate();
    return record;
}

EcgRecord decode_signal(std::span<const std::uint8_t> bytes, const SignalHeader& header) {
    return calibrate(decode_adc(bytes, header), header);
}

std::vector<std::uint8_t> encode_adc(const std::vector<std::vector<int16_t>>& adc) {
    std::vector<std::uint8_t> bytes;
    if (adc.empty()) return bytes;
    const std::size_t samples = adc.front().size();
    bytes.reserve(adc.size() * samples * 2);
    for (std::size_t s = 0; s < samples; ++s)
        for (const auto& lead : adc) binio::put_i16(bytes, lead[s]);
    return bytes;
}

EcgRecord read_record(const std::filesystem::path& hea_path) {
    SignalHeader header = parse_header(fsio::read_text_file(hea_path));
    const std::string& dat_name = header.leads.front().file_name;
    for (const auto& lead : header.leads) {
        if (lead.file_name != dat_name)
            throw UnsupportedFormat("record " + header.record_id +
                                    ": multi-file signals are not supported");
    }
    auto bytes = fsio::read_file(hea_path.parent_path() / dat_name);
    return decode_signal(bytes, header);
}

void write_record(const EcgRecord& record, const std::filesystem::path& dir,
                  double adc_gain, int baseline) {
    record.validate();
    if (adc_gain <= 0) throw CalibrationError("write_record: adc gain must be positive");

    std::vector<std::vector<int16_t>> adc(kNumLeads);
    for (int l = 0; l < kNumLeads; ++l) {
        adc[l].resize(record.leads[l].size());
        for (std::size_t s = 0; s < record.leads[l].size(); ++s) {
            double q = std::round(record.leads[l][s] * adc_gain + baseline);
            q = std::clamp(q, -32768.0, 32767.0);
            adc[l][s] = static_cast<int16_t>(q);
        }
    }

    std::filesystem::create_directories(dir);
    const std::string dat_name = record.record_id + ".dat";

    std::ostringstream hea;
    hea << record.record_id << " " << kNumLeads << " " << record.sampling_rate << " "
        << record.samples_per_lead() << "\n";
    for (int l = 0; l < kNumLeads; ++l) {
        hea << dat_name << " 16 " << adc_gain << "(" << baseline << ")/mV 16 0 " << adc[l][0]
            << " 0 0 " << kLeadNames[l] << "\n";
    }
    fsio::write_text_file(dir / (record.record_id + ".hea"), hea.str());
    fsio::write_file_atomic(dir / dat_name, encode_adc(adc));
}

} // namespace ecgscreen::wfdb
