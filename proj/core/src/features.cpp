#include "ecgscreen/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecgscreen/errors.hpp"

namespace ecgscreen {

namespace {

// Measurement windows relative to the R peak, in seconds.
constexpr double kBaselineFrom = -0.13; // PR segment window for the isoelectric level
constexpr double kBaselineTo = -0.09;
constexpr double kRWindow = 0.06;       // R searched within +/- this
constexpr double kSWindow = 0.12;       // S searched forward within this
constexpr double kPWindowFrom = -0.20;  // P searched in the 200-60 ms pre-QRS window
constexpr double kPWindowTo = -0.06;
constexpr double kAxisWindow = 0.10;    // net QRS area integrated within +/- this
constexpr double kRefractory = 0.20;    // minimum R-R separation
constexpr double kQrsLevelFraction = 0.1; // onset/offset crossing level vs peak deflection
constexpr double kQrsLevelFloorMv = 0.02;

// Centered moving average with an odd window; edges shrink the window.
std::vector<double> moving_average(std::span<const double> x, std::size_t half) {
    std::vector<double> out(x.size());
    if (x.empty()) return out;
    // Prefix sums keep this O(n).
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t lo = i >= half ? i - half : 0;
        std::size_t hi = std::min(x.size() - 1, i + half);
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2) return values[mid];
    return (values[mid - 1] + values[mid]) / 2.0;
}

std::size_t half_window(double seconds, double fs) {
    return static_cast<std::size_t>(std::max(1.0, std::round(seconds * fs / 2.0)));
}

long to_samples(double seconds, double fs) {
    return static_cast<long>(std::round(seconds * fs));
}

} // namespace

std::vector<std::size_t> detect_r_peaks(std::span<const double> lead_signal,
                                        double sampling_rate) {
    const double fs = sampling_rate;
    if (static_cast<double>(lead_signal.size()) < 2.0 * fs)
        throw TooShort("detect_r_peaks: need at least 2 s of signal");

    // Band-pass: remove the slow baseline, then smooth.
    auto baseline = moving_average(lead_signal, half_window(0.6, fs));
    std::vector<double> detrended(lead_signal.size());
    for (std::size_t i = 0; i < lead_signal.size(); ++i)
        detrended[i] = lead_signal[i] - baseline[i];
    auto filtered = moving_average(detrended, half_window(0.03, fs));

    // Differentiate, square, integrate.
    std::vector<double> energy(filtered.size(), 0.0);
    for (std::size_t i = 1; i + 1 < filtered.size(); ++i) {
        double d = (filtered[i + 1] - filtered[i - 1]) * fs / 2.0;
        energy[i] = d * d;
    }
    auto integrated = moving_average(energy, half_window(0.15, fs));

    // Adaptive threshold seeded from the first two seconds.
    const std::size_t warmup = static_cast<std::size_t>(2.0 * fs);
    double spk = 0.0, npk = 0.0;
    for (std::size_t i = 0; i < warmup; ++i) {
        spk = std::max(spk, integrated[i]);
        npk += integrated[i];
    }
    npk /= static_cast<double>(warmup);
    double threshold = npk + 0.25 * (spk - npk);

    const std::size_t refractory = static_cast<std::size_t>(kRefractory * fs);
    const std::size_t refine = static_cast<std::size_t>(0.10 * fs);

    std::vector<std::size_t> peaks;
    long last_accepted = -static_cast<long>(lead_signal.size());
    for (std::size_t i = 1; i + 1 < integrated.size(); ++i) {
        if (!(integrated[i] > integrated[i - 1] && integrated[i] >= integrated[i + 1])) continue;
        if (integrated[i] > threshold && integrated[i] > 0.0) {
            if (static_cast<long>(i) - last_accepted >= static_cast<long>(refractory)) {
                // Localize the R peak on the band-passed signal.
                std::size_t lo = i >= refine ? i - refine : 0;
                std::size_t hi = std::min(lead_signal.size() - 1, i + refine);
                std::size_t best = lo;
                for (std::size_t j = lo; j <= hi; ++j)
                    if (std::abs(filtered[j]) > std::abs(filtered[best])) best = j;
                peaks.push_back(best);
                last_accepted = static_cast<long>(i);
                spk = 0.125 * integrated[i] + 0.875 * spk;
            }
        } else {
            npk = 0.125 * integrated[i] + 0.875 * npk;
        }
        threshold = npk + 0.25 * (spk - npk);
    }

    // Refinement can reorder or collide nearby candidates; keep the first of
    // any pair closer than the refractory window.
    std::sort(peaks.begin(), peaks.end());
    std::vector<std::size_t> result;
    for (std::size_t p : peaks) {
        if (result.empty() || p - result.back() >= refractory) result.push_back(p);
    }
    return result;
}

namespace {

struct BeatMeasurement {
    double r_amp = 0.0;
    double s_amp = 0.0;
    double qrs_ms = 0.0;
    double area_i = 0.0;   // mV*ms
    double area_avf = 0.0; // mV*ms
    double p_amp = 0.0;
};

double window_median(std::span<const double> x, long from, long to) {
    std::vector<double> values;
    for (long i = from; i <= to; ++i) values.push_back(x[static_cast<std::size_t>(i)]);
    return median(std::move(values));
}

bool measure_one_beat(const EcgRecord& record, std::size_t r_index, BeatMeasurement& out) {
    const double fs = record.sampling_rate;
    const long r = static_cast<long>(r_index);
    const long n = static_cast<long>(record.samples_per_lead());

    const long base_from = r + to_samples(kBaselineFrom, fs);
    const long base_to = r + to_samples(kBaselineTo, fs);
    const long p_from = r + to_samples(kPWindowFrom, fs);
    const long r_from = r - to_samples(kRWindow, fs);
    const long r_to = r + to_samples(kRWindow, fs);
    const long s_to = r + to_samples(kRWindow + kSWindow, fs);
    const long axis_from = r - to_samples(kAxisWindow, fs);
    const long axis_to = r + to_samples(kAxisWindow, fs);
    if (p_from < 0 || axis_from < 0 || s_to >= n || axis_to >= n) return false;

    const auto& v1 = record.leads[lead_index("V1")];
    const auto& ii = record.leads[lead_index("II")];
    const auto& lead_i = record.leads[lead_index("I")];
    const auto& avf = record.leads[lead_index("aVF")];

    const double base_v1 = window_median(v1, base_from, base_to);
    const double base_ii = window_median(ii, base_from, base_to);
    const double base_i = window_median(lead_i, base_from, base_to);
    const double base_avf = window_median(avf, base_from, base_to);

    // R: max positive deflection from the isoelectric level in +/-60 ms.
    long r_pos = r_from;
    for (long i = r_from; i <= r_to; ++i)
        if (v1[i] > v1[r_pos]) r_pos = i;
    out.r_amp = std::max(0.0, v1[r_pos] - base_v1);

    // S: first local minimum below baseline after the R peak; fall back to
    // the window minimum if the trough sits at the search edge.
    long s_pos = -1;
    for (long i = r_pos + 1; i <= s_to && i + 1 < n; ++i) {
        if (v1[i] < base_v1 && v1[i] <= v1[i - 1] && v1[i] <= v1[i + 1]) {
            s_pos = i;
            break;
        }
    }
    if (s_pos < 0) {
        long min_pos = r_pos;
        for (long i = r_pos + 1; i <= s_to; ++i)
            if (v1[i] < v1[min_pos]) min_pos = i;
        if (v1[min_pos] < base_v1) s_pos = min_pos;
    }
    out.s_amp = s_pos >= 0 ? base_v1 - v1[s_pos] : 0.0;

    // QRS bounds: walk out from the peaks until the deflection falls under
    // a fraction of the larger wave.
    const double level = std::max(kQrsLevelFloorMv,
                                  kQrsLevelFraction * std::max(out.r_amp, out.s_amp));
    long onset = r_pos;
    while (onset > std::max(0L, r - to_samples(0.15, fs)) &&
           std::abs(v1[onset - 1] - base_v1) >= level)
        --onset;
    long offset = s_pos >= 0 ? s_pos : r_pos;
    while (offset + 1 < n && offset + 1 <= s_to &&
           std::abs(v1[offset + 1] - base_v1) >= level)
        ++offset;
    out.qrs_ms = std::max(1.0, static_cast<double>(offset - onset)) * 1000.0 / fs;

    // P: tallest deflection in the 200-60 ms pre-QRS window of lead II.
    double p_max = 0.0;
    for (long i = p_from; i <= r + to_samples(kPWindowTo, fs); ++i)
        p_max = std::max(p_max, ii[i] - base_ii);
    out.p_amp = p_max;

    // Net QRS areas in I and aVF, in mV*ms.
    double sum_i = 0.0, sum_avf = 0.0;
    for (long i = axis_from; i <= axis_to; ++i) {
        sum_i += lead_i[i] - base_i;
        sum_avf += avf[i] - base_avf;
    }
    out.area_i = sum_i * 1000.0 / fs;
    out.area_avf = sum_avf * 1000.0 / fs;
    return true;
}

} // namespace

FiducialSet measure_beats(const EcgRecord& record, std::span<const std::size_t> r_peaks) {
    record.validate();
    if (r_peaks.empty()) throw NoBeats("measure_beats: no detected beats");

    std::vector<double> r_amps, s_amps, qrs, p_amps, areas_i, areas_avf;
    FiducialSet result;
    for (std::size_t r : r_peaks) {
        BeatMeasurement m;
        if (!measure_one_beat(record, r, m)) continue; // windows clipped at the edges
        result.r_peak_indices.push_back(r);
        r_amps.push_back(m.r_amp);
        s_amps.push_back(m.s_amp);
        qrs.push_back(m.qrs_ms);
        p_amps.push_back(m.p_amp);
        areas_i.push_back(m.area_i);
        areas_avf.push_back(m.area_avf);
    }
    if (result.r_peak_indices.empty())
        throw NoBeats("measure_beats: no beat fits its measurement windows");

    result.r_amp_v1 = median(r_amps);
    result.s_amp_v1 = median(s_amps);
    result.qrs_duration_ms = median(qrs);
    result.p_amp_ii = median(p_amps);
    try {
        result.frontal_axis_deg = frontal_axis(median(areas_i), median(areas_avf));
    } catch (const AxisUndefined&) {
        result.frontal_axis_deg = std::nullopt;
    }
    return result;
}

double frontal_axis(double net_qrs_i, double net_qrs_avf, double magnitude_floor) {
    if (std::hypot(net_qrs_i, net_qrs_avf) < magnitude_floor)
        throw AxisUndefined("frontal_axis: net QRS magnitude below floor");
    double degrees = std::atan2(net_qrs_avf, net_qrs_i) * 180.0 / std::numbers::pi;
    if (degrees <= -180.0) degrees += 360.0;
    return degrees;
}

CriteriaResult evaluate_criteria(const FiducialSet& fiducials,
                                 const CriteriaThresholds& thresholds) {
    CriteriaResult c;
    if (fiducials.frontal_axis_deg) {
        c.right_axis_deviation = *fiducials.frontal_axis_deg > thresholds.right_axis_deg;
    } else {
        c.axis_undefined = true;
    }
    c.tall_narrow_r_v1 = fiducials.r_amp_v1 >= thresholds.tall_r_v1_mv &&
                         fiducials.qrs_duration_ms < thresholds.narrow_qrs_ms;
    c.r_gt_s_v1 = fiducials.r_amp_v1 > fiducials.s_amp_v1;
    c.rae_flag = fiducials.p_amp_ii >= thresholds.p_pulmonale_mv;
    c.rvh_positive = c.right_axis_deviation || c.tall_narrow_r_v1 || c.r_gt_s_v1;
    return c;
}

FiducialSet extract_fiducials(const EcgRecord& record) {
    record.validate();
    // Prefer the lead with the largest swing among the usual candidates.
    std::vector<int> candidates = {lead_index("II"), lead_index("V1"), lead_index("I")};
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        auto span_of = [&](int l) {
            auto [lo, hi] = std::minmax_element(record.leads[l].begin(), record.leads[l].end());
            return *hi - *lo;
        };
        return span_of(a) > span_of(b);
    });
    for (int lead : candidates) {
        auto peaks = detect_r_peaks(record.leads[lead], record.sampling_rate);
        if (!peaks.empty()) return measure_beats(record, peaks);
    }
    throw NoBeats("extract_fiducials: no beats found in leads II, V1 or I");
}

} // namespace ecgscreen
