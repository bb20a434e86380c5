#include "ecgscreen/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ecgscreen/errors.hpp"

namespace ecgscreen {

namespace {

// Beat geometry in seconds relative to the R center. P and T are kept
// narrow/far enough that the measurement windows in features.cpp see an
// uncontaminated baseline.
constexpr double kPCenter = -0.16;
constexpr double kPSigma = 0.012;
constexpr double kTCenter = 0.28;
constexpr double kTSigma = 0.045;
constexpr double kTAmpLimb = 0.15;
constexpr double kTAmpV1 = 0.10;
constexpr double kFrontalMagnitude = 1.0; // mV, QRS vector length in the frontal plane

double gauss(double t, double center, double sigma) {
    const double d = (t - center) / sigma;
    return std::exp(-0.5 * d * d);
}

struct Bump {
    double amp;
    double center;
    double sigma;
};

// Sum of bump contributions at time t relative to the beat center. Bumps
// further than 0.5 s contribute nothing measurable.
double beat_value(double t, const std::vector<Bump>& bumps) {
    double v = 0.0;
    for (const auto& b : bumps) {
        if (std::abs(t - b.center) > 0.5) continue;
        v += b.amp * gauss(t, b.center, b.sigma);
    }
    return v;
}

void validate(const SynthParams& p) {
    if (p.heart_rate_bpm < 30.0 || p.heart_rate_bpm > 220.0)
        throw ConfigError("synth: heart rate outside [30, 220] bpm");
    if (p.r_amp_v1 < 0 || p.s_amp_v1 < 0 || p.p_amp_ii < 0 || p.noise_std < 0)
        throw ConfigError("synth: amplitudes and noise must be non-negative");
    if (p.qrs_duration_ms <= 0) throw ConfigError("synth: QRS duration must be positive");
    if (p.sampling_rate <= 0 || p.duration_s <= 0)
        throw ConfigError("synth: sampling rate and duration must be positive");
}

} // namespace

std::pair<EcgRecord, CriteriaResult> generate(const SynthParams& params,
                                              const CriteriaThresholds& thresholds) {
    validate(params);

    const double fs = params.sampling_rate;
    const std::size_t n = static_cast<std::size_t>(std::llround(params.duration_s * fs));
    const double rr = 60.0 / params.heart_rate_bpm;
    const double qrs_s = params.qrs_duration_ms / 1000.0;
    const double qrs_sigma = qrs_s / 6.0;
    const double s_center = 0.45 * qrs_s;
    const double axis_rad = params.target_axis_deg * std::numbers::pi / 180.0;

    // Beat centers snapped to the sample grid: (k + 1/2) * RR.
    std::vector<double> beats;
    for (std::size_t k = 0; (static_cast<double>(k) + 0.5) * rr < params.duration_s; ++k)
        beats.push_back(std::round((static_cast<double>(k) + 0.5) * rr * fs) / fs);

    // Limb-lead QRS amplitudes chosen so the derived aVF = II - I/2 carries
    // exactly sin(axis) while I carries cos(axis).
    const double amp_i = kFrontalMagnitude * std::cos(axis_rad);
    const double amp_ii = kFrontalMagnitude * (std::sin(axis_rad) + std::cos(axis_rad) / 2.0);

    const std::vector<Bump> bumps_i = {
        {amp_i, 0.0, qrs_sigma},
        {0.4 * params.p_amp_ii, kPCenter, kPSigma},
        {0.5 * kTAmpLimb, kTCenter, kTSigma},
    };
    const std::vector<Bump> bumps_ii = {
        {amp_ii, 0.0, qrs_sigma},
        {params.p_amp_ii, kPCenter, kPSigma},
        {kTAmpLimb, kTCenter, kTSigma},
    };

    // Precordial progression: V1 carries the planted R/S pair, V6 a
    // left-sided pattern, the rest interpolate.
    std::vector<std::vector<Bump>> bumps_v(6);
    for (int k = 0; k < 6; ++k) {
        const double w = static_cast<double>(k) / 5.0;
        bumps_v[k] = {
            {params.r_amp_v1 * (1.0 - w) + 1.0 * w, 0.0, qrs_sigma},
            {-(params.s_amp_v1 * (1.0 - w) + 0.1 * w), s_center, qrs_sigma},
            {0.3 * params.p_amp_ii, kPCenter, kPSigma},
            {kTAmpV1 * (1.0 - w) + kTAmpLimb * w, kTCenter, kTSigma},
        };
    }

    EcgRecord record;
    record.record_id = params.record_id;
    record.sampling_rate = fs;
    record.leads.assign(kNumLeads, std::vector<double>(n, 0.0));

    auto& lead_i = record.leads[0];
    auto& lead_ii = record.leads[1];
    for (std::size_t s = 0; s < n; ++s) {
        const double t = static_cast<double>(s) / fs;
        for (double beat : beats) {
            const double dt = t - beat;
            if (std::abs(dt) > 0.6) continue;
            lead_i[s] += beat_value(dt, bumps_i);
            lead_ii[s] += beat_value(dt, bumps_ii);
            for (int k = 0; k < 6; ++k)
                record.leads[6 + k][s] += beat_value(dt, bumps_v[k]);
        }
    }

    // Derived limb leads (Einthoven / Goldberger).
    for (std::size_t s = 0; s < n; ++s) {
        const double i = lead_i[s], ii = lead_ii[s];
        record.leads[2][s] = ii - i;              // III
        record.leads[3][s] = -(i + ii) / 2.0;     // aVR
        record.leads[4][s] = i - ii / 2.0;        // aVL
        record.leads[5][s] = ii - i / 2.0;        // aVF
    }

    if (params.noise_std > 0.0) {
        std::mt19937_64 rng(params.seed);
        std::normal_distribution<double> noise(0.0, params.noise_std);
        for (auto& lead : record.leads)
            for (auto& v : lead) v += noise(rng);
    }

    CriteriaResult intended;
    intended.right_axis_deviation = params.target_axis_deg > thresholds.right_axis_deg;
    intended.tall_narrow_r_v1 = params.r_amp_v1 >= thresholds.tall_r_v1_mv &&
                                params.qrs_duration_ms < thresholds.narrow_qrs_ms;
    intended.r_gt_s_v1 = params.r_amp_v1 > params.s_amp_v1;
    intended.rae_flag = params.p_amp_ii >= thresholds.p_pulmonale_mv;
    intended.rvh_positive = intended.right_axis_deviation || intended.tall_narrow_r_v1 ||
                            intended.r_gt_s_v1;
    return {std::move(record), intended};
}

std::vector<double> flatten_record(const EcgRecord& record) {
    std::vector<double> flat;
    flat.reserve(kNumLeads * record.samples_per_lead());
    for (const auto& lead : record.leads) flat.insert(flat.end(), lead.begin(), lead.end());
    return flat;
}

std::vector<SynthCase> generate_cases(std::size_t n, double class_margin, std::uint64_t seed,
                                      double noise_std) {
    if (n < 4) throw ConfigError("generate_cases: need n >= 4");
    if (class_margin <= 0.0) throw ConfigError("generate_cases: margin must be positive");

    const SynthTolerances tol;
    const CriteriaThresholds thr;
    const double amp_margin = class_margin * tol.amplitude_mv;
    const double axis_margin = class_margin * tol.axis_deg;
    const double qrs_margin = class_margin * tol.qrs_ms;

    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    std::vector<SynthCase> cases;
    cases.reserve(n);
    const std::size_t n_pos = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const bool positive = i < n_pos;
        SynthParams p;
        p.seed = seed ^ (0x9e3779b97f4a7c15ull + i);
        p.record_id = "synth-" + std::to_string(i);
        // One heart rate across the set keeps beats at identical sample
        // positions, so the class signal lands on consistent input slots.
        p.heart_rate_bpm = 60.0;
        p.sampling_rate = 100.0;
        p.duration_s = 10.0;
        p.noise_std = noise_std;

        if (positive) {
            // Every RVH criterion clears its threshold by at least the margin.
            p.r_amp_v1 = thr.tall_r_v1_mv + amp_margin + uniform(0.0, 0.35);
            p.s_amp_v1 = std::max(0.05, p.r_amp_v1 - amp_margin - uniform(0.05, 0.3));
            p.target_axis_deg = thr.right_axis_deg + axis_margin + uniform(0.0, 35.0);
            p.qrs_duration_ms = thr.narrow_qrs_ms - qrs_margin - uniform(0.0, 25.0);
            // About half the positives also carry P pulmonale.
            p.p_amp_ii = (i % 2 == 0) ? thr.p_pulmonale_mv + amp_margin + uniform(0.0, 0.1)
                                      : std::max(0.03, thr.p_pulmonale_mv - amp_margin -
                                                           uniform(0.0, 0.08));
        } else {
            // Every criterion stays below threshold by at least the margin;
            // the S wave dominates R as in a normal V1.
            p.r_amp_v1 = std::max(0.12, thr.tall_r_v1_mv - amp_margin - uniform(0.0, 0.25));
            p.s_amp_v1 = p.r_amp_v1 + amp_margin + uniform(0.05, 0.4);
            p.target_axis_deg = thr.right_axis_deg - axis_margin - uniform(0.0, 55.0);
            p.qrs_duration_ms = uniform(80.0, 105.0);
            p.p_amp_ii = std::max(0.02, thr.p_pulmonale_mv - amp_margin - uniform(0.0, 0.1));
        }

        auto [record, intended] = generate(p, thr);
        cases.push_back({p, std::move(record), intended});
    }
    return cases;
}

std::vector<LabeledExample> generate_training_set(std::size_t n, double class_margin,
                                                  std::uint64_t seed, double noise_std) {
    auto cases = generate_cases(n, class_margin, seed, noise_std);
    std::vector<LabeledExample> examples;
    examples.reserve(cases.size());
    for (const auto& c : cases) {
        LabeledExample ex;
        ex.record_id = c.record.record_id;
        ex.input = flatten_record(c.record);
        ex.rvh = c.intended.rvh_positive;
        ex.rae = c.intended.rae_flag;
        ex.label = (ex.rvh || ex.rae) ? 1 : 0;
        examples.push_back(std::move(ex));
    }
    return examples;
}

} // namespace ecgscreen
