#pragma once

// Independent oracles used by both the unit and acceptance suites. Each is
// a second, deliberately naive implementation of something the library
// computes a faster or more structured way.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ecgscreen/features.hpp"
#include "ecgscreen/mlp.hpp"
#include "ecgscreen/synth.hpp"

namespace testsupport {

// --- Central finite differences vs analytic backpropagation --------------

struct GradientCheck {
    double max_rel_error = 0.0;
    std::size_t parameters = 0;
};

// Perturbs every weight and bias by +/-eps and compares the loss slope with
// the analytic gradient. Relative error is |a - n| / max(|a|, |n|, floor).
inline GradientCheck gradient_check(ecgscreen::MlpModel model,
                                    const Eigen::MatrixXd& inputs,
                                    const Eigen::MatrixXd& targets,
                                    double eps = 1e-5) {
    using namespace ecgscreen;
    ForwardCache cache;
    forward(model, inputs, &cache);
    Gradients grads = backward(model, cache, targets);

    GradientCheck result;
    constexpr double kFloor = 1e-8;
    auto probe = [&](double& parameter, double analytic) {
        const double saved = parameter;
        parameter = saved + eps;
        const double up = bce_loss(forward(model, inputs), targets);
        parameter = saved - eps;
        const double down = bce_loss(forward(model, inputs), targets);
        parameter = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), kFloor});
        result.max_rel_error = std::max(result.max_rel_error,
                                        std::abs(analytic - numeric) / scale);
        ++result.parameters;
    };

    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c)
                probe(model.weights[l](r, c), grads.weights[l](r, c));
        for (Eigen::Index r = 0; r < model.biases[l].size(); ++r)
            probe(model.biases[l](r), grads.biases[l](r));
    }
    return result;
}

// Random small network + batch for the gradient oracle.
inline GradientCheck random_gradient_check(std::uint64_t seed) {
    using namespace ecgscreen;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> width(2, 6);
    std::uniform_int_distribution<int> batch_size(1, 6);
    std::uniform_int_distribution<int> depth(1, 2);
    std::uniform_int_distribution<int> outs(1, 2);
    std::normal_distribution<double> value(0.0, 1.0);

    std::vector<std::size_t> sizes{static_cast<std::size_t>(width(rng))};
    for (int d = depth(rng); d > 0; --d) sizes.push_back(static_cast<std::size_t>(width(rng)));
    sizes.push_back(static_cast<std::size_t>(outs(rng)));
    MlpModel model = init_model(sizes, seed);

    const int b = batch_size(rng);
    Eigen::MatrixXd inputs(b, sizes.front());
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
        for (Eigen::Index j = 0; j < inputs.cols(); ++j) inputs(i, j) = value(rng);
    Eigen::MatrixXd targets(b, sizes.back());
    for (Eigen::Index i = 0; i < targets.rows(); ++i)
        for (Eigen::Index j = 0; j < targets.cols(); ++j)
            targets(i, j) = (rng() % 2) ? 1.0 : 0.0;

    return gradient_check(std::move(model), inputs, targets);
}

// --- Brute-force pairwise AUC (Mann-Whitney with half credit for ties) ----

inline double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// --- Criteria-closure grid ------------------------------------------------

// Parameter sets spanning both sides of every criteria threshold by at
// least twice the measurement tolerance (0.05 mV amplitudes, 5 deg axis,
// 15 ms QRS). Wide-QRS variants keep a proportionate S wave so the duration
// measurement stays anchored.
inline std::vector<ecgscreen::SynthParams> closure_grid(std::size_t n, std::uint64_t seed,
                                                        double noise_std) {
    using ecgscreen::SynthParams;
    std::mt19937_64 rng(seed);
    auto jitter = [&](double amount) {
        return std::uniform_real_distribution<double>(-amount, amount)(rng);
    };

    std::vector<SynthParams> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SynthParams p;
        p.heart_rate_bpm = 60.0;
        p.sampling_rate = 100.0;
        p.duration_s = 10.0;
        p.noise_std = noise_std;
        p.seed = seed ^ (0xd1b54a32d192ed03ull + i);
        p.record_id = "grid-" + std::to_string(i);

        switch (i % 6) {
            case 0: // all three RVH criteria plus RAE, comfortably positive
                p.r_amp_v1 = 0.85 + jitter(0.03);
                p.s_amp_v1 = 0.35 + jitter(0.05);
                p.target_axis_deg = 110.0 + jitter(8.0);
                p.qrs_duration_ms = 85.0 + jitter(5.0);
                p.p_amp_ii = 0.38 + jitter(0.02);
                break;
            case 1: // normal: everything on the negative side
                p.r_amp_v1 = 0.35 + jitter(0.05);
                p.s_amp_v1 = 0.80 + jitter(0.08);
                p.target_axis_deg = 40.0 + jitter(15.0);
                p.qrs_duration_ms = 95.0 + jitter(8.0);
                p.p_amp_ii = 0.12 + jitter(0.03);
                break;
            case 2: // wide QRS defeats tall_narrow; R still dominates S
                p.r_amp_v1 = 0.90 + jitter(0.03);
                p.s_amp_v1 = 0.45 + jitter(0.04);
                p.target_axis_deg = 50.0 + jitter(10.0);
                p.qrs_duration_ms = 155.0 + jitter(5.0);
                p.p_amp_ii = 0.12 + jitter(0.02);
                break;
            case 3: // RAE only: P pulmonale with an otherwise normal ECG
                p.r_amp_v1 = 0.30 + jitter(0.04);
                p.s_amp_v1 = 0.70 + jitter(0.05);
                p.target_axis_deg = 30.0 + jitter(10.0);
                p.qrs_duration_ms = 90.0 + jitter(5.0);
                p.p_amp_ii = 0.40 + jitter(0.03);
                break;
            case 4: // right axis deviation alone
                p.r_amp_v1 = 0.30 + jitter(0.04);
                p.s_amp_v1 = 0.75 + jitter(0.05);
                p.target_axis_deg = 115.0 + jitter(10.0);
                p.qrs_duration_ms = 95.0 + jitter(5.0);
                p.p_amp_ii = 0.10 + jitter(0.03);
                break;
            default: // tall narrow R that is still smaller than S
                p.r_amp_v1 = 0.82 + jitter(0.03);
                p.s_amp_v1 = 0.98 + jitter(0.04);
                p.target_axis_deg = 60.0 + jitter(10.0);
                p.qrs_duration_ms = 88.0 + jitter(4.0);
                p.p_amp_ii = 0.10 + jitter(0.02);
                break;
        }
        grid.push_back(p);
    }
    return grid;
}

struct ClosureOutcome {
    std::size_t total = 0;
    std::size_t matched = 0;
};

inline bool flags_equal(const ecgscreen::CriteriaResult& a, const ecgscreen::CriteriaResult& b) {
    return a.right_axis_deviation == b.right_axis_deviation &&
           a.tall_narrow_r_v1 == b.tall_narrow_r_v1 && a.r_gt_s_v1 == b.r_gt_s_v1 &&
           a.rae_flag == b.rae_flag && a.rvh_positive == b.rvh_positive;
}

inline ClosureOutcome run_closure_grid(std::size_t n, std::uint64_t seed, double noise_std) {
    ClosureOutcome outcome;
    for (const auto& params : closure_grid(n, seed, noise_std)) {
        auto [record, intended] = ecgscreen::generate(params);
        ecgscreen::FiducialSet fiducials = ecgscreen::extract_fiducials(record);
        ecgscreen::CriteriaResult measured = ecgscreen::evaluate_criteria(fiducials);
        ++outcome.total;
        if (flags_equal(measured, intended)) ++outcome.matched;
    }
    return outcome;
}

} // namespace testsupport
