#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecgscreen/mlp.hpp"

namespace ecgscreen {

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct EvalReport {
    double accuracy = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    std::vector<RocPoint> roc_points;
    Confusion confusion;
};

/// correct / n over hard labels.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

Confusion confusion_counts(std::span<const int> predictions, std::span<const int> labels);

/// 2tp / (2tp + fp + fn); 0 by convention when the denominator is 0.
double f1_score(const Confusion& c);

struct RocResult {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Threshold sweep over the distinct scores (ties grouped), trapezoid AUC.
/// Equals the Mann-Whitney pairwise statistic with ties counted 1/2.
/// Requires both classes present, else UndefinedRoc.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

struct OverfitDiagnosis {
    bool flagged = false;
    double final_gap = 0.0;      // final train_acc - val_acc
    bool gap_exceeded = false;
    bool val_loss_rising = false; // val loss rose over the last quartile while train loss fell
};

inline constexpr double kDefaultOverfitGap = 0.05;

/// Flags overfitting from the training curves. A single-epoch history is
/// never flagged (insufficient evidence).
OverfitDiagnosis overfit_check(const TrainHistory& history,
                               double gap_threshold = kDefaultOverfitGap);

/// The three readings of "final accuracy" a curve supports.
struct AccuracyReadings {
    double final_epoch = 0.0;
    double best_epoch = 0.0;
    double mean = 0.0;
};
AccuracyReadings accuracy_readings(const TrainHistory& history);

/// Writes <prefix>report.json, <prefix>history.csv and the accuracy / loss /
/// ROC SVG plots. The ROC polyline closes at the (1,1) corner, so k distinct
/// scores yield k+1 segments.
void emit_report(const EvalReport& report, const TrainHistory& history,
                 const std::filesystem::path& path_prefix);

std::string report_to_json(const EvalReport& report, const TrainHistory& history);

} // namespace ecgscreen
