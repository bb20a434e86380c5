#include "ecgscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecgscreen/errors.hpp"
#include "internal/fsio.hpp"

namespace ecgscreen {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw ShapeError("accuracy: prediction/label length mismatch");
    if (predictions.empty()) throw EmptyInput("accuracy: no predictions");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

Confusion confusion_counts(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw ShapeError("confusion_counts: prediction/label length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (labels[i]) {
            predictions[i] ? ++c.tp : ++c.fn;
        } else {
            predictions[i] ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

double f1_score(const Confusion& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(c.tp) / denom;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw ShapeError("roc_auc: score/label length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedRoc("roc_auc: both classes must be present");

    // Group counts per distinct score, swept from the highest threshold down.
    std::map<double, std::pair<std::size_t, std::size_t>, std::greater<double>> groups;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto& [pos, neg] = groups[scores[i]];
        labels[i] ? ++pos : ++neg;
    }

    RocResult result;
    result.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    for (const auto& [score, counts] : groups) {
        const double prev_tpr = static_cast<double>(tp) / n_pos;
        const double prev_fpr = static_cast<double>(fp) / n_neg;
        tp += counts.first;
        fp += counts.second;
        const double tpr = static_cast<double>(tp) / n_pos;
        const double fpr = static_cast<double>(fp) / n_neg;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        result.points.push_back({fpr, tpr});
    }
    result.auc = auc;
    return result;
}

OverfitDiagnosis overfit_check(const TrainHistory& history, double gap_threshold) {
    OverfitDiagnosis d;
    const auto& epochs = history.epochs;
    if (epochs.size() < 2) return d; // insufficient evidence

    d.final_gap = epochs.back().train_acc - epochs.back().val_acc;
    d.gap_exceeded = d.final_gap > gap_threshold;

    const std::size_t quartile = std::max<std::size_t>(2, epochs.size() / 4);
    const auto& from = epochs[epochs.size() - quartile];
    const auto& to = epochs.back();
    d.val_loss_rising = to.val_loss > from.val_loss && to.train_loss < from.train_loss;

    d.flagged = d.gap_exceeded || d.val_loss_rising;
    return d;
}

AccuracyReadings accuracy_readings(const TrainHistory& history) {
    AccuracyReadings r;
    if (history.epochs.empty()) return r;
    r.final_epoch = history.epochs.back().val_acc;
    double sum = 0.0;
    for (const auto& e : history.epochs) {
        r.best_epoch = std::max(r.best_epoch, e.val_acc);
        sum += e.val_acc;
    }
    r.mean = sum / static_cast<double>(history.epochs.size());
    return r;
}

namespace {

// Minimal SVG line chart: fixed viewport, one polyline per series.
class SvgChart {
public:
    SvgChart(std::string title, double x_max, double y_min, double y_max)
        : title_(std::move(title)), x_max_(std::max(x_max, 1e-12)) {
        y_min_ = y_min;
        y_span_ = std::max(y_max - y_min, 1e-12);
    }

    void add_series(const std::string& name, const std::string& color,
                    std::span<const double> xs, std::span<const double> ys) {
        std::ostringstream pts;
        pts.precision(6);
        for (std::size_t i = 0; i < xs.size(); ++i)
            pts << px(xs[i]) << ',' << py(ys[i]) << ' ';
        series_ += "  <polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" +
                   pts.str() + "\"/>\n";
        legend_ += "  <text x=\"" + std::to_string(70 + 110 * n_series_) +
                   "\" y=\"18\" font-size=\"11\" fill=\"" + color + "\">" + name + "</text>\n";
        ++n_series_;
    }

    std::string render() const {
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
            << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
            << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "  <text x=\"10\" y=\"18\" font-size=\"12\">" << title_ << "</text>\n"
            << "  <line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
            << "\" y2=\"" << kH - kPad << "\" stroke=\"black\"/>\n"
            << "  <line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
            << kH - kPad << "\" stroke=\"black\"/>\n"
            << legend_ << series_ << "</svg>\n";
        return svg.str();
    }

private:
    static constexpr int kW = 480;
    static constexpr int kH = 320;
    static constexpr int kPad = 40;

    double px(double x) const { return kPad + (x / x_max_) * (kW - 2 * kPad); }
    double py(double y) const { return (kH - kPad) - ((y - y_min_) / y_span_) * (kH - 2 * kPad); }

    std::string title_;
    double x_max_, y_min_ = 0.0, y_span_ = 1.0;
    std::string series_;
    std::string legend_;
    int n_series_ = 0;
};

void plot_curves(const TrainHistory& history, const std::filesystem::path& prefix) {
    std::vector<double> epochs, train_acc, val_acc, train_loss, val_loss;
    double loss_max = 0.0;
    for (const auto& e : history.epochs) {
        epochs.push_back(e.epoch);
        train_acc.push_back(e.train_acc);
        val_acc.push_back(e.val_acc);
        train_loss.push_back(e.train_loss);
        val_loss.push_back(e.val_loss);
        loss_max = std::max({loss_max, e.train_loss, e.val_loss});
    }
    const double x_max = epochs.empty() ? 1.0 : epochs.back();

    SvgChart acc("Training and validation accuracy", x_max, 0.0, 1.0);
    acc.add_series("train", "#1f77b4", epochs, train_acc);
    acc.add_series("validation", "#ff7f0e", epochs, val_acc);
    fsio::write_text_file(prefix.string() + "accuracy.svg", acc.render());

    SvgChart loss("Training and validation loss", x_max, 0.0, loss_max);
    loss.add_series("train", "#1f77b4", epochs, train_loss);
    loss.add_series("validation", "#ff7f0e", epochs, val_loss);
    fsio::write_text_file(prefix.string() + "loss.svg", loss.render());
}

void plot_roc(const EvalReport& report, const std::filesystem::path& prefix) {
    std::vector<double> xs, ys;
    for (const auto& p : report.roc_points) {
        xs.push_back(p.fpr);
        ys.push_back(p.tpr);
    }
    // Close the curve at the (1,1) corner.
    xs.push_back(1.0);
    ys.push_back(1.0);
    SvgChart roc("ROC curve (AUC " + std::to_string(report.auc) + ")", 1.0, 0.0, 1.0);
    roc.add_series("roc", "#2ca02c", xs, ys);
    fsio::write_text_file(prefix.string() + "roc.svg", roc.render());
}

} // namespace

std::string report_to_json(const EvalReport& report, const TrainHistory& history) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["f1"] = report.f1;
    j["auc"] = report.auc;
    j["confusion"] = {{"tp", report.confusion.tp},
                      {"fp", report.confusion.fp},
                      {"tn", report.confusion.tn},
                      {"fn", report.confusion.fn}};
    j["roc"] = nlohmann::json::array();
    for (const auto& p : report.roc_points) j["roc"].push_back({{"fpr", p.fpr}, {"tpr", p.tpr}});

    const AccuracyReadings readings = accuracy_readings(history);
    j["val_accuracy_readings"] = {{"final_epoch", readings.final_epoch},
                                  {"best_epoch", readings.best_epoch},
                                  {"mean", readings.mean}};
    const OverfitDiagnosis overfit = overfit_check(history);
    j["overfit"] = {{"flagged", overfit.flagged},
                    {"final_gap", overfit.final_gap},
                    {"val_loss_rising", overfit.val_loss_rising}};
    return j.dump(2) + "\n";
}

void emit_report(const EvalReport& report, const TrainHistory& history,
                 const std::filesystem::path& path_prefix) {
    try {
        fsio::write_text_file(path_prefix.string() + "report.json",
                              report_to_json(report, history));
        fsio::write_text_file(path_prefix.string() + "history.csv", history_to_csv(history));
        plot_curves(history, path_prefix);
        plot_roc(report, path_prefix);
    } catch (const IoError& e) {
        throw IoError("emit_report at prefix " + path_prefix.string() + ": " + e.what());
    }
}

} // namespace ecgscreen
