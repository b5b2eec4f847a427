#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkemo/emotion.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    bool speaker_disjoint = true;

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw Error(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");
    }
};

struct DataSplit {
    std::vector<LabeledEmbedding> train;
    std::vector<LabeledEmbedding> test;
};

/// Speakers (sorted, then shuffled by the seed) go to train one at a time until
/// the train share of utterances reaches train_fraction. At least one speaker is
/// always left for test. Row order within each side follows the input.
inline DataSplit split_speaker_disjoint(const std::vector<LabeledEmbedding>& data, const SplitSpec& spec) {
    spec.validate();
    DataSplit out;
    std::mt19937_64 rng(spec.seed);

    if (!spec.speaker_disjoint) {
        if (data.size() < 2) throw Error(ErrorCode::EmptyInput, "need at least two rows to split");
        std::vector<std::size_t> idx(data.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(data.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, data.size() - 1);
        std::vector<bool> is_train(data.size(), false);
        for (std::size_t i = 0; i < n_train; ++i) is_train[idx[i]] = true;
        for (std::size_t i = 0; i < data.size(); ++i) (is_train[i] ? out.train : out.test).push_back(data[i]);
        return out;
    }

    std::map<std::string, std::size_t> per_speaker;
    for (const auto& r : data) ++per_speaker[r.speaker_id];
    if (per_speaker.size() < 2)
        throw Error(ErrorCode::TooFewSpeakers, std::to_string(per_speaker.size()) +
                                                   " speaker(s); a speaker-disjoint split needs at least 2");

    std::vector<std::string> speakers;
    for (const auto& [s, _] : per_speaker) speakers.push_back(s);
    std::shuffle(speakers.begin(), speakers.end(), rng);

    const double total = static_cast<double>(data.size());
    std::set<std::string> train_speakers;
    std::size_t train_count = 0;
    for (std::size_t k = 0; k + 1 < speakers.size(); ++k) {
        if (static_cast<double>(train_count) / total >= spec.train_fraction - 1e-12) break;
        train_speakers.insert(speakers[k]);
        train_count += per_speaker[speakers[k]];
    }
    for (const auto& r : data) (train_speakers.count(r.speaker_id) ? out.train : out.test).push_back(r);
    return out;
}

/// counts[i][j]: samples of true class i predicted as class j.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::size_t>> counts;

    std::size_t total() const {
        std::size_t s = 0;
        for (const auto& row : counts)
            for (std::size_t c : row) s += c;
        return s;
    }

    std::size_t trace() const {
        std::size_t s = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) s += counts[i][i];
        return s;
    }

    double accuracy() const {
        std::size_t n = total();
        if (n == 0) throw Error(ErrorCode::EmptyEval, "accuracy of an empty confusion matrix is undefined");
        return static_cast<double>(trace()) / static_cast<double>(n);
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& truth, const std::vector<std::string>& pred,
                                        const std::vector<std::string>& classes) {
    if (truth.size() != pred.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(truth.size()) + " truths vs " +
                                                   std::to_string(pred.size()) + " predictions");
    auto index_of = [&](const std::string& label) {
        auto it = std::find(classes.begin(), classes.end(), label);
        if (it == classes.end()) throw Error(ErrorCode::UnknownLabel, "label '" + label + "' not in class list");
        return static_cast<std::size_t>(it - classes.begin());
    };
    ConfusionMatrix cm;
    cm.classes = classes;
    cm.counts.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
    for (std::size_t t = 0; t < truth.size(); ++t) ++cm.counts[index_of(truth[t])][index_of(pred[t])];
    return cm;
}

inline ConfusionMatrix confusion_matrix(std::span<const EmotionLabel> truth, std::span<const EmotionLabel> pred,
                                        std::span<const EmotionLabel> classes) {
    auto names = [](std::span<const EmotionLabel> v) {
        std::vector<std::string> out;
        for (EmotionLabel e : v) out.emplace_back(to_string(e));
        return out;
    };
    return confusion_matrix(names(truth), names(pred), names(classes));
}

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

/// Any 0/0 ratio is reported as 0.
inline std::vector<ClassMetrics> f1_per_class(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error(ErrorCode::EmptyEval, "no evaluated samples");
    const std::size_t k = cm.classes.size();
    std::vector<ClassMetrics> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = cm.counts[c][c], col = 0, row = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm.counts[c][j];
            col += cm.counts[j][c];
        }
        auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
        auto& m = out[c];
        m.label = cm.classes[c];
        m.support = row;
        m.precision = ratio(static_cast<double>(tp), static_cast<double>(col));
        m.recall = ratio(static_cast<double>(tp), static_cast<double>(row));
        m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    }
    return out;
}

inline double macro_f1(const std::vector<ClassMetrics>& per_class) {
    if (per_class.empty()) return 0.0;
    double s = 0.0;
    for (const auto& m : per_class) s += m.f1;
    return s / static_cast<double>(per_class.size());
}

struct EvalReport {
    std::string head;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    std::size_t n_discarded = 0;
    std::string config_hash;

    bool operator==(const EvalReport&) const = default;
};

using Predictor = std::function<std::string(const Embedding&)>;
using TruthMapper = std::function<std::string(EmotionLabel)>;

inline EvalReport evaluate(const Predictor& predictor, const std::vector<LabeledEmbedding>& test,
                           const std::vector<std::string>& classes, const TruthMapper& truth_of = {},
                           std::size_t n_discarded = 0) {
    if (test.empty()) throw Error(ErrorCode::EmptyEval, "empty test set");
    std::vector<std::string> truth, pred;
    truth.reserve(test.size());
    pred.reserve(test.size());
    for (const auto& r : test) {
        truth.push_back(truth_of ? truth_of(r.emotion) : std::string(to_string(r.emotion)));
        pred.push_back(predictor(r.embedding));
    }
    EvalReport report;
    report.confusion = confusion_matrix(truth, pred, classes);
    report.accuracy = report.confusion.accuracy();
    report.per_class = f1_per_class(report.confusion);
    report.n_discarded = n_discarded;
    return report;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["head"] = r.head;
    j["config_hash"] = r.config_hash;
    j["accuracy"] = r.accuracy;
    j["macro_f1"] = macro_f1(r.per_class);
    j["n_evaluated"] = r.confusion.total();
    j["n_discarded"] = r.n_discarded;
    j["classes"] = r.confusion.classes;
    j["confusion"] = r.confusion.counts;
    auto& pc = j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& m : r.per_class)
        pc.push_back({{"label", m.label},
                      {"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1},
                      {"support", m.support}});
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.head = j.at("head").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.accuracy = j.at("accuracy").get<double>();
    r.n_discarded = j.at("n_discarded").get<std::size_t>();
    r.confusion.classes = j.at("classes").get<std::vector<std::string>>();
    r.confusion.counts = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& m : j.at("per_class")) {
        r.per_class.push_back({m.at("label").get<std::string>(), m.at("precision").get<double>(),
                               m.at("recall").get<double>(), m.at("f1").get<double>(),
                               m.at("support").get<std::size_t>()});
    }
    return r;
}

/// Confusion grid as CSV: header "true\pred,<classes...>", one row per true class.
inline std::string confusion_to_csv(const ConfusionMatrix& cm) {
    std::string out = "true\\pred";
    for (const auto& c : cm.classes) out += "," + c;
    out += "\n";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        out += cm.classes[i];
        for (std::size_t c : cm.counts[i]) out += "," + std::to_string(c);
        out += "\n";
    }
    return out;
}

inline std::string format_percent(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
    return buf;
}

/// Plain-text report: confusion grid and per-class precision/recall/F1.
inline std::string format_report(const EvalReport& r) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "head: %s   accuracy: %s%%   macro-F1: %s   n=%zu   discarded=%zu\n",
                  r.head.c_str(), format_percent(r.accuracy).c_str(), format_percent(macro_f1(r.per_class)).c_str(),
                  r.confusion.total(), r.n_discarded);
    out += buf;
    out += "\nconfusion (rows = true, cols = predicted)\n";
    std::snprintf(buf, sizeof(buf), "%-16s", "");
    out += buf;
    for (const auto& c : r.confusion.classes) {
        std::snprintf(buf, sizeof(buf), "%16s", c.c_str());
        out += buf;
    }
    out += "\n";
    for (std::size_t i = 0; i < r.confusion.classes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%-16s", r.confusion.classes[i].c_str());
        out += buf;
        for (std::size_t c : r.confusion.counts[i]) {
            std::snprintf(buf, sizeof(buf), "%16zu", c);
            out += buf;
        }
        out += "\n";
    }
    out += "\nclass            precision   recall       F1  support\n";
    for (const auto& m : r.per_class) {
        std::snprintf(buf, sizeof(buf), "%-16s %9s %8s %8s %8zu\n", m.label.c_str(),
                      format_percent(m.precision).c_str(), format_percent(m.recall).c_str(),
                      format_percent(m.f1).c_str(), m.support);
        out += buf;
    }
    return out;
}

/// One row of the "ER / ED" summary: 4-class recognition and detection accuracy.
struct SummaryRow {
    std::string algorithm;
    std::optional<double> er;
    std::optional<double> ed;
};

inline std::string format_summary_table(const std::vector<SummaryRow>& rows, const std::string& dataset) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-24s %s\n%-24s %s\n", "Algorithm", dataset.c_str(), "", "ER / ED");
    out += buf;
    for (const auto& r : rows) {
        std::string er = r.er ? format_percent(*r.er) : "-";
        std::string ed = r.ed ? format_percent(*r.ed) : "-";
        std::snprintf(buf, sizeof(buf), "%-24s %s / %s\n", r.algorithm.c_str(), er.c_str(), ed.c_str());
        out += buf;
    }
    return out;
}

}  // namespace spkemo
