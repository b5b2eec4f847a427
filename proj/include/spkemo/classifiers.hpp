#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkemo/detail/csv.hpp"
#include "spkemo/emotion.hpp"
#include "spkemo/svm.hpp"
#include "spkemo/svm_io.hpp"

namespace spkemo {

namespace detail {

inline void require_classes(const std::vector<LabeledEmbedding>& rows, std::span<const EmotionLabel> required) {
    std::vector<EmotionLabel> missing;
    for (EmotionLabel e : required) {
        bool found = std::any_of(rows.begin(), rows.end(), [e](const auto& r) { return r.emotion == e; });
        if (!found) missing.push_back(e);
    }
    if (missing.empty()) return;
    std::string names;
    for (EmotionLabel e : missing) names += (names.empty() ? "" : ", ") + std::string(to_string(e));
    throw Error(ErrorCode::MissingClass, "missing classes: [" + names + "]");
}

inline std::vector<Embedding> embeddings_of(const std::vector<LabeledEmbedding>& rows) {
    std::vector<Embedding> x;
    x.reserve(rows.size());
    for (const auto& r : rows) x.push_back(r.embedding);
    return x;
}

}  // namespace detail

/// Baseline head: one-vs-one SVM over {Angry, Sad, Happy, Neutral}. Rows with
/// other emotions are ignored.
inline MulticlassSvmModel train_flat(const std::vector<LabeledEmbedding>& train, const TrainParams& params) {
    auto rows = filter_emotions(train, kFourClasses);
    detail::require_classes(rows, kFourClasses);
    std::vector<int> labels;
    for (const auto& r : rows) labels.push_back(code(r.emotion));
    return train_multiclass(detail::embeddings_of(rows), labels, params);
}

inline EmotionLabel predict_flat(const MulticlassSvmModel& model, std::span<const double> x) {
    return emotion_from_code(predict_multiclass(model, x));
}

/// Two-stage cascade: stage1 separates first_class from the rest, stage2
/// classifies everything stage1 rejects among the remaining three classes.
struct HierarchicalClassifier {
    EmotionLabel first_class = EmotionLabel::Sad;
    BinarySvmModel stage1;
    MulticlassSvmModel stage2;

    bool operator==(const HierarchicalClassifier&) const = default;
};

inline HierarchicalClassifier train_hierarchical(const std::vector<LabeledEmbedding>& train,
                                                 EmotionLabel first_class, const TrainParams& params) {
    if (std::find(kFourClasses.begin(), kFourClasses.end(), first_class) == kFourClasses.end())
        throw Error(ErrorCode::InvalidArgument, "first class must be one of Angry, Sad, Happy, Neutral");
    auto rows = filter_emotions(train, kFourClasses);
    detail::require_classes(rows, kFourClasses);

    HierarchicalClassifier hc;
    hc.first_class = first_class;

    std::vector<int> y1;
    for (const auto& r : rows) y1.push_back(r.emotion == first_class ? 1 : -1);
    hc.stage1 = train_binary_smo(detail::embeddings_of(rows), y1, params);

    std::vector<Embedding> x2;
    std::vector<int> y2;
    for (const auto& r : rows) {
        if (r.emotion == first_class) continue;
        x2.push_back(r.embedding);
        y2.push_back(code(r.emotion));
    }
    hc.stage2 = train_multiclass(x2, y2, params);
    return hc;
}

inline HierarchicalClassifier train_hierarchical(const std::vector<LabeledEmbedding>& train,
                                                 const TrainParams& params) {
    return train_hierarchical(train, EmotionLabel::Sad, params);
}

inline EmotionLabel predict_hierarchical(const HierarchicalClassifier& hc, std::span<const double> x) {
    if (decision_function(hc.stage1, x) > 0.0) return hc.first_class;
    return emotion_from_code(predict_multiclass(hc.stage2, x));
}

enum class DetectionLabel { Neutral, EmotionPresent };

inline std::string_view to_string(DetectionLabel d) {
    return d == DetectionLabel::Neutral ? "Neutral" : "EmotionPresent";
}

inline DetectionLabel detection_truth(EmotionLabel e) {
    return e == EmotionLabel::Neutral ? DetectionLabel::Neutral : DetectionLabel::EmotionPresent;
}

/// Neutral -> -1, Angry/Sad/Happy -> +1.
inline BinarySvmModel train_detector(const std::vector<LabeledEmbedding>& train, const TrainParams& params) {
    auto rows = filter_emotions(train, kFourClasses);
    detail::require_classes(rows, std::array{EmotionLabel::Neutral});
    bool any_emotion = std::any_of(rows.begin(), rows.end(), [](const auto& r) {
        return r.emotion != EmotionLabel::Neutral;
    });
    if (!any_emotion) throw Error(ErrorCode::MissingClass, "missing classes: [Angry, Sad, Happy]");
    std::vector<int> y;
    for (const auto& r : rows) y.push_back(r.emotion == EmotionLabel::Neutral ? -1 : 1);
    return train_binary_smo(detail::embeddings_of(rows), y, params);
}

inline DetectionLabel predict_detector(const BinarySvmModel& model, std::span<const double> x) {
    return decision_function(model, x) > 0.0 ? DetectionLabel::EmotionPresent : DetectionLabel::Neutral;
}

// ---------------------------------------------------------------------------
// Bundles: a directory holding SVM1 stage files plus manifest.json.

enum class HeadKind { Flat, Hierarchical, Detector };

inline std::string_view to_string(HeadKind h) {
    switch (h) {
        case HeadKind::Flat: return "flat";
        case HeadKind::Hierarchical: return "hierarchical";
        case HeadKind::Detector: return "detector";
    }
    return "?";
}

inline HeadKind parse_head(std::string_view s) {
    if (s == "flat") return HeadKind::Flat;
    if (s == "hierarchical") return HeadKind::Hierarchical;
    if (s == "detector") return HeadKind::Detector;
    throw Error(ErrorCode::InvalidArgument, "unknown head '" + std::string(s) + "'");
}

struct ClassifierBundle {
    std::variant<MulticlassSvmModel, HierarchicalClassifier, BinarySvmModel> head;
    std::size_t dim = 0;
    std::string config_hash;

    HeadKind kind() const { return static_cast<HeadKind>(head.index()); }

    /// Class names the head can emit, in report order.
    std::vector<std::string> class_names() const {
        if (kind() == HeadKind::Detector) return {"Neutral", "EmotionPresent"};
        std::vector<std::string> out;
        for (EmotionLabel e : kFourClasses) out.emplace_back(to_string(e));
        return out;
    }

    /// The ground-truth class name of an emotion under this head's task.
    std::string truth_name(EmotionLabel e) const {
        if (kind() == HeadKind::Detector) return std::string(to_string(detection_truth(e)));
        return std::string(to_string(e));
    }

    std::string predict(std::span<const double> x) const {
        if (x.size() != dim)
            throw Error(ErrorCode::DimMismatch, "input dim " + std::to_string(x.size()) + ", model dim " +
                                                    std::to_string(dim));
        switch (kind()) {
            case HeadKind::Flat: return std::string(to_string(predict_flat(std::get<0>(head), x)));
            case HeadKind::Hierarchical: return std::string(to_string(predict_hierarchical(std::get<1>(head), x)));
            case HeadKind::Detector: return std::string(to_string(predict_detector(std::get<2>(head), x)));
        }
        return {};
    }
};

inline void save_bundle(const ClassifierBundle& bundle, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["format"] = "spkemo-bundle-1";
    manifest["head"] = std::string(to_string(bundle.kind()));
    manifest["dim"] = bundle.dim;
    manifest["config_hash"] = bundle.config_hash;
    std::vector<int> class_codes;
    for (EmotionLabel e : kFourClasses) class_codes.push_back(code(e));
    switch (bundle.kind()) {
        case HeadKind::Flat:
            save_model(std::get<0>(bundle.head), (fs::path(dir) / "model.svm1").string());
            manifest["first_class"] = nullptr;
            manifest["class_codes"] = class_codes;
            manifest["stages"] = {"model.svm1"};
            break;
        case HeadKind::Hierarchical: {
            const auto& hc = std::get<1>(bundle.head);
            save_model(hc.stage1, (fs::path(dir) / "stage1.svm1").string());
            save_model(hc.stage2, (fs::path(dir) / "stage2.svm1").string());
            manifest["first_class"] = std::string(to_string(hc.first_class));
            manifest["class_codes"] = class_codes;
            manifest["stages"] = {"stage1.svm1", "stage2.svm1"};
            break;
        }
        case HeadKind::Detector:
            save_model(std::get<2>(bundle.head), (fs::path(dir) / "detector.svm1").string());
            manifest["first_class"] = nullptr;
            manifest["class_codes"] = {code(EmotionLabel::Neutral)};
            manifest["stages"] = {"detector.svm1"};
            break;
    }
    detail::write_text_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

inline ClassifierBundle load_bundle(const std::string& dir) {
    namespace fs = std::filesystem;
    auto text = detail::read_text_file((fs::path(dir) / "manifest.json").string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad bundle manifest: ") + e.what());
    }
    ClassifierBundle bundle;
    bundle.dim = manifest.at("dim").get<std::size_t>();
    bundle.config_hash = manifest.value("config_hash", "");
    switch (parse_head(manifest.at("head").get<std::string>())) {
        case HeadKind::Flat:
            bundle.head = load_multiclass_model((fs::path(dir) / "model.svm1").string());
            break;
        case HeadKind::Hierarchical: {
            HierarchicalClassifier hc;
            hc.first_class = parse_emotion(manifest.at("first_class").get<std::string>());
            hc.stage1 = load_binary_model((fs::path(dir) / "stage1.svm1").string());
            hc.stage2 = load_multiclass_model((fs::path(dir) / "stage2.svm1").string());
            bundle.head = std::move(hc);
            break;
        }
        case HeadKind::Detector:
            bundle.head = load_binary_model((fs::path(dir) / "detector.svm1").string());
            break;
    }
    return bundle;
}

}  // namespace spkemo
