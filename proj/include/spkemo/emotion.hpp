#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spkemo/embedding.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

// Codes are part of the EMB1 and SVM1 formats; do not reorder.
enum class EmotionLabel : std::uint8_t { Angry = 0, Sad = 1, Happy = 2, Neutral = 3, Fear = 4, Disgust = 5 };

inline constexpr std::array<EmotionLabel, 6> kAllEmotions = {EmotionLabel::Angry, EmotionLabel::Sad,
                                                             EmotionLabel::Happy, EmotionLabel::Neutral,
                                                             EmotionLabel::Fear,  EmotionLabel::Disgust};

/// The four classes used by every classification head.
inline constexpr std::array<EmotionLabel, 4> kFourClasses = {EmotionLabel::Angry, EmotionLabel::Sad,
                                                             EmotionLabel::Happy, EmotionLabel::Neutral};

inline int code(EmotionLabel e) { return static_cast<int>(e); }

inline EmotionLabel emotion_from_code(int c) {
    if (c < 0 || c > 5) throw Error(ErrorCode::UnknownLabel, "emotion code " + std::to_string(c));
    return static_cast<EmotionLabel>(c);
}

inline std::string_view to_string(EmotionLabel e) {
    switch (e) {
        case EmotionLabel::Angry: return "Angry";
        case EmotionLabel::Sad: return "Sad";
        case EmotionLabel::Happy: return "Happy";
        case EmotionLabel::Neutral: return "Neutral";
        case EmotionLabel::Fear: return "Fear";
        case EmotionLabel::Disgust: return "Disgust";
    }
    return "?";
}

inline std::string_view short_name(EmotionLabel e) {
    static constexpr std::array<std::string_view, 6> names = {"ANG", "SAD", "HAP", "NEU", "FEA", "DIS"};
    return names[static_cast<std::size_t>(e)];
}

/// Accepts full names, three-letter codes, or numeric codes (case-insensitive).
inline EmotionLabel parse_emotion(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    for (EmotionLabel e : kAllEmotions) {
        std::string full(to_string(e)), shrt(short_name(e));
        std::transform(full.begin(), full.end(), full.begin(), [](unsigned char c) { return std::tolower(c); });
        std::transform(shrt.begin(), shrt.end(), shrt.begin(), [](unsigned char c) { return std::tolower(c); });
        if (t == full || t == shrt || t == std::to_string(code(e))) return e;
    }
    if (t == "anger") return EmotionLabel::Angry;
    if (t == "happiness" || t == "joy") return EmotionLabel::Happy;
    throw Error(ErrorCode::UnknownLabel, "unknown emotion '" + std::string(text) + "'");
}

/// One dataset row: an utterance embedding and its metadata.
struct LabeledEmbedding {
    Embedding embedding;
    std::string speaker_id;
    std::string utterance_id;
    EmotionLabel emotion = EmotionLabel::Neutral;
    std::optional<std::string> sentence_id;

    bool operator==(const LabeledEmbedding&) const = default;
};

inline std::vector<LabeledEmbedding> filter_emotions(const std::vector<LabeledEmbedding>& rows,
                                                     std::span<const EmotionLabel> keep) {
    std::vector<LabeledEmbedding> out;
    for (const auto& r : rows)
        if (std::find(keep.begin(), keep.end(), r.emotion) != keep.end()) out.push_back(r);
    return out;
}

}  // namespace spkemo
