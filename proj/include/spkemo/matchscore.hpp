#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkemo/emotion.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

struct PairingKind {
    enum class Type { InterEmotion, GenuineNeutral, ImpostorNeutral };

    Type type = Type::InterEmotion;
    EmotionLabel first = EmotionLabel::Neutral;   // InterEmotion only; first < second by code
    EmotionLabel second = EmotionLabel::Neutral;

    static PairingKind inter(EmotionLabel a, EmotionLabel b) {
        if (code(b) < code(a)) std::swap(a, b);
        return {Type::InterEmotion, a, b};
    }
    static PairingKind genuine() { return {Type::GenuineNeutral, EmotionLabel::Neutral, EmotionLabel::Neutral}; }
    static PairingKind impostor() { return {Type::ImpostorNeutral, EmotionLabel::Neutral, EmotionLabel::Neutral}; }

    std::string name() const {
        switch (type) {
            case Type::InterEmotion: return std::string(short_name(first)) + "-" + std::string(short_name(second));
            case Type::GenuineNeutral: return "GENUINE-NEU";
            case Type::ImpostorNeutral: return "IMPOSTOR-NEU";
        }
        return "?";
    }

    auto operator<=>(const PairingKind&) const = default;
};

/// All unordered pairs of distinct emotions ordered by label code, then the
/// genuine and impostor neutral baselines.
inline std::vector<PairingKind> enumerate_pairings(std::span<const EmotionLabel> emotions) {
    std::vector<EmotionLabel> sorted(emotions.begin(), emotions.end());
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return code(a) < code(b); });
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<PairingKind> out;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j) out.push_back(PairingKind::inter(sorted[i], sorted[j]));
    out.push_back(PairingKind::genuine());
    out.push_back(PairingKind::impostor());
    return out;
}

struct MatchScore {
    std::string speaker_id;  // "a|b" for impostor pairs
    double score = 0.0;
};

struct MatchScoreOptions {
    std::vector<EmotionLabel> emotions{kAllEmotions.begin(), kAllEmotions.end()};
    std::size_t impostor_cap = 10000;
    std::uint64_t seed = 42;
};

struct MatchScoreResult {
    std::vector<PairingKind> kinds;
    std::map<PairingKind, std::vector<MatchScore>> scores;
    std::vector<PairingKind> no_eligible_pairs;

    std::size_t inter_emotion_kinds() const {
        return static_cast<std::size_t>(std::count_if(kinds.begin(), kinds.end(), [](const auto& k) {
            return k.type == PairingKind::Type::InterEmotion;
        }));
    }

    std::vector<double> values(const PairingKind& k) const {
        std::vector<double> v;
        auto it = scores.find(k);
        if (it != scores.end())
            for (const auto& s : it->second) v.push_back(s.score);
        return v;
    }
};

/// Inter-emotion scores pair same-speaker, same-sentence utterances; the genuine
/// baseline pairs distinct Neutral utterances of one speaker; the impostor
/// baseline pairs Neutral utterances of different speakers, restricted to shared
/// sentences when a speaker pair has any.
inline MatchScoreResult run_matchscore_experiment(const std::vector<LabeledEmbedding>& data,
                                                  const MatchScoreOptions& options = {}) {
    if (std::none_of(data.begin(), data.end(), [](const auto& r) { return r.emotion == EmotionLabel::Neutral; }))
        throw Error(ErrorCode::MissingNeutral, "no Neutral utterances for the genuine/impostor baselines");

    MatchScoreResult result;
    result.kinds = enumerate_pairings(options.emotions);
    for (const auto& k : result.kinds) result.scores[k];

    std::map<std::string, std::vector<const LabeledEmbedding*>> by_speaker;
    for (const auto& r : data) by_speaker[r.speaker_id].push_back(&r);

    for (const auto& [speaker, rows] : by_speaker) {
        for (std::size_t a = 0; a < rows.size(); ++a) {
            for (std::size_t b = a + 1; b < rows.size(); ++b) {
                const auto& u = *rows[a];
                const auto& v = *rows[b];
                if (u.emotion == EmotionLabel::Neutral && v.emotion == EmotionLabel::Neutral) {
                    result.scores[PairingKind::genuine()].push_back(
                        {speaker, cosine_similarity(u.embedding.view(), v.embedding.view())});
                    continue;
                }
                if (u.emotion == v.emotion || !u.sentence_id || u.sentence_id != v.sentence_id) continue;
                auto kind = PairingKind::inter(u.emotion, v.emotion);
                auto it = result.scores.find(kind);
                if (it == result.scores.end()) continue;  // emotion outside the requested set
                it->second.push_back({speaker, cosine_similarity(u.embedding.view(), v.embedding.view())});
            }
        }
    }

    std::vector<std::pair<std::string, std::vector<const LabeledEmbedding*>>> neutral;
    for (const auto& [speaker, rows] : by_speaker) {
        std::vector<const LabeledEmbedding*> n;
        for (const auto* r : rows)
            if (r->emotion == EmotionLabel::Neutral) n.push_back(r);
        if (!n.empty()) neutral.emplace_back(speaker, std::move(n));
    }
    std::vector<MatchScore> impostor;
    for (std::size_t s = 0; s < neutral.size(); ++s) {
        for (std::size_t t = s + 1; t < neutral.size(); ++t) {
            const auto& left = neutral[s].second;
            const auto& right = neutral[t].second;
            bool share = false;
            for (const auto* u : left)
                for (const auto* v : right) share = share || (u->sentence_id && u->sentence_id == v->sentence_id);
            const std::string id = neutral[s].first + "|" + neutral[t].first;
            for (const auto* u : left)
                for (const auto* v : right)
                    if (!share || (u->sentence_id && u->sentence_id == v->sentence_id))
                        impostor.push_back({id, cosine_similarity(u->embedding.view(), v->embedding.view())});
        }
    }
    if (impostor.size() > options.impostor_cap) {
        std::vector<std::size_t> idx(impostor.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::mt19937_64 rng(options.seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(options.impostor_cap);
        std::sort(idx.begin(), idx.end());
        std::vector<MatchScore> kept;
        kept.reserve(idx.size());
        for (std::size_t i : idx) kept.push_back(impostor[i]);
        impostor = std::move(kept);
    }
    result.scores[PairingKind::impostor()] = std::move(impostor);

    for (const auto& k : result.kinds)
        if (result.scores[k].empty()) result.no_eligible_pairs.push_back(k);
    return result;
}

/// Five-number summary with Tukey (1.5 IQR) whiskers clipped to the data.
struct BoxStats {
    std::size_t n = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double whisker_low = 0.0, whisker_high = 0.0;
    std::size_t n_outliers = 0;
};

namespace detail {

inline double median_sorted(std::span<const double> v) {
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Quartiles are medians of the lower and upper halves; for odd n the overall
/// median is excluded from both halves.
inline BoxStats box_stats(std::vector<double> scores) {
    if (scores.empty()) throw Error(ErrorCode::EmptyScores, "box statistics need at least one score");
    std::sort(scores.begin(), scores.end());
    const std::size_t n = scores.size();
    std::span<const double> all(scores);

    BoxStats b;
    b.n = n;
    b.min = scores.front();
    b.max = scores.back();
    b.median = detail::median_sorted(all);
    const std::size_t half = n / 2;
    if (half == 0) {
        b.q1 = b.q3 = b.median;
    } else {
        b.q1 = detail::median_sorted(all.first(half));
        b.q3 = detail::median_sorted(all.last(half));
    }
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_low = *std::find_if(scores.begin(), scores.end(), [&](double s) { return s >= lo_fence; });
    b.whisker_high = *std::find_if(scores.rbegin(), scores.rend(), [&](double s) { return s <= hi_fence; });
    b.n_outliers = static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [&](double s) {
        return s < b.whisker_low || s > b.whisker_high;
    }));
    return b;
}

inline std::string matchscores_to_csv(const MatchScoreResult& r) {
    std::string out = "pairing_kind,speaker_id,score\n";
    char buf[40];
    for (const auto& k : r.kinds) {
        auto it = r.scores.find(k);
        if (it == r.scores.end()) continue;
        for (const auto& s : it->second) {
            std::snprintf(buf, sizeof(buf), ",%.17g\n", s.score);
            out += k.name() + "," + s.speaker_id + buf;
        }
    }
    return out;
}

inline nlohmann::ordered_json matchscores_to_json(const MatchScoreResult& r) {
    nlohmann::ordered_json j;
    j["inter_emotion_pairings"] = r.inter_emotion_kinds();
    auto& kinds = j["kinds"] = nlohmann::ordered_json::array();
    for (const auto& k : r.kinds) {
        nlohmann::ordered_json e;
        e["kind"] = k.name();
        auto v = r.values(k);
        if (v.empty()) {
            e["n"] = 0;
            e["status"] = "NoEligiblePairs";
        } else {
            auto b = box_stats(v);
            e["n"] = b.n;
            e["min"] = b.min;
            e["whisker_low"] = b.whisker_low;
            e["q1"] = b.q1;
            e["median"] = b.median;
            e["q3"] = b.q3;
            e["whisker_high"] = b.whisker_high;
            e["max"] = b.max;
            e["n_outliers"] = b.n_outliers;
        }
        kinds.push_back(std::move(e));
    }
    return j;
}

}  // namespace spkemo
