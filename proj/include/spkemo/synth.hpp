#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "spkemo/emotion.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

/// Scales are vector norms in expectation: a Gaussian draw with scale s has
/// per-component standard deviation s / sqrt(dim).
struct SynthConfig {
    std::size_t n_speakers = 10;
    std::size_t utterances_per_cell = 5;
    std::size_t dim = 256;
    std::vector<EmotionLabel> emotions{kAllEmotions.begin(), kAllEmotions.end()};
    double speaker_scale = 1.0;
    double emotion_offset_scale = 0.6;
    double noise_scale = 0.2;
    /// Per-emotion multiplier on emotion_offset_scale, indexed by label code.
    std::array<double, 6> emotion_scale{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    std::uint64_t seed = 42;

    void validate() const {
        if (n_speakers == 0) throw Error(ErrorCode::InvalidArgument, "n_speakers must be at least 1");
        if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be positive");
        if (emotions.empty()) throw Error(ErrorCode::InvalidArgument, "emotion set is empty");
        if (speaker_scale < 0 || emotion_offset_scale < 0 || noise_scale < 0)
            throw Error(ErrorCode::InvalidArgument, "scales must be non-negative");
        for (double s : emotion_scale)
            if (s < 0) throw Error(ErrorCode::InvalidArgument, "emotion scale multipliers must be non-negative");
    }
};

/// Sentence ids cycled over by utterance index.
inline constexpr std::array<const char*, 12> kSynthSentences = {"IEO", "TIE", "IOM", "IWW", "TAI", "MTI",
                                                                "IWL", "ITH", "DFA", "ITS", "TSI", "WSI"};

namespace detail {

inline std::mt19937_64 derived_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, index};
    return std::mt19937_64(seq);
}

inline std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(dim);
    for (double& x : v) x = normal(rng);
    return v;
}

}  // namespace detail

/// utterance = normalize(c_s + d_e + noise), where c_s is the speaker centroid
/// (length speaker_scale), d_e a per-emotion offset shared by all speakers with
/// d_Neutral = 0, and noise fresh per utterance. Rows are ordered speaker,
/// emotion, utterance. Raw draws do not depend on the scales, so changing a
/// scale with a fixed seed rescales the same directions.
inline std::vector<LabeledEmbedding> gen_synthetic_corpus(const SynthConfig& config) {
    config.validate();
    const std::size_t dim = config.dim;
    const double per_dim = 1.0 / std::sqrt(static_cast<double>(dim));

    std::array<std::vector<double>, 6> offsets;
    {
        auto rng = detail::derived_rng(config.seed, 1, 0);
        for (EmotionLabel e : kAllEmotions) {
            auto raw = detail::gaussian_vector(rng, dim);
            const double s = e == EmotionLabel::Neutral
                                 ? 0.0
                                 : config.emotion_offset_scale * config.emotion_scale[code(e)] * per_dim;
            for (double& x : raw) x *= s;
            offsets[code(e)] = std::move(raw);
        }
    }

    std::vector<LabeledEmbedding> rows;
    rows.reserve(config.n_speakers * config.emotions.size() * config.utterances_per_cell);
    char id[64];
    for (std::size_t s = 0; s < config.n_speakers; ++s) {
        auto rng = detail::derived_rng(config.seed, 2, static_cast<std::uint32_t>(s));
        auto centroid = detail::gaussian_vector(rng, dim);
        normalize_in_place(centroid);
        for (double& x : centroid) x *= config.speaker_scale;

        std::snprintf(id, sizeof(id), "spk%02zu", s);
        const std::string speaker = id;
        for (EmotionLabel e : config.emotions) {
            for (std::size_t u = 0; u < config.utterances_per_cell; ++u) {
                auto noise = detail::gaussian_vector(rng, dim);
                std::vector<double> v(dim);
                for (std::size_t i = 0; i < dim; ++i)
                    v[i] = centroid[i] + offsets[code(e)][i] + config.noise_scale * per_dim * noise[i];
                normalize_in_place(v);

                LabeledEmbedding row;
                row.embedding = Embedding(std::move(v));
                row.speaker_id = speaker;
                row.emotion = e;
                row.sentence_id = kSynthSentences[u % kSynthSentences.size()];
                std::snprintf(id, sizeof(id), "%s_%s_%02zu", speaker.c_str(), std::string(short_name(e)).c_str(), u);
                row.utterance_id = id;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace spkemo
