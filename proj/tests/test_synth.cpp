#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "spkemo/embedding_io.hpp"
#include "spkemo/matchscore.hpp"
#include "spkemo/synth.hpp"

using namespace spkemo;

TEST(Synth, DefaultsGiveThreeHundredRows) {
    auto rows = gen_synthetic_corpus(SynthConfig{});
    EXPECT_EQ(rows.size(), 300u);
    std::set<std::string> speakers, utterances;
    for (const auto& r : rows) {
        speakers.insert(r.speaker_id);
        utterances.insert(r.utterance_id);
        EXPECT_EQ(r.embedding.dim(), 256u);
        EXPECT_TRUE(r.sentence_id.has_value());
    }
    EXPECT_EQ(speakers.size(), 10u);
    EXPECT_EQ(utterances.size(), 300u);
    EXPECT_EQ(rows[0].utterance_id, "spk00_ANG_00");
}

TEST(Synth, BitIdenticalPerSeed) {
    SynthConfig cfg;
    cfg.dim = 32;
    EXPECT_EQ(encode_embeddings(gen_synthetic_corpus(cfg)), encode_embeddings(gen_synthetic_corpus(cfg)));
    auto other = cfg;
    other.seed = 43;
    EXPECT_NE(gen_synthetic_corpus(cfg), gen_synthetic_corpus(other));
}

TEST(Synth, UnitNorm) {
    SynthConfig cfg;
    cfg.noise_scale = 0.7;
    for (const auto& r : gen_synthetic_corpus(cfg)) EXPECT_NEAR(l2_norm(r.embedding.view()), 1.0, 1e-9);
}

TEST(Synth, NoVariationMeansIdenticalSpeakerRows) {
    SynthConfig cfg;
    cfg.dim = 24;
    cfg.emotion_offset_scale = 0.0;
    cfg.noise_scale = 0.0;
    auto rows = gen_synthetic_corpus(cfg);
    for (const auto& a : rows)
        for (const auto& b : rows)
            if (a.speaker_id == b.speaker_id) {
                EXPECT_NEAR(cosine_similarity(a.embedding.view(), b.embedding.view()), 1.0, 1e-12);
            }
}

TEST(Synth, NeutralHasNoOffset) {
    // With no noise, a speaker's Neutral rows sit exactly on the unit centroid.
    SynthConfig cfg;
    cfg.dim = 16;
    cfg.noise_scale = 0.0;
    cfg.speaker_scale = 3.0;
    auto rows = gen_synthetic_corpus(cfg);
    auto unit = cfg;
    unit.speaker_scale = 1.0;
    auto ref = gen_synthetic_corpus(unit);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].emotion == EmotionLabel::Neutral) {
            for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(rows[i].embedding[k], ref[i].embedding[k], 1e-12);
        }
}

TEST(Synth, ScaleValidation) {
    SynthConfig cfg;
    cfg.noise_scale = -0.1;
    EXPECT_THROW(gen_synthetic_corpus(cfg), Error);
    cfg = SynthConfig{};
    cfg.n_speakers = 0;
    EXPECT_THROW(gen_synthetic_corpus(cfg), Error);
}

TEST(SynthProperty, LargerOffsetsLowerInterEmotionMedian) {
    std::vector<double> medians;
    for (double sigma : {0.3, 0.6, 1.2}) {
        SynthConfig cfg;
        cfg.emotion_offset_scale = sigma;
        auto result = run_matchscore_experiment(gen_synthetic_corpus(cfg));
        std::vector<double> all;
        for (const auto& k : result.kinds)
            if (k.type == PairingKind::Type::InterEmotion) {
                auto v = result.values(k);
                all.insert(all.end(), v.begin(), v.end());
            }
        medians.push_back(box_stats(all).median);
    }
    EXPECT_GE(medians[0], medians[1]);
    EXPECT_GE(medians[1], medians[2]);
}

TEST(SynthProperty, GenuineAboveInterEmotionInExpectation) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SynthConfig cfg;
        cfg.seed = seed;
        auto result = run_matchscore_experiment(gen_synthetic_corpus(cfg));
        double genuine = box_stats(result.values(PairingKind::genuine())).median;
        for (const auto& k : result.kinds)
            if (k.type == PairingKind::Type::InterEmotion) {
                EXPECT_LT(box_stats(result.values(k)).median, genuine);
            }
    }
}
