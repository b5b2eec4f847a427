#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <unistd.h>

#include "spkemo/pipeline.hpp"

using namespace spkemo;
namespace fs = std::filesystem;

namespace {

class PipelineDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("spkemo_pipeline_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_tone(const std::string& name, double seconds, int rate, double freq) {
        AudioClip clip;
        clip.sample_rate = rate;
        auto n = static_cast<std::size_t>(seconds * rate);
        std::mt19937_64 rng(n);
        std::normal_distribution<double> g(0.0, 0.01);
        for (std::size_t i = 0; i < n; ++i)
            clip.samples.push_back(0.3 * std::sin(2.0 * std::numbers::pi * freq * i / rate) + g(rng));
        auto path = (dir_ / name).string();
        write_wav_pcm16(clip, path);
        return path;
    }

    fs::path dir_;
};

}  // namespace

TEST(Manifest, ParsesAndResolvesRelativePaths) {
    auto rows = parse_manifest(
        "path,speaker_id,utterance_id,emotion,sentence_id,split\n"
        "a.wav,s1,u1,ANG,IEO,train\n"
        "/abs/b.wav,s2,u2,neutral,,\n",
        "/data");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].path, "/data/a.wav");
    EXPECT_EQ(rows[0].emotion, EmotionLabel::Angry);
    EXPECT_EQ(rows[0].sentence_id, "IEO");
    EXPECT_EQ(rows[0].split, "train");
    EXPECT_EQ(rows[1].path, "/abs/b.wav");
    EXPECT_FALSE(rows[1].sentence_id.has_value());
}

TEST(Manifest, Errors) {
    try {
        parse_manifest("path,speaker_id,utterance_id,emotion\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyManifest);
    }
    EXPECT_THROW(parse_manifest(""), Error);
    EXPECT_THROW(parse_manifest("path,speaker_id,utterance_id,emotion\na,s,u,ANG\nb,s,u,SAD\n"), Error);
    try {
        parse_manifest("path,speaker_id,utterance_id,emotion\na,s,u,bored\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownLabel);
    }
    try {
        extract_manifest({}, EmbedderConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyManifest);
    }
}

TEST_F(PipelineDir, ThreeWavsOneTooShort) {
    write_tone("a.wav", 1.2, 22050, 220.0);
    write_tone("b.wav", 0.5, 22050, 330.0);
    write_tone("c.wav", 1.5, 16000, 440.0);  // resampled to 22050 before framing
    detail::write_text_file((dir_ / "manifest.csv").string(),
                            "path,speaker_id,utterance_id,emotion,sentence_id,split\n"
                            "a.wav,s1,u1,Angry,IEO,\n"
                            "b.wav,s1,u2,Sad,IEO,\n"
                            "c.wav,s2,u3,Neutral,TIE,\n");
    auto manifest = load_manifest((dir_ / "manifest.csv").string());
    EmbedderConfig cfg;
    auto result = extract_manifest(manifest, cfg);
    ASSERT_EQ(result.rows.size(), 2u);
    ASSERT_EQ(result.skipped.size(), 1u);
    EXPECT_EQ(result.skipped[0].utterance_id, "u2");
    EXPECT_EQ(result.skipped[0].reason, "TooShort");
    EXPECT_EQ(result.rows[0].utterance_id, "u1");
    EXPECT_EQ(result.rows[1].utterance_id, "u3");
    for (const auto& r : result.rows) {
        EXPECT_EQ(r.embedding.dim(), 256u);
        EXPECT_LE(l2_norm(r.embedding.view()), 1.0 + 1e-12);  // mean of unit vectors
    }

    // Independent recomputation of u1.
    auto clip = read_wav((dir_ / "a.wav").string());
    SpectralBaselineBackend backend(cfg);
    EXPECT_EQ(result.rows[0].embedding, extract_utterance_embedding(clip, cfg, backend));

    auto again = extract_manifest(manifest, cfg);
    EXPECT_EQ(encode_embeddings(again.rows), encode_embeddings(result.rows));

    auto report = skip_report_csv(result.skipped);
    EXPECT_EQ(report, "utterance_id,path,reason\nu2," + (dir_ / "b.wav").string() + ",TooShort\n");
    detail::write_text_file((dir_ / "skips.csv").string(), report);
    EXPECT_EQ(count_skip_report((dir_ / "skips.csv").string()), 1u);
}

TEST_F(PipelineDir, UnreadableRowsAreSkipped) {
    detail::write_text_file((dir_ / "junk.wav").string(), "not a wav file at all");
    auto manifest = parse_manifest("path,speaker_id,utterance_id,emotion\njunk.wav,s,u1,ANG\nmissing.wav,s,u2,SAD\n",
                                   dir_.string());
    auto result = extract_manifest(manifest, EmbedderConfig{});
    EXPECT_TRUE(result.rows.empty());
    ASSERT_EQ(result.skipped.size(), 2u);
    EXPECT_EQ(result.skipped[0].reason, "MalformedRiff");
    EXPECT_EQ(result.skipped[1].reason, "Io");
}

TEST_F(PipelineDir, FileBackendLooksUpPrecomputed) {
    std::vector<LabeledEmbedding> pre{{Embedding{0.5, 0.25}, "x", "u1", EmotionLabel::Neutral, std::nullopt},
                                      {Embedding{-1.0, 2.0}, "x", "u2", EmotionLabel::Neutral, std::nullopt}};
    save_embeddings(pre, (dir_ / "pre.emb1").string());
    auto manifest = parse_manifest(
        "path,speaker_id,utterance_id,emotion,sentence_id\npre.emb1,s9,u2,Happy,IEO\npre.emb1,s9,u3,Sad,IEO\n",
        dir_.string());
    EmbedderConfig cfg;
    cfg.backend = "file";
    auto result = extract_manifest(manifest, cfg);
    ASSERT_EQ(result.rows.size(), 1u);
    EXPECT_EQ(result.rows[0].embedding, (Embedding{-1.0, 2.0}));
    EXPECT_EQ(result.rows[0].speaker_id, "s9");
    EXPECT_EQ(result.rows[0].emotion, EmotionLabel::Happy);
    EXPECT_EQ(result.skipped.size(), 1u);
}

TEST(Config, DefaultsAndHash) {
    PipelineConfig cfg;
    auto j = cfg.to_json();
    EXPECT_EQ(j["frame_len"], 22000);
    EXPECT_EQ(j["hop"], 220);
    EXPECT_EQ(j["dim"], 256);
    EXPECT_EQ(j["c"], 1000.0);
    EXPECT_EQ(j["gamma"], 0.1);
    EXPECT_EQ(j["first_class"], "Sad");
    EXPECT_EQ(cfg.hash().size(), 16u);
    EXPECT_EQ(cfg.hash(), PipelineConfig{}.hash());
    auto other = cfg;
    other.train.gamma = 0.2;
    EXPECT_NE(other.hash(), cfg.hash());
}

TEST(Config, JsonOverrides) {
    PipelineConfig cfg;
    apply_config_json(cfg, nlohmann::json::parse(R"({"c": 10, "gamma": 0.5, "first_class": "neutral", "seed": 9})"));
    EXPECT_EQ(cfg.train.C, 10.0);
    EXPECT_EQ(cfg.train.gamma, 0.5);
    EXPECT_EQ(cfg.first_class, EmotionLabel::Neutral);
    EXPECT_EQ(cfg.split.seed, 9u);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse(R"({"bogus": 1})")), Error);
    EXPECT_THROW(apply_config_json(cfg, nlohmann::json::parse("[1,2]")), Error);
}
