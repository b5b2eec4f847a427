#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkemo/audio_io.hpp"
#include "spkemo/detail/binary_io.hpp"
#include "spkemo/detail/csv.hpp"
#include "spkemo/embed.hpp"
#include "spkemo/embedding_io.hpp"
#include "spkemo/emotion.hpp"
#include "spkemo/evaluation.hpp"
#include "spkemo/svm.hpp"

namespace spkemo {

// ---------------------------------------------------------------------------
// Run configuration: a flat JSON object; every key is optional.

struct PipelineConfig {
    EmbedderConfig embedder;
    TrainParams train;
    SplitSpec split;
    EmotionLabel first_class = EmotionLabel::Sad;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["frame_len"] = embedder.frame_len;
        j["hop"] = embedder.hop;
        j["dim"] = embedder.dim;
        j["backend"] = embedder.backend;
        j["sample_rate"] = embedder.sample_rate;
        j["seed"] = split.seed;
        j["embed_seed"] = embedder.seed;
        j["c"] = train.C;
        j["gamma"] = train.gamma;
        j["kkt_tol"] = train.kkt_tol;
        j["max_iter"] = train.max_iter;
        j["train_fraction"] = split.train_fraction;
        j["speaker_disjoint"] = split.speaker_disjoint;
        j["first_class"] = std::string(to_string(first_class));
        return j;
    }

    /// Hex FNV-1a of the canonical JSON form.
    std::string hash() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a64(to_json().dump())));
        return buf;
    }
};

inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "frame_len") cfg.embedder.frame_len = value.get<std::size_t>();
        else if (key == "hop") cfg.embedder.hop = value.get<std::size_t>();
        else if (key == "dim") cfg.embedder.dim = value.get<std::size_t>();
        else if (key == "backend") cfg.embedder.backend = value.get<std::string>();
        else if (key == "sample_rate") cfg.embedder.sample_rate = value.get<int>();
        else if (key == "seed") cfg.split.seed = value.get<std::uint64_t>();
        else if (key == "embed_seed") cfg.embedder.seed = value.get<std::uint64_t>();
        else if (key == "c") cfg.train.C = value.get<double>();
        else if (key == "gamma") cfg.train.gamma = value.get<double>();
        else if (key == "kkt_tol") cfg.train.kkt_tol = value.get<double>();
        else if (key == "max_iter") cfg.train.max_iter = value.get<std::size_t>();
        else if (key == "train_fraction") cfg.split.train_fraction = value.get<double>();
        else if (key == "speaker_disjoint") cfg.split.speaker_disjoint = value.get<bool>();
        else if (key == "first_class") cfg.first_class = parse_emotion(value.get<std::string>());
        else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
}

inline PipelineConfig load_config_file(const std::string& path) {
    PipelineConfig cfg;
    try {
        apply_config_json(cfg, nlohmann::json::parse(detail::read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "config " + path + ": " + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Manifest: CSV with header path,speaker_id,utterance_id,emotion,sentence_id,split

struct ManifestRow {
    std::string path;
    std::string speaker_id;
    std::string utterance_id;
    EmotionLabel emotion = EmotionLabel::Neutral;
    std::optional<std::string> sentence_id;
    std::optional<std::string> split;
};

/// Relative paths are resolved against base_dir.
inline std::vector<ManifestRow> parse_manifest(std::string_view text, const std::string& base_dir = {}) {
    auto table = detail::parse_csv(text);
    if (table.header.empty() || table.rows.empty()) throw Error(ErrorCode::EmptyManifest, "manifest has no rows");
    const std::size_t c_path = table.column("path"), c_spk = table.column("speaker_id"),
                      c_utt = table.column("utterance_id"), c_emo = table.column("emotion");
    auto optional_col = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (table.header[i] == name) return i;
        return std::nullopt;
    };
    auto c_sen = optional_col("sentence_id");
    auto c_split = optional_col("split");

    std::vector<ManifestRow> rows;
    std::set<std::string> seen;
    for (const auto& f : table.rows) {
        ManifestRow r;
        std::filesystem::path p(f[c_path]);
        r.path = (p.is_relative() && !base_dir.empty()) ? (std::filesystem::path(base_dir) / p).string() : p.string();
        r.speaker_id = f[c_spk];
        r.utterance_id = f[c_utt];
        r.emotion = parse_emotion(f[c_emo]);
        if (c_sen && !f[*c_sen].empty()) r.sentence_id = f[*c_sen];
        if (c_split && !f[*c_split].empty()) r.split = f[*c_split];
        if (!seen.insert(r.utterance_id).second)
            throw Error(ErrorCode::InvalidArgument, "duplicate utterance_id '" + r.utterance_id + "'");
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ManifestRow> load_manifest(const std::string& path) {
    auto base = std::filesystem::path(path).parent_path().string();
    return parse_manifest(detail::read_text_file(path), base);
}

// ---------------------------------------------------------------------------
// Batch extraction

struct SkipEntry {
    std::string utterance_id;
    std::string path;
    std::string reason;  // ErrorCode name
    std::string detail;
};

struct ExtractionResult {
    std::vector<LabeledEmbedding> rows;
    std::vector<SkipEntry> skipped;
};

inline std::unique_ptr<EmbeddingBackend> make_backend(const EmbedderConfig& config) {
    if (config.backend == "spectral-baseline") return std::make_unique<SpectralBaselineBackend>(config);
    throw Error(ErrorCode::InvalidArgument, "no frame-level backend named '" + config.backend + "'");
}

/// One embedding per surviving manifest row, in manifest order. Rows that fail
/// (too short, unreadable, unsupported) are listed in `skipped`.
/// Backend "file": each row's path names an EMB1/CSV file of precomputed
/// utterance embeddings, looked up by utterance_id.
inline ExtractionResult extract_manifest(const std::vector<ManifestRow>& manifest, const EmbedderConfig& config) {
    if (manifest.empty()) throw Error(ErrorCode::EmptyManifest, "manifest has no rows");
    config.validate();
    ExtractionResult result;

    std::unique_ptr<EmbeddingBackend> backend;
    std::map<std::string, PrecomputedEmbeddings> precomputed;
    const bool from_file = config.backend == "file";
    if (!from_file) backend = make_backend(config);

    for (const auto& m : manifest) {
        try {
            LabeledEmbedding row;
            row.speaker_id = m.speaker_id;
            row.utterance_id = m.utterance_id;
            row.emotion = m.emotion;
            row.sentence_id = m.sentence_id;
            if (from_file) {
                auto it = precomputed.find(m.path);
                if (it == precomputed.end())
                    it = precomputed.emplace(m.path, PrecomputedEmbeddings(load_embeddings_any(m.path))).first;
                const Embedding* e = it->second.find(m.utterance_id);
                if (!e) throw Error(ErrorCode::EmptyInput, "utterance not present in " + m.path);
                row.embedding = *e;
            } else {
                auto clip = resample(read_wav(m.path), config.sample_rate);
                row.embedding = extract_utterance_embedding(clip, config, *backend);
            }
            result.rows.push_back(std::move(row));
        } catch (const Error& e) {
            result.skipped.push_back({m.utterance_id, m.path, std::string(to_string(e.code())), e.what()});
        }
    }
    return result;
}

inline std::string skip_report_csv(const std::vector<SkipEntry>& skipped) {
    std::string out = "utterance_id,path,reason\n";
    for (const auto& s : skipped) out += s.utterance_id + "," + s.path + "," + s.reason + "\n";
    return out;
}

inline std::size_t count_skip_report(const std::string& path) {
    auto table = detail::parse_csv(detail::read_text_file(path));
    return table.rows.size();
}

}  // namespace spkemo
