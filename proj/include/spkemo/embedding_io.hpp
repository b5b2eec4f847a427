#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "spkemo/detail/binary_io.hpp"
#include "spkemo/detail/csv.hpp"
#include "spkemo/emotion.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

// EMB1 layout (little-endian):
//   "EMB1" | u32 dim | u32 rows |
//   rows x { str16 speaker | str16 utterance | u8 emotion | str16 sentence | dim x f32 }
// where str16 is a u16 byte length followed by UTF-8 bytes. An empty sentence
// string means "no sentence id".

inline std::vector<std::uint8_t> encode_embeddings(const std::vector<LabeledEmbedding>& rows, std::size_t dim = 0) {
    if (!rows.empty()) dim = rows.front().embedding.dim();
    for (const auto& r : rows)
        if (r.embedding.dim() != dim)
            throw Error(ErrorCode::DimMismatch, "row '" + r.utterance_id + "' has dim " +
                                                    std::to_string(r.embedding.dim()) + ", expected " +
                                                    std::to_string(dim));
    detail::ByteWriter w;
    w.bytes("EMB1");
    w.u32(static_cast<std::uint32_t>(dim));
    w.u32(static_cast<std::uint32_t>(rows.size()));
    for (const auto& r : rows) {
        w.str16(r.speaker_id);
        w.str16(r.utterance_id);
        w.u8(static_cast<std::uint8_t>(code(r.emotion)));
        w.str16(r.sentence_id.value_or(""));
        for (double v : r.embedding.values) w.f32(static_cast<float>(v));
    }
    return w.data();
}

inline std::vector<LabeledEmbedding> decode_embeddings(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::string(bytes.begin(), bytes.begin() + 4) != "EMB1")
        throw Error(ErrorCode::BadMagic, "not an EMB1 file");
    detail::ByteReader r(bytes.subspan(4));
    const std::uint32_t dim = r.u32();
    const std::uint32_t count = r.u32();
    if (count > 0 && dim == 0) throw Error(ErrorCode::DimMismatch, "rows present but dim is 0");
    std::vector<LabeledEmbedding> rows;
    rows.reserve(std::min<std::size_t>(count, r.remaining()));
    for (std::uint32_t i = 0; i < count; ++i) {
        LabeledEmbedding row;
        row.speaker_id = r.str16();
        row.utterance_id = r.str16();
        row.emotion = emotion_from_code(r.u8());
        auto sentence = r.str16();
        if (!sentence.empty()) row.sentence_id = std::move(sentence);
        row.embedding.values.resize(dim);
        for (auto& v : row.embedding.values) v = r.f32();
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Returns the number of rows written.
inline std::size_t save_embeddings(const std::vector<LabeledEmbedding>& rows, const std::string& path,
                                   std::size_t dim = 0) {
    detail::write_file(path, encode_embeddings(rows, dim));
    return rows.size();
}

inline std::vector<LabeledEmbedding> load_embeddings(const std::string& path) {
    auto bytes = detail::read_file(path);
    return decode_embeddings(bytes);
}

inline std::string embeddings_to_csv(const std::vector<LabeledEmbedding>& rows) {
    const std::size_t dim = rows.empty() ? 0 : rows.front().embedding.dim();
    std::string out = "speaker_id,utterance_id,emotion,sentence_id";
    for (std::size_t i = 0; i < dim; ++i) out += ",v" + std::to_string(i);
    out += '\n';
    char buf[32];
    for (const auto& r : rows) {
        if (r.embedding.dim() != dim) throw Error(ErrorCode::DimMismatch, "inconsistent dims in CSV export");
        detail::require_csv_safe(r.speaker_id);
        detail::require_csv_safe(r.utterance_id);
        detail::require_csv_safe(r.sentence_id.value_or(""));
        out += r.speaker_id + ',' + r.utterance_id + ',' + std::string(to_string(r.emotion)) + ',' +
               r.sentence_id.value_or("");
        for (double v : r.embedding.values) {
            std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(static_cast<float>(v)));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

/// Values are read back at float32 precision, matching EMB1.
inline std::vector<LabeledEmbedding> embeddings_from_csv(std::string_view text) {
    auto table = detail::parse_csv(text);
    const std::size_t spk = table.column("speaker_id"), utt = table.column("utterance_id"),
                      emo = table.column("emotion"), sen = table.column("sentence_id");
    std::vector<std::size_t> value_cols;
    for (std::size_t i = 0;; ++i) {
        auto it = std::find(table.header.begin(), table.header.end(), "v" + std::to_string(i));
        if (it == table.header.end()) break;
        value_cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
    std::vector<LabeledEmbedding> rows;
    for (const auto& f : table.rows) {
        LabeledEmbedding row;
        row.speaker_id = f[spk];
        row.utterance_id = f[utt];
        row.emotion = parse_emotion(f[emo]);
        if (!f[sen].empty()) row.sentence_id = f[sen];
        row.embedding.values.reserve(value_cols.size());
        for (std::size_t c : value_cols) row.embedding.values.push_back(static_cast<float>(std::stod(f[c])));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Loads EMB1 or, when the file lacks the EMB1 magic and ends in .csv, the CSV export.
inline std::vector<LabeledEmbedding> load_embeddings_any(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
        return embeddings_from_csv(detail::read_text_file(path));
    return load_embeddings(path);
}

/// Utterance-level lookup over precomputed embeddings (e.g. exports from an
/// external speaker encoder).
class PrecomputedEmbeddings {
public:
    explicit PrecomputedEmbeddings(std::vector<LabeledEmbedding> rows) {
        for (auto& r : rows) {
            if (dim_ == 0) dim_ = r.embedding.dim();
            if (r.embedding.dim() != dim_) throw Error(ErrorCode::DimMismatch, "inconsistent precomputed dims");
            by_utterance_.emplace(r.utterance_id, std::move(r.embedding));
        }
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return by_utterance_.size(); }

    const Embedding* find(const std::string& utterance_id) const {
        auto it = by_utterance_.find(utterance_id);
        return it == by_utterance_.end() ? nullptr : &it->second;
    }

private:
    std::size_t dim_ = 0;
    std::map<std::string, Embedding> by_utterance_;
};

}  // namespace spkemo
