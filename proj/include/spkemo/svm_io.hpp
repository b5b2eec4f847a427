#pragma once

#include <string>
#include <vector>

#include "spkemo/detail/binary_io.hpp"
#include "spkemo/svm.hpp"

namespace spkemo {

// SVM1 container (little-endian):
//   "SVM1" | u8 kind (0 = binary, 1 = multiclass) | u32 dim | body
// binary body:     f64 gamma | f64 bias | u32 n_sv | n_sv x f64 coef | n_sv x dim x f64 sv
// multiclass body: u32 k | k x i32 class | u32 n_pairs |
//                  n_pairs x { u32 first | u32 second | binary body }

namespace detail {

inline constexpr std::uint8_t kSvmKindBinary = 0;
inline constexpr std::uint8_t kSvmKindMulticlass = 1;

inline void write_binary_body(ByteWriter& w, const BinarySvmModel& m, std::size_t dim) {
    w.f64(m.gamma);
    w.f64(m.bias);
    w.u32(static_cast<std::uint32_t>(m.support_vectors.size()));
    for (double c : m.dual_coefs) w.f64(c);
    for (const auto& sv : m.support_vectors) {
        if (sv.dim() != dim) throw Error(ErrorCode::DimMismatch, "support vector dim differs from model dim");
        for (double v : sv.values) w.f64(v);
    }
}

inline BinarySvmModel read_binary_body(ByteReader& r, std::size_t dim) {
    BinarySvmModel m;
    m.gamma = r.f64();
    m.bias = r.f64();
    std::uint32_t n_sv = r.u32();
    if (static_cast<std::size_t>(n_sv) * (dim + 1) * 8 > r.remaining())
        throw Error(ErrorCode::TruncatedFile, "support vector block exceeds file");
    m.dual_coefs.resize(n_sv);
    for (auto& c : m.dual_coefs) c = r.f64();
    m.support_vectors.resize(n_sv);
    for (auto& sv : m.support_vectors) {
        sv.values.resize(dim);
        for (auto& v : sv.values) v = r.f64();
    }
    return m;
}

inline std::uint8_t read_svm_header(ByteReader& r, std::uint32_t& dim) {
    if (r.remaining() < 4 || r.bytes(4) != "SVM1") throw Error(ErrorCode::BadMagic, "not an SVM1 model");
    std::uint8_t kind = r.u8();
    dim = r.u32();
    return kind;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_model(const BinarySvmModel& m) {
    detail::ByteWriter w;
    w.bytes("SVM1");
    w.u8(detail::kSvmKindBinary);
    w.u32(static_cast<std::uint32_t>(m.dim()));
    detail::write_binary_body(w, m, m.dim());
    return w.data();
}

inline std::vector<std::uint8_t> encode_model(const MulticlassSvmModel& m) {
    detail::ByteWriter w;
    w.bytes("SVM1");
    w.u8(detail::kSvmKindMulticlass);
    const std::size_t dim = m.dim();
    w.u32(static_cast<std::uint32_t>(dim));
    w.u32(static_cast<std::uint32_t>(m.classes.size()));
    for (int c : m.classes) w.i32(c);
    w.u32(static_cast<std::uint32_t>(m.pairwise_models.size()));
    for (const auto& p : m.pairwise_models) {
        w.u32(static_cast<std::uint32_t>(p.first));
        w.u32(static_cast<std::uint32_t>(p.second));
        detail::write_binary_body(w, p.model, dim);
    }
    return w.data();
}

inline BinarySvmModel decode_binary_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    std::uint32_t dim = 0;
    if (detail::read_svm_header(r, dim) != detail::kSvmKindBinary)
        throw Error(ErrorCode::InvalidArgument, "SVM1 file holds a multiclass model, expected binary");
    return detail::read_binary_body(r, dim);
}

inline MulticlassSvmModel decode_multiclass_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    std::uint32_t dim = 0;
    if (detail::read_svm_header(r, dim) != detail::kSvmKindMulticlass)
        throw Error(ErrorCode::InvalidArgument, "SVM1 file holds a binary model, expected multiclass");
    MulticlassSvmModel m;
    std::uint32_t k = r.u32();
    if (static_cast<std::size_t>(k) * 4 > r.remaining()) throw Error(ErrorCode::TruncatedFile, "class list");
    m.classes.resize(k);
    for (auto& c : m.classes) c = r.i32();
    std::uint32_t n_pairs = r.u32();
    for (std::uint32_t p = 0; p < n_pairs; ++p) {
        PairwiseModel pm;
        pm.first = r.u32();
        pm.second = r.u32();
        if (pm.first >= k || pm.second >= k) throw Error(ErrorCode::InvalidArgument, "pair index out of range");
        pm.model = detail::read_binary_body(r, dim);
        m.pairwise_models.push_back(std::move(pm));
    }
    return m;
}

inline void save_model(const BinarySvmModel& m, const std::string& path) {
    detail::write_file(path, encode_model(m));
}

inline void save_model(const MulticlassSvmModel& m, const std::string& path) {
    detail::write_file(path, encode_model(m));
}

inline BinarySvmModel load_binary_model(const std::string& path) {
    return decode_binary_model(detail::read_file(path));
}

inline MulticlassSvmModel load_multiclass_model(const std::string& path) {
    return decode_multiclass_model(detail::read_file(path));
}

}  // namespace spkemo
