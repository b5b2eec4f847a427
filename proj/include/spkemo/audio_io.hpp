#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spkemo/detail/binary_io.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

/// Nominal pipeline rate; every clip is resampled to it before framing.
inline constexpr int kNominalSampleRate = 22050;

/// Mono audio with amplitudes in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = kNominalSampleRate;
    std::string source_path;

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

namespace detail {

inline constexpr std::uint16_t kWaveFormatPcm = 0x0001;
inline constexpr std::uint16_t kWaveFormatFloat = 0x0003;
inline constexpr std::uint16_t kWaveFormatExtensible = 0xFFFE;

inline double decode_sample(const std::uint8_t* p, std::uint16_t tag, std::uint16_t bits) {
    if (tag == kWaveFormatPcm && bits == 16) {
        auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
        return v / 32768.0;
    }
    if (tag == kWaveFormatPcm && bits == 24) {
        std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000) v -= 0x1000000;
        return v / 8388608.0;
    }
    // IEEE float 32
    std::uint32_t raw = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                        (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    double v = std::bit_cast<float>(raw);
    if (!std::isfinite(v)) return 0.0;
    return std::clamp(v, -1.0, 1.0);
}

}  // namespace detail

/// Decode an in-memory RIFF/WAVE image. Accepts PCM-16, PCM-24 and IEEE float-32
/// (plain or WAVE_FORMAT_EXTENSIBLE); multi-channel input is averaged to mono.
inline AudioClip parse_wav(std::span<const std::uint8_t> bytes, std::string source = {}) {
    if (bytes.size() < 12) throw Error(ErrorCode::MalformedRiff, "file too small: " + source);
    detail::ByteReader r(bytes);
    if (r.bytes(4) != "RIFF") throw Error(ErrorCode::MalformedRiff, "missing RIFF magic: " + source);
    std::uint32_t riff_size = r.u32();
    if (r.bytes(4) != "WAVE") throw Error(ErrorCode::MalformedRiff, "missing WAVE id: " + source);
    if (riff_size < 4 || riff_size - 4 > r.remaining())
        throw Error(ErrorCode::MalformedRiff, "RIFF size exceeds file: " + source);

    bool have_fmt = false;
    std::uint16_t tag = 0, channels = 0, block_align = 0, bits = 0;
    std::uint32_t rate = 0;
    std::span<const std::uint8_t> data;
    bool have_data = false;

    while (r.remaining() >= 8) {
        std::string id = r.bytes(4);
        std::uint32_t size = r.u32();
        if (size > r.remaining()) throw Error(ErrorCode::MalformedRiff, "chunk '" + id + "' overruns file: " + source);
        std::size_t start = r.position();
        if (id == "fmt ") {
            if (size < 16) throw Error(ErrorCode::MalformedRiff, "fmt chunk too small: " + source);
            tag = r.u16();
            channels = r.u16();
            rate = r.u32();
            r.u32();  // byte rate
            block_align = r.u16();
            bits = r.u16();
            if (tag == detail::kWaveFormatExtensible) {
                if (size < 40) throw Error(ErrorCode::MalformedRiff, "extensible fmt chunk too small: " + source);
                r.u16();  // cbSize
                r.u16();  // valid bits
                r.u32();  // channel mask
                tag = r.u16();  // first two bytes of the sub-format GUID
            }
            have_fmt = true;
        } else if (id == "data") {
            data = bytes.subspan(start, size);
            have_data = true;
        }
        std::size_t skip = size + (size & 1u);
        std::size_t consumed = r.position() - start;
        std::size_t left = std::min<std::size_t>(skip - consumed, r.remaining());
        r.bytes(left);
    }

    if (!have_fmt) throw Error(ErrorCode::MalformedRiff, "missing fmt chunk: " + source);
    if (!have_data) throw Error(ErrorCode::MalformedRiff, "missing data chunk: " + source);

    bool supported = (tag == detail::kWaveFormatPcm && (bits == 16 || bits == 24)) ||
                     (tag == detail::kWaveFormatFloat && bits == 32);
    if (!supported)
        throw Error(ErrorCode::UnsupportedEncoding,
                    "format tag " + std::to_string(tag) + " with " + std::to_string(bits) + " bits: " + source);
    if (channels == 0 || rate == 0) throw Error(ErrorCode::MalformedRiff, "zero channels or sample rate: " + source);
    std::size_t sample_bytes = bits / 8;
    if (block_align != channels * sample_bytes)
        throw Error(ErrorCode::MalformedRiff, "block align inconsistent with channels/bits: " + source);

    std::size_t frames = data.size() / block_align;
    if (frames == 0) throw Error(ErrorCode::EmptyAudio, "no samples in data chunk: " + source);

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.source_path = std::move(source);
    clip.samples.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::uint8_t* p = data.data() + f * block_align;
        double sum = 0.0;
        for (std::size_t c = 0; c < channels; ++c) sum += detail::decode_sample(p + c * sample_bytes, tag, bits);
        clip.samples[f] = sum / channels;
    }
    return clip;
}

inline AudioClip read_wav(const std::string& path) {
    auto bytes = detail::read_file(path);
    return parse_wav(bytes, path);
}

/// Encode as a mono (or interleaved multi-channel) PCM-16 RIFF/WAVE image.
inline std::vector<std::uint8_t> encode_wav_pcm16(std::span<const double> interleaved, int sample_rate,
                                                  std::uint16_t channels = 1) {
    if (sample_rate <= 0 || channels == 0) throw Error(ErrorCode::InvalidArgument, "bad rate or channel count");
    std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
    detail::ByteWriter w;
    w.bytes("RIFF");
    w.u32(36 + data_bytes);
    w.bytes("WAVE");
    w.bytes("fmt ");
    w.u32(16);
    w.u16(detail::kWaveFormatPcm);
    w.u16(channels);
    w.u32(static_cast<std::uint32_t>(sample_rate));
    w.u32(static_cast<std::uint32_t>(sample_rate) * channels * 2);
    w.u16(static_cast<std::uint16_t>(channels * 2));
    w.u16(16);
    w.bytes("data");
    w.u32(data_bytes);
    for (double s : interleaved) {
        double q = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
        w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
    }
    return w.data();
}

inline void write_wav_pcm16(const AudioClip& clip, const std::string& path) {
    detail::write_file(path, encode_wav_pcm16(clip.samples, clip.sample_rate));
}

/// Linear-interpolation resampler. Output length is round(N * target / rate);
/// positions past the last input sample hold its value.
inline AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw Error(ErrorCode::InvalidArgument, "target rate must be positive");
    if (clip.sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "clip sample rate must be positive");
    if (target_rate == clip.sample_rate) return clip;

    const std::size_t n_in = clip.samples.size();
    const double ratio = static_cast<double>(clip.sample_rate) / target_rate;
    const auto n_out = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_in) * target_rate / static_cast<double>(clip.sample_rate)));

    AudioClip out;
    out.sample_rate = target_rate;
    out.source_path = clip.source_path;
    out.samples.resize(n_out);
    if (n_in == 0) return out;
    for (std::size_t k = 0; k < n_out; ++k) {
        double pos = static_cast<double>(k) * ratio;
        auto i0 = static_cast<std::size_t>(pos);
        if (i0 + 1 >= n_in) {
            out.samples[k] = clip.samples[n_in - 1];
            continue;
        }
        double frac = pos - static_cast<double>(i0);
        out.samples[k] = clip.samples[i0] + frac * (clip.samples[i0 + 1] - clip.samples[i0]);
    }
    return out;
}

}  // namespace spkemo
