#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkemo/audio_io.hpp"
#include "spkemo/embedding.hpp"
#include "spkemo/error.hpp"

namespace spkemo {

struct EmbedderConfig {
    std::size_t frame_len = 22000;  // samples, ~1 s at the nominal rate
    std::size_t hop = 220;          // samples, ~10 ms
    std::size_t dim = 256;
    std::string backend = "spectral-baseline";
    std::uint64_t seed = 42;
    int sample_rate = kNominalSampleRate;

    void validate() const {
        if (frame_len == 0) throw Error(ErrorCode::InvalidArgument, "frame_len must be positive");
        if (hop == 0 || hop > frame_len) throw Error(ErrorCode::InvalidArgument, "hop must be in (0, frame_len]");
        if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be positive");
        if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample_rate must be positive");
    }
};

inline std::size_t frame_count(std::size_t n_samples, std::size_t frame_len, std::size_t hop) {
    if (n_samples < frame_len) return 0;
    return (n_samples - frame_len) / hop + 1;
}

/// Windows of frame_len samples starting at 0, hop, 2*hop, ...; the views borrow
/// from `samples`. Inputs shorter than one frame raise TooShort (the utterance is
/// discarded by callers).
inline std::vector<std::span<const double>> frame_utterance(std::span<const double> samples, std::size_t frame_len,
                                                            std::size_t hop) {
    if (frame_len == 0 || hop == 0) throw Error(ErrorCode::InvalidArgument, "frame_len and hop must be positive");
    if (samples.size() < frame_len)
        throw Error(ErrorCode::TooShort, std::to_string(samples.size()) + " samples < frame length " +
                                             std::to_string(frame_len));
    std::size_t n = frame_count(samples.size(), frame_len, hop);
    std::vector<std::span<const double>> frames;
    frames.reserve(n);
    for (std::size_t k = 0; k < n; ++k) frames.push_back(samples.subspan(k * hop, frame_len));
    return frames;
}

inline std::vector<std::span<const double>> frame_utterance(const AudioClip& clip, std::size_t frame_len,
                                                            std::size_t hop) {
    return frame_utterance(std::span<const double>(clip.samples), frame_len, hop);
}

/// Frame -> embedding transform. Implementations must be deterministic.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string_view name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Embedding embed(std::span<const double> frame) const = 0;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters, row-major [bands x (fft_size/2 + 1)], spanning 0 Hz to Nyquist.
inline std::vector<double> mel_filterbank(std::size_t bands, std::size_t fft_size, int sample_rate) {
    const std::size_t bins = fft_size / 2 + 1;
    const double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(bands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(bands + 1));

    std::vector<double> fb(bands * bins, 0.0);
    for (std::size_t m = 0; m < bands; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (std::size_t k = 0; k < bins; ++k) {
            double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
            double w = 0.0;
            if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
            else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
            fb[m * bins + k] = w;
        }
    }
    return fb;
}

}  // namespace detail

/// Built-in stand-in for a learned speaker encoder: log-mel band statistics
/// (mean and standard deviation per band over a 512/256 Hann STFT) projected to
/// `dim` by a seeded Gaussian matrix, then L2-normalized.
class SpectralBaselineBackend final : public EmbeddingBackend {
public:
    static constexpr std::size_t kFftSize = 512;
    static constexpr std::size_t kStftHop = 256;
    static constexpr std::size_t kMelBands = 40;
    static constexpr double kLogFloor = 1e-10;

    explicit SpectralBaselineBackend(const EmbedderConfig& config)
        : dim_(config.dim), frame_len_(config.frame_len) {
        config.validate();
        if (frame_len_ < kFftSize)
            throw Error(ErrorCode::InvalidArgument, "frame_len must be at least the STFT window (512)");

        window_.resize(kFftSize);
        for (std::size_t i = 0; i < kFftSize; ++i)
            window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / kFftSize);
        filterbank_ = detail::mel_filterbank(kMelBands, kFftSize, config.sample_rate);

        std::mt19937_64 rng(config.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        projection_.resize(dim_ * 2 * kMelBands);
        for (double& v : projection_) v = normal(rng);

        std::unique_ptr<double, detail::FftwFree> in(fftw_alloc_real(kFftSize));
        std::unique_ptr<fftw_complex, detail::FftwFree> out(fftw_alloc_complex(kFftSize / 2 + 1));
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), in.get(), out.get(), FFTW_ESTIMATE);
    }

    ~SpectralBaselineBackend() override {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }

    SpectralBaselineBackend(const SpectralBaselineBackend&) = delete;
    SpectralBaselineBackend& operator=(const SpectralBaselineBackend&) = delete;

    std::string_view name() const override { return "spectral-baseline"; }
    std::size_t dim() const override { return dim_; }

    /// The 80 log-mel statistics before projection.
    std::vector<double> band_statistics(std::span<const double> frame) const {
        if (frame.size() != frame_len_)
            throw Error(ErrorCode::DimMismatch, "frame has " + std::to_string(frame.size()) + " samples, expected " +
                                                    std::to_string(frame_len_));
        constexpr std::size_t bins = kFftSize / 2 + 1;
        std::unique_ptr<double, detail::FftwFree> in(fftw_alloc_real(kFftSize));
        std::unique_ptr<fftw_complex, detail::FftwFree> out(fftw_alloc_complex(bins));

        const std::size_t n_sub = frame_count(frame.size(), kFftSize, kStftHop);
        std::vector<double> sum(kMelBands, 0.0), sum_sq(kMelBands, 0.0);
        std::vector<double> power(bins);
        for (std::size_t t = 0; t < n_sub; ++t) {
            const double* src = frame.data() + t * kStftHop;
            for (std::size_t i = 0; i < kFftSize; ++i) in.get()[i] = src[i] * window_[i];
            fftw_execute_dft_r2c(plan_, in.get(), out.get());
            for (std::size_t k = 0; k < bins; ++k) {
                double re = out.get()[k][0], im = out.get()[k][1];
                power[k] = re * re + im * im;
            }
            for (std::size_t m = 0; m < kMelBands; ++m) {
                double e = 0.0;
                const double* w = filterbank_.data() + m * bins;
                for (std::size_t k = 0; k < bins; ++k) e += w[k] * power[k];
                double le = std::log(e + kLogFloor);
                sum[m] += le;
                sum_sq[m] += le * le;
            }
        }

        std::vector<double> stats(2 * kMelBands);
        const double n = static_cast<double>(n_sub);
        for (std::size_t m = 0; m < kMelBands; ++m) {
            double mean = sum[m] / n;
            double var = std::max(0.0, sum_sq[m] / n - mean * mean);
            stats[m] = mean;
            stats[kMelBands + m] = std::sqrt(var);
        }
        return stats;
    }

    Embedding embed(std::span<const double> frame) const override {
        auto stats = band_statistics(frame);
        std::vector<double> out(dim_, 0.0);
        const std::size_t width = stats.size();
        for (std::size_t r = 0; r < dim_; ++r) {
            const double* row = projection_.data() + r * width;
            double acc = 0.0;
            for (std::size_t c = 0; c < width; ++c) acc += row[c] * stats[c];
            out[r] = acc;
        }
        normalize_in_place(out);
        return Embedding(std::move(out));
    }

private:
    std::size_t dim_;
    std::size_t frame_len_;
    std::vector<double> window_;
    std::vector<double> filterbank_;
    std::vector<double> projection_;  // dim x 80, row-major
    fftw_plan plan_ = nullptr;
};

/// Component-wise mean of a non-empty list of equal-dimension embeddings.
inline Embedding average_embedding(std::span<const Embedding> embeddings) {
    if (embeddings.empty()) throw Error(ErrorCode::EmptyInput, "cannot average zero embeddings");
    const std::size_t d = embeddings.front().dim();
    std::vector<double> acc(d, 0.0);
    for (const auto& e : embeddings) {
        if (e.dim() != d) throw Error(ErrorCode::DimMismatch, "embeddings disagree on dimension");
        for (std::size_t i = 0; i < d; ++i) acc[i] += e.values[i];
    }
    const double n = static_cast<double>(embeddings.size());
    for (double& v : acc) v /= n;
    return Embedding(std::move(acc));
}

/// frame -> per-frame backend embedding -> mean. The clip must already be at
/// the nominal rate; clips shorter than one frame raise TooShort.
inline Embedding extract_utterance_embedding(const AudioClip& clip, const EmbedderConfig& config,
                                             const EmbeddingBackend& backend) {
    config.validate();
    if (clip.sample_rate != config.sample_rate)
        throw Error(ErrorCode::InvalidArgument, "clip at " + std::to_string(clip.sample_rate) +
                                                    " Hz; resample to " + std::to_string(config.sample_rate) +
                                                    " first");
    auto frames = frame_utterance(clip, config.frame_len, config.hop);
    std::vector<Embedding> per_frame;
    per_frame.reserve(frames.size());
    for (auto f : frames) per_frame.push_back(backend.embed(f));
    return average_embedding(per_frame);
}

}  // namespace spkemo
