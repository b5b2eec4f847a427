// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "spkemo/spkemo.hpp"
#include "support/metric_fixture.hpp"
#include "support/qp_oracle.hpp"
#include "support/svm_checks.hpp"

using namespace spkemo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int g_failed = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++g_failed;
    std::printf("%s  %2d  %-28s %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EmotionLabel nearest_centroid(const std::vector<LabeledEmbedding>& train, const Embedding& x) {
    std::array<std::vector<double>, 4> sum;
    std::array<double, 4> count{};
    for (auto& s : sum) s.assign(x.dim(), 0.0);
    for (const auto& r : train) {
        std::size_t c = 0;
        while (kFourClasses[c] != r.emotion) ++c;
        for (std::size_t k = 0; k < x.dim(); ++k) sum[c][k] += r.embedding[k];
        count[c] += 1;
    }
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < 4; ++c) {
        double d = 0.0;
        for (std::size_t k = 0; k < x.dim(); ++k) d += std::pow(x[k] - sum[c][k] / count[c], 2);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return kFourClasses[best];
}

DataSplit four_class_split(const SynthConfig& cfg) {
    auto rows = filter_emotions(gen_synthetic_corpus(cfg), kFourClasses);
    return split_speaker_disjoint(rows, SplitSpec{});
}

double recall_of(EmotionLabel e, const std::vector<LabeledEmbedding>& test,
                 const std::function<EmotionLabel(const Embedding&)>& predict) {
    std::size_t hit = 0, total = 0;
    for (const auto& r : test)
        if (r.emotion == e) {
            ++total;
            hit += predict(r.embedding) == e;
        }
    return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

Outcome svm_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    double worst_rel = 0.0;
    std::size_t kkt_bad = 0;
    for (int t = 0; t < 50; ++t) {
        auto inst = testkit::random_instance(rng);
        TrainParams p;
        p.C = inst.C;
        p.gamma = inst.gamma;
        auto sol = solve_smo(inst.x, inst.y, p);
        auto ref = oracle::solve(inst.raw, inst.y, inst.C, inst.gamma);
        worst_rel = std::max(worst_rel, std::abs(sol.dual_objective - ref.objective) / std::abs(ref.objective));
        kkt_bad += testkit::kkt_audit(inst, sol, 1e-3).violations > 0;
    }
    double secs = seconds_since(t0);
    return {worst_rel <= 1e-4 && kkt_bad == 0 && secs < 30.0,
            fmt("worst rel gap %.2e, KKT failures %zu/50", worst_rel, kkt_bad)};
}

Outcome two_point() {
    double worst = 0.0;
    for (double d2 : {0.25, 1.0, 4.0}) {
        std::vector<Embedding> x{{0.0, 0.0}, {std::sqrt(d2), 0.0}};
        std::vector<int> y{1, -1};
        TrainParams p;
        auto sol = solve_smo(x, y, p);
        auto model = model_from_solution(x, y, sol, p.gamma);
        double expected = 1.0 / (1.0 - std::exp(-p.gamma * d2));
        std::vector<double> mid{std::sqrt(d2) / 2.0, 0.0};
        worst = std::max({worst, std::abs(sol.alpha[0] - expected), std::abs(sol.alpha[1] - expected),
                          std::abs(sol.bias), std::abs(decision_function(model, mid))});
    }
    return {worst <= 1e-6, fmt("max abs error %.2e over |dx|^2 in {0.25, 1, 4}", worst)};
}

Outcome xor_case() {
    std::vector<Embedding> x{{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}};
    std::vector<int> y{1, 1, -1, -1};
    TrainParams p;
    p.gamma = 0.5;
    p.C = 1000.0;
    auto model = train_binary_smo(x, y, p);
    int correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i) correct += y[i] * decision_function(model, x[i].view()) > 0.0;
    return {correct == 4, fmt("training accuracy %d/4", correct)};
}

Outcome flat_pipeline() {
    auto t0 = std::chrono::steady_clock::now();
    auto split = four_class_split(SynthConfig{});
    auto model = train_flat(split.train, TrainParams{});
    std::size_t svm_ok = 0, oracle_ok = 0;
    for (const auto& r : split.test) {
        svm_ok += predict_flat(model, r.embedding.view()) == r.emotion;
        oracle_ok += nearest_centroid(split.train, r.embedding) == r.emotion;
    }
    double n = static_cast<double>(split.test.size());
    double acc = svm_ok / n, ref = oracle_ok / n;
    double secs = seconds_since(t0);
    return {acc >= 0.90 && std::abs(acc - ref) <= 0.1 && secs < 60.0,
            fmt("flat acc %.3f, centroid acc %.3f, %zu train / %zu test", acc, ref, split.train.size(),
                split.test.size())};
}

Outcome hierarchical() {
    auto split = four_class_split(SynthConfig{});
    auto hc = train_hierarchical(split.train, TrainParams{});
    std::size_t violations = 0;
    for (const auto& r : split.test) {
        bool fired = decision_function(hc.stage1, r.embedding.view()) > 0.0;
        violations += (predict_hierarchical(hc, r.embedding.view()) == EmotionLabel::Sad) != fired;
    }

    // Shrink Sad's offset so it sits closest to Neutral.
    SynthConfig close;
    close.emotion_scale[code(EmotionLabel::Sad)] = 0.1;
    auto hard = four_class_split(close);
    auto hc2 = train_hierarchical(hard.train, TrainParams{});
    auto flat2 = train_flat(hard.train, TrainParams{});
    double hc_recall = recall_of(EmotionLabel::Sad, hard.test,
                                 [&](const Embedding& x) { return predict_hierarchical(hc2, x.view()); });
    double flat_recall =
        recall_of(EmotionLabel::Sad, hard.test, [&](const Embedding& x) { return predict_flat(flat2, x.view()); });
    return {violations == 0 && hc_recall >= flat_recall,
            fmt("%zu violations; Sad recall HC %.3f vs flat %.3f", violations, hc_recall, flat_recall)};
}

Outcome detector() {
    auto split = four_class_split(SynthConfig{});
    auto det = train_detector(split.train, TrainParams{});
    std::size_t ok = 0;
    for (const auto& r : split.test) ok += predict_detector(det, r.embedding.view()) == detection_truth(r.emotion);
    double acc = static_cast<double>(ok) / static_cast<double>(split.test.size());
    return {acc >= 0.90, fmt("detection acc %.3f", acc)};
}

Outcome figure_shape() {
    auto result = run_matchscore_experiment(gen_synthetic_corpus(SynthConfig{}));
    double genuine = box_stats(result.values(PairingKind::genuine())).median;
    double impostor = box_stats(result.values(PairingKind::impostor())).median;
    double lo = 1e300, hi = -1e300;
    bool ordered = true;
    for (const auto& k : result.kinds) {
        if (k.type != PairingKind::Type::InterEmotion) continue;
        double m = box_stats(result.values(k)).median;
        lo = std::min(lo, m);
        hi = std::max(hi, m);
        ordered = ordered && impostor < m && m < genuine;
    }
    std::size_t kinds = result.inter_emotion_kinds();
    return {ordered && kinds == 15,
            fmt("impostor %.3f < inter [%.3f, %.3f] < genuine %.3f; %zu inter pairings", impostor, lo, hi, genuine,
                kinds)};
}

Outcome metric_fixture() {
    testkit::MetricFixture fx;
    auto cm = confusion_matrix(fx.truth, fx.pred, fx.classes);
    bool ok = cm.counts == fx.counts && std::abs(cm.accuracy() - fx.accuracy.value()) <= 1e-12;
    auto pc = f1_per_class(cm);
    for (std::size_t c = 0; c < 4; ++c)
        ok = ok && std::abs(pc[c].precision - fx.precision[c].value()) <= 1e-12 &&
             std::abs(pc[c].recall - fx.recall[c].value()) <= 1e-12 && std::abs(pc[c].f1 - fx.f1[c].value()) <= 1e-12;
    ok = ok && std::abs(macro_f1(pc) - fx.macro_f1.value()) <= 1e-12;
    return {ok, fmt("accuracy %.6f, macro F1 %.6f", cm.accuracy(), macro_f1(pc))};
}

Outcome framing() {
    std::mt19937_64 rng(9);
    std::size_t cases = 0, bad = 0;
    auto check = [&](std::size_t n, std::size_t len, std::size_t hop) {
        ++cases;
        std::vector<double> samples(n, 0.0);
        if (n < len) {
            try {
                frame_utterance(samples, len, hop);
                ++bad;
            } catch (const Error& e) {
                bad += e.code() != ErrorCode::TooShort;
            }
            return;
        }
        // count by stepping start offsets one hop at a time
        std::size_t expected = 0;
        for (std::size_t start = 0; start + len <= n; start += hop) ++expected;
        auto frames = frame_utterance(samples, len, hop);
        bad += frames.size() != expected || frames.size() != (n - len) / hop + 1;
        for (std::size_t i = 0; i < frames.size(); ++i)
            bad += frames[i].size() != len || frames[i].data() != samples.data() + i * hop;
    };
    for (int t = 0; t < 2000; ++t) {
        std::size_t len = std::uniform_int_distribution<std::size_t>(1, 300)(rng);
        std::size_t hop = std::uniform_int_distribution<std::size_t>(1, len)(rng);
        std::size_t n = std::uniform_int_distribution<std::size_t>(0, 1500)(rng);
        check(n, len, hop);
    }
    for (std::size_t n : {0, 21999, 22000, 22219, 22220, 24200, 44100, 66150}) check(n, 22000, 220);
    return {bad == 0, fmt("%zu cases, %zu mismatches", cases, bad)};
}

struct RunBytes {
    std::vector<std::uint8_t> synth_emb1, wav_emb1;
    std::vector<std::vector<std::uint8_t>> svm1;
    std::string report;
};

RunBytes full_run(const fs::path& wav_dir) {
    RunBytes out;
    SynthConfig sc;
    sc.dim = 64;
    auto corpus = filter_emotions(gen_synthetic_corpus(sc), kFourClasses);
    out.synth_emb1 = encode_embeddings(corpus);

    auto manifest = load_manifest((wav_dir / "manifest.csv").string());
    out.wav_emb1 = encode_embeddings(extract_manifest(manifest, EmbedderConfig{}).rows);

    auto split = split_speaker_disjoint(decode_embeddings(out.synth_emb1), SplitSpec{});
    auto flat = train_flat(split.train, TrainParams{});
    auto hc = train_hierarchical(split.train, TrainParams{});
    auto det = train_detector(split.train, TrainParams{});
    out.svm1 = {encode_model(flat), encode_model(hc.stage1), encode_model(hc.stage2), encode_model(det)};

    ClassifierBundle bundle;
    bundle.head = flat;
    bundle.dim = sc.dim;
    bundle.config_hash = PipelineConfig{}.hash();
    auto r = evaluate([&](const Embedding& x) { return bundle.predict(x.view()); }, split.test, bundle.class_names());
    r.head = "flat";
    r.config_hash = bundle.config_hash;
    out.report = to_json(r).dump(2) + confusion_to_csv(r.confusion) + format_report(r);
    return out;
}

Outcome determinism() {
    auto dir = fs::temp_directory_path() / ("spkemo_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string manifest = "path,speaker_id,utterance_id,emotion,sentence_id\n";
    for (int i = 0; i < 3; ++i) {
        AudioClip clip;
        clip.sample_rate = 22050;
        std::mt19937_64 rng(i);
        std::normal_distribution<double> g(0.0, 0.02);
        for (int k = 0; k < 26000 + 3000 * i; ++k)
            clip.samples.push_back(0.3 * std::sin(2.0 * std::numbers::pi * (200.0 + 90.0 * i) * k / 22050.0) + g(rng));
        auto name = "u" + std::to_string(i) + ".wav";
        write_wav_pcm16(clip, (dir / name).string());
        manifest += name + ",s" + std::to_string(i) + ",u" + std::to_string(i) + ",Angry,IEO\n";
    }
    detail::write_text_file((dir / "manifest.csv").string(), manifest);

    auto a = full_run(dir);
    auto b = full_run(dir);
    fs::remove_all(dir);
    bool same = a.synth_emb1 == b.synth_emb1 && a.wav_emb1 == b.wav_emb1 && a.svm1 == b.svm1 && a.report == b.report;
    std::size_t svm_bytes = 0;
    for (const auto& m : a.svm1) svm_bytes += m.size();
    return {same && !a.wav_emb1.empty(),
            fmt("EMB1 %zu+%zu bytes, SVM1 %zu bytes, report %zu bytes", a.synth_emb1.size(), a.wav_emb1.size(),
                svm_bytes, a.report.size())};
}

}  // namespace

int main() {
    report(1, "svm-oracle-equivalence", svm_oracle);
    report(2, "two-point-analytic", two_point);
    report(3, "xor-separability", xor_case);
    report(4, "synthetic-4class-flat", flat_pipeline);
    report(5, "hierarchical-consistency", hierarchical);
    report(6, "emotion-detection", detector);
    report(7, "matchscore-shape", figure_shape);
    report(8, "metric-fixture", metric_fixture);
    report(9, "framing-law", framing);
    report(10, "determinism", determinism);
    std::printf("%d failed\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
