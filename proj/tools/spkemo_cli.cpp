#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spkemo/spkemo.hpp"

using namespace spkemo;

namespace {

constexpr const char* kConfigEnv = "SPKEMO_CONFIG";

// Shared flags; each is applied only when given on the command line.
struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    double c = 0, gamma = 0, train_fraction = 0;
    std::string first_class, backend;
    CLI::Option *seed_opt = nullptr, *c_opt = nullptr, *gamma_opt = nullptr, *fraction_opt = nullptr,
                *first_opt = nullptr, *backend_opt = nullptr;

    void attach(CLI::App* app, bool training, bool backend_flag) {
        app->add_option("--config", config_path, "JSON config file (default: $SPKEMO_CONFIG)");
        seed_opt = app->add_option("--seed", seed, "split / generator seed");
        if (training) {
            c_opt = app->add_option("--c", c, "SVM penalty C (default 1000)");
            gamma_opt = app->add_option("--gamma", gamma, "rbf gamma (default 0.1)");
            fraction_opt = app->add_option("--train-fraction", train_fraction, "train share of utterances");
            first_opt = app->add_option("--first-class", first_class, "first stage class of the hierarchy");
        }
        if (backend_flag)
            backend_opt = app->add_option("--backend", backend, "spectral-baseline | file");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        std::string path = config_path;
        if (path.empty())
            if (const char* env = std::getenv(kConfigEnv)) path = env;
        if (!path.empty()) cfg = load_config_file(path);
        if (seed_opt && seed_opt->count()) {
            cfg.split.seed = seed;
            cfg.embedder.seed = seed;
        }
        if (c_opt && c_opt->count()) cfg.train.C = c;
        if (gamma_opt && gamma_opt->count()) cfg.train.gamma = gamma;
        if (fraction_opt && fraction_opt->count()) cfg.split.train_fraction = train_fraction;
        if (first_opt && first_opt->count()) cfg.first_class = parse_emotion(first_class);
        if (backend_opt && backend_opt->count()) cfg.embedder.backend = backend;
        return cfg;
    }
};

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    detail::write_text_file(path, j.dump(2) + "\n");
}

nlohmann::ordered_json class_counts(const std::vector<LabeledEmbedding>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (EmotionLabel e : kAllEmotions) {
        auto n = std::count_if(rows.begin(), rows.end(), [e](const auto& r) { return r.emotion == e; });
        if (n > 0) j[std::string(to_string(e))] = n;
    }
    return j;
}

ClassifierBundle train_head(HeadKind head, const std::vector<LabeledEmbedding>& train, const PipelineConfig& cfg) {
    ClassifierBundle bundle;
    bundle.dim = train.empty() ? 0 : train.front().embedding.dim();
    bundle.config_hash = cfg.hash();
    switch (head) {
        case HeadKind::Flat: bundle.head = train_flat(train, cfg.train); break;
        case HeadKind::Hierarchical: bundle.head = train_hierarchical(train, cfg.first_class, cfg.train); break;
        case HeadKind::Detector: bundle.head = train_detector(train, cfg.train); break;
    }
    return bundle;
}

std::size_t support_vector_count(const ClassifierBundle& b) {
    auto count_multi = [](const MulticlassSvmModel& m) {
        std::size_t n = 0;
        for (const auto& p : m.pairwise_models) n += p.model.support_vectors.size();
        return n;
    };
    switch (b.kind()) {
        case HeadKind::Flat: return count_multi(std::get<0>(b.head));
        case HeadKind::Hierarchical:
            return std::get<1>(b.head).stage1.support_vectors.size() + count_multi(std::get<1>(b.head).stage2);
        case HeadKind::Detector: return std::get<2>(b.head).support_vectors.size();
    }
    return 0;
}

// Rows relevant to the classification heads, split per the config.
DataSplit select_rows(const std::vector<LabeledEmbedding>& all, const PipelineConfig& cfg, bool use_all) {
    auto rows = filter_emotions(all, kFourClasses);
    if (use_all) return {rows, rows};
    return split_speaker_disjoint(rows, cfg.split);
}

int cmd_synth(const std::string& out, const std::string& csv, SynthConfig synth) {
    auto rows = gen_synthetic_corpus(synth);
    save_embeddings(rows, out, synth.dim);
    if (!csv.empty()) detail::write_text_file(csv, embeddings_to_csv(rows));
    std::cout << "wrote " << rows.size() << " synthetic rows to " << out << "\n";
    return 0;
}

int cmd_extract(const std::string& manifest_path, const std::string& out, std::string skip_path,
                const PipelineConfig& cfg) {
    auto manifest = load_manifest(manifest_path);
    auto result = extract_manifest(manifest, cfg.embedder);
    if (skip_path.empty()) skip_path = out + ".skips.csv";
    detail::write_text_file(skip_path, skip_report_csv(result.skipped));
    for (const auto& s : result.skipped)
        std::cerr << "skipped " << s.utterance_id << " (" << s.reason << "): " << s.detail << "\n";
    if (result.rows.empty()) {
        std::cerr << "error: every manifest row failed\n";
        return 1;
    }
    save_embeddings(result.rows, out);
    std::cout << "extracted " << result.rows.size() << " embeddings, skipped " << result.skipped.size() << " -> "
              << out << "\n";
    return 0;
}

int cmd_train(const std::string& emb_path, const std::string& head_name, const std::string& out_dir,
              std::string report_path, bool use_all, const PipelineConfig& cfg) {
    auto head = parse_head(head_name);
    auto split = select_rows(load_embeddings_any(emb_path), cfg, use_all);
    auto bundle = train_head(head, split.train, cfg);
    save_bundle(bundle, out_dir);

    auto train_eval = evaluate([&](const Embedding& e) { return bundle.predict(e.view()); }, split.train,
                               bundle.class_names(), [&](EmotionLabel e) { return bundle.truth_name(e); });
    nlohmann::ordered_json report;
    report["head"] = head_name;
    report["config_hash"] = bundle.config_hash;
    report["config"] = cfg.to_json();
    report["split_seed"] = cfg.split.seed;
    report["n_train"] = split.train.size();
    report["n_test"] = use_all ? 0 : split.test.size();
    report["train_class_counts"] = class_counts(split.train);
    report["test_class_counts"] = use_all ? nlohmann::ordered_json::object() : class_counts(split.test);
    report["support_vectors"] = support_vector_count(bundle);
    report["train_accuracy"] = train_eval.accuracy;
    if (report_path.empty()) report_path = (std::filesystem::path(out_dir) / "train_report.json").string();
    write_json(report_path, report);
    std::cout << "trained " << head_name << " on " << split.train.size() << " rows (C=" << cfg.train.C
              << ", gamma=" << cfg.train.gamma << "), train accuracy " << format_percent(train_eval.accuracy)
              << "% -> " << out_dir << "\n";
    return 0;
}

int cmd_predict(const std::string& bundle_dir, const std::string& emb_path, const std::string& out) {
    auto bundle = load_bundle(bundle_dir);
    auto rows = load_embeddings_any(emb_path);
    std::string csv = "utterance_id,speaker_id,emotion,prediction\n";
    for (const auto& r : rows)
        csv += r.utterance_id + "," + r.speaker_id + "," + std::string(to_string(r.emotion)) + "," +
               bundle.predict(r.embedding.view()) + "\n";
    if (out.empty()) std::cout << csv;
    else detail::write_text_file(out, csv);
    return 0;
}

int cmd_evaluate(const std::string& bundle_dir, const std::string& emb_path, bool use_all,
                 const std::string& skip_report, std::string json_path, const std::string& csv_path,
                 const PipelineConfig& cfg) {
    auto bundle = load_bundle(bundle_dir);
    auto split = select_rows(load_embeddings_any(emb_path), cfg, use_all);
    std::size_t discarded = skip_report.empty() ? 0 : count_skip_report(skip_report);
    auto report = evaluate([&](const Embedding& e) { return bundle.predict(e.view()); }, split.test,
                           bundle.class_names(), [&](EmotionLabel e) { return bundle.truth_name(e); }, discarded);
    report.head = std::string(to_string(bundle.kind()));
    report.config_hash = bundle.config_hash;

    if (json_path.empty()) json_path = (std::filesystem::path(bundle_dir) / "eval_report.json").string();
    write_json(json_path, to_json(report));
    if (!csv_path.empty()) detail::write_text_file(csv_path, confusion_to_csv(report.confusion));

    SummaryRow row{bundle.kind() == HeadKind::Hierarchical
                       ? std::string(short_name(std::get<1>(bundle.head).first_class)) + "-First HC"
                       : std::string(to_string(bundle.kind())),
                   {},
                   {}};
    if (bundle.kind() == HeadKind::Detector) row.ed = report.accuracy;
    else row.er = report.accuracy;
    std::cout << format_summary_table({row}, std::filesystem::path(emb_path).filename().string()) << "\n"
              << format_report(report);
    return 0;
}

int cmd_matchscore(const std::string& emb_path, const std::string& manifest_path, const std::string& csv_path,
                   std::string json_path, const PipelineConfig& cfg) {
    std::vector<LabeledEmbedding> rows;
    if (!manifest_path.empty()) {
        auto result = extract_manifest(load_manifest(manifest_path), cfg.embedder);
        for (const auto& s : result.skipped) std::cerr << "skipped " << s.utterance_id << " (" << s.reason << ")\n";
        rows = std::move(result.rows);
    } else {
        rows = load_embeddings_any(emb_path);
    }
    MatchScoreOptions opts;
    opts.seed = cfg.split.seed;
    auto result = run_matchscore_experiment(rows, opts);
    if (!csv_path.empty()) detail::write_text_file(csv_path, matchscores_to_csv(result));
    auto j = matchscores_to_json(result);
    j["config_hash"] = cfg.hash();
    if (json_path.empty()) json_path = "matchscore.json";
    write_json(json_path, j);
    for (const auto& k : result.no_eligible_pairs) std::cerr << "NoEligiblePairs: " << k.name() << "\n";
    std::printf("%-14s %6s %8s %8s %8s\n", "pairing", "n", "q1", "median", "q3");
    for (const auto& k : result.kinds) {
        auto v = result.values(k);
        if (v.empty()) {
            std::printf("%-14s %6d %8s %8s %8s\n", k.name().c_str(), 0, "-", "-", "-");
            continue;
        }
        auto b = box_stats(v);
        std::printf("%-14s %6zu %8.4f %8.4f %8.4f\n", k.name().c_str(), b.n, b.q1, b.median, b.q3);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speech emotion recognition from speaker embeddings"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic embedding corpus");
    std::string synth_out, synth_csv;
    SynthConfig synth_cfg;
    std::vector<std::string> synth_emotions;
    std::vector<std::string> synth_emotion_scale;
    synth->add_option("--out", synth_out, "EMB1 output")->required();
    synth->add_option("--csv", synth_csv, "also write the CSV export");
    synth->add_option("--speakers", synth_cfg.n_speakers);
    synth->add_option("--utts", synth_cfg.utterances_per_cell, "utterances per speaker x emotion cell");
    synth->add_option("--dim", synth_cfg.dim);
    synth->add_option("--sigma-spk", synth_cfg.speaker_scale);
    synth->add_option("--sigma-emo", synth_cfg.emotion_offset_scale);
    synth->add_option("--sigma-noise", synth_cfg.noise_scale);
    synth->add_option("--emotions", synth_emotions, "emotion subset (default: all six)");
    synth->add_option("--emotion-scale", synth_emotion_scale, "per-emotion offset multiplier, e.g. Sad=0.3");
    synth->add_option("--seed", synth_cfg.seed);

    // extract
    auto* extract = app.add_subcommand("extract", "frame, embed and average every manifest utterance");
    std::string ex_manifest, ex_out, ex_skips;
    CommonFlags ex_flags;
    extract->add_option("--manifest", ex_manifest)->required();
    extract->add_option("--out", ex_out, "EMB1 output")->required();
    extract->add_option("--skip-report", ex_skips, "CSV of discarded utterances (default <out>.skips.csv)");
    ex_flags.attach(extract, false, true);

    // train
    auto* train = app.add_subcommand("train", "train a classifier bundle");
    std::string tr_emb, tr_head = "flat", tr_out, tr_report;
    bool tr_all = false;
    CommonFlags tr_flags;
    train->add_option("--embeddings", tr_emb)->required();
    train->add_option("--head", tr_head, "flat | hierarchical | detector");
    train->add_option("--out", tr_out, "bundle directory")->required();
    train->add_option("--report", tr_report, "train report JSON (default <out>/train_report.json)");
    train->add_flag("--all", tr_all, "train on every row instead of the train split");
    tr_flags.attach(train, true, false);

    // predict
    auto* predict = app.add_subcommand("predict", "label every row of an embedding file");
    std::string pr_bundle, pr_emb, pr_out;
    predict->add_option("--bundle", pr_bundle)->required();
    predict->add_option("--embeddings", pr_emb)->required();
    predict->add_option("--out", pr_out, "CSV output (default stdout)");

    // evaluate
    auto* evalc = app.add_subcommand("evaluate", "evaluate a bundle on the test split");
    std::string ev_bundle, ev_emb, ev_skips, ev_json, ev_csv;
    bool ev_all = false;
    CommonFlags ev_flags;
    evalc->add_option("--bundle", ev_bundle)->required();
    evalc->add_option("--embeddings", ev_emb)->required();
    evalc->add_option("--skip-report", ev_skips, "extraction skip report, counted as discarded");
    evalc->add_option("--json", ev_json, "report JSON (default <bundle>/eval_report.json)");
    evalc->add_option("--csv", ev_csv, "confusion matrix CSV");
    evalc->add_flag("--all", ev_all, "evaluate every row instead of the test split");
    ev_flags.attach(evalc, true, false);

    // matchscore
    auto* match = app.add_subcommand("matchscore", "intra-speaker match scores across emotions");
    std::string ms_emb, ms_manifest, ms_csv, ms_json;
    CommonFlags ms_flags;
    auto* ms_emb_opt = match->add_option("--embeddings", ms_emb);
    auto* ms_man_opt = match->add_option("--manifest", ms_manifest, "extract from audio first");
    ms_emb_opt->excludes(ms_man_opt);
    match->add_option("--csv", ms_csv, "per-score CSV");
    match->add_option("--json", ms_json, "per-kind box statistics JSON");
    ms_flags.attach(match, false, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            if (!synth_emotions.empty()) {
                synth_cfg.emotions.clear();
                for (const auto& e : synth_emotions) synth_cfg.emotions.push_back(parse_emotion(e));
            }
            for (const auto& kv : synth_emotion_scale) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected Emotion=scale");
                synth_cfg.emotion_scale[code(parse_emotion(kv.substr(0, eq)))] = std::stod(kv.substr(eq + 1));
            }
            return cmd_synth(synth_out, synth_csv, synth_cfg);
        }
        if (*extract) return cmd_extract(ex_manifest, ex_out, ex_skips, ex_flags.resolve());
        if (*train) return cmd_train(tr_emb, tr_head, tr_out, tr_report, tr_all, tr_flags.resolve());
        if (*predict) return cmd_predict(pr_bundle, pr_emb, pr_out);
        if (*evalc) return cmd_evaluate(ev_bundle, ev_emb, ev_all, ev_skips, ev_json, ev_csv, ev_flags.resolve());
        if (*match) {
            if (ms_emb.empty() && ms_manifest.empty())
                throw Error(ErrorCode::InvalidArgument, "matchscore needs --embeddings or --manifest");
            return cmd_matchscore(ms_emb, ms_manifest, ms_csv, ms_json, ms_flags.resolve());
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
