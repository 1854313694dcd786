#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hummit/binio.hpp"
#include "hummit/contour.hpp"
#include "hummit/corpus.hpp"
#include "hummit/dataset.hpp"
#include "hummit/error.hpp"
#include "hummit/eval.hpp"
#include "hummit/net.hpp"
#include "hummit/pitch.hpp"
#include "hummit/runtime.hpp"
#include "hummit/tvr.hpp"

namespace fs = std::filesystem;
using hummit::raise;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 0;
};

struct PipelineOpts {
    hummit::eval::PipelineConfig cfg;

    void attach(CLI::App* cmd) {
        cmd->add_option("--frame-length", cfg.pitch.frame_length_s, "analysis frame length, seconds");
        cmd->add_option("--hop", cfg.pitch.hop_s, "analysis hop, seconds");
        cmd->add_option("--f0-min", cfg.pitch.f0_min_hz, "lowest F0 searched, Hz");
        cmd->add_option("--f0-max", cfg.pitch.f0_max_hz, "highest F0 searched, Hz");
        cmd->add_option("--voicing-threshold", cfg.pitch.voicing_threshold,
                        "autocorrelation peak ratio below which a frame is unvoiced");
        cmd->add_option("--tv-lambda", cfg.tv_lambda,
                        "fidelity weight of the TV denoiser (larger = closer to input)");
        cmd->add_option("--slope-threshold", cfg.slope.threshold_semitones,
                        "minimal slope magnitude counted as a note transition, semitones");
        cmd->add_option("--min-gap", cfg.slope.min_gap_s, "minimal spacing between transitions, seconds");
    }
};

struct DatasetOpts {
    hummit::dataset::DatasetConfig cfg;

    void attach(CLI::App* cmd) {
        cmd->add_option("--window", cfg.window_s, "frame window, seconds");
        cmd->add_option("--hop-s", cfg.hop_s, "frame hop, seconds");
        cmd->add_option("--fps", cfg.frame_rate, "contour frame rate for windowing, frames/second");
    }
};

hummit::pitch::PitchVector load_query_pitch(const std::string& wav_path, const std::string& pitch_file,
                                            double pv_frame_rate,
                                            const hummit::pitch::PitchConfig& pcfg) {
    if (!pitch_file.empty()) {
        auto bytes = hummit::binio::read_file(pitch_file);
        std::string text(bytes.begin(), bytes.end());
        return hummit::pitch::read_pitch_text(text, pv_frame_rate);
    }
    auto bytes = hummit::binio::read_file(wav_path);
    auto audio = hummit::corpus::decode_wav(bytes);
    return hummit::pitch::estimate_f0(audio, pcfg);
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        hummit::binio::write_file_atomic(out_path, text);
}

json pipeline_json(const hummit::eval::PipelineConfig& cfg) {
    json j;
    j["frame_length_s"] = cfg.pitch.frame_length_s;
    j["hop_s"] = cfg.pitch.hop_s;
    j["f0_min_hz"] = cfg.pitch.f0_min_hz;
    j["f0_max_hz"] = cfg.pitch.f0_max_hz;
    j["voicing_threshold"] = cfg.pitch.voicing_threshold;
    j["tv_lambda"] = cfg.tv_lambda;
    j["slope_threshold"] = cfg.slope.threshold_semitones;
    j["min_gap_s"] = cfg.slope.min_gap_s;
    return j;
}

int run_extract(const std::string& wav_path, const std::string& pitch_file, double pv_frame_rate,
                const PipelineOpts& pipe, bool dump_intermediate, const std::string& out_path) {
    auto pv = load_query_pitch(wav_path, pitch_file, pv_frame_rate, pipe.cfg.pitch);
    auto filled = hummit::pitch::fill_unvoiced(pv);
    auto denoised = hummit::tvr::denoise_tv(filled.values, {pipe.cfg.tv_lambda});
    hummit::pitch::PitchVector dn{filled.frame_rate, denoised, std::vector<bool>(denoised.size(), true)};
    hummit::contour::NoteContour nc;
    if (dn.size() < 2) {
        nc = hummit::contour::rebuild_contour(dn, {});
    } else {
        auto d = hummit::contour::slope(dn.values);
        auto transitions = hummit::contour::detect_transitions(d, pipe.cfg.slope, dn.frame_rate);
        nc = hummit::contour::rebuild_contour(dn, transitions);
    }

    json j;
    j["frame_rate"] = nc.frame_rate;
    j["segments"] = json::array();
    for (const auto& seg : nc.segments)
        j["segments"].push_back({{"start", seg.start_frame}, {"len", seg.length_frames}, {"pitch", seg.pitch}});
    j["config"] = pipeline_json(pipe.cfg);
    if (dump_intermediate) {
        j["pitch_raw"] = pv.values;
        j["voiced"] = std::vector<int>(pv.voiced.begin(), pv.voiced.end());
        j["pitch_filled"] = filled.values;
        j["pitch_denoised"] = denoised;
    }
    emit(out_path, j.dump(2) + "\n");
    return 0;
}

int run_denoise(const std::string& pitch_path, double tv_lambda, double pv_frame_rate,
                const std::string& out_path) {
    auto bytes = hummit::binio::read_file(pitch_path);
    std::string text(bytes.begin(), bytes.end());
    auto pv = hummit::pitch::read_pitch_text(text, pv_frame_rate);
    auto filled = hummit::pitch::fill_unvoiced(pv);
    auto denoised = hummit::tvr::denoise_tv(filled.values, {tv_lambda});
    hummit::pitch::PitchVector out{filled.frame_rate, denoised,
                                   std::vector<bool>(denoised.size(), true)};
    emit(out_path, hummit::pitch::write_pitch_text(out));
    return 0;
}

int run_dataset_build(const std::string& root, const std::string& layout_name,
                      const std::string& mtg_root, bool augment, bool include_mtg,
                      std::uint64_t seed, const PipelineOpts& pipe, DatasetOpts data,
                      const std::string& out_path) {
    std::vector<std::string> warnings;
    auto layout = hummit::corpus::layout_from_name(layout_name);
    auto catalog = hummit::corpus::scan_corpus(root, layout, &warnings);
    if (include_mtg) {
        if (mtg_root.empty()) raise("InvalidConfig", "--include-mtg needs --mtg-root");
        auto mtg = hummit::corpus::scan_corpus(mtg_root, hummit::corpus::Layout::mtg_qbh, &warnings);
        for (auto& s : mtg.songs) catalog.songs.push_back(std::move(s));
        for (auto& q : mtg.queries) catalog.queries.push_back(std::move(q));
    }

    auto extraction = hummit::eval::extract_contours(catalog, pipe.cfg);
    for (const auto& w : warnings) std::fprintf(stderr, "note: %s\n", w.c_str());
    for (const auto& w : extraction.warnings) std::fprintf(stderr, "note: %s\n", w.c_str());

    data.cfg.augment_with_denoised = augment;
    data.cfg.include_mtg = include_mtg;
    data.cfg.seed = seed;
    auto ds = hummit::dataset::build_dataset(extraction.catalog, extraction.contours, data.cfg);
    hummit::dataset::save_dataset(out_path, ds);

    std::size_t train_n = 0, val_n = 0;
    for (const auto& f : ds.frames)
        (f.split == hummit::dataset::Split::train ? train_n : val_n) += 1;
    std::printf("dataset: %zu frames (%zu train, %zu validation), %u classes, frame_len %zu -> %s\n",
                ds.frames.size(), train_n, val_n, ds.n_classes, ds.frame_len, out_path.c_str());
    return 0;
}

int run_train(const std::string& dataset_path, const std::string& arch_name, std::uint64_t seed,
              hummit::net::TrainConfig tcfg, double frame_rate, double window_s, double hop_s,
              const std::string& out_path) {
    auto ds = hummit::dataset::load_dataset(dataset_path);
    hummit::net::ArchSpec arch;
    if (arch_name == "fcn")
        arch = hummit::net::ArchSpec::make_fcn(static_cast<int>(ds.n_classes),
                                               static_cast<int>(ds.frame_len));
    else if (arch_name == "mlp")
        arch = hummit::net::ArchSpec::make_mlp(static_cast<int>(ds.n_classes),
                                               static_cast<int>(ds.frame_len));
    else
        raise("InvalidConfig", "--arch must be fcn or mlp");

    tcfg.seed = seed;
    auto result = hummit::net::train(ds, arch, tcfg);
    for (const auto& e : result.history)
        std::fprintf(stderr, "epoch %3d  lr %.6f  loss %.5f  val-acc %.4f\n", e.epoch, e.lr,
                     e.train_loss, e.val_accuracy);

    hummit::net::ModelMeta meta;
    meta.class_names = ds.class_names;
    meta.frame_rate = frame_rate;
    meta.window_s = window_s;
    meta.hop_s = hop_s;
    hummit::net::save_model(out_path, result.model, meta);
    std::printf("trained %s: best epoch %d, val-acc %.4f -> %s\n", arch_name.c_str(),
                result.best_epoch, result.history[result.best_epoch - 1].val_accuracy,
                out_path.c_str());
    return 0;
}

int run_eval(const std::string& root, const std::string& layout_name, std::uint64_t seed,
             const PipelineOpts& pipe, const DatasetOpts& data, hummit::net::TrainConfig tcfg,
             bool as_json, bool check, const std::string& out_path) {
    auto layout = hummit::corpus::layout_from_name(layout_name);
    std::vector<std::string> warnings;
    auto catalog = hummit::corpus::scan_corpus(root, layout, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "note: %s\n", w.c_str());

    hummit::eval::AblationConfig cfg;
    cfg.pipeline = pipe.cfg;
    cfg.data = data.cfg;
    cfg.train = tcfg;
    cfg.seed = seed;
    auto report = hummit::eval::run_ablation(catalog, cfg);

    std::string text = as_json ? report.to_json() : report.to_text();
    emit(out_path, text);
    if (!out_path.empty()) std::fputs(text.c_str(), stdout);
    if (check && !report.tvr_check_passed)
        raise("TvrCheckFailed", "with-TVR accuracy fell below without-TVR accuracy");
    return 0;
}

int run_query(const std::string& model_path, const std::string& wav_path,
              const std::string& pitch_file, double pv_frame_rate, const PipelineOpts& pipe,
              int top) {
    auto [model, meta] = hummit::net::load_model(model_path);
    if (meta.class_names.empty()) raise("MalformedCheckpoint", "model has no class name table");

    auto pv = load_query_pitch(wav_path, pitch_file, pv_frame_rate, pipe.cfg.pitch);
    auto filled = hummit::pitch::fill_unvoiced(pv);

    hummit::dataset::DatasetConfig dcfg;
    dcfg.window_s = meta.window_s;
    dcfg.hop_s = meta.hop_s;
    dcfg.frame_rate = meta.frame_rate;
    auto at_rate = hummit::dataset::resample_steps(filled.values, filled.frame_rate, dcfg.frame_rate);
    std::vector<std::vector<float>> frames;
    for (auto& window : hummit::dataset::frame_query(at_rate, dcfg)) {
        auto norm = hummit::dataset::normalize_frame(window);
        frames.emplace_back(norm.begin(), norm.end());
    }
    auto ranking = hummit::net::predict_song(model, frames, meta.class_names);
    const int n = std::min<int>(top, static_cast<int>(ranking.size()));
    for (int i = 0; i < n; ++i)
        std::printf("%2d  %-24s  %.6f\n", i + 1, ranking[i].song_id.c_str(), ranking[i].score);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hummit - melody-contour query-by-humming pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value config file (CLI flags win)");

    GlobalOpts global;
    app.add_option("--seed", global.seed, "seed for every randomized stage");
    app.add_option("--threads", global.threads, "worker thread cap (0 = all cores)");

    // extract
    auto* extract = app.add_subcommand("extract", "denoised piecewise-constant contour from a hummed wav");
    std::string ex_wav, ex_pitch_file, ex_out;
    double ex_pv_rate = 100.0;
    bool ex_dump = false;
    extract->add_option("wav", ex_wav, "query wav file");
    extract->add_option("--pitch-from-file", ex_pitch_file,
                        "read a precomputed pitch vector (one value per line, 0 = unvoiced) instead of the wav");
    extract->add_option("--pv-frame-rate", ex_pv_rate, "frame rate of --pitch-from-file input");
    extract->add_flag("--dump-intermediate", ex_dump, "include raw/filled/denoised pitch vectors");
    extract->add_option("--out", ex_out, "write JSON here instead of stdout");
    PipelineOpts ex_pipe;
    ex_pipe.attach(extract);

    // denoise
    auto* denoise = app.add_subcommand("denoise", "TV-denoise a pitch vector file");
    std::string dn_file, dn_out;
    double dn_lambda = 0.3, dn_pv_rate = 100.0;
    denoise->add_option("pitch-file", dn_file, "one value per line, 0 = unvoiced")->required();
    denoise->add_option("--tv-lambda", dn_lambda, "fidelity weight (larger = closer to input)");
    denoise->add_option("--pv-frame-rate", dn_pv_rate, "frame rate of the input");
    denoise->add_option("--out", dn_out, "write here instead of stdout");

    // dataset build
    auto* ds_cmd = app.add_subcommand("dataset", "dataset cache operations");
    ds_cmd->require_subcommand(1);
    ds_cmd->fallthrough();
    auto* build = ds_cmd->add_subcommand("build", "extract contours for a corpus and write a dataset cache");
    std::string b_root, b_layout = "mir-qbsh", b_mtg_root, b_out;
    bool b_augment = false, b_include_mtg = false;
    build->add_option("--root", b_root, "corpus root directory")->required();
    build->add_option("--layout", b_layout, "mir-qbsh | mtg-qbh | flat-manifest");
    build->add_option("--out", b_out, "dataset cache output path")->required();
    build->add_flag("--augment-tvr", b_augment, "append denoised variants of training queries");
    build->add_flag("--include-mtg", b_include_mtg, "merge a second corpus scanned as mtg-qbh");
    build->add_option("--mtg-root", b_mtg_root, "root of the mtg-qbh corpus for --include-mtg");
    PipelineOpts b_pipe;
    b_pipe.attach(build);
    DatasetOpts b_data;
    b_data.attach(build);

    // train
    auto* train = app.add_subcommand("train", "train a retrieval model on a dataset cache");
    std::string t_dataset, t_arch = "fcn", t_out = "model.bin";
    hummit::net::TrainConfig t_cfg;
    double t_fps = 100.0, t_window = 5.0, t_hop = 2.0;
    train->add_option("--dataset", t_dataset, "dataset cache from `dataset build`")->required();
    train->add_option("--arch", t_arch, "fcn | mlp");
    train->add_option("--out", t_out, "checkpoint output path");
    train->add_option("--lr", t_cfg.initial_lr, "initial learning rate");
    train->add_option("--batch-size", t_cfg.batch_size, "mini-batch size");
    train->add_option("--max-epochs", t_cfg.max_epochs, "epoch cap");
    train->add_option("--constant-epochs", t_cfg.constant_epochs, "epochs before lr decay starts");
    train->add_option("--decay", t_cfg.decay_factor, "per-epoch lr factor after the constant phase");
    train->add_option("--plateau-patience", t_cfg.plateau_patience,
                      "stop after this many epochs without val-acc improvement");
    train->add_option("--plateau-delta", t_cfg.plateau_delta,
                      "minimal val-acc improvement that resets patience, accuracy points");
    train->add_option("--frame-rate", t_fps, "contour frame rate stamped into the checkpoint");
    train->add_option("--window", t_window, "window seconds stamped into the checkpoint");
    train->add_option("--hop-s", t_hop, "hop seconds stamped into the checkpoint");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "train + evaluate the with/without-TVR ablation");
    std::string e_root, e_layout = "mir-qbsh", e_out;
    bool e_json = false, e_check = false;
    eval_cmd->add_option("--root", e_root, "corpus root directory")->required();
    eval_cmd->add_option("--layout", e_layout, "mir-qbsh | mtg-qbh | flat-manifest");
    eval_cmd->add_flag("--json", e_json, "emit the report as JSON");
    eval_cmd->add_flag("--check", e_check, "exit nonzero unless with-TVR >= without-TVR");
    eval_cmd->add_option("--out", e_out, "also write the report here");
    PipelineOpts e_pipe;
    e_pipe.attach(eval_cmd);
    DatasetOpts e_data;
    e_data.attach(eval_cmd);
    hummit::net::TrainConfig e_cfg;
    eval_cmd->add_option("--max-epochs", e_cfg.max_epochs, "epoch cap");
    eval_cmd->add_option("--batch-size", e_cfg.batch_size, "mini-batch size");
    eval_cmd->add_option("--lr", e_cfg.initial_lr, "initial learning rate");
    eval_cmd->add_option("--constant-epochs", e_cfg.constant_epochs, "epochs before lr decay starts");
    eval_cmd->add_option("--plateau-patience", e_cfg.plateau_patience, "early-stop patience");

    // query
    auto* query = app.add_subcommand("query", "rank target songs for one hummed wav");
    std::string q_model, q_wav, q_pitch_file;
    double q_pv_rate = 100.0;
    int q_top = 10;
    query->add_option("--model", q_model, "trained checkpoint")->required();
    query->add_option("wav", q_wav, "query wav file");
    query->add_option("--pitch-from-file", q_pitch_file, "precomputed pitch vector instead of the wav");
    query->add_option("--pv-frame-rate", q_pv_rate, "frame rate of --pitch-from-file input");
    query->add_option("--top", q_top, "ranking length to print");
    PipelineOpts q_pipe;
    q_pipe.attach(query);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // uniform usage-error code
    }

    try {
        hummit::runtime::set_threads(global.threads);
        if (*extract) {
            if (ex_wav.empty() && ex_pitch_file.empty())
                raise("InvalidConfig", "extract needs a wav or --pitch-from-file");
            return run_extract(ex_wav, ex_pitch_file, ex_pv_rate, ex_pipe, ex_dump, ex_out);
        }
        if (*denoise) return run_denoise(dn_file, dn_lambda, dn_pv_rate, dn_out);
        if (*build)
            return run_dataset_build(b_root, b_layout, b_mtg_root, b_augment, b_include_mtg,
                                     global.seed, b_pipe, b_data, b_out);
        if (*train)
            return run_train(t_dataset, t_arch, global.seed, t_cfg, t_fps, t_window, t_hop, t_out);
        if (*eval_cmd)
            return run_eval(e_root, e_layout, global.seed, e_pipe, e_data, e_cfg, e_json, e_check,
                            e_out);
        if (*query)
            return run_query(q_model, q_wav, q_pitch_file, q_pv_rate, q_pipe, q_top);
        return 1;
    } catch (const hummit::Error& e) {
        std::fprintf(stderr, "%s\n", e.what()); // what() is "kind: message"
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
