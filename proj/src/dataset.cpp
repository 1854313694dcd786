#include "hummit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hummit/binio.hpp"
#include "hummit/error.hpp"
#include "hummit/rng.hpp"

namespace hummit::dataset {

std::size_t DatasetConfig::window_frames() const {
    return static_cast<std::size_t>(std::lround(window_s * frame_rate));
}

std::size_t DatasetConfig::hop_frames() const {
    return static_cast<std::size_t>(std::lround(hop_s * frame_rate));
}

std::vector<std::vector<double>> frame_query(std::span<const double> values, const DatasetConfig& cfg) {
    if (values.empty()) raise("EmptyContour", "cannot frame an empty contour");
    if (!(cfg.hop_s > 0.0) || cfg.hop_s > cfg.window_s || !(cfg.frame_rate > 0.0))
        raise("InvalidConfig", "need 0 < hop_s <= window_s and a positive frame rate");
    const std::size_t w = cfg.window_frames();
    const std::size_t h = cfg.hop_frames();
    if (w == 0 || h == 0) raise("InvalidConfig", "window and hop must span at least one frame");

    std::vector<std::vector<double>> out;
    if (values.size() < w) {
        std::vector<double> padded(values.begin(), values.end());
        padded.resize(w, values.back());
        out.push_back(std::move(padded));
        return out;
    }
    for (std::size_t start = 0; start + w <= values.size(); start += h)
        out.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(start),
                         values.begin() + static_cast<std::ptrdiff_t>(start + w));
    return out;
}

std::vector<double> normalize_frame(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    if (out.empty()) return out;
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(out.size());
    for (double& v : out) v -= mean;
    return out;
}

std::vector<double> resample_steps(std::span<const double> values, double fps_in, double fps_out) {
    if (!(fps_in > 0.0) || !(fps_out > 0.0)) raise("InvalidConfig", "frame rates must be positive");
    if (fps_in == fps_out) return {values.begin(), values.end()};
    const auto n_out = static_cast<std::size_t>(
        std::lround(static_cast<double>(values.size()) * fps_out / fps_in));
    std::vector<double> out(std::max<std::size_t>(n_out, 1));
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto src = static_cast<std::size_t>(static_cast<double>(i) * fps_in / fps_out);
        out[i] = values[std::min(src, values.size() - 1)];
    }
    return out;
}

LabeledDataset build_dataset(const corpus::Catalog& catalog, std::span<const QueryContours> contours,
                             const DatasetConfig& cfg) {
    LabeledDataset ds;
    for (const auto& song : catalog.songs) ds.class_names.push_back(song.song_id);
    ds.n_classes = static_cast<std::uint32_t>(ds.class_names.size());
    if (ds.n_classes < 2) raise("SingleClassDataset", "need at least two songs to classify");
    ds.frame_len = cfg.window_frames();

    std::map<std::string, const QueryContours*> by_query;
    for (const auto& qc : contours) by_query[qc.query_id] = &qc;

    // Query-granular split: frames of one hum are near-duplicates, so
    // splitting at frame level would inflate validation accuracy.
    std::vector<std::size_t> order(catalog.queries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng(cfg.seed).fork(1); // stream 1: split assignment
    rng.shuffle(order);
    const auto n_val = static_cast<std::size_t>(
        std::lround(0.25 * static_cast<double>(catalog.queries.size())));
    std::vector<Split> splits(catalog.queries.size(), Split::train);
    for (std::size_t i = 0; i < n_val; ++i) splits[order[i]] = Split::validation;

    for (std::size_t qi = 0; qi < catalog.queries.size(); ++qi) {
        const auto& q = catalog.queries[qi];
        auto it = by_query.find(q.query_id);
        if (it == by_query.end() || it->second->raw.empty())
            raise("MissingContour", "no contour for query " + q.query_id);
        const QueryContours& qc = *it->second;
        int label = catalog.song_index(q.song_id);
        if (label < 0) raise("AmbiguousMapping", q.query_id + " references unknown song");

        auto add_frames = [&](std::span<const double> signal, Variant variant) {
            auto at_rate = resample_steps(signal, qc.frame_rate, cfg.frame_rate);
            for (auto& window : frame_query(at_rate, cfg)) {
                auto norm = normalize_frame(window);
                QueryFrame frame;
                frame.values.assign(norm.begin(), norm.end());
                frame.label = static_cast<std::uint32_t>(label);
                frame.source_query = q.query_id;
                frame.variant = variant;
                frame.split = splits[qi];
                ds.frames.push_back(std::move(frame));
            }
        };

        add_frames(qc.raw, Variant::raw);
        if (cfg.augment_with_denoised && splits[qi] == Split::train) {
            if (qc.denoised.empty())
                raise("MissingContour", "no denoised contour for query " + q.query_id);
            add_frames(qc.denoised, Variant::denoised);
        }
    }
    return ds;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
    binio::Writer w;
    w.bytes("HUMDS1", 6);
    w.u32(ds.n_classes);
    w.u32(static_cast<std::uint32_t>(ds.frames.size()));
    w.u32(static_cast<std::uint32_t>(ds.frame_len));
    for (const auto& name : ds.class_names) w.str(name);
    for (const auto& frame : ds.frames) {
        w.u32(frame.label);
        w.u8(static_cast<std::uint8_t>(frame.variant));
        w.u8(static_cast<std::uint8_t>(frame.split));
        for (float v : frame.values) w.f32(v);
    }
    binio::write_file_atomic(path, w.data());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    auto bytes = binio::read_file(path);
    binio::Reader r(bytes);
    try {
        char magic[6];
        r.bytes(magic, 6);
        if (std::string_view(magic, 6) != "HUMDS1")
            raise("MalformedDataset", "bad magic in " + path.string());
        LabeledDataset ds;
        ds.n_classes = r.u32();
        std::uint32_t n_frames = r.u32();
        ds.frame_len = r.u32();
        for (std::uint32_t i = 0; i < ds.n_classes; ++i) ds.class_names.push_back(r.str());
        ds.frames.resize(n_frames);
        for (auto& frame : ds.frames) {
            frame.label = r.u32();
            if (frame.label >= ds.n_classes) raise("MalformedDataset", "label out of range");
            frame.variant = static_cast<Variant>(r.u8());
            frame.split = static_cast<Split>(r.u8());
            frame.values.resize(ds.frame_len);
            for (auto& v : frame.values) v = r.f32();
        }
        return ds;
    } catch (const Error& e) {
        if (e.kind() == "Truncated") raise("MalformedDataset", path.string() + " is truncated");
        throw;
    }
}

} // namespace hummit::dataset
