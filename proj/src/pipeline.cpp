#include "ndmls/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "ndmls/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ndmls {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::Classify: return "classify";
        case Mode::Segment: return "segment";
        case Mode::Detect: return "detect";
    }
    return "classify";
}

Mode parse_mode(const std::string& name) {
    if (name == "classify") return Mode::Classify;
    if (name == "segment") return Mode::Segment;
    if (name == "detect") return Mode::Detect;
    throw Error(ErrorKind::InvalidInput, "unknown mode '" + name + "'");
}

void RunConfig::validate() const {
    nine_dot.validate();
    contour.validate();
    validate_alpha(alpha);
    if (lattice_spacing < 1) throw Error(ErrorKind::InvalidInput, "lattice_spacing must be >= 1");
    if (variants_per_image < 1) throw Error(ErrorKind::InvalidInput, "variants_per_image must be >= 1");
    if (parallelism < 1) throw Error(ErrorKind::InvalidInput, "parallelism must be >= 1");
    if (contour.direction_count() < 1) throw Error(ErrorKind::InvalidInput, "phi_step leaves no direction");
}

RunConfig config_from_json(const json& j, RunConfig cfg) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "mode") cfg.mode = parse_mode(value.get<std::string>());
            else if (key == "k_p") cfg.nine_dot.k_p = value.get<double>();
            else if (key == "k_l") cfg.nine_dot.k_l = value.get<double>();
            else if (key == "k_s") cfg.nine_dot.k_s = value.get<double>();
            else if (key == "phi0") cfg.nine_dot.phi0 = value.get<double>();
            else if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "lattice_spacing") cfg.lattice_spacing = value.get<int>();
            else if (key == "variants_per_image") cfg.variants_per_image = value.get<std::uint64_t>();
            else if (key == "anchor_corners") cfg.anchor_corners = value.get<bool>();
            else if (key == "output_dir") cfg.output_dir = value.get<std::string>();
            else if (key == "parallelism") cfg.parallelism = value.get<int>();
            else if (key == "contour") {
                for (const auto& [ck, cv] : value.items()) {
                    if (ck == "ray_angles") cfg.contour.ray_angles = cv.get<std::vector<double>>();
                    else if (ck == "xi") cfg.contour.xi = cv.get<double>();
                    else if (ck == "k_l") cfg.contour.k_l = cv.get<double>();
                    else if (ck == "phi0") cfg.contour.phi0 = cv.get<double>();
                    else if (ck == "phi_step") cfg.contour.phi_step = cv.get<double>();
                    else if (ck == "dedupe_dist") cfg.contour.dedupe_dist = cv.get<double>();
                    else throw Error(ErrorKind::InvalidInput, "unknown contour config key '" + ck + "'");
                }
            } else {
                throw Error(ErrorKind::InvalidInput, "unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("bad config value: ") + e.what());
    }
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    return {
        {"mode", to_string(cfg.mode)},
        {"k_p", cfg.nine_dot.k_p},
        {"k_l", cfg.nine_dot.k_l},
        {"k_s", cfg.nine_dot.k_s},
        {"phi0", cfg.nine_dot.phi0},
        {"alpha", cfg.alpha},
        {"lattice_spacing", cfg.lattice_spacing},
        {"variants_per_image", cfg.variants_per_image},
        {"anchor_corners", cfg.anchor_corners},
        {"contour",
         {{"ray_angles", cfg.contour.ray_angles},
          {"xi", cfg.contour.xi},
          {"k_l", cfg.contour.k_l},
          {"phi0", cfg.contour.phi0},
          {"phi_step", cfg.contour.phi_step},
          {"dedupe_dist", cfg.contour.dedupe_dist}}},
    };
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

std::string label_for(const fs::path& root, const fs::path& rel) {
    if (rel.has_parent_path()) return rel.parent_path().filename().string();
    auto abs = fs::absolute(root).lexically_normal();
    if (fs::is_regular_file(abs)) abs = abs.parent_path();
    if (abs.filename().empty()) abs = abs.parent_path();
    const auto name = abs.filename().string();
    return name.empty() ? std::string("object") : name;
}

bool is_png(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

}  // namespace

Dataset load_dataset(const fs::path& root, Mode mode, const std::optional<fs::path>& masks_root) {
    Dataset ds;
    std::vector<fs::path> files;
    fs::path base = root;
    if (fs::is_regular_file(root)) {
        files.push_back(root.filename());
        base = root.parent_path();
    } else if (fs::is_directory(root)) {
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (entry.is_regular_file() && is_png(entry.path())) {
                files.push_back(fs::relative(entry.path(), root));
            }
        }
    } else {
        throw Error(ErrorKind::Io, "input path does not exist: " + root.string());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

    const bool needs_mask = mode != Mode::Classify;
    if (needs_mask && !masks_root) {
        throw Error(ErrorKind::InvalidInput, "segment/detect modes require a mask directory");
    }

    for (const auto& rel : files) {
        const std::string rel_str = rel.generic_string();
        LabeledSample sample;
        sample.image_path = rel_str;
        try {
            sample.image = read_png(base / rel);
        } catch (const Error& e) {
            ds.errors.push_back({rel_str, e.what()});
            continue;
        }
        if (mode != Mode::Segment) sample.class_label = label_for(root, rel);

        if (needs_mask) {
            fs::path mask_path = *masks_root / rel;
            mask_path.replace_extension(".png");
            if (!fs::exists(mask_path)) mask_path = *masks_root / (rel.stem().string() + ".png");
            if (!fs::exists(mask_path)) {
                ds.errors.push_back({rel_str, "no mask found for image"});
                continue;
            }
            try {
                Raster mask = read_png(mask_path);
                if (mask.channels() != 1) {
                    ds.errors.push_back({rel_str, "mask is not a 1-channel PNG"});
                    continue;
                }
                if (mask.width() != sample.image.width() || mask.height() != sample.image.height()) {
                    ds.errors.push_back({rel_str, std::string(to_string(ErrorKind::DimensionMismatch)) +
                                                      ": mask dims differ from image dims"});
                    continue;
                }
                sample.mask = std::move(mask);
            } catch (const Error& e) {
                ds.errors.push_back({rel_str, e.what()});
                continue;
            }
        }
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Planning

std::vector<Point2> SamplePlan::targets(const MovePattern& pattern) const {
    auto q = sources;
    for (const auto& m : pattern.moves) {
        if (m.handle < 0 || m.handle >= movable || m.direction < 0 || m.direction >= directions) {
            throw Error(ErrorKind::InvalidInput, "move pattern does not fit the sample plan");
        }
        const auto i = static_cast<std::size_t>(m.handle);
        q[i] = displace(sources[i], length, phi0 + m.direction * phi_step);
    }
    return q;
}

SamplePlan plan_sample(const RunConfig& cfg, const LabeledSample& sample) {
    const ImageDims dims = sample.image.dims();
    SamplePlan plan;
    if (cfg.mode == Mode::Classify) {
        const auto& nd = cfg.nine_dot;
        plan.scheme = "nine-dot";
        plan.sources = nine_dot_points(dims, nd.k_p);
        plan.movable = static_cast<int>(plan.sources.size());
        plan.directions = direction_count(nd.k_s);
        plan.length = displacement_length(dims, nd.k_p, nd.k_l);
        plan.phi0 = nd.phi0;
        plan.phi_step = 360.0 * nd.k_s;
        plan.parameters = {{"k_p", nd.k_p}, {"k_l", nd.k_l}, {"k_s", nd.k_s}, {"phi0", nd.phi0},
                           {"L", plan.length}};
        return plan;
    }

    if (!sample.mask) throw Error(ErrorKind::InvalidInput, "sample has no mask");
    const auto& cc = cfg.contour;
    const RegionModel region = analyze_largest_region(*sample.mask);
    plan.scheme = "contour";
    plan.sources = contour_handles(region, cc);
    plan.movable = static_cast<int>(plan.sources.size());
    plan.directions = cc.direction_count();
    plan.length = contour_displacement_length(region, cc);
    plan.phi0 = cc.phi0;
    plan.phi_step = cc.phi_step;
    if (cfg.anchor_corners) {
        const double w1 = dims.w - 1.0, h1 = dims.h - 1.0;
        for (const Point2 corner : {Point2{0, 0}, Point2{w1, 0}, Point2{0, h1}, Point2{w1, h1}}) {
            const bool clash = std::any_of(plan.sources.begin(), plan.sources.end(), [&](const Point2& s) {
                return distance(s, corner) < std::max(cc.dedupe_dist, kSingularDistance);
            });
            if (!clash) plan.sources.push_back(corner);
        }
    }
    plan.parameters = {{"xi", cc.xi},
                       {"k_l", cc.k_l},
                       {"phi0", cc.phi0},
                       {"phi_step", cc.phi_step},
                       {"dedupe_dist", cc.dedupe_dist},
                       {"ray_angles", cc.ray_angles},
                       {"anchor_corners", cfg.anchor_corners},
                       {"barycenter", {region.barycenter.x, region.barycenter.y}},
                       {"L", plan.length}};
    return plan;
}

// ---------------------------------------------------------------------------
// Records

namespace {

json points_json(const std::vector<Point2>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

std::vector<Point2> points_from(const json& arr) {
    std::vector<Point2> pts;
    for (const auto& p : arr) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return pts;
}

json annotation_json(const Annotation& a) {
    return {{"class", a.class_label},
            {"x", static_cast<long long>(std::llround(a.bbox.x))},
            {"y", static_cast<long long>(std::llround(a.bbox.y))},
            {"w", static_cast<long long>(std::llround(a.bbox.w))},
            {"h", static_cast<long long>(std::llround(a.bbox.h))}};
}

}  // namespace

json to_json(const VariantRecord& r) {
    json moves = json::array();
    for (const auto& m : r.pattern.moves) moves.push_back({{"handle", m.handle}, {"direction", m.direction}});
    json j = {
        {"source", r.source_path},
        {"variant", r.variant_index},
        {"scheme", r.scheme},
        {"moves", moves},
        {"sources", points_json(r.sources)},
        {"targets", points_json(r.targets)},
        {"alpha", r.alpha},
        {"lattice_spacing", r.lattice_spacing},
        {"parameters", r.parameters},
        {"rejected", r.rejected},
    };
    if (r.rejected) j["reason"] = r.reason;
    if (!r.image_path.empty()) j["image"] = r.image_path;
    if (!r.mask_path.empty()) j["mask"] = r.mask_path;
    if (!r.annotation_path.empty()) j["annotation_file"] = r.annotation_path;
    if (r.annotation) j["annotation"] = annotation_json(*r.annotation);
    return j;
}

VariantRecord record_from_json(const json& j) {
    VariantRecord r;
    r.source_path = j.at("source").get<std::string>();
    r.variant_index = j.at("variant").get<std::uint64_t>();
    r.scheme = j.at("scheme").get<std::string>();
    for (const auto& m : j.at("moves")) {
        r.pattern.moves.push_back({m.at("handle").get<int>(), m.at("direction").get<int>()});
    }
    r.sources = points_from(j.at("sources"));
    r.targets = points_from(j.at("targets"));
    r.alpha = j.at("alpha").get<double>();
    r.lattice_spacing = j.at("lattice_spacing").get<int>();
    r.parameters = j.at("parameters");
    r.rejected = j.at("rejected").get<bool>();
    r.reason = j.value("reason", "");
    r.image_path = j.value("image", "");
    r.mask_path = j.value("mask", "");
    r.annotation_path = j.value("annotation_file", "");
    if (j.contains("annotation")) {
        const auto& a = j.at("annotation");
        Annotation ann;
        ann.class_label = a.at("class").get<std::string>();
        ann.bbox = {a.at("x").get<double>(), a.at("y").get<double>(), a.at("w").get<double>(),
                    a.at("h").get<double>()};
        r.annotation = ann;
    }
    return r;
}

std::size_t Manifest::emitted() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.rejected; }));
}

std::size_t Manifest::rejected() const { return records.size() - emitted(); }

json Manifest::to_json() const {
    json recs = json::array();
    for (const auto& r : records) recs.push_back(ndmls::to_json(r));
    json errs = json::array();
    for (const auto& e : errors) errs.push_back({{"path", e.path}, {"reason", e.reason}});
    return {{"config", config_to_json(config)},
            {"emitted", emitted()},
            {"rejected", rejected()},
            {"records", recs},
            {"errors", errs}};
}

std::string variant_stem(const std::string& source_path, std::uint64_t index) {
    fs::path p(source_path);
    p.replace_extension();
    return p.generic_string() + "_v" + std::to_string(index);
}

// ---------------------------------------------------------------------------
// Rendering

RenderedVariant render_variant(Mode mode, const LabeledSample& sample, const PrecomputedBasis& basis,
                               std::span<const Point2> targets, const std::string& variant_id) {
    const WarpField field = build_warp_field(basis, targets);
    RenderedVariant out;
    if (mode == Mode::Classify) {
        out.image = warp_image(sample.image, field, Sampling::Bilinear, Fill::replicate());
        return out;
    }
    try {
        auto p = propagate(sample, field, variant_id);
        out.image = std::move(p.image);
        out.mask = std::move(p.mask);
        out.annotation = std::move(p.annotation);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyObject) throw;
        out.rejection = "empty-object: warped mask has no foreground pixels";
    }
    return out;
}

RenderedVariant replay_variant(Mode mode, const VariantRecord& record, const LabeledSample& sample) {
    const auto basis = precompute_basis(record.sources, record.alpha, sample.image.width(),
                                        sample.image.height(), record.lattice_spacing);
    return render_variant(mode, sample, basis, record.targets,
                          variant_stem(record.source_path, record.variant_index));
}

namespace {

// Runs fn(i) for i in [0, n) on `jobs` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t t = 0; t < count; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
}

}  // namespace

Manifest run_augmentation(const RunConfig& cfg, const Dataset& dataset) {
    cfg.validate();
    Manifest manifest;
    manifest.config = cfg;
    manifest.errors = dataset.errors;
    fs::create_directories(cfg.output_dir);

    for (const auto& sample : dataset.samples) {
        SamplePlan plan;
        try {
            plan = plan_sample(cfg, sample);
            const PatternSpace space(plan.movable, plan.directions);
            if (cfg.variants_per_image > space.total()) {
                throw Error(ErrorKind::Exhausted, "pattern space holds " + std::to_string(space.total()) +
                                                      " variants, " +
                                                      std::to_string(cfg.variants_per_image) + " requested");
            }
        } catch (const Error& e) {
            manifest.errors.push_back({sample.image_path, std::string(to_string(e.kind())) + ": " + e.what()});
            continue;
        }

        const PatternSpace space(plan.movable, plan.directions);
        const auto basis = precompute_basis(plan.sources, cfg.alpha, sample.image.width(),
                                            sample.image.height(), cfg.lattice_spacing);
        fs::create_directories((cfg.output_dir / sample.image_path).parent_path());

        std::vector<VariantRecord> records(cfg.variants_per_image);
        parallel_for(records.size(), cfg.parallelism, [&](std::size_t i) {
            VariantRecord& rec = records[i];
            rec.source_path = sample.image_path;
            rec.variant_index = i;
            rec.scheme = plan.scheme;
            rec.pattern = space.at(i);
            rec.sources = plan.sources;
            rec.targets = plan.targets(rec.pattern);
            rec.alpha = cfg.alpha;
            rec.lattice_spacing = cfg.lattice_spacing;
            rec.parameters = plan.parameters;

            const std::string stem = variant_stem(sample.image_path, i);
            auto rendered = render_variant(cfg.mode, sample, basis, rec.targets, stem);
            if (rendered.rejection) {
                rec.rejected = true;
                rec.reason = *rendered.rejection;
                return;
            }
            rec.image_path = stem + ".png";
            write_png(cfg.output_dir / rec.image_path, rendered.image);
            if (cfg.mode == Mode::Segment) {
                rec.mask_path = stem + "_mask.png";
                write_png(cfg.output_dir / rec.mask_path, *rendered.mask);
            }
            if (cfg.mode == Mode::Detect) {
                rec.annotation = rendered.annotation;
                rec.annotation_path = stem + ".json";
                json doc = json::array({annotation_json(*rendered.annotation)});
                write_text(cfg.output_dir / rec.annotation_path, doc.dump(2) + "\n");
            }
        });
        for (auto& r : records) manifest.records.push_back(std::move(r));
    }

    write_text(cfg.output_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

}  // namespace ndmls
