#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndmls/labels.hpp"
#include "ndmls/mask_geometry.hpp"
#include "ndmls/mls.hpp"
#include "ndmls/nine_dot.hpp"

namespace ndmls {

enum class Mode { Classify, Segment, Detect };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct RunConfig {
    Mode mode = Mode::Classify;
    NineDotConfig nine_dot;
    ContourHandleConfig contour;
    double alpha = kDefaultAlpha;
    int lattice_spacing = 1;
    std::uint64_t variants_per_image = 2004;
    bool anchor_corners = true;
    std::filesystem::path output_dir = "out";
    int parallelism = 1;

    /// Throws InvalidInput (or DegenerateGrid) on out-of-range values.
    void validate() const;
};

/// Reads RunConfig fields from JSON on top of `base`; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
/// Deformation-relevant fields only (no output_dir / parallelism).
nlohmann::json config_to_json(const RunConfig& cfg);

struct FileError {
    std::string path;
    std::string reason;
};

struct Dataset {
    std::vector<LabeledSample> samples;  // sorted by image_path
    std::vector<FileError> errors;
};

/// Walks `root` for PNG images. image_path is relative to root (generic form). Classify and
/// detect label each sample with its parent directory name. Segment/detect pair every image
/// with <masks_root>/<relative path>.png.
Dataset load_dataset(const std::filesystem::path& root, Mode mode,
                     const std::optional<std::filesystem::path>& masks_root = std::nullopt);

/// Sources and the move rule for one sample.
struct SamplePlan {
    std::string scheme;              // "nine-dot" | "contour"
    std::vector<Point2> sources;     // movable handles first, fixed anchors after
    int movable = 0;
    int directions = 0;
    double length = 0.0;             // displacement length L
    double phi0 = 0.0;
    double phi_step = 0.0;           // degrees between directions
    nlohmann::json parameters;

    std::vector<Point2> targets(const MovePattern& pattern) const;
};

SamplePlan plan_sample(const RunConfig& cfg, const LabeledSample& sample);

struct VariantRecord {
    std::string source_path;
    std::uint64_t variant_index = 0;
    std::string scheme;
    MovePattern pattern;
    std::vector<Point2> sources;
    std::vector<Point2> targets;
    double alpha = kDefaultAlpha;
    int lattice_spacing = 1;
    nlohmann::json parameters;
    std::string image_path;       // relative to the output root; empty when rejected
    std::string mask_path;
    std::string annotation_path;
    std::optional<Annotation> annotation;
    bool rejected = false;
    std::string reason;
};

nlohmann::json to_json(const VariantRecord& r);
VariantRecord record_from_json(const nlohmann::json& j);

struct Manifest {
    RunConfig config;
    std::vector<VariantRecord> records;
    std::vector<FileError> errors;

    std::size_t emitted() const;
    std::size_t rejected() const;
    nlohmann::json to_json() const;
};

struct RenderedVariant {
    Raster image;
    std::optional<Raster> mask;
    std::optional<Annotation> annotation;
    std::optional<std::string> rejection;
};

/// Warps one sample for one target set against a prepared basis.
RenderedVariant render_variant(Mode mode, const LabeledSample& sample, const PrecomputedBasis& basis,
                               std::span<const Point2> targets, const std::string& variant_id);

/// Re-renders a manifest record from the source sample alone.
RenderedVariant replay_variant(Mode mode, const VariantRecord& record, const LabeledSample& sample);

/// Generates all variants for all samples, writes outputs under cfg.output_dir and returns
/// the manifest (also written as manifest.json). Output bytes do not depend on parallelism.
Manifest run_augmentation(const RunConfig& cfg, const Dataset& dataset);

std::string variant_stem(const std::string& source_path, std::uint64_t index);

}  // namespace ndmls
