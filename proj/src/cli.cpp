#include "ndmls/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ndmls/pipeline.hpp"
#include "ndmls/preview.hpp"

namespace fs = std::filesystem;

namespace ndmls {

namespace {

struct Flags {
    std::string input;
    std::string masks;
    std::string out;
    std::string config;
    std::optional<double> kp, kl, ks, phi0, alpha;
    std::optional<int> grid, jobs;
    std::optional<std::uint64_t> count;
    std::uint64_t variant = 0;
    bool seedless = false;
};

void add_common(CLI::App* cmd, Flags& f, bool preview) {
    cmd->add_option("--input", f.input, preview ? "Source PNG image" : "Input image directory")->required();
    cmd->add_option("--masks", f.masks, preview ? "Mask PNG (selects contour handles)" : "Mask directory");
    cmd->add_option("--out", f.out, preview ? "Output PNG" : "Output directory");
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    cmd->add_option("--kp", f.kp, "Nine-dot placement coefficient k_p");
    cmd->add_option("--kl", f.kl, "Displacement coefficient k_l (both schemes)");
    cmd->add_option("--ks", f.ks, "Angular step coefficient k_s");
    cmd->add_option("--phi0", f.phi0, "Initial displacement angle, degrees (both schemes)");
    cmd->add_option("--alpha", f.alpha, "MLS weighting exponent (> 1)");
    cmd->add_option("--grid", f.grid, "Lattice spacing in pixels");
    cmd->add_option("--count", f.count, "Variants per image");
    cmd->add_option("--jobs", f.jobs, "Worker threads");
    cmd->add_flag("--seedless", f.seedless, "Accepted for compatibility; generation is always deterministic");
    if (preview) cmd->add_option("--variant", f.variant, "Variant index to preview");
}

RunConfig resolve_config(Mode mode, const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw Error(ErrorKind::InvalidInput, "cannot open config " + f.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::InvalidInput, std::string("config is not valid JSON: ") + e.what());
        }
        cfg = config_from_json(j, cfg);
    }
    cfg.mode = mode;
    if (f.kp) cfg.nine_dot.k_p = *f.kp;
    if (f.kl) cfg.nine_dot.k_l = cfg.contour.k_l = *f.kl;
    if (f.ks) cfg.nine_dot.k_s = *f.ks;
    if (f.phi0) cfg.nine_dot.phi0 = cfg.contour.phi0 = *f.phi0;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.grid) cfg.lattice_spacing = *f.grid;
    if (f.count) cfg.variants_per_image = *f.count;
    if (f.jobs) cfg.parallelism = *f.jobs;
    if (!f.out.empty()) cfg.output_dir = f.out;
    cfg.validate();
    return cfg;
}

int run_generate(Mode mode, const Flags& f, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = resolve_config(mode, f);
        if (mode != Mode::Classify && f.masks.empty()) {
            throw Error(ErrorKind::InvalidInput, "--masks is required for segment and detect");
        }
    } catch (const Error& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    }

    std::optional<fs::path> masks;
    if (!f.masks.empty()) masks = fs::path(f.masks);
    Dataset ds;
    try {
        ds = load_dataset(f.input, mode, masks);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    const Manifest m = run_augmentation(cfg, ds);
    for (const auto& e : m.errors) err << e.path << ": " << e.reason << "\n";
    out << m.emitted() << " variants written (" << m.rejected() << " rejected, " << m.errors.size()
        << " file errors) from " << ds.samples.size() << " samples to " << cfg.output_dir.string()
        << "\n";
    return m.errors.empty() ? kExitOk : kExitPartial;
}

int run_preview(const Flags& f, std::ostream& out, std::ostream& err) {
    const Mode mode = f.masks.empty() ? Mode::Classify : Mode::Segment;
    RunConfig cfg;
    try {
        cfg = resolve_config(mode, f);
    } catch (const Error& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    }
    try {
        LabeledSample sample;
        sample.image_path = f.input;
        sample.image = read_png(f.input);
        if (!f.masks.empty()) sample.mask = read_png(f.masks);
        const SamplePlan plan = plan_sample(cfg, sample);
        const PatternSpace space(plan.movable, plan.directions);
        const HandleSet handles(plan.sources, plan.targets(space.at(f.variant)), cfg.alpha);
        const fs::path out_path = f.out.empty() ? fs::path("preview.png") : fs::path(f.out);
        preview_render(sample, handles, out_path, cfg.lattice_spacing);
        out << "preview of variant " << f.variant << " (" << plan.scheme << ", " << handles.size()
            << " handles) written to " << out_path.string() << "\n";
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic moving-least-squares data augmentation", "ndmls"};
    app.require_subcommand(1);
    Flags classify, segment, detect, preview;
    add_common(app.add_subcommand("classify", "Nine-dot deformation of a labeled image tree"), classify, false);
    add_common(app.add_subcommand("segment", "Contour-handle deformation of images and masks"), segment, false);
    add_common(app.add_subcommand("detect", "Contour-handle deformation with box annotations"), detect, false);
    add_common(app.add_subcommand("preview", "Render handles, moves and the warped result"), preview, true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kExitInvalidConfig;
    }

    try {
        if (app.got_subcommand("classify")) return run_generate(Mode::Classify, classify, out, err);
        if (app.got_subcommand("segment")) return run_generate(Mode::Segment, segment, out, err);
        if (app.got_subcommand("detect")) return run_generate(Mode::Detect, detect, out, err);
        return run_preview(preview, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartial;
    }
}

}  // namespace ndmls
