#include "ndmls/mls.hpp"

#include <cmath>
#include <string>

namespace ndmls {

void validate_alpha(double alpha) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        throw Error(ErrorKind::InvalidInput, "alpha must be a finite value > 1");
    }
}

void validate_sources(std::span<const Point2> sources) {
    if (sources.empty()) {
        throw Error(ErrorKind::InvalidInput, "handle set is empty");
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (!sources[i].finite()) {
            throw Error(ErrorKind::InvalidInput, "non-finite handle " + std::to_string(i));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (distance(sources[i], sources[j]) < kSingularDistance) {
                throw Error(ErrorKind::InvalidInput, "duplicate handles " + std::to_string(j) +
                                                         " and " + std::to_string(i));
            }
        }
    }
}

HandleSet::HandleSet(std::vector<Point2> sources, std::vector<Point2> targets, double alpha)
    : sources_(std::move(sources)), targets_(std::move(targets)), alpha_(alpha) {
    validate_alpha(alpha_);
    validate_sources(sources_);
    if (targets_.size() != sources_.size()) {
        throw Error(ErrorKind::InvalidInput, "source/target count mismatch");
    }
    for (const auto& q : targets_) {
        if (!q.finite()) throw Error(ErrorKind::InvalidInput, "non-finite target");
    }
}

HandleSet HandleSet::identity(std::vector<Point2> sources, double alpha) {
    auto targets = sources;
    return HandleSet(std::move(sources), std::move(targets), alpha);
}

HandleSet HandleSet::swapped() const { return HandleSet(targets_, sources_, alpha_); }

WeightResult compute_weights(std::span<const Point2> sources, Point2 v, double alpha) {
    if (sources.empty()) {
        throw Error(ErrorKind::InvalidInput, "compute_weights: empty source list");
    }
    WeightResult result;
    result.weights.resize(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const Point2 d = sources[i] - v;
        const double d2 = dot(d, d);
        if (std::sqrt(d2) < kSingularDistance) {
            if (!result.singular) result.singular = i;
            result.weights[i] = 0.0;
            continue;
        }
        result.weights[i] = std::pow(d2, -alpha);
    }
    return result;
}

Centroids weighted_centroids(const HandleSet& handles, std::span<const double> weights) {
    if (weights.size() != handles.size()) {
        throw Error(ErrorKind::InvalidInput, "weighted_centroids: weight count mismatch");
    }
    double sum = 0.0;
    Point2 p{}, q{};
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!(w > 0.0)) throw Error(ErrorKind::InvalidInput, "weighted_centroids: weights must be positive");
        sum += w;
        p = p + w * handles.sources()[i];
        q = q + w * handles.targets()[i];
    }
    return {(1.0 / sum) * p, (1.0 / sum) * q};
}

Lattice Lattice::covering(int width, int height, int spacing) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorKind::InvalidInput, "lattice dims must be positive");
    }
    if (spacing < 1) {
        throw Error(ErrorKind::InvalidInput, "lattice spacing must be >= 1");
    }
    Lattice l;
    l.width = width;
    l.height = height;
    l.spacing = spacing;
    l.cols = (width + spacing - 1) / spacing + 1;
    l.rows = (height + spacing - 1) / spacing + 1;
    return l;
}

PrecomputedBasis::PrecomputedBasis(std::vector<Point2> sources, double alpha, const Lattice& lattice)
    : sources_(std::move(sources)), alpha_(alpha), lattice_(lattice) {
    validate_alpha(alpha_);
    validate_sources(sources_);

    const std::size_t n = sources_.size();
    const std::size_t count = lattice_.vertex_count();
    weights_.assign(count * n, 0.0);
    rot_.assign(count * n * 2, 0.0);
    rot_sum_.assign(count, Point2{});
    f_bar_rest_.assign(count, Point2{});
    weight_sum_.assign(count, 0.0);
    p_star_.assign(count, Point2{});
    dist_.assign(count, 0.0);
    singular_.assign(count, -1);

    for (int row = 0; row < lattice_.rows; ++row) {
        for (int col = 0; col < lattice_.cols; ++col) {
            const std::size_t vi = lattice_.index(col, row);
            const Point2 v = lattice_.vertex(col, row);
            double* w = weights_.data() + vi * n;

            bool singular = false;
            double sum = 0.0;
            Point2 p_star{};
            for (std::size_t i = 0; i < n; ++i) {
                const Point2 d = sources_[i] - v;
                const double d2 = dot(d, d);
                if (std::sqrt(d2) < kSingularDistance) {
                    singular_[vi] = static_cast<std::int32_t>(i);
                    singular = true;
                    break;
                }
                w[i] = std::pow(d2, -alpha_);
                sum += w[i];
                p_star = p_star + w[i] * sources_[i];
            }
            if (singular) {
                std::fill(w, w + n, 0.0);
                continue;
            }
            p_star = (1.0 / sum) * p_star;
            weight_sum_[vi] = sum;
            p_star_[vi] = p_star;

            const Point2 dv = v - p_star;
            dist_[vi] = norm(dv);
            double* rot = rot_.data() + vi * n * 2;
            for (std::size_t i = 0; i < n; ++i) {
                const Point2 ph = sources_[i] - p_star;
                rot[2 * i] = w[i] * (ph.x * dv.x + ph.y * dv.y);
                rot[2 * i + 1] = w[i] * (ph.x * dv.y - ph.y * dv.x);
                rot_sum_[vi] = rot_sum_[vi] + Point2{rot[2 * i], rot[2 * i + 1]};
                f_bar_rest_[vi] = f_bar_rest_[vi] + Point2{ph.x * rot[2 * i] - ph.y * rot[2 * i + 1],
                                                           ph.x * rot[2 * i + 1] + ph.y * rot[2 * i]};
            }
        }
    }
}

std::span<const double> PrecomputedBasis::weights(int col, int row) const {
    const std::size_t n = sources_.size();
    return {weights_.data() + lattice_.index(col, row) * n, n};
}

Mat2 PrecomputedBasis::a_matrix(int col, int row, std::size_t handle) const {
    const double* rot = rot_.data() + (lattice_.index(col, row) * sources_.size() + handle) * 2;
    return {rot[0], rot[1], -rot[1], rot[0]};
}

std::optional<std::size_t> PrecomputedBasis::singular_handle(int col, int row) const {
    const auto s = singular_[lattice_.index(col, row)];
    if (s < 0) return std::nullopt;
    return static_cast<std::size_t>(s);
}

std::vector<std::size_t> PrecomputedBasis::moved_handles(std::span<const Point2> targets) const {
    if (targets.size() != sources_.size()) {
        throw Error(ErrorKind::InvalidInput, "target count does not match basis handle count");
    }
    std::vector<std::size_t> moved;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] == sources_[i])) moved.push_back(i);
    }
    return moved;
}

Point2 PrecomputedBasis::transform_vertex(std::span<const Point2> targets, int col, int row) const {
    const auto moved = moved_handles(targets);
    return transform_unchecked(targets.data(), moved, col, row);
}

// With q_i = p_i + delta_i only moved handles contribute beyond the cached rest state:
// q* = p* + sum_i w_i delta_i / sum w, and
// f_bar = f_bar_rest + sum_i delta_i A_i - (q* - p*) sum_i A_i.
Point2 PrecomputedBasis::transform_unchecked(const Point2* targets, std::span<const std::size_t> moved,
                                             int col, int row) const {
    const std::size_t n = sources_.size();
    const std::size_t vi = lattice_.index(col, row);
    if (singular_[vi] >= 0) return targets[static_cast<std::size_t>(singular_[vi])];

    const double* w = weights_.data() + vi * n;
    const double* rot = rot_.data() + vi * n * 2;
    const double sum = weight_sum_[vi];

    double sx = 0.0, sy = 0.0;
    double fx = f_bar_rest_[vi].x, fy = f_bar_rest_[vi].y;
    for (const std::size_t i : moved) {
        const double dx = targets[i].x - sources_[i].x;
        const double dy = targets[i].y - sources_[i].y;
        const double c = rot[2 * i];
        const double s = rot[2 * i + 1];
        sx += w[i] * dx;
        sy += w[i] * dy;
        fx += dx * c - dy * s;
        fy += dx * s + dy * c;
    }
    const Point2 shift{sx / sum, sy / sum};
    const Point2 cs = rot_sum_[vi];
    fx -= shift.x * cs.x - shift.y * cs.y;
    fy -= shift.x * cs.y + shift.y * cs.x;
    const Point2 q_star = p_star_[vi] + shift;

    const double len = std::sqrt(fx * fx + fy * fy);
    if (len < kDegenerateNorm * sum) {
        return lattice_.vertex(col, row) + shift;
    }
    const double scale = dist_[vi] / len;
    return {scale * fx + q_star.x, scale * fy + q_star.y};
}

std::vector<Point2> PrecomputedBasis::transform_all(std::span<const Point2> targets) const {
    const auto moved = moved_handles(targets);
    std::vector<Point2> out(lattice_.vertex_count());
    for (int row = 0; row < lattice_.rows; ++row) {
        for (int col = 0; col < lattice_.cols; ++col) {
            out[lattice_.index(col, row)] = transform_unchecked(targets.data(), moved, col, row);
        }
    }
    return out;
}

PrecomputedBasis precompute_basis(std::span<const Point2> sources, double alpha, int width,
                                  int height, int spacing) {
    return PrecomputedBasis({sources.begin(), sources.end()}, alpha,
                            Lattice::covering(width, height, spacing));
}

Point2 transform_point(const PrecomputedBasis& basis, std::span<const Point2> targets, Point2 v) {
    const auto& lat = basis.lattice();
    const double cx = v.x / lat.spacing;
    const double cy = v.y / lat.spacing;
    const double col = std::round(cx);
    const double row = std::round(cy);
    if (std::abs(cx - col) > 1e-9 || std::abs(cy - row) > 1e-9 || col < 0 || row < 0 ||
        col >= lat.cols || row >= lat.rows) {
        throw Error(ErrorKind::InvalidInput, "transform_point: v is not a lattice vertex");
    }
    return basis.transform_vertex(targets, static_cast<int>(col), static_cast<int>(row));
}

}  // namespace ndmls
