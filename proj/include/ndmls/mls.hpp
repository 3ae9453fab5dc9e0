#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ndmls/types.hpp"

namespace ndmls {

/// Sources closer than this to an evaluation point are treated as coincident.
constexpr double kSingularDistance = 1e-6;
/// Below this norm the rotated direction carries no information.
constexpr double kDegenerateNorm = 1e-12;
constexpr double kDefaultAlpha = 2.0;

/// Paired control points: content at sources[i] is carried to targets[i].
class HandleSet {
public:
    HandleSet(std::vector<Point2> sources, std::vector<Point2> targets, double alpha = kDefaultAlpha);

    /// Identity handle set (targets == sources).
    static HandleSet identity(std::vector<Point2> sources, double alpha = kDefaultAlpha);

    const std::vector<Point2>& sources() const { return sources_; }
    const std::vector<Point2>& targets() const { return targets_; }
    double alpha() const { return alpha_; }
    std::size_t size() const { return sources_.size(); }

    /// Same handles with source and target roles exchanged.
    HandleSet swapped() const;

private:
    std::vector<Point2> sources_;
    std::vector<Point2> targets_;
    double alpha_;
};

/// Throws InvalidInput unless |sources| >= 1, all finite and pairwise separated.
void validate_sources(std::span<const Point2> sources);
void validate_alpha(double alpha);

struct WeightResult {
    std::vector<double> weights;
    /// Set when v coincides with a source; weights are then meaningless.
    std::optional<std::size_t> singular;
};

/// w_i = 1 / |p_i - v|^(2 alpha)
WeightResult compute_weights(std::span<const Point2> sources, Point2 v, double alpha);

struct Centroids {
    Point2 p_star;
    Point2 q_star;
};

Centroids weighted_centroids(const HandleSet& handles, std::span<const double> weights);

struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;
};

/// Regular lattice of vertices (col * spacing, row * spacing) covering [0,width] x [0,height].
struct Lattice {
    int width = 0;
    int height = 0;
    int spacing = 1;
    int cols = 0;
    int rows = 0;

    static Lattice covering(int width, int height, int spacing);

    std::size_t vertex_count() const { return static_cast<std::size_t>(cols) * rows; }
    std::size_t index(int col, int row) const { return static_cast<std::size_t>(row) * cols + col; }
    Point2 vertex(int col, int row) const {
        return {static_cast<double>(col) * spacing, static_cast<double>(row) * spacing};
    }
    friend bool operator==(const Lattice&, const Lattice&) = default;
};

/// Target-independent part of the rigid MLS map, evaluated at every lattice vertex.
///
/// Per vertex v it keeps the weights w_i, the weighted source centroid p*, |v - p*| and
/// the matrices A_i = w_i (p^_i; -p^_i_perp)(v - p*; -(v - p*)_perp)^T. Each A_i has the
/// form [[c, s], [-s, c]], so only (c, s) are stored. Immutable once built; any number of
/// target sets can be evaluated against the same basis concurrently.
class PrecomputedBasis {
public:
    PrecomputedBasis(std::vector<Point2> sources, double alpha, const Lattice& lattice);

    const Lattice& lattice() const { return lattice_; }
    std::size_t handle_count() const { return sources_.size(); }
    const std::vector<Point2>& sources() const { return sources_; }
    double alpha() const { return alpha_; }

    std::span<const double> weights(int col, int row) const;
    double weight_sum(int col, int row) const { return weight_sum_[lattice_.index(col, row)]; }
    Point2 p_star(int col, int row) const { return p_star_[lattice_.index(col, row)]; }
    double dist(int col, int row) const { return dist_[lattice_.index(col, row)]; }
    Mat2 a_matrix(int col, int row, std::size_t handle) const;
    /// Index of the source coinciding with this vertex, if any.
    std::optional<std::size_t> singular_handle(int col, int row) const;

    /// f_r at a lattice vertex for the given targets.
    Point2 transform_vertex(std::span<const Point2> targets, int col, int row) const;

    /// Evaluates every vertex; result is indexed like the lattice.
    std::vector<Point2> transform_all(std::span<const Point2> targets) const;

private:
    Point2 transform_unchecked(const Point2* targets, std::span<const std::size_t> moved, int col,
                               int row) const;
    std::vector<std::size_t> moved_handles(std::span<const Point2> targets) const;

    std::vector<Point2> sources_;
    double alpha_;
    Lattice lattice_;
    std::vector<double> weights_;     // vertex-major, handle_count per vertex
    std::vector<double> rot_;         // (c, s) pairs, vertex-major
    std::vector<Point2> rot_sum_;     // (sum c, sum s) per vertex
    std::vector<Point2> f_bar_rest_;  // f_bar with q = p
    std::vector<double> weight_sum_;
    std::vector<Point2> p_star_;
    std::vector<double> dist_;
    std::vector<std::int32_t> singular_;  // -1 when regular
};

PrecomputedBasis precompute_basis(std::span<const Point2> sources, double alpha, int width,
                                  int height, int spacing);

/// Point-form entry: v must be a vertex of the basis lattice.
Point2 transform_point(const PrecomputedBasis& basis, std::span<const Point2> targets, Point2 v);

}  // namespace ndmls
