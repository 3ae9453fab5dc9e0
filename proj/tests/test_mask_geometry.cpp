#include <doctest.h>

#include <map>
#include <random>

#include "ndmls/mask_geometry.hpp"
#include "oracles.hpp"

using namespace ndmls;

namespace {

Raster random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution b(density);
    Raster m(w, h, 1);
    for (auto& v : m.pixels()) v = b(rng) ? 255 : 0;
    return m;
}

bool is_fg(const Raster& m, int x, int y) {
    return x >= 0 && y >= 0 && x < m.width() && y < m.height() && m.at(x, y) != 0;
}

RegionModel region_of(const Raster& m) { return analyze_largest_region(m); }

}  // namespace

TEST_CASE("connected_components") {
    SUBCASE("filled square") {
        const auto c = connected_components(oracle::rect_mask(20, 20, 3, 4, 12, 13));
        REQUIRE(c.size() == 1);
        CHECK(c[0].omega.size() == 100);
        CHECK(c[0].bbox == PixelBox{3, 4, 10, 10});
    }
    SUBCASE("two disjoint squares, largest first") {
        auto m = oracle::rect_mask(30, 30, 1, 1, 4, 4);
        for (int y = 10; y < 20; ++y)
            for (int x = 10; x < 20; ++x) m.at(x, y) = 255;
        const auto c = connected_components(m);
        REQUIRE(c.size() == 2);
        CHECK(c[0].omega.size() == 100);
        CHECK(c[1].omega.size() == 16);
    }
    SUBCASE("diagonal neighbors are connected") {
        Raster m(5, 5, 1);
        m.at(1, 1) = m.at(2, 2) = m.at(3, 3) = 1;
        CHECK(connected_components(m).size() == 1);
        CHECK(oracle::component_count(m) == 1);
    }
    SUBCASE("all background") { CHECK(connected_components(Raster(6, 6, 1)).empty()); }
    SUBCASE("random masks agree with the flood-fill oracle") {
        std::mt19937_64 rng(21);
        for (int t = 0; t < 40; ++t) {
            const auto m = random_mask(rng, 17, 13, 0.2 + 0.015 * t);
            const auto comps = connected_components(m);
            CHECK(comps.size() == oracle::component_count(m));
            const auto labels = oracle::component_labels(m);
            std::map<int, std::size_t> sizes;
            for (int l : labels) if (l >= 0) sizes[l]++;
            std::vector<std::size_t> expect;
            for (auto [l, s] : sizes) expect.push_back(s);
            std::sort(expect.rbegin(), expect.rend());
            std::vector<std::size_t> got;
            for (const auto& c : comps) got.push_back(c.omega.size());
            CHECK(got == expect);
        }
    }
}

TEST_CASE("barycenter") {
    SUBCASE("uniform square") {
        const auto m = oracle::rect_mask(20, 20, 0, 0, 9, 9);
        const auto r = connected_components(m)[0];
        const auto c = barycenter(r, m);
        CHECK(c.x == doctest::Approx(4.5));
        CHECK(c.y == doctest::Approx(4.5));
    }
    SUBCASE("single pixel") {
        Raster m(10, 10, 1);
        m.at(3, 7) = 200;
        const auto c = barycenter(connected_components(m)[0], m);
        CHECK(c == Point2{3, 7});
    }
    SUBCASE("gray values weight the centroid") {
        Raster m(10, 3, 1);
        m.at(2, 1) = 100;
        m.at(3, 1) = 300 / 3;  // 100
        m.at(4, 1) = 200;
        const auto c = barycenter(connected_components(m)[0], m);
        CHECK(c.x == doctest::Approx((2 * 100 + 3 * 100 + 4 * 200) / 400.0));
    }
    SUBCASE("binary regions match the pixel mean") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 30; ++t) {
            const auto m = random_mask(rng, 15, 15, 0.55);
            const auto comps = connected_components(m);
            if (comps.empty()) continue;
            const auto labels = oracle::component_labels(m);
            const auto& r = comps[0];
            const int lab = labels[static_cast<std::size_t>(r.omega[0].y * 15 + r.omega[0].x)];
            double sx = 0, sy = 0, n = 0;
            for (int y = 0; y < 15; ++y)
                for (int x = 0; x < 15; ++x)
                    if (labels[static_cast<std::size_t>(y * 15 + x)] == lab) { sx += x; sy += y; n += 1; }
            const auto c = barycenter(r, m);
            CHECK(std::abs(c.x - sx / n) < 1e-9);
            CHECK(std::abs(c.y - sy / n) < 1e-9);
        }
    }
}

TEST_CASE("trace_contour") {
    SUBCASE("3x3 square has 8 boundary pixels") {
        const auto r = connected_components(oracle::rect_mask(7, 7, 2, 2, 4, 4))[0];
        const auto c = trace_contour(r);
        CHECK(c.size() == 8);
    }
    SUBCASE("single pixel") {
        Raster m(5, 5, 1);
        m.at(2, 3) = 1;
        const auto c = trace_contour(connected_components(m)[0]);
        REQUIRE(c.size() == 1);
        CHECK(c[0] == Point2{2, 3});
    }
    SUBCASE("disk contour hugs the circle") {
        const auto m = oracle::disk_mask(60, 60, 30, 30, 20);
        const auto c = trace_contour(connected_components(m)[0]);
        CHECK(c.size() > 100);
        for (auto p : c) CHECK(std::abs(distance(p, {30, 30}) - 20.0) <= 1.0);
    }
    SUBCASE("random regions: boundary pixels, closed 8-connected loop, full coverage") {
        std::mt19937_64 rng(99);
        for (int t = 0; t < 60; ++t) {
            const auto m = random_mask(rng, 14, 12, 0.45 + 0.005 * t);
            const auto comps = connected_components(m);
            if (comps.empty()) continue;
            const auto& r = comps[0];
            const auto c = trace_contour(r);
            for (const auto& p : c) {
                const int x = static_cast<int>(p.x), y = static_cast<int>(p.y);
                CHECK(r.contains(x, y));
                CHECK((!is_fg(m, x - 1, y) || !is_fg(m, x + 1, y) || !is_fg(m, x, y - 1) ||
                       !is_fg(m, x, y + 1)));
            }
            for (std::size_t i = 0; i < c.size() && c.size() > 1; ++i) {
                const auto a = c[i], b = c[(i + 1) % c.size()];
                CHECK(std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)) <= 1.0);
            }
            // Every region pixel 8-adjacent to the exterior background is on the contour
            // when the region has no holes; check the extreme pixels at least.
            const auto& first = r.omega.front();
            CHECK(c.front() == Point2{static_cast<double>(first.x), static_cast<double>(first.y)});
        }
    }
}

TEST_CASE("ray_intersection") {
    SUBCASE("disk, beta = 0") {
        const auto r = region_of(oracle::disk_mask(60, 60, 30, 30, 20));
        const auto p = ray_intersection(r, 0.0, 6.0);
        CHECK(distance(p, {50, 30}) <= 1.0);
    }
    SUBCASE("square, beta = 45 picks the nearest corner on that diagonal") {
        const auto r = region_of(oracle::rect_mask(40, 40, 10, 10, 29, 29));
        const auto p = ray_intersection(r, 45.0, 6.0);
        // brute force: contour point with the best angle match, farthest on ties
        Point2 best{};
        double best_diff = 1e9, best_d = -1;
        for (auto c : r.contour) {
            const double a = std::atan2(c.y - r.barycenter.y, c.x - r.barycenter.x) * 180 / kPi;
            const double diff = std::abs(a - 45.0);
            const double d = distance(c, r.barycenter);
            if (diff < best_diff - 1e-12 || (std::abs(diff - best_diff) <= 1e-12 && d > best_d)) {
                best = c; best_diff = diff; best_d = d;
            }
        }
        CHECK(p == best);
        CHECK(p == Point2{29, 29});
    }
    SUBCASE("non-convex shape takes the outer crossing") {
        // A slot cut in from the right edge runs vertically through the square, so the
        // rightward ray meets the slot walls (x = 25, 28) before the outer edge (x = 34).
        auto m = oracle::rect_mask(40, 40, 5, 5, 34, 34);
        for (int y = 10; y <= 29; ++y)
            for (int x = 26; x <= 27; ++x) m.at(x, y) = 0;
        for (int y = 10; y <= 11; ++y)
            for (int x = 26; x <= 34; ++x) m.at(x, y) = 0;
        const auto r = region_of(m);
        const auto p = ray_intersection(r, 0.0, 6.0);
        CHECK(p.x == 34);
        CHECK(std::abs(p.y - r.barycenter.y) <= 1.0);
    }
    SUBCASE("xi must be positive") {
        const auto r = region_of(oracle::disk_mask(30, 30, 15, 15, 8));
        CHECK_THROWS_AS(ray_intersection(r, 0.0, 0.0), Error);
        ContourHandleConfig cfg;
        cfg.xi = 0.0;
        CHECK_THROWS_AS(cfg.validate(), Error);
    }
    SUBCASE("no contour point near the ray") {
        Raster m(20, 20, 1);
        for (int x = 3; x < 17; ++x) m.at(x, 10) = 255;
        const auto r = region_of(m);
        try {
            ray_intersection(r, 90.0, 6.0);
            FAIL("expected no-intersection");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoIntersection);
        }
    }
}

TEST_CASE("contour_handles") {
    const ContourHandleConfig cfg;
    SUBCASE("disk gives one point per octant on the circle") {
        const double cx = 40, cy = 40, rad = 20;
        const auto r = region_of(oracle::disk_mask(80, 80, cx, cy, rad));
        const auto h = contour_handles(r, cfg);
        REQUIRE(h.size() == 8);
        for (std::size_t i = 0; i < 8; ++i) {
            const double b = deg_to_rad(cfg.ray_angles[i]);
            const Point2 ideal{cx + rad * std::cos(b), cy + rad * std::sin(b)};
            CHECK(distance(h[i], ideal) <= 1.0);
        }
    }
    SUBCASE("thin horizontal line is degenerate") {
        Raster m(30, 10, 1);
        for (int x = 5; x < 25; ++x) m.at(x, 5) = 255;
        const auto r = region_of(m);
        try {
            const auto h = contour_handles(r, cfg);
            CHECK(h.size() >= 3);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DegenerateRegion);
        }
    }
    SUBCASE("convex polygon: handles lie on the traced contour") {
        Raster m(50, 50, 1);
        for (int y = 0; y < 50; ++y)
            for (int x = 0; x < 50; ++x)
                if (x + y > 30 && x - y < 25 && y - x < 20 && x + y < 80) m.at(x, y) = 255;
        const auto r = region_of(m);
        for (auto p : contour_handles(r, cfg)) {
            CHECK(std::find(r.contour.begin(), r.contour.end(), p) != r.contour.end());
        }
    }
    SUBCASE("near-duplicate handles are merged") {
        ContourHandleConfig dense = cfg;
        dense.ray_angles = {0, 1, 2, 90, 180, 270};
        dense.xi = 3;
        const auto r = region_of(oracle::disk_mask(60, 60, 30, 30, 20));
        const auto h = contour_handles(r, dense);
        for (std::size_t i = 0; i < h.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) CHECK(distance(h[i], h[j]) >= dense.dedupe_dist);
        CHECK(h.size() < dense.ray_angles.size());
    }
}

TEST_CASE("contour_target") {
    RegionModel r;
    r.bbox = {0, 0, 40, 60};
    ContourHandleConfig cfg;
    cfg.k_l = 0.1;
    const Point2 p{10, 20};
    const auto q0 = contour_target(p, r, cfg, 0);
    CHECK(q0.x - p.x == doctest::Approx(2.8284271247461903));
    CHECK(q0.y - p.y == doctest::Approx(2.8284271247461903));
    for (int i = 0; i < 2; ++i) {
        const auto a = contour_target(p, r, cfg, i);
        const auto b = contour_target(p, r, cfg, i + 2);
        CHECK(std::abs(a.x + b.x - 2 * p.x) <= 1e-12);
        CHECK(std::abs(a.y + b.y - 2 * p.y) <= 1e-12);
    }
    ContourHandleConfig zero = cfg;
    zero.k_l = 0.0;
    CHECK(contour_target(p, r, zero, 1) == p);
    CHECK(cfg.direction_count() == 4);
}
