#include <doctest.h>

#include <random>
#include <set>

#include "ndmls/nine_dot.hpp"
#include "ndmls/warp.hpp"
#include "oracles.hpp"

using namespace ndmls;

namespace {

WarpField translation_field(int w, int h, Point2 shift) {
    // out(v) = src(v - shift)
    auto lattice = Lattice::covering(w, h, 1);
    std::vector<Point2> s(lattice.vertex_count());
    for (int r = 0; r < lattice.rows; ++r)
        for (int c = 0; c < lattice.cols; ++c) s[lattice.index(c, r)] = lattice.vertex(c, r) - shift;
    return WarpField(lattice, s);
}

}  // namespace

TEST_CASE("identity handles give an identity field and bit-exact output") {
    const auto img = oracle::textured_image(33, 21, 3, 5);
    const auto p = nine_dot_points(img.dims(), 0.23);
    for (int g : {1, 3}) {
        const auto basis = precompute_basis(p, 2.0, img.width(), img.height(), g);
        const auto field = build_warp_field(basis, p);
        for (int r = 0; r < field.lattice().rows; ++r)
            for (int c = 0; c < field.lattice().cols; ++c)
                CHECK(distance(field.sample(c, r), field.lattice().vertex(c, r)) < 1e-9);
        CHECK(warp_image(img, field, Sampling::Bilinear) == img);
        CHECK(warp_image(img, field, Sampling::Nearest) == img);
    }
}

TEST_CASE("build_warp_field checks handle sources against the basis") {
    const std::vector<Point2> p{{3, 3}, {10, 4}, {6, 9}};
    const auto basis = precompute_basis(p, 2.0, 12, 12, 1);
    CHECK_NOTHROW(build_warp_field(basis, HandleSet::identity(p)));
    CHECK_THROWS_AS(build_warp_field(basis, HandleSet::identity({{3, 3}, {10, 4}, {6, 8}})), Error);
}

TEST_CASE("translation handles give a uniform displacement field") {
    const std::vector<Point2> p{{5, 5}, {25, 6}, {14, 20}, {4, 18}};
    std::vector<Point2> q;
    for (auto s : p) q.push_back(s + Point2{1.5, -0.75});
    const auto basis = precompute_basis(p, 2.0, 30, 25, 1);
    const auto field = build_warp_field(basis, q);
    for (int r = 0; r < field.lattice().rows; ++r)
        for (int c = 0; c < field.lattice().cols; ++c) {
            const Point2 d = field.sample(c, r) - field.lattice().vertex(c, r);
            CHECK(d.x == doctest::Approx(-1.5).epsilon(1e-9));
            CHECK(d.y == doctest::Approx(0.75).epsilon(1e-9));
        }
}

TEST_CASE("field inverts the forward map") {
    const auto p = nine_dot_points({60, 40}, 0.23);
    auto q = p;
    q[0] = q[0] + Point2{3, 2};
    q[4] = q[4] + Point2{-2, 3};
    q[8] = q[8] + Point2{2, -2.5};
    const auto basis = precompute_basis(p, 2.0, 60, 40, 1);
    const auto forward = basis.transform_all(q);
    const auto field = build_warp_field(basis, q);
    // F(field(v)) == v, with F evaluated exactly where field(v) lands on a vertex neighbor.
    const auto& lat = field.lattice();
    double worst = 0.0;
    for (int r = 1; r + 1 < lat.rows; ++r)
        for (int c = 1; c + 1 < lat.cols; ++c) {
            const Point2 x = field.sample(c, r);
            const int i0 = static_cast<int>(std::floor(x.x)), j0 = static_cast<int>(std::floor(x.y));
            if (i0 < 0 || j0 < 0 || i0 + 1 >= lat.cols || j0 + 1 >= lat.rows) continue;
            const double fx = x.x - i0, fy = x.y - j0;
            auto F = [&](int a, int b) { return forward[lat.index(a, b)]; };
            const Point2 y = (1 - fx) * (1 - fy) * F(i0, j0) + fx * (1 - fy) * F(i0 + 1, j0) +
                             (1 - fx) * fy * F(i0, j0 + 1) + fx * fy * F(i0 + 1, j0 + 1);
            worst = std::max(worst, distance(y, lat.vertex(c, r)));
        }
    CHECK(worst < 1e-8);
}

TEST_CASE("warp_image sampling and fill") {
    SUBCASE("constant input stays constant with replicate fill") {
        Raster img(20, 15, 3, 77);
        const auto p = nine_dot_points(img.dims(), 0.23);
        auto q = p;
        q[4] = q[4] + Point2{3, 3};
        const auto field = build_warp_field(precompute_basis(p, 2.0, 20, 15, 1), q);
        CHECK(warp_image(img, field) == img);
        CHECK(warp_image(img, translation_field(20, 15, {-4.3, 2.2})) == img);
    }
    SUBCASE("integer translation with nearest sampling shifts the interior") {
        const auto img = oracle::textured_image(24, 18, 1, 9);
        const auto out = warp_image(img, translation_field(24, 18, {3, -2}), Sampling::Nearest,
                                    Fill::constant(0));
        for (int y = 0; y < 18; ++y)
            for (int x = 0; x < 24; ++x) {
                const int sx = x - 3, sy = y + 2;
                if (sx >= 0 && sy < 18) CHECK(out.at(x, y) == img.at(sx, sy));
                else CHECK(out.at(x, y) == 0);
            }
    }
    SUBCASE("bilinear half-pixel shift averages neighbors, rounding half up") {
        Raster img(4, 1, 1);
        img.at(0, 0) = 10;
        img.at(1, 0) = 11;
        img.at(2, 0) = 20;
        img.at(3, 0) = 30;
        const auto out = warp_image(img, translation_field(4, 1, {-0.5, 0}));
        CHECK(out.at(0, 0) == 11);  // 10.5 -> 11
        CHECK(out.at(1, 0) == 16);  // 15.5 -> 16
        CHECK(out.at(2, 0) == 25);
        CHECK(out.at(3, 0) == 30);  // replicate edge
    }
}

TEST_CASE("warp_mask keeps labels discrete") {
    auto mask = oracle::disk_mask(40, 40, 20, 20, 9, 7);
    const auto p = nine_dot_points(mask.dims(), 0.23);
    auto q = p;
    q[4] = q[4] + Point2{2.7, -1.9};
    q[1] = q[1] + Point2{-1.3, 2.2};
    const auto field = build_warp_field(precompute_basis(p, 2.0, 40, 40, 1), q);
    const auto out = warp_mask(mask, field);
    for (auto v : out.pixels()) CHECK((v == 0 || v == 7));
    CHECK(warp_mask(mask, WarpField::identity(40, 40)) == mask);
    CHECK_THROWS_AS(warp_mask(Raster(4, 4, 3), WarpField::identity(4, 4)), Error);
}

TEST_CASE("translated disk keeps its area") {
    const auto mask = oracle::disk_mask(64, 64, 30, 30, 12);
    const std::vector<Point2> p{{10, 10}, {50, 12}, {30, 50}, {12, 40}};
    std::vector<Point2> q;
    for (auto s : p) q.push_back(s + Point2{4.4, 3.6});
    const auto field = build_warp_field(precompute_basis(p, 2.0, 64, 64, 1), q);
    const auto out = warp_mask(mask, field);
    auto area = [](const Raster& m) {
        return std::count_if(m.pixels().begin(), m.pixels().end(), [](auto v) { return v != 0; });
    };
    const double a0 = static_cast<double>(area(mask));
    CHECK(std::abs(area(out) - a0) <= 0.02 * a0);
    double sx = 0, sy = 0, n = 0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (out.at(x, y)) { sx += x; sy += y; n += 1; }
    CHECK(sx / n == doctest::Approx(34.4).epsilon(0.5 / 34.4));
    CHECK(sy / n == doctest::Approx(33.6).epsilon(0.5 / 33.6));
}

TEST_CASE("markers at the sources land on the targets") {
    const int w = 80, h = 80;
    const auto p = nine_dot_points({w, h}, 0.23);
    const Point2 moves[] = {{4, 3}, {-3, 4}, {0, -5}, {5, 0}, {-4, -4}, {3, -3}, {-5, 1}, {2, 5}, {-2, -3}};

    Raster img(w, h, 3, 0);
    for (std::size_t i = 0; i < 9; ++i) {
        const int x = static_cast<int>(std::lround(p[i].x)), y = static_cast<int>(std::lround(p[i].y));
        img.at(x, y, 0) = static_cast<std::uint8_t>(20 + 20 * i);
        img.at(x, y, 1) = 255;
    }
    // Sources on integer pixels so the marker is exactly at p.
    std::vector<Point2> pr;
    for (auto s : p) pr.push_back({std::round(s.x), std::round(s.y)});
    std::vector<Point2> qr;
    for (std::size_t i = 0; i < 9; ++i) qr.push_back(pr[i] + moves[i]);

    const auto field = build_warp_field(precompute_basis(pr, 2.0, w, h, 1), qr);
    const auto out = warp_image(img, field, Sampling::Nearest);
    for (std::size_t i = 0; i < 9; ++i) {
        bool found = false;
        for (int dy = -1; dy <= 1 && !found; ++dy)
            for (int dx = -1; dx <= 1 && !found; ++dx) {
                const int x = static_cast<int>(qr[i].x) + dx, y = static_cast<int>(qr[i].y) + dy;
                found = out.at(x, y, 1) == 255 && out.at(x, y, 0) == 20 + 20 * i;
            }
        CHECK_MESSAGE(found, "marker " << i);
    }
}

TEST_CASE("coarse lattice approximates the exact field") {
    const auto p = nine_dot_points({96, 96}, 0.23);
    auto q = p;
    for (std::size_t i = 0; i < 9; i += 2) q[i] = q[i] + Point2{3.0, -2.0};
    const auto f1 = build_warp_field(precompute_basis(p, 2.0, 96, 96, 1), q);
    const auto f4 = build_warp_field(precompute_basis(p, 2.0, 96, 96, 4), q);
    double worst = 0;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            worst = std::max(worst, distance(f1.source_coordinate(x, y), f4.source_coordinate(x, y)));
    MESSAGE("max |g1 - g4| = " << worst << " px");
    CHECK(worst < 1.0);
}

TEST_CASE("warping is deterministic") {
    const auto img = oracle::textured_image(50, 40, 3, 3);
    const auto p = nine_dot_points(img.dims(), 0.23);
    auto q = p;
    q[3] = q[3] + Point2{1.2, 0.4};
    const auto b1 = precompute_basis(p, 2.0, 50, 40, 2);
    const auto b2 = precompute_basis(p, 2.0, 50, 40, 2);
    const auto f1 = build_warp_field(b1, q), f2 = build_warp_field(b2, q);
    CHECK(f1 == f2);
    CHECK(warp_image(img, f1) == warp_image(img, f2));
}
