#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "tvf/image_io.hpp"
#include "tvf/observation.hpp"
#include "tvf/rng.hpp"

using namespace tvf;

namespace {

Observation random_raster(int rows, int cols, Rng& rng) {
    Observation o(rows, cols);
    for (int u = 0; u < rows; ++u) {
        for (int v = 0; v < cols; ++v) {
            for (int c = 0; c < 3; ++c) {
                o.at(u, v, c) = rng.uniform();
            }
            o.height(u, v) = rng.uniform(0.0, 0.2);
        }
    }
    return o;
}

// scene-like raster: constant background with a few constant rectangles
Observation random_scene(int rows, int cols, Rng& rng) {
    Observation o(rows, cols);
    for (int u = 0; u < rows; ++u) {
        for (int v = 0; v < cols; ++v) {
            o.at(u, v, 0) = o.at(u, v, 1) = o.at(u, v, 2) = 0.25;
        }
    }
    for (int k = 0; k < 3; ++k) {
        const int cu = 4 + static_cast<int>(rng.uniform_int(rows - 8));
        const int cv = 4 + static_cast<int>(rng.uniform_int(cols - 8));
        const int half = 2 + static_cast<int>(rng.uniform_int(4));
        const double r = rng.uniform();
        const double h = rng.uniform(0.02, 0.1);
        for (int u = std::max(0, cu - half); u <= std::min(rows - 1, cu + half); ++u) {
            for (int v = std::max(0, cv - half); v <= std::min(cols - 1, cv + half); ++v) {
                o.at(u, v, 0) = r;
                o.at(u, v, 1) = 0.1;
                o.at(u, v, 2) = 0.1;
                o.height(u, v) = h;
            }
        }
    }
    return o;
}

// exact 90 degree array rotation about the raster center (even square raster):
// content offsets rotate by R(+pi/2), so source (u, v) lands at (N-1-v, u)
Observation rot90_oracle(const Observation& o) {
    Observation out(o.rows(), o.cols());
    const int n = o.rows();
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            for (int c = 0; c < kChannels; ++c) {
                out.at(n - 1 - v, u, c) = o.at(u, v, c);
            }
        }
    }
    return out;
}

double max_abs_diff(const Observation& a, const Observation& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("warp_observation identity and integer translation are exact") {
    WorkspaceCalib calib;
    calib.height_px = calib.width_px = 32;
    Rng rng(42);
    const Observation o = random_raster(32, 32, rng);

    CHECK(max_abs_diff(warp_observation(o, PoseSE2::identity(), calib), o) == 0.0);

    const int k = 5;
    const PoseSE2 shift(k * calib.pixel_pitch, 2 * calib.pixel_pitch, 0.0);
    const Observation w = warp_observation(o, shift, calib);
    for (int u = 0; u < 32; ++u) {
        for (int v = 0; v < 32; ++v) {
            for (int c = 0; c < kChannels; ++c) {
                const double want = (u - k >= 0 && v - 2 >= 0) ? o.at(u - k, v - 2, c) : 0.0;
                CHECK(w.at(u, v, c) == want);
            }
        }
    }
}

TEST_CASE("warp_observation quarter turn about the raster center matches rot90") {
    WorkspaceCalib calib;
    calib.height_px = calib.width_px = 64;
    Rng rng(7);
    const Observation o = random_raster(64, 64, rng);

    // g = rotate by +pi/2 about the workspace center
    const Vec2 c = calib.center();
    const PoseSE2 about = se2_compose(PoseSE2(c.x, c.y, 0.0), se2_compose(PoseSE2(0, 0, kPi / 2), PoseSE2(-c.x, -c.y, 0.0)));
    const Observation got = warp_observation(o, about, calib);
    CHECK(max_abs_diff(got, rot90_oracle(o)) < 1e-9);
}

TEST_CASE("warp round trip") {
    WorkspaceCalib calib;
    calib.height_px = calib.width_px = 48;
    Rng rng(15);
    const Observation o = random_raster(48, 48, rng);

    SUBCASE("integer translation round trip is exact") {
        const PoseSE2 g(3 * calib.pixel_pitch, -4 * calib.pixel_pitch, 0.0);
        const Observation back = warp_observation(warp_observation(o, g, calib), se2_inverse(g), calib);
        for (int u = 4; u < 44; ++u) {
            for (int v = 4; v < 44; ++v) {
                for (int c = 0; c < kChannels; ++c) {
                    CHECK(back.at(u, v, c) == o.at(u, v, c));
                }
            }
        }
    }
    SUBCASE("small rigid motion round trip within 2e-2 mean error") {
        const Observation scene = random_scene(48, 48, rng);
        const Vec2 c = calib.center();
        const PoseSE2 rot = se2_compose(PoseSE2(c.x, c.y, 0.0), se2_compose(PoseSE2(0, 0, 0.21), PoseSE2(-c.x, -c.y, 0.0)));
        const PoseSE2 g = se2_compose(PoseSE2(0.004, -0.006, 0.0), rot);
        const Observation back = warp_observation(warp_observation(scene, g, calib), se2_inverse(g), calib);
        // skip pixels whose content left the raster and was zero-filled
        const auto valid = warp_valid_mask(se2_inverse(g), calib);
        double err = 0.0;
        long n = 0;
        for (int u = 0; u < 48; ++u) {
            for (int v = 0; v < 48; ++v) {
                if (!valid[static_cast<std::size_t>(u) * 48 + v]) continue;
                for (int ch = 0; ch < kChannels; ++ch) {
                    err += std::fabs(back.at(u, v, ch) - scene.at(u, v, ch));
                    ++n;
                }
            }
        }
        CHECK(err / n < 2e-2);
    }
}

TEST_CASE("rotate_about_pivot basics") {
    Rng rng(9);
    const Observation o = random_raster(40, 40, rng);
    CHECK(max_abs_diff(rotate_about_pivot(o, {20, 20, 0}, 0.0), o) == 0.0);
    CHECK(max_abs_diff(rotate_about_pivot(o, {11, 30, 0}, kTwoPi), o) < 1e-6);

    // quarter turn about the center pixel of an odd raster
    const Observation odd = random_raster(33, 33, rng);
    const Observation got = rotate_about_pivot(odd, {16, 16, 0}, kPi / 2.0);
    for (int u = 0; u < 33; ++u) {
        for (int v = 0; v < 33; ++v) {
            // content at (16+du,16+dv) lands at (16-dv,16+du)
            const int su = 16 + (v - 16);
            const int sv = 16 - (u - 16);
            for (int c = 0; c < kChannels; ++c) {
                CHECK(std::fabs(got.at(u, v, c) - odd.at(su, sv, c)) < 1e-9);
            }
        }
    }
}

TEST_CASE("crop_square fills out-of-bounds with zeros and round-trips with paste") {
    Rng rng(21);
    const Observation o = random_raster(30, 30, rng);

    const Observation corner = crop_square(o, {0, 0, 0}, 5);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const bool oob = i < 2 || j < 2;
            if (oob) {
                for (int c = 0; c < kChannels; ++c) CHECK(corner.at(i, j, c) == 0.0);
            } else {
                CHECK(corner.at(i, j, 0) == o.at(i - 2, j - 2, 0));
            }
        }
    }

    const PixelPose c{14, 17, 0};
    Observation pasted(30, 30);
    paste_patch(pasted, crop_square(o, c, 7), c);
    for (int u = c.u - 3; u <= c.u + 3; ++u) {
        for (int v = c.v - 3; v <= c.v + 3; ++v) {
            for (int ch = 0; ch < kChannels; ++ch) {
                CHECK(pasted.at(u, v, ch) == o.at(u, v, ch));
            }
        }
    }

    CHECK_THROWS_AS(crop_square(o, c, 6), std::invalid_argument);
}

TEST_CASE("build_pick_mask counts") {
    const PickMask single = build_pick_mask({10, 10, 0}, 1, 160, 160);
    CHECK(single.sum() == 1);
    CHECK(single.at(10, 10));

    const PickMask center = build_pick_mask({80, 80, 0}, 65, 160, 160);
    CHECK(center.sum() == 65L * 65L);

    const PickMask corner = build_pick_mask({0, 0, 0}, 65, 160, 160);
    CHECK(corner.sum() == 33L * 33L);
}

TEST_CASE("build_place_patch") {
    Rng rng(33);
    const Observation o = random_raster(64, 64, rng);
    const PixelPose p{32, 32, 0};

    SUBCASE("no rotation, pick == place: patch equals the masked square") {
        const PlacePatch pp = build_place_patch(o, p, p, 0.0, 9);
        for (int u = 0; u < 64; ++u) {
            for (int v = 0; v < 64; ++v) {
                const bool inside = std::abs(u - p.u) <= 4 && std::abs(v - p.v) <= 4;
                for (int c = 0; c < kChannels; ++c) {
                    CHECK(pp.patch.at(u, v, c) == (inside ? o.at(u, v, c) : 0.0));
                }
            }
        }
    }
    SUBCASE("zero observation gives zero patch") {
        const Observation zero(64, 64);
        const PlacePatch pp = build_place_patch(zero, p, {10, 50, 0}, 0.7, 9);
        for (double x : pp.patch.data()) CHECK(x == 0.0);
    }
    SUBCASE("output is zero outside the square at p_place") {
        const PixelPose dst{15, 40, 0};
        const PlacePatch pp = build_place_patch(o, p, dst, 1.1, 11);
        for (int u = 0; u < 64; ++u) {
            for (int v = 0; v < 64; ++v) {
                if (std::abs(u - dst.u) <= 5 && std::abs(v - dst.v) <= 5) continue;
                for (int c = 0; c < kChannels; ++c) {
                    CHECK(pp.patch.at(u, v, c) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("l1_distance values and metric properties") {
    Rng rng(55);
    const Observation a = random_raster(16, 16, rng);
    CHECK(l1_distance(a, a) == 0.0);

    Observation b = a;
    for (double& x : b.data()) x += 0.1;
    CHECK(l1_distance(a, b) == doctest::Approx(0.1).epsilon(1e-12));

    // height-only offset under the demo-evaluation weighting
    Observation c = a;
    for (int u = 0; u < 16; ++u) {
        for (int v = 0; v < 16; ++v) {
            c.height(u, v) += 0.1;
        }
    }
    CHECK(l1_distance(a, c, ChannelWeights::training()) == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(l1_distance(a, c, ChannelWeights::unit()) == doctest::Approx(0.025).epsilon(1e-12));

    // symmetry, nonnegativity, triangle inequality on random triples
    for (int i = 0; i < 25; ++i) {
        const Observation x = random_raster(8, 8, rng);
        const Observation y = random_raster(8, 8, rng);
        const Observation z = random_raster(8, 8, rng);
        const double xy = l1_distance(x, y);
        CHECK(xy >= 0.0);
        CHECK(xy == l1_distance(y, x));
        CHECK(xy <= l1_distance(x, z) + l1_distance(z, y) + 1e-15);
    }

    Observation other(8, 9);
    CHECK_THROWS_AS(l1_distance(a, other), std::invalid_argument);
}

TEST_CASE("png export/import round trips bit-exactly at the quantization") {
    Rng rng(66);
    const Observation o = random_raster(24, 20, rng);
    const std::string dir = (std::filesystem::temp_directory_path() / "tvf_png_test").string();
    std::filesystem::create_directories(dir);
    write_observation_png(o, dir + "/o_rgb.png", dir + "/o_height.png");
    const Observation r1 = read_observation_png(dir + "/o_rgb.png", dir + "/o_height.png");

    // second write is byte-identical
    write_observation_png(r1, dir + "/o2_rgb.png", dir + "/o2_height.png");
    CHECK(read_file(dir + "/o_rgb.png") == read_file(dir + "/o2_rgb.png"));
    CHECK(read_file(dir + "/o_height.png") == read_file(dir + "/o2_height.png"));

    // and the decoded values are stable under a further round trip
    const Observation r2 = read_observation_png(dir + "/o2_rgb.png", dir + "/o2_height.png");
    CHECK(r1 == r2);

    // quantization error bounds
    for (int u = 0; u < 24; ++u) {
        for (int v = 0; v < 20; ++v) {
            for (int c = 0; c < 3; ++c) {
                CHECK(std::fabs(r1.at(u, v, c) - o.at(u, v, c)) <= 0.5 / 255.0 + 1e-12);
            }
            CHECK(std::fabs(r1.height(u, v) - o.height(u, v)) <= 0.0005 + 1e-12);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("normalize_height scales and clamps") {
    Observation o(4, 4);
    o.height(1, 1) = 0.05;
    o.height(2, 2) = 0.5;
    const Observation n = normalize_height(o, 0.25);
    CHECK(n.height(1, 1) == doctest::Approx(0.2));
    CHECK(n.height(2, 2) == 1.0);
    CHECK(n.at(1, 1, 0) == o.at(1, 1, 0));
}
