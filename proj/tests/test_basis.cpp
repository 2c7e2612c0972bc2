#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "ionsbm/basis.hpp"
#include "test_util.hpp"

using namespace ionsbm;
using basis::FockConfig;
using basis::Spin;

namespace {

void enumerate_rec(int slot, int remaining, FockConfig& cur, std::vector<FockConfig>& out) {
    if (slot == static_cast<int>(cur.size()) - 1) {
        cur[slot] = remaining;
        out.push_back(cur);
        return;
    }
    for (int n = 0; n <= remaining; ++n) {
        cur[slot] = n;
        enumerate_rec(slot + 1, remaining - n, cur, out);
    }
}

// Every length-k occupation vector with the given sum, sorted colexicographically
// (the last position where two configs differ decides the order).
std::vector<FockConfig> all_configs(int k, int total) {
    std::vector<FockConfig> out;
    if (total < 0) return out;
    FockConfig cur(k, 0);
    enumerate_rec(0, total, cur, out);
    std::sort(out.begin(), out.end(), [](const FockConfig& a, const FockConfig& b) {
        for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
            if (a[i] != b[i]) return a[i] < b[i];
        }
        return false;
    });
    return out;
}

std::uint64_t binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("subspace dimensions match exhaustive enumeration") {
    for (int k = 1; k <= 5; ++k) {
        for (int m = 0; m <= 6; ++m) {
            CAPTURE(k);
            CAPTURE(m);
            const basis::Subspace space(k, m);
            const std::size_t ground = all_configs(k, m).size();
            const std::size_t excited = all_configs(k, m - 1).size();
            CHECK(space.dimension() == ground + excited);
            CHECK(space.ground_count() == ground);
            CHECK(space.dimension() == binom(m + k - 1, k - 1) + binom(m + k - 2, k - 1));
        }
    }
    CHECK(basis::Subspace(8, 8).dimension() == 9867);
}

TEST_CASE("rank and unrank invert each other across both spin blocks") {
    const basis::Subspace space(4, 5);
    const auto ground = all_configs(4, 5);
    const auto excited = all_configs(4, 4);

    for (std::size_t i = 0; i < ground.size(); ++i) {
        CHECK(space.rank(Spin::Ground, ground[i]) == i);
    }
    for (std::size_t i = 0; i < excited.size(); ++i) {
        CHECK(space.rank(Spin::Excited, excited[i]) == ground.size() + i);
    }
    for (std::uint64_t r = 0; r < space.dimension(); ++r) {
        const basis::BasisState state = space.unrank(r);
        CHECK(space.rank(state.spin, state.occupations) == r);
        const bool in_ground = r < space.ground_count();
        CHECK((state.spin == Spin::Ground) == in_ground);
        int sum = 0;
        for (int n : state.occupations) sum += n;
        CHECK(sum == (in_ground ? 5 : 4));
        for (int c = 0; c < 4; ++c) {
            CHECK(static_cast<int>(space.occupation_table()(static_cast<long>(r), c)) ==
                  state.occupations[c]);
        }
    }
}

TEST_CASE("the ground block starts at the all-in-first-mode config") {
    const basis::Subspace space(3, 2);
    CHECK(space.rank(Spin::Ground, {2, 0, 0}) == 0);
    CHECK(space.unrank(space.ground_count()).spin == Spin::Excited);
}

TEST_CASE("invalid states and oversized spaces are rejected") {
    const basis::Subspace space(3, 4);
    CHECK(testutil::error_code_of([&] { space.rank(Spin::Ground, {4, 0}); }) ==
          "basis/bad_state");
    CHECK(testutil::error_code_of([&] { space.rank(Spin::Ground, {3, 0, 0}); }) ==
          "basis/bad_state");
    CHECK(testutil::error_code_of([&] { space.rank(Spin::Excited, {4, 0, 0}); }) ==
          "basis/bad_state");
    CHECK(testutil::error_code_of([&] { space.rank(Spin::Ground, {5, -1, 0}); }) ==
          "basis/bad_state");
    CHECK(testutil::error_code_of([&] { space.unrank(space.dimension()); }) ==
          "basis/bad_state");

    CHECK(testutil::error_code_of([] { basis::Subspace(0, 2); }) == "basis/bad_modes");
    CHECK(testutil::error_code_of([] { basis::Subspace(3, -1); }) == "basis/bad_excitation");
    CHECK(testutil::error_code_of([] { basis::Subspace(1, 300); }) == "basis/bad_excitation");
    CHECK(testutil::error_code_of([] { basis::Subspace(12, 12, 1000); }) ==
          "basis/dimension_cap");
}

TEST_CASE("truncation weights favor strong coupling near resonance") {
    const Eigen::VectorXd lambdas = vec({2.0, 0.0, 1.0});
    const Eigen::VectorXd freqs = vec({0.0, -10.0, -30.0});
    const double delta = -10.0;

    const basis::ModeWeights w = basis::mode_weights(lambdas, freqs, delta);
    CHECK(w.values[0] == doctest::Approx(std::pow(2.0 / (delta - 0.0), 2)));
    CHECK(w.values[1] == 0.0);  // resonant but uncoupled
    CHECK(w.values[2] == doctest::Approx(std::pow(1.0 / (delta + 30.0), 2)));
    CHECK(w.gaps[1] == 0.0);

    // A coupled resonant mode outranks everything.
    const basis::ModeWeights res = basis::mode_weights(vec({2.0, 0.5, 1.0}), freqs, delta);
    CHECK(std::isinf(res.values[1]));
    const basis::ModeSubset subset = basis::select_modes(res, 2);
    CHECK(subset.kept[0] == 1);
}

TEST_CASE("mode selection is deterministic under ties") {
    basis::ModeWeights w;
    w.values = vec({1.0, 1.0, 1.0, 2.0});
    w.gaps = vec({5.0, 3.0, 3.0, 9.0});
    const basis::ModeSubset subset = basis::select_modes(w, 3);
    REQUIRE(subset.kept.size() == 3);
    CHECK(subset.kept[0] == 3);  // largest weight first
    CHECK(subset.kept[1] == 1);  // tie: smaller gap, then smaller index
    CHECK(subset.kept[2] == 2);
    CHECK(testutil::error_code_of([&] { basis::select_modes(w, 5); }) == "basis/bad_selection");
}

TEST_CASE("multitone weights take the best tone per mode") {
    const Eigen::VectorXd freqs = vec({0.0, -20.0});
    const std::vector<Eigen::VectorXd> lambdas = {vec({1.0, 1.0}), vec({0.5, 0.5})};
    const double delta = -20.0;
    const std::vector<double> offsets = {0.0, 20.0};  // tone 2 is resonant with mode 0

    const basis::ModeWeights w =
        basis::mode_weights_multitone(lambdas, freqs, delta, offsets);
    // Mode 0: tone 1 gives (1/-20)^2, tone 2 is resonant with lambda 0.5 -> inf.
    CHECK(std::isinf(w.values[0]));
    // Mode 1: tone 1 resonant -> inf as well.
    CHECK(std::isinf(w.values[1]));
    CHECK(w.gaps[0] == 0.0);
    CHECK(w.gaps[1] == 0.0);

    const basis::ModeWeights single =
        basis::mode_weights_multitone({vec({1.0, 1.0})}, freqs, delta, {0.0});
    const basis::ModeWeights direct = basis::mode_weights(vec({1.0, 1.0}), freqs, delta);
    CHECK(single.values[0] == doctest::Approx(direct.values[0]));
    CHECK(std::isinf(single.values[1]));
}
