#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <vector>

#include "gseq/errors.hpp"
#include "gseq/permutation.hpp"
#include "gseq/rng.hpp"
#include "gseq/stats.hpp"

using namespace gseq;

namespace {

TrialData two_stage_fixture() {
    TrialData d;
    d.stages.push_back({{1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}});
    d.stages.push_back({{5.0, 1.0, 2.5}, {2.0, 2.2, 0.0}});
    return d;
}

TrialData distinct_fixture() {
    TrialData d;
    d.stages.push_back({{0.12, 1.41, 2.7}, {-0.5, 0.33, 1.18}});
    return d;
}

std::vector<std::uint32_t> stage_key(const StageAssignment& a) {
    std::vector<std::uint32_t> flat;
    for (const auto& s : a.stages) {
        flat.insert(flat.end(), s.begin(), s.end());
        flat.push_back(0xffffffffu);
    }
    return flat;
}

}  // namespace

TEST_CASE("identity assignment reproduces the observed path bitwise") {
    auto d = two_stage_fixture();
    auto id = identity_assignment(d, 2);
    auto observed = statistic_path(d, 2);
    auto relabeled = permuted_path(d, id, 2);
    REQUIRE(relabeled.size() == observed.size());
    for (std::size_t j = 0; j < observed.size(); ++j) {
        CHECK(relabeled[j].s == observed[j].s);
        CHECK(relabeled[j].var1_hat == observed[j].var1_hat);
        CHECK(relabeled[j].var2_hat == observed[j].var2_hat);
        CHECK(relabeled[j].mu1_hat == observed[j].mu1_hat);
    }
}

TEST_CASE("swapping balanced arms negates the statistic exactly") {
    TrialData d;
    d.stages.push_back({{1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}});
    StageAssignment swap;
    swap.stages = {{3, 4, 5, 0, 1, 2}};
    auto orig = statistic_path(d, 1);
    auto flip = permuted_path(d, swap, 1);
    CHECK(flip[0].s == -orig[0].s);
    CHECK(flip[0].var1_hat == orig[0].var2_hat);
    CHECK(flip[0].var2_hat == orig[0].var1_hat);
}

TEST_CASE("assignment space counting") {
    auto d1 = distinct_fixture();
    CHECK(assignment_space_size(d1, 1, 1000000) == 20);
    auto d2 = two_stage_fixture();
    CHECK(assignment_space_size(d2, 1, 1000000) == 20);
    CHECK(assignment_space_size(d2, 2, 1000000) == 400);
    // Saturation at the cap.
    CHECK(assignment_space_size(d2, 2, 100) == 101);

    std::vector<std::int64_t> m = {2, 2};
    std::vector<std::int64_t> n = {2, 2};
    CHECK(assignment_space_for_sizes(m, n, 1000000) == 36);
    std::vector<std::int64_t> m1 = {2};
    std::vector<std::int64_t> n1 = {2};
    CHECK(assignment_space_for_sizes(m1, n1, 1000000) == 6);
    CHECK(assignment_space_for_sizes(m1, n1, 5) == 6);
    CHECK(assignment_space_for_sizes(m1, n1, 4) == 5);  // saturates to cap + 1
}

TEST_CASE("enumeration covers the space exactly once and matches unrank") {
    TrialData d;
    d.stages.push_back({{1.0, 2.0}, {3.0, 4.0}});
    d.stages.push_back({{5.0, 6.0}, {7.0, 8.0}});
    auto all = enumerate_assignments(d, 2);
    REQUIRE(all.size() == 36);
    std::set<std::vector<std::uint32_t>> seen;
    for (std::uint64_t i = 0; i < all.size(); ++i) {
        auto direct = unrank_assignment(d, 2, i);
        CHECK(stage_key(direct) == stage_key(all[static_cast<std::size_t>(i)]));
        seen.insert(stage_key(all[static_cast<std::size_t>(i)]));
        // Every stage holds a genuine permutation of its positions.
        for (const auto& st : all[static_cast<std::size_t>(i)].stages) {
            std::vector<std::uint32_t> sorted(st);
            std::sort(sorted.begin(), sorted.end());
            std::vector<std::uint32_t> iota4(4);
            std::iota(iota4.begin(), iota4.end(), 0u);
            CHECK(sorted == iota4);
        }
    }
    CHECK(seen.size() == 36);
    // Index zero is the identity labeling.
    CHECK(stage_key(all[0]) == stage_key(identity_assignment(d, 2)));

    CHECK_THROWS_AS((void)enumerate_assignments(two_stage_fixture(), 2, 100), size_error);
}

TEST_CASE("sampled assignments are uniform within a stage") {
    TrialData d;
    d.stages.push_back({{1.0, 2.0}, {3.0, 4.0}});
    RngStream rng(13131);
    const int draws = 60000;
    std::vector<int> counts(6, 0);
    // Map each sampled treated set to its rank among the 6 two-subsets of 4.
    auto all = enumerate_assignments(d, 1);
    std::vector<std::set<std::uint32_t>> combos;
    for (const auto& a : all) {
        combos.emplace_back(a.stages[0].begin(), a.stages[0].begin() + 2);
    }
    for (int i = 0; i < draws; ++i) {
        auto a = sample_assignment(d, 1, rng);
        std::set<std::uint32_t> treated(a.stages[0].begin(), a.stages[0].begin() + 2);
        auto it = std::find(combos.begin(), combos.end(), treated);
        REQUIRE(it != combos.end());
        ++counts[static_cast<std::size_t>(it - combos.begin())];
    }
    double expected = draws / 6.0;
    double chi2 = 0.0;
    for (int c : counts) {
        double diff = c - expected;
        chi2 += diff * diff / expected;
    }
    // 0.999 quantile of chi-square with 5 df.
    CHECK(chi2 < 20.5150056524329);
}

TEST_CASE("stage relabelings are independent across stages") {
    TrialData d;
    d.stages.push_back({{1.0, 2.0}, {3.0, 4.0}});
    d.stages.push_back({{5.0, 6.0}, {7.0, 8.0}});
    RngStream rng(24680);
    const int draws = 60000;
    auto all1 = enumerate_assignments(d.prefix(1), 1);
    std::vector<std::set<std::uint32_t>> combos;
    for (const auto& a : all1) {
        combos.emplace_back(a.stages[0].begin(), a.stages[0].begin() + 2);
    }
    auto rank_of = [&](const std::vector<std::uint32_t>& st) {
        std::set<std::uint32_t> treated(st.begin(), st.begin() + 2);
        auto it = std::find(combos.begin(), combos.end(), treated);
        REQUIRE(it != combos.end());
        return static_cast<int>(it - combos.begin());
    };
    int table[6][6] = {};
    int row[6] = {}, col[6] = {};
    for (int i = 0; i < draws; ++i) {
        auto a = sample_assignment(d, 2, rng);
        int r = rank_of(a.stages[0]);
        int c = rank_of(a.stages[1]);
        ++table[r][c];
        ++row[r];
        ++col[c];
    }
    double chi2 = 0.0;
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            double e = static_cast<double>(row[r]) * col[c] / draws;
            double diff = table[r][c] - e;
            chi2 += diff * diff / e;
        }
    }
    // 0.999 quantile of chi-square with 25 df.
    CHECK(chi2 < 52.6196557761728);
}

TEST_CASE("boundary is the conservative order statistic") {
    ReplicatePaths paths;
    paths.replicate_count = 1000;
    paths.looks = 1;
    paths.s.resize(1000);
    for (int i = 0; i < 1000; ++i) paths.s[static_cast<std::size_t>(i)] = i + 1.0;
    paths.var1.assign(1000, 1.0);
    paths.var2.assign(1000, 1.0);
    paths.degenerate.assign(1000, 0);

    std::vector<double> inc = {0.0155};
    auto res = solve_permutation_boundaries(paths, inc, Sidedness::one_sided);
    // floor(0.0155 * 1000) = 15 replicates may cross: the 15th largest of
    // 1..1000 is 986.
    CHECK(res.boundaries.values[0] == 986.0);
    CHECK(res.crossing_counts[0] == 15);
    CHECK(res.boundaries.attained_spend[0] == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(res.survivors_per_look[0] == 1000);

    // Less than one allowed crossing puts the boundary at infinity.
    std::vector<double> tiny = {0.0005};
    auto none = solve_permutation_boundaries(paths, tiny, Sidedness::one_sided);
    CHECK(std::isinf(none.boundaries.values[0]));
    CHECK(none.crossing_counts[0] == 0);
    CHECK(none.boundaries.attained_spend[0] == 0.0);
}

TEST_CASE("ties push the boundary upward, never over the allowance") {
    ReplicatePaths paths;
    paths.replicate_count = 10;
    paths.looks = 1;
    paths.s = {5, 5, 5, 4, 3, 2, 1, 1, 1, 1};
    paths.var1.assign(10, 1.0);
    paths.var2.assign(10, 1.0);
    paths.degenerate.assign(10, 0);

    // Allowance 2 cannot even admit the top tie group of three 5s.
    std::vector<double> d1 = {0.25};
    auto r1 = solve_permutation_boundaries(paths, d1, Sidedness::one_sided);
    CHECK(std::isinf(r1.boundaries.values[0]));
    CHECK(r1.boundaries.attained_spend[0] == 0.0);

    // Allowance 3 admits exactly the tie group.
    std::vector<double> d2 = {0.35};
    auto r2 = solve_permutation_boundaries(paths, d2, Sidedness::one_sided);
    CHECK(r2.boundaries.values[0] == 5.0);
    CHECK(r2.boundaries.attained_spend[0] == doctest::Approx(0.3).epsilon(1e-12));

    // Allowance 4 extends to the next distinct value.
    std::vector<double> d3 = {0.45};
    auto r3 = solve_permutation_boundaries(paths, d3, Sidedness::one_sided);
    CHECK(r3.boundaries.values[0] == 4.0);
    CHECK(r3.boundaries.attained_spend[0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("two sided boundaries act on absolute values") {
    ReplicatePaths paths;
    paths.replicate_count = 8;
    paths.looks = 1;
    paths.s = {-9, 8, -7, 6, 5, -4, 3, 2};
    paths.var1.assign(8, 1.0);
    paths.var2.assign(8, 1.0);
    paths.degenerate.assign(8, 0);
    std::vector<double> inc = {0.30};
    auto res = solve_permutation_boundaries(paths, inc, Sidedness::two_sided);
    // Allowance floor(2.4) = 2: top |s| values are 9 and 8.
    CHECK(res.boundaries.values[0] == 8.0);
    CHECK(res.crossing_counts[0] == 2);
}

TEST_CASE("degenerate replicates never cross but stay in the denominator") {
    // Pooled stage {1,1,0,1,0,0}: of the C(6,3)=20 relabelings, exactly the
    // all-ones and all-zeros treated sets are degenerate.
    TrialData d;
    d.stages.push_back({{1.0, 1.0, 0.0}, {1.0, 0.0, 0.0}});
    PermutationOptions opt;
    opt.mode = ResampleMode::exhaustive;
    auto paths = replicate_paths(d, 1, opt);
    REQUIRE(paths.replicate_count == 20);
    int degen = 0;
    int plus = 0, minus = 0;
    const double x = std::sqrt(0.5);
    for (int b = 0; b < 20; ++b) {
        if (paths.degenerate[static_cast<std::size_t>(b)]) {
            ++degen;
            CHECK(std::isnan(paths.stat(b, 0)));
        } else if (paths.stat(b, 0) > 0) {
            CHECK(paths.stat(b, 0) == doctest::Approx(x).epsilon(1e-12));
            ++plus;
        } else {
            CHECK(paths.stat(b, 0) == doctest::Approx(-x).epsilon(1e-12));
            ++minus;
        }
    }
    CHECK(degen == 2);
    CHECK(plus == 9);
    CHECK(minus == 9);

    // With increment 0.5 the allowance is 10: all nine +x replicates cross,
    // the attained spend counts them against all 20 replicates.
    std::vector<double> inc = {0.5};
    auto res = solve_permutation_boundaries(paths, inc, Sidedness::one_sided);
    CHECK(res.degenerate_replicates == 2);
    CHECK(res.boundaries.values[0] == doctest::Approx(x).epsilon(1e-12));
    CHECK(res.crossing_counts[0] == 9);
    CHECK(res.boundaries.attained_spend[0] == doctest::Approx(0.45).epsilon(1e-12));

    // The allowance 4 cannot admit the nine-way tie at +x.
    std::vector<double> small = {0.2};
    auto rs = solve_permutation_boundaries(paths, small, Sidedness::one_sided);
    CHECK(std::isinf(rs.boundaries.values[0]));
}

TEST_CASE("observed degenerate data rejects the whole analysis") {
    TrialData flat;
    flat.stages.push_back({{2.0, 2.0}, {2.0, 2.0}});
    PermutationOptions opt;
    opt.mode = ResampleMode::exhaustive;
    std::vector<double> fr = {1.0};
    CHECK_THROWS_AS((void)permutation_boundaries(flat, 1, SpendingFunction::pocock(0.025), fr,
                                                 Sidedness::one_sided, opt),
                    degenerate_data_error);
}

TEST_CASE("balanced exhaustive resampling is symmetric about zero") {
    auto d = distinct_fixture();
    PermutationOptions opt;
    opt.mode = ResampleMode::exhaustive;
    auto paths = replicate_paths(d, 1, opt);
    REQUIRE(paths.replicate_count == 20);
    std::vector<double> vals;
    for (int b = 0; b < 20; ++b) vals.push_back(paths.stat(b, 0));
    std::sort(vals.begin(), vals.end());
    for (int i = 0; i < 10; ++i) {
        CHECK(vals[static_cast<std::size_t>(i)] ==
              doctest::Approx(-vals[static_cast<std::size_t>(19 - i)]).epsilon(1e-10));
    }
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / 20.0;
    CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("parallel and serial replicate paths agree bitwise") {
    auto d = two_stage_fixture();
    PermutationOptions opt;
    opt.replicates = 2000;
    opt.seed = 97;
    opt.workers = 4;
    auto par = replicate_paths(d, 2, opt);
    opt.workers = 1;
    auto ser = replicate_paths_serial(d, 2, opt);
    REQUIRE(par.s.size() == ser.s.size());
    CHECK(std::memcmp(par.s.data(), ser.s.data(), par.s.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(par.var1.data(), ser.var1.data(), par.var1.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(par.var2.data(), ser.var2.data(), par.var2.size() * sizeof(double)) == 0);
    CHECK(par.degenerate == ser.degenerate);

    PermutationOptions ex;
    ex.mode = ResampleMode::exhaustive;
    ex.workers = 3;
    auto pex = replicate_paths(d, 2, ex);
    auto sex = replicate_paths_serial(d, 2, ex);
    REQUIRE(pex.replicate_count == 400);
    CHECK(std::memcmp(pex.s.data(), sex.s.data(), pex.s.size() * sizeof(double)) == 0);
}

TEST_CASE("monte carlo resampling converges to the exhaustive law") {
    auto d = distinct_fixture();
    PermutationOptions ex;
    ex.mode = ResampleMode::exhaustive;
    auto exact = replicate_paths(d, 1, ex);
    std::vector<double> support;
    for (int b = 0; b < exact.replicate_count; ++b) support.push_back(exact.stat(b, 0));
    std::sort(support.begin(), support.end());

    PermutationOptions mc;
    mc.replicates = 20000;
    mc.seed = 2025;
    auto sampled = replicate_paths(d, 1, mc);
    std::vector<double> draws;
    for (int b = 0; b < sampled.replicate_count; ++b) draws.push_back(sampled.stat(b, 0));
    std::sort(draws.begin(), draws.end());

    // Sup distance between the empirical laws, evaluated on the support.
    double sup = 0.0;
    for (double v : support) {
        double fe = static_cast<double>(std::upper_bound(support.begin(), support.end(), v) -
                                        support.begin()) /
                    static_cast<double>(support.size());
        double fm = static_cast<double>(std::upper_bound(draws.begin(), draws.end(), v) -
                                        draws.begin()) /
                    static_cast<double>(draws.size());
        sup = std::max(sup, std::fabs(fe - fm));
    }
    CHECK(sup < 0.02);
}

TEST_CASE("end to end permutation boundaries on a two stage trial") {
    auto d = two_stage_fixture();
    std::vector<double> fr = {0.5, 1.0};
    PermutationOptions opt;
    opt.replicates = 400;
    opt.seed = 7;
    auto res = permutation_boundaries(d, 2, SpendingFunction::pocock(0.025), fr,
                                      Sidedness::one_sided, opt);
    CHECK(res.replicate_count == 400);
    CHECK(res.mode == ResampleMode::monte_carlo);
    REQUIRE(res.boundaries.values.size() == 2);
    CHECK(res.boundaries.method == Method::permutation);
    CHECK(res.survivors_per_look[0] == 400);
    // Attained spend never exceeds the increment.
    auto inc = spend_increments(SpendingFunction::pocock(0.025), fr, Sidedness::one_sided);
    CHECK(res.boundaries.attained_spend[0] <= inc[0] + 1e-12);
    CHECK(res.boundaries.attained_spend[1] <= inc[1] + 1e-12);
    CHECK(res.survivors_per_look[1] == 400 - res.crossing_counts[0]);

    // Same seed reproduces the result exactly.
    auto again = permutation_boundaries(d, 2, SpendingFunction::pocock(0.025), fr,
                                        Sidedness::one_sided, opt);
    CHECK(again.boundaries.values == res.boundaries.values);
    CHECK(again.crossing_counts == res.crossing_counts);

    // A frozen first look is honored verbatim.
    std::vector<double> frozen = {1.0};
    auto froz = permutation_boundaries(d, 2, SpendingFunction::pocock(0.025), fr,
                                       Sidedness::one_sided, opt, frozen);
    CHECK(froz.boundaries.values[0] == 1.0);
    CHECK(froz.crossing_counts[0] > 0);
}
