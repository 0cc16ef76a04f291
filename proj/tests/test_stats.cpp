#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gseq/errors.hpp"
#include "gseq/rng.hpp"
#include "gseq/stats.hpp"

using namespace gseq;

namespace {

// Naive two-pass reference for the studentized statistic.
struct NaiveSummary {
    double mu1, mu2, var1, var2, s, info;
};

NaiveSummary naive_summary(const std::vector<double>& t, const std::vector<double>& c) {
    const double m = static_cast<double>(t.size());
    const double n = static_cast<double>(c.size());
    double mu1 = 0, mu2 = 0;
    for (double x : t) mu1 += x;
    for (double x : c) mu2 += x;
    mu1 /= m;
    mu2 /= n;
    double v1 = 0, v2 = 0;
    for (double x : t) v1 += (x - mu1) * (x - mu1);
    for (double x : c) v2 += (x - mu2) * (x - mu2);
    v1 /= (m - 1.0);
    v2 /= (n - 1.0);
    NaiveSummary out;
    out.mu1 = mu1;
    out.mu2 = mu2;
    out.var1 = v1;
    out.var2 = v2;
    out.s = std::sqrt(m * n / (m + n)) * (mu1 - mu2) /
            std::sqrt((n * v1 + m * v2) / (m + n));
    out.info = 1.0 / (v1 / m + v2 / n);
    return out;
}

TrialData two_stage_fixture() {
    TrialData d;
    d.stages.push_back({{1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}});
    d.stages.push_back({{5.0, 1.0}, {2.0, 2.0, 0.0}});
    return d;
}

}  // namespace

TEST_CASE("single stage fixture gives the frozen statistic") {
    TrialData d;
    d.stages.push_back({{1.0, 2.0, 3.0}, {0.0, 1.0, 2.0}});
    auto look = look_summary(d, 1);
    CHECK(look.m_cum == 3);
    CHECK(look.n_cum == 3);
    CHECK(look.mu1_hat == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(look.mu2_hat == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(look.var1_hat == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(look.var2_hat == doctest::Approx(1.0).epsilon(1e-15));
    // sqrt(3*3/6) * 1 / sqrt(1) = sqrt(1.5)
    CHECK(look.s == doctest::Approx(1.224744871391589).epsilon(1e-15));
    CHECK(look.info_hat == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(welch_df(look) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("cumulative looks pool all earlier stages") {
    auto d = two_stage_fixture();
    auto path = statistic_path(d);
    REQUIRE(path.size() == 2);
    CHECK(path[0].k == 1);
    CHECK(path[1].k == 2);
    CHECK(path[1].m_cum == 5);
    CHECK(path[1].n_cum == 6);

    std::vector<double> t2 = {1, 2, 3, 5, 1};
    std::vector<double> c2 = {0, 1, 2, 2, 2, 0};
    auto ref = naive_summary(t2, c2);
    CHECK(path[1].mu1_hat == doctest::Approx(ref.mu1).epsilon(1e-13));
    CHECK(path[1].mu2_hat == doctest::Approx(ref.mu2).epsilon(1e-13));
    CHECK(path[1].var1_hat == doctest::Approx(ref.var1).epsilon(1e-13));
    CHECK(path[1].var2_hat == doctest::Approx(ref.var2).epsilon(1e-13));
    CHECK(path[1].s == doctest::Approx(ref.s).epsilon(1e-13));
    CHECK(path[1].info_hat == doctest::Approx(ref.info).epsilon(1e-13));

    // The prefix view reproduces the truncated path bit for bit.
    auto p1 = statistic_path(d.prefix(1));
    REQUIRE(p1.size() == 1);
    CHECK(p1[0].s == path[0].s);
    auto limited = statistic_path(d, 1);
    CHECK(limited.size() == 1);
    CHECK(limited[0].s == path[0].s);
}

TEST_CASE("welford accumulation matches the two-pass reference") {
    RngStream rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        int m = 2 + static_cast<int>(rng.next_below(40));
        int n = 2 + static_cast<int>(rng.next_below(40));
        std::vector<double> t, c;
        for (int i = 0; i < m; ++i) t.push_back(1e3 * (rng.next_open() - 0.5));
        for (int i = 0; i < n; ++i) c.push_back(1e3 * (rng.next_open() - 0.5));
        TrialData d;
        d.stages.push_back({t, c});
        auto look = look_summary(d, 1);
        auto ref = naive_summary(t, c);
        CHECK(look.mu1_hat == doctest::Approx(ref.mu1).epsilon(1e-12));
        CHECK(look.var1_hat == doctest::Approx(ref.var1).epsilon(1e-10));
        CHECK(look.var2_hat == doctest::Approx(ref.var2).epsilon(1e-10));
        CHECK(look.s == doctest::Approx(ref.s).epsilon(1e-10));
    }
}

TEST_CASE("statistic identity links s and estimated information") {
    RngStream rng(929);
    for (int trial = 0; trial < 1000; ++trial) {
        int m = 2 + static_cast<int>(rng.next_below(30));
        int n = 2 + static_cast<int>(rng.next_below(30));
        TrialData d;
        StageBlock blk;
        for (int i = 0; i < m; ++i) blk.treatment.push_back(rng.next_open() * 7 - 2);
        for (int i = 0; i < n; ++i) blk.control.push_back(rng.next_open() * 3);
        d.stages.push_back(blk);
        LookSummary look;
        try {
            look = look_summary(d, 1);
        } catch (const degenerate_data_error&) {
            continue;
        }
        // S == sqrt(info) * (mu1 - mu2) is an algebraic identity.
        double lhs = look.s;
        double rhs = std::sqrt(look.info_hat) * (look.mu1_hat - look.mu2_hat);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
        CHECK(look.info_hat ==
              doctest::Approx(1.0 / (look.var1_hat / m + look.var2_hat / n)).epsilon(1e-12));
    }
}

TEST_CASE("statistic is invariant under positive affine maps of the data") {
    RngStream rng(1717);
    for (int trial = 0; trial < 1000; ++trial) {
        int m = 3 + static_cast<int>(rng.next_below(20));
        int n = 3 + static_cast<int>(rng.next_below(20));
        StageBlock raw;
        for (int i = 0; i < m; ++i) raw.treatment.push_back(rng.next_open() * 10 - 5);
        for (int i = 0; i < n; ++i) raw.control.push_back(rng.next_open() * 10 - 5);
        double a = 0.01 + 20.0 * rng.next_open();
        double b = 100.0 * (rng.next_open() - 0.5);
        StageBlock mapped = raw;
        for (double& x : mapped.treatment) x = a * x + b;
        for (double& x : mapped.control) x = a * x + b;
        TrialData d1, d2;
        d1.stages.push_back(raw);
        d2.stages.push_back(mapped);
        auto s1 = look_summary(d1, 1).s;
        auto s2 = look_summary(d2, 1).s;
        CHECK(std::fabs(s2 - s1) <= 1e-9 * (1.0 + std::fabs(s1)));
    }
}

TEST_CASE("welch df matches frozen values and stays within classical bounds") {
    LookSummary look;
    look.k = 1;
    look.m_cum = 10;
    look.n_cum = 5;
    look.var1_hat = 4.0;
    look.var2_hat = 1.0;
    CHECK(welch_df(look) == doctest::Approx(12.96).epsilon(1e-14));

    look.m_cum = 10;
    look.n_cum = 10;
    look.var1_hat = 2.5;
    look.var2_hat = 2.5;
    CHECK(welch_df(look) == doctest::Approx(18.0).epsilon(1e-13));

    look.m_cum = 5;
    look.n_cum = 5;
    look.var1_hat = 0.7;
    look.var2_hat = 0.7;
    CHECK(welch_df(look) == doctest::Approx(8.0).epsilon(1e-13));

    RngStream rng(31337);
    for (int trial = 0; trial < 100000; ++trial) {
        LookSummary r;
        r.k = 1;
        r.m_cum = 2 + static_cast<std::int64_t>(rng.next_below(199));
        r.n_cum = 2 + static_cast<std::int64_t>(rng.next_below(199));
        r.var1_hat = std::exp(4.0 * (rng.next_open() - 0.5));
        r.var2_hat = std::exp(4.0 * (rng.next_open() - 0.5));
        double df = welch_df(r);
        double lo = static_cast<double>(std::min(r.m_cum, r.n_cum) - 1);
        double hi = static_cast<double>(r.m_cum + r.n_cum - 2);
        CHECK(df >= lo - 1e-9);
        CHECK(df <= hi + 1e-9);
    }

    LookSummary tiny;
    tiny.m_cum = 1;
    tiny.n_cum = 5;
    tiny.var1_hat = 1.0;
    tiny.var2_hat = 1.0;
    CHECK_THROWS_AS((void)welch_df(tiny), std::invalid_argument);
}

TEST_CASE("degenerate data raises a signed error") {
    TrialData up;
    up.stages.push_back({{2.0, 2.0}, {1.0, 1.0}});
    try {
        (void)look_summary(up, 1);
        FAIL("expected degenerate_data_error");
    } catch (const degenerate_data_error& e) {
        CHECK(e.sign() == 1);
    }

    TrialData down;
    down.stages.push_back({{1.0, 1.0}, {3.0, 3.0}});
    try {
        (void)look_summary(down, 1);
        FAIL("expected degenerate_data_error");
    } catch (const degenerate_data_error& e) {
        CHECK(e.sign() == -1);
    }

    TrialData flat;
    flat.stages.push_back({{2.0, 2.0}, {2.0, 2.0}});
    try {
        (void)look_summary(flat, 1);
        FAIL("expected degenerate_data_error");
    } catch (const degenerate_data_error& e) {
        CHECK(e.sign() == 0);
    }

    // try_summarize reports the same condition without throwing.
    ArmAccumulator t, c;
    t.add(2.0);
    t.add(2.0);
    c.add(1.0);
    c.add(1.0);
    LookSummary out;
    CHECK_FALSE(try_summarize(t, c, 1, &out));
    CHECK(out.mu1_hat == 2.0);
    CHECK(out.mu2_hat == 1.0);

    // One constant arm is fine as long as the other varies.
    TrialData half;
    half.stages.push_back({{2.0, 2.0, 2.0}, {0.0, 1.0, 2.0}});
    auto look = look_summary(half, 1);
    CHECK(std::isfinite(look.s));
    CHECK(look.var1_hat == 0.0);
}

TEST_CASE("trial data validation catches structural problems") {
    TrialData empty;
    CHECK_THROWS_AS(empty.validate(), invalid_data_error);

    TrialData missing;
    missing.stages.push_back({{1.0, 2.0}, {}});
    CHECK_THROWS_AS(missing.validate(), invalid_data_error);

    TrialData nonfinite;
    nonfinite.stages.push_back({{1.0, std::nan("")}, {0.0, 1.0}});
    CHECK_THROWS_AS(nonfinite.validate(), invalid_data_error);

    TrialData thin;
    thin.stages.push_back({{1.0}, {0.0, 1.0}});
    CHECK_THROWS_AS(thin.validate(), invalid_data_error);

    // A single observation per stage is fine once the cumulative count is two.
    TrialData trickle;
    trickle.stages.push_back({{1.0, 2.0}, {0.0, 1.0}});
    trickle.stages.push_back({{0.5}, {0.25}});
    CHECK_NOTHROW(trickle.validate());

    auto d = two_stage_fixture();
    CHECK_NOTHROW(d.validate());
    Ratio one{1, 1};
    // Stage 2 has 2 treated vs 3 controls, violating a 1:1 ratio.
    CHECK_THROWS_AS(d.validate(&one), invalid_data_error);
    TrialData balanced;
    balanced.stages.push_back({{1.0, 2.0}, {0.0, 1.0}});
    CHECK_NOTHROW(balanced.validate(&one));
    Ratio two{2, 1};
    CHECK_THROWS_AS(balanced.validate(&two), invalid_data_error);

    CHECK_THROWS_AS((void)d.prefix(0), std::invalid_argument);
    CHECK_THROWS_AS((void)d.prefix(3), std::invalid_argument);
    CHECK_THROWS_AS((void)statistic_path(d, 5), std::invalid_argument);
    CHECK_THROWS_AS((void)look_summary(d, 0), std::invalid_argument);
}
