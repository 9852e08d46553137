#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "covert/limits.hpp"

using namespace covert;
using Catch::Approx;

TEST_CASE("covertness constant") {
    CHECK(c_cov(ChannelParams{0.5, 1.0}) == Approx(2.449489742783178).epsilon(1e-14));
    // vanishing noise kills covertness
    CHECK(c_cov(ChannelParams{0.5, 1e-12}) < 1e-5);
    // monotone in eta near zero
    CHECK(c_cov(ChannelParams{1e-3, 1.0}) < c_cov(ChannelParams{1e-2, 1.0}));
    CHECK_THROWS_AS(c_cov(ChannelParams{1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(c_cov(ChannelParams{0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("covert budget") {
    const ChannelParams p{0.5, 1.0};
    const CovertBudget b = covert_budget_nS(p, 1000000, 0.01);
    CHECK(b.nbar_S == Approx(2.449489742783178e-4).epsilon(1e-12));
    CHECK(b.delta_p == Approx(std::sqrt(0.005)).epsilon(1e-14));
    CHECK(covert_budget_nS(p, 1000, 0.0).nbar_S == 0.0);
    // quadrupling n halves the budget
    const CovertBudget b4 = covert_budget_nS(p, 4000000, 0.01);
    CHECK(b4.nbar_S == Approx(0.5 * b.nbar_S).epsilon(1e-12));
}

TEST_CASE("converse bounds") {
    const ChannelParams p{0.5, 1.0};
    CHECK(converse_qre_lower_exact(0.0, p, 10) == 0.0);
    CHECK(converse_qre_leading(0.0, p, 10) == 0.0);
    CHECK(converse_qre_leading(1e-3, p, 1) == Approx(1.0 / 6.0 * 1e-6).epsilon(1e-12));

    SECTION("exact to leading ratio approaches 1") {
        const double r = converse_qre_lower_exact(1e-4, p, 1) / converse_qre_leading(1e-4, p, 1);
        CHECK(r == Approx(1.0).margin(0.01));
    }
    SECTION("exact bound is nonnegative on a grid") {
        for (double ns : {1e-6, 1e-4, 1e-2, 0.1, 1.0})
            CHECK(converse_qre_lower_exact(ns, p, 3) >= -1e-12);
    }
    SECTION("budget inverts the leading converse exactly") {
        for (double dq : {1e-4, 0.01, 0.5}) {
            const CovertBudget b = covert_budget_nS(p, 100000, dq);
            CHECK(converse_qre_leading(b.nbar_S, p, 100000) == Approx(dq).epsilon(1e-12));
        }
    }
}

TEST_CASE("constellation leading-order QRE") {
    const ChannelParams p{0.5, 1.0};
    SECTION("qpsk equals the converse leading term per mode") {
        for (double ns : {1e-4, 0.01, 0.3})
            CHECK(qpsk_qre_leading(ns, p) == Approx(converse_qre_leading(ns, p, 1)).epsilon(1e-15));
        CHECK(qpsk_qre_leading(0.01, p) == Approx(1.0 / 6.0 * 1e-4).epsilon(1e-12));
        CHECK(qpsk_qre_leading(0.0, p) == 0.0);
    }
    SECTION("bpsk normalized value at nT = 1") {
        // eta nbar_B = 1 and (1-eta)^2 nbar_S^2 = 1
        const ChannelParams q{0.5, 2.0};
        CHECK(bpsk_qre_leading(2.0, q) == Approx(0.25 + std::log(2.0) / 3.0).epsilon(1e-12));
        CHECK(bpsk_qre_leading(0.0, q) == 0.0);
    }
    SECTION("bpsk strictly exceeds qpsk for nbar_S > 0") {
        for (double eta : {0.1, 0.5, 0.9})
            for (double nb : {0.1, 1.0, 10.0})
                for (double ns : {1e-4, 0.01, 0.5}) {
                    const ChannelParams g{eta, nb};
                    CHECK(bpsk_qre_leading(ns, g) > qpsk_qre_leading(ns, g));
                }
    }
}

TEST_CASE("sparsification") {
    const ChannelParams p{0.5, 1.0};
    SECTION("tau = 1 recovers qpsk, tau = 0 silences") {
        CHECK(sparsified_qre_leading(0.02, 1.0, p) == Approx(qpsk_qre_leading(0.02, p)));
        CHECK(sparsified_qre_leading(0.02, 0.0, p) == 0.0);
        CHECK(sparsified_qre_leading(0.02, 0.5, p) ==
              Approx(0.25 * qpsk_qre_leading(0.02, p)).epsilon(1e-14));
    }
    SECTION("tau closed form") {
        CHECK(sparsification_tau(0.01, p, 0.01, 1000000) ==
              Approx(0.024494897427831782).epsilon(1e-12));
        CHECK(sparsification_tau(0.02, p, 0.01, 1000000) ==
              Approx(0.5 * 0.024494897427831782).epsilon(1e-12));
    }
    SECTION("at the budget, tau = 1; below it, tau > 1 is the returned signal") {
        const CovertBudget b = covert_budget_nS(p, 100000, 0.04);
        CHECK(sparsification_tau(b.nbar_S, p, 0.04, 100000) == Approx(1.0).epsilon(1e-12));
        CHECK(sparsification_tau(0.5 * b.nbar_S, p, 0.04, 100000) > 1.0);
    }
    SECTION("composed sparsified QRE returns delta_qre") {
        const std::uint64_t n = 1000000;
        const double dq = 0.01, ns = 0.01;
        const double tau = sparsification_tau(ns, p, dq, n);
        CHECK(static_cast<double>(n) * sparsified_qre_leading(ns, tau, p) ==
              Approx(dq).epsilon(1e-12));
    }
}

TEST_CASE("reliability constants") {
    SECTION("frozen values at eta = 0.5, nbar_B = 10") {
        const CRelBounds b = c_rel_bounds(ChannelParams{0.5, 10.0});
        CHECK(b.lower_paper == Approx(0.1).epsilon(1e-14));
        CHECK(b.lower_shotnoise == Approx(1.0 / 12.0).epsilon(1e-14));
        CHECK(b.upper_chi == Approx(0.0911607783969773).epsilon(1e-12));
    }
    SECTION("large nbar_B limit: all small, paper/chi ratio -> 1") {
        const CRelBounds b = c_rel_bounds(ChannelParams{0.5, 1e6});
        CHECK(b.lower_paper < 1e-5);
        CHECK(b.upper_chi < 1e-5);
        CHECK(b.lower_paper / b.upper_chi == Approx(1.0).margin(1e-5));
    }
    SECTION("shot-noise lower bound never exceeds the chi upper bound") {
        for (double eta : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (double nb : {0.1, 0.5, 1.0, 10.0, 100.0}) {
                const CRelBounds b = c_rel_bounds(ChannelParams{eta, nb});
                CHECK(b.lower_shotnoise <= b.upper_chi + 1e-15);
            }
    }
}

TEST_CASE("holevo capacity") {
    const ChannelParams p{0.5, 1.0};
    CHECK(holevo_chi(0.0, p) == 0.0);
    SECTION("slope at zero matches the chi reliability constant") {
        for (double eta : {0.2, 0.5, 0.8})
            for (double nb : {0.3, 1.0, 30.0}) {
                const ChannelParams q{eta, nb};
                const double h = 1e-6;
                const double slope = (holevo_chi(h, q) - holevo_chi(0.0, q)) / h;
                CHECK(slope == Approx(c_rel_bounds(q).upper_chi).epsilon(1e-4));
            }
    }
    SECTION("monotone nondecreasing") {
        double prev = 0.0;
        for (double ns : {0.01, 0.1, 1.0, 10.0}) {
            const double v = holevo_chi(ns, p);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("square-root-law throughput") {
    CHECK(srl_throughput_bits(100, 0.0, 3.0, 2.0) == 0.0);
    SECTION("frozen composed value") {
        const ChannelParams p{0.5, 10.0};
        const double bits = srl_throughput_bits(100000000ULL, std::sqrt(0.01), c_cov(p),
                                                c_rel_bounds(p).upper_chi);
        CHECK(bits == Approx(2037.4557465476928).epsilon(1e-9));
        CHECK(bits * std::log(2.0) == Approx(1412.2567062351918).epsilon(1e-9));
    }
    SECTION("sqrt scaling: M(4n) = 2 M(n)") {
        const double m1 = srl_throughput_bits(10000, 0.1, 2.0, 0.5);
        const double m4 = srl_throughput_bits(40000, 0.1, 2.0, 0.5);
        CHECK(m4 == Approx(2.0 * m1).epsilon(1e-12));
    }
}

TEST_CASE("pinsker detection-error floor") {
    CHECK(pinsker_pe_floor(0.0) == Approx(0.5));
    CHECK(pinsker_pe_floor(0.02) == Approx(0.45).epsilon(1e-14));
    CHECK(pinsker_pe_floor(8.0) == 0.0);
    CHECK_THROWS_AS(pinsker_pe_floor(-1.0), std::invalid_argument);
}
