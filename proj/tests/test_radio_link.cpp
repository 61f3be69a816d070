#include "coexsim/radio_link.hpp"
#include "coexsim/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace coexsim;

TEST_CASE("thermal noise power") {
    CHECK_THAT(noise_power_dBm(50e6, 5.0), Catch::Matchers::WithinAbs(-92.0103, 1e-3));
    CHECK_THAT(noise_power_dBm(50e6, 9.0), Catch::Matchers::WithinAbs(-88.0103, 1e-3));
    CHECK_THAT(noise_power_dBm(1.0, 0.0), Catch::Matchers::WithinAbs(-174.0, 1e-12));
    CHECK_THROWS_AS(noise_power_dBm(0.0, 5.0), std::invalid_argument);
}

TEST_CASE("fractional uplink power control") {
    const PowerControlConfig pc{0.8, 10.0, 23.0};
    CHECK_THAT(ul_tx_power_dBm(100.0, pc, -92.0), Catch::Matchers::WithinAbs(-2.0, 1e-12));
    CHECK_THAT(ul_tx_power_dBm(135.0, pc, -92.0), Catch::Matchers::WithinAbs(23.0, 1e-12));

    // Full compensation hits the target exactly while uncapped.
    const PowerControlConfig full{1.0, 10.0, 1000.0};
    const double p = ul_tx_power_dBm(127.5, full, -92.0);
    CHECK_THAT(p - 127.5 - (-92.0), Catch::Matchers::WithinAbs(10.0, 1e-12));

    PowerControlConfig bad{1.5, 10.0, 23.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("power control is non-decreasing in pathloss and continuous at the cap") {
    const PowerControlConfig pc{0.8, 10.0, 23.0};
    double prev = -1e9;
    for (double pl = 0.0; pl <= 200.0; pl += 0.25) {
        const double p = ul_tx_power_dBm(pl, pc, -92.0);
        CHECK(p >= prev - 1e-12);
        prev = p;
    }
    const double capPl = (23.0 + 92.0 - 10.0) / 0.8;
    CHECK_THAT(ul_tx_power_dBm(capPl, pc, -92.0), Catch::Matchers::WithinAbs(23.0, 1e-9));
    CHECK_THAT(ul_tx_power_dBm(capPl - 0.001, pc, -92.0), Catch::Matchers::WithinAbs(23.0, 1e-3));
}

namespace {

AggressorTerm term(double rxPower_dBm, double activity, double overlap, double atten_dB,
                   InterferenceMode mode = InterferenceMode::BsToUe) {
    AggressorTerm t;
    t.rxPower_dBm = rxPower_dBm;
    t.activity = activity;
    t.overlap = overlap;
    t.attenuation_dB = atten_dB;
    t.mode = mode;
    return t;
}

} // namespace

TEST_CASE("victim SINR: interference-free limit") {
    const SinrBreakdown b = victim_sinr(-70.0, -92.0, {});
    CHECK_THAT(b.sinr_dB, Catch::Matchers::WithinAbs(22.0, 1e-12));
}

TEST_CASE("victim SINR: one aggressor at noise power costs 3.01 dB") {
    const std::vector<AggressorTerm> aggs = {term(-92.0, 1.0, 1.0, 0.0)};
    const SinrBreakdown b = victim_sinr(-70.0, -92.0, aggs, {true});
    CHECK_THAT(b.sinr_dB, Catch::Matchers::WithinAbs(22.0 - 10.0 * std::log10(2.0), 1e-9));
}

TEST_CASE("adjacent-channel UE-to-UE term is 28.2 dB weaker than co-channel") {
    const AggressorTerm co = term(-80.0, 0.5, 0.25, 0.0, InterferenceMode::UeToUe);
    const AggressorTerm adj = term(-80.0, 0.5, 0.25, 28.2, InterferenceMode::UeToUe);
    CHECK_THAT(linear_to_db(co.rx_mw() / adj.rx_mw()), Catch::Matchers::WithinAbs(28.2, 1e-9));
}

TEST_CASE("removing an interference term never decreases SINR") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<AggressorTerm> aggs;
        const int n = 1 + static_cast<int>(rng.next_u64() % 8);
        for (int i = 0; i < n; ++i)
            aggs.push_back(term(rng.next_uniform(-120, -60), rng.next_double(), rng.next_double(),
                                rng.next_uniform(0, 40)));
        const double full = victim_sinr(-70.0, -92.0, aggs).sinr_dB;
        std::vector<AggressorTerm> fewer(aggs.begin(), aggs.end() - 1);
        CHECK(victim_sinr(-70.0, -92.0, fewer).sinr_dB >= full - 1e-12);
    }
}

TEST_CASE("SINR breakdown recomposes within 1e-9 dB") {
    const std::vector<AggressorTerm> aggs = {term(-85.0, 0.7, 0.75, 0.0),
                                             term(-95.0, 0.3, 0.25, 28.2)};
    const SinrBreakdown b = victim_sinr(-70.0, -92.0, aggs);
    double denom = dbm_to_mw(b.noise_dBm);
    for (const auto& t : b.interferenceTerms) denom += t.mean_rx_mw();
    CHECK_THAT(b.sinr_dB, Catch::Matchers::WithinAbs(b.signal_dBm - mw_to_dbm(denom), 1e-9));
}

// ---------------------------------------------------------------------------
// MCS table against the independent normal-approximation oracle
// ---------------------------------------------------------------------------

namespace {

// Acklam's rational approximation of the standard normal quantile; used here
// so the oracle shares no code with the library's Q^-1.
double oracle_qinv(double eps) {
    const double p = 1.0 - eps; // quantile of the CDF
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    return x;
}

// Oracle threshold: solve C(g) - sqrt(V(g)/n) * Qinv(eps) = k/n on a fine grid
// plus bisection, written independently of the library path.
double oracle_threshold_dB(int n, int k, int modBits, double eps) {
    const double qinv = oracle_qinv(eps);
    const double log2e = std::log2(std::exp(1.0));
    auto f = [&](double g) {
        const double cap = std::log2(1.0 + g);
        const double c = cap < modBits ? cap : static_cast<double>(modBits);
        const double v = (1.0 - std::pow(1.0 + g, -2.0)) * log2e * log2e;
        return c - std::sqrt(v / n) * qinv - static_cast<double>(k) / n;
    };
    double lo = 1e-8, hi = 1e8;
    for (int i = 0; i < 300; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (f(mid) < 0.0) lo = mid; else hi = mid;
    }
    return 10.0 * std::log10(std::sqrt(lo * hi));
}

} // namespace

TEST_CASE("MCS table: nine entries with strictly increasing thresholds") {
    const auto table = build_mcs_table();
    REQUIRE(table.size() == 9);
    for (size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i].spectralEfficiency > table[i - 1].spectralEfficiency);
        CHECK(table[i].sinrThreshold_dB > table[i - 1].sinrThreshold_dB);
    }
    CHECK(table.front().modulation == Modulation::QPSK);
    CHECK_THAT(table.front().codeRate, Catch::Matchers::WithinAbs(1.0 / 20.0, 1e-12));
    CHECK(table.back().modulation == Modulation::QAM64);
    CHECK_THAT(table.back().codeRate, Catch::Matchers::WithinAbs(3.0 / 4.0, 1e-12));
}

TEST_CASE("MCS thresholds match the normal-approximation oracle within 0.1 dB") {
    const auto table = build_mcs_table();
    // Frozen oracle values for the default payload/TTI/BLER target.
    const double frozen[9] = {-9.5067, -6.3553, -3.0474, -0.4054, 3.7679,
                              6.8111,  9.4401,  14.1926, 15.8613};
    REQUIRE(table.size() == 9);
    for (size_t i = 0; i < table.size(); ++i) {
        const double oracle = oracle_threshold_dB(table[i].blocklength, 256,
                                                  modulation_bits(table[i].modulation), 1e-5);
        CHECK_THAT(table[i].sinrThreshold_dB, Catch::Matchers::WithinAbs(oracle, 0.1));
        CHECK_THAT(table[i].sinrThreshold_dB, Catch::Matchers::WithinAbs(frozen[i], 0.02));
    }
}

TEST_CASE("QPSK 1/3 allocation: 8 PRBs, 384 resource elements") {
    const auto table = build_mcs_table();
    const McsEntry& qpsk13 = table[3];
    CHECK(qpsk13.modulation == Modulation::QPSK);
    CHECK_THAT(qpsk13.codeRate, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    CHECK(qpsk13.blocklength == 384);
    CHECK(qpsk13.allocPrb == 8);
}

TEST_CASE("MCSs that cannot carry the payload are excluded") {
    // A 4-PRB carrier cannot fit the robust QPSK allocations.
    const auto table = build_mcs_table(256, 4, 1e-5, 4);
    CHECK(table.size() < 9);
    for (const auto& e : table) CHECK(e.allocPrb <= 4);
}

TEST_CASE("BLER curve limits") {
    CHECK(fbl::block_error_rate(40.0, 384, 256, 2) < 1e-12);
    CHECK(fbl::block_error_rate(-30.0, 384, 256, 2) > 1.0 - 1e-9);
}

TEST_CASE("URLLC failure probability: high-SINR limit") {
    InterferenceEnumeration en;
    const auto table = build_mcs_table();
    const double pf = urllc_failure_probability(-40.0, -92.0, en, table[3]);
    CHECK(pf < 1e-9);
}

TEST_CASE("URLLC failure probability: a rare catastrophic state dominates") {
    // One aggressor active 0.1% of the time but 40 dB above the signal.
    InterferenceEnumeration en;
    AggressorTerm t = term(-30.0, 1e-3, 1.0, 0.0);
    en.topK.push_back(t);
    const auto table = build_mcs_table();
    const double pf = urllc_failure_probability(-70.0, -92.0, en, table[0]);
    CHECK(pf >= 1e-3);
    CHECK(pf > 1e-5);
}

TEST_CASE("URLLC failure probability: coverage failure without interference") {
    InterferenceEnumeration en;
    const auto table = build_mcs_table();
    // SINR below even the most robust threshold.
    const double pf = urllc_failure_probability(-92.0 + table[0].sinrThreshold_dB - 3.0, -92.0, en,
                                                table[0]);
    CHECK(pf > 1e-5);
}

TEST_CASE("URLLC failure probability is monotone in added aggressor states") {
    SplitMix64 rng(77);
    const auto table = build_mcs_table();
    for (int trial = 0; trial < 50; ++trial) {
        InterferenceEnumeration en;
        const int n = static_cast<int>(rng.next_u64() % 4);
        for (int i = 0; i < n; ++i)
            en.topK.push_back(term(rng.next_uniform(-110, -70), rng.next_double() * 0.5, 1.0, 0.0));
        const McsEntry& mcs = table[rng.next_u64() % table.size()];
        const double base = urllc_failure_probability(-80.0, -92.0, en, mcs);
        en.topK.push_back(term(rng.next_uniform(-110, -70), rng.next_double() * 0.5, 1.0, 0.0));
        const double more = urllc_failure_probability(-80.0, -92.0, en, mcs);
        CHECK(more >= base - 1e-12);
    }
}

TEST_CASE("MCS selection picks the highest feasible rate") {
    const auto table = build_mcs_table();
    InterferenceEnumeration en;
    const McsSelection high = select_mcs(table, [](int) { return -60.0; }, -92.0, en, 1e-5);
    CHECK(high.mcsIndex == static_cast<int>(table.size()) - 1);

    // Mid-range SINR: highest MCS whose threshold clears SINR.
    const double sinr = -92.0 + 5.0; // 5 dB
    const McsSelection mid = select_mcs(table, [&](int) { return sinr; }, -92.0, en, 1e-5);
    CHECK(mid.mcsIndex >= 0);
    CHECK(table[mid.mcsIndex].sinrThreshold_dB <= 5.0);
    if (mid.mcsIndex + 1 < static_cast<int>(table.size()))
        CHECK(table[mid.mcsIndex + 1].sinrThreshold_dB > 5.0);

    // Hopeless SINR: fall back to the minimum-failure entry.
    const McsSelection low = select_mcs(table, [](int) { return -140.0; }, -92.0, en, 1e-5);
    CHECK(low.mcsIndex == 0);
    CHECK(low.pFail > 1e-5);
}

TEST_CASE("enumerate_interference splits top-K and folds the rest") {
    std::vector<AggressorTerm> aggs;
    for (int i = 0; i < 10; ++i) aggs.push_back(term(-80.0 - i * 5.0, 0.5, 1.0, 0.0));
    const InterferenceEnumeration en = enumerate_interference(aggs, 3);
    REQUIRE(en.topK.size() == 3);
    CHECK(en.topK[0].rxPower_dBm == -80.0);
    CHECK(en.restMean_mw > 0.0);
    double rest = 0.0;
    for (int i = 3; i < 10; ++i) rest += aggs[i].mean_rx_mw();
    CHECK_THAT(en.restMean_mw, Catch::Matchers::WithinRel(rest, 1e-12));
}

TEST_CASE("attenuated Shannon rate map") {
    CHECK(embb_rate_bps(-400.0, 50e6) < 1.0);
    CHECK_THAT(embb_rate_bps(0.0, 50e6, 0.75), Catch::Matchers::WithinAbs(37.5e6, 1.0));
    CHECK_THAT(embb_rate_bps(60.0, 50e6, 0.75, 7.4), Catch::Matchers::WithinAbs(50e6 * 7.4, 1.0));
    double prev = 0.0;
    for (double s = -30.0; s <= 40.0; s += 0.5) {
        const double r = embb_rate_bps(s, 50e6);
        CHECK(r >= prev);
        prev = r;
    }
}
