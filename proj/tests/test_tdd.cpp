#include "coexsim/tdd.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace coexsim;

TEST_CASE("DUDU pattern structure") {
    const TddPattern p = make_dudu();
    REQUIRE(p.period_symbols() == 14);
    for (int i = 0; i < 7; ++i) CHECK(p.symbols[i] == SymbolDir::D);
    for (int i = 7; i < 14; ++i) CHECK(p.symbols[i] == SymbolDir::U);
    CHECK(p.duty(LinkDir::DL) == 0.5);
    CHECK(p.duty(LinkDir::UL) == 0.5);
}

TEST_CASE("DDDU pattern structure") {
    const TddPattern p = make_dddu();
    REQUIRE(p.period_symbols() == 56);
    CHECK(p.count(SymbolDir::D) == 42);
    CHECK(p.count(SymbolDir::U) == 14);
    CHECK(p.duty(LinkDir::DL) == 0.75);
    CHECK(p.duty(LinkDir::UL) == 0.25);
}

TEST_CASE("synchronized identical patterns have zero cross-direction overlap") {
    const TddPattern dudu = make_dudu();
    const OverlapProfile prof = overlap_profile(dudu, dudu);
    CHECK(prof.at(LinkDir::DL, LinkDir::UL) == Fraction(0, 1));
    CHECK(prof.at(LinkDir::UL, LinkDir::DL) == Fraction(0, 1));
    CHECK(prof.at(LinkDir::DL, LinkDir::DL) == Fraction(1, 1));
    CHECK(prof.at(LinkDir::UL, LinkDir::UL) == Fraction(1, 1));
}

TEST_CASE("DDDU aggressor over DUDU victim: 56-symbol enumeration") {
    const OverlapProfile prof = overlap_profile(make_dddu(), make_dudu());
    CHECK(prof.at(LinkDir::DL, LinkDir::UL) == Fraction(3, 4));
    CHECK(prof.at(LinkDir::UL, LinkDir::UL) == Fraction(1, 4));
    CHECK(prof.at(LinkDir::DL, LinkDir::DL) == Fraction(3, 4));
    CHECK(prof.at(LinkDir::UL, LinkDir::DL) == Fraction(1, 4));
}

TEST_CASE("all (DDDU, DUDU) fractions are multiples of 1/56") {
    const OverlapProfile prof = overlap_profile(make_dddu(), make_dudu());
    for (int a = 0; a < 2; ++a)
        for (int v = 0; v < 2; ++v) CHECK(56 % prof.frac[a][v].den == 0);
}

TEST_CASE("overlap profile is symmetric on identical patterns") {
    for (const TddPattern& p : {make_dudu(), make_dddu()}) {
        const OverlapProfile prof = overlap_profile(p, p);
        for (int a = 0; a < 2; ++a)
            for (int v = 0; v < 2; ++v)
                CHECK(prof.frac[a][v] == prof.frac[v][a]);
    }
}

TEST_CASE("interference modes for sTDD") {
    const auto modes = interference_modes(make_dudu(), make_dudu());
    REQUIRE(modes.size() == 2);
    CHECK(modes.at(InterferenceMode::BsToUe) == Fraction(1, 1));
    CHECK(modes.at(InterferenceMode::UeToBs) == Fraction(1, 1));
    CHECK(modes.count(InterferenceMode::BsToBs) == 0);
    CHECK(modes.count(InterferenceMode::UeToUe) == 0);
}

TEST_CASE("interference modes for uTDD: all four present") {
    const auto modes = interference_modes(make_dddu(), make_dudu());
    REQUIRE(modes.size() == 4);
    CHECK(modes.at(InterferenceMode::BsToBs) == Fraction(3, 4));
    CHECK(modes.at(InterferenceMode::UeToBs) == Fraction(1, 4));
    CHECK(modes.at(InterferenceMode::BsToUe) == Fraction(3, 4));
    CHECK(modes.at(InterferenceMode::UeToUe) == Fraction(1, 4));
}

TEST_CASE("degenerate all-D aggressor vs all-U victim") {
    const TddPattern allD = parse_pattern("DDDDDDDDDDDDDD", "allD");
    const TddPattern allU = parse_pattern("UUUUUUUUUUUUUU", "allU");
    const auto modes = interference_modes(allD, allU);
    REQUIRE(modes.size() == 1);
    CHECK(modes.at(InterferenceMode::BsToBs) == Fraction(1, 1));
}

TEST_CASE("ACIR application") {
    const AcirTable acir;
    CHECK(channel_attenuation(SpectrumMode::Adjacent, InterferenceMode::UeToUe, acir) == 28.2);
    CHECK(channel_attenuation(SpectrumMode::Adjacent, InterferenceMode::BsToBs, acir) == 38.8);
    CHECK(channel_attenuation(SpectrumMode::Adjacent, InterferenceMode::BsToUe, acir) == 32.7);
    CHECK(channel_attenuation(SpectrumMode::Adjacent, InterferenceMode::UeToBs, acir) == 29.6);
    for (auto m : {InterferenceMode::BsToUe, InterferenceMode::BsToBs, InterferenceMode::UeToUe,
                   InterferenceMode::UeToBs})
        CHECK(channel_attenuation(SpectrumMode::CoChannel, m, acir) == 0.0);
}

TEST_CASE("ACIR table validation rejects non-positive entries") {
    AcirTable acir;
    acir.ueToUe_dB = -1.0;
    CHECK_THROWS_AS(acir.validate(), std::invalid_argument);
}

TEST_CASE("pattern strings must align with the slot grid") {
    CHECK_THROWS_AS(parse_pattern("DDD"), std::invalid_argument);
    CHECK_THROWS_AS(parse_pattern(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_pattern("DDDDDDDXUUUUUU"), std::invalid_argument);
    const TddPattern p = parse_pattern("DDDDDDD|UUUUUUU");
    CHECK(p.period_symbols() == 14);
}

TEST_CASE("guard symbols reduce the duty cycle") {
    const TddPattern p = make_dudu(1);
    CHECK(p.count(SymbolDir::G) == 2);
    CHECK(p.duty(LinkDir::DL) < 0.5);
    CHECK(p.duty(LinkDir::UL) < 0.5);
}

TEST_CASE("worst-case TTI alignment wait") {
    // DUDU with a 4-symbol TTI: valid uplink starts at symbols 7..10, the worst
    // symbol-aligned arrival (11) waits 10 symbols for the next slot's start.
    CHECK(worst_case_alignment_wait_symbols(make_dudu(), LinkDir::UL, 4) == 10);
    CHECK(worst_case_alignment_wait_symbols(make_dudu(), LinkDir::DL, 4) == 10);
    // Slot-based DDDU leaves a 45-symbol worst-case wait for uplink.
    CHECK(worst_case_alignment_wait_symbols(make_dddu(), LinkDir::UL, 4) == 45);
    const TddPattern allD = parse_pattern("DDDDDDDDDDDDDD");
    CHECK_THROWS_AS(worst_case_alignment_wait_symbols(allD, LinkDir::UL, 4), std::invalid_argument);
}
