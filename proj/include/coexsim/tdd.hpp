#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace coexsim {

// 30 kHz SCS: 14 symbols per 0.5 ms slot.
constexpr int kSymbolsPerSlot = 14;
constexpr double kSlotDuration_ms = 0.5;
constexpr double kSymbolDuration_ms = kSlotDuration_ms / kSymbolsPerSlot;

enum class SymbolDir : uint8_t { D, U, G }; // G = guard, neither transmits nor receives
enum class LinkDir : uint8_t { DL, UL };

inline SymbolDir to_symbol_dir(LinkDir d) { return d == LinkDir::DL ? SymbolDir::D : SymbolDir::U; }

// Periodic symbol-level direction sequence. All patterns share the 30 kHz
// symbol grid; slot borders are aligned across networks.
struct TddPattern {
    std::string name;
    std::vector<SymbolDir> symbols; // one period

    int period_symbols() const { return static_cast<int>(symbols.size()); }

    int count(SymbolDir d) const {
        int n = 0;
        for (auto s : symbols)
            if (s == d) ++n;
        return n;
    }

    // Fraction of the period spent in direction d (duty cycle).
    double duty(LinkDir d) const {
        if (symbols.empty()) throw std::invalid_argument("empty TDD pattern");
        return static_cast<double>(count(to_symbol_dir(d))) / static_cast<double>(symbols.size());
    }
};

// Pattern string: one char per symbol from {D,U,G}, optional '|' slot
// separators, e.g. "DDDDDDDDDDDDDD|DDDDDDDUUUUUUU".
inline TddPattern parse_pattern(const std::string& text, const std::string& name = "custom") {
    TddPattern p;
    p.name = name;
    for (char c : text) {
        switch (c) {
            case 'D': p.symbols.push_back(SymbolDir::D); break;
            case 'U': p.symbols.push_back(SymbolDir::U); break;
            case 'G': p.symbols.push_back(SymbolDir::G); break;
            case '|': break;
            default: throw std::invalid_argument(std::string("invalid pattern symbol '") + c + "'");
        }
    }
    if (p.symbols.empty()) throw std::invalid_argument("empty TDD pattern string");
    if (p.symbols.size() % kSymbolsPerSlot != 0)
        throw std::invalid_argument("TDD pattern length must be a multiple of 14 symbols");
    return p;
}

// Slot-based eMBB pattern: 4-slot period, slots 0-2 downlink, slot 3 uplink.
// Guard symbols are taken from the transmitter side of each switch.
inline TddPattern make_dddu(int guardSymbols = 0) {
    TddPattern p;
    p.name = "DDDU";
    p.symbols.assign(4 * kSymbolsPerSlot, SymbolDir::D);
    for (int i = 3 * kSymbolsPerSlot; i < 4 * kSymbolsPerSlot; ++i) p.symbols[i] = SymbolDir::U;
    for (int g = 0; g < guardSymbols; ++g) {
        p.symbols[3 * kSymbolsPerSlot - 1 - g] = SymbolDir::G; // last D before D->U
        p.symbols[4 * kSymbolsPerSlot - 1 - g] = SymbolDir::G; // last U before U->D wrap
    }
    return p;
}

// Sub-slot URLLC pattern: 1-slot period, symbols 0-6 downlink, 7-13 uplink.
inline TddPattern make_dudu(int guardSymbols = 0) {
    TddPattern p;
    p.name = "DUDU";
    p.symbols.assign(kSymbolsPerSlot, SymbolDir::D);
    for (int i = 7; i < kSymbolsPerSlot; ++i) p.symbols[i] = SymbolDir::U;
    for (int g = 0; g < guardSymbols; ++g) {
        p.symbols[6 - g] = SymbolDir::G;                   // last D before D->U
        p.symbols[kSymbolsPerSlot - 1 - g] = SymbolDir::G; // last U before U->D wrap
    }
    return p;
}

// Exact rational fraction (numerator symbol count over victim symbol count).
struct Fraction {
    long num = 0;
    long den = 1;

    Fraction() = default;
    Fraction(long n, long d) : num(n), den(d) {
        if (d == 0) throw std::invalid_argument("zero denominator");
        long g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
};

// Per (aggressor direction, victim direction): fraction of the victim's
// reception symbols during which the aggressor transmits in that direction,
// enumerated symbol-by-symbol over the least common period.
struct OverlapProfile {
    Fraction frac[2][2]; // [aggressor LinkDir][victim LinkDir]

    const Fraction& at(LinkDir agg, LinkDir vic) const {
        return frac[static_cast<int>(agg)][static_cast<int>(vic)];
    }
};

inline OverlapProfile overlap_profile(const TddPattern& aggressor, const TddPattern& victim) {
    if (aggressor.symbols.empty() || victim.symbols.empty())
        throw std::invalid_argument("empty TDD pattern");
    const long pa = aggressor.period_symbols();
    const long pv = victim.period_symbols();
    const long common = std::lcm(pa, pv);

    long vicCount[2] = {0, 0};
    long overlap[2][2] = {{0, 0}, {0, 0}};
    for (long s = 0; s < common; ++s) {
        SymbolDir vs = victim.symbols[s % pv];
        SymbolDir as = aggressor.symbols[s % pa];
        for (int vd = 0; vd < 2; ++vd) {
            if (vs != (vd == 0 ? SymbolDir::D : SymbolDir::U)) continue;
            ++vicCount[vd];
            if (as == SymbolDir::D) ++overlap[0][vd];
            if (as == SymbolDir::U) ++overlap[1][vd];
        }
    }

    OverlapProfile prof;
    for (int ad = 0; ad < 2; ++ad)
        for (int vd = 0; vd < 2; ++vd)
            prof.frac[ad][vd] = vicCount[vd] > 0 ? Fraction(overlap[ad][vd], vicCount[vd]) : Fraction(0, 1);
    return prof;
}

// Inter-network interference scenarios: named by aggressor->victim equipment.
enum class InterferenceMode : uint8_t {
    BsToUe, // aggressor DL over victim DL
    BsToBs, // aggressor DL over victim UL (cross-link)
    UeToUe, // aggressor UL over victim DL (cross-link)
    UeToBs  // aggressor UL over victim UL
};

inline InterferenceMode interference_mode(LinkDir aggressor, LinkDir victim) {
    if (aggressor == LinkDir::DL) return victim == LinkDir::DL ? InterferenceMode::BsToUe : InterferenceMode::BsToBs;
    return victim == LinkDir::DL ? InterferenceMode::UeToUe : InterferenceMode::UeToBs;
}

inline const char* to_string(InterferenceMode m) {
    switch (m) {
        case InterferenceMode::BsToUe: return "BS-to-UE";
        case InterferenceMode::BsToBs: return "BS-to-BS";
        case InterferenceMode::UeToUe: return "UE-to-UE";
        case InterferenceMode::UeToBs: return "UE-to-BS";
    }
    return "?";
}

// Nonzero interference modes between two patterns with their time fractions.
inline std::map<InterferenceMode, Fraction> interference_modes(const TddPattern& aggressor,
                                                               const TddPattern& victim) {
    const OverlapProfile prof = overlap_profile(aggressor, victim);
    std::map<InterferenceMode, Fraction> modes;
    for (int ad = 0; ad < 2; ++ad) {
        for (int vd = 0; vd < 2; ++vd) {
            Fraction f = prof.frac[ad][vd];
            if (f.num == 0) continue;
            modes[interference_mode(static_cast<LinkDir>(ad), static_cast<LinkDir>(vd))] = f;
        }
    }
    return modes;
}

enum class SpectrumMode : uint8_t { CoChannel, Adjacent };

// Adjacent-channel interference ratio per interference scenario (Table-level
// defaults from the evaluated deployment; co-channel bypasses the table).
struct AcirTable {
    double bsToUe_dB = 32.7;
    double bsToBs_dB = 38.8;
    double ueToBs_dB = 29.6;
    double ueToUe_dB = 28.2;

    double at(InterferenceMode m) const {
        switch (m) {
            case InterferenceMode::BsToUe: return bsToUe_dB;
            case InterferenceMode::BsToBs: return bsToBs_dB;
            case InterferenceMode::UeToBs: return ueToBs_dB;
            case InterferenceMode::UeToUe: return ueToUe_dB;
        }
        throw std::invalid_argument("invalid interference mode");
    }

    void validate() const {
        if (bsToUe_dB <= 0 || bsToBs_dB <= 0 || ueToBs_dB <= 0 || ueToUe_dB <= 0)
            throw std::invalid_argument("ACIR entries must be > 0 dB");
    }
};

inline double channel_attenuation(SpectrumMode spectrum, InterferenceMode mode, const AcirTable& acir) {
    if (spectrum == SpectrumMode::CoChannel) return 0.0;
    return acir.at(mode);
}

// Worst-case wait (in symbols) from a symbol-aligned packet arrival until the
// start of the next run of `ttiSymbols` consecutive symbols in direction d.
inline int worst_case_alignment_wait_symbols(const TddPattern& pattern, LinkDir d, int ttiSymbols) {
    const int period = pattern.period_symbols();
    const SymbolDir want = to_symbol_dir(d);
    std::vector<int> starts;
    for (int s = 0; s < period; ++s) {
        bool ok = true;
        for (int k = 0; k < ttiSymbols; ++k)
            if (pattern.symbols[(s + k) % period] != want) { ok = false; break; }
        if (ok) starts.push_back(s);
    }
    if (starts.empty())
        throw std::invalid_argument("pattern has no TTI opportunity in direction");

    int worst = 0;
    for (int a = 0; a < period; ++a) {
        int best = period * 2;
        for (int s : starts) {
            int wait = (s - a) % period;
            if (wait < 0) wait += period;
            best = std::min(best, wait);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace coexsim
