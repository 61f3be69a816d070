#pragma once

#include "coexsim/geometry.hpp"
#include "coexsim/tdd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coexsim {

// Thermal noise power over `bandwidth_Hz` at the given receiver noise figure.
inline double noise_power_dBm(double bandwidth_Hz, double noiseFigure_dB) {
    if (bandwidth_Hz <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
    return -174.0 + 10.0 * std::log10(bandwidth_Hz) + noiseFigure_dB;
}

struct PowerControlConfig {
    double alpha = 0.8;
    double targetSnr_dB = 10.0;
    double maxUePower_dBm = 23.0;

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha out of [0,1]");
    }
};

// Open-loop fractional power control toward a received-SNR target:
// min(maxUePower, rxNoise + targetSnr + alpha * pathloss). With alpha = 1 the
// uncapped received SNR equals the target exactly.
inline double ul_tx_power_dBm(double pathloss_dB, const PowerControlConfig& pc, double rxNoise_dBm) {
    if (!std::isfinite(pathloss_dB)) throw std::invalid_argument("non-finite pathloss");
    return std::min(pc.maxUePower_dBm, rxNoise_dBm + pc.targetSnr_dB + pc.alpha * pathloss_dB);
}

// ---------------------------------------------------------------------------
// Finite-blocklength link abstraction
// ---------------------------------------------------------------------------

namespace fbl {

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Inverse of Q via bisection on the monotone tail; adequate for the BLER
// targets used here.
inline double q_inverse(double eps) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("Q^-1 argument out of (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (q_function(mid) > eps) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double capacity_bits(double snrLinear, int modulationBits) {
    return std::min(std::log2(1.0 + snrLinear), static_cast<double>(modulationBits));
}

// Complex-AWGN channel dispersion.
inline double dispersion(double snrLinear) {
    const double log2e = 1.4426950408889634;
    const double t = 1.0 + snrLinear;
    return (1.0 - 1.0 / (t * t)) * log2e * log2e;
}

// One-shot block error rate of k bits over n channel uses at the given SINR:
// BLER = Q((n C - k) / sqrt(n V)).
inline double block_error_rate(double sinr_dB, int n, int k, int modulationBits) {
    const double g = db_to_linear(sinr_dB);
    const double c = capacity_bits(g, modulationBits);
    const double v = dispersion(g);
    if (v <= 0.0) return c * n >= k ? 0.0 : 1.0;
    const double x = (n * c - k) / std::sqrt(n * v);
    return std::clamp(q_function(x), 0.0, 1.0);
}

// Smallest SINR with BLER <= eps, by bisection (the normal-approximation
// expression is monotone in SINR for eps < 1/2).
inline double sinr_threshold_dB(int n, int k, int modulationBits, double eps) {
    double lo = -60.0, hi = 60.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (block_error_rate(mid, n, k, modulationBits) > eps) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace fbl

enum class Modulation : uint8_t { QPSK, QAM16, QAM64 };

inline const char* to_string(Modulation m) {
    switch (m) {
        case Modulation::QPSK: return "QPSK";
        case Modulation::QAM16: return "16QAM";
        case Modulation::QAM64: return "64QAM";
    }
    return "?";
}

inline int modulation_bits(Modulation m) {
    switch (m) {
        case Modulation::QPSK: return 2;
        case Modulation::QAM16: return 4;
        case Modulation::QAM64: return 6;
    }
    throw std::invalid_argument("unknown modulation");
}

struct McsEntry {
    Modulation modulation = Modulation::QPSK;
    double codeRate = 0.0;
    double spectralEfficiency = 0.0; // bits per resource element
    int blocklength = 0;             // resource elements carrying the payload
    int allocPrb = 0;                // PRBs of a one-TTI allocation
    double sinrThreshold_dB = 0.0;   // BLER <= target at/above this SINR
};

constexpr int kSubcarriersPerPrb = 12;
constexpr int kTtiSymbols = 4;
constexpr double kPrbBandwidth_Hz = 12 * 30e3;
constexpr int kPayloadBits = 256;

inline int prbs_for_bandwidth(double bandwidth_Hz) {
    return static_cast<int>(std::floor(bandwidth_Hz / kPrbBandwidth_Hz));
}

// The nine modulation/code-rate combinations of the URLLC air interface with
// SINR thresholds from the normal approximation at the blocklength implied by
// a one-TTI allocation of the 32-byte payload. MCSs whose allocation does not
// fit the carrier are excluded.
inline std::vector<McsEntry> build_mcs_table(int payloadBits = kPayloadBits,
                                             int ttiSymbols = kTtiSymbols,
                                             double targetBler = 1e-5,
                                             int carrierPrbs = 133) {
    static const std::pair<Modulation, double> kSet[] = {
        {Modulation::QPSK, 1.0 / 20.0}, {Modulation::QPSK, 1.0 / 10.0},
        {Modulation::QPSK, 1.0 / 5.0},  {Modulation::QPSK, 1.0 / 3.0},
        {Modulation::QAM16, 1.0 / 3.0}, {Modulation::QAM16, 1.0 / 2.0},
        {Modulation::QAM16, 2.0 / 3.0}, {Modulation::QAM64, 2.0 / 3.0},
        {Modulation::QAM64, 3.0 / 4.0},
    };

    std::vector<McsEntry> table;
    for (const auto& [mod, rate] : kSet) {
        McsEntry e;
        e.modulation = mod;
        e.codeRate = rate;
        e.spectralEfficiency = modulation_bits(mod) * rate;
        e.blocklength = static_cast<int>(std::ceil(payloadBits / e.spectralEfficiency));
        e.allocPrb = static_cast<int>(
            std::ceil(static_cast<double>(e.blocklength) / (kSubcarriersPerPrb * ttiSymbols)));
        if (e.allocPrb > carrierPrbs) continue; // cannot carry the payload
        e.sinrThreshold_dB =
            fbl::sinr_threshold_dB(e.blocklength, payloadBits, modulation_bits(mod), targetBler);
        table.push_back(e);
    }
    return table;
}

// ---------------------------------------------------------------------------
// SINR assembly
// ---------------------------------------------------------------------------

// One aggressor contribution at the victim receiver. `rxPower_dBm` is the
// received power before ACIR; `activity` is the aggressor's resource
// utilization; `overlap` the TDD time-overlap fraction with the victim's
// reception direction. `wideband` transmitters cover the victim's whole
// allocation when active; narrowband ones (sub-band URLLC bursts) collide
// with only a fraction of its resource elements and are treated as diffuse.
struct AggressorTerm {
    uint32_t aggressorId = 0;
    InterferenceMode mode = InterferenceMode::BsToUe;
    double rxPower_dBm = -300.0;
    double activity = 0.0;
    double overlap = 0.0;
    double attenuation_dB = 0.0;
    bool wideband = true;

    double mean_activity() const { return activity * overlap; }
    double rx_mw() const { return dbm_to_mw(rxPower_dBm - attenuation_dB); }
    double mean_rx_mw() const { return mean_activity() * rx_mw(); }
};

struct SinrBreakdown {
    double signal_dBm = 0.0;
    double noise_dBm = 0.0;
    std::vector<AggressorTerm> interferenceTerms;
    double sinr_dB = 0.0;
};

// Linear-domain SINR: explicit on/off bits for the first
// `interferenceState.size()` terms, mean activity for the remainder.
inline SinrBreakdown victim_sinr(double signal_dBm, double noise_dBm,
                                 const std::vector<AggressorTerm>& aggressors,
                                 const std::vector<bool>& interferenceState = {}) {
    SinrBreakdown out;
    out.signal_dBm = signal_dBm;
    out.noise_dBm = noise_dBm;
    out.interferenceTerms = aggressors;

    double denom_mw = dbm_to_mw(noise_dBm);
    for (size_t i = 0; i < aggressors.size(); ++i) {
        const auto& t = aggressors[i];
        if (i < interferenceState.size()) {
            if (interferenceState[i]) denom_mw += t.rx_mw();
        } else {
            denom_mw += t.mean_rx_mw();
        }
    }
    out.sinr_dB = signal_dBm - mw_to_dbm(denom_mw);
    return out;
}

// ---------------------------------------------------------------------------
// URLLC reliability over enumerated interference states
// ---------------------------------------------------------------------------

struct InterferenceEnumeration {
    std::vector<AggressorTerm> topK;   // explicit on/off terms
    double restMean_mw = 0.0;          // mean power of the folded remainder
};

// Split aggressors into the K strongest (by mean received power) and a folded
// mean remainder. Narrowband terms always fold into the remainder: a sub-band
// burst punctures only a fraction of the victim's codeword, so its impact is
// the averaged power, not an on/off collision of the whole allocation.
inline InterferenceEnumeration enumerate_interference(std::vector<AggressorTerm> aggressors, int k) {
    InterferenceEnumeration en;
    std::sort(aggressors.begin(), aggressors.end(), [](const AggressorTerm& a, const AggressorTerm& b) {
        return a.mean_rx_mw() > b.mean_rx_mw();
    });
    for (auto& t : aggressors) {
        if (t.wideband && static_cast<int>(en.topK.size()) < k && t.mean_activity() > 0.0)
            en.topK.push_back(t);
        else
            en.restMean_mw += t.mean_rx_mw();
    }
    return en;
}

// Failure probability of one-shot delivery: sum over the 2^K on/off states of
// p(state) * BLER(SINR(state)).
inline double urllc_failure_probability(double signal_dBm, double noise_dBm,
                                        const InterferenceEnumeration& en, const McsEntry& mcs) {
    const int k = static_cast<int>(en.topK.size());
    const double s_mw = dbm_to_mw(signal_dBm);
    const double base_mw = dbm_to_mw(noise_dBm) + en.restMean_mw;

    double pFail = 0.0;
    for (uint32_t state = 0; state < (1u << k); ++state) {
        double p = 1.0;
        double denom = base_mw;
        for (int i = 0; i < k; ++i) {
            const double a = en.topK[i].mean_activity();
            if (state & (1u << i)) {
                p *= a;
                denom += en.topK[i].rx_mw();
            } else {
                p *= 1.0 - a;
            }
        }
        if (p <= 0.0) continue;
        const double sinr_dB = linear_to_db(s_mw / denom);
        pFail += p * fbl::block_error_rate(sinr_dB, mcs.blocklength, kPayloadBits,
                                           modulation_bits(mcs.modulation));
    }
    return std::min(pFail, 1.0);
}

struct McsSelection {
    int mcsIndex = -1;
    double pFail = 1.0;
};

// Highest-rate MCS meeting the failure target, else the minimum-failure one
// (ties resolve toward the most robust entry). `signalForMcs(i)` supplies the
// received signal power for table entry i (the uplink concentrates its power
// in the allocation, so the signal depends on the allocation size).
template <typename SignalFn>
McsSelection select_mcs(const std::vector<McsEntry>& table, SignalFn&& signalForMcs,
                        double noise_dBm, const InterferenceEnumeration& en, double targetPfail) {
    double bestPfail = std::numeric_limits<double>::infinity();
    int bestIdx = -1;
    for (int i = static_cast<int>(table.size()) - 1; i >= 0; --i) {
        const double pf = urllc_failure_probability(signalForMcs(i), noise_dBm, en, table[i]);
        if (pf <= targetPfail) return {i, pf};
        if (pf <= bestPfail) { bestPfail = pf; bestIdx = i; }
    }
    return {bestIdx, bestPfail};
}

// Attenuated-Shannon rate map with a spectral-efficiency cap.
inline double embb_rate_bps(double sinr_dB, double bandwidth_Hz, double eta = 0.75,
                            double seCap_bpsHz = 7.4) {
    if (std::isnan(sinr_dB)) throw std::invalid_argument("non-finite SINR");
    const double se = std::min(eta * std::log2(1.0 + db_to_linear(sinr_dB)), seCap_bpsHz);
    return bandwidth_Hz * se;
}

} // namespace coexsim
