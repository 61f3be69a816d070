#pragma once

#include "coexsim/layout.hpp"
#include "coexsim/radio_link.hpp"
#include "coexsim/tdd.hpp"
#include "coexsim/urllc_eval.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coexsim {

enum class SyncMode : uint8_t { uTDD, sTDD };

inline const char* to_string(SyncMode m) { return m == SyncMode::uTDD ? "uTDD" : "sTDD"; }
inline const char* to_string(SpectrumMode m) {
    return m == SpectrumMode::CoChannel ? "CoChannel" : "Adjacent";
}

enum class AccessPolicy : uint8_t { Closed, Open };

// Offered traffic volumes (Mbps) over the system area.
struct TrafficConfig {
    double embbDlImpact_Mbps = 150.0;
    double embbDlElsewhere_Mbps = 200.0;
    double embbUlImpact_Mbps = 50.0;
    double embbUlElsewhere_Mbps = 67.0;
    double urllcDl_Mbps = 40.0;
    double urllcUl_Mbps = 40.0;
    // DL:UL split applied to the factory eMBB volume knob.
    double factoryEmbbDlUlRatio = 3.0;
};

// A fully-specified simulation cell. Defaults reproduce the baseline
// parameter set; every field is a config knob.
struct Scenario {
    SpectrumMode spectrumMode = SpectrumMode::Adjacent;
    SyncMode syncMode = SyncMode::uTDD;
    double factoryEmbbTraffic_Mbps = 0.0;

    double fc_GHz = 4.0;
    double bandwidth_MHz = 50.0;
    int carrierPrbs = 133; // 50 MHz at 30 kHz SCS

    double wallPerpendicularLoss_dB = 14.0;
    double wallGrazingCoefficient_dB = 20.0;

    double pcAlpha = 0.8;
    double ulTargetSnr_dB = 10.0;

    int nFactoryBS = 3;
    double factoryDistance_m = 200.0;
    double impactAreaSize_m = 500.0;
    double isd_m = 500.0;
    int gridTiers = 1;
    double downtilt_deg = 6.0;

    int nUrllcUE = 50;
    int nEmbbOutdoorUE = 210;
    int nEmbbFactoryUE = -1; // -1: derived from the factory traffic level

    TrafficConfig traffic;
    AcirTable acir;
    UrllcRequirement urllc;
    AccessPolicy accessPolicy = AccessPolicy::Closed;

    int topKAggressors = 5;
    double embbEta = 0.75;
    double embbSeCap_bpsHz = 7.4;
    double processingDelay_ms = 0.4;
    int guardSymbols = 0;

    // Overrides for the per-network symbol patterns; empty = derived from the
    // sync mode (macro DDDU under uTDD, DUDU under sTDD; factory always DUDU).
    std::string macroPatternOverride;
    std::string factoryPatternOverride;

    // Test hook: zero all inter-network coupling (infinite isolation).
    bool isolateNetworks = false;

    int drops = 20;
    uint64_t seed = 1;

    double bandwidth_Hz() const { return bandwidth_MHz * 1e6; }

    int factory_embb_ue_count() const {
        if (nEmbbFactoryUE >= 0) return nEmbbFactoryUE;
        // 2 UEs per Mbps of factory eMBB traffic (0/2/20 for 0/1/10 Mbps).
        return static_cast<int>(std::lround(2.0 * factoryEmbbTraffic_Mbps));
    }

    TddPattern macro_pattern() const {
        if (!macroPatternOverride.empty()) return parse_pattern(macroPatternOverride, "macro");
        return syncMode == SyncMode::uTDD ? make_dddu(guardSymbols) : make_dudu(guardSymbols);
    }

    TddPattern factory_pattern() const {
        if (!factoryPatternOverride.empty()) return parse_pattern(factoryPatternOverride, "factory");
        return make_dudu(guardSymbols);
    }

    DeploymentConfig deployment_config() const {
        DeploymentConfig d;
        d.isd_m = isd_m;
        d.tiers = gridTiers;
        d.factoryDistance_m = factoryDistance_m;
        d.nFactoryBS = nFactoryBS;
        d.impactAreaSize_m = impactAreaSize_m;
        d.downtilt_deg = downtilt_deg;
        return d;
    }

    DropConfig drop_config(uint64_t dropSeed) const {
        DropConfig d;
        d.nUrllcUE = nUrllcUE;
        d.nEmbbOutdoorUE = nEmbbOutdoorUE;
        d.nEmbbFactoryUE = factory_embb_ue_count();
        double impactDl = traffic.embbDlImpact_Mbps;
        double totalDl = traffic.embbDlImpact_Mbps + traffic.embbDlElsewhere_Mbps;
        d.impactTrafficShare = totalDl > 0.0 ? impactDl / totalDl : 0.5;
        d.seed = dropSeed;
        return d;
    }

    PowerControlConfig power_control() const { return {pcAlpha, ulTargetSnr_dB, kUePower_dBm}; }

    void validate() const {
        power_control().validate();
        acir.validate();
        urllc.validate();
        if (drops < 0) throw std::invalid_argument("drops must be >= 0");
        if (factoryEmbbTraffic_Mbps < 0.0) throw std::invalid_argument("factory traffic must be >= 0");
        if (wallPerpendicularLoss_dB < 0.0) throw std::invalid_argument("wall loss must be >= 0");
        if (wallGrazingCoefficient_dB < 0.0) throw std::invalid_argument("grazing coefficient must be >= 0");
        if (topKAggressors < 0 || topKAggressors > 16)
            throw std::invalid_argument("topKAggressors out of [0,16]");
        if (nUrllcUE < 0 || nEmbbOutdoorUE < 0) throw std::invalid_argument("UE counts must be >= 0");
        if (bandwidth_MHz <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
        if (embbEta <= 0.0 || embbEta > 1.0) throw std::invalid_argument("eta out of (0,1]");
        if (nFactoryBS != 3 && nFactoryBS != 12)
            throw std::invalid_argument("factory BS count must be 3 or 12");
        (void)macro_pattern();
        (void)factory_pattern();
    }
};

// One axis sweep of scenarios, expanded from lists of values per knob.
struct ExperimentMatrix {
    Scenario base;
    std::vector<SpectrumMode> spectrumModes;
    std::vector<SyncMode> syncModes;
    std::vector<double> factoryEmbbTraffic_Mbps;
    std::vector<double> wallLoss_dB;
    std::vector<double> ulTargetSnr_dB;
    std::vector<int> nFactoryBS;
    bool explicitlyEmpty = false; // a sweep axis was given as an empty list

    std::vector<Scenario> expand() const {
        if (explicitlyEmpty) return {};
        auto orDefault = [](auto list, auto fallback) {
            if (list.empty()) list.push_back(fallback);
            return list;
        };
        const auto spectra = orDefault(spectrumModes, base.spectrumMode);
        const auto syncs = orDefault(syncModes, base.syncMode);
        const auto traffics = orDefault(factoryEmbbTraffic_Mbps, base.factoryEmbbTraffic_Mbps);
        const auto walls = orDefault(wallLoss_dB, base.wallPerpendicularLoss_dB);
        const auto targets = orDefault(ulTargetSnr_dB, base.ulTargetSnr_dB);
        const auto nbs = orDefault(nFactoryBS, base.nFactoryBS);

        std::vector<Scenario> cells;
        for (auto sp : spectra)
            for (auto sy : syncs)
                for (auto tr : traffics)
                    for (auto w : walls)
                        for (auto t : targets)
                            for (auto n : nbs) {
                                Scenario s = base;
                                s.spectrumMode = sp;
                                s.syncMode = sy;
                                s.factoryEmbbTraffic_Mbps = tr;
                                s.wallPerpendicularLoss_dB = w;
                                s.ulTargetSnr_dB = t;
                                s.nFactoryBS = n;
                                cells.push_back(s);
                            }
        return cells;
    }
};

} // namespace coexsim
