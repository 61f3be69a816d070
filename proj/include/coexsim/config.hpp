#pragma once

#include "coexsim/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace coexsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace config_detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                                const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + path + it.key() + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline SpectrumMode parse_spectrum(const std::string& s) {
    if (s == "CoChannel") return SpectrumMode::CoChannel;
    if (s == "Adjacent") return SpectrumMode::Adjacent;
    throw ConfigError("spectrumMode must be CoChannel or Adjacent, got '" + s + "'");
}

inline SyncMode parse_sync(const std::string& s) {
    if (s == "uTDD") return SyncMode::uTDD;
    if (s == "sTDD") return SyncMode::sTDD;
    throw ConfigError("syncMode must be uTDD or sTDD, got '" + s + "'");
}

inline AccessPolicy parse_access(const std::string& s) {
    if (s == "closed") return AccessPolicy::Closed;
    if (s == "open") return AccessPolicy::Open;
    throw ConfigError("accessPolicy must be closed or open, got '" + s + "'");
}

} // namespace config_detail

// Scenario block. Every key is optional: the empty object reproduces the
// baseline parameter set.
inline Scenario scenario_from_json(const nlohmann::json& j) {
    using namespace config_detail;
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");

    static const std::set<std::string> known = {
        "spectrumMode", "syncMode", "factoryEmbbTraffic_Mbps", "fc_GHz", "bandwidth_MHz",
        "carrierPrbs", "wallPerpendicularLoss_dB", "wallGrazingCoefficient_dB", "pcAlpha",
        "ulTargetSnr_dB", "nFactoryBS", "factoryDistance_m", "impactAreaSize_m", "isd_m",
        "gridTiers", "downtilt_deg", "nUrllcUE", "nEmbbOutdoorUE", "nEmbbFactoryUE", "traffic",
        "acir", "urllc", "accessPolicy", "topKAggressors", "embbEta", "embbSeCap_bpsHz",
        "processingDelay_ms", "guardSymbols", "macroPattern", "factoryPattern",
        "isolateNetworks", "drops", "seed"};
    reject_unknown_keys(j, known, "");

    Scenario s;
    if (j.contains("spectrumMode")) s.spectrumMode = parse_spectrum(j.at("spectrumMode").get<std::string>());
    if (j.contains("syncMode")) s.syncMode = parse_sync(j.at("syncMode").get<std::string>());
    if (j.contains("accessPolicy")) s.accessPolicy = parse_access(j.at("accessPolicy").get<std::string>());
    read(j, "factoryEmbbTraffic_Mbps", s.factoryEmbbTraffic_Mbps);
    read(j, "fc_GHz", s.fc_GHz);
    read(j, "bandwidth_MHz", s.bandwidth_MHz);
    read(j, "carrierPrbs", s.carrierPrbs);
    read(j, "wallPerpendicularLoss_dB", s.wallPerpendicularLoss_dB);
    read(j, "wallGrazingCoefficient_dB", s.wallGrazingCoefficient_dB);
    read(j, "pcAlpha", s.pcAlpha);
    read(j, "ulTargetSnr_dB", s.ulTargetSnr_dB);
    read(j, "nFactoryBS", s.nFactoryBS);
    read(j, "factoryDistance_m", s.factoryDistance_m);
    read(j, "impactAreaSize_m", s.impactAreaSize_m);
    read(j, "isd_m", s.isd_m);
    read(j, "gridTiers", s.gridTiers);
    read(j, "downtilt_deg", s.downtilt_deg);
    read(j, "nUrllcUE", s.nUrllcUE);
    read(j, "nEmbbOutdoorUE", s.nEmbbOutdoorUE);
    read(j, "nEmbbFactoryUE", s.nEmbbFactoryUE);
    read(j, "topKAggressors", s.topKAggressors);
    read(j, "embbEta", s.embbEta);
    read(j, "embbSeCap_bpsHz", s.embbSeCap_bpsHz);
    read(j, "processingDelay_ms", s.processingDelay_ms);
    read(j, "guardSymbols", s.guardSymbols);
    read(j, "macroPattern", s.macroPatternOverride);
    read(j, "factoryPattern", s.factoryPatternOverride);
    read(j, "isolateNetworks", s.isolateNetworks);
    read(j, "drops", s.drops);
    read(j, "seed", s.seed);

    if (j.contains("traffic")) {
        const auto& t = j.at("traffic");
        static const std::set<std::string> knownT = {"embbDlImpact_Mbps", "embbDlElsewhere_Mbps",
                                                     "embbUlImpact_Mbps", "embbUlElsewhere_Mbps",
                                                     "urllcDl_Mbps", "urllcUl_Mbps",
                                                     "factoryEmbbDlUlRatio"};
        reject_unknown_keys(t, knownT, "traffic.");
        read(t, "embbDlImpact_Mbps", s.traffic.embbDlImpact_Mbps);
        read(t, "embbDlElsewhere_Mbps", s.traffic.embbDlElsewhere_Mbps);
        read(t, "embbUlImpact_Mbps", s.traffic.embbUlImpact_Mbps);
        read(t, "embbUlElsewhere_Mbps", s.traffic.embbUlElsewhere_Mbps);
        read(t, "urllcDl_Mbps", s.traffic.urllcDl_Mbps);
        read(t, "urllcUl_Mbps", s.traffic.urllcUl_Mbps);
        read(t, "factoryEmbbDlUlRatio", s.traffic.factoryEmbbDlUlRatio);
    }
    if (j.contains("acir")) {
        const auto& a = j.at("acir");
        static const std::set<std::string> knownA = {"bsToUe_dB", "bsToBs_dB", "ueToBs_dB", "ueToUe_dB"};
        reject_unknown_keys(a, knownA, "acir.");
        read(a, "bsToUe_dB", s.acir.bsToUe_dB);
        read(a, "bsToBs_dB", s.acir.bsToBs_dB);
        read(a, "ueToBs_dB", s.acir.ueToBs_dB);
        read(a, "ueToUe_dB", s.acir.ueToUe_dB);
    }
    if (j.contains("urllc")) {
        const auto& u = j.at("urllc");
        static const std::set<std::string> knownU = {"payloadBits", "reliability", "latencyBound_ms"};
        reject_unknown_keys(u, knownU, "urllc.");
        read(u, "payloadBits", s.urllc.payloadBits);
        read(u, "reliability", s.urllc.reliability);
        read(u, "latencyBound_ms", s.urllc.latencyBound_ms);
    }

    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

// Top-level config: a scenario block plus optional sweep axes.
inline ExperimentMatrix matrix_from_json(const nlohmann::json& j) {
    using namespace config_detail;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {"scenario", "sweep"};
    reject_unknown_keys(j, known, "");

    ExperimentMatrix m;
    m.base = scenario_from_json(j.contains("scenario") ? j.at("scenario") : nlohmann::json::object());

    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        static const std::set<std::string> knownS = {"spectrumMode", "syncMode",
                                                     "factoryEmbbTraffic_Mbps", "wallLoss_dB",
                                                     "ulTargetSnr_dB", "nFactoryBS"};
        reject_unknown_keys(sw, knownS, "sweep.");
        auto markEmpty = [&](const char* key) {
            if (sw.contains(key) && sw.at(key).empty()) m.explicitlyEmpty = true;
        };
        if (sw.contains("spectrumMode"))
            for (const auto& v : sw.at("spectrumMode")) m.spectrumModes.push_back(parse_spectrum(v.get<std::string>()));
        if (sw.contains("syncMode"))
            for (const auto& v : sw.at("syncMode")) m.syncModes.push_back(parse_sync(v.get<std::string>()));
        if (sw.contains("factoryEmbbTraffic_Mbps"))
            for (const auto& v : sw.at("factoryEmbbTraffic_Mbps")) m.factoryEmbbTraffic_Mbps.push_back(v.get<double>());
        if (sw.contains("wallLoss_dB"))
            for (const auto& v : sw.at("wallLoss_dB")) m.wallLoss_dB.push_back(v.get<double>());
        if (sw.contains("ulTargetSnr_dB"))
            for (const auto& v : sw.at("ulTargetSnr_dB")) m.ulTargetSnr_dB.push_back(v.get<double>());
        if (sw.contains("nFactoryBS"))
            for (const auto& v : sw.at("nFactoryBS")) m.nFactoryBS.push_back(v.get<int>());
        for (const char* key : {"spectrumMode", "syncMode", "factoryEmbbTraffic_Mbps", "wallLoss_dB",
                                "ulTargetSnr_dB", "nFactoryBS"})
            markEmpty(key);
    }
    return m;
}

inline ExperimentMatrix load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error in ") + path + ": " + e.what());
    }
    return matrix_from_json(j);
}

// Resolved-scenario echo used by validate mode and the aggregate JSON.
inline nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    j["spectrumMode"] = to_string(s.spectrumMode);
    j["syncMode"] = to_string(s.syncMode);
    j["factoryEmbbTraffic_Mbps"] = s.factoryEmbbTraffic_Mbps;
    j["fc_GHz"] = s.fc_GHz;
    j["bandwidth_MHz"] = s.bandwidth_MHz;
    j["carrierPrbs"] = s.carrierPrbs;
    j["wallPerpendicularLoss_dB"] = s.wallPerpendicularLoss_dB;
    j["wallGrazingCoefficient_dB"] = s.wallGrazingCoefficient_dB;
    j["pcAlpha"] = s.pcAlpha;
    j["ulTargetSnr_dB"] = s.ulTargetSnr_dB;
    j["nFactoryBS"] = s.nFactoryBS;
    j["factoryDistance_m"] = s.factoryDistance_m;
    j["impactAreaSize_m"] = s.impactAreaSize_m;
    j["isd_m"] = s.isd_m;
    j["gridTiers"] = s.gridTiers;
    j["downtilt_deg"] = s.downtilt_deg;
    j["nUrllcUE"] = s.nUrllcUE;
    j["nEmbbOutdoorUE"] = s.nEmbbOutdoorUE;
    j["nEmbbFactoryUE"] = s.factory_embb_ue_count();
    j["accessPolicy"] = s.accessPolicy == AccessPolicy::Closed ? "closed" : "open";
    j["topKAggressors"] = s.topKAggressors;
    j["embbEta"] = s.embbEta;
    j["embbSeCap_bpsHz"] = s.embbSeCap_bpsHz;
    j["processingDelay_ms"] = s.processingDelay_ms;
    j["guardSymbols"] = s.guardSymbols;
    j["isolateNetworks"] = s.isolateNetworks;
    j["drops"] = s.drops;
    j["seed"] = s.seed;

    auto patternString = [](const TddPattern& p) {
        std::string out;
        for (size_t i = 0; i < p.symbols.size(); ++i) {
            if (i > 0 && i % kSymbolsPerSlot == 0) out += '|';
            out += p.symbols[i] == SymbolDir::D ? 'D' : (p.symbols[i] == SymbolDir::U ? 'U' : 'G');
        }
        return out;
    };
    j["macroPattern"] = patternString(s.macro_pattern());
    j["factoryPattern"] = patternString(s.factory_pattern());

    j["traffic"] = {{"embbDlImpact_Mbps", s.traffic.embbDlImpact_Mbps},
                    {"embbDlElsewhere_Mbps", s.traffic.embbDlElsewhere_Mbps},
                    {"embbUlImpact_Mbps", s.traffic.embbUlImpact_Mbps},
                    {"embbUlElsewhere_Mbps", s.traffic.embbUlElsewhere_Mbps},
                    {"urllcDl_Mbps", s.traffic.urllcDl_Mbps},
                    {"urllcUl_Mbps", s.traffic.urllcUl_Mbps},
                    {"factoryEmbbDlUlRatio", s.traffic.factoryEmbbDlUlRatio}};
    j["acir"] = {{"bsToUe_dB", s.acir.bsToUe_dB},
                 {"bsToBs_dB", s.acir.bsToBs_dB},
                 {"ueToBs_dB", s.acir.ueToBs_dB},
                 {"ueToUe_dB", s.acir.ueToUe_dB}};
    j["urllc"] = {{"payloadBits", s.urllc.payloadBits},
                  {"reliability", s.urllc.reliability},
                  {"latencyBound_ms", s.urllc.latencyBound_ms}};
    return j;
}

} // namespace coexsim
