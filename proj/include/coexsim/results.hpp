#pragma once

#include "coexsim/config.hpp"
#include "coexsim/engine.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace coexsim {

namespace results_detail {

inline std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

} // namespace results_detail

// Fixed, documented column set of the combined campaign CSV.
inline const char* campaign_csv_header() {
    return "spectrumMode,syncMode,factoryEmbb_Mbps,wallLoss_dB,targetSnr_dB,nFactoryBS,"
           "availDl_pct,availUl_pct,thrDl_Mbps,thrUl_Mbps,"
           "ciAvailDl_pct,ciAvailUl_pct,ciThrDl_Mbps,ciThrUl_Mbps";
}

inline std::string campaign_csv_row(const Scenario& sc, const AggregateResult& agg) {
    using results_detail::fmt;
    const RegionThroughput& focus = agg.throughput[static_cast<int>(agg.focusRegion)];
    std::string row;
    row += to_string(sc.spectrumMode);
    row += ',';
    row += to_string(sc.syncMode);
    row += ',' + fmt(sc.factoryEmbbTraffic_Mbps, 2);
    row += ',' + fmt(sc.wallPerpendicularLoss_dB, 2);
    row += ',' + fmt(sc.ulTargetSnr_dB, 2);
    row += ',' + std::to_string(sc.nFactoryBS);
    row += ',' + fmt(agg.availabilityDl_pct, 4);
    row += ',' + fmt(agg.availabilityUl_pct, 4);
    row += ',' + fmt(focus.meanDl_Mbps, 4);
    row += ',' + fmt(focus.meanUl_Mbps, 4);
    row += ',' + fmt(agg.ciAvailDl_pct, 4);
    row += ',' + fmt(agg.ciAvailUl_pct, 4);
    row += ',' + fmt(focus.ciDl_Mbps, 4);
    row += ',' + fmt(focus.ciUl_Mbps, 4);
    return row;
}

inline nlohmann::json aggregate_to_json(const Scenario& sc, const AggregateResult& agg) {
    nlohmann::json j;
    j["scenario"] = scenario_to_json(sc);
    j["availability"] = {
        {"dl", {{"pct", agg.availabilityDl_pct}, {"ciHalfWidth_pct", agg.ciAvailDl_pct}}},
        {"ul", {{"pct", agg.availabilityUl_pct}, {"ciHalfWidth_pct", agg.ciAvailUl_pct}}}};
    nlohmann::json thr;
    const char* names[3] = {"impactArea", "elsewhere", "inFactory"};
    for (int r = 0; r < 3; ++r) {
        const RegionThroughput& t = agg.throughput[r];
        thr[names[r]] = {{"dl_Mbps", t.meanDl_Mbps},
                         {"ul_Mbps", t.meanUl_Mbps},
                         {"ciDl_Mbps", t.ciDl_Mbps},
                         {"ciUl_Mbps", t.ciUl_Mbps},
                         {"ueCount", t.ueCount}};
    }
    j["throughput"] = thr;
    j["focusRegion"] = to_string(agg.focusRegion);
    j["meanLoads"] = {{"macroDl", agg.meanLoadMacroDl},
                      {"macroUl", agg.meanLoadMacroUl},
                      {"factoryDl", agg.meanLoadFactoryDl},
                      {"factoryUl", agg.meanLoadFactoryUl}};
    j["convergence"] = {{"allConverged", agg.allConverged},
                        {"nonConvergedDrops", agg.nonConvergedDrops}};
    j["drops"] = agg.drops;
    j["urllcEvaluations"] = agg.urllcEvaluations;
    j["tti_us"] = agg.tti_us;
    j["tti_us_rounded"] = static_cast<int>(std::lround(agg.tti_us));
    return j;
}

// Atomic file write: stage to a temp file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

// Per-drop result CSV (one row per UE).
inline std::string drop_results_csv(const DropResult& drop) {
    using results_detail::fmt;
    std::string out = "ueId,kind,region,satisfiedDl,satisfiedUl,pFailDl,pFailUl,"
                      "thrDl_Mbps,thrUl_Mbps,mcsDl,mcsUl\n";
    for (const auto& u : drop.urllc) {
        out += std::to_string(u.ueId) + ",urllc,inFactory," + std::to_string(u.satisfiedDl ? 1 : 0) +
               ',' + std::to_string(u.satisfiedUl ? 1 : 0) + ',' + fmt(u.pFailDl, 9) + ',' +
               fmt(u.pFailUl, 9) + ",,," + std::to_string(u.mcsDl) + ',' + std::to_string(u.mcsUl) +
               '\n';
    }
    for (const auto& e : drop.embb) {
        out += std::to_string(e.ueId) + ",embb," + to_string(e.region) + ",,,,," +
               fmt(e.throughputDl_bps / 1e6, 6) + ',' + fmt(e.throughputUl_bps / 1e6, 6) + ",,\n";
    }
    return out;
}

// MCS table dump for inspection.
inline std::string mcs_table_csv(const std::vector<McsEntry>& table) {
    using results_detail::fmt;
    std::string out = "modulation,codeRate,spectralEfficiency,blocklength,allocPrb,threshold_dB\n";
    for (const auto& e : table) {
        out += std::string(to_string(e.modulation)) + ',' + fmt(e.codeRate, 6) + ',' +
               fmt(e.spectralEfficiency, 6) + ',' + std::to_string(e.blocklength) + ',' +
               std::to_string(e.allocPrb) + ',' + fmt(e.sinrThreshold_dB, 4) + '\n';
    }
    return out;
}

} // namespace coexsim
