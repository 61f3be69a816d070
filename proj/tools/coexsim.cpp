// coexsim: batch front end for the eMBB/URLLC co-existence simulator.
// Parses a scenario config, expands the experiment matrix (or a figure
// preset), runs the Monte Carlo campaigns and writes CSV/JSON results.

#include "coexsim/config.hpp"
#include "coexsim/engine.hpp"
#include "coexsim/results.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace coexsim;

namespace {

// Axis sweeps matching the reported experiment sets.
ExperimentMatrix figure_preset(const std::string& figure, ExperimentMatrix m) {
    m.spectrumModes.clear();
    m.syncModes.clear();
    m.factoryEmbbTraffic_Mbps.clear();
    m.wallLoss_dB.clear();
    m.ulTargetSnr_dB.clear();
    m.nFactoryBS.clear();

    if (figure == "4a" || figure == "4b") {
        m.spectrumModes = {SpectrumMode::CoChannel};
        m.syncModes = {SyncMode::uTDD, SyncMode::sTDD};
        m.factoryEmbbTraffic_Mbps = {0.0, 1.0, 10.0};
    } else if (figure == "5a" || figure == "5b") {
        m.spectrumModes = {SpectrumMode::Adjacent};
        m.syncModes = {SyncMode::uTDD, SyncMode::sTDD};
        m.factoryEmbbTraffic_Mbps = {0.0, 1.0, 10.0};
    } else if (figure == "6") {
        m.spectrumModes = {SpectrumMode::CoChannel};
        m.syncModes = {SyncMode::uTDD};
        m.factoryEmbbTraffic_Mbps = {0.0};
        for (double w = 14.0; w <= 41.0; w += 3.0) m.wallLoss_dB.push_back(w);
        m.ulTargetSnr_dB = {10.0, 20.0};
    } else if (figure == "7") {
        m.spectrumModes = {SpectrumMode::CoChannel};
        m.syncModes = {SyncMode::uTDD};
        m.factoryEmbbTraffic_Mbps = {0.0};
        m.nFactoryBS = {3, 12};
    } else {
        throw ConfigError("unknown figure preset '" + figure + "' (expected 4a,4b,5a,5b,6,7)");
    }
    return m;
}

std::string cell_name(int index, const Scenario& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "cell%03d_%s_%s_f%g_w%g_t%g_n%d", index,
                  to_string(s.spectrumMode), to_string(s.syncMode), s.factoryEmbbTraffic_Mbps,
                  s.wallPerpendicularLoss_dB, s.ulTargetSnr_dB, s.nFactoryBS);
    return buf;
}

int run_validate(const std::string& configPath) {
    try {
        const ExperimentMatrix m = configPath.empty() ? ExperimentMatrix{} : load_config_file(configPath);
        const auto cells = m.expand();
        std::cout << "valid: " << cells.size() << " scenario cell(s)\n";
        std::cout << "resolved base scenario:\n"
                  << scenario_to_json(m.base).dump(2) << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (!configPath.empty()) std::cerr << " (" << configPath << ")";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo co-existence simulator: public eMBB macro network vs "
                 "non-public URLLC factory network"};

    std::string configPath;
    std::string outDir = "results";
    std::string figure;
    int drops = -1;
    long long seed = -1;
    int parallelism = 1;
    bool dumpCouplings = false;
    bool validateOnly = false;

    app.add_option("--config", configPath, "Scenario config file (JSON)");
    app.add_option("--out", outDir, "Output directory");
    app.add_option("--figure", figure, "Experiment preset: 4a, 4b, 5a, 5b, 6 or 7");
    app.add_option("--drops", drops, "Monte Carlo drops per cell (overrides config)");
    app.add_option("--seed", seed, "Campaign seed (overrides config)");
    app.add_option("--parallelism", parallelism, "Worker threads for drops within a cell");
    app.add_flag("--dump-couplings", dumpCouplings, "Write the per-drop coupling matrix CSVs");
    app.add_flag("--validate", validateOnly, "Validate the config and print the resolved scenario");

    CLI11_PARSE(app, argc, argv);

    if (validateOnly) return run_validate(configPath);

    try {
        ExperimentMatrix matrix =
            configPath.empty() ? ExperimentMatrix{} : load_config_file(configPath);
        if (!figure.empty()) matrix = figure_preset(figure, matrix);
        if (drops >= 0) matrix.base.drops = drops;
        if (seed >= 0) matrix.base.seed = static_cast<uint64_t>(seed);

        const std::vector<Scenario> cells = matrix.expand();
        if (cells.empty()) {
            std::cerr << "no scenarios\n";
            return 2;
        }

        fs::create_directories(outDir);

        // Inspection dumps shared by all cells: deployment and MCS table.
        {
            const Deployment dep = build_deployment(matrix.base.deployment_config());
            const auto ues =
                drop_ues(dep, matrix.base.drop_config(mix_seed(matrix.base.seed, 0xd60b5u, 0)));
            std::ostringstream os;
            dump_deployment_csv(os, dep, ues);
            write_file_atomic(fs::path(outDir) / "deployment.csv", os.str());

            const auto mcsTable = build_mcs_table(matrix.base.urllc.payloadBits, kTtiSymbols,
                                                  matrix.base.urllc.max_failure_probability(),
                                                  matrix.base.carrierPrbs);
            write_file_atomic(fs::path(outDir) / "mcs_table.csv", mcs_table_csv(mcsTable));
        }

        std::string combined = std::string(campaign_csv_header()) + "\n";
        bool allConverged = true;
        std::string firstBadCell;

        for (size_t i = 0; i < cells.size(); ++i) {
            const Scenario& sc = cells[i];
            const std::string name = cell_name(static_cast<int>(i), sc);
            const CampaignResult res = run_campaign(sc, parallelism);

            write_file_atomic(fs::path(outDir) / (name + ".json"),
                              aggregate_to_json(sc, res.aggregate).dump(2) + "\n");
            combined += campaign_csv_row(sc, res.aggregate) + "\n";

            if (dumpCouplings) {
                const Deployment dep = build_deployment(sc.deployment_config());
                const auto mcsTable = build_mcs_table(sc.urllc.payloadBits, kTtiSymbols,
                                                      sc.urllc.max_failure_probability(),
                                                      sc.carrierPrbs);
                for (int d = 0; d < sc.drops; ++d) {
                    std::string csv;
                    run_drop(sc, dep, mcsTable, d, &csv);
                    write_file_atomic(fs::path(outDir) / (name + "_couplings_drop" +
                                                          std::to_string(d) + ".csv"),
                                      csv);
                }
            }

            if (!res.aggregate.allConverged) {
                allConverged = false;
                if (firstBadCell.empty()) firstBadCell = name;
            }
            std::printf("%-46s availDl %8.3f%%  availUl %8.3f%%  thrDl %8.3f Mbps%s\n", name.c_str(),
                        res.aggregate.availabilityDl_pct, res.aggregate.availabilityUl_pct,
                        res.aggregate.throughput[static_cast<int>(res.aggregate.focusRegion)].meanDl_Mbps,
                        res.aggregate.allConverged ? "" : "  [NOT CONVERGED]");
        }

        write_file_atomic(fs::path(outDir) / "campaign.csv", combined);

        if (!allConverged) {
            std::cerr << "load fixed point did not converge in cell " << firstBadCell << "\n";
            return 1;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (!configPath.empty()) std::cerr << " (" << configPath << ")";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
