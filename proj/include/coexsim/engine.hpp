#pragma once

#include "coexsim/layout.hpp"
#include "coexsim/propagation.hpp"
#include "coexsim/radio_link.hpp"
#include "coexsim/scenario.hpp"
#include "coexsim/tdd.hpp"
#include "coexsim/urllc_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

namespace coexsim {

constexpr double kSymbolsPerSecond = 1000.0 / kSlotDuration_ms * kSymbolsPerSlot;

// ---------------------------------------------------------------------------
// Generic damped load fixed point
// ---------------------------------------------------------------------------

struct LoadSolveResult {
    std::vector<double> loads;
    bool converged = false;
    int iterations = 0;
};

// Iterates rho <- (rho + min(1, raw(rho))) / 2 until the update stalls.
// `rawLoads` maps the current load vector to per-cell raw demand/capacity
// ratios (may exceed 1).
template <typename RawFn>
LoadSolveResult solve_load_fixed_point(int nCells, RawFn&& rawLoads, int maxIter = 100,
                                       double tol = 1e-4) {
    LoadSolveResult res;
    res.loads.assign(nCells, 0.0);
    for (int it = 0; it < maxIter; ++it) {
        const std::vector<double> raw = rawLoads(res.loads);
        double maxDelta = 0.0;
        for (int c = 0; c < nCells; ++c) {
            const double target = std::min(1.0, raw[c]);
            maxDelta = std::max(maxDelta, std::abs(target - res.loads[c]));
            res.loads[c] = 0.5 * (res.loads[c] + target);
        }
        res.iterations = it + 1;
        if (maxDelta < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Association
// ---------------------------------------------------------------------------

// Strongest-coupling attachment within the UE's own network (closed access).
// URLLC UEs never attach to macro cells; with open access eMBB UEs may also
// attach to factory cells. Equal gains break toward the lowest BS id.
template <typename GainFn>
std::vector<int> associate(const std::vector<Node>& ues, const std::vector<const Node*>& bss,
                           GainFn&& gain, AccessPolicy policy) {
    std::vector<int> serving(ues.size(), -1);
    for (size_t u = 0; u < ues.size(); ++u) {
        double best = -std::numeric_limits<double>::infinity();
        int bestIdx = -1;
        for (size_t b = 0; b < bss.size(); ++b) {
            const Node& bs = *bss[b];
            const bool candidate = (ues[u].role == NodeRole::UrllcUE)
                                       ? bs.network == NetworkId::Factory
                                       : (bs.network == ues[u].network ||
                                          (policy == AccessPolicy::Open && ues[u].role == NodeRole::EmbbUE));
            if (!candidate) continue;
            const double g = gain(ues[u], bs);
            if (g > best + 1e-12 || (std::abs(g - best) <= 1e-12 && (bestIdx < 0 || bs.id < bss[bestIdx]->id))) {
                best = g;
                bestIdx = static_cast<int>(b);
            }
        }
        if (bestIdx < 0) throw std::runtime_error("UE has no candidate BS");
        serving[u] = bestIdx;
    }
    return serving;
}

// ---------------------------------------------------------------------------
// Drop-level results
// ---------------------------------------------------------------------------

struct UrllcUeResult {
    uint32_t ueId = 0;
    bool satisfiedDl = false;
    bool satisfiedUl = false;
    double pFailDl = 1.0;
    double pFailUl = 1.0;
    int mcsDl = -1;
    int mcsUl = -1;
    double latencyDl_ms = 0.0;
    double latencyUl_ms = 0.0;
};

struct EmbbUeResult {
    uint32_t ueId = 0;
    Region region = Region::Elsewhere;
    double throughputDl_bps = 0.0;
    double throughputUl_bps = 0.0;
    double sinrDl_dB = 0.0;
    double sinrUl_dB = 0.0;
};

struct CellLoadResult {
    uint32_t bsId = 0;
    NetworkId network = NetworkId::Macro;
    double loadDl = 0.0;
    double loadUl = 0.0;
    double rawDl = 0.0;
    double rawUl = 0.0;
    double servedFractionDl = 1.0;
    double servedFractionUl = 1.0;
};

struct DropResult {
    std::vector<UrllcUeResult> urllc;
    std::vector<EmbbUeResult> embb;
    std::vector<CellLoadResult> cells;
    bool loadsConverged = true;
    int fixedPointIterations = 0;
};

// ---------------------------------------------------------------------------
// Snapshot evaluator
// ---------------------------------------------------------------------------

namespace engine_detail {

struct Cell {
    const Node* bs = nullptr;
    NetworkId network = NetworkId::Macro;
    std::vector<int> ueIdx; // indices into the UE vector
};

// Precomputed interference contribution of one transmitter toward one victim
// receiver. Activity is looked up per fixed-point iteration.
struct Term {
    double onRx_mw = 0.0;        // received power (after ACIR) when transmitting
    double overlap = 0.0;        // TDD overlap fraction toward the victim direction
    int cell = -1;
    int ue = -1;                 // aggressor UE index; -1 for whole-cell DL terms
    LinkDir aggDir = LinkDir::DL;
    InterferenceMode mode = InterferenceMode::BsToUe;
    uint32_t aggressorId = 0;
    bool urllcUl = false;        // aggressor power scales with its allocation
};

struct VictimContext {
    double signalBase_dBm = -300.0; // DL: full signal; UL: before concentration
    double noise_dBm = 0.0;
    std::vector<Term> terms;
};

struct PairChannel {
    double propLoss_dB = 0.0; // pathloss + wall + indoor + shadow
    LosState los = LosState::LOS;
    LinkClass linkClass = LinkClass::MacroToOutdoor;
    double pathloss_dB = 0.0;
    double wall_dB = 0.0;
    double indoor_dB = 0.0;
    double shadow_dB = 0.0;
};

class DropEvaluator {
  public:
    DropEvaluator(const Scenario& sc, const Deployment& dep, const std::vector<McsEntry>& mcsTable,
                  int dropIndex)
        : sc_(sc), dep_(dep), mcs_(mcsTable) {
        channelSeed_ = mix_seed(sc.seed, 0xc4a17u, static_cast<uint64_t>(dropIndex));
        ues_ = drop_ues(dep, sc.drop_config(mix_seed(sc.seed, 0xd60b5u, static_cast<uint64_t>(dropIndex))));
        wall_.perpendicularLoss_dB = sc.wallPerpendicularLoss_dB;
        wall_.grazingCoefficient_dB = sc.wallGrazingCoefficient_dB;

        build_cells();
        build_profiles();
        associate_ues();
        build_victim_contexts();
    }

    DropResult evaluate() {
        const int nUe = static_cast<int>(ues_.size());
        utilDl_.assign(nUe, 0.0);
        utilUl_.assign(nUe, 0.0);
        cellLoadDl_.assign(cells_.size(), 0.0);
        cellLoadUl_.assign(cells_.size(), 0.0);
        concLin_.assign(nUe, 1.0);
        mcsChoice_[0].assign(nUe, McsSelection{});
        mcsChoice_[1].assign(nUe, McsSelection{});

        DropResult result;
        result.loadsConverged = false;
        const int maxIter = 100;
        // Discrete MCS re-selection can limit-cycle; after the initial phase
        // the link adaptation is frozen so the damped load map contracts.
        const int freezeAfter = 30;
        const double tol = 1e-4;
        for (int it = 0; it < maxIter; ++it) {
            const double delta = iterate_loads(it < freezeAfter);
            result.fixedPointIterations = it + 1;
            if (delta < tol) {
                result.loadsConverged = true;
                break;
            }
        }
        finalize(result);
        return result;
    }

    const std::vector<Node>& ues() const { return ues_; }
    const std::vector<Cell>& cells() const { return cells_; }
    int serving_cell(int ue) const { return serving_[ue]; }

    // Per-pair channel components, for the coupling-matrix dump.
    const PairChannel& pair_channel(const Node& a, const Node& b) { return channel(a, b); }

    // All realized pair channels (txId, rxId, class, loss components, total
    // propagation loss), sorted by id pair.
    std::string dump_couplings_csv() const {
        std::vector<std::pair<uint64_t, const PairChannel*>> rows;
        rows.reserve(channels_.size());
        for (const auto& [key, pc] : channels_) rows.push_back({key, &pc});
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::string out = "txId,rxId,class,pathloss_dB,wall_dB,indoor_dB,shadow_dB,totalLoss_dB\n";
        char buf[256];
        for (const auto& [key, pc] : rows) {
            const uint32_t lo = static_cast<uint32_t>(key & 0xffffffffu);
            const uint32_t hi = static_cast<uint32_t>(key >> 32);
            std::snprintf(buf, sizeof(buf), "%u,%u,%s,%.4f,%.4f,%.4f,%.4f,%.4f\n", lo, hi,
                          to_string(pc->linkClass), pc->pathloss_dB, pc->wall_dB, pc->indoor_dB,
                          pc->shadow_dB, pc->propLoss_dB);
            out += buf;
        }
        return out;
    }

  private:
    // ---- construction -----------------------------------------------------

    void build_cells() {
        for (const auto& s : dep_.sites)
            for (const auto& n : s.sectors) cells_.push_back({&n, NetworkId::Macro, {}});
        for (const auto& n : dep_.factoryBSs) cells_.push_back({&n, NetworkId::Factory, {}});
        bss_.clear();
        for (auto& c : cells_) bss_.push_back(c.bs);
    }

    void build_profiles() {
        const TddPattern macro = sc_.macro_pattern();
        const TddPattern factory = sc_.factory_pattern();
        pattern_[0] = macro;
        pattern_[1] = factory;
        for (int a = 0; a < 2; ++a)
            for (int v = 0; v < 2; ++v) profile_[a][v] = overlap_profile(pattern_[a], pattern_[v]);
        for (int d = 0; d < 2; ++d) {
            duty_[0][d] = macro.duty(static_cast<LinkDir>(d));
            duty_[1][d] = factory.duty(static_cast<LinkDir>(d));
        }
    }

    static int net_idx(NetworkId n) { return n == NetworkId::Macro ? 0 : 1; }

    uint64_t pair_key(uint32_t a, uint32_t b) const {
        const uint64_t lo = std::min(a, b), hi = std::max(a, b);
        return (hi << 32) | lo;
    }

    const PairChannel& channel(const Node& a, const Node& b) {
        const uint64_t key = pair_key(a.id, b.id);
        auto it = channels_.find(key);
        if (it != channels_.end()) return it->second;

        LinkGeometry geom = link_geometry(a, b, dep_.factory.hall);
        SplitMix64 rng(mix_seed(channelSeed_, std::min(a.id, b.id), std::max(a.id, b.id)));
        const ChannelRealization ch = realize_channel(geom, rng);
        geom.losState = ch.losState;

        PairChannel pc;
        pc.los = ch.losState;
        pc.linkClass = geom.linkClass;
        pc.pathloss_dB = model_pathloss(geom, sc_.fc_GHz);
        if (a.indoor != b.indoor && (geom.linkClass == LinkClass::MacroToFactoryIndoor ||
                                     geom.linkClass == LinkClass::FactoryToOutdoor)) {
            pc.wall_dB = wall_loss(wall_, geom.grazingAngle_rad);
            pc.indoor_dB = indoor_loss(geom.dIndoor);
        }
        pc.shadow_dB = ch.shadow_dB;
        pc.propLoss_dB = pc.pathloss_dB + pc.wall_dB + pc.indoor_dB + pc.shadow_dB;
        return channels_.emplace(key, pc).first->second;
    }

    static Vec3 dir_to(const Node& from, const Node& to) { return (to.pos - from.pos).normalized(); }

    // Coupling gain with array antennas steered at the link partner.
    double serving_gain(const Node& ue, const Node& bs) {
        const double prop = channel(ue, bs).propLoss_dB;
        const Vec3 toUe = dir_to(bs, ue);
        return -prop + antenna_gain(bs.antenna, toUe, toUe);
    }

    void associate_ues() {
        serving_ = associate(ues_, bss_, [this](const Node& ue, const Node& bs) { return serving_gain(ue, bs); },
                             sc_.accessPolicy);
        for (size_t u = 0; u < ues_.size(); ++u) cells_[serving_[u]].ueIdx.push_back(static_cast<int>(u));

        const PowerControlConfig pc = sc_.power_control();
        servingGain_.resize(ues_.size());
        ulPower_.resize(ues_.size());
        for (size_t u = 0; u < ues_.size(); ++u) {
            const Node& bs = *cells_[serving_[u]].bs;
            servingGain_[u] = serving_gain(ues_[u], bs);
            const double rxNoise = noise_power_dBm(occupied_bw(), bs.noiseFigure_dB);
            ulPower_[u] = ul_tx_power_dBm(-servingGain_[u], pc, rxNoise);
        }

        demandDl_.assign(ues_.size(), 0.0);
        demandUl_.assign(ues_.size(), 0.0);
        int nImpact = 0, nElse = 0, nFactory = 0;
        for (const auto& ue : ues_) {
            if (ue.role != NodeRole::EmbbUE) continue;
            if (ue.region == Region::ImpactArea) ++nImpact;
            if (ue.region == Region::Elsewhere) ++nElse;
            if (ue.region == Region::InFactory) ++nFactory;
        }
        const TrafficConfig& t = sc_.traffic;
        const double facDl = sc_.factoryEmbbTraffic_Mbps;
        const double facUl = facDl / t.factoryEmbbDlUlRatio;
        for (size_t u = 0; u < ues_.size(); ++u) {
            const Node& ue = ues_[u];
            if (ue.role != NodeRole::EmbbUE) continue;
            switch (ue.region) {
                case Region::ImpactArea:
                    demandDl_[u] = t.embbDlImpact_Mbps / nImpact * 1e6;
                    demandUl_[u] = t.embbUlImpact_Mbps / nImpact * 1e6;
                    break;
                case Region::Elsewhere:
                    demandDl_[u] = t.embbDlElsewhere_Mbps / nElse * 1e6;
                    demandUl_[u] = t.embbUlElsewhere_Mbps / nElse * 1e6;
                    break;
                case Region::InFactory:
                    demandDl_[u] = facDl / nFactory * 1e6;
                    demandUl_[u] = facUl / nFactory * 1e6;
                    break;
            }
        }
    }

    double occupied_bw() const { return sc_.carrierPrbs * kPrbBandwidth_Hz; }

    // Receiver of a victim link: the UE for DL, the serving BS for UL.
    struct Receiver {
        const Node* node;
        Vec3 steer;     // rx array steering (macro UL reception aims at its UE)
        bool hasSteer;
    };

    Receiver victim_receiver(int u, LinkDir dir) {
        const Node& ue = ues_[u];
        const Node& bs = *cells_[serving_[u]].bs;
        if (dir == LinkDir::DL) return {&ue, {}, false};
        return {&bs, dir_to(bs, ue), true};
    }

    double rx_gain(const Receiver& rx, const Node& aggressor) {
        const Vec3 toAgg = dir_to(*rx.node, aggressor);
        if (rx.node->antenna.kind == AntennaKind::MacroArray && rx.hasSteer)
            return beam_gain(rx.node->antenna, rx.steer, toAgg);
        return element_gain(rx.node->antenna, toAgg);
    }

    void build_victim_contexts() {
        const int nUe = static_cast<int>(ues_.size());
        victims_.assign(static_cast<size_t>(nUe) * 2, VictimContext{});
        for (int u = 0; u < nUe; ++u)
            for (int d = 0; d < 2; ++d) build_context(u, static_cast<LinkDir>(d));
    }

    void build_context(int u, LinkDir dir) {
        VictimContext& ctx = victims_[static_cast<size_t>(u) * 2 + static_cast<int>(dir)];
        const Node& ue = ues_[u];
        const int servingCell = serving_[u];
        const Receiver rx = victim_receiver(u, dir);
        const int vicNet = net_idx(ue.network);

        ctx.noise_dBm = noise_power_dBm(occupied_bw(), rx.node->noiseFigure_dB);
        ctx.signalBase_dBm = (dir == LinkDir::DL)
                                 ? cells_[servingCell].bs->maxTxPower_dBm + servingGain_[u]
                                 : ulPower_[u] + servingGain_[u];

        for (size_t c = 0; c < cells_.size(); ++c) {
            if (static_cast<int>(c) == servingCell) continue;
            const Cell& cell = cells_[c];
            const int aggNet = net_idx(cell.network);
            const bool interNetwork = aggNet != vicNet;
            if (interNetwork && sc_.isolateNetworks) continue;

            // DL aggressor: the cell's base station.
            {
                const double ovl = profile_[aggNet][vicNet].at(LinkDir::DL, dir).value();
                if (ovl > 0.0) {
                    const InterferenceMode mode = interference_mode(LinkDir::DL, dir);
                    const double atten =
                        interNetwork ? channel_attenuation(sc_.spectrumMode, mode, sc_.acir) : 0.0;
                    const double prop = channel(*cell.bs, *rx.node).propLoss_dB;
                    const double rxG = rx_gain(rx, *cell.bs);
                    if (cell.bs->antenna.kind == AntennaKind::MacroArray) {
                        // Beamformed: one term per served UE, beam at that UE.
                        const Vec3 toVictim = dir_to(*cell.bs, *rx.node);
                        for (int tgt : cell.ueIdx) {
                            const Vec3 toTgt = dir_to(*cell.bs, ues_[tgt]);
                            const double txG = beam_gain(cell.bs->antenna, toTgt, toVictim);
                            Term t;
                            t.onRx_mw = dbm_to_mw(cell.bs->maxTxPower_dBm - prop + txG + rxG - atten);
                            t.overlap = ovl;
                            t.cell = static_cast<int>(c);
                            t.ue = tgt;
                            t.aggDir = LinkDir::DL;
                            t.mode = mode;
                            t.aggressorId = cell.bs->id;
                            ctx.terms.push_back(t);
                        }
                    } else {
                        const double txG = element_gain(cell.bs->antenna, dir_to(*cell.bs, *rx.node));
                        Term t;
                        t.onRx_mw = dbm_to_mw(cell.bs->maxTxPower_dBm - prop + txG + rxG - atten);
                        t.overlap = ovl;
                        t.cell = static_cast<int>(c);
                        t.ue = -1;
                        t.aggDir = LinkDir::DL;
                        t.mode = mode;
                        t.aggressorId = cell.bs->id;
                        ctx.terms.push_back(t);
                    }
                }
            }

            // UL aggressors: the cell's attached UEs.
            {
                const double ovl = profile_[aggNet][vicNet].at(LinkDir::UL, dir).value();
                if (ovl > 0.0) {
                    const InterferenceMode mode = interference_mode(LinkDir::UL, dir);
                    const double atten =
                        interNetwork ? channel_attenuation(sc_.spectrumMode, mode, sc_.acir) : 0.0;
                    for (int a : cell.ueIdx) {
                        if (a == u) continue;
                        const Node& agg = ues_[a];
                        const double prop = channel(agg, *rx.node).propLoss_dB;
                        const double rxG = rx_gain(rx, agg);
                        Term t;
                        t.onRx_mw = dbm_to_mw(ulPower_[a] - prop + rxG - atten);
                        t.overlap = ovl;
                        t.cell = static_cast<int>(c);
                        t.ue = a;
                        t.aggDir = LinkDir::UL;
                        t.mode = mode;
                        t.aggressorId = agg.id;
                        t.urllcUl = agg.role == NodeRole::UrllcUE;
                        ctx.terms.push_back(t);
                    }
                }
            }
        }
    }

    // ---- fixed-point iteration ---------------------------------------------

    double term_activity(const Term& t) const {
        if (t.aggDir == LinkDir::DL) return t.ue < 0 ? cellLoadDl_[t.cell] : utilDl_[t.ue];
        return utilUl_[t.ue];
    }

    double term_on_mw(const Term& t) const {
        return t.urllcUl ? t.onRx_mw * concLin_[t.ue] : t.onRx_mw;
    }

    double mean_interference_mw(const VictimContext& ctx) const {
        double sum = 0.0;
        for (const Term& t : ctx.terms) sum += term_activity(t) * t.overlap * term_on_mw(t);
        return sum;
    }

    double embb_sinr_dB(int u, LinkDir dir) const {
        const VictimContext& ctx = victims_[static_cast<size_t>(u) * 2 + static_cast<int>(dir)];
        const double denom = dbm_to_mw(ctx.noise_dBm) + mean_interference_mw(ctx);
        return ctx.signalBase_dBm - mw_to_dbm(denom);
    }

    InterferenceEnumeration build_enumeration(const VictimContext& ctx) const {
        InterferenceEnumeration en;
        std::vector<AggressorTerm> all;
        all.reserve(ctx.terms.size());
        for (const Term& t : ctx.terms) {
            AggressorTerm a;
            a.aggressorId = t.aggressorId;
            a.mode = t.mode;
            a.rxPower_dBm = mw_to_dbm(term_on_mw(t) + 1e-300);
            a.activity = term_activity(t);
            a.overlap = t.overlap;
            a.attenuation_dB = 0.0; // already folded into the received power
            a.wideband = !t.urllcUl; // URLLC bursts occupy a sub-band allocation
            all.push_back(a);
        }
        return enumerate_interference(std::move(all), sc_.topKAggressors);
    }

    McsSelection urllc_select(int u, LinkDir dir, const InterferenceEnumeration& en) const {
        const VictimContext& ctx = victims_[static_cast<size_t>(u) * 2 + static_cast<int>(dir)];
        const double target = sc_.urllc.max_failure_probability();
        if (dir == LinkDir::DL) {
            return select_mcs(mcs_, [&](int) { return ctx.signalBase_dBm; }, ctx.noise_dBm, en, target);
        }
        // Uplink concentrates the power-controlled budget in its allocation.
        return select_mcs(mcs_,
                          [&](int i) {
                              return ctx.signalBase_dBm +
                                     10.0 * std::log10(static_cast<double>(sc_.carrierPrbs) / mcs_[i].allocPrb);
                          },
                          ctx.noise_dBm, en, target);
    }

    // Raw resource demand of UE u in direction dir at the current interference
    // state. Re-selects and records the URLLC MCS choice unless frozen.
    double raw_load(int u, LinkDir dir, bool reselectMcs) {
        const Node& ue = ues_[u];
        const int d = static_cast<int>(dir);
        const int net = net_idx(ue.network);
        const double duty = duty_[net][d];
        if (ue.role == NodeRole::EmbbUE) {
            const double demand = dir == LinkDir::DL ? demandDl_[u] : demandUl_[u];
            if (demand <= 0.0) return 0.0;
            if (duty <= 0.0) return 1e9;
            const double rate = embb_rate_bps(embb_sinr_dB(u, dir), occupied_bw(), sc_.embbEta,
                                              sc_.embbSeCap_bpsHz);
            return std::min(demand / std::max(rate * duty, 1e-9), 1e9);
        }

        // URLLC: dedicated one-TTI allocation per packet.
        const double traffic = dir == LinkDir::DL ? sc_.traffic.urllcDl_Mbps : sc_.traffic.urllcUl_Mbps;
        if (traffic <= 0.0 || sc_.nUrllcUE == 0) {
            mcsChoice_[d][u] = {-1, 0.0};
            return 0.0;
        }
        if (reselectMcs) {
            const VictimContext& ctx = victims_[static_cast<size_t>(u) * 2 + d];
            const InterferenceEnumeration en = build_enumeration(ctx);
            mcsChoice_[d][u] = urllc_select(u, dir, en);
        }
        const McsSelection sel = mcsChoice_[d][u];
        if (sel.mcsIndex < 0) return 1e9;
        if (duty <= 0.0) return 1e9;
        const double packetsPerSec = traffic * 1e6 / sc_.nUrllcUE / sc_.urllc.payloadBits;
        const double prbSymbolsPerSec = sc_.carrierPrbs * kSymbolsPerSecond * duty;
        return std::min(packetsPerSec * mcs_[sel.mcsIndex].allocPrb * kTtiSymbols / prbSymbolsPerSec, 1e9);
    }

    // Capacity-capped fair allocation: each UE gets min(its raw demand, an
    // equal share of what remains), so a saturated cell lands exactly at 1.
    static void water_fill(const std::vector<std::pair<double, int>>& raws, std::vector<double>& share) {
        double total = 0.0;
        for (const auto& [r, idx] : raws) total += r;
        if (total <= 1.0) {
            for (const auto& [r, idx] : raws) share[idx] = r;
            return;
        }
        std::vector<std::pair<double, int>> sorted = raws;
        std::sort(sorted.begin(), sorted.end());
        double remaining = 1.0;
        for (size_t i = 0; i < sorted.size(); ++i) {
            const double fair = remaining / static_cast<double>(sorted.size() - i);
            const double give = std::min(sorted[i].first, fair);
            share[sorted[i].second] = give;
            remaining -= give;
        }
    }

    double iterate_loads(bool reselectMcs) {
        const int nUe = static_cast<int>(ues_.size());
        std::vector<double> rawDl(nUe, 0.0), rawUl(nUe, 0.0);
        for (int u = 0; u < nUe; ++u) {
            rawDl[u] = raw_load(u, LinkDir::DL, reselectMcs);
            rawUl[u] = raw_load(u, LinkDir::UL, reselectMcs);
        }

        std::vector<double> newUtilDl(nUe, 0.0), newUtilUl(nUe, 0.0);
        cellRawDl_.assign(cells_.size(), 0.0);
        cellRawUl_.assign(cells_.size(), 0.0);
        for (size_t c = 0; c < cells_.size(); ++c) {
            std::vector<std::pair<double, int>> rdl, rul;
            for (int u : cells_[c].ueIdx) {
                cellRawDl_[c] += rawDl[u];
                cellRawUl_[c] += rawUl[u];
                if (rawDl[u] > 0.0) rdl.push_back({rawDl[u], u});
                if (rawUl[u] > 0.0) rul.push_back({rawUl[u], u});
            }
            water_fill(rdl, newUtilDl);
            water_fill(rul, newUtilUl);
        }

        // Damped update; cell loads follow as sums of the per-UE occupancies.
        double maxDelta = 0.0;
        for (int u = 0; u < nUe; ++u) {
            utilDl_[u] = 0.5 * (utilDl_[u] + newUtilDl[u]);
            utilUl_[u] = 0.5 * (utilUl_[u] + newUtilUl[u]);
        }
        for (size_t c = 0; c < cells_.size(); ++c) {
            double dl = 0.0, ul = 0.0;
            for (int u : cells_[c].ueIdx) {
                dl += utilDl_[u];
                ul += utilUl_[u];
            }
            maxDelta = std::max(maxDelta, std::abs(dl - cellLoadDl_[c]));
            maxDelta = std::max(maxDelta, std::abs(ul - cellLoadUl_[c]));
            cellLoadDl_[c] = dl;
            cellLoadUl_[c] = ul;
        }

        for (int u = 0; u < nUe; ++u) {
            if (ues_[u].role != NodeRole::UrllcUE) continue;
            const McsSelection sel = mcsChoice_[1][u];
            concLin_[u] = sel.mcsIndex >= 0
                              ? static_cast<double>(sc_.carrierPrbs) / mcs_[sel.mcsIndex].allocPrb
                              : 1.0;
        }
        return maxDelta;
    }

    // ---- final evaluation ---------------------------------------------------

    void finalize(DropResult& result) {
        // Final pass at the converged loads with a fresh MCS selection, so the
        // reported choice is the best one for the settled interference state.
        const int nUe = static_cast<int>(ues_.size());
        std::vector<double> rawDl(nUe, 0.0), rawUl(nUe, 0.0);
        for (int u = 0; u < nUe; ++u) {
            rawDl[u] = raw_load(u, LinkDir::DL, true);
            rawUl[u] = raw_load(u, LinkDir::UL, true);
        }
        cellRawDl_.assign(cells_.size(), 0.0);
        cellRawUl_.assign(cells_.size(), 0.0);
        std::vector<int> activeDl(cells_.size(), 0), activeUl(cells_.size(), 0);
        for (size_t c = 0; c < cells_.size(); ++c) {
            for (int u : cells_[c].ueIdx) {
                cellRawDl_[c] += rawDl[u];
                cellRawUl_[c] += rawUl[u];
                if (rawDl[u] > 0.0) ++activeDl[c];
                if (rawUl[u] > 0.0) ++activeUl[c];
            }
        }

        const double symbol_ms = kSymbolDuration_ms;
        const TddPattern facPattern = pattern_[1];
        double latency_ms[2] = {0.0, 0.0};
        bool latencyComputable[2] = {true, true};
        for (int d = 0; d < 2; ++d) {
            try {
                const int wait =
                    worst_case_alignment_wait_symbols(facPattern, static_cast<LinkDir>(d), kTtiSymbols);
                latency_ms[d] = (wait + kTtiSymbols) * symbol_ms + sc_.processingDelay_ms;
            } catch (const std::invalid_argument&) {
                latencyComputable[d] = false;
            }
        }

        for (int u = 0; u < nUe; ++u) {
            const Node& ue = ues_[u];
            const int c = serving_[u];
            if (ue.role == NodeRole::UrllcUE) {
                UrllcUeResult r;
                r.ueId = ue.id;
                for (int d = 0; d < 2; ++d) {
                    const McsSelection sel = mcsChoice_[d][u];
                    UeDirectionEval ev;
                    ev.pFail = sel.mcsIndex >= 0 ? sel.pFail : 1.0;
                    ev.latency_ms = latencyComputable[d] ? latency_ms[d]
                                                         : std::numeric_limits<double>::infinity();
                    const double cellRaw = d == 0 ? cellRawDl_[c] : cellRawUl_[c];
                    ev.cellFeasible = cellRaw <= 1.0 + 1e-9;
                    const bool ok = satisfied(ev, sc_.urllc);
                    if (d == 0) {
                        r.satisfiedDl = ok;
                        r.pFailDl = ev.pFail;
                        r.mcsDl = sel.mcsIndex;
                        r.latencyDl_ms = ev.latency_ms;
                    } else {
                        r.satisfiedUl = ok;
                        r.pFailUl = ev.pFail;
                        r.mcsUl = sel.mcsIndex;
                        r.latencyUl_ms = ev.latency_ms;
                    }
                }
                result.urllc.push_back(r);
            } else {
                EmbbUeResult r;
                r.ueId = ue.id;
                r.region = ue.region;
                r.sinrDl_dB = embb_sinr_dB(u, LinkDir::DL);
                r.sinrUl_dB = embb_sinr_dB(u, LinkDir::UL);
                const int net = net_idx(ue.network);
                for (int d = 0; d < 2; ++d) {
                    const double demand = d == 0 ? demandDl_[u] : demandUl_[u];
                    if (demand <= 0.0) continue;
                    const double duty = duty_[net][d];
                    const double rate = embb_rate_bps(d == 0 ? r.sinrDl_dB : r.sinrUl_dB, occupied_bw(),
                                                      sc_.embbEta, sc_.embbSeCap_bpsHz);
                    const double cellRaw = d == 0 ? cellRawDl_[c] : cellRawUl_[c];
                    const int nActive = d == 0 ? activeDl[c] : activeUl[c];
                    const double thr = cellRaw <= 1.0 ? demand
                                                       : std::min(demand, rate * duty / std::max(nActive, 1));
                    if (d == 0) r.throughputDl_bps = thr; else r.throughputUl_bps = thr;
                }
                result.embb.push_back(r);
            }
        }

        for (size_t c = 0; c < cells_.size(); ++c) {
            CellLoadResult cl;
            cl.bsId = cells_[c].bs->id;
            cl.network = cells_[c].network;
            cl.loadDl = cellLoadDl_[c];
            cl.loadUl = cellLoadUl_[c];
            cl.rawDl = cellRawDl_[c];
            cl.rawUl = cellRawUl_[c];
            cl.servedFractionDl = cellRawDl_[c] > 1.0 ? 1.0 / cellRawDl_[c] : 1.0;
            cl.servedFractionUl = cellRawUl_[c] > 1.0 ? 1.0 / cellRawUl_[c] : 1.0;
            result.cells.push_back(cl);
        }
    }

    const Scenario& sc_;
    const Deployment& dep_;
    const std::vector<McsEntry>& mcs_;
    uint64_t channelSeed_ = 0;
    WallSpec wall_;

    std::vector<Node> ues_;
    std::vector<Cell> cells_;
    std::vector<const Node*> bss_;
    std::vector<int> serving_;
    std::vector<double> servingGain_;
    std::vector<double> ulPower_;
    std::vector<double> demandDl_, demandUl_;

    TddPattern pattern_[2];          // [macro, factory]
    OverlapProfile profile_[2][2];   // [aggressor net][victim net]
    double duty_[2][2] = {{0, 0}, {0, 0}};

    std::unordered_map<uint64_t, PairChannel> channels_;
    std::vector<VictimContext> victims_;

    std::vector<double> utilDl_, utilUl_;
    std::vector<double> cellLoadDl_, cellLoadUl_;
    std::vector<double> cellRawDl_, cellRawUl_;
    std::vector<double> concLin_;
    std::vector<McsSelection> mcsChoice_[2];
};

} // namespace engine_detail

// ---------------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------------

struct RegionThroughput {
    double meanDl_Mbps = 0.0;
    double meanUl_Mbps = 0.0;
    double ciDl_Mbps = 0.0;
    double ciUl_Mbps = 0.0;
    int ueCount = 0;
};

struct AggregateResult {
    double availabilityDl_pct = 0.0;
    double availabilityUl_pct = 0.0;
    double ciAvailDl_pct = 0.0;
    double ciAvailUl_pct = 0.0;
    RegionThroughput throughput[3]; // indexed by Region
    Region focusRegion = Region::ImpactArea;
    double meanLoadMacroDl = 0.0, meanLoadMacroUl = 0.0;
    double meanLoadFactoryDl = 0.0, meanLoadFactoryUl = 0.0;
    bool allConverged = true;
    int nonConvergedDrops = 0;
    int drops = 0;
    int urllcEvaluations = 0;
    double tti_us = kTtiSymbols * kSymbolDuration_ms * 1000.0;
};

inline DropResult run_drop(const Scenario& sc, const Deployment& dep,
                           const std::vector<McsEntry>& mcsTable, int dropIndex,
                           std::string* couplingCsv = nullptr) {
    engine_detail::DropEvaluator ev(sc, dep, mcsTable, dropIndex);
    DropResult res = ev.evaluate();
    if (couplingCsv) *couplingCsv = ev.dump_couplings_csv();
    return res;
}

namespace engine_detail {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// 95% normal confidence half-width over per-drop statistics.
inline double ci_half_width(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= static_cast<double>(v.size() - 1);
    return 1.96 * std::sqrt(var / static_cast<double>(v.size()));
}

} // namespace engine_detail

inline AggregateResult aggregate_results(const Scenario& sc, const std::vector<DropResult>& drops) {
    AggregateResult agg;
    agg.drops = static_cast<int>(drops.size());
    agg.focusRegion = sc.factory_embb_ue_count() > 0 ? Region::InFactory : Region::ImpactArea;

    long satDl = 0, satUl = 0, totalUrllc = 0;
    std::vector<double> perDropAvailDl, perDropAvailUl;
    std::vector<double> perDropThrDl[3], perDropThrUl[3];
    std::vector<double> loadsMacroDl, loadsMacroUl, loadsFacDl, loadsFacUl;

    for (const auto& d : drops) {
        if (!d.loadsConverged) {
            agg.allConverged = false;
            ++agg.nonConvergedDrops;
        }
        long sd = 0, su = 0;
        for (const auto& u : d.urllc) {
            ++totalUrllc;
            if (u.satisfiedDl) { ++satDl; ++sd; }
            if (u.satisfiedUl) { ++satUl; ++su; }
        }
        if (!d.urllc.empty()) {
            perDropAvailDl.push_back(100.0 * sd / static_cast<double>(d.urllc.size()));
            perDropAvailUl.push_back(100.0 * su / static_cast<double>(d.urllc.size()));
        }

        double sumDl[3] = {0, 0, 0}, sumUl[3] = {0, 0, 0};
        int cnt[3] = {0, 0, 0};
        for (const auto& e : d.embb) {
            const int r = static_cast<int>(e.region);
            sumDl[r] += e.throughputDl_bps;
            sumUl[r] += e.throughputUl_bps;
            ++cnt[r];
        }
        for (int r = 0; r < 3; ++r) {
            if (cnt[r] == 0) continue;
            perDropThrDl[r].push_back(sumDl[r] / cnt[r] / 1e6);
            perDropThrUl[r].push_back(sumUl[r] / cnt[r] / 1e6);
            agg.throughput[r].ueCount += cnt[r];
        }

        double mdl = 0, mul = 0, fdl = 0, ful = 0;
        int nm = 0, nf = 0;
        for (const auto& c : d.cells) {
            if (c.network == NetworkId::Macro) { mdl += c.loadDl; mul += c.loadUl; ++nm; }
            else { fdl += c.loadDl; ful += c.loadUl; ++nf; }
        }
        if (nm > 0) { loadsMacroDl.push_back(mdl / nm); loadsMacroUl.push_back(mul / nm); }
        if (nf > 0) { loadsFacDl.push_back(fdl / nf); loadsFacUl.push_back(ful / nf); }
    }

    agg.urllcEvaluations = static_cast<int>(totalUrllc);
    if (totalUrllc > 0) {
        agg.availabilityDl_pct = 100.0 * satDl / static_cast<double>(totalUrllc);
        agg.availabilityUl_pct = 100.0 * satUl / static_cast<double>(totalUrllc);
    }
    agg.ciAvailDl_pct = engine_detail::ci_half_width(perDropAvailDl);
    agg.ciAvailUl_pct = engine_detail::ci_half_width(perDropAvailUl);
    for (int r = 0; r < 3; ++r) {
        agg.throughput[r].meanDl_Mbps = engine_detail::mean(perDropThrDl[r]);
        agg.throughput[r].meanUl_Mbps = engine_detail::mean(perDropThrUl[r]);
        agg.throughput[r].ciDl_Mbps = engine_detail::ci_half_width(perDropThrDl[r]);
        agg.throughput[r].ciUl_Mbps = engine_detail::ci_half_width(perDropThrUl[r]);
    }
    agg.meanLoadMacroDl = engine_detail::mean(loadsMacroDl);
    agg.meanLoadMacroUl = engine_detail::mean(loadsMacroUl);
    agg.meanLoadFactoryDl = engine_detail::mean(loadsFacDl);
    agg.meanLoadFactoryUl = engine_detail::mean(loadsFacUl);
    return agg;
}

struct CampaignResult {
    AggregateResult aggregate;
    std::vector<DropResult> drops;
};

// Monte Carlo campaign: independent drops with per-drop substreams, safe to
// run concurrently; results are identical for any parallelism level.
inline CampaignResult run_campaign(const Scenario& sc, int parallelism = 1) {
    sc.validate();
    if (sc.drops <= 0) throw std::invalid_argument("empty campaign: drops must be > 0");

    const Deployment dep = build_deployment(sc.deployment_config());
    const std::vector<McsEntry> mcsTable =
        build_mcs_table(sc.urllc.payloadBits, kTtiSymbols, sc.urllc.max_failure_probability(),
                        sc.carrierPrbs);
    if (mcsTable.empty()) throw std::runtime_error("no feasible MCS for the configured carrier");

    CampaignResult result;
    result.drops.resize(sc.drops);
    const int nThreads = std::max(1, std::min(parallelism, sc.drops));
    if (nThreads == 1) {
        for (int i = 0; i < sc.drops; ++i) result.drops[i] = run_drop(sc, dep, mcsTable, i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nThreads);
        for (int t = 0; t < nThreads; ++t) {
            pool.emplace_back([&]() {
                for (int i = next.fetch_add(1); i < sc.drops; i = next.fetch_add(1))
                    result.drops[i] = run_drop(sc, dep, mcsTable, i);
            });
        }
        for (auto& th : pool) th.join();
    }
    result.aggregate = aggregate_results(sc, result.drops);
    return result;
}

} // namespace coexsim
