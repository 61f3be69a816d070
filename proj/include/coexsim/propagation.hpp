#pragma once

#include "coexsim/antenna.hpp"
#include "coexsim/geometry.hpp"
#include "coexsim/layout.hpp"
#include "coexsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace coexsim {

enum class LosState : uint8_t { LOS, NLOS };

// Which propagation composition a link uses.
enum class LinkClass : uint8_t {
    MacroToOutdoor,      // UMa
    FactoryInternal,     // InH, both ends inside the hall
    MacroToFactoryIndoor,// UMa + wall + indoor
    FactoryToOutdoor     // UMi + wall + indoor
};

inline const char* to_string(LinkClass c) {
    switch (c) {
        case LinkClass::MacroToOutdoor: return "MacroToOutdoor";
        case LinkClass::FactoryInternal: return "FactoryInternal";
        case LinkClass::MacroToFactoryIndoor: return "MacroToFactoryIndoor";
        case LinkClass::FactoryToOutdoor: return "FactoryToOutdoor";
    }
    return "?";
}

// Total classification: any (role, network, indoor) pair maps to exactly one
// class. A macro BS paired with any indoor node is an O2I macro link (the
// indoor node may itself be a factory BS); links without a macro BS and with
// one indoor end are factory-to-outdoor; indoor-indoor is hall-internal.
inline LinkClass classify_link(const Node& a, const Node& b) {
    if (a.indoor && b.indoor) return LinkClass::FactoryInternal;
    const bool macroBs = (a.role == NodeRole::MacroBS) || (b.role == NodeRole::MacroBS);
    if (macroBs) return (a.indoor || b.indoor) ? LinkClass::MacroToFactoryIndoor : LinkClass::MacroToOutdoor;
    return LinkClass::FactoryToOutdoor;
}

struct LinkGeometry {
    double d2D = 0.0;
    double d3D = 0.0;
    double txHeight = 0.0;
    double rxHeight = 0.0;
    double grazingAngle_rad = kPi / 2.0; // angle between ray and wall plane
    double dIndoor = 0.0;                // indoor distance beyond the wall
    LosState losState = LosState::LOS;
    LinkClass linkClass = LinkClass::MacroToOutdoor;
    double outdoorD2D = 0.0;             // outdoor segment, used for the LOS law
};

struct WallSpec {
    double perpendicularLoss_dB = 14.0;
    double grazingCoefficient_dB = 20.0;

    void validate() const {
        if (perpendicularLoss_dB < 0.0) throw std::invalid_argument("wall loss must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// TR 38.901 Table 7.4.1-1 coefficient sets (fc in GHz, distances in meters).
// Distances below the tables' applicability range are clamped, not rejected.
// ---------------------------------------------------------------------------

namespace pathloss_detail {

constexpr double kSpeedOfLight = 3.0e8;
constexpr double kEnvHeight_m = 1.0; // effective environment height for UEs below 13 m

inline void check_finite(const LinkGeometry& g) {
    if (!std::isfinite(g.d2D) || !std::isfinite(g.d3D) || !std::isfinite(g.txHeight) ||
        !std::isfinite(g.rxHeight))
        throw std::invalid_argument("non-finite link geometry");
}

inline double breakpoint_distance(double hBs, double hUt, double fc_GHz) {
    const double hb = std::max(hBs - kEnvHeight_m, 0.05);
    const double hu = std::max(hUt - kEnvHeight_m, 0.05);
    return 4.0 * hb * hu * fc_GHz * 1e9 / kSpeedOfLight;
}

inline void split_heights(const LinkGeometry& g, double& hBs, double& hUt) {
    hBs = std::max(g.txHeight, g.rxHeight);
    hUt = std::min(g.txHeight, g.rxHeight);
}

} // namespace pathloss_detail

// Urban Macro. LOS below the breakpoint: 28.0 + 22 log10(d3D) + 20 log10(fc).
inline double uma_pathloss(const LinkGeometry& geom, double fc_GHz) {
    pathloss_detail::check_finite(geom);
    double hBs, hUt;
    pathloss_detail::split_heights(geom, hBs, hUt);
    const double d3 = std::max(geom.d3D, 10.0);
    const double d2 = std::max(geom.d2D, 10.0);
    const double dbp = pathloss_detail::breakpoint_distance(hBs, hUt, fc_GHz);

    double plLos;
    if (d2 <= dbp) {
        plLos = 28.0 + 22.0 * std::log10(d3) + 20.0 * std::log10(fc_GHz);
    } else {
        plLos = 28.0 + 40.0 * std::log10(d3) + 20.0 * std::log10(fc_GHz) -
                9.0 * std::log10(dbp * dbp + (hBs - hUt) * (hBs - hUt));
    }
    if (geom.losState == LosState::LOS) return plLos;

    const double hUtEff = std::max(hUt, 1.5);
    const double plNlos =
        13.54 + 39.08 * std::log10(d3) + 20.0 * std::log10(fc_GHz) - 0.6 * (hUtEff - 1.5);
    return std::max(plLos, plNlos);
}

// Urban Micro (street canyon).
inline double umi_pathloss(const LinkGeometry& geom, double fc_GHz) {
    pathloss_detail::check_finite(geom);
    double hBs, hUt;
    pathloss_detail::split_heights(geom, hBs, hUt);
    const double d3 = std::max(geom.d3D, 10.0);
    const double d2 = std::max(geom.d2D, 10.0);
    const double dbp = pathloss_detail::breakpoint_distance(hBs, hUt, fc_GHz);

    double plLos;
    if (d2 <= dbp) {
        plLos = 32.4 + 21.0 * std::log10(d3) + 20.0 * std::log10(fc_GHz);
    } else {
        plLos = 32.4 + 40.0 * std::log10(d3) + 20.0 * std::log10(fc_GHz) -
                9.5 * std::log10(dbp * dbp + (hBs - hUt) * (hBs - hUt));
    }
    if (geom.losState == LosState::LOS) return plLos;

    const double hUtEff = std::max(hUt, 1.5);
    const double plNlos =
        22.4 + 35.3 * std::log10(d3) + 21.3 * std::log10(fc_GHz) - 0.3 * (hUtEff - 1.5);
    return std::max(plLos, plNlos);
}

// Indoor Hotspot; serves every link internal to the factory hall.
inline double inh_pathloss(const LinkGeometry& geom, double fc_GHz) {
    pathloss_detail::check_finite(geom);
    const double d3 = std::max(geom.d3D, 1.0);
    const double plLos = 32.4 + 17.3 * std::log10(d3) + 20.0 * std::log10(fc_GHz);
    if (geom.losState == LosState::LOS) return plLos;
    const double plNlos = 17.3 + 38.3 * std::log10(d3) + 24.9 * std::log10(fc_GHz);
    return std::max(plLos, plNlos);
}

inline double model_pathloss(const LinkGeometry& geom, double fc_GHz) {
    switch (geom.linkClass) {
        case LinkClass::MacroToOutdoor:
        case LinkClass::MacroToFactoryIndoor: return uma_pathloss(geom, fc_GHz);
        case LinkClass::FactoryInternal: return inh_pathloss(geom, fc_GHz);
        case LinkClass::FactoryToOutdoor: return umi_pathloss(geom, fc_GHz);
    }
    throw std::invalid_argument("unknown link class");
}

// Distance law of the model family serving the link class. For O2I links the
// caller passes the outdoor-segment d2D.
inline double los_probability(LinkClass linkClass, double d2D) {
    if (d2D < 0.0) throw std::invalid_argument("d2D must be >= 0");
    switch (linkClass) {
        case LinkClass::MacroToOutdoor:
        case LinkClass::MacroToFactoryIndoor: {
            if (d2D <= 18.0) return 1.0;
            return 18.0 / d2D + std::exp(-d2D / 63.0) * (1.0 - 18.0 / d2D);
        }
        case LinkClass::FactoryToOutdoor: {
            if (d2D <= 18.0) return 1.0;
            return 18.0 / d2D + std::exp(-d2D / 36.0) * (1.0 - 18.0 / d2D);
        }
        case LinkClass::FactoryInternal: {
            // Open-office law, matching the large open hall.
            if (d2D <= 5.0) return 1.0;
            if (d2D <= 49.0) return std::exp(-(d2D - 5.0) / 70.8);
            return 0.54 * std::exp(-(d2D - 49.0) / 211.7);
        }
    }
    throw std::invalid_argument("unknown link class");
}

inline double shadow_sigma_dB(LinkClass linkClass, LosState los) {
    switch (linkClass) {
        case LinkClass::MacroToOutdoor:
        case LinkClass::MacroToFactoryIndoor: return los == LosState::LOS ? 4.0 : 6.0;
        case LinkClass::FactoryToOutdoor: return los == LosState::LOS ? 4.0 : 7.82;
        case LinkClass::FactoryInternal: return los == LosState::LOS ? 3.0 : 8.03;
    }
    throw std::invalid_argument("unknown link class");
}

// Zero-mean lognormal shadow fading, deterministic per rng substream.
inline double sample_shadow(LinkClass linkClass, LosState los, SplitMix64& rng) {
    return shadow_sigma_dB(linkClass, los) * rng.next_normal();
}

// Constant perpendicular penetration loss plus a grazing-angle-dependent
// extra term: L(theta) = Lperp + coeff * (1 - sin theta)^2. Equals Lperp at
// perpendicular incidence and is non-increasing in the grazing angle.
inline double wall_loss(const WallSpec& wall, double grazingAngle_rad) {
    if (grazingAngle_rad < 0.0 || grazingAngle_rad > kPi / 2.0 + 1e-12)
        throw std::invalid_argument("grazing angle out of [0, pi/2]");
    const double s = 1.0 - std::sin(grazingAngle_rad);
    return wall.perpendicularLoss_dB + wall.grazingCoefficient_dB * s * s;
}

// Linear indoor loss, 0.5 dB per meter travelled inside the building.
inline double indoor_loss(double dIndoor_m) {
    if (dIndoor_m < 0.0) throw std::invalid_argument("indoor distance must be >= 0");
    return 0.5 * dIndoor_m;
}

// End-to-end gain between two antenna ports with its component breakdown.
struct CouplingGain {
    LinkClass linkClass = LinkClass::MacroToOutdoor;
    LosState losState = LosState::LOS;
    double pathloss_dB = 0.0;
    double wall_dB = 0.0;
    double indoor_dB = 0.0;
    double shadow_dB = 0.0;
    double txAntenna_dBi = 0.0;
    double rxAntenna_dBi = 0.0;
    double gain_dB = 0.0;

    double propagation_loss_dB() const { return pathloss_dB + wall_dB + indoor_dB + shadow_dB; }
};

// Geometry of a link between two placed nodes, including the wall-penetration
// point for one-end-indoor links.
inline LinkGeometry link_geometry(const Node& a, const Node& b, const Box& hall) {
    if (a.id == b.id) throw std::invalid_argument("coupling gain needs distinct nodes");
    LinkGeometry g;
    g.d2D = distance2d(a.pos, b.pos);
    g.d3D = distance3d(a.pos, b.pos);
    g.txHeight = a.pos.z;
    g.rxHeight = b.pos.z;
    g.linkClass = classify_link(a, b);
    g.outdoorD2D = g.d2D;

    if (a.indoor != b.indoor) {
        const Node& inside = a.indoor ? a : b;
        const Node& outside = a.indoor ? b : a;
        const WallCrossing wc = wall_crossing(hall, outside.pos, inside.pos);
        g.grazingAngle_rad = wc.grazingAngle_rad;
        g.dIndoor = distance3d(wc.point, inside.pos);
        g.outdoorD2D = distance2d(outside.pos, wc.point);
    } else if (!a.indoor && !b.indoor) {
        g.dIndoor = 0.0;
    }
    return g;
}

// Channel realization for one node pair: LOS state and shadow fading drawn
// from a pair-specific substream, shared by both link directions.
struct ChannelRealization {
    LosState losState = LosState::LOS;
    double shadow_dB = 0.0;
};

inline ChannelRealization realize_channel(const LinkGeometry& geom, SplitMix64& rng) {
    ChannelRealization ch;
    const double pLos = los_probability(geom.linkClass, geom.outdoorD2D);
    ch.losState = rng.next_double() < pLos ? LosState::LOS : LosState::NLOS;
    ch.shadow_dB = shadow_sigma_dB(geom.linkClass, ch.losState) * rng.next_normal();
    return ch;
}

// Full composition per the link class: model pathloss, wall penetration with
// grazing-angle dependence, linear indoor loss, shadow fading and the two
// antenna gains (arrays steered at the link partner). Reciprocal for a fixed
// channel realization.
inline CouplingGain coupling_gain(const Node& tx, const Node& rx, const Box& hall,
                                  const WallSpec& wall, double fc_GHz,
                                  const ChannelRealization& ch) {
    LinkGeometry geom = link_geometry(tx, rx, hall);
    geom.losState = ch.losState;

    CouplingGain cg;
    cg.linkClass = geom.linkClass;
    cg.losState = ch.losState;
    cg.pathloss_dB = model_pathloss(geom, fc_GHz);
    const bool crossesWall =
        geom.linkClass == LinkClass::MacroToFactoryIndoor || geom.linkClass == LinkClass::FactoryToOutdoor;
    if (crossesWall && tx.indoor != rx.indoor) {
        cg.wall_dB = wall_loss(wall, geom.grazingAngle_rad);
        cg.indoor_dB = indoor_loss(geom.dIndoor);
    }
    cg.shadow_dB = ch.shadow_dB;

    const Vec3 txToRx = (rx.pos - tx.pos).normalized();
    const Vec3 rxToTx = txToRx * -1.0;
    cg.txAntenna_dBi = antenna_gain(tx.antenna, txToRx, txToRx);
    cg.rxAntenna_dBi = antenna_gain(rx.antenna, rxToTx, rxToTx);
    cg.gain_dB = -(cg.pathloss_dB + cg.wall_dB + cg.indoor_dB + cg.shadow_dB) + cg.txAntenna_dBi +
                 cg.rxAntenna_dBi;
    return cg;
}

// Convenience overload drawing the channel realization from `rng`.
inline CouplingGain coupling_gain(const Node& tx, const Node& rx, const Box& hall,
                                  const WallSpec& wall, double fc_GHz, SplitMix64& rng) {
    const LinkGeometry geom = link_geometry(tx, rx, hall);
    const ChannelRealization ch = realize_channel(geom, rng);
    return coupling_gain(tx, rx, hall, wall, fc_GHz, ch);
}

} // namespace coexsim
