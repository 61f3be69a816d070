#pragma once

#include "coexsim/antenna.hpp"
#include "coexsim/geometry.hpp"
#include "coexsim/rng.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coexsim {

enum class NodeRole : uint8_t { MacroBS, FactoryBS, EmbbUE, UrllcUE };
enum class NetworkId : uint8_t { Macro, Factory };

inline const char* to_string(NodeRole r) {
    switch (r) {
        case NodeRole::MacroBS: return "MacroBS";
        case NodeRole::FactoryBS: return "FactoryBS";
        case NodeRole::EmbbUE: return "EmbbUE";
        case NodeRole::UrllcUE: return "UrllcUE";
    }
    return "?";
}

inline const char* to_string(NetworkId n) { return n == NetworkId::Macro ? "Macro" : "Factory"; }

// UE region tag used for traffic allocation and result scoping.
enum class Region : uint8_t { ImpactArea, Elsewhere, InFactory };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::ImpactArea: return "impactArea";
        case Region::Elsewhere: return "elsewhere";
        case Region::InFactory: return "inFactory";
    }
    return "?";
}

struct Node {
    uint32_t id = 0;
    Position3D pos;
    NodeRole role = NodeRole::EmbbUE;
    NetworkId network = NetworkId::Macro;
    bool indoor = false;
    double maxTxPower_dBm = 23.0;
    double noiseFigure_dB = 9.0;
    AntennaRef antenna;
    Region region = Region::Elsewhere;

    bool is_bs() const { return role == NodeRole::MacroBS || role == NodeRole::FactoryBS; }
};

// One macro site: three sector nodes sharing a position, boresights 120 deg
// apart.
struct Site {
    Position3D pos;
    std::vector<Node> sectors;
};

struct FactoryModel {
    Box hall;                 // global-frame axis-aligned hall, 120 x 50 x 10 m
    double wallPerpendicularLoss_dB = 14.0;
    double wallGrazingCoefficient_dB = 20.0;
};

struct Deployment {
    std::vector<Site> sites;
    FactoryModel factory;
    std::vector<Node> factoryBSs;
    Box systemArea;  // 1500 m x 1500 m bounding box
    Box impactArea;  // traffic hotspot around the factory (xy extent)
};

struct DropConfig {
    int nUrllcUE = 50;
    int nEmbbOutdoorUE = 210;
    int nEmbbFactoryUE = 0;
    // Outdoor UEs are split between the impact area and the rest of the
    // system area proportionally to the offered DL traffic split.
    double impactTrafficShare = 150.0 / 350.0;
    uint64_t seed = 1;
    double ueHeight_m = 1.5;

    void validate() const {
        if (nUrllcUE < 0 || nEmbbOutdoorUE < 0 || nEmbbFactoryUE < 0)
            throw std::invalid_argument("UE counts must be >= 0");
        if (nUrllcUE >= 1000 || nEmbbOutdoorUE >= 1000 || nEmbbFactoryUE >= 1000)
            throw std::invalid_argument("UE counts must be < 1000 per population");
        if (impactTrafficShare < 0.0 || impactTrafficShare > 1.0)
            throw std::invalid_argument("impactTrafficShare out of [0,1]");
    }
};

// UE id ranges are fixed per population so that channel substreams (seeded by
// node-id pairs) do not shift when another population's count changes.
constexpr uint32_t kUrllcIdBase = 1000;
constexpr uint32_t kEmbbOutdoorIdBase = 2000;
constexpr uint32_t kEmbbFactoryIdBase = 3000;

constexpr double kMacroBsHeight_m = 25.0;
constexpr double kMacroBsPower_dBm = 50.0;
constexpr double kFactoryBsPower_dBm = 30.0;
constexpr double kUePower_dBm = 23.0;
constexpr double kBsNoiseFigure_dB = 5.0;
constexpr double kUeNoiseFigure_dB = 9.0;
constexpr double kFactoryLength_m = 120.0;
constexpr double kFactoryWidth_m = 50.0;
constexpr double kFactoryHeight_m = 10.0;

// Hexagonal macro grid: center site plus one ring of six at distance `isd`.
// Each site carries three sector nodes with boresights at 0/120/240 deg.
inline std::vector<Site> build_macro_grid(double isd, int tiers, double downtilt_deg = 6.0) {
    if (isd <= 0.0) throw std::invalid_argument("inter-site distance must be > 0");
    if (tiers < 0 || tiers > 1) throw std::invalid_argument("tiers must be 0 or 1");

    std::vector<Position3D> centers{{0.0, 0.0, kMacroBsHeight_m}};
    if (tiers == 1) {
        for (int k = 0; k < 6; ++k) {
            const double ang = deg2rad(60.0 * k);
            centers.push_back({isd * std::cos(ang), isd * std::sin(ang), kMacroBsHeight_m});
        }
    }

    std::vector<Site> sites;
    uint32_t id = 0;
    for (const auto& c : centers) {
        Site site;
        site.pos = c;
        for (int s = 0; s < 3; ++s) {
            Node n;
            n.id = id++;
            n.pos = c;
            n.role = NodeRole::MacroBS;
            n.network = NetworkId::Macro;
            n.indoor = false;
            n.maxTxPower_dBm = kMacroBsPower_dBm;
            n.noiseFigure_dB = kBsNoiseFigure_dB;
            n.antenna = AntennaRef::macro_array(120.0 * s, downtilt_deg);
            site.sectors.push_back(n);
        }
        sites.push_back(site);
    }
    return sites;
}

// Place the 120 x 50 x 10 m factory hall at `distanceToClosestSite` from the
// closest macro site, on the segment from that site toward the grid center,
// long axis along global x. Ceiling-mounted factory BSs: a row of three on
// the long axis for n=3, a 4x3 lattice for n=12.
inline void place_factory(Deployment& dep, double distanceToClosestSite, int nFactoryBS) {
    if (distanceToClosestSite <= 0.0) throw std::invalid_argument("factory distance must be > 0");
    if (nFactoryBS != 3 && nFactoryBS != 12)
        throw std::invalid_argument("factory BS count must be 3 or 12");
    if (dep.sites.size() < 2) throw std::invalid_argument("factory placement needs a ring site");

    // Closest site: the first ring site (polar angle 0), factory center on the
    // segment from it through the grid center.
    const Position3D site = dep.sites[1].pos;
    const Vec3 toCenter = (Vec3{0, 0, site.z} - site).normalized();
    const Vec3 center = site + toCenter * distanceToClosestSite;

    Box hall;
    hall.min = {center.x - kFactoryLength_m / 2.0, center.y - kFactoryWidth_m / 2.0, 0.0};
    hall.max = {center.x + kFactoryLength_m / 2.0, center.y + kFactoryWidth_m / 2.0, kFactoryHeight_m};
    if (!dep.systemArea.contains_xy(hall.min) || !dep.systemArea.contains_xy(hall.max))
        throw std::invalid_argument("factory extends outside the system area");
    dep.factory.hall = hall;

    uint32_t id = 0;
    for (const auto& s : dep.sites) id += static_cast<uint32_t>(s.sectors.size());

    std::vector<Vec3> local;
    if (nFactoryBS == 3) {
        for (double x : {20.0, 60.0, 100.0}) local.push_back({x, 25.0, kFactoryHeight_m});
    } else {
        for (double x : {15.0, 45.0, 75.0, 105.0})
            for (double y : {12.5, 25.0, 37.5}) local.push_back({x, y, kFactoryHeight_m});
    }

    dep.factoryBSs.clear();
    for (const auto& p : local) {
        Node n;
        n.id = id++;
        n.pos = {hall.min.x + p.x, hall.min.y + p.y, p.z};
        n.role = NodeRole::FactoryBS;
        n.network = NetworkId::Factory;
        n.indoor = true;
        n.maxTxPower_dBm = kFactoryBsPower_dBm;
        n.noiseFigure_dB = kBsNoiseFigure_dB;
        n.antenna = AntennaRef::factory_omni();
        dep.factoryBSs.push_back(n);
    }
}

struct DeploymentConfig {
    double isd_m = 500.0;
    int tiers = 1;
    double factoryDistance_m = 200.0;
    int nFactoryBS = 3;
    double impactAreaSize_m = 500.0;
    double downtilt_deg = 6.0;
};

inline Deployment build_deployment(const DeploymentConfig& cfg) {
    Deployment dep;
    dep.systemArea.min = {-750.0, -750.0, 0.0};
    dep.systemArea.max = {750.0, 750.0, 1000.0};
    dep.sites = build_macro_grid(cfg.isd_m, cfg.tiers, cfg.downtilt_deg);
    place_factory(dep, cfg.factoryDistance_m, cfg.nFactoryBS);

    const Vec3 c = dep.factory.hall.center();
    dep.impactArea.min = {c.x - cfg.impactAreaSize_m / 2.0, c.y - cfg.impactAreaSize_m / 2.0, 0.0};
    dep.impactArea.max = {c.x + cfg.impactAreaSize_m / 2.0, c.y + cfg.impactAreaSize_m / 2.0, 1000.0};
    return dep;
}

inline std::vector<const Node*> all_bs(const Deployment& dep) {
    std::vector<const Node*> out;
    for (const auto& s : dep.sites)
        for (const auto& n : s.sectors) out.push_back(&n);
    for (const auto& n : dep.factoryBSs) out.push_back(&n);
    return out;
}

namespace detail {

inline Vec3 sample_in_box_xy(SplitMix64& rng, const Box& box, double z) {
    return {rng.next_uniform(box.min.x, box.max.x), rng.next_uniform(box.min.y, box.max.y), z};
}

} // namespace detail

// Randomized UE drop. URLLC UEs uniform over the factory floor; outdoor eMBB
// UEs split between impact area and the rest of the system area; factory eMBB
// UEs uniform inside the hall. Pure function of (deployment, config).
inline std::vector<Node> drop_ues(const Deployment& dep, const DropConfig& cfg) {
    cfg.validate();
    // Independent substream per population, so e.g. the outdoor drop does not
    // change when the URLLC count does.
    SplitMix64 urllcRng(mix_seed(cfg.seed, 0xd809u, 1));
    SplitMix64 outdoorRng(mix_seed(cfg.seed, 0xd809u, 2));
    SplitMix64 factoryRng(mix_seed(cfg.seed, 0xd809u, 3));

    std::vector<Node> ues;
    const Box& hall = dep.factory.hall;

    for (int i = 0; i < cfg.nUrllcUE; ++i) {
        Node n;
        n.id = kUrllcIdBase + static_cast<uint32_t>(i);
        n.pos = detail::sample_in_box_xy(urllcRng, hall, cfg.ueHeight_m);
        n.role = NodeRole::UrllcUE;
        n.network = NetworkId::Factory;
        n.indoor = true;
        n.maxTxPower_dBm = kUePower_dBm;
        n.noiseFigure_dB = kUeNoiseFigure_dB;
        n.antenna = AntennaRef::ue_isotropic();
        n.region = Region::InFactory;
        ues.push_back(n);
    }

    const int nImpact = static_cast<int>(std::lround(cfg.nEmbbOutdoorUE * cfg.impactTrafficShare));
    for (int i = 0; i < cfg.nEmbbOutdoorUE; ++i) {
        const bool impact = i < nImpact;
        Node n;
        n.id = kEmbbOutdoorIdBase + static_cast<uint32_t>(i);
        // Rejection sampling keeps outdoor UEs out of the hall footprint (and
        // impact-area UEs out of the "elsewhere" pool and vice versa).
        for (int guard = 0; guard < 100000; ++guard) {
            Vec3 p = impact ? detail::sample_in_box_xy(outdoorRng, dep.impactArea, cfg.ueHeight_m)
                            : detail::sample_in_box_xy(outdoorRng, dep.systemArea, cfg.ueHeight_m);
            if (hall.contains_xy(p)) continue;
            if (!impact && dep.impactArea.contains_xy(p)) continue;
            n.pos = p;
            break;
        }
        n.role = NodeRole::EmbbUE;
        n.network = NetworkId::Macro;
        n.indoor = false;
        n.maxTxPower_dBm = kUePower_dBm;
        n.noiseFigure_dB = kUeNoiseFigure_dB;
        n.antenna = AntennaRef::ue_isotropic();
        n.region = impact ? Region::ImpactArea : Region::Elsewhere;
        ues.push_back(n);
    }

    for (int i = 0; i < cfg.nEmbbFactoryUE; ++i) {
        Node n;
        n.id = kEmbbFactoryIdBase + static_cast<uint32_t>(i);
        n.pos = detail::sample_in_box_xy(factoryRng, hall, cfg.ueHeight_m);
        n.role = NodeRole::EmbbUE;
        n.network = NetworkId::Macro;
        n.indoor = true;
        n.maxTxPower_dBm = kUePower_dBm;
        n.noiseFigure_dB = kUeNoiseFigure_dB;
        n.antenna = AntennaRef::ue_isotropic();
        n.region = Region::InFactory;
        ues.push_back(n);
    }
    return ues;
}

// Documented deployment dump for plotting/debugging.
inline void dump_deployment_csv(std::ostream& os, const Deployment& dep, const std::vector<Node>& ues) {
    os << "id,role,network,x,y,z,indoor\n";
    auto row = [&os](const Node& n) {
        os << n.id << ',' << to_string(n.role) << ',' << to_string(n.network) << ',' << n.pos.x
           << ',' << n.pos.y << ',' << n.pos.z << ',' << (n.indoor ? 1 : 0) << '\n';
    };
    for (const auto& s : dep.sites)
        for (const auto& n : s.sectors) row(n);
    for (const auto& n : dep.factoryBSs) row(n);
    for (const auto& n : ues) row(n);
}

} // namespace coexsim
