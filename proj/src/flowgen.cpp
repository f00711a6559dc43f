#include "uavids/flowgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "uavids/error.hpp"
#include "uavids/rng.hpp"

namespace uavids {

std::string_view to_string(UavType t) {
    switch (t) {
        case UavType::DBPower: return "dbpower";
        case UavType::Parrot: return "parrot";
        case UavType::DJISpark: return "djispark";
    }
    return "?";
}

std::string_view to_string(FlowMode m) { return m == FlowMode::UF ? "uf" : "bf"; }

UavType parse_uav_type(std::string_view s) {
    for (auto t : kAllUavTypes)
        if (s == to_string(t)) return t;
    throw ConfigError("unknown uav type '" + std::string(s) + "'");
}

FlowMode parse_flow_mode(std::string_view s) {
    if (s == "uf" || s == "UF") return FlowMode::UF;
    if (s == "bf" || s == "BF") return FlowMode::BF;
    throw ConfigError("unknown flow mode '" + std::string(s) + "' (expected uf or bf)");
}

namespace {

double median_of(std::vector<double> v) {
    const auto n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

FlowStats compute_flow_stats(const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (values.size() == 0) throw DataError("empty sequence");
    const double n = static_cast<double>(values.size());

    FlowStats s;
    s.mean = values.mean();
    s.max = values.maxCoeff();
    s.min = values.minCoeff();
    s.mean_square = values.squaredNorm() / n;

    std::vector<double> sorted(values.data(), values.data() + values.size());
    s.median = median_of(sorted);
    for (auto& x : sorted) x = std::abs(x - s.median);
    s.mad = median_of(std::move(sorted));

    const Eigen::ArrayXd d = values.array() - s.mean;
    const double m2 = d.square().sum() / n;
    const double m3 = d.cube().sum() / n;
    const double m4 = d.square().square().sum() / n;
    s.std = std::sqrt(m2);
    // 0/0 for constant sequences; anything below rounding noise counts as constant
    if (m2 > 1e-28 * std::max(1.0, s.mean * s.mean)) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
    }
    return s;
}

FlowStats compute_flow_stats(const std::vector<double>& values) {
    return compute_flow_stats(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                                 static_cast<Eigen::Index>(values.size())));
}

void DistributionSpec::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("distribution parameters must be finite");
    switch (family) {
        case Family::lognormal:
            if (b <= 0) throw ConfigError("lognormal sigma must be positive");
            break;
        case Family::exponential:
            if (a <= 0) throw ConfigError("exponential rate must be positive");
            break;
        case Family::uniform:
            if (!(a < b)) throw ConfigError("uniform requires low < high");
            break;
    }
}

void ClassProfile::validate() const {
    size_distribution.validate();
    interval_distribution.validate();
    if (size_distribution.family == DistributionSpec::Family::uniform && size_distribution.a <= 0)
        throw ConfigError("packet sizes must be positive");
    if (interval_distribution.family == DistributionSpec::Family::uniform &&
        interval_distribution.a < 0)
        throw ConfigError("inter-arrival times must be non-negative");
    if (min_length < 2 || max_length < min_length)
        throw ConfigError("flow length range must satisfy 2 <= min <= max");
    if (!(downlink_size_scale > 0)) throw ConfigError("downlink_size_scale must be positive");
}

ClassProfile default_profile(UavType uav, bool attack) {
    using F = DistributionSpec::Family;
    ClassProfile p;
    p.uav_type = uav;
    p.is_attack = attack;
    double size_median = 0, size_sigma = 0, rate = 0;
    switch (uav) {
        case UavType::Parrot: size_median = 400; size_sigma = 0.5; rate = 50; break;
        case UavType::DBPower: size_median = 700; size_sigma = 0.4; rate = 120; break;
        case UavType::DJISpark: size_median = 1000; size_sigma = 0.3; rate = 250; break;
    }
    if (attack) {
        size_median /= 3.0;
        size_sigma *= 1.5;
        rate *= 8.0;
    }
    p.size_distribution = {F::lognormal, std::log(size_median), size_sigma};
    p.interval_distribution = {F::exponential, rate, 0};
    return p;
}

namespace {

double draw(const DistributionSpec& d, Rng& rng) {
    switch (d.family) {
        case DistributionSpec::Family::lognormal:
            return std::lognormal_distribution<double>(d.a, d.b)(rng);
        case DistributionSpec::Family::exponential:
            return std::exponential_distribution<double>(d.a)(rng);
        case DistributionSpec::Family::uniform:
            return std::uniform_real_distribution<double>(d.a, d.b)(rng);
    }
    return 0;
}

RawFlow draw_flow(const ClassProfile& profile, Rng& rng, double size_scale, Direction dir) {
    std::uniform_int_distribution<int> len(profile.min_length, profile.max_length);
    const auto n = static_cast<std::size_t>(len(rng));
    RawFlow f;
    f.direction = dir;
    f.packet_sizes.resize(n);
    f.inter_arrival_times.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // keep sizes strictly positive even for a uniform law with a tiny lower bound
        f.packet_sizes[i] = std::max(draw(profile.size_distribution, rng) * size_scale, 1e-9);
        f.inter_arrival_times[i] = std::max(draw(profile.interval_distribution, rng), 0.0);
    }
    return f;
}

}  // namespace

RawFlow synth_flow(const ClassProfile& profile, std::uint64_t seed) {
    profile.validate();
    Rng rng(derive_seed({seed}));
    return draw_flow(profile, rng, 1.0, Direction::total);
}

FlowSet synth_flow_set(const ClassProfile& profile, std::uint64_t seed) {
    profile.validate();
    Rng rng(derive_seed({seed, 1}));
    FlowSet set;
    set.uplink = draw_flow(profile, rng, 1.0, Direction::uplink);
    set.downlink = draw_flow(profile, rng, profile.downlink_size_scale, Direction::downlink);

    // merge both directions on their arrival timestamps
    struct Packet {
        double time;
        double size;
    };
    std::vector<Packet> packets;
    for (const RawFlow* f : {&set.uplink, &set.downlink}) {
        double t = 0;
        for (std::size_t i = 0; i < f->packet_sizes.size(); ++i) {
            t += f->inter_arrival_times[i];
            packets.push_back({t, f->packet_sizes[i]});
        }
    }
    std::stable_sort(packets.begin(), packets.end(),
                     [](const Packet& a, const Packet& b) { return a.time < b.time; });
    set.total.direction = Direction::total;
    double prev = 0;
    for (const auto& p : packets) {
        set.total.packet_sizes.push_back(p.size);
        set.total.inter_arrival_times.push_back(p.time - prev);
        prev = p.time;
    }
    return set;
}

namespace {

constexpr std::string_view direction_prefix(Direction d) {
    switch (d) {
        case Direction::total: return "both_links";
        case Direction::uplink: return "uplink";
        case Direction::downlink: return "downlink";
    }
    return "?";
}

std::vector<Direction> directions_for(FlowMode mode) {
    if (mode == FlowMode::UF) return {Direction::total};
    return {Direction::total, Direction::uplink, Direction::downlink};
}

}  // namespace

std::vector<std::string> feature_column_names(FlowMode mode) {
    std::vector<std::string> names;
    for (auto dir : directions_for(mode))
        for (std::string_view source : {"size", "interval"})
            for (auto measure : kMeasureNames) {
                std::string name(direction_prefix(dir));
                name += '_';
                name += source;
                name += '_';
                name += measure;
                names.push_back(std::move(name));
            }
    return names;
}

FeatureRow build_feature_row(const std::optional<RawFlow>& uplink,
                             const std::optional<RawFlow>& downlink, const RawFlow& total,
                             FlowMode mode) {
    if (mode == FlowMode::BF && (!uplink || !downlink)) throw DataError("incomplete flow set");

    FeatureRow row;
    row.names = feature_column_names(mode);
    auto append = [&row](const RawFlow& f) {
        for (const auto* seq : {&f.packet_sizes, &f.inter_arrival_times}) {
            const auto stats = compute_flow_stats(*seq).as_array();
            row.values.insert(row.values.end(), stats.begin(), stats.end());
        }
    };
    append(total);
    if (mode == FlowMode::BF) {
        append(*uplink);
        append(*downlink);
    }
    return row;
}

}  // namespace uavids
