#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace uavids {

enum class Direction { uplink, downlink, total };
enum class UavType { DBPower, Parrot, DJISpark };
enum class FlowMode { UF, BF };

std::string_view to_string(UavType t);
std::string_view to_string(FlowMode m);
UavType parse_uav_type(std::string_view s);
FlowMode parse_flow_mode(std::string_view s);

inline constexpr std::array<UavType, 3> kAllUavTypes{UavType::DBPower, UavType::Parrot,
                                                     UavType::DJISpark};

struct RawFlow {
    std::vector<double> packet_sizes;         // bytes, > 0
    std::vector<double> inter_arrival_times;  // seconds, >= 0
    Direction direction = Direction::total;
};

// The nine per-sequence measures, in the order they appear in the feature schema.
struct FlowStats {
    double mean = 0;
    double median = 0;
    double mad = 0;  // median absolute deviation about the median
    double max = 0;
    double min = 0;
    double std = 0;  // population (1/n)
    double mean_square = 0;
    double kurtosis = 0;  // m4 / m2^2, non-excess
    double skewness = 0;  // m3 / m2^(3/2)

    std::array<double, 9> as_array() const {
        return {mean, median, mad, max, min, std, mean_square, kurtosis, skewness};
    }
};

inline constexpr std::array<std::string_view, 9> kMeasureNames{
    "mean", "median", "MAD", "MAX", "MIN", "STD", "mean_square", "kurtosis", "skewness"};

// Throws DataError("empty sequence") on empty input. Constant input gives
// std = mad = 0 and kurtosis = skewness = 0.
FlowStats compute_flow_stats(const Eigen::Ref<const Eigen::VectorXd>& values);
FlowStats compute_flow_stats(const std::vector<double>& values);

struct DistributionSpec {
    enum class Family { lognormal, exponential, uniform };
    Family family = Family::lognormal;
    // lognormal: (mu, sigma) of the underlying normal; exponential: (rate, unused);
    // uniform: (low, high).
    double a = 0;
    double b = 1;

    void validate() const;  // ConfigError on invalid parameters
};

struct ClassProfile {
    UavType uav_type = UavType::Parrot;
    bool is_attack = false;
    DistributionSpec size_distribution;
    DistributionSpec interval_distribution;
    int min_length = 40;
    int max_length = 120;
    // Downlink packets are drawn from the uplink size law scaled by this factor.
    double downlink_size_scale = 1.6;

    void validate() const;
};

// Built-in profile for a (uav, attack) class. Attack profiles send smaller packets
// at a much higher rate, so every class pair is separable by construction.
ClassProfile default_profile(UavType uav, bool attack);

// Single (total-direction) flow. Deterministic per (profile, seed).
RawFlow synth_flow(const ClassProfile& profile, std::uint64_t seed);

struct FlowSet {
    RawFlow uplink;
    RawFlow downlink;
    RawFlow total;  // time-ordered merge of uplink and downlink
};

FlowSet synth_flow_set(const ClassProfile& profile, std::uint64_t seed);

struct FeatureRow {
    std::vector<double> values;
    std::vector<std::string> names;
};

// Column names for a mode: direction (total, uplink, downlink) major, then source
// (size, interval), then measure. 18 columns for UF, 54 for BF.
std::vector<std::string> feature_column_names(FlowMode mode);

// UF needs only `total`; BF needs all three. Throws DataError("incomplete flow set").
FeatureRow build_feature_row(const std::optional<RawFlow>& uplink,
                             const std::optional<RawFlow>& downlink, const RawFlow& total,
                             FlowMode mode);

}  // namespace uavids
