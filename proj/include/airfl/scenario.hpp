#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "airfl/common.hpp"
#include "airfl/rng.hpp"
#include "airfl/trajectory.hpp"

namespace airfl {

struct ChannelParams {
  double rho_gain = 1e-6;     // linear power gain at 1 m
  double noise_power = 1e-12; // sigma^2, watts
  double tx_power = 0.32;     // P0, watts
};

struct UavParams {
  double altitude = 50.0;        // z, m
  double v_max = 50.0;           // m/s
  double slot_duration = 1.0;    // delta, s
  int n_slots = 120;             // N
  Vec2 start{885.0, -10.0};      // u_start
  double coverage_radius = 158.0; // d_thr, m
};

struct OptimizerParams {
  double epsilon = 1e-4;   // fractional-decrease stop threshold
  int max_outer_iters = 60;
  int inner_iters = 1;     // tangent refreshes per outer iteration
};

// Experiment configuration: device layout, weights, channel/UAV/optimizer
// parameters. All distances in meters, powers in watts (dB/dBm keys are
// converted once, at load).
struct Scenario {
  std::vector<Vec2> devices;
  std::vector<double> weights;  // b_m, sum exactly 1
  ChannelParams channel;
  UavParams uav;
  OptimizerParams optimizer;
  std::uint64_t seed = 0;

  int num_devices() const { return static_cast<int>(devices.size()); }
  double max_step() const { return uav.v_max * uav.slot_duration; }

  void validate() const {
    require(!devices.empty(), "devices: at least one device required");
    require(devices.size() == weights.size(),
            "weights: length must match devices");
    double sum = 0.0;
    for (std::size_t m = 0; m < weights.size(); ++m) {
      require(weights[m] > 0.0,
              "weights[" + std::to_string(m) + "] must be > 0");
      sum += weights[m];
    }
    require(sum == 1.0, "weights must sum to 1 exactly after normalization");
    require(channel.rho_gain > 0.0, "channel.rho must be > 0");
    require(channel.noise_power >= 0.0, "channel.noise_power must be >= 0");
    require(channel.tx_power > 0.0, "channel.tx_power must be > 0");
    require(uav.altitude > 0.0, "uav.altitude must be > 0");
    require(uav.v_max > 0.0, "uav.v_max must be > 0");
    require(uav.slot_duration > 0.0, "uav.slot_duration must be > 0");
    require(uav.n_slots >= 1, "uav.slots must be >= 1");
    require(uav.coverage_radius > 0.0, "uav.coverage_radius must be > 0");
    require(optimizer.epsilon > 0.0, "optimizer.epsilon must be > 0");
    require(optimizer.max_outer_iters >= 0, "optimizer.max_outer_iters must be >= 0");
    require(optimizer.inner_iters >= 1, "optimizer.inner_iters must be >= 1");
  }
};

// Renormalizes weights to an exact unit sum. Accepts inputs whose sum is
// within 1e-6 of 1 (decimal-config rounding); anything further off is a
// config error, not a rounding artifact.
inline std::vector<double> normalize_weights(std::vector<double> w) {
  require(!w.empty(), "weights: empty");
  double sum = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) {
    require(w[m] > 0.0, "weights[" + std::to_string(m) + "] must be > 0");
    sum += w[m];
  }
  require(std::abs(sum - 1.0) <= 1e-6,
          "weights sum to " + format_double(sum) + ", not within 1e-6 of 1");
  for (auto& x : w) x /= sum;
  // Push the residual into the largest entry until the sequential sum is
  // exactly 1.0 (terminates in a couple of sub-ulp corrections).
  for (int pass = 0; pass < 8; ++pass) {
    double s = 0.0;
    for (double x : w) s += x;
    if (s == 1.0) return w;
    std::size_t imax = 0;
    for (std::size_t m = 1; m < w.size(); ++m)
      if (w[m] > w[imax]) imax = m;
    w[imax] += 1.0 - s;
  }
  double s = 0.0;
  for (double x : w) s += x;
  require(s == 1.0, "weights: normalization failed to reach exact unit sum");
  return w;
}

// Clustered layout: cluster centers uniform in the square shrunk by `spread`,
// members uniform in the disk of radius `spread` around their center. Pure
// function of its arguments.
inline std::vector<Vec2> generate_clustered_devices(int n_clusters, int per_cluster,
                                                    double area_half_width,
                                                    double cluster_spread,
                                                    std::uint64_t seed) {
  require(n_clusters >= 1, "clusters.count must be >= 1");
  require(per_cluster >= 1, "clusters.per_cluster must be >= 1");
  require(area_half_width > 0.0, "clusters.area_half_width must be > 0");
  require(cluster_spread >= 0.0, "clusters.spread must be >= 0");
  require(cluster_spread < area_half_width,
          "clusters.spread must be < area_half_width");
  Rng rng(derive_seed(seed, 0x636c7573746572ULL));  // "cluster"
  const double inner = area_half_width - cluster_spread;
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n_clusters) * per_cluster);
  for (int c = 0; c < n_clusters; ++c) {
    const Vec2 center(rng.uniform(-inner, inner), rng.uniform(-inner, inner));
    for (int k = 0; k < per_cluster; ++k) {
      const double r = cluster_spread * std::sqrt(rng.uniform01());
      const double a = rng.uniform(0.0, 2.0 * M_PI);
      out.emplace_back(center.x() + r * std::cos(a), center.y() + r * std::sin(a));
    }
  }
  return out;
}

inline Vec2 barycenter(const std::vector<Vec2>& devices,
                       const std::vector<double>& weights) {
  require(devices.size() == weights.size(), "barycenter: length mismatch");
  require(!devices.empty(), "barycenter: empty input");
  Vec2 c(0.0, 0.0);
  for (std::size_t m = 0; m < devices.size(); ++m) c += weights[m] * devices[m];
  return c;
}

// N+1 points evenly spaced on the circle. If u_start lies on the circle the
// path starts (and ends) exactly there; otherwise at angle 0. Radius 0 hovers
// at the center. Infeasible per-slot arc length is an error.
inline Trajectory circular_trajectory(const Vec2& center, double radius,
                                      const Scenario& sc) {
  require(radius >= 0.0, "circular_trajectory: radius must be >= 0");
  const int n = sc.uav.n_slots;
  const double arc = 2.0 * M_PI * radius / n;
  require(arc <= sc.max_step() * (1.0 + 1e-12),
          "circular_trajectory: per-slot arc " + format_double(arc) +
              " m exceeds V_max*delta = " + format_double(sc.max_step()) + " m");
  Trajectory t;
  t.points.resize(static_cast<std::size_t>(n) + 1);
  if (radius == 0.0) {
    for (auto& p : t.points) p = center;
    return t;
  }
  const Vec2 rel = sc.uav.start - center;
  const bool through_start =
      std::abs(rel.norm() - radius) <= 1e-9 * std::max(radius, 1.0);
  const double theta0 = through_start ? std::atan2(rel.y(), rel.x()) : 0.0;
  for (int k = 0; k <= n; ++k) {
    const double a = theta0 + 2.0 * M_PI * k / n;
    t.points[static_cast<std::size_t>(k)] =
        center + radius * Vec2(std::cos(a), std::sin(a));
  }
  if (through_start) t.points.front() = sc.uav.start;
  t.points.back() = t.points.front();
  t.validate(sc.max_step());
  return t;
}

namespace detail {

using nlohmann::json;

inline double get_number(const json& j, const std::string& section,
                         const std::string& key) {
  const auto it = j.find(key);
  require(it != j.end(), section + "." + key + ": missing");
  require(it->is_number(), section + "." + key + ": must be a number");
  return it->get<double>();
}

inline double get_number_or(const json& j, const std::string& section,
                            const std::string& key, double fallback) {
  return j.contains(key) ? get_number(j, section, key) : fallback;
}

// Looks up `key`, falling back to `key_db` / `key_dbm` with conversion.
inline double get_with_db(const json& j, const std::string& section,
                          const std::string& key, double fallback) {
  if (j.contains(key)) return get_number(j, section, key);
  if (j.contains(key + "_db")) return db_to_linear(get_number(j, section, key + "_db"));
  if (j.contains(key + "_dbm")) return dbm_to_watts(get_number(j, section, key + "_dbm"));
  return fallback;
}

inline Vec2 get_vec2(const json& j, const std::string& where) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          where + ": expected [x, y]");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& root) {
  using detail::get_number;
  using detail::get_number_or;
  using detail::get_vec2;
  using detail::get_with_db;

  Scenario sc;
  sc.seed = root.contains("seed") ? root.at("seed").get<std::uint64_t>() : 0;

  require(root.contains("devices"), "devices: missing section");
  const auto& dev = root.at("devices");
  if (dev.contains("positions")) {
    for (std::size_t i = 0; i < dev.at("positions").size(); ++i)
      sc.devices.push_back(get_vec2(dev.at("positions")[i],
                                    "devices.positions[" + std::to_string(i) + "]"));
  } else if (dev.contains("clusters")) {
    const auto& cl = dev.at("clusters");
    const std::uint64_t dseed = cl.contains("seed")
                                    ? cl.at("seed").get<std::uint64_t>()
                                    : sc.seed;
    sc.devices = generate_clustered_devices(
        static_cast<int>(get_number(cl, "devices.clusters", "count")),
        static_cast<int>(get_number(cl, "devices.clusters", "per_cluster")),
        get_number(cl, "devices.clusters", "area_half_width"),
        get_number(cl, "devices.clusters", "spread"), dseed);
  } else {
    throw Error("devices: need either positions or clusters");
  }
  if (dev.contains("weights")) {
    std::vector<double> w;
    for (const auto& x : dev.at("weights")) {
      require(x.is_number(), "devices.weights: must be numbers");
      w.push_back(x.get<double>());
    }
    require(w.size() == sc.devices.size(),
            "devices.weights: length must match device count");
    sc.weights = normalize_weights(std::move(w));
  } else {
    sc.weights = normalize_weights(
        std::vector<double>(sc.devices.size(), 1.0 / sc.devices.size()));
  }

  if (root.contains("channel")) {
    const auto& ch = root.at("channel");
    sc.channel.rho_gain = get_with_db(ch, "channel", "rho", sc.channel.rho_gain);
    sc.channel.noise_power =
        get_with_db(ch, "channel", "noise_power", sc.channel.noise_power);
    sc.channel.tx_power = get_with_db(ch, "channel", "tx_power", sc.channel.tx_power);
  }
  if (root.contains("uav")) {
    const auto& uv = root.at("uav");
    sc.uav.altitude = get_number_or(uv, "uav", "altitude", sc.uav.altitude);
    sc.uav.v_max = get_number_or(uv, "uav", "v_max", sc.uav.v_max);
    sc.uav.slot_duration = get_number_or(uv, "uav", "slot_duration", sc.uav.slot_duration);
    sc.uav.n_slots = static_cast<int>(get_number_or(uv, "uav", "slots", sc.uav.n_slots));
    if (uv.contains("start")) sc.uav.start = get_vec2(uv.at("start"), "uav.start");
    sc.uav.coverage_radius =
        get_number_or(uv, "uav", "coverage_radius", sc.uav.coverage_radius);
  }
  if (root.contains("optimizer")) {
    const auto& op = root.at("optimizer");
    sc.optimizer.epsilon = get_number_or(op, "optimizer", "epsilon", sc.optimizer.epsilon);
    sc.optimizer.max_outer_iters = static_cast<int>(
        get_number_or(op, "optimizer", "max_outer_iters", sc.optimizer.max_outer_iters));
    sc.optimizer.inner_iters = static_cast<int>(
        get_number_or(op, "optimizer", "inner_iters", sc.optimizer.inner_iters));
  }

  sc.validate();
  return sc;
}

inline nlohmann::json load_config_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw Error("config: parse failure in " + path + ": " + e.what());
  }
  return root;
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(load_config_json(path));
}

// Fully resolved view of a scenario (explicit positions and weights, linear
// units). This is what gets hashed into the run manifest and copied into
// output directories.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["seed"] = sc.seed;
  auto& dev = j["devices"];
  for (const auto& p : sc.devices) dev["positions"].push_back({p.x(), p.y()});
  for (double w : sc.weights) dev["weights"].push_back(w);
  j["channel"] = {{"rho", sc.channel.rho_gain},
                  {"noise_power", sc.channel.noise_power},
                  {"tx_power", sc.channel.tx_power}};
  j["uav"] = {{"altitude", sc.uav.altitude},
              {"v_max", sc.uav.v_max},
              {"slot_duration", sc.uav.slot_duration},
              {"slots", sc.uav.n_slots},
              {"start", {sc.uav.start.x(), sc.uav.start.y()}},
              {"coverage_radius", sc.uav.coverage_radius}};
  j["optimizer"] = {{"epsilon", sc.optimizer.epsilon},
                    {"max_outer_iters", sc.optimizer.max_outer_iters},
                    {"inner_iters", sc.optimizer.inner_iters}};
  return j;
}

}  // namespace airfl
