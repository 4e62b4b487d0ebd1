#pragma once

#include <string>
#include <vector>

#include "airfl/common.hpp"
#include "airfl/csv.hpp"

namespace airfl {

// Discretized UAV path: N+1 horizontal waypoints, one per slot boundary.
// The path is closed (points[0] == points[N], exact) and every per-slot step
// obeys the speed limit ||u[n+1]-u[n]|| <= V_max*delta.
struct Trajectory {
  std::vector<Vec2> points;  // size N+1

  int slots() const { return static_cast<int>(points.size()) - 1; }

  bool closed() const {
    return points.front().x() == points.back().x() &&
           points.front().y() == points.back().y();
  }

  // max_step = V_max * delta. Speed checked with 1e-6 relative slack so
  // trajectories built from closed-form geometry are not rejected for
  // round-off; closure must hold exactly.
  void validate(double max_step) const {
    require(points.size() >= 2, "Trajectory: needs at least 2 points (N >= 1)");
    require(closed(), "Trajectory: open path, u[0] != u[N]");
    const double limit = sq(max_step) * (1.0 + 1e-6);
    for (std::size_t n = 0; n + 1 < points.size(); ++n) {
      const double step2 = (points[n + 1] - points[n]).squaredNorm();
      require(step2 <= limit,
              "Trajectory: step " + std::to_string(n) + " exceeds V_max*delta (" +
                  format_double(std::sqrt(step2)) + " > " + format_double(max_step) + ")");
    }
  }

  bool is_feasible(double max_step) const {
    if (points.size() < 2 || !closed()) return false;
    const double limit = sq(max_step) * (1.0 + 1e-6);
    for (std::size_t n = 0; n + 1 < points.size(); ++n) {
      if ((points[n + 1] - points[n]).squaredNorm() > limit) return false;
    }
    return true;
  }
};

inline Trajectory hover_trajectory(const Vec2& at, int n_slots) {
  require(n_slots >= 1, "hover_trajectory: N >= 1 required");
  Trajectory t;
  t.points.assign(static_cast<std::size_t>(n_slots) + 1, at);
  return t;
}

// Columns n,x,y; one row per waypoint 0..N.
inline void export_trajectory_csv(const Trajectory& traj, const std::string& path) {
  CsvWriter csv(path, {"n", "x", "y"});
  for (std::size_t n = 0; n < traj.points.size(); ++n) {
    csv.row({CsvWriter::cell(n), CsvWriter::cell(traj.points[n].x()),
             CsvWriter::cell(traj.points[n].y())});
  }
}

inline Trajectory import_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "import_trajectory_csv: cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "import_trajectory_csv: empty file");
  Trajectory t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    require(c1 != std::string::npos && c2 != std::string::npos,
            "import_trajectory_csv: malformed row: " + line);
    t.points.emplace_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                          std::stod(line.substr(c2 + 1)));
  }
  return t;
}

}  // namespace airfl
