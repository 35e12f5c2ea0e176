#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cosym/errors.hpp"

namespace cosym {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Interval {
  double lower = -1.0;
  double upper = 1.0;
};

inline bool is_reserved_identifier(const std::string& s) {
  return s == "pi" || s == "sin" || s == "cos" || s == "exp" || s == "log";
}

inline bool is_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

/// A single global coordinate system. Periodic coordinates have period 2*pi;
/// every other coordinate carries a sampling box (default [-1, 1]).
class Chart {
 public:
  Chart(std::string name, std::vector<std::string> coordinates, std::vector<bool> periodic = {},
        std::vector<Interval> box = {})
      : name_(std::move(name)), coords_(std::move(coordinates)), periodic_(std::move(periodic)), box_(std::move(box)) {
    if (coords_.empty()) throw Error("chart \"" + name_ + "\" must have dimension >= 1");
    if (periodic_.empty()) periodic_.assign(coords_.size(), false);
    if (box_.empty()) box_.assign(coords_.size(), Interval{});
    if (periodic_.size() != coords_.size() || box_.size() != coords_.size())
      throw Error("chart \"" + name_ + "\": per-coordinate tables have the wrong length");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      const auto& c = coords_[i];
      if (!is_identifier(c) || is_reserved_identifier(c))
        throw Error("chart \"" + name_ + "\": invalid coordinate name \"" + c + "\"");
      if (!seen.insert(c).second) throw Error("chart \"" + name_ + "\": duplicate coordinate \"" + c + "\"");
      if (periodic_[i]) {
        box_[i] = Interval{0.0, two_pi};
      } else if (!(box_[i].lower < box_[i].upper)) {
        throw Error("chart \"" + name_ + "\": empty sampling box for \"" + c + "\"");
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coordinates() const noexcept { return coords_; }
  const std::string& coordinate(int i) const { return coords_.at(static_cast<std::size_t>(i)); }
  bool periodic(int i) const { return periodic_.at(static_cast<std::size_t>(i)); }
  const Interval& box(int i) const { return box_.at(static_cast<std::size_t>(i)); }

  std::optional<int> index_of(const std::string& coord) const {
    auto it = std::find(coords_.begin(), coords_.end(), coord);
    if (it == coords_.end()) return std::nullopt;
    return static_cast<int>(it - coords_.begin());
  }

  /// Signed difference a - b in coordinate i; wrapped into [-pi, pi] when periodic.
  double difference(int i, double a, double b) const {
    const double d = a - b;
    return periodic(i) ? std::remainder(d, two_pi) : d;
  }

  bool same_as(const Chart& other) const {
    return this == &other || (name_ == other.name_ && coords_ == other.coords_ && periodic_ == other.periodic_);
  }

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<bool> periodic_;
  std::vector<Interval> box_;
};

using ChartPtr = std::shared_ptr<const Chart>;

inline ChartPtr make_chart(std::string name, std::vector<std::string> coordinates, std::vector<bool> periodic = {},
                           std::vector<Interval> box = {}) {
  return std::make_shared<const Chart>(std::move(name), std::move(coordinates), std::move(periodic), std::move(box));
}

inline bool same_chart(const ChartPtr& a, const ChartPtr& b) { return a == b || (a && b && a->same_as(*b)); }

inline void require_same_chart(const ChartPtr& a, const ChartPtr& b, const std::string& context) {
  if (!same_chart(a, b))
    throw ChartMismatchError(context + ": chart \"" + (a ? a->name() : "?") + "\" does not match \"" +
                             (b ? b->name() : "?") + "\"");
}

/// Coordinates of a point on a chart. Periodic coordinates are reduced into [0, 2*pi).
class Point {
 public:
  Point(ChartPtr chart, std::vector<double> values) : chart_(std::move(chart)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != chart_->dimension())
      throw Error("point on chart \"" + chart_->name() + "\" needs " + std::to_string(chart_->dimension()) +
                  " coordinates, got " + std::to_string(values_.size()));
    for (int i = 0; i < chart_->dimension(); ++i) {
      if (chart_->periodic(i)) {
        double& v = values_[static_cast<std::size_t>(i)];
        v = std::fmod(v, two_pi);
        if (v < 0.0) v += two_pi;
      }
    }
  }

  const ChartPtr& chart() const noexcept { return chart_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  int dimension() const noexcept { return chart_->dimension(); }

 private:
  ChartPtr chart_;
  std::vector<double> values_;
};

/// Largest wrapped coordinate difference between two points on the same chart.
inline double point_distance(const Point& a, const Point& b) {
  double worst = 0.0;
  for (int i = 0; i < a.dimension(); ++i)
    worst = std::max(worst, std::abs(a.chart()->difference(i, a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)])));
  return worst;
}

/// Deterministic uniform samples inside the chart's sampling box.
inline std::vector<Point> sample_points(const ChartPtr& chart, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> v(static_cast<std::size_t>(chart->dimension()));
    for (int i = 0; i < chart->dimension(); ++i) {
      std::uniform_real_distribution<double> dist(chart->box(i).lower, chart->box(i).upper);
      v[static_cast<std::size_t>(i)] = dist(rng);
    }
    out.emplace_back(chart, std::move(v));
  }
  return out;
}

/// Mixes a base seed with a stream tag so independent sweeps do not share samples.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cosym
