#pragma once

// Residual bookkeeping shared by every check, plus JSON (de)serialization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cosym {

/// Sample budget and seed for one check run.
struct Sampling {
  std::size_t samples = 128;
  std::uint64_t seed = 42;
};

/// Thresholds used by the checks. `tol` (the CLI's --tol) governs the
/// comparison-type checks; the rest are fixed numeric contracts.
struct Tolerances {
  double closed = 1e-12;        // sampled coefficients of dω, dη, d∘d
  double volume = 1e-9;         // lower bound on |ωⁿ∧η|
  double solve = 1e-10;         // flat solves, Reeb/Hamiltonian axioms, moment maps
  double structure = 1e-10;     // groupoid axioms, J∘ι = 0, action axioms
  double jacobi = 1e-8;         // Poisson/bracket Jacobi identities
  double tol = 1e-9;            // multiplicativity, IM, reduced forms, squares
  double averaging = 1e-8;      // invariance of averaged forms
  double quadrature = 1e-12;    // order-64 vs order-128 averages
  double fd_closed = 1e-6;      // finite-difference closedness of pointwise forms
  double freeness = 1e-9;       // lower bound on |v_Q|
};

/// FNV-1a; used to derive per-check sample streams from names.
inline std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

enum class Bound { Upper, Lower };

struct CheckEntry {
  std::string name;
  double max = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double threshold = 0.0;
  Bound bound = Bound::Upper;
  bool passed = true;
  std::size_t samples = 0;
  std::string note;

  bool operator==(const CheckEntry&) const = default;
};

/// Running max/mean/min of a residual over samples.
class Residual {
 public:
  void add(double v) {
    if (std::isnan(v)) {
      nan_ = true;
      v = std::numeric_limits<double>::infinity();
    }
    max_ = count_ == 0 ? v : std::max(max_, v);
    min_ = count_ == 0 ? v : std::min(min_, v);
    sum_ += v;
    ++count_;
  }

  std::size_t count() const noexcept { return count_; }
  double max() const noexcept { return max_; }

  /// Upper bound: every sample must satisfy v < threshold (v <= threshold when threshold is 0).
  CheckEntry upper(std::string name, double threshold, std::string note = {}) const {
    CheckEntry e = base(std::move(name), threshold, std::move(note));
    e.bound = Bound::Upper;
    e.passed = !nan_ && (threshold == 0.0 ? max_ <= 0.0 : max_ < threshold);
    return e;
  }

  /// Lower bound: every sample must satisfy v > threshold.
  CheckEntry lower(std::string name, double threshold, std::string note = {}) const {
    CheckEntry e = base(std::move(name), threshold, std::move(note));
    e.bound = Bound::Lower;
    e.passed = !nan_ && count_ > 0 && min_ > threshold;
    return e;
  }

 private:
  CheckEntry base(std::string name, double threshold, std::string note) const {
    CheckEntry e;
    e.name = std::move(name);
    e.max = max_;
    e.min = min_;
    e.mean = count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_);
    e.threshold = threshold;
    e.samples = count_;
    e.note = std::move(note);
    return e;
  }

  double max_ = 0.0;
  double min_ = 0.0;
  double sum_ = 0.0;
  std::size_t count_ = 0;
  bool nan_ = false;
};

struct CheckReport {
  std::string subject;
  std::vector<CheckEntry> entries;
  std::uint64_t seed = 0;
  std::vector<std::string> unverified;  // hypotheses assumed but not checked

  bool passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.passed; });
  }

  void add(CheckEntry e) { entries.push_back(std::move(e)); }

  /// Exact pass/fail entry (integer identities, structural facts).
  void add_exact(std::string name, bool ok, std::string note = {}) {
    CheckEntry e;
    e.name = std::move(name);
    e.max = ok ? 0.0 : 1.0;
    e.mean = e.max;
    e.min = e.max;
    e.passed = ok;
    e.samples = 1;
    e.note = std::move(note);
    entries.push_back(std::move(e));
  }

  /// A stage that raised instead of producing residuals.
  void add_error(std::string name, const std::string& what) {
    CheckEntry e;
    e.name = std::move(name);
    e.max = std::numeric_limits<double>::infinity();
    e.mean = e.max;
    e.min = e.max;
    e.passed = false;
    e.note = what;
    entries.push_back(std::move(e));
  }

  void flag_unverified(const std::string& what) {
    if (std::find(unverified.begin(), unverified.end(), what) == unverified.end()) unverified.push_back(what);
  }

  /// Appends another report's entries under `prefix/`.
  void merge(const CheckReport& other, const std::string& prefix = {}) {
    for (auto e : other.entries) {
      if (!prefix.empty()) e.name = prefix + "/" + e.name;
      entries.push_back(std::move(e));
    }
    for (const auto& u : other.unverified) flag_unverified(u);
  }

  const CheckEntry* find(std::string_view name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }

  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (!e.passed) out.push_back(e.name);
    return out;
  }

  bool operator==(const CheckReport&) const = default;
};

// ---------------------------------------------------------------------------
// JSON. Non-finite numbers are written as the strings "inf", "-inf", "nan".

namespace detail {

inline nlohmann::json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const CheckEntry& e) {
  j = nlohmann::json{{"name", e.name},
                     {"max", detail::number_to_json(e.max)},
                     {"mean", detail::number_to_json(e.mean)},
                     {"min", detail::number_to_json(e.min)},
                     {"threshold", detail::number_to_json(e.threshold)},
                     {"bound", e.bound == Bound::Upper ? "upper" : "lower"},
                     {"passed", e.passed},
                     {"samples", e.samples}};
  if (!e.note.empty()) j["note"] = e.note;
}

inline void from_json(const nlohmann::json& j, CheckEntry& e) {
  e.name = j.at("name").get<std::string>();
  e.max = detail::number_from_json(j.at("max"));
  e.mean = detail::number_from_json(j.at("mean"));
  e.min = detail::number_from_json(j.at("min"));
  e.threshold = detail::number_from_json(j.at("threshold"));
  e.bound = j.at("bound").get<std::string>() == "lower" ? Bound::Lower : Bound::Upper;
  e.passed = j.at("passed").get<bool>();
  e.samples = j.at("samples").get<std::size_t>();
  e.note = j.value("note", std::string{});
}

inline void to_json(nlohmann::json& j, const CheckReport& r) {
  j = nlohmann::json{{"subject", r.subject},
                     {"passed", r.passed()},
                     {"seed", r.seed},
                     {"unverified", r.unverified},
                     {"entries", r.entries}};
}

inline void from_json(const nlohmann::json& j, CheckReport& r) {
  r.subject = j.at("subject").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.unverified = j.at("unverified").get<std::vector<std::string>>();
  r.entries = j.at("entries").get<std::vector<CheckEntry>>();
}

}  // namespace cosym
