#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loxolab/numeric.hpp"

namespace loxolab {

struct ReportRow {
  std::string experiment;
  std::optional<int> n;
  std::string statistic;
  std::string value;
  std::string ci_low;
  std::string ci_high;
  std::string mode;  // "exact" or "mc:<samples>"
  std::uint64_t seed = 0;
};

class Report {
 public:
  Report(std::string experiment, std::string config_hash) : experiment_(std::move(experiment)), hash_(std::move(config_hash)) {}

  void add_exact(std::optional<int> n, std::string statistic, const Rational& value);
  void add_exact(std::optional<int> n, std::string statistic, const BigInt& value);
  void add_exact(std::optional<int> n, std::string statistic, std::string value);
  /// A deterministic floating value (computed, not sampled).
  void add_value(std::optional<int> n, std::string statistic, double value);
  void add_estimate(std::optional<int> n, std::string statistic, double value, double lo, double hi,
                    std::uint64_t samples, std::uint64_t seed);

  const std::vector<ReportRow>& rows() const { return rows_; }
  const std::string& experiment() const { return experiment_; }
  const std::string& config_hash() const { return hash_; }
  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  /// First row with this statistic (and n when given).
  const ReportRow* find(const std::string& statistic, std::optional<int> n = std::nullopt) const;
  double number(const std::string& statistic, std::optional<int> n = std::nullopt) const;

  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::string experiment_;
  std::string hash_;
  std::vector<ReportRow> rows_;
  nlohmann::json meta_ = nlohmann::json::object();
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

/// Parses a value cell: "p/q" rationals, integers and floating literals.
double parse_cell(const std::string& cell);

}  // namespace loxolab
