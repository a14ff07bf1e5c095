#include "loxolab/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace loxolab {

void Report::add_exact(std::optional<int> n, std::string statistic, const Rational& value) {
  add_exact(n, std::move(statistic), to_string(value));
}

void Report::add_exact(std::optional<int> n, std::string statistic, const BigInt& value) {
  add_exact(n, std::move(statistic), value.str());
}

void Report::add_exact(std::optional<int> n, std::string statistic, std::string value) {
  rows_.push_back({experiment_, n, std::move(statistic), value, value, value, "exact", 0});
}

void Report::add_value(std::optional<int> n, std::string statistic, double value) {
  const std::string v = format_double(value);
  rows_.push_back({experiment_, n, std::move(statistic), v, v, v, "exact", 0});
}

void Report::add_estimate(std::optional<int> n, std::string statistic, double value, double lo, double hi,
                          std::uint64_t samples, std::uint64_t seed) {
  rows_.push_back({experiment_, n, std::move(statistic), format_double(value), format_double(lo), format_double(hi),
                   "mc:" + std::to_string(samples), seed});
}

const ReportRow* Report::find(const std::string& statistic, std::optional<int> n) const {
  for (const ReportRow& r : rows_) {
    if (r.statistic == statistic && (!n || r.n == n)) return &r;
  }
  return nullptr;
}

double Report::number(const std::string& statistic, std::optional<int> n) const {
  const ReportRow* r = find(statistic, n);
  if (!r) throw std::out_of_range("report: no row '" + statistic + "'");
  return parse_cell(r->value);
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "experiment,n,statistic,value,ci_low,ci_high,mode,seed,config_hash\n";
  for (const ReportRow& r : rows_) {
    os << r.experiment << ',' << (r.n ? std::to_string(*r.n) : std::string()) << ',' << r.statistic << ',' << r.value
       << ',' << r.ci_low << ',' << r.ci_high << ',' << r.mode << ',' << r.seed << ',' << hash_ << '\n';
  }
  return os.str();
}

nlohmann::json Report::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow& r : rows_) {
    nlohmann::json j{{"statistic", r.statistic}, {"value", r.value}, {"ci_low", r.ci_low},
                     {"ci_high", r.ci_high},     {"mode", r.mode},   {"seed", r.seed}};
    j["n"] = r.n ? nlohmann::json(*r.n) : nlohmann::json(nullptr);
    rows.push_back(std::move(j));
  }
  return {{"experiment", experiment_}, {"config_hash", hash_}, {"meta", meta_}, {"rows", std::move(rows)}};
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double parse_cell(const std::string& cell) {
  const auto slash = cell.find('/');
  if (slash != std::string::npos) {
    return to_double(Rational(BigInt(cell.substr(0, slash)), BigInt(cell.substr(slash + 1))));
  }
  return std::stod(cell);
}

}  // namespace loxolab
