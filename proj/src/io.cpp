#include "haarlab/measure.hpp"
#include "haarlab/stepfn.hpp"

#include <json.hpp>

namespace haarlab {

using nlohmann::json;

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      Rational num(text.substr(0, slash));
      Rational den(text.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator");
      return num / den;
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(text);
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    boost::multiprecision::mpz_int den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return Rational(boost::multiprecision::mpz_int(digits), den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("bad rational literal: " + text);
  }
}

std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::uniform: return "uniform";
    case MeasureKind::lmp: return "lmp";
    case MeasureKind::random: return "random";
  }
  return "?";
}

MeasureSpec parse_measure_spec(const std::string& json_text) {
  json j = json::parse(json_text);
  MeasureSpec spec;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") spec.kind = MeasureKind::uniform;
  else if (kind == "lmp") spec.kind = MeasureKind::lmp;
  else if (kind == "random") spec.kind = MeasureKind::random;
  else throw std::invalid_argument("unknown measure kind: " + kind);
  spec.depth = j.at("depth").get<std::uint32_t>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("theta")) spec.theta = j["theta"].get<double>();
  if (j.contains("explicit")) {
    for (const auto& e : j["explicit"]) {
      const auto& m = e.at("mass");
      Rational v = m.is_string() ? parse_rational(m.get<std::string>()) : Rational(m.get<double>());
      spec.explicit_masses.emplace_back(parse_interval(e.at("interval").get<std::string>()), v);
    }
  }
  return spec;
}

StepFunction<double> parse_function(const std::string& json_text) {
  json j = json::parse(json_text);
  if (!j.is_array()) throw std::invalid_argument("function literal must be an array");
  std::vector<Cell<double>> cells;
  for (const auto& e : j) cells.push_back({parse_interval(e.at("interval").get<std::string>()), e.at("value").get<double>()});
  return StepFunction<double>::from_cells(std::move(cells));
}

std::string to_json(const StepFunction<double>& f) {
  json j = json::array();
  for (const auto& c : f.cells()) j.push_back({{"interval", to_string(c.interval)}, {"value", c.value}});
  return j.dump();
}

}  // namespace haarlab
