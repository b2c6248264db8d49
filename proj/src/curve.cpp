#include "epsbisim/curve.hpp"

#include <cstdio>

#include "epsbisim/error.hpp"

namespace epsbisim {

void BoundCurve::add(const std::string& name, const std::vector<double>& values) {
  add(name, std::vector<std::optional<double>>(values.begin(), values.end()));
}

void BoundCurve::add(const std::string& name, std::vector<std::optional<double>> values) {
  if (values.size() != t.size()) throw Error(ErrorKind::InvalidArgument, "column '" + name + "' has wrong length");
  names.push_back(name);
  columns.push_back(std::move(values));
}

bool BoundCurve::has(const std::string& name) const {
  for (const auto& n : names) {
    if (n == name) return true;
  }
  return false;
}

const std::vector<std::optional<double>>& BoundCurve::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw Error(ErrorKind::InvalidArgument, "no column '" + name + "'");
}

std::vector<double> linear_grid(double tmax, std::size_t steps) {
  std::vector<double> g;
  if (steps == 0) return {tmax};
  for (std::size_t i = 0; i <= steps; ++i) g.push_back(tmax * static_cast<double>(i) / static_cast<double>(steps));
  return g;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const BoundCurve& curve) {
  out << "t";
  for (const auto& n : curve.names) out << "," << n;
  out << "\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    out << format_number(curve.t[i]);
    for (const auto& col : curve.columns) {
      out << ",";
      if (col[i]) out << format_number(*col[i]);
    }
    out << "\n";
  }
}

nlohmann::ordered_json curve_to_json(const BoundCurve& curve) {
  nlohmann::ordered_json doc;
  doc["t"] = curve.t;
  nlohmann::ordered_json cols = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < curve.names.size(); ++c) {
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (const auto& v : curve.columns[c]) {
      if (v) {
        values.push_back(*v);
      } else {
        values.push_back(nullptr);
      }
    }
    cols[curve.names[c]] = std::move(values);
  }
  doc["columns"] = std::move(cols);
  return doc;
}

}  // namespace epsbisim
