#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace epsbisim {

// Missing cells (a bound that does not apply at a grid point) are nullopt.
struct BoundCurve {
  std::vector<double> t;
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> columns;

  void add(const std::string& name, const std::vector<double>& values);
  void add(const std::string& name, std::vector<std::optional<double>> values);
  const std::vector<std::optional<double>>& column(const std::string& name) const;
  bool has(const std::string& name) const;
};

std::vector<double> linear_grid(double tmax, std::size_t steps);

// 17 significant digits, empty cell for missing values.
std::string format_number(double v);
void write_csv(std::ostream& out, const BoundCurve& curve);
nlohmann::ordered_json curve_to_json(const BoundCurve& curve);

}  // namespace epsbisim
