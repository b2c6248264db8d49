#pragma once

#include <string>

#include "json.hpp"

#include "epsbisim/model.hpp"

namespace epsbisim {

struct LoadOptions {
  // Rescale rows whose sum deviates from 1 instead of rejecting them.
  bool renormalize = false;
};

// Accepts a JSON number or a string of the form "exp(x)".
double parse_rate(const nlohmann::json& value);

Ctmc model_from_json(const nlohmann::json& doc, const LoadOptions& opts = {});
nlohmann::ordered_json model_to_json(const Ctmc& m);

Ctmc load_model(const std::string& path, const LoadOptions& opts = {});
std::string dump_model(const Ctmc& m);
void save_model(const Ctmc& m, const std::string& path);

}  // namespace epsbisim
