#include "epsbisim/model_io.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

namespace epsbisim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double parse_number_text(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw Error(ErrorKind::Parse, "not a number: '" + text + "'");
  return v;
}

std::string id_of(const json& v, const char* what) {
  if (!v.is_string()) throw Error(ErrorKind::Parse, std::string(what) + " must be a state id string");
  return v.get<std::string>();
}

std::vector<std::string> id_list(const json& doc, const char* key) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  const json& v = doc.at(key);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& x : v) out.push_back(id_of(x, key));
  } else if (!v.is_null()) {
    throw Error(ErrorKind::Parse, std::string("'") + key + "' must be a list of state ids");
  }
  return out;
}

}  // namespace

double parse_rate(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) throw Error(ErrorKind::Parse, "exit_rate must be a number or \"exp(x)\"");
  static const std::regex exp_form(R"(^\s*exp\(\s*([^()]*?)\s*\)\s*$)");
  const std::string text = value.get<std::string>();
  std::smatch match;
  if (std::regex_match(text, match, exp_form)) return std::exp(parse_number_text(match[1].str()));
  return parse_number_text(text);
}

Ctmc model_from_json(const json& doc, const LoadOptions& opts) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "model must be a JSON object");
  if (!doc.contains("states") || !doc.at("states").is_array()) {
    throw Error(ErrorKind::Parse, "model needs a 'states' array");
  }
  CtmcBuilder b;
  bool any_reward = false;
  for (const auto& st : doc.at("states")) {
    if (!st.is_object() || !st.contains("id")) throw Error(ErrorKind::Parse, "state entries need an 'id'");
    std::string id = id_of(st.at("id"), "id");
    LabelSet labels;
    if (st.contains("labels")) {
      for (const auto& l : st.at("labels")) {
        if (!l.is_string()) throw Error(ErrorKind::Parse, "labels must be strings");
        labels.insert(l.get<std::string>());
      }
    }
    if (!st.contains("exit_rate")) throw Error(ErrorKind::Parse, "state '" + id + "' has no exit_rate");
    const json& rate = st.at("exit_rate");
    std::optional<double> reward;
    if (st.contains("reward")) {
      if (!st.at("reward").is_number()) throw Error(ErrorKind::Parse, "reward must be a number");
      reward = st.at("reward").get<double>();
      any_reward = true;
    }
    b.state(id, std::move(labels), parse_rate(rate), reward);
    if (rate.is_string()) b.rate_text(id, rate.get<std::string>());
  }
  if (doc.contains("transitions")) {
    for (const auto& tr : doc.at("transitions")) {
      if (!tr.is_object() || !tr.contains("from") || !tr.contains("to") || !tr.contains("prob") ||
          !tr.at("prob").is_number()) {
        throw Error(ErrorKind::Parse, "transitions need 'from', 'to' and numeric 'prob'");
      }
      b.edge(id_of(tr.at("from"), "from"), id_of(tr.at("to"), "to"), tr.at("prob").get<double>());
    }
  }
  if (doc.contains("initial")) b.initial(id_of(doc.at("initial"), "initial"));
  auto goals = id_list(doc, "goal");
  auto fails = id_list(doc, "fail");
  if (fails.size() > 1) throw Error(ErrorKind::Parse, "at most one fail state may be given");
  if (goals.size() == 1) b.goal(goals.front());
  if (fails.size() == 1) b.fail(fails.front());

  Ctmc m = b.build_unchecked();
  if (any_reward && m.rewards) {
    for (const auto& st : doc.at("states")) {
      if (!st.contains("reward")) {
        throw Error(ErrorKind::MissingRewards, "rewards must be given for every state or none");
      }
    }
  }
  if (opts.renormalize) {
    for (Eigen::Index s = 0; s < m.chain.P.rows(); ++s) {
      double sum = m.chain.P.row(s).sum();
      if (sum > 0.0) m.chain.P.row(s) /= sum;
    }
  }
  if (goals.size() > 1) {
    validate(m);
    std::vector<std::size_t> idx;
    for (const auto& g : goals) idx.push_back(m.chain.require_index(g));
    m.chain.fail.reset();
    m = normalize_goal(m, idx);
  }
  validate(m);
  return m;
}

ordered_json model_to_json(const Ctmc& m) {
  ordered_json doc;
  ordered_json states = ordered_json::array();
  for (std::size_t s = 0; s < m.size(); ++s) {
    ordered_json st;
    st["id"] = m.chain.ids[s];
    st["labels"] = ordered_json::array();
    for (const auto& l : m.chain.labels[s]) st["labels"].push_back(l);
    if (s < m.rate_text.size() && !m.rate_text[s].empty()) {
      st["exit_rate"] = m.rate_text[s];
    } else {
      st["exit_rate"] = m.E(s);
    }
    if (m.rewards) st["reward"] = (*m.rewards)(s);
    states.push_back(std::move(st));
  }
  doc["states"] = std::move(states);
  ordered_json trans = ordered_json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m.P()(i, j) == 0.0) continue;
      ordered_json tr;
      tr["from"] = m.chain.ids[i];
      tr["to"] = m.chain.ids[j];
      tr["prob"] = m.P()(i, j);
      trans.push_back(std::move(tr));
    }
  }
  doc["transitions"] = std::move(trans);
  doc["initial"] = m.chain.ids[m.initial()];
  if (m.goal()) doc["goal"] = ordered_json::array({m.chain.ids[*m.goal()]});
  if (m.fail()) doc["fail"] = ordered_json::array({m.chain.ids[*m.fail()]});
  return doc;
}

Ctmc load_model(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
  return model_from_json(doc, opts);
}

std::string dump_model(const Ctmc& m) { return model_to_json(m).dump(2) + "\n"; }

void save_model(const Ctmc& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Parse, "cannot write '" + path + "'");
  out << dump_model(m);
}

}  // namespace epsbisim
