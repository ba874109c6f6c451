#include "domcert/system.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "domcert/errors.hpp"

namespace domcert {

using nlohmann::json;

namespace {

std::string_view trim_ws(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_decimal(std::string_view s, std::string_view whole) {
  const std::string buf(trim_ws(s));
  if (buf.empty()) throw ParseError("empty number in '" + std::string(whole) + "'");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError("malformed number '" + std::string(whole) + "'");
  }
  return v;
}

double real_from_json(const json& j, const std::string& field) {
  try {
    if (j.is_number()) {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw ParseError("non-finite number");
      return v;
    }
    if (j.is_string()) return parse_real_literal(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(field + ": " + e.what());
  }
  throw ParseError(field + ": expected a number or a fraction string");
}

Matrix matrix_from_json(const json& j, int n, const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw ParseError(field + ": expected " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    const std::string rf = field + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw ParseError(rf + ": expected " + std::to_string(n) + " entries");
    }
    for (int k = 0; k < n; ++k) {
      m(i, k) = real_from_json(row[static_cast<std::size_t>(k)], rf + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ParseError(where + ": unknown field '" + item.key() + "'");
    }
  }
}

Automaton automaton_from_json(const json& j, int alphabet_size, const std::string& field) {
  if (!j.is_object()) throw ParseError(field + ": expected an object");
  reject_unknown_keys(j, {"states", "transitions", "alphabet_size"}, field);
  if (!j.contains("states") || !j["states"].is_array()) {
    throw ParseError(field + ".states: expected an array of state names");
  }
  if (!j.contains("transitions") || !j["transitions"].is_array()) {
    throw ParseError(field + ".transitions: expected an array of [from, label, to]");
  }
  std::vector<State> states;
  for (const auto& s : j["states"]) {
    if (!s.is_string()) throw ParseError(field + ".states: state names must be strings");
    states.push_back(s.get<std::string>());
  }
  std::vector<Transition> transitions;
  int max_label = 0;
  for (std::size_t k = 0; k < j["transitions"].size(); ++k) {
    const json& t = j["transitions"][k];
    const std::string tf = field + ".transitions[" + std::to_string(k) + "]";
    if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[2].is_string()) {
      throw ParseError(tf + ": expected [from, label, to]");
    }
    Label label = 0;
    if (t[1].is_number_integer()) {
      label = t[1].get<int>();
    } else if (t[1].is_string()) {
      try {
        std::size_t used = 0;
        const std::string s = t[1].get<std::string>();
        label = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw ParseError(tf + ": label must be an integer");
      }
    } else {
      throw ParseError(tf + ": label must be an integer");
    }
    max_label = std::max(max_label, label);
    transitions.push_back({t[0].get<std::string>(), label, t[2].get<std::string>()});
  }
  if (j.contains("alphabet_size")) {
    if (!j["alphabet_size"].is_number_integer()) {
      throw ParseError(field + ".alphabet_size: expected an integer");
    }
    const int declared = j["alphabet_size"].get<int>();
    if (alphabet_size > 0 && declared != alphabet_size) {
      throw ParseError(field + ".alphabet_size: disagrees with the number of modes");
    }
    alphabet_size = declared;
  }
  if (alphabet_size <= 0) alphabet_size = std::max(max_label, 1);
  try {
    return Automaton(std::move(states), alphabet_size, std::move(transitions));
  } catch (const InvalidInput& e) {
    throw ParseError(field + ": " + e.what());
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

json automaton_to_json(const Automaton& aut) {
  json states = json::array();
  for (const auto& s : aut.states()) states.push_back(s);
  json transitions = json::array();
  for (const auto& t : aut.transitions()) transitions.push_back(json::array({t.from, t.label, t.to}));
  return json{{"alphabet_size", aut.alphabet_size()}, {"states", states}, {"transitions", transitions}};
}

SwitchingSystem system_from_json(const json& root) {
  if (!root.is_object()) throw ParseError("system: expected a JSON object");
  reject_unknown_keys(root, {"n", "modes", "automaton", "language", "description"}, "system");
  if (!root.contains("n") || !root["n"].is_number_integer() || root["n"].get<int>() < 1) {
    throw ParseError("system.n: expected a positive integer");
  }
  SwitchingSystem sys;
  sys.n = root["n"].get<int>();
  if (!root.contains("modes") || !root["modes"].is_object() || root["modes"].empty()) {
    throw ParseError("system.modes: expected a non-empty object of label -> matrix");
  }
  const json& modes = root["modes"];
  const int count = static_cast<int>(modes.size());
  for (int label = 1; label <= count; ++label) {
    const std::string key = std::to_string(label);
    if (!modes.contains(key)) {
      throw ParseError("system.modes: labels must be contiguous 1.." + std::to_string(count) +
                       " (missing '" + key + "')");
    }
    sys.modes.push_back(matrix_from_json(modes[key], sys.n, "system.modes." + key));
  }
  if (!root.contains("automaton")) throw ParseError("system.automaton: missing");
  sys.automaton = automaton_from_json(root["automaton"], count, "system.automaton");
  if (root.contains("language")) {
    sys.language = automaton_from_json(root["language"], count, "system.language");
  }
  sys.check();
  return sys;
}

}  // namespace

const Matrix& SwitchingSystem::mode(Label label) const {
  if (label < 1 || label > alphabet_size()) {
    throw InvalidInput("switching system: no mode for label " + std::to_string(label));
  }
  return modes[static_cast<std::size_t>(label - 1)];
}

void SwitchingSystem::check() const {
  if (n < 1) throw InvalidInput("switching system: dimension must be positive");
  if (modes.empty()) throw InvalidInput("switching system: no modes");
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k].rows() != n || modes[k].cols() != n) {
      throw InvalidInput("switching system: mode " + std::to_string(k + 1) + " is not " +
                         std::to_string(n) + "x" + std::to_string(n));
    }
    require_finite(modes[k], "switching system mode " + std::to_string(k + 1));
  }
  if (automaton.alphabet_size() != alphabet_size()) {
    throw InvalidInput("switching system: automaton alphabet differs from the mode labels");
  }
  if (language && language->alphabet_size() != alphabet_size()) {
    throw InvalidInput("switching system: language alphabet differs from the mode labels");
  }
}

double parse_real_literal(std::string_view text) {
  const std::string_view s = trim_ws(text);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s, text);
  const double num = parse_decimal(s.substr(0, slash), text);
  const double den = parse_decimal(s.substr(slash + 1), text);
  if (den == 0.0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

SwitchingSystem parse_system(std::string_view text) { return system_from_json(parse_json(text)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SwitchingSystem load_system(const std::string& path) {
  try {
    return parse_system(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Automaton parse_automaton_file(std::string_view text) {
  const json root = parse_json(text);
  if (root.is_object() && root.contains("automaton")) return system_from_json(root).automaton;
  return automaton_from_json(root, 0, "automaton");
}

Automaton load_automaton(const std::string& path) {
  try {
    return parse_automaton_file(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string canonical_system_text(const SwitchingSystem& sys) {
  json modes = json::object();
  for (int label = 1; label <= sys.alphabet_size(); ++label) {
    const Matrix& a = sys.mode(label);
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
      rows.push_back(row);
    }
    modes[std::to_string(label)] = rows;
  }
  json root{{"n", sys.n}, {"modes", modes}, {"automaton", automaton_to_json(sys.automaton)}};
  if (sys.language) root["language"] = automaton_to_json(*sys.language);
  return root.dump();
}

std::string system_fingerprint(const SwitchingSystem& sys) {
  const std::string text = canonical_system_text(sys);
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned char b : digest) os << std::setw(2) << static_cast<int>(b);
  return os.str();
}

SwitchingSystem trimmed(const SwitchingSystem& sys) {
  SwitchingSystem out = sys;
  out.automaton = trim_core(sys.automaton);
  return out;
}

}  // namespace domcert
