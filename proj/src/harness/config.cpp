#include "fattree/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "fattree/flow_experiment.hpp"
#include "fattree/harness/csv.hpp"
#include "fattree/packet_sim.hpp"

namespace fattree::harness {

using nlohmann::json;

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTopo: return "topo";
    case ExperimentKind::kFlowExp: return "flow-exp";
    case ExperimentKind::kPacketExp: return "packet-exp";
    case ExperimentKind::kFluid: return "fluid";
    case ExperimentKind::kCtmc: return "ctmc";
  }
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (auto k : {ExperimentKind::kTopo, ExperimentKind::kFlowExp, ExperimentKind::kPacketExp,
                 ExperimentKind::kFluid, ExperimentKind::kCtmc}) {
    if (experiment_name(k) == name) return k;
  }
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

std::string ThresholdSelector::label() const {
  switch (kind) {
    case Kind::kFlowSchedule: return "eq4";
    case Kind::kPacketSchedule: return "eq7";
    case Kind::kFixed: return value == 0.0 ? "zero" : format_number(value);
  }
  return "?";
}

std::string SchemeEntry::label() const {
  if (kind != SchemeKind::kDrb) return scheme_name(kind);
  return "drb(" + threshold.label() + ")";
}

SchemeConfig SchemeEntry::resolve_flow(int c, std::int64_t hosts) const {
  if (kind != SchemeKind::kDrb) return SchemeConfig{kind, 0.0};
  switch (threshold.kind) {
    case ThresholdSelector::Kind::kFlowSchedule: return SchemeConfig::drb(flow_threshold(c, hosts));
    case ThresholdSelector::Kind::kPacketSchedule:
      throw ConfigError("schemes", "the eq7 schedule applies to packet-exp only");
    case ThresholdSelector::Kind::kFixed: break;
  }
  return SchemeConfig::drb(threshold.value);
}

SchemeConfig SchemeEntry::resolve_packet(double rho) const {
  if (kind != SchemeKind::kDrb) return SchemeConfig{kind, 0.0};
  switch (threshold.kind) {
    case ThresholdSelector::Kind::kPacketSchedule: return SchemeConfig::drb(packet_threshold(rho));
    case ThresholdSelector::Kind::kFlowSchedule:
      throw ConfigError("schemes", "the eq4 schedule applies to flow-exp only");
    case ThresholdSelector::Kind::kFixed: break;
  }
  return SchemeConfig::drb(threshold.value);
}

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const {
    used_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) const {
    used_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T number(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return as_number<T>(raw(key), at(key));
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected a boolean");
    return v.get<bool>();
  }

  template <typename T>
  static T as_number(const json& v, const std::string& path) {
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
      }
      return v.get<T>();
    } else {
      if (!v.is_number()) throw ConfigError(path, "expected a number");
      return v.get<T>();
    }
  }

  void reject_unknown() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError(at(item.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

ThresholdSelector parse_threshold(const json& v, const std::string& path) {
  ThresholdSelector sel;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "eq4") sel.kind = ThresholdSelector::Kind::kFlowSchedule;
    else if (s == "eq7") sel.kind = ThresholdSelector::Kind::kPacketSchedule;
    else if (s == "zero") sel.value = 0.0;
    else throw ConfigError(path, "expected a number or one of eq4, eq7, zero");
    return sel;
  }
  if (!v.is_number()) throw ConfigError(path, "expected a number or one of eq4, eq7, zero");
  sel.value = v.get<double>();
  if (!std::isfinite(sel.value) || sel.value < 0.0) {
    throw ConfigError(path, "threshold must be finite and non-negative");
  }
  return sel;
}

SchemeEntry parse_scheme_entry(const json& v, const std::string& path) {
  SchemeEntry entry;
  auto kind_of = [&](const json& name, const std::string& p) {
    if (!name.is_string()) throw ConfigError(p, "expected a scheme name");
    try {
      return parse_scheme(name.get<std::string>());
    } catch (const ParameterError& e) {
      throw ConfigError(p, e.what());
    }
  };
  if (v.is_string()) {
    entry.kind = kind_of(v, path);
    return entry;
  }
  Reader r(v, path);
  if (!r.has("scheme")) throw ConfigError(r.at("scheme"), "required field missing");
  entry.kind = kind_of(r.raw("scheme"), r.at("scheme"));
  if (r.has("threshold")) {
    if (entry.kind != SchemeKind::kDrb) {
      throw ConfigError(r.at("threshold"), "only drb takes a threshold");
    }
    entry.threshold = parse_threshold(r.raw("threshold"), r.at("threshold"));
  }
  r.reject_unknown();
  return entry;
}

template <typename T>
std::vector<T> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(Reader::as_number<T>(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  Reader r(j, "");
  if (!r.has("experiment")) throw ConfigError("experiment", "required field missing");
  const json& kind = r.raw("experiment");
  if (!kind.is_string()) throw ConfigError("experiment", "expected a string");
  cfg.kind = parse_experiment(kind.get<std::string>());

  if (r.has("topology")) {
    Reader t(r.raw("topology"), "topology");
    cfg.layers = t.number<int>("layers", cfg.layers);
    cfg.radix_half = t.number<int>("radix_half", cfg.radix_half);
    t.reject_unknown();
  }
  if (cfg.layers < 2) throw ConfigError("topology.layers", "must be >= 2");
  if (cfg.radix_half < 2) throw ConfigError("topology.radix_half", "must be >= 2");

  if (r.has("schemes")) {
    const json& s = r.raw("schemes");
    if (!s.is_array()) throw ConfigError("schemes", "expected an array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string p = "schemes[" + std::to_string(i) + "]";
      SchemeEntry e = parse_scheme_entry(s[i], p);
      if (!labels.insert(e.label()).second) throw ConfigError(p, "duplicate scheme " + e.label());
      if (cfg.kind == ExperimentKind::kFlowExp &&
          e.threshold.kind == ThresholdSelector::Kind::kPacketSchedule) {
        throw ConfigError(p + ".threshold", "eq7 applies to packet-exp only");
      }
      if (cfg.kind == ExperimentKind::kPacketExp &&
          e.threshold.kind == ThresholdSelector::Kind::kFlowSchedule) {
        throw ConfigError(p + ".threshold", "eq4 applies to flow-exp only");
      }
      cfg.schemes.push_back(e);
    }
  }

  cfg.base_seed = r.number<std::uint64_t>("base_seed", cfg.base_seed);
  cfg.repetitions = r.number<int>("repetitions", cfg.repetitions);
  if (cfg.repetitions < 1) throw ConfigError("repetitions", "must be >= 1");

  if (r.has("c_values")) cfg.c_values = number_list<int>(r.raw("c_values"), "c_values");
  if (r.has("c_range")) {
    if (!cfg.c_values.empty()) throw ConfigError("c_range", "give either c_values or c_range");
    Reader cr(r.raw("c_range"), "c_range");
    const int lo = cr.number<int>("min", 1);
    const int hi = cr.number<int>("max", lo);
    cr.reject_unknown();
    if (lo < 1 || hi < lo) throw ConfigError("c_range", "need 1 <= min <= max");
    for (int c = lo; c <= hi; ++c) cfg.c_values.push_back(c);
  }
  for (std::size_t i = 0; i < cfg.c_values.size(); ++i) {
    if (cfg.c_values[i] < 1) {
      throw ConfigError("c_values[" + std::to_string(i) + "]", "must be >= 1");
    }
  }

  if (r.has("rho_values")) cfg.rho_values = number_list<double>(r.raw("rho_values"), "rho_values");
  for (std::size_t i = 0; i < cfg.rho_values.size(); ++i) {
    const double rho = cfg.rho_values[i];
    if (!(rho > 0.0 && rho < 1.0)) {
      throw ConfigError("rho_values[" + std::to_string(i) + "]", "must lie in (0, 1)");
    }
  }
  cfg.horizon_slots = r.number<int>("horizon_slots", cfg.horizon_slots);
  cfg.warmup_slots = r.number<int>("warmup_slots", cfg.warmup_slots);
  if (cfg.horizon_slots < 1) throw ConfigError("horizon_slots", "must be >= 1");
  if (cfg.warmup_slots < 0 || cfg.warmup_slots >= cfg.horizon_slots) {
    throw ConfigError("warmup_slots", "must lie in [0, horizon_slots)");
  }
  cfg.fixed_permutation = r.boolean("fixed_permutation", cfg.fixed_permutation);
  cfg.max_queued = r.number<std::int64_t>("max_queued", cfg.max_queued);
  if (cfg.max_queued < 0) throw ConfigError("max_queued", "must be >= 0");

  cfg.lambda = r.number<double>("lambda", cfg.lambda);
  cfg.threshold = r.number<int>("threshold", cfg.threshold);
  cfg.i_max = r.number<int>("i_max", cfg.i_max);
  cfg.tol = r.number<double>("tol", cfg.tol);
  cfg.queues = r.number<std::int64_t>("queues", cfg.queues);
  cfg.burn_in_events = r.number<std::int64_t>("burn_in_events", cfg.burn_in_events);
  cfg.events = r.number<std::int64_t>("events", cfg.events);
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) throw ConfigError("lambda", "must lie in (0, 1)");
  if (cfg.threshold < 0) throw ConfigError("threshold", "must be >= 0");
  if (cfg.i_max < cfg.threshold + 10) throw ConfigError("i_max", "must be >= threshold + 10");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol", "must be > 0");
  if (cfg.queues < 2) throw ConfigError("queues", "must be >= 2");
  if (cfg.burn_in_events < 0) throw ConfigError("burn_in_events", "must be >= 0");
  if (cfg.events < 1) throw ConfigError("events", "must be >= 1");

  cfg.dump_adjacency = r.boolean("dump_adjacency", cfg.dump_adjacency);
  cfg.plots = r.boolean("plots", cfg.plots);
  r.reject_unknown();

  if (cfg.kind == ExperimentKind::kFlowExp || cfg.kind == ExperimentKind::kPacketExp) {
    if (cfg.schemes.empty()) throw ConfigError("schemes", "must be non-empty");
  }
  if (cfg.kind == ExperimentKind::kFlowExp && cfg.c_values.empty()) {
    throw ConfigError("c_values", "must be non-empty");
  }
  if (cfg.kind == ExperimentKind::kPacketExp && cfg.rho_values.empty()) {
    throw ConfigError("rho_values", "must be non-empty");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment_name(kind);
  j["topology"] = {{"layers", layers}, {"radix_half", radix_half}};
  j["base_seed"] = base_seed;
  switch (kind) {
    case ExperimentKind::kTopo:
      j["dump_adjacency"] = dump_adjacency;
      break;
    case ExperimentKind::kFlowExp:
    case ExperimentKind::kPacketExp: {
      json schemes = json::array();
      for (const auto& s : this->schemes) {
        if (s.kind != SchemeKind::kDrb) {
          schemes.push_back(scheme_name(s.kind));
        } else if (s.threshold.kind == ThresholdSelector::Kind::kFixed) {
          schemes.push_back({{"scheme", "drb"}, {"threshold", s.threshold.value}});
        } else {
          schemes.push_back({{"scheme", "drb"}, {"threshold", s.threshold.label()}});
        }
      }
      j["schemes"] = schemes;
      j["repetitions"] = repetitions;
      if (kind == ExperimentKind::kFlowExp) {
        j["c_values"] = c_values;
      } else {
        j["rho_values"] = rho_values;
        j["horizon_slots"] = horizon_slots;
        j["warmup_slots"] = warmup_slots;
        j["fixed_permutation"] = fixed_permutation;
        j["max_queued"] = max_queued;
      }
      j["plots"] = plots;
      break;
    }
    case ExperimentKind::kFluid:
      j["lambda"] = lambda;
      j["threshold"] = threshold;
      j["i_max"] = i_max;
      j["tol"] = tol;
      break;
    case ExperimentKind::kCtmc:
      j["lambda"] = lambda;
      j["threshold"] = threshold;
      j["i_max"] = i_max;
      j["queues"] = queues;
      j["burn_in_events"] = burn_in_events;
      j["events"] = events;
      break;
  }
  return j;
}

}  // namespace fattree::harness
