#include "config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ietrial/error.hpp"

namespace ietrial::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError(fmt::format("'{}' must be an object", where));
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(fmt::format("unknown key '{}.{}'", where, key));
    }
  }
}

enum class Range { probability, open_probability, positive, fraction, count, seed };

void check_range(double v, Range range, const std::string& name) {
  bool ok = std::isfinite(v);
  const char* want = "";
  switch (range) {
    case Range::probability: ok = ok && v >= 0.0 && v <= 1.0; want = "[0, 1]"; break;
    case Range::open_probability: ok = ok && v > 0.0 && v < 1.0; want = "(0, 1)"; break;
    case Range::positive: ok = ok && v > 0.0; want = "> 0"; break;
    case Range::fraction: ok = ok && v > 0.0 && v <= 1.0; want = "(0, 1]"; break;
    case Range::count: ok = ok && v >= 1.0 && v == std::floor(v); want = "a positive integer"; break;
    case Range::seed: ok = ok && v >= 0.0 && v == std::floor(v); want = "a non-negative integer"; break;
  }
  if (!ok) throw ConfigError(fmt::format("'{}' must be {} (got {})", name, want, v));
}

// One sweep axis: the values a field takes and how to apply one of them.
struct Axis {
  std::vector<double> values;
  std::function<void(SimConfig&, double)> apply;
};

class Builder {
 public:
  void number(const json& obj, const std::string& where, const char* key, Range range,
              std::function<void(SimConfig&, double)> apply, bool required = false) {
    const std::string name = where + "." + key;
    if (!obj.contains(key)) {
      if (required) throw ConfigError(fmt::format("missing key '{}'", name));
      return;
    }
    const json& v = obj.at(key);
    Axis axis{{}, std::move(apply)};
    auto take = [&](const json& x) {
      if (!x.is_number()) throw ConfigError(fmt::format("'{}' must be a number or an array of numbers", name));
      const double d = x.get<double>();
      check_range(d, range, name);
      axis.values.push_back(d);
    };
    if (v.is_array()) {
      if (v.empty()) throw ConfigError(fmt::format("'{}' sweep is empty", name));
      for (const json& x : v) take(x);
    } else {
      take(v);
    }
    axes_.push_back(std::move(axis));
  }

  void flag(const json& obj, const std::string& where, const char* key,
            std::function<void(SimConfig&, bool)> apply) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(fmt::format("'{}.{}' must be true or false", where, key));
    const bool b = v.get<bool>();
    fixed_.push_back([apply, b](SimConfig& c) { apply(c, b); });
  }

  void fixed(std::function<void(SimConfig&)> f) { fixed_.push_back(std::move(f)); }

  std::vector<SimConfig> expand() const {
    SimConfig base;
    for (const auto& f : fixed_) f(base);
    std::vector<SimConfig> out{base};
    for (const Axis& axis : axes_) {
      std::vector<SimConfig> next;
      next.reserve(out.size() * axis.values.size());
      for (const SimConfig& c : out) {
        for (double v : axis.values) {
          SimConfig cell = c;
          axis.apply(cell, v);
          next.push_back(std::move(cell));
        }
      }
      out = std::move(next);
    }
    return out;
  }

 private:
  std::vector<Axis> axes_;
  std::vector<std::function<void(SimConfig&)>> fixed_;
};

void read_scenario(const json& s, Builder& b) {
  reject_unknown(s, "scenario", {"total_n", "control_fraction", "p0", "rr", "p_m", "rr_neg", "rr_pos"});
  b.number(s, "scenario", "total_n", Range::count,
           [](SimConfig& c, double v) { c.scenario.total_n = static_cast<std::int64_t>(v); });
  b.number(s, "scenario", "control_fraction", Range::open_probability,
           [](SimConfig& c, double v) { c.scenario.control_fraction = v; });
  b.number(s, "scenario", "p0", Range::open_probability,
           [](SimConfig& c, double v) { c.scenario.p0 = v; });
  b.number(s, "scenario", "rr", Range::positive, [](SimConfig& c, double v) { c.scenario.rr = v; });
  b.number(s, "scenario", "p_m", Range::probability,
           [](SimConfig& c, double v) { c.scenario.p_m = v; });
  b.number(s, "scenario", "rr_neg", Range::positive,
           [](SimConfig& c, double v) { c.scenario.rr_neg = v; });
  b.number(s, "scenario", "rr_pos", Range::positive,
           [](SimConfig& c, double v) { c.scenario.rr_pos = v; });
}

void read_mechanisms(const json& m, Builder& b) {
  reject_unknown(m, "mechanisms", {"sampling", "degradation", "noncompliance"});
  if (m.contains("sampling")) {
    const json& s = m.at("sampling");
    reject_unknown(s, "mechanisms.sampling", {"f_event", "f_nonevent"});
    b.fixed([](SimConfig& c) { c.sampling = SamplingPlan::events_and_nonevents(1.0, 1.0); });
    const std::string w = "mechanisms.sampling";
    b.number(s, w, "f_event", Range::fraction, [](SimConfig& c, double v) {
      c.sampling = SamplingPlan::events_and_nonevents(v, c.sampling->fraction(1));
    });
    b.number(s, w, "f_nonevent", Range::fraction, [](SimConfig& c, double v) {
      c.sampling = SamplingPlan::events_and_nonevents(c.sampling->fraction(0), v);
    }, true);
  }
  if (m.contains("degradation")) {
    const json& d = m.at("degradation");
    const std::string w = "mechanisms.degradation";
    reject_unknown(d, w, {"loss_event", "loss_nonevent", "retest_correction"});
    b.fixed([](SimConfig& c) { c.degradation = DegradationModel{}; });
    b.number(d, w, "loss_event", Range::probability,
             [](SimConfig& c, double v) { c.degradation->loss_event = v; }, true);
    b.number(d, w, "loss_nonevent", Range::probability,
             [](SimConfig& c, double v) { c.degradation->loss_nonevent = v; }, true);
    b.flag(d, w, "retest_correction", [](SimConfig& c, bool v) { c.retest_correction = v; });
  }
  if (m.contains("noncompliance")) {
    const json& n = m.at("noncompliance");
    const std::string w = "mechanisms.noncompliance";
    reject_unknown(n, w, {"screen_event", "screen_nonevent", "control_event", "control_nonevent",
                          "correction"});
    b.fixed([](SimConfig& c) { c.noncompliance = NonComplianceModel{}; });
    auto rate = [&](const char* key, double NonComplianceModel::*field) {
      b.number(n, w, key, Range::probability,
               [field](SimConfig& c, double v) { (*c.noncompliance).*field = v; }, true);
    };
    rate("screen_event", &NonComplianceModel::screen_event);
    rate("screen_nonevent", &NonComplianceModel::screen_nonevent);
    rate("control_event", &NonComplianceModel::control_event);
    rate("control_nonevent", &NonComplianceModel::control_nonevent);
    b.flag(n, w, "correction", [](SimConfig& c, bool v) { c.compliance_correction = v; });
  }
}

void read_sim(const json& s, Builder& b) {
  reject_unknown(s, "sim", {"reps", "seed", "alpha", "workers"});
  auto scalar = [&](const char* key) -> std::optional<double> {
    if (!s.contains(key)) return std::nullopt;
    const json& v = s.at(key);
    if (!v.is_number()) throw ConfigError(fmt::format("'sim.{}' must be a number", key));
    return v.get<double>();
  };
  if (auto reps = scalar("reps")) {
    check_range(*reps, Range::count, "sim.reps");
    b.fixed([n = static_cast<std::int64_t>(*reps)](SimConfig& c) { c.reps = n; });
  }
  if (s.contains("seed")) {
    const json& v = s.at("seed");
    if (!v.is_number_unsigned()) throw ConfigError("'sim.seed' must be a non-negative integer");
    b.fixed([seed = v.get<std::uint64_t>()](SimConfig& c) { c.seed = seed; });
  }
  if (auto alpha = scalar("alpha")) {
    check_range(*alpha, Range::open_probability, "sim.alpha");
    b.fixed([a = *alpha](SimConfig& c) { c.alpha = a; });
  }
  if (auto workers = scalar("workers")) {
    check_range(*workers, Range::seed, "sim.workers");
    b.fixed([w = static_cast<unsigned>(*workers)](SimConfig& c) { c.workers = w; });
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  reject_unknown(doc, "<root>", {"scenario", "mechanisms", "sim", "output"});

  Builder b;
  if (doc.contains("scenario")) read_scenario(doc.at("scenario"), b);
  if (doc.contains("mechanisms")) read_mechanisms(doc.at("mechanisms"), b);
  if (doc.contains("sim")) read_sim(doc.at("sim"), b);

  RunConfig out;
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o.at("path").is_string()) throw ConfigError("'output.path' must be a string");
      out.out_path = o.at("path").get<std::string>();
    }
    if (o.contains("format")) {
      if (!o.at("format").is_string()) throw ConfigError("'output.format' must be a string");
      out.format = parse_format(o.at("format").get<std::string>());
    }
  }
  out.cells = b.expand();
  for (const SimConfig& c : out.cells) {
    if (c.retest_correction && c.compliance_correction) {
      throw ConfigError("retest and compliance corrections cannot be combined");
    }
  }
  return out;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read config '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig default_config() {
  RunConfig out;
  out.cells.emplace_back();
  return out;
}

}  // namespace ietrial::cli
