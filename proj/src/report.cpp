#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dopt/bench.hpp"
#include "dopt/error.hpp"

namespace dopt {

using nlohmann::json;

namespace {

json real_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::optional<double> read_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json pairs_to_json(const std::vector<ComparisonId>& pairs) {
  json out = json::array();
  for (const ComparisonId& e : pairs) out.push_back(json::array({e.i, e.j}));
  return out;
}

std::vector<ComparisonId> pairs_from_json(const json& j) {
  std::vector<ComparisonId> out;
  for (const json& p : j) out.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
  return out;
}

json timings_to_json(const PhaseTimings& t) {
  return {{"preprocess", t.preprocess}, {"find_max", t.find_max}, {"update", t.update},
          {"sweep", t.sweep}, {"total", t.total}};
}

PhaseTimings timings_from_json(const json& j) {
  PhaseTimings t;
  if (j.is_null()) return t;
  t.preprocess = j.value("preprocess", 0.0);
  t.find_max = j.value("find_max", 0.0);
  t.update = j.value("update", 0.0);
  t.sweep = j.value("sweep", 0.0);
  t.total = j.value("total", 0.0);
  return t;
}

json stats_of(const std::vector<double>& v) {
  if (v.empty()) return {{"count", 0}, {"mean", nullptr}, {"std", nullptr}};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {{"count", v.size()}, {"mean", mean}, {"std", sd}};
}

json aggregates(const std::vector<RepeatRow>& rows) {
  struct Series {
    std::vector<double> objective, auc_absolute, auc_comparison, touches;
    std::vector<double> preprocess, find_max, update, sweep, total;
    std::size_t errors = 0;
  };
  std::map<std::string, Series> by_algo;
  for (const RepeatRow& r : rows) {
    Series& s = by_algo[r.algorithm];
    if (!r.error.empty()) {
      ++s.errors;
      continue;
    }
    if (r.objective && std::isfinite(*r.objective)) s.objective.push_back(*r.objective);
    if (r.auc_absolute) s.auc_absolute.push_back(*r.auc_absolute);
    if (r.auc_comparison) s.auc_comparison.push_back(*r.auc_comparison);
    s.touches.push_back(static_cast<double>(r.touches));
    s.preprocess.push_back(r.timings.preprocess);
    s.find_max.push_back(r.timings.find_max);
    s.update.push_back(r.timings.update);
    s.sweep.push_back(r.timings.sweep);
    s.total.push_back(r.timings.total);
  }
  json out = json::object();
  for (const auto& [algo, s] : by_algo) {
    out[algo] = {{"objective", stats_of(s.objective)},
                 {"auc_absolute", stats_of(s.auc_absolute)},
                 {"auc_comparison", stats_of(s.auc_comparison)},
                 {"touches", stats_of(s.touches)},
                 {"errors", s.errors},
                 {"timings",
                  {{"preprocess", stats_of(s.preprocess)}, {"find_max", stats_of(s.find_max)},
                   {"update", stats_of(s.update)}, {"sweep", stats_of(s.sweep)},
                   {"total", stats_of(s.total)}}}};
  }
  return out;
}

json row_to_json(const RepeatRow& r) {
  return {{"repeat", r.repeat},
          {"fold", r.fold},
          {"seed", r.seed},
          {"algorithm", r.algorithm},
          {"n", r.n},
          {"d", r.d},
          {"k", r.k},
          {"selected", pairs_to_json(r.selected)},
          {"objective", real_or_null(r.objective)},
          {"auc_absolute", real_or_null(r.auc_absolute)},
          {"auc_comparison", real_or_null(r.auc_comparison)},
          {"lambda_fit", real_or_null(r.lambda_fit)},
          {"touches", r.touches},
          {"timings", timings_to_json(r.timings)},
          {"error", r.error}};
}

RepeatRow row_from_json(const json& j) {
  RepeatRow r;
  r.repeat = j.at("repeat").get<std::size_t>();
  r.fold = j.at("fold").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.d = j.at("d").get<std::size_t>();
  r.k = j.at("k").get<std::size_t>();
  r.selected = pairs_from_json(j.at("selected"));
  r.objective = read_optional(j, "objective");
  r.auc_absolute = read_optional(j, "auc_absolute");
  r.auc_comparison = read_optional(j, "auc_comparison");
  r.lambda_fit = read_optional(j, "lambda_fit");
  r.touches = j.at("touches").get<std::size_t>();
  r.timings = timings_from_json(j.value("timings", json()));
  r.error = j.value("error", std::string());
  return r;
}

json verify_to_json(const VerifyRow& v) {
  json selected = json::object();
  for (const auto& [tag, pairs] : v.selected) selected[tag] = pairs_to_json(pairs);
  return {{"instance", v.instance},
          {"seed", v.seed},
          {"n", v.n},
          {"d", v.d},
          {"k", v.k},
          {"exact_match", v.exact_match},
          {"passed", v.passed},
          {"objective_ng", real_or_null(v.objective_ng)},
          {"max_relative_diff", v.max_relative_diff},
          {"mismatched", v.mismatched},
          {"failed", v.failed},
          {"selected", selected},
          {"error", v.error}};
}

VerifyRow verify_from_json(const json& j) {
  VerifyRow v;
  v.instance = j.at("instance").get<std::size_t>();
  v.seed = j.at("seed").get<std::uint64_t>();
  v.n = j.at("n").get<std::size_t>();
  v.d = j.at("d").get<std::size_t>();
  v.k = j.at("k").get<std::size_t>();
  v.exact_match = j.at("exact_match").get<bool>();
  v.passed = j.at("passed").get<bool>();
  v.objective_ng = read_optional(j, "objective_ng");
  v.max_relative_diff = j.at("max_relative_diff").get<double>();
  v.mismatched = j.at("mismatched").get<std::vector<std::string>>();
  v.failed = j.at("failed").get<std::vector<std::string>>();
  for (const auto& [tag, pairs] : j.at("selected").items()) v.selected[tag] = pairs_from_json(pairs);
  v.error = j.value("error", std::string());
  return v;
}

void dump_string(std::string& out, const std::string& s) { out += json(s).dump(); }

void dump_value(std::string& out, const json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: keys sorted
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_string(out, it.key());
        out += ": ";
        dump_value(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalar_only = true;
      for (const json& e : j) scalar_only = scalar_only && !e.is_structured();
      if (scalar_only) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_value(out, j[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_value(out, j[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    case json::value_t::string:
      dump_string(out, j.get<std::string>());
      return;
    default:
      out += j.dump();
      return;
  }
}

void strip_keys(json& j, const std::set<std::string>& keys) {
  if (j.is_object()) {
    for (const auto& key : keys) j.erase(key);
    for (auto& [_, v] : j.items()) strip_keys(v, keys);
  } else if (j.is_array()) {
    for (json& v : j) strip_keys(v, keys);
  }
}

std::string join_pairs(const std::vector<ComparisonId>& pairs) {
  std::string s;
  for (const ComparisonId& e : pairs) {
    if (!s.empty()) s += ';';
    s += std::to_string(e.i) + '-' + std::to_string(e.j);
  }
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& t : items) s += (s.empty() ? "" : ";") + t;
  return s;
}

std::string csv_real(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

json report_to_json(const Report& report) {
  json rows = json::array();
  for (const RepeatRow& r : report.rows) rows.push_back(row_to_json(r));
  json verify = json::array();
  for (const VerifyRow& v : report.verify) verify.push_back(verify_to_json(v));
  return {{"schema_version", Report::kSchemaVersion},
          {"command", report.command},
          {"config", report.config},
          {"passed", report.passed},
          {"summary", report.summary},
          {"rows", rows},
          {"verify", verify},
          {"aggregates", aggregates(report.rows)},
          {"runtime", {{"workers", report.workers}}}};
}

Report report_from_json(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != Report::kSchemaVersion) {
    throw Error(Errc::parse_error, "unsupported schema_version " + std::to_string(version));
  }
  Report report;
  report.command = j.at("command").get<std::string>();
  report.config = j.at("config");
  report.passed = j.at("passed").get<bool>();
  report.summary = j.value("summary", std::string());
  for (const json& r : j.at("rows")) report.rows.push_back(row_from_json(r));
  for (const json& v : j.at("verify")) report.verify.push_back(verify_from_json(v));
  if (j.contains("runtime")) report.workers = j["runtime"].value("workers", std::size_t{0});
  return report;
}

std::string dump_json(const json& j) {
  std::string out;
  dump_value(out, j, 0);
  out += '\n';
  return out;
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  if (report.command == "verify") {
    out << "instance,seed,n,d,k,exact_match,passed,objective_ng,max_relative_diff,mismatched,failed,"
           "error\n";
    for (const VerifyRow& v : report.verify) {
      out << v.instance << ',' << v.seed << ',' << v.n << ',' << v.d << ',' << v.k << ','
          << (v.exact_match ? 1 : 0) << ',' << (v.passed ? 1 : 0) << ','
          << csv_real(v.objective_ng) << ',' << csv_real(v.max_relative_diff) << ','
          << join(v.mismatched) << ',' << join(v.failed) << ',' << csv_text(v.error) << '\n';
    }
    return out.str();
  }
  out << "repeat,fold,seed,algorithm,n,d,k,objective,auc_absolute,auc_comparison,lambda_fit,"
         "touches,t_preprocess,t_find_max,t_update,t_sweep,t_total,error,selected\n";
  for (const RepeatRow& r : report.rows) {
    out << r.repeat << ',' << r.fold << ',' << r.seed << ',' << r.algorithm << ',' << r.n << ','
        << r.d << ',' << r.k << ',' << csv_real(r.objective) << ',' << csv_real(r.auc_absolute)
        << ',' << csv_real(r.auc_comparison) << ',' << csv_real(r.lambda_fit) << ',' << r.touches
        << ',' << csv_real(r.timings.preprocess) << ',' << csv_real(r.timings.find_max) << ','
        << csv_real(r.timings.update) << ',' << csv_real(r.timings.sweep) << ','
        << csv_real(r.timings.total) << ',' << csv_text(r.error) << ',' << join_pairs(r.selected)
        << '\n';
  }
  return out.str();
}

std::string report_hash(const Report& report) {
  json j = report_to_json(report);
  strip_keys(j, {"timings", "runtime"});
  const std::string text = dump_json(j);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void emit_report(const Report& report, ReportFormat format, const std::string& path) {
  const std::string text =
      format == ReportFormat::json ? dump_json(report_to_json(report)) : report_to_csv(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw Error(Errc::io_error, "write failed: " + path);
}

}  // namespace dopt
