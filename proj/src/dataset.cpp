#include "dopt/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "dopt/error.hpp"

namespace dopt {

namespace {

struct CsvReader {
  std::ifstream in;
  std::string path;
  std::size_t line_no = 0;

  explicit CsvReader(const std::string& p) : in(p), path(p) {
    if (!in) throw Error(Errc::io_error, "cannot open " + p);
  }

  bool next(std::vector<std::string_view>& fields, std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      std::string_view rest(line);
      while (true) {
        const auto comma = rest.find(',');
        fields.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(Errc code, const std::string& what) const {
    throw Error(code, path + ":" + std::to_string(line_no) + ": " + what);
  }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  double real(std::string_view s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(Errc::parse_error, "bad number '" + std::string(s) + "'");
    return v;
  }

  std::int64_t integer(std::string_view s) const {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(Errc::parse_error, "bad integer '" + std::string(s) + "'");
    return v;
  }

  int label(std::string_view s) const {
    const std::int64_t v = integer(s);
    if (v != 1 && v != -1) fail(Errc::invalid_label, "label " + std::to_string(v) + " is not -1 or 1");
    return static_cast<int>(v);
  }

  void expect_header(const std::vector<std::string_view>& got,
                     const std::vector<std::string>& want) const {
    bool ok = got.size() == want.size();
    for (std::size_t c = 0; ok && c < want.size(); ++c) ok = got[c] == want[c];
    if (!ok) {
      std::string joined;
      for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
      fail(Errc::parse_error, "expected header '" + joined + "'");
    }
  }
};

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  return out;
}

}  // namespace

Dataset load_dataset(const std::string& features_csv, const std::string& absolute_csv,
                     const std::string& comparisons_csv) {
  Dataset ds;
  std::vector<std::string_view> f;
  std::string line;
  std::unordered_map<std::int64_t, std::size_t> row_of;

  {
    CsvReader r(features_csv);
    if (!r.next(f, line)) r.fail(Errc::parse_error, "empty features file");
    if (f.size() < 2 || f[0] != "id") r.fail(Errc::parse_error, "expected header 'id,f0,...'");
    std::vector<std::string> want{"id"};
    for (std::size_t c = 0; c + 1 < f.size(); ++c) want.push_back("f" + std::to_string(c));
    r.expect_header(f, want);
    const std::size_t d = f.size() - 1;
    std::vector<double> values;
    while (r.next(f, line)) {
      if (f.size() != d + 1) {
        r.fail(Errc::dimension_mismatch,
               "expected " + std::to_string(d + 1) + " fields, got " + std::to_string(f.size()));
      }
      const std::int64_t id = r.integer(f[0]);
      if (!row_of.emplace(id, ds.ids.size()).second) r.fail(Errc::parse_error, "duplicate id");
      ds.ids.push_back(id);
      for (std::size_t c = 1; c <= d; ++c) values.push_back(r.real(f[c]));
    }
    if (ds.ids.empty()) r.fail(Errc::parse_error, "no samples");
    Matrix x(static_cast<Eigen::Index>(ds.ids.size()), static_cast<Eigen::Index>(d));
    std::copy(values.begin(), values.end(), x.data());
    ds.features = FeatureMatrix(std::move(x));
  }

  const auto lookup = [&](const CsvReader& r, std::int64_t id) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) r.fail(Errc::index_out_of_range, "unknown id " + std::to_string(id));
    return it->second;
  };

  if (!absolute_csv.empty()) {
    CsvReader r(absolute_csv);
    if (!r.next(f, line)) r.fail(Errc::parse_error, "empty absolute-label file");
    r.expect_header(f, {"id", "label"});
    while (r.next(f, line)) {
      if (f.size() != 2) r.fail(Errc::dimension_mismatch, "expected 2 fields");
      const std::size_t row = lookup(r, r.integer(f[0]));
      ds.labels.absolute.push_back({row, r.label(f[1])});
    }
  }

  if (!comparisons_csv.empty()) {
    CsvReader r(comparisons_csv);
    if (!r.next(f, line)) r.fail(Errc::parse_error, "empty comparison-label file");
    r.expect_header(f, {"i", "j", "label"});
    while (r.next(f, line)) {
      if (f.size() != 3) r.fail(Errc::dimension_mismatch, "expected 3 fields");
      const std::size_t a = lookup(r, r.integer(f[0]));
      const std::size_t b = lookup(r, r.integer(f[1]));
      int label = r.label(f[2]);
      if (a == b) r.fail(Errc::index_out_of_range, "comparison of a sample with itself");
      if (a > b) label = -label;
      ds.labels.comparisons.push_back({make_comparison(a, b), label});
    }
  }
  return ds;
}

void write_dataset(const Dataset& data, const std::string& features_csv,
                   const std::string& absolute_csv, const std::string& comparisons_csv) {
  const std::size_t n = data.features.samples();
  const std::size_t d = data.features.dim();
  if (data.ids.size() != n) throw Error(Errc::dimension_mismatch, "ids do not match feature rows");
  {
    std::ofstream out = open_out(features_csv);
    out << "id";
    for (std::size_t c = 0; c < d; ++c) out << ",f" << c;
    out << '\n';
    for (std::size_t r = 0; r < n; ++r) {
      out << data.ids[r];
      for (std::size_t c = 0; c < d; ++c) {
        out << ',' << format_real(data.features.rows()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      }
      out << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write failed: " + features_csv);
  }
  if (!absolute_csv.empty()) {
    std::ofstream out = open_out(absolute_csv);
    out << "id,label\n";
    for (const AbsoluteLabel& a : data.labels.absolute) out << data.ids[a.sample] << ',' << a.label << '\n';
    if (!out) throw Error(Errc::io_error, "write failed: " + absolute_csv);
  }
  if (!comparisons_csv.empty()) {
    std::ofstream out = open_out(comparisons_csv);
    out << "i,j,label\n";
    for (const ComparisonLabel& c : data.labels.comparisons) {
      out << data.ids[c.pair.i] << ',' << data.ids[c.pair.j] << ',' << c.label << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write failed: " + comparisons_csv);
  }
}

}  // namespace dopt
