#include "istb/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace istb {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t n_fields,
                              const std::string& path, std::size_t lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(field, &pos);
      while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
      if (pos != field.size()) throw std::invalid_argument("trailing junk");
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed field '" + field + "'");
    }
  }
  if (out.size() != n_fields)
    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(n_fields) +
                             " fields, got " + std::to_string(out.size()));
  for (double v : out)
    if (!std::isfinite(v))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": non-finite value");
  return out;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

CatalogLoadResult load_catalog(const std::string& path, double mc,
                               const std::array<double, 3>& well_tip) {
  if (!std::isfinite(mc)) throw std::invalid_argument("mc must be finite");
  auto in = open_or_throw(path);
  CatalogLoadResult res;
  res.catalog.mc = mc;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("t_s", 0) == 0) continue;  // header row
    }
    const auto f = parse_row(line, 5, path, lineno);
    if (f[0] < 0.0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": negative time");
    SeismicEvent e;
    e.t = f[0];
    e.x = f[1] - well_tip[0];
    e.y = f[2] - well_tip[1];
    e.z = f[3] - well_tip[2];
    e.m = f[4];
    if (e.m < mc) {
      ++res.n_below_mc;
      continue;
    }
    res.catalog.events.push_back(e);
  }
  auto by_t = [](const SeismicEvent& a, const SeismicEvent& b) { return a.t < b.t; };
  if (!std::is_sorted(res.catalog.events.begin(), res.catalog.events.end(), by_t)) {
    res.was_unsorted = true;
    std::stable_sort(res.catalog.events.begin(), res.catalog.events.end(), by_t);
  }
  return res;
}

HydraulicSeries load_hydraulics(const std::string& path) {
  auto in = open_or_throw(path);
  HydraulicSeries series;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("t_s", 0) == 0) continue;
    }
    const auto f = parse_row(line, 3, path, lineno);
    if (f[1] < 0.0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": negative flow rate");
    series.samples.push_back({f[0], f[1], f[2]});
  }
  auto by_t = [](const HydraulicSample& a, const HydraulicSample& b) { return a.t < b.t; };
  if (!std::is_sorted(series.samples.begin(), series.samples.end(), by_t))
    std::stable_sort(series.samples.begin(), series.samples.end(), by_t);
  series.detect_shut_in();
  return series;
}

void save_catalog(const std::string& path, const SeismicCatalog& catalog) {
  std::string out = "t_s,x_m,y_m,z_m,mw\n";
  char buf[256];
  for (const auto& e : catalog.events) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", e.t, e.x, e.y,
                  e.z, e.m);
    out += buf;
  }
  write_file_atomic(path, out);
}

void save_hydraulics(const std::string& path, const HydraulicSeries& series) {
  std::string out = "t_s,flow_lps,whp_mpa\n";
  char buf[256];
  for (const auto& s : series.samples) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", s.t, s.flow_lps,
                  s.whp_mpa);
    out += buf;
  }
  write_file_atomic(path, out);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out.good()) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace istb
