#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "percolab/errors.hpp"
#include "percolab/experiment.hpp"
#include "percolab/io.hpp"

namespace percolab {

namespace fs = std::filesystem;

namespace {

fs::path require(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw LookupError("missing input " + path.string());
  return path;
}

void emit_decay(const fs::path& dir, std::ostream& os) {
  const auto table = io::read_csv(require(dir / "scan.csv"));
  const auto cp = table.column("p"), ct = table.column("t"), cf = table.column("frequency");
  std::vector<std::tuple<double, int, double>> rows;
  for (const auto& r : table.rows)
    rows.emplace_back(io::parse_real(r[cp]), static_cast<int>(io::parse_int(r[ct])), io::parse_real(r[cf]));
  std::sort(rows.begin(), rows.end());
  os << "p,t,frequency,log_frequency\n";
  for (const auto& [p, t, f] : rows)
    os << io::fmt_real(p) << ',' << t << ',' << io::fmt_real(f) << ','
       << io::fmt_real(f > 0 ? std::log(f) : -INFINITY) << '\n';
}

void emit_slopes(const fs::path& dir, std::ostream& os) {
  std::vector<fs::path> inputs;
  if (fs::is_directory(dir))
    for (const auto& f : fs::directory_iterator(dir)) {
      const auto name = f.path().filename().string();
      if (f.is_regular_file() && f.path().extension() == ".csv" && name.find("slopes") != std::string::npos &&
          name.rfind("plot_", 0) != 0)
        inputs.push_back(f.path());
    }
  std::sort(inputs.begin(), inputs.end());
  std::vector<io::CsvTable> tables;
  for (const auto& path : inputs) {
    auto t = io::read_csv(path);
    if (!t.header.empty() && t.header[0] == "quantity") tables.push_back(std::move(t));
  }
  if (tables.empty()) throw LookupError("no slope reports in " + dir.string());
  os << "quantity,n,p_lo,p_hi,p_mid,slope,ci_lo,ci_hi\n";
  for (const auto& t : tables) {
    const auto cq = t.column("quantity"), cn = t.column("n"), clo = t.column("p_lo"), chi = t.column("p_hi"),
               cs = t.column("slope"), ca = t.column("ci_lo"), cb = t.column("ci_hi");
    for (const auto& r : t.rows) {
      const double lo = io::parse_real(r[clo]), hi = io::parse_real(r[chi]);
      os << r[cq] << ',' << r[cn] << ',' << r[clo] << ',' << r[chi] << ',' << io::fmt_real(0.5 * (lo + hi)) << ','
         << r[cs] << ',' << r[ca] << ',' << r[cb] << '\n';
    }
  }
}

void emit_crystal(const fs::path& dir, std::ostream& os) {
  std::ifstream in(require(dir / "crystals.ndjson"));
  os << "p,index,x,y\n";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const double p = j.at("p").get<double>();
    auto vs = j.at("vertices").get<std::vector<std::vector<double>>>();
    if (vs.empty()) continue;
    if (vs.front().size() != 2) throw CapabilityError("crystal outlines are emitted for d=2 only");
    double cx = 0, cy = 0;
    for (const auto& v : vs) {
      cx += v[0];
      cy += v[1];
    }
    cx /= static_cast<double>(vs.size());
    cy /= static_cast<double>(vs.size());
    std::sort(vs.begin(), vs.end(), [&](const auto& a, const auto& b) {
      return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(b[1] - cy, b[0] - cx);
    });
    vs.push_back(vs.front());
    for (std::size_t i = 0; i < vs.size(); ++i)
      os << io::fmt_real(p) << ',' << i << ',' << io::fmt_real(vs[i][0]) << ',' << io::fmt_real(vs[i][1]) << '\n';
  }
}

}  // namespace

std::optional<PlotKind> parse_plot_kind(std::string_view name) {
  if (name == "decay") return PlotKind::Decay;
  if (name == "slopes") return PlotKind::Slopes;
  if (name == "crystal") return PlotKind::Crystal;
  return std::nullopt;
}

fs::path emit_plotdata(const fs::path& result_dir, PlotKind kind) {
  static const std::map<PlotKind, const char*> names{
      {PlotKind::Decay, "decay"}, {PlotKind::Slopes, "slopes"}, {PlotKind::Crystal, "crystal"}};
  std::ostringstream os;
  switch (kind) {
    case PlotKind::Decay: emit_decay(result_dir, os); break;
    case PlotKind::Slopes: emit_slopes(result_dir, os); break;
    case PlotKind::Crystal: emit_crystal(result_dir, os); break;
  }
  const auto path = result_dir / (std::string("plot_") + names.at(kind) + ".csv");
  std::ofstream out(path, std::ios::binary);
  out << os.str();
  if (!out) throw ExperimentError("cannot write " + path.string());
  return path;
}

}  // namespace percolab
