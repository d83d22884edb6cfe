#include "fattree/harness/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fattree::harness {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 55;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> ticks;
};

Axis nice_axis(double lo, double hi, bool from_zero) {
  if (from_zero) lo = std::min(lo, 0.0);
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  Axis a;
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  for (double t = a.lo; t <= a.hi + step * 1e-9; t += step) a.ticks.push_back(t);
  return a;
}

void header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
      << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
}

double plot_w() { return kWidth - kLeft - kRight; }
double plot_h() { return kHeight - kTop - kBottom; }

void y_axis(std::ostringstream& out, const Axis& y, const std::string& label) {
  const double x0 = kLeft;
  const double y1 = kHeight - kBottom;
  out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(x0)
      << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";
  for (double t : y.ticks) {
    const double py = y1 - (t - y.lo) / (y.hi - y.lo) * plot_h();
    out << "<line x1=\"" << fmt(x0 - 4) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(x0 - 7) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  out << "<text x=\"18\" y=\"" << fmt(kTop + plot_h() / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << fmt(kTop + plot_h() / 2)
      << ")\">" << escape(label) << "</text>\n";
}

void x_baseline(std::ostringstream& out) {
  const double y1 = kHeight - kBottom;
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y1) << "\" x2=\""
      << fmt(kLeft + plot_w()) << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";
}

void legend(std::ostringstream& out, const std::vector<std::string>& names,
            const std::vector<bool>& dashed) {
  const double x = kWidth - kRight + 15;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    const char* color = dashed[i] ? "black" : kPalette[i % 8];
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x + 20)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed[i] ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    out << "<text x=\"" << fmt(x + 26) << "\" y=\"" << fmt(y + 4) << "\">" << escape(names[i])
        << "</text>\n";
  }
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = 0.0;
    xhi = 1.0;
    ylo = 0.0;
    yhi = 1.0;
  }
  const Axis xa = nice_axis(xlo, xhi, false);
  const Axis ya = nice_axis(ylo, yhi, true);
  auto px = [&](double x) { return kLeft + (x - xa.lo) / (xa.hi - xa.lo) * plot_w(); };
  auto py = [&](double y) { return kHeight - kBottom - (y - ya.lo) / (ya.hi - ya.lo) * plot_h(); };

  std::ostringstream out;
  header(out, chart.title);
  y_axis(out, ya, chart.y_label);
  x_baseline(out);
  const double base = kHeight - kBottom;
  for (double t : xa.ticks) {
    out << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(base) << "\" x2=\"" << fmt(px(t))
        << "\" y2=\"" << fmt(base + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(base + 17)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  out << "<text x=\"" << fmt(kLeft + plot_w() / 2) << "\" y=\"" << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";

  std::vector<std::string> names;
  std::vector<bool> dashed;
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const char* color = s.dashed ? "black" : kPalette[i % 8];
    names.push_back(s.name);
    dashed.push_back(s.dashed);
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      if (k) out << ' ';
      out << fmt(px(s.points[k].first)) << ',' << fmt(py(s.points[k].second));
    }
    out << "\"/>\n";
    if (!s.dashed) {
      for (const auto& [x, y] : s.points) {
        out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
  }
  legend(out, names, dashed);
  out << "</svg>\n";
  return out.str();
}

std::string render_svg(const BarChart& chart) {
  double yhi = 0.0;
  for (const auto& row : chart.values) {
    for (double v : row) yhi = std::max(yhi, v);
  }
  const Axis ya = nice_axis(0.0, yhi > 0.0 ? yhi : 1.0, true);
  auto py = [&](double y) { return kHeight - kBottom - (y - ya.lo) / (ya.hi - ya.lo) * plot_h(); };

  std::ostringstream out;
  header(out, chart.title);
  y_axis(out, ya, chart.y_label);
  x_baseline(out);
  const double base = kHeight - kBottom;
  const std::size_t g = chart.groups.size();
  const std::size_t s = chart.series.size();
  if (g > 0) {
    const double slot = plot_w() / static_cast<double>(g);
    const double bar = s > 0 ? slot * 0.8 / static_cast<double>(s) : 0.0;
    for (std::size_t gi = 0; gi < g; ++gi) {
      const double x0 = kLeft + slot * static_cast<double>(gi) + slot * 0.1;
      for (std::size_t si = 0; si < s; ++si) {
        const double v = gi < chart.values.size() && si < chart.values[gi].size()
                             ? chart.values[gi][si]
                             : 0.0;
        const double top = py(v);
        out << "<rect x=\"" << fmt(x0 + bar * static_cast<double>(si)) << "\" y=\"" << fmt(top)
            << "\" width=\"" << fmt(bar) << "\" height=\"" << fmt(base - top) << "\" fill=\""
            << kPalette[si % 8] << "\"/>\n";
      }
      out << "<text x=\"" << fmt(kLeft + slot * (static_cast<double>(gi) + 0.5)) << "\" y=\""
          << fmt(base + 17) << "\" text-anchor=\"middle\">" << escape(chart.groups[gi])
          << "</text>\n";
    }
  }
  legend(out, chart.series, std::vector<bool>(s, false));
  out << "</svg>\n";
  return out.str();
}

PlotStyle parse_plot_style(const std::string& name) {
  if (name == "auto") return PlotStyle::kAuto;
  if (name == "flow") return PlotStyle::kFlow;
  if (name == "latency") return PlotStyle::kLatency;
  if (name == "queues") return PlotStyle::kQueues;
  throw FormatError("unknown plot style '" + name + "'");
}

std::string plot_style_name(PlotStyle style) {
  switch (style) {
    case PlotStyle::kAuto: return "auto";
    case PlotStyle::kFlow: return "flow";
    case PlotStyle::kLatency: return "latency";
    case PlotStyle::kQueues: return "queues";
  }
  return "?";
}

PlotStyle detect_plot_style(const CsvTable& table) {
  if (table.has_column("max_link_load")) return PlotStyle::kFlow;
  if (table.has_column("mean_latency")) return PlotStyle::kLatency;
  if (table.has_column("mean_q")) return PlotStyle::kQueues;
  if (table.empty()) return PlotStyle::kFlow;
  throw FormatError("cannot infer a plot style from the CSV columns");
}

namespace {

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("not a number: '" + s + "'");
  }
  return v;
}

// Mean of `value` grouped by (series, x), series in order of appearance.
struct Grouped {
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::pair<double, int>>> cells;

  void add(const std::string& series, double x, double v) {
    if (!cells.count(series)) order.push_back(series);
    auto& c = cells[series][x];
    c.first += v;
    c.second += 1;
  }
  std::vector<Series> series() const {
    std::vector<Series> out;
    for (const auto& name : order) {
      Series s{name, {}, false};
      for (const auto& [x, acc] : cells.at(name)) s.points.emplace_back(x, acc.first / acc.second);
      out.push_back(std::move(s));
    }
    return out;
  }
};

CsvTable merge(const std::vector<std::string>& paths) {
  CsvTable all;
  for (const auto& p : paths) {
    CsvTable t = read_csv(p);
    if (t.empty()) continue;
    if (all.empty()) {
      all.header = t.header;
    } else if (t.header != all.header) {
      throw FormatError(p + ": header differs from the first CSV");
    }
    for (auto& r : t.rows) all.rows.push_back(std::move(r));
  }
  return all;
}

std::string write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << body;
  return path.string();
}

}  // namespace

std::vector<std::string> render_plots(const std::vector<std::string>& csv_paths,
                                      PlotStyle style, const std::string& out_dir) {
  if (csv_paths.empty()) throw FormatError("no CSV inputs");
  const CsvTable table = merge(csv_paths);
  if (style == PlotStyle::kAuto) style = detect_plot_style(table);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::string stem = std::filesystem::path(csv_paths.front()).stem().string();
  std::vector<std::string> written;

  switch (style) {
    case PlotStyle::kAuto:
    case PlotStyle::kFlow: {
      LineChart chart{"Maximum link load", "c", "max link load", {}};
      if (!table.empty()) {
        const auto cs = table.column("scheme");
        const auto cc = table.column("c");
        const auto cl = table.column("max_link_load");
        Grouped g;
        std::vector<double> xs;
        for (const auto& r : table.rows) {
          const double c = to_double(r[cc]);
          g.add(r[cs], c, to_double(r[cl]));
          xs.push_back(c);
        }
        chart.series = g.series();
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        Series optimal{"optimal (c)", {}, true};
        for (double c : xs) optimal.points.emplace_back(c, c);
        chart.series.push_back(std::move(optimal));
      }
      written.push_back(write_file(dir / (stem + ".svg"), render_svg(chart)));
      break;
    }
    case PlotStyle::kLatency: {
      LineChart mean{"Average packet latency", "rho", "latency (slots)", {}};
      LineChart tail{"Tail packet latency", "rho", "tail latency (slots)", {}};
      if (!table.empty()) {
        const auto cs = table.column("scheme");
        const auto cr = table.column("rho");
        const auto cm = table.column("mean_latency");
        const auto ct = table.column("mean_tail_latency");
        Grouped gm, gt;
        for (const auto& r : table.rows) {
          gm.add(r[cs], to_double(r[cr]), to_double(r[cm]));
          gt.add(r[cs], to_double(r[cr]), to_double(r[ct]));
        }
        mean.series = gm.series();
        tail.series = gt.series();
      }
      written.push_back(write_file(dir / (stem + "_mean.svg"), render_svg(mean)));
      written.push_back(write_file(dir / (stem + "_tail.svg"), render_svg(tail)));
      break;
    }
    case PlotStyle::kQueues: {
      if (table.empty() || table.rows.empty()) {
        BarChart chart{"Mean queue length per layer", "mean queue length", {}, {}, {}};
        written.push_back(write_file(dir / (stem + ".svg"), render_svg(chart)));
        break;
      }
      const auto cs = table.column("scheme");
      const auto cr = table.column("rho");
      const auto cl = table.column("layer");
      const auto cd = table.column("direction");
      const auto cm = table.column("mean_q");
      std::vector<std::string> rhos;
      for (const auto& r : table.rows) {
        if (std::find(rhos.begin(), rhos.end(), r[cr]) == rhos.end()) rhos.push_back(r[cr]);
      }
      for (const auto& rho : rhos) {
        BarChart chart{"Mean queue length per layer, rho=" + rho, "mean queue length", {}, {}, {}};
        std::map<std::pair<std::size_t, std::size_t>, std::pair<double, int>> acc;
        for (const auto& r : table.rows) {
          if (r[cr] != rho) continue;
          const std::string group = "L" + r[cl] + " " + r[cd];
          auto gi = std::find(chart.groups.begin(), chart.groups.end(), group);
          if (gi == chart.groups.end()) gi = chart.groups.insert(chart.groups.end(), group);
          auto si = std::find(chart.series.begin(), chart.series.end(), r[cs]);
          if (si == chart.series.end()) si = chart.series.insert(chart.series.end(), r[cs]);
          auto& a = acc[{static_cast<std::size_t>(gi - chart.groups.begin()),
                         static_cast<std::size_t>(si - chart.series.begin())}];
          a.first += to_double(r[cm]);
          a.second += 1;
        }
        chart.values.assign(chart.groups.size(), std::vector<double>(chart.series.size(), 0.0));
        for (const auto& [key, a] : acc) chart.values[key.first][key.second] = a.first / a.second;
        written.push_back(
            write_file(dir / (stem + "_rho" + rho + ".svg"), render_svg(chart)));
      }
      break;
    }
  }
  return written;
}

}  // namespace fattree::harness
