#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "conclab/format.hpp"
#include "conclab/harness.hpp"

namespace conclab::harness {

namespace {

constexpr char kHeader[] = "t,empirical,ci_lo,ci_hi,bound,pass";

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace

std::string rows_to_csv(const std::vector<Row>& rows) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const Row& r : rows)
    out << format_double(r.t) << ',' << format_double(r.empirical) << ',' << format_double(r.ci_lo) << ','
        << format_double(r.ci_hi) << ',' << format_double(r.bound) << ',' << (r.pass ? "true" : "false") << '\n';
  return out.str();
}

std::vector<Row> parse_rows_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("report CSV: unexpected header");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw std::invalid_argument("report CSV: expected 6 columns in '" + line + "'");
    if (cells[5] != "true" && cells[5] != "false") throw std::invalid_argument("report CSV: bad pass flag");
    Row r;
    r.t = parse_double(cells[0]);
    r.empirical = parse_double(cells[1]);
    r.ci_lo = parse_double(cells[2]);
    r.ci_hi = parse_double(cells[3]);
    r.bound = parse_double(cells[4]);
    r.pass = cells[5] == "true";
    rows.push_back(r);
  }
  return rows;
}

std::string report_csv(const VerificationReport& report) { return rows_to_csv(report.rows); }

std::string report_svg(const VerificationReport& report) {
  constexpr double kWidth = 640, kHeight = 400, kMargin = 50;
  const double floor = 0.5 / static_cast<double>(std::max<long long>(report.trials, 1));
  const auto level = [&](double p) { return std::log10(std::max(p, floor)); };
  double t_lo = 0, t_hi = 1, y_lo = std::log10(floor), y_hi = std::log10(2.0);
  if (!report.rows.empty()) {
    t_lo = report.rows.front().t;
    t_hi = report.rows.back().t;
  }
  if (!(t_hi > t_lo)) t_hi = t_lo + 1.0;
  const auto px = [&](double t) { return kMargin + (t - t_lo) / (t_hi - t_lo) * (kWidth - 2 * kMargin); };
  const auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };
  const auto polyline = [&](const char* cls, const char* colour, auto value) {
    std::string pts;
    for (const Row& r : report.rows) {
      if (!pts.empty()) pts += ' ';
      pts += fixed(px(r.t)) + "," + fixed(py(level(value(r))));
    }
    return std::string("  <polyline class=\"") + cls + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "  <title>" << report.name << ": log10 tail probability vs t</title>\n";
  out << "  <line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\">t</text>\n";
  out << "  <text x=\"5\" y=\"" << kMargin - 10 << "\">log10 P</text>\n";
  out << polyline("empirical", "steelblue", [](const Row& r) { return r.empirical; });
  out << polyline("bound", "firebrick", [](const Row& r) { return r.bound; });
  out << "</svg>\n";
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

void emit_report(const VerificationReport& report, ReportFormat format, const std::string& path) {
  switch (format) {
    case ReportFormat::csv: write_text(path, report_csv(report)); break;
    case ReportFormat::json: write_text(path, report_json(report)); break;
    case ReportFormat::svg: write_text(path, report_svg(report)); break;
  }
}

}  // namespace conclab::harness
