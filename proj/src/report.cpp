#include "skewprobe/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skewprobe/errors.hpp"

namespace skewprobe {

using nlohmann::json;

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string round_half_even_2(std::string_view decimal) {
  bool negative = false;
  if (!decimal.empty() && (decimal.front() == '-' || decimal.front() == '+')) {
    negative = decimal.front() == '-';
    decimal.remove_prefix(1);
  }
  const auto dot = decimal.find('.');
  const std::string_view whole = decimal.substr(0, dot);
  std::string fraction = dot == std::string_view::npos ? std::string{} : std::string(decimal.substr(dot + 1));
  if (whole.empty() && fraction.empty()) throw UsageError("not a decimal: '" + std::string(decimal) + "'");
  for (char c : whole)
    if (c < '0' || c > '9') throw UsageError("not a decimal: '" + std::string(decimal) + "'");
  for (char c : fraction)
    if (c < '0' || c > '9') throw UsageError("not a decimal: '" + std::string(decimal) + "'");

  // Units of 0.01 kept, remainder compared against one half.
  unsigned long long hundredths = 0;
  for (char c : whole) hundredths = hundredths * 10 + static_cast<unsigned>(c - '0');
  fraction.resize(std::max<std::size_t>(fraction.size(), 2), '0');
  hundredths = hundredths * 100 + static_cast<unsigned>(fraction[0] - '0') * 10 +
               static_cast<unsigned>(fraction[1] - '0');
  const std::string_view rest = std::string_view(fraction).substr(2);
  int cmp = 0;  // rest vs "5000..."
  if (!rest.empty()) {
    if (rest[0] > '5') {
      cmp = 1;
    } else if (rest[0] < '5') {
      cmp = -1;
    } else {
      cmp = rest.find_first_not_of('0', 1) == std::string_view::npos ? 0 : 1;
    }
  } else {
    cmp = -1;
  }
  if (cmp > 0 || (cmp == 0 && (hundredths % 2 == 1))) ++hundredths;

  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%llu.%02llu", (negative && hundredths != 0) ? "-" : "", hundredths / 100,
                hundredths % 100);
  return buf;
}

std::string display_value(double value) { return round_half_even_2(format_fixed6(value)); }

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw ReportError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw ReportError("write to '" + path.string() + "' failed");
}

json fixed6_number(const std::optional<double>& value) {
  if (!value) return nullptr;
  return std::stod(format_fixed6(*value));
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

void check_unit_range(const std::optional<double>& v, const char* what) {
  if (v && !(*v >= 0.0 && *v <= 1.0))
    throw ValidationError(std::string(what) + ": value " + std::to_string(*v) + " outside [0, 1]");
}

std::string display_label(const LabelMap& labels, const std::string& fallback) {
  if (auto it = labels.find("en"); it != labels.end()) return it->second;
  if (!labels.empty()) return labels.begin()->second;
  return fallback;
}

}  // namespace

std::string category_stats_csv(std::span<const CategoryStats> stats) {
  std::string out = "model_id,language,domain,category_id,n_female,n_male,n_unresolved,n_failed,p\n";
  for (const auto& s : stats) {
    out += csv_field(s.model_id) + ',' + csv_field(s.language) + ',' + std::string(to_string(s.domain)) + ',' +
           csv_field(s.category_id) + ',' + std::to_string(s.tally.n_female) + ',' +
           std::to_string(s.tally.n_male) + ',' + std::to_string(s.tally.n_unresolved) + ',' +
           std::to_string(s.tally.n_failed) + ',' + (s.p ? format_fixed6(*s.p) : std::string{}) + '\n';
  }
  return out;
}

std::string domain_skew_csv(std::span<const DomainSkew> skews) {
  std::string out = "model_id,language,domain,n_categories,ds_gsi\n";
  for (const auto& d : skews) {
    out += csv_field(d.model_id) + ',' + csv_field(d.language) + ',' + std::string(to_string(d.domain)) + ',' +
           std::to_string(d.n_categories) + ',' + (d.value ? format_fixed6(*d.value) : std::string{}) + '\n';
  }
  return out;
}

std::string group_stats_csv(std::span<const GroupStats> groups) {
  std::string out = "model_id,language,group,n_female,n_male,n_unresolved,n_failed,p\n";
  for (const auto& g : groups) {
    out += csv_field(g.model_id) + ',' + csv_field(g.language) + ',' + csv_field(g.group) + ',' +
           std::to_string(g.tally.n_female) + ',' + std::to_string(g.tally.n_male) + ',' +
           std::to_string(g.tally.n_unresolved) + ',' + std::to_string(g.tally.n_failed) + ',' +
           (g.p ? format_fixed6(*g.p) : std::string{}) + '\n';
  }
  return out;
}

json summary_json(const DomainSummary& summary, const CoverageReport& coverage, const RunMetadata& meta) {
  json doc;
  doc["metadata"] = {{"config_hash", meta.config_hash},
                     {"trace_path", meta.trace_path},
                     {"catalog_version", meta.catalog_version},
                     {"settings", meta.settings}};

  json categories = json::array();
  json excluded = json::array();
  for (const auto& s : summary.categories) {
    categories.push_back({{"model_id", s.model_id},
                          {"language", s.language},
                          {"domain", std::string(to_string(s.domain))},
                          {"category_id", s.category_id},
                          {"n_female", s.tally.n_female},
                          {"n_male", s.tally.n_male},
                          {"n_unresolved", s.tally.n_unresolved},
                          {"n_failed", s.tally.n_failed},
                          {"n_absent", s.n_absent},
                          {"p", fixed6_number(s.p)}});
  }
  json domains = json::array();
  json undefined = json::array();
  for (const auto& d : summary.domains) {
    domains.push_back({{"model_id", d.model_id},
                       {"language", d.language},
                       {"domain", std::string(to_string(d.domain))},
                       {"n_categories", d.n_categories},
                       {"ds_gsi", fixed6_number(d.value)},
                       {"excluded_categories", d.excluded_categories}});
    for (const auto& c : d.excluded_categories)
      excluded.push_back({{"model_id", d.model_id}, {"language", d.language}, {"category_id", c}});
    if (!d.value)
      undefined.push_back(
          {{"model_id", d.model_id}, {"language", d.language}, {"domain", std::string(to_string(d.domain))}});
  }
  json groups = json::array();
  for (const auto& g : summary.groups) {
    groups.push_back({{"model_id", g.model_id},
                      {"language", g.language},
                      {"group", g.group},
                      {"n_female", g.tally.n_female},
                      {"n_male", g.tally.n_male},
                      {"p", fixed6_number(g.p)}});
  }
  json rows = json::array();
  for (const auto& r : coverage.rows) {
    rows.push_back({{"model_id", r.model_id},
                    {"language", r.language},
                    {"planned", r.planned},
                    {"valid", r.valid},
                    {"failed", r.failed},
                    {"absent", r.absent},
                    {"unresolved", r.unresolved}});
  }
  json disagreement = json::object();
  for (const auto& [language, rate] : coverage.disagreement) {
    disagreement[language] = {{"disagreeing", rate.numerator},
                              {"unique_names", rate.denominator},
                              {"rate", std::stod(format_fixed6(rate.value()))},
                              {"percent", display_value(rate.value() * 100.0)}};
  }
  json absent = json::array();
  for (const auto& key : summary.absent_tasks) absent.push_back(key.to_string());

  doc["category_stats"] = std::move(categories);
  doc["domain_skew"] = std::move(domains);
  doc["group_stats"] = std::move(groups);
  doc["coverage"] = {{"planned", coverage.planned},
                     {"valid", coverage.valid},
                     {"failed", coverage.failed},
                     {"absent", coverage.absent},
                     {"unresolved", coverage.unresolved},
                     {"by_model_language", std::move(rows)},
                     {"disagreement", std::move(disagreement)}};
  doc["flags"] = {{"partial", !summary.absent_tasks.empty()},
                  {"absent_tasks", std::move(absent)},
                  {"excluded_categories", std::move(excluded)},
                  {"undefined_domains", std::move(undefined)}};
  return doc;
}

std::vector<std::filesystem::path> emit_tables(const DomainSummary& summary, const CoverageReport& coverage,
                                               const RunMetadata& meta, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written{out_dir / kCategoryStatsFile, out_dir / kDomainSkewFile,
                                             out_dir / kGroupStatsFile, out_dir / kSummaryFile};
  write_file(written[0], category_stats_csv(summary.categories));
  write_file(written[1], domain_skew_csv(summary.domains));
  write_file(written[2], group_stats_csv(summary.groups));
  write_file(written[3], summary_json(summary, coverage, meta).dump(2) + "\n");
  return written;
}

void HeatmapSpec::validate() const {
  if (rows.empty()) throw ValidationError("heatmap: no rows");
  if (columns.empty()) throw ValidationError("heatmap: no columns");
  if (cells.size() != rows.size()) throw ValidationError("heatmap: cell rows do not match row labels");
  for (const auto& row : cells) {
    if (row.size() != columns.size()) throw ValidationError("heatmap: cell columns do not match column labels");
    for (const auto& v : row) check_unit_range(v, "heatmap");
  }
}

void GroupedBarSpec::validate() const {
  if (groups.empty()) throw ValidationError("grouped bars: no groups");
  if (series.empty()) throw ValidationError("grouped bars: no series");
  if (values.size() != groups.size()) throw ValidationError("grouped bars: value rows do not match groups");
  for (const auto& row : values) {
    if (row.size() != series.size()) throw ValidationError("grouped bars: value columns do not match series");
    for (const auto& v : row) check_unit_range(v, "grouped bars");
  }
}

namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kMaleEnd{33, 102, 172};     // #2166ac
constexpr Rgb kFemaleEnd{214, 51, 108};   // #d6336c

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
  return buf;
}

Rgb mix(double t) {
  return {kMaleEnd.r + (kFemaleEnd.r - kMaleEnd.r) * t, kMaleEnd.g + (kFemaleEnd.g - kMaleEnd.g) * t,
          kMaleEnd.b + (kFemaleEnd.b - kMaleEnd.b) * t};
}

constexpr const char* kSeriesPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                          "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};

const char* kStyle =
    "text{font-family:sans-serif;fill:#222}.title{font-size:15px;font-weight:bold}"
    ".label{font-size:11px}.value{font-size:11px;text-anchor:middle}"
    ".axis{stroke:#333;stroke-width:1}.grid{stroke:#ddd;stroke-width:1}";

}  // namespace

std::string heatmap_color(double value) { return hex(mix(std::clamp(value, 0.0, 1.0))); }

std::string heatmap_svg(const HeatmapSpec& spec) {
  spec.validate();
  constexpr double kLeft = 260, kTop = 80, kCellW = 110, kCellH = 30, kRight = 20, kLegendH = 70;
  const double width = kLeft + kCellW * static_cast<double>(spec.columns.size()) + kRight;
  const double height = kTop + kCellH * static_cast<double>(spec.rows.size()) + kLegendH;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" data-language=\""
      << xml_escape(spec.language) << "\">\n"
      << "<style>" << kStyle << "</style>\n"
      << "<defs>\n"
      << "<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\" "
         "patternTransform=\"rotate(45)\"><rect width=\"8\" height=\"8\" fill=\"#f2f2f2\"/>"
         "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#999\" stroke-width=\"3\"/></pattern>\n"
      << "<linearGradient id=\"scale\" x1=\"0\" y1=\"0\" x2=\"1\" y2=\"0\"><stop offset=\"0\" stop-color=\""
      << heatmap_color(0.0) << "\"/><stop offset=\"1\" stop-color=\"" << heatmap_color(1.0)
      << "\"/></linearGradient>\n"
      << "</defs>\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
      << "<text class=\"title\" x=\"" << num(width / 2) << "\" y=\"28\" text-anchor=\"middle\">"
      << xml_escape(spec.title) << "</text>\n";

  for (std::size_t c = 0; c < spec.columns.size(); ++c) {
    const double x = kLeft + kCellW * (static_cast<double>(c) + 0.5);
    svg << "<text class=\"label column\" x=\"" << num(x) << "\" y=\"" << num(kTop - 10)
        << "\" text-anchor=\"middle\">" << xml_escape(spec.columns[c]) << "</text>\n";
  }
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    const double y = kTop + kCellH * static_cast<double>(r);
    svg << "<text class=\"label row\" x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + kCellH / 2 + 4)
        << "\" text-anchor=\"end\">" << xml_escape(spec.rows[r]) << "</text>\n";
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
      const double x = kLeft + kCellW * static_cast<double>(c);
      const auto& cell = spec.cells[r][c];
      if (!cell) {
        svg << "<rect class=\"cell missing\" data-row=\"" << r << "\" data-col=\"" << c << "\" x=\"" << num(x)
            << "\" y=\"" << num(y) << "\" width=\"" << num(kCellW) << "\" height=\"" << num(kCellH)
            << "\" fill=\"url(#hatch)\" stroke=\"#ffffff\"/>\n";
        continue;
      }
      const std::string shown = display_value(*cell);
      const Rgb fill = mix(*cell);
      const double luminance = (0.299 * fill.r + 0.587 * fill.g + 0.114 * fill.b) / 255.0;
      svg << "<rect class=\"cell\" data-row=\"" << r << "\" data-col=\"" << c << "\" data-value=\"" << shown
          << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(kCellW) << "\" height=\""
          << num(kCellH) << "\" fill=\"" << hex(fill) << "\" stroke=\"#ffffff\"/>\n"
          << "<text class=\"value\" data-row=\"" << r << "\" data-col=\"" << c << "\" x=\"" << num(x + kCellW / 2)
          << "\" y=\"" << num(y + kCellH / 2 + 4) << "\" style=\"fill:" << (luminance < 0.5 ? "#ffffff" : "#000000")
          << "\">" << shown << "</text>\n";
    }
  }

  const double legend_y = kTop + kCellH * static_cast<double>(spec.rows.size()) + 25;
  const double legend_w = std::min(240.0, kCellW * static_cast<double>(spec.columns.size()));
  svg << "<rect class=\"legend\" x=\"" << num(kLeft) << "\" y=\"" << num(legend_y) << "\" width=\""
      << num(legend_w) << "\" height=\"12\" fill=\"url(#scale)\"/>\n"
      << "<text class=\"label\" x=\"" << num(kLeft) << "\" y=\"" << num(legend_y + 28)
      << "\" text-anchor=\"start\">0 (male)</text>\n"
      << "<text class=\"label\" x=\"" << num(kLeft + legend_w) << "\" y=\"" << num(legend_y + 28)
      << "\" text-anchor=\"end\">1 (female)</text>\n"
      << "</svg>\n";
  return svg.str();
}

std::string grouped_bars_svg(const GroupedBarSpec& spec) {
  spec.validate();
  constexpr double kLeft = 70, kTop = 60, kPlotH = 300, kBarW = 26, kGroupGap = 36, kRight = 180, kBottom = 60;
  const auto n_series = static_cast<double>(spec.series.size());
  const double group_w = kBarW * n_series + kGroupGap;
  const double plot_w = group_w * static_cast<double>(spec.groups.size());
  const double width = kLeft + plot_w + kRight;
  const double height = kTop + kPlotH + kBottom;
  const double base_y = kTop + kPlotH;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" data-y-min=\"0\" data-y-max=\"1\">\n"
      << "<style>" << kStyle << "</style>\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
      << "<text class=\"title\" x=\"" << num(width / 2) << "\" y=\"28\" text-anchor=\"middle\">"
      << xml_escape(spec.title) << "</text>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick * 0.25;
    const double y = base_y - kPlotH * v;
    svg << "<line class=\"grid\" x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w)
        << "\" y2=\"" << num(y) << "\"/>\n"
        << "<text class=\"label tick\" x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">" << display_value(v) << "</text>\n";
  }
  svg << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(base_y) << "\"/>\n"
      << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(base_y) << "\" x2=\""
      << num(kLeft + plot_w) << "\" y2=\"" << num(base_y) << "\"/>\n"
      << "<text class=\"label\" transform=\"translate(18 " << num(kTop + kPlotH / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">DS-GSI</text>\n";

  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const double gx = kLeft + group_w * static_cast<double>(g) + kGroupGap / 2;
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
      const auto& value = spec.values[g][s];
      if (!value) continue;
      const double x = gx + kBarW * static_cast<double>(s);
      const double h = kPlotH * *value;
      const std::string shown = display_value(*value);
      const char* color = kSeriesPalette[s % std::size(kSeriesPalette)];
      svg << "<rect class=\"bar\" data-group=\"" << g << "\" data-series=\"" << s << "\" data-value=\"" << shown
          << "\" x=\"" << num(x) << "\" y=\"" << num(base_y - h) << "\" width=\"" << num(kBarW - 2)
          << "\" height=\"" << num(h) << "\" fill=\"" << color << "\"/>\n"
          << "<text class=\"value bar-value\" data-group=\"" << g << "\" data-series=\"" << s << "\" x=\""
          << num(x + (kBarW - 2) / 2) << "\" y=\"" << num(base_y - h - 4) << "\" style=\"font-size:9px\">" << shown
          << "</text>\n";
    }
    svg << "<text class=\"label group\" x=\"" << num(gx + kBarW * n_series / 2) << "\" y=\"" << num(base_y + 20)
        << "\" text-anchor=\"middle\">" << xml_escape(spec.groups[g]) << "</text>\n";
  }

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const double y = kTop + 18 * static_cast<double>(s);
    svg << "<rect class=\"legend\" x=\"" << num(kLeft + plot_w + 20) << "\" y=\"" << num(y) << "\" width=\"12\" "
        << "height=\"12\" fill=\"" << kSeriesPalette[s % std::size(kSeriesPalette)] << "\"/>\n"
        << "<text class=\"label\" x=\"" << num(kLeft + plot_w + 38) << "\" y=\"" << num(y + 10) << "\">"
        << xml_escape(spec.series[s]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_heatmap(const HeatmapSpec& spec, const std::filesystem::path& out_path) {
  write_file(out_path, heatmap_svg(spec));
}

void render_grouped_bars(const GroupedBarSpec& spec, const std::filesystem::path& out_path) {
  write_file(out_path, grouped_bars_svg(spec));
}

HeatmapSpec heatmap_for(const DomainSummary& summary, const DomainCatalog& catalog, DomainId domain,
                        const std::string& language, std::span<const std::string> model_ids) {
  HeatmapSpec spec;
  spec.language = language;
  spec.columns.assign(model_ids.begin(), model_ids.end());
  const std::string domain_name = display_label(catalog.domain(domain).display_names, std::string(to_string(domain)));
  spec.title = "Female ratio by " + domain_name + " (" + language + ")";

  const auto column_of = [&](const std::string& model) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < model_ids.size(); ++i)
      if (model_ids[i] == model) return i;
    return std::nullopt;
  };

  std::vector<std::string> row_keys;
  if (domain == DomainId::academic_discipline) {
    for (const auto& g : catalog.groups()) {
      row_keys.push_back(g.id);
      spec.rows.push_back(display_label(g.labels, g.id));
    }
  } else {
    for (const Category* c : catalog.categories_of(domain)) {
      row_keys.push_back(c->id);
      spec.rows.push_back(display_label(c->labels, c->id));
    }
  }
  spec.cells.assign(spec.rows.size(), std::vector<std::optional<double>>(spec.columns.size()));
  const auto row_of = [&](const std::string& key) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < row_keys.size(); ++i)
      if (row_keys[i] == key) return i;
    return std::nullopt;
  };

  if (domain == DomainId::academic_discipline) {
    for (const auto& g : summary.groups) {
      if (g.language != language) continue;
      auto r = row_of(g.group);
      auto c = column_of(g.model_id);
      if (r && c) spec.cells[*r][*c] = g.p;
    }
  } else {
    for (const auto& s : summary.categories) {
      if (s.language != language || s.domain != domain) continue;
      auto r = row_of(s.category_id);
      auto c = column_of(s.model_id);
      if (r && c) spec.cells[*r][*c] = s.p;
    }
  }
  return spec;
}

GroupedBarSpec grouped_bars_for(const DomainSummary& summary, const DomainCatalog& catalog,
                                const std::string& language, std::span<const std::string> model_ids) {
  GroupedBarSpec spec;
  spec.title = "DS-GSI by domain (" + language + ")";
  spec.series.assign(model_ids.begin(), model_ids.end());
  for (const auto& d : catalog.domains()) spec.groups.push_back(display_label(d.display_names, std::string(to_string(d.id))));
  spec.values.assign(spec.groups.size(), std::vector<std::optional<double>>(spec.series.size()));
  for (const auto& skew : summary.domains) {
    if (skew.language != language) continue;
    std::optional<std::size_t> g, s;
    for (std::size_t i = 0; i < catalog.domains().size(); ++i)
      if (catalog.domains()[i].id == skew.domain) g = i;
    for (std::size_t i = 0; i < model_ids.size(); ++i)
      if (model_ids[i] == skew.model_id) s = i;
    if (g && s) spec.values[*g][*s] = skew.value;
  }
  return spec;
}

std::string heatmap_file_name(DomainId domain, const std::string& language) {
  return "heatmap_" + std::string(to_string(domain)) + "_" + language + ".svg";
}

std::string grouped_bars_file_name(const std::string& language) { return "dsgsi_" + language + ".svg"; }

std::vector<std::filesystem::path> emit_figures(const DomainSummary& summary, const DomainCatalog& catalog,
                                                std::span<const std::string> languages,
                                                std::span<const std::string> model_ids,
                                                const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& language : languages) {
    for (const auto& domain : catalog.domains()) {
      auto path = out_dir / heatmap_file_name(domain.id, language);
      render_heatmap(heatmap_for(summary, catalog, domain.id, language, model_ids), path);
      written.push_back(std::move(path));
    }
    auto path = out_dir / grouped_bars_file_name(language);
    render_grouped_bars(grouped_bars_for(summary, catalog, language, model_ids), path);
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace skewprobe
