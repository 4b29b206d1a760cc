#include "cdl/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cdl/errors.hpp"

namespace cdl {

namespace {

constexpr double kIngestSumTolerance = 1e-6;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, int row, std::size_t col) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ValidationError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                          ": cannot parse '" + cell + "' as a number");
  }
  return value;
}

/// Reads `# <kind> <key>=<value>` and returns {kind, value string}.
std::pair<std::string, std::string> parse_marker(const std::string& line,
                                                 const std::string& key,
                                                 const std::filesystem::path& path) {
  const std::string t = trim(line);
  if (t.empty() || t[0] != '#') {
    throw ValidationError("'" + path.string() + "': first line must be a '# ...' header");
  }
  std::istringstream in(t.substr(1));
  std::string kind, kv;
  in >> kind >> kv;
  if (kind.empty() || kv.rfind(key + "=", 0) != 0) {
    throw ValidationError("'" + path.string() + "': malformed header '" + t + "'");
  }
  return {kind, kv.substr(key.size() + 1)};
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

int parse_int(const std::string& s, const std::string& what,
              const std::filesystem::path& path) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("'" + path.string() + "': bad " + what + " '" + s + "'");
  }
  return value;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset load_dataset(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 3) {
    throw ValidationError("'" + path.string() + "': need a header, names and one row");
  }
  const auto [kind, c_str] = parse_marker(lines[0], "c", path);
  TargetKind target_kind;
  if (kind == "ldl") {
    target_kind = TargetKind::kLabel;
  } else if (kind == "cdl") {
    target_kind = TargetKind::kConcentration;
  } else {
    throw ValidationError("'" + path.string() + "': unknown dataset kind '" + kind + "'");
  }
  const int c = parse_int(c_str, "class count", path);
  if (c < 2) throw ValidationError("'" + path.string() + "': class count must be >= 2");
  const int width = target_kind == TargetKind::kLabel ? c : c + 1;

  const std::vector<std::string> names = split_csv(lines[1]);
  const int total = static_cast<int>(names.size());
  const int m = total - width;
  if (m < 1) {
    throw ValidationError("'" + path.string() + "': " + std::to_string(total) +
                          " columns cannot hold " + std::to_string(width) +
                          " targets plus features");
  }

  const int n = static_cast<int>(lines.size()) - 2;
  Dataset ds;
  ds.target_kind = target_kind;
  ds.label_count = c;
  ds.feature_names.assign(names.begin(), names.begin() + m);
  ds.target_names.assign(names.begin() + m, names.end());
  ds.features = Matrix(n, m);
  ds.targets = Matrix(n, width);

  const DistributionKind dkind = target_kind == TargetKind::kLabel
                                     ? DistributionKind::kLabel
                                     : DistributionKind::kConcentration;
  for (int r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_csv(lines[r + 2]);
    if (static_cast<int>(cells.size()) != total) {
      throw ValidationError("row " + std::to_string(r) + ": expected " +
                            std::to_string(total) + " cells, got " +
                            std::to_string(cells.size()));
    }
    for (int j = 0; j < m; ++j) ds.features(r, j) = parse_cell(cells[j], r, j);
    double sum = 0.0;
    for (int j = 0; j < width; ++j) {
      const double v = parse_cell(cells[m + j], r, m + j);
      ds.targets(r, j) = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kIngestSumTolerance) {
      throw ValidationError("row " + std::to_string(r) + ": target sum " +
                            format_number(sum) + " deviates from 1 by more than 1e-6");
    }
    for (int j = 0; j < width; ++j) ds.targets(r, j) /= sum;
    const auto check = validate_distribution(ds.targets.row(r), dkind);
    if (!check.ok()) {
      throw ValidationError("row " + std::to_string(r) + ": " + check.message());
    }
  }
  validate_dataset(ds);
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  validate_dataset(dataset);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << (dataset.target_kind == TargetKind::kLabel ? "# ldl c=" : "# cdl c=")
      << dataset.label_count << "\n";
  for (std::size_t i = 0; i < dataset.feature_names.size(); ++i) {
    if (i) out << ",";
    out << dataset.feature_names[i];
  }
  for (const std::string& name : dataset.target_names) out << "," << name;
  out << "\n";
  for (int r = 0; r < dataset.n(); ++r) {
    for (int j = 0; j < dataset.m(); ++j) {
      if (j) out << ",";
      out << format_number(dataset.features(r, j));
    }
    for (int j = 0; j < dataset.target_width(); ++j) {
      out << "," << format_number(dataset.targets(r, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TargetTable load_target_table(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 3) {
    throw ValidationError("'" + path.string() + "': need a header, names and one row");
  }
  const auto [kind, c_str] = parse_marker(lines[0], "c", path);
  TargetTable table;
  if (kind == "ldl") {
    table.kind = TargetKind::kLabel;
  } else if (kind == "cdl") {
    table.kind = TargetKind::kConcentration;
  } else {
    throw ValidationError("'" + path.string() + "': unknown table kind '" + kind + "'");
  }
  table.label_count = parse_int(c_str, "class count", path);
  if (table.label_count < 2) {
    throw ValidationError("'" + path.string() + "': class count must be >= 2");
  }
  const int width =
      table.kind == TargetKind::kLabel ? table.label_count : table.label_count + 1;
  const int total = static_cast<int>(split_csv(lines[1]).size());
  if (total < width) {
    throw ValidationError("'" + path.string() + "': " + std::to_string(total) +
                          " columns cannot hold " + std::to_string(width) + " targets");
  }
  const int skip = total - width;  // leading feature columns, if any

  const int n = static_cast<int>(lines.size()) - 2;
  table.rows = Matrix(n, width);
  const DistributionKind dkind = table.kind == TargetKind::kLabel
                                     ? DistributionKind::kLabel
                                     : DistributionKind::kConcentration;
  for (int r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_csv(lines[r + 2]);
    if (static_cast<int>(cells.size()) != total) {
      throw ValidationError("row " + std::to_string(r) + ": expected " +
                            std::to_string(total) + " cells, got " +
                            std::to_string(cells.size()));
    }
    double sum = 0.0;
    for (int j = 0; j < width; ++j) {
      const double v = parse_cell(cells[skip + j], r, skip + j);
      table.rows(r, j) = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kIngestSumTolerance) {
      throw ValidationError("row " + std::to_string(r) + ": target sum " +
                            format_number(sum) + " deviates from 1 by more than 1e-6");
    }
    for (int j = 0; j < width; ++j) table.rows(r, j) /= sum;
    const auto check = validate_distribution(table.rows.row(r), dkind);
    if (!check.ok()) {
      throw ValidationError("row " + std::to_string(r) + ": " + check.message());
    }
  }
  return table;
}

void save_target_table(const TargetTable& table, const std::filesystem::path& path) {
  const int width =
      table.kind == TargetKind::kLabel ? table.label_count : table.label_count + 1;
  if (static_cast<int>(table.rows.cols()) != width || table.rows.rows() == 0) {
    throw ValidationError("save_target_table: row width does not match the declared kind");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << (table.kind == TargetKind::kLabel ? "# ldl c=" : "# cdl c=") << table.label_count
      << "\n";
  for (int j = 0; j < width; ++j) {
    if (j) out << ",";
    out << "t" << j;
  }
  out << "\n";
  for (std::size_t r = 0; r < table.rows.rows(); ++r) {
    for (int j = 0; j < width; ++j) {
      if (j) out << ",";
      out << format_number(table.rows(r, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

RatingMatrix load_ratings(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 3) {
    throw ValidationError("'" + path.string() + "': need a header, names and one row");
  }
  const auto [kind, r_str] = parse_marker(lines[0], "R", path);
  if (kind != "ratings") {
    throw ValidationError("'" + path.string() + "': expected a '# ratings R=...' header");
  }
  double scale_max = 0.0;
  {
    const auto [ptr, ec] =
        std::from_chars(r_str.data(), r_str.data() + r_str.size(), scale_max);
    if (ec != std::errc() || ptr != r_str.data() + r_str.size() || !(scale_max > 0.0) ||
        !std::isfinite(scale_max)) {
      throw ValidationError("'" + path.string() + "': bad scale '" + r_str + "'");
    }
  }
  const int c = static_cast<int>(split_csv(lines[1]).size());
  const int n = static_cast<int>(lines.size()) - 2;
  RatingMatrix rm;
  rm.scale_max = scale_max;
  rm.ratings = Matrix(n, c);
  for (int r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_csv(lines[r + 2]);
    if (static_cast<int>(cells.size()) != c) {
      throw ValidationError("row " + std::to_string(r) + ": expected " + std::to_string(c) +
                            " ratings, got " + std::to_string(cells.size()));
    }
    for (int j = 0; j < c; ++j) {
      const double v = parse_cell(cells[j], r, j);
      if (!std::isfinite(v) || v <= 0.0 || v > scale_max) {
        throw ValidationError("row " + std::to_string(r) + ", column " + std::to_string(j) +
                              ": rating " + format_number(v) + " outside (0, " +
                              format_number(scale_max) + "]");
      }
      rm.ratings(r, j) = v;
    }
  }
  return rm;
}

Matrix build_cdl_from_ratings(const RatingMatrix& ratings) {
  if (ratings.ratings.empty() || !(ratings.scale_max > 0.0)) {
    throw ValidationError("build_cdl: empty ratings or non-positive scale");
  }
  const std::size_t n = ratings.ratings.rows();
  const std::size_t c = ratings.ratings.cols();
  const double scale = ratings.scale_max;
  Matrix out(n, c + 1);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = ratings.ratings.row(r);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!std::isfinite(row[j]) || row[j] <= 0.0 || row[j] > scale) {
        throw ValidationError("build_cdl: rating at row " + std::to_string(r) +
                              ", column " + std::to_string(j) + " outside (0, " +
                              format_number(scale) + "]");
      }
      sum += row[j];
    }
    double mu_raw = scale * static_cast<double>(c) - sum;
    if (mu_raw < 0.0) mu_raw = 0.0;  // float dust when every rating saturates
    const double total = sum + mu_raw;
    for (std::size_t j = 0; j < c; ++j) out(r, j) = row[j] / total;
    out(r, c) = mu_raw / total;
  }
  return out;
}

ProtocolPair hide_last_label(const Matrix& targets) {
  const std::size_t n = targets.rows();
  const std::size_t c = targets.cols();
  if (n == 0 || c < 3) {
    throw ValidationError("hide_last_label: need at least one row of width >= 3");
  }
  ProtocolPair pair;
  pair.train_targets = Matrix(n, c - 1);
  pair.eval_targets = Matrix(n, c);
  for (std::size_t r = 0; r < n; ++r) {
    const auto raw = targets.row(r);
    const LabelDistribution ld(std::vector<double>(raw.begin(), raw.end()));
    const double hidden = ld[c - 1];
    const double visible = 1.0 - hidden;
    if (visible <= 0.0) {
      throw ValidationError("hide_last_label: row " + std::to_string(r) +
                            " has all mass in the last class");
    }
    for (std::size_t j = 0; j + 1 < c; ++j) {
      pair.train_targets(r, j) = ld[j] / visible;
      pair.eval_targets(r, j) = ld[j];
    }
    pair.eval_targets(r, c - 1) = hidden;
  }
  return pair;
}

ConcentrationDistribution noise_append_with_delta(const LabelDistribution& prediction,
                                                  double g, double delta) {
  if (!(g >= 0.0 && g < 1.0)) {
    throw ValidationError("noise_append: background " + format_number(g) +
                          " outside [0, 1)");
  }
  if (std::abs(delta) > 0.2 * g) {
    throw ValidationError("noise_append: |delta| exceeds 0.2 * g");
  }
  const double appended = g + delta;
  double sum = appended;
  for (double v : prediction.values()) sum += v;
  std::vector<double> label(prediction.size());
  for (std::size_t i = 0; i < label.size(); ++i) label[i] = prediction[i] / sum;
  return ConcentrationDistribution(std::move(label), appended / sum);
}

ConcentrationDistribution noise_append_baseline(const LabelDistribution& prediction,
                                                double g, RandomStream& rng) {
  if (!(g >= 0.0 && g < 1.0)) {
    throw ValidationError("noise_append: background " + format_number(g) +
                          " outside [0, 1)");
  }
  const double delta = g > 0.0 ? rng.uniform(-0.2 * g, 0.2 * g) : 0.0;
  return noise_append_with_delta(prediction, g, delta);
}

SynthData synth_generate(int n, int m, int c, std::uint64_t seed) {
  if (n < 10 || m < 1 || c < 2) {
    throw ValidationError("synth_generate: need n >= 10, m >= 1, c >= 2");
  }
  RandomStream stream(seed);
  Matrix w(c, m);
  const double w_max = 8.0 / static_cast<double>(m);
  for (double& v : w.data()) v = stream.uniform(0.0, w_max);
  // The last label carries no evidence for any x. The minimum of the apparent
  // view then equals mu/c exactly, keeping the apparent view in bijection with
  // the concentration distribution; without such a floor the evidence scale is
  // not identifiable from apparent targets.
  for (double& v : w.row(c - 1)) v = 0.0;

  SynthData out;
  out.evidence_map = w;
  out.apparent = Matrix(n, c);
  Dataset& ds = out.dataset;
  ds.target_kind = TargetKind::kConcentration;
  ds.label_count = c;
  ds.features = Matrix(n, m);
  ds.targets = Matrix(n, c + 1);
  for (int j = 0; j < m; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (int j = 0; j <= c; ++j) ds.target_names.push_back("t" + std::to_string(j));

  std::vector<double> evidence(c);
  for (int r = 0; r < n; ++r) {
    auto x = ds.features.row(r);
    for (int j = 0; j < m; ++j) x[j] = stream.uniform();
    double total = 0.0;
    for (int i = 0; i < c; ++i) {
      double e = 0.0;
      const auto wrow = w.row(i);
      for (int j = 0; j < m; ++j) e += wrow[j] * x[j];
      evidence[i] = e;
      total += e;
    }
    const double denom = total + static_cast<double>(c);
    for (int i = 0; i < c; ++i) {
      ds.targets(r, i) = evidence[i] / denom;
      out.apparent(r, i) = (evidence[i] + 1.0) / denom;
    }
    ds.targets(r, c) = static_cast<double>(c) / denom;
  }
  validate_dataset(ds);
  return out;
}

}  // namespace cdl
