#include "nggmix/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "nggmix/error.hpp"

namespace nggmix {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool is_missing(std::string_view cell) { return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN"; }

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ValidationError("line " + std::to_string(line) + ": " + message);
}

std::optional<double> cell_value(std::string_view cell, std::size_t line) {
  if (is_missing(cell)) return std::nullopt;
  const auto v = parse_number(cell);
  if (!v) fail(line, "non-numeric cell '" + std::string(cell) + "'");
  if (std::isnan(*v)) return std::nullopt;
  return v;
}

}  // namespace

std::vector<Observation> parse_dataset_text(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    const std::string_view raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (!trim(raw).empty() && trim(raw).front() != '#') lines.emplace_back(line_no, raw);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (lines.empty()) throw ValidationError("dataset is empty");

  std::size_t left_col = 0, right_col = 1;
  std::size_t width = split_cells(lines.front().second).size();
  std::size_t first = 0;
  const auto header = split_cells(lines.front().second);
  const bool has_header = !is_missing(header[0]) && !parse_number(header[0]);
  if (has_header) {
    first = 1;
    std::optional<std::size_t> l, r;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == "left") l = c;
      if (header[c] == "right") r = c;
    }
    if (l && r) {
      left_col = *l;
      right_col = *r;
    } else if (header.size() == 1) {
      width = 1;
    } else {
      fail(lines.front().first, "header must name 'left' and 'right' columns");
    }
  }
  const bool single = width == 1;

  std::vector<Observation> data;
  for (std::size_t k = first; k < lines.size(); ++k) {
    const auto [no, raw] = lines[k];
    const auto cells = split_cells(raw);
    if (single) {
      const auto v = cell_value(cells[0], no);
      if (!v) fail(no, "missing value");
      if (!std::isfinite(*v)) fail(no, "value must be finite");
      data.push_back(Observation::exact(*v));
      continue;
    }
    if (cells.size() <= std::max(left_col, right_col)) fail(no, "expected at least two columns");
    const auto l = cell_value(cells[left_col], no);
    const auto r = cell_value(cells[right_col], no);
    if (!l && !r) fail(no, "both bounds missing");
    if (l && r && *l > *r) fail(no, "left bound exceeds right bound");
    try {
      data.push_back(Observation::from_bounds(l, r));
    } catch (const ValidationError& e) {
      fail(no, e.what());
    }
  }
  if (data.empty()) throw ValidationError("dataset has no data rows");
  return data;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
  if (!out) throw ValidationError("failed writing " + path);
}

std::vector<Observation> parse_dataset(const std::string& path) { return parse_dataset_text(read_text_file(path)); }

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::string serialize_dataset(std::span<const Observation> data) {
  std::string out = "left,right\n";
  for (const Observation& o : data) {
    if (o.left()) out += format_double(*o.left());
    out += ',';
    if (o.right()) out += format_double(*o.right());
    out += '\n';
  }
  return out;
}

}  // namespace nggmix
