#include "s2g/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "s2g/error.hpp"

namespace s2g::csv {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

struct Line {
  std::size_t number;
  std::vector<std::string> cells;
};

std::vector<Line> numbered_rows(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    out.push_back({n, split_cells(line)});
  }
  return out;
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || cell.empty())
    throw ParseError(source, line, "not a number: '" + cell + "'");
  return v;
}

int parse_int(const std::string& cell, const std::string& source, std::size_t line) {
  int v = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || cell.empty())
    throw ParseError(source, line, "not an integer: '" + cell + "'");
  return v;
}

}  // namespace

std::vector<std::vector<std::string>> parse_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (auto& l : numbered_rows(text)) rows.push_back(std::move(l.cells));
  return rows;
}

std::string samples_to_csv(const SampleBatch& batch) {
  std::string out = batch.dim() == 2 ? "x,y,label\n" : "x,label\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t d = 0; d < batch.dim(); ++d) {
      out += format_double(batch.points(i, d));
      out += ',';
    }
    out += std::to_string(batch.labels.at(i));
    out += '\n';
  }
  return out;
}

SampleBatch samples_from_csv(const std::string& text, const std::string& source) {
  const auto lines = numbered_rows(text);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto& header = lines.front();
  std::size_t dim = 0;
  if (header.cells == std::vector<std::string>{"x", "label"}) dim = 1;
  else if (header.cells == std::vector<std::string>{"x", "y", "label"}) dim = 2;
  else throw ParseError(source, header.number, "expected header 'x,label' or 'x,y,label'");
  SampleBatch batch;
  std::vector<double> data;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.cells.size() != dim + 1)
      throw ParseError(source, l.number, "expected " + std::to_string(dim + 1) + " fields, got " +
                                             std::to_string(l.cells.size()));
    for (std::size_t d = 0; d < dim; ++d) data.push_back(parse_number(l.cells[d], source, l.number));
    batch.labels.push_back(parse_int(l.cells[dim], source, l.number));
  }
  batch.points = Matrix(batch.labels.size(), dim, std::move(data));
  return batch;
}

std::string trajectories_to_csv(const std::vector<Trajectory>& trajectories, int T) {
  const std::size_t dim = trajectories.empty() ? 1 : trajectories.front().states.cols();
  std::string out = dim == 2 ? "chain,t,x,y\n" : "chain,t,x\n";
  for (std::size_t c = 0; c < trajectories.size(); ++c) {
    const auto& s = trajectories[c].states;
    for (std::size_t r = 0; r < s.rows(); ++r) {
      out += std::to_string(c);
      out += ',';
      out += std::to_string(T - static_cast<int>(r));
      for (std::size_t d = 0; d < dim; ++d) {
        out += ',';
        out += format_double(s(r, d));
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<Trajectory> trajectories_from_csv(const std::string& text, const std::string& source) {
  const auto lines = numbered_rows(text);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  std::size_t dim = 0;
  if (lines[0].cells == std::vector<std::string>{"chain", "t", "x"}) dim = 1;
  else if (lines[0].cells == std::vector<std::string>{"chain", "t", "x", "y"}) dim = 2;
  else throw ParseError(source, lines[0].number, "expected header 'chain,t,x[,y]'");
  std::vector<std::vector<double>> data;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.cells.size() != dim + 2)
      throw ParseError(source, l.number, "expected " + std::to_string(dim + 2) + " fields");
    const int chain = parse_int(l.cells[0], source, l.number);
    parse_int(l.cells[1], source, l.number);
    if (chain < 0 || static_cast<std::size_t>(chain) > data.size())
      throw ParseError(source, l.number, "chain ids must be contiguous from 0");
    if (static_cast<std::size_t>(chain) == data.size()) data.emplace_back();
    for (std::size_t d = 0; d < dim; ++d)
      data[static_cast<std::size_t>(chain)].push_back(parse_number(l.cells[2 + d], source, l.number));
  }
  std::vector<Trajectory> out;
  for (auto& rows : data) {
    Trajectory tr;
    const std::size_t n = rows.size() / dim;
    tr.states = Matrix(n, dim, std::move(rows));
    out.push_back(std::move(tr));
  }
  return out;
}

std::string loss_to_csv(const std::vector<LossPoint>& curve) {
  std::string out = "step,loss\n";
  for (const auto& p : curve) out += std::to_string(p.step) + "," + format_double(p.loss) + "\n";
  return out;
}

std::string table_to_csv(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  auto join = [](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    return s + "\n";
  };
  std::string out = join(header);
  for (const auto& r : rows) out += join(r);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace s2g::csv
