#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "femtonet/harness.hpp"

namespace femtonet {

namespace {

const char *header = "scenario,scheme,x,metric,value,stderr,seed";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string &line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ConfigError("csv line " + std::to_string(lineno) + ": unterminated quote");
  out.push_back(cur);
  return out;
}

template <class T> T parse_number(const std::string &s, std::size_t lineno, const char *what) {
  std::istringstream is(s);
  T v{};
  is >> v;
  if (!is || !is.eof()) throw ConfigError("csv line " + std::to_string(lineno) + ": bad " + what + " '" + s + "'");
  return v;
}

} // namespace

std::string to_csv(const std::vector<Row> &rows) {
  std::string out = header;
  out += '\n';
  for (const auto &r : rows) {
    out += field(r.scenario) + ',' + field(r.scheme) + ',' + num(r.x) + ',' + field(r.metric) + ',' + num(r.value) + ',' + num(r.stderr_) + ',' +
           std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<Row> parse_csv(const std::string &text) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != header) throw ConfigError("csv line 1: expected header '" + std::string(header) + "'");
      continue;
    }
    if (line.empty()) continue;
    auto f = split_line(line, lineno);
    if (f.size() != 7) throw ConfigError("csv line " + std::to_string(lineno) + ": expected 7 fields, got " + std::to_string(f.size()));
    Row r;
    r.scenario = f[0];
    r.scheme = f[1];
    r.x = parse_number<double>(f[2], lineno, "x");
    r.metric = f[3];
    r.value = parse_number<double>(f[4], lineno, "value");
    r.stderr_ = parse_number<double>(f[5], lineno, "stderr");
    r.seed = parse_number<std::uint64_t>(f[6], lineno, "seed");
    rows.push_back(std::move(r));
  }
  if (lineno == 0) throw ConfigError("csv: empty input");
  return rows;
}

// One gnuplot page per metric, one line per scheme, data inlined as datablocks.
std::string plot_script(const std::vector<Row> &rows, const std::string &title) {
  std::map<std::string, std::map<std::string, std::vector<const Row *>>> by_metric;
  for (const auto &r : rows) by_metric[r.metric][r.scheme].push_back(&r);
  std::ostringstream os;
  os << "set datafile separator whitespace\nset key outside right\nset grid\n";
  int block = 0;
  std::map<std::string, std::vector<std::pair<std::string, int>>> names;
  for (const auto &[metric, schemes] : by_metric)
    for (const auto &[scheme, pts] : schemes) {
      os << "$d" << block << " << EOD\n";
      for (const Row *r : pts) os << num(r->x) << ' ' << num(r->value) << ' ' << num(r->stderr_) << '\n';
      os << "EOD\n";
      names[metric].push_back({scheme, block++});
    }
  for (const auto &[metric, list] : names) {
    os << "set title \"" << (title.empty() ? metric : title + ": " + metric) << "\"\n";
    os << "set xlabel \"x\"\nset ylabel \"" << metric << "\"\nplot ";
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) os << ", \\\n     ";
      os << "$d" << list[i].second << " using 1:2:3 with yerrorlines title \"" << list[i].first << "\"";
    }
    os << "\npause -1\n";
  }
  return os.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
  f.close();
  if (!f) throw ConfigError("write failed for '" + path + "'");
}

std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NotFound("cannot read '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

} // namespace femtonet
