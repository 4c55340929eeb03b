#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "gmsim/errors.hpp"
#include "gmsim/io.hpp"

namespace gmsim {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw TraceFormatError(where + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

Mode parse_mode(std::string_view s, const std::string& where) {
  if (s == "stick") return Mode::Stick;
  if (s == "slip") return Mode::Slip;
  throw TraceFormatError(where + ": expected stick or slip, got '" + std::string(s) + "'");
}

/// Largest i among columns named z_i, F_i or mode_i.
std::size_t infer_elements(const std::vector<std::string>& names) {
  std::size_t n = 0;
  for (const auto& name : names) {
    const auto us = name.find('_');
    if (us == std::string::npos) continue;
    std::size_t i = 0;
    const char* first = name.data() + us + 1;
    const char* last = name.data() + name.size();
    if (auto r = std::from_chars(first, last, i); r.ec == std::errc() && r.ptr == last) {
      n = std::max(n, i);
    }
  }
  return n;
}

std::string event_csv(const std::vector<Event>& events) {
  std::string out = "time,element,from,to,guard_value,bracket\n";
  for (const auto& e : events) {
    out += format_double(e.time) + "," + std::to_string(e.element + 1) + "," +
           std::string(to_string(e.from)) + "," + std::string(to_string(e.to)) + "," +
           format_double(e.guard_value) + "," + format_double(e.bracket) + "\n";
  }
  return out;
}

std::vector<Event> read_events(const std::filesystem::path& path) {
  std::vector<Event> out;
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = chomp(line);
    if (lineno == 1) {
      if (!row.starts_with("time,element,from,to")) {
        throw TraceFormatError(path.string() + ": event log header must start with "
                               "time,element,from,to");
      }
      continue;
    }
    if (row.empty()) continue;
    const auto cells = split(row, ',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != 4 && cells.size() != 6) {
      throw TraceFormatError(where + ": expected 4 or 6 fields");
    }
    Event e;
    e.time = parse_double(cells[0], where);
    const double element = parse_double(cells[1], where);
    if (element < 1.0 || element != static_cast<double>(static_cast<std::size_t>(element))) {
      throw TraceFormatError(where + ": element must be a positive integer");
    }
    e.element = static_cast<std::size_t>(element) - 1;
    e.from = parse_mode(cells[2], where);
    e.to = parse_mode(cells[3], where);
    if (cells.size() == 6) {
      e.guard_value = parse_double(cells[4], where);
      e.bracket = parse_double(cells[5], where);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::filesystem::path events_path(const std::filesystem::path& trace_path) {
  auto p = trace_path;
  p += ".events.csv";
  return p;
}

std::filesystem::path metadata_path(const std::filesystem::path& trace_path) {
  auto p = trace_path;
  p += ".meta.json";
  return p;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path.string() + "'");
  }
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  if (trace.rows() < 2) {
    throw TraceFormatError("refusing to write a trace with " + std::to_string(trace.rows()) +
                           " rows to '" + path.string() + "' (at least 2 required)");
  }
  const auto& names = trace.columns();
  std::string out;
  out.reserve(trace.rows() * names.size() * 24);
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out += ',';
    out += names[c];
  }
  out += '\n';
  std::vector<std::span<const double>> cols;
  for (std::size_t c = 0; c < names.size(); ++c) cols.push_back(trace.column(c));
  char buf[32];
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      const int n = std::snprintf(buf, sizeof buf, "%.17g", cols[c][r]);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out += '\n';
  }

  nlohmann::ordered_json meta;
  meta["loop"] = std::string(to_string(trace.loop()));
  meta["elements"] = trace.elements();
  meta["metadata"] = trace.metadata;

  write_text_atomic(events_path(path), event_csv(trace.events));
  write_text_atomic(metadata_path(path), meta.dump(2) + "\n");
  write_text_atomic(path, out);
}

Trace read_trace(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<std::string_view> lines;
  for (auto& l : split(text, '\n')) lines.push_back(chomp(l));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw TraceFormatError(path.string() + ": empty file");

  std::vector<std::string> names;
  for (auto h : split(lines.front(), ',')) names.emplace_back(h);

  LoopKind loop = std::find(names.begin(), names.end(), "x") != names.end() ? LoopKind::Closed
                                                                             : LoopKind::Open;
  std::size_t elements = infer_elements(names);
  std::map<std::string, std::string> metadata;
  if (const auto mp = metadata_path(path); std::filesystem::exists(mp)) {
    try {
      const auto meta = nlohmann::json::parse(read_text(mp));
      const auto lk = meta.at("loop").get<std::string>();
      if (lk != "closed" && lk != "open") throw TraceFormatError("bad loop kind '" + lk + "'");
      loop = lk == "closed" ? LoopKind::Closed : LoopKind::Open;
      elements = meta.at("elements").get<std::size_t>();
      metadata = meta.at("metadata").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw TraceFormatError(mp.string() + ": " + e.what());
    }
  }

  Trace trace;
  try {
    trace = Trace(loop, elements, names);
  } catch (const UnknownColumnError& e) {
    throw TraceFormatError(path.string() + ": header does not match the trace schema: " +
                           e.what());
  }
  if (lines.size() < 3) {
    throw TraceFormatError(path.string() + ": a trace needs at least 2 data rows");
  }
  trace.reserve(lines.size() - 1);
  std::vector<double> row(names.size());
  double prev_t = 0.0;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const std::string where = path.string() + ":" + std::to_string(l + 1);
    const auto cells = split(lines[l], ',');
    if (cells.size() != names.size()) {
      throw TraceFormatError(where + ": expected " + std::to_string(names.size()) +
                             " fields, got " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_double(cells[c], where);
    if (l > 1 && !(row[0] > prev_t)) {
      throw TraceFormatError(where + ": time column is not strictly increasing");
    }
    prev_t = row[0];
    trace.append_row(row);
  }
  trace.metadata = std::move(metadata);
  if (const auto ep = events_path(path); std::filesystem::exists(ep)) {
    trace.events = read_events(ep);
  }
  return trace;
}

}  // namespace gmsim
