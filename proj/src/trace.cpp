#include "gmsim/trace.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "gmsim/errors.hpp"

namespace gmsim {

std::string_view to_string(LoopKind k) noexcept {
  return k == LoopKind::Closed ? "closed" : "open";
}

std::vector<std::string> Trace::schema(LoopKind loop, std::size_t n) {
  std::vector<std::string> names{"t", "v"};
  if (loop == LoopKind::Closed) names.emplace_back("x");
  names.emplace_back("F");
  for (std::size_t i = 1; i <= n; ++i) names.push_back("z_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) names.push_back("F_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) names.push_back("mode_" + std::to_string(i));
  return names;
}

Trace::Trace(LoopKind loop, std::size_t elements)
    : Trace(loop, elements, schema(loop, elements)) {}

Trace::Trace(LoopKind loop, std::size_t elements, std::vector<std::string> columns)
    : loop_(loop), elements_(elements), names_(std::move(columns)) {
  const auto full = schema(loop, elements);
  auto cursor = full.begin();
  for (const auto& name : names_) {
    auto it = std::find(cursor, full.end(), name);
    if (it == full.end()) {
      throw UnknownColumnError("column '" + name + "' is not in the " +
                               std::string(to_string(loop)) + "-loop schema with " +
                               std::to_string(elements) + " elements (or is out of order)");
    }
    cursor = it + 1;
  }
  if (names_.empty() || names_.front() != "t") {
    throw UnknownColumnError("a trace must contain the time column 't' first");
  }
  data_.resize(names_.size());
}

bool Trace::has(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Trace::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw UnknownColumnError("trace has no column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> Trace::column(std::string_view name) const {
  return data_[index_of(name)];
}

void Trace::append_row(std::span<const double> row) {
  if (row.size() != names_.size()) {
    std::ostringstream os;
    os << "row has " << row.size() << " values, trace has " << names_.size()
       << " columns";
    throw TraceFormatError(os.str());
  }
  for (std::size_t c = 0; c < row.size(); ++c) data_[c].push_back(row[c]);
}

void Trace::reserve(std::size_t rows) {
  for (auto& col : data_) col.reserve(rows);
}

Trace Trace::select(const std::vector<std::string>& names) const {
  std::vector<std::string> ordered;
  for (const auto& n : names_) {
    if (std::find(names.begin(), names.end(), n) != names.end()) ordered.push_back(n);
  }
  for (const auto& n : names) {
    if (!has(n)) throw UnknownColumnError("trace has no column '" + n + "'");
  }
  Trace out(loop_, elements_, ordered);
  for (std::size_t c = 0; c < ordered.size(); ++c) {
    out.data_[c] = data_[index_of(ordered[c])];
  }
  out.events = events;
  out.metadata = metadata;
  return out;
}

bool Trace::operator==(const Trace& other) const {
  if (loop_ != other.loop_ || elements_ != other.elements_ ||
      names_ != other.names_ || events != other.events ||
      metadata != other.metadata || data_.size() != other.data_.size()) {
    return false;
  }
  for (std::size_t c = 0; c < data_.size(); ++c) {
    const auto& a = data_[c];
    const auto& b = other.data_[c];
    if (a.size() != b.size()) return false;
    if (!a.empty() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

double interpolate(std::span<const double> t, std::span<const double> values,
                   double tau) {
  if (t.empty()) throw ParameterError("cannot interpolate an empty series");
  if (tau <= t.front()) return values.front();
  if (tau >= t.back()) return values.back();
  const auto it = std::upper_bound(t.begin(), t.end(), tau);
  const std::size_t hi = static_cast<std::size_t>(it - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (tau - t[lo]) / (t[hi] - t[lo]);
  if (w == 0.0) return values[lo];
  return values[lo] + w * (values[hi] - values[lo]);
}

}  // namespace gmsim
