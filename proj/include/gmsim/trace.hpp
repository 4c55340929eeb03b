#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmsim/hybrid_integrator.hpp"

namespace gmsim {

enum class LoopKind { Closed, Open };

std::string_view to_string(LoopKind k) noexcept;

/// Column-major time series of a simulation run.
///
/// Full schema: t, v, [x,] F, z_1..z_n, F_1..F_n, mode_1..mode_n, where x is
/// present for closed-loop runs only and modes are stored as 0 (stick) or
/// 1 (slip). A trace may also hold a schema-ordered subset of those columns.
class Trace {
 public:
  Trace() = default;
  Trace(LoopKind loop, std::size_t elements);
  /// Subset of the full schema; names must appear in schema order and must
  /// include `t`.
  Trace(LoopKind loop, std::size_t elements, std::vector<std::string> columns);

  static std::vector<std::string> schema(LoopKind loop, std::size_t elements);

  LoopKind loop() const noexcept { return loop_; }
  std::size_t elements() const noexcept { return elements_; }
  const std::vector<std::string>& columns() const noexcept { return names_; }
  std::size_t rows() const noexcept { return data_.empty() ? 0 : data_.front().size(); }
  bool empty() const noexcept { return rows() == 0; }

  bool has(std::string_view name) const noexcept;
  std::size_t index_of(std::string_view name) const;  ///< throws UnknownColumnError
  std::span<const double> column(std::string_view name) const;
  std::span<const double> column(std::size_t index) const { return data_.at(index); }

  void append_row(std::span<const double> row);
  void reserve(std::size_t rows);

  /// Copy restricted to `names` (reordered into schema order).
  Trace select(const std::vector<std::string>& names) const;

  std::vector<Event> events;
  std::map<std::string, std::string> metadata;

  /// Column data, events and metadata all equal (bit-exact doubles).
  bool operator==(const Trace& other) const;

 private:
  LoopKind loop_ = LoopKind::Open;
  std::size_t elements_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
};

/// Linear interpolation of column `values` (sampled at `t`) at time `tau`.
/// `t` must be strictly increasing and tau inside [t.front(), t.back()].
double interpolate(std::span<const double> t, std::span<const double> values,
                   double tau);

}  // namespace gmsim
