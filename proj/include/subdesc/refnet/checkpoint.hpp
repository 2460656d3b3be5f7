//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Flat binary checkpoint, all integers and floats little-endian:
//
//   char[8]  magic "SDESCKPT"
//   uint32   format version (1)
//   uint32   array count
//   per array:
//     uint32   name length, then the name bytes (UTF-8)
//     uint32   rank
//     uint64   extent per dimension
//     float64  values, row-major

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "subdesc/error.hpp"
#include "subdesc/refnet/trainer.hpp"

namespace subdesc::refnet {

inline constexpr char kCheckpointMagic[8] = {'S', 'D', 'E', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;

  bool operator==(const NamedArray&) const = default;
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw Error("truncated checkpoint");
  return v;
}

template <class Derived>
NamedArray to_array(const std::string& name, const Eigen::MatrixBase<Derived>& m) {
  NamedArray a{name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  a.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.data.push_back(m(i, j));
  return a;
}

inline NamedArray to_array(const std::string& name, const RowVectorXd& v) {
  return {name, {static_cast<std::uint64_t>(v.size())}, {v.data(), v.data() + v.size()}};
}

inline NamedArray to_array(const std::string& name, double x) { return {name, {}, {x}}; }

inline void check_shape(const NamedArray& a, std::vector<std::uint64_t> shape) {
  if (a.shape != shape) throw Error("shape mismatch for checkpoint array " + a.name);
}

template <class Derived>
void from_array(const NamedArray& a, Eigen::MatrixBase<Derived>& m) {
  check_shape(a, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())});
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = a.data[k++];
}

inline void from_array(const NamedArray& a, RowVectorXd& v) {
  check_shape(a, {static_cast<std::uint64_t>(v.size())});
  v = Eigen::Map<const RowVectorXd>(a.data.data(), v.size());
}

inline void from_array(const NamedArray& a, double& x) {
  check_shape(a, {});
  x = a.data[0];
}

}  // namespace detail

/// Every trainable array followed by the batch-norm buffers.
inline std::vector<NamedArray> model_arrays(const Model& m) {
  std::vector<NamedArray> out;
  auto collect = [&](const std::string& name, const auto& a) {
    out.push_back(detail::to_array(name, a));
  };
  visit_trainable(collect, m);
  visit_buffers(collect, m);
  return out;
}

/// Overwrites the arrays of `m`, which must already have the checkpoint's
/// architecture. Names and shapes must match exactly.
inline void restore(Model& m, const std::vector<NamedArray>& arrays) {
  std::size_t next = 0;
  auto assign = [&](const std::string& name, auto& a) {
    if (next >= arrays.size() || arrays[next].name != name)
      throw Error("checkpoint does not match the model at " + name);
    detail::from_array(arrays[next++], a);
  };
  visit_trainable(assign, m);
  visit_buffers(assign, m);
  if (next != arrays.size()) throw Error("checkpoint has extra arrays");
}

inline void write_checkpoint(const std::string& path, const std::vector<NamedArray>& arrays) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.shape.size()));
    for (auto d : a.shape) detail::put<std::uint64_t>(out, d);
    for (double x : a.data) detail::put<double>(out, x);
  }
  if (!out) throw Error("failed writing " + path);
}

inline std::vector<NamedArray> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw Error(path + " is not a checkpoint");
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));
  const auto count = detail::get<std::uint32_t>(in);
  std::vector<NamedArray> arrays(count);
  for (auto& a : arrays) {
    a.name.resize(detail::get<std::uint32_t>(in));
    if (!in.read(a.name.data(), static_cast<std::streamsize>(a.name.size())))
      throw Error("truncated checkpoint");
    a.shape.resize(detail::get<std::uint32_t>(in));
    std::uint64_t total = 1;
    for (auto& d : a.shape) total *= (d = detail::get<std::uint64_t>(in));
    a.data.resize(total);
    for (auto& x : a.data) x = detail::get<double>(in);
  }
  return arrays;
}

}  // namespace subdesc::refnet
