#pragma once

// Binary archives for snapshots, POD bases and reduced operators. All three
// share one layout: an 8-byte magic, u32 version, u32 reserved, then
// little-endian payload described in docs/formats.md, ending with a u64
// length and the config text that produced the data.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/fem/forms.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/rom.hpp"
#include "nsrom/snapshots.hpp"

namespace nsrom {

static_assert(std::endian::native == std::endian::little, "archives assume a little-endian host");

inline constexpr std::uint32_t archive_version = 1;
inline constexpr std::string_view snapshot_magic = "NSROMSNP";
inline constexpr std::string_view basis_magic = "NSROMPOD";
inline constexpr std::string_view operators_magic = "NSROMOPS";

namespace detail {

class ArchiveWriter {
 public:
  ArchiveWriter(const std::string& path, std::string_view magic) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
    out_.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    u32(archive_version);
    u32(0);
  }

  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void f64s(std::span<const double> v) { raw(v.data(), v.size() * sizeof(double)); }
  void text(std::string_view s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void close() {
    out_.close();
    if (!out_) throw ConfigError("failed writing '" + path_ + "'");
  }

 private:
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  std::string path_;
  std::ofstream out_;
};

// Reads the whole file; every read names the field so a truncated or
// corrupt file reports where it went wrong.
class ArchiveReader {
 public:
  ArchiveReader(const std::string& path, std::string_view magic, std::string_view kind) : kind_(kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(std::string(kind) + " not found: " + path);
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (bytes_.size() < magic.size() || std::string_view(bytes_.data(), magic.size()) != magic)
      fail("magic", "expected '" + std::string(magic) + "'");
    pos_ = magic.size();
    const std::uint32_t version = u32("version");
    if (version != archive_version) fail("version", "unsupported version " + std::to_string(version));
    u32("reserved");
  }

  std::uint32_t u32(const char* field) { return read<std::uint32_t>(field); }
  std::uint64_t u64(const char* field) { return read<std::uint64_t>(field); }
  double f64(const char* field) { return read<double>(field); }

  Vector f64s(const char* field, std::uint64_t count) {
    need(field, count, sizeof(double));
    Vector v(count);
    std::memcpy(v.data(), bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return v;
  }

  std::string text(const char* field) {
    const std::uint64_t n = u64(field);
    need(field, n, 1);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  void finish() {
    if (pos_ != bytes_.size())
      fail("trailer", std::to_string(bytes_.size() - pos_) + " unexpected trailing bytes");
  }

  [[noreturn]] void fail(std::string_view field, const std::string& what) const {
    throw FormatError(std::string(kind_) + ": bad field '" + std::string(field) + "': " + what);
  }

 private:
  template <class T>
  T read(const char* field) {
    need(field, 1, sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void need(const char* field, std::uint64_t count, std::size_t size) const {
    const std::uint64_t left = bytes_.size() - pos_;
    if (count > left / size) fail(field, "file truncated");
  }

  std::string_view kind_;
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

struct SnapshotArchive {
  SnapshotSet snapshots;
  std::string config_text;
};

inline void write_snapshot_archive(const std::string& path, const SnapshotSet& s, std::string_view config_text) {
  s.validate();
  detail::ArchiveWriter w(path, snapshot_magic);
  w.u64(s.dofs());
  w.u64(s.size());
  w.f64s(s.times);
  for (const Vector& f : s.fields) w.f64s(f);
  w.text(config_text);
  w.close();
}

inline SnapshotArchive read_snapshot_archive(const std::string& path) {
  detail::ArchiveReader r(path, snapshot_magic, "snapshot archive");
  const std::uint64_t dofs = r.u64("n_dofs");
  const std::uint64_t count = r.u64("count");
  if (count == 0) r.fail("count", "archive holds no snapshots");
  SnapshotArchive a;
  const Vector times = r.f64s("times", count);
  for (std::uint64_t k = 0; k < count; ++k) {
    if (k > 0 && !(times[k] > times[k - 1])) r.fail("times", "times not increasing at index " + std::to_string(k));
    a.snapshots.add(times[k], r.f64s("data", dofs));
  }
  a.config_text = r.text("config");
  r.finish();
  return a;
}

struct BasisArchive {
  PodBasis basis;
  std::string config_text;
};

inline void write_basis_archive(const std::string& path, const PodBasis& b, std::string_view config_text) {
  detail::ArchiveWriter w(path, basis_magic);
  w.u64(b.dofs());
  w.u64(b.rank());
  w.u64(b.snapshot_count);
  w.u32(b.centered() ? 1 : 0);
  w.u32(0);
  w.f64(b.tail);
  w.f64s(b.eigenvalues);
  w.f64s(b.grad_norms);
  if (b.centered()) w.f64s(b.mean);
  for (const Vector& m : b.modes) w.f64s(m);
  w.text(config_text);
  w.close();
}

// M psi_k is not stored; it is rebuilt from the mass matrix.
inline BasisArchive read_basis_archive(const std::string& path, const SparseMatrix& mass) {
  detail::ArchiveReader r(path, basis_magic, "basis archive");
  const std::uint64_t dofs = r.u64("n_dofs");
  const std::uint64_t rank = r.u64("rank");
  BasisArchive a;
  PodBasis& b = a.basis;
  b.snapshot_count = r.u64("snapshot_count");
  const std::uint32_t centering = r.u32("centering");
  if (centering > 1) r.fail("centering", "expected 0 or 1, got " + std::to_string(centering));
  b.centering = centering ? Centering::mean : Centering::none;
  r.u32("reserved");
  b.tail = r.f64("tail");
  b.eigenvalues = r.f64s("eigenvalues", rank);
  b.grad_norms = r.f64s("grad_norms", rank);
  if (b.centered()) b.mean = r.f64s("mean", dofs);
  for (std::uint64_t k = 0; k < rank; ++k) b.modes.push_back(r.f64s("modes", dofs));
  a.config_text = r.text("config");
  r.finish();
  if (dofs != mass.rows()) r.fail("n_dofs", "basis has " + std::to_string(dofs) + " DOFs, space has " + std::to_string(mass.rows()));
  for (const Vector& m : b.modes) b.mass_modes.push_back(mass.multiply(m));
  return a;
}

struct OperatorsArchive {
  RomOperators ops;
  std::string config_text;
};

inline void write_operators_archive(const std::string& path, const RomOperators& o, std::string_view config_text) {
  detail::ArchiveWriter w(path, operators_magic);
  w.u64(o.r);
  w.u32(static_cast<std::uint32_t>(o.form));
  w.u32(o.centered ? 1 : 0);
  w.f64(o.nu);
  w.f64s(o.a.data());
  w.f64s(o.t);
  w.f64s(o.l1.data());
  w.f64s(o.l2.data());
  w.f64s(o.c);
  w.f64s(o.g);
  w.text(config_text);
  w.close();
}

inline OperatorsArchive read_operators_archive(const std::string& path) {
  detail::ArchiveReader r(path, operators_magic, "operators archive");
  OperatorsArchive a;
  RomOperators& o = a.ops;
  o.r = r.u64("r");
  if (o.r == 0 || o.r > 4096) r.fail("r", "implausible mode count " + std::to_string(o.r));
  const std::uint32_t form = r.u32("form");
  if (form >= all_forms.size()) r.fail("form", "unknown form tag " + std::to_string(form));
  o.form = static_cast<NonlinearForm>(form);
  o.centered = r.u32("centering") != 0;
  o.nu = r.f64("nu");
  const auto matrix = [&](const char* field) {
    DenseMatrix m(o.r, o.r);
    const Vector v = r.f64s(field, o.r * o.r);
    std::copy(v.begin(), v.end(), m.data().begin());
    return m;
  };
  o.a = matrix("a");
  o.t = r.f64s("tensor", o.r * o.r * o.r);
  o.l1 = matrix("l1");
  o.l2 = matrix("l2");
  o.c = r.f64s("c", o.r);
  o.g = r.f64s("g", o.r);
  a.config_text = r.text("config");
  r.finish();
  return a;
}

}  // namespace nsrom
