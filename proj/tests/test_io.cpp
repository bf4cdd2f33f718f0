#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "nsrom/io/archive.hpp"
#include "nsrom/io/csv.hpp"
#include "nsrom/io/vtk.hpp"
#include "nsrom/problems.hpp"

using namespace nsrom;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "nsrom_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

SnapshotSet sample_snapshots() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> dist;
  SnapshotSet s;
  for (int j = 0; j < 3; ++j) {
    Vector u(10);
    for (double& x : u) x = dist(rng);
    s.add(0.5 * j, u);
  }
  return s;
}

std::string expect_format_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no FormatError";
  return {};
}

}  // namespace

TEST(SnapshotArchive, RoundTripIsExact) {
  const auto path = scratch("snap.bin").string();
  const SnapshotSet s = sample_snapshots();
  write_snapshot_archive(path, s, "[problem]\nname = taylor_green\n");
  const SnapshotArchive a = read_snapshot_archive(path);
  EXPECT_EQ(a.snapshots.times, s.times);
  EXPECT_EQ(a.snapshots.fields, s.fields);
  EXPECT_EQ(a.config_text, "[problem]\nname = taylor_green\n");
  // header layout: magic, version, reserved, n_dofs, count
  const std::vector<char> b = read_bytes(path);
  EXPECT_EQ(std::string(b.data(), 8), "NSROMSNP");
  EXPECT_EQ(b.size(), 8 + 4 + 4 + 8 + 8 + 3 * 8 + 3 * 10 * 8 + 8 + a.config_text.size());
}

TEST(SnapshotArchive, CorruptionNamesTheField) {
  const auto path = scratch("snap.bin");
  write_snapshot_archive(path.string(), sample_snapshots(), "cfg");
  const std::vector<char> good = read_bytes(path);

  std::vector<char> b = good;
  b[0] = 'X';
  write_bytes(path, b);
  EXPECT_NE(expect_format_error([&] { read_snapshot_archive(path.string()); }).find("'magic'"), std::string::npos);

  b = good;
  b[8] = 7;
  write_bytes(path, b);
  EXPECT_NE(expect_format_error([&] { read_snapshot_archive(path.string()); }).find("'version'"), std::string::npos);

  b.assign(good.begin(), good.begin() + 60);
  write_bytes(path, b);
  const std::string msg = expect_format_error([&] { read_snapshot_archive(path.string()); });
  EXPECT_NE(msg.find("'data'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("truncated"), std::string::npos);

  b = good;
  b.push_back('!');
  write_bytes(path, b);
  EXPECT_NE(expect_format_error([&] { read_snapshot_archive(path.string()); }).find("'trailer'"), std::string::npos);

  // second time equal to the first
  b = good;
  std::memcpy(b.data() + 32 + 8, b.data() + 32, 8);
  write_bytes(path, b);
  EXPECT_NE(expect_format_error([&] { read_snapshot_archive(path.string()); }).find("'times'"), std::string::npos);

  EXPECT_THROW(read_snapshot_archive(scratch("missing.bin").string()), ConfigError);
}

TEST(BasisArchive, RoundTripRebuildsMassModes) {
  const TaylorHoodSpace space(kh::mesh(4), kh::boundary());
  const LinearOperators ops = assemble_linear_operators(space, 1.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist;
  PodBasis b;
  b.centering = Centering::mean;
  b.snapshot_count = 7;
  b.tail = 1.5e-13;
  b.mean.resize(space.velocity_dofs());
  for (double& x : b.mean) x = dist(rng);
  for (int k = 0; k < 2; ++k) {
    Vector m(space.velocity_dofs());
    for (double& x : m) x = dist(rng);
    b.modes.push_back(m);
    b.mass_modes.push_back(ops.mass.multiply(m));
    b.eigenvalues.push_back(1.0 / (k + 1));
    b.grad_norms.push_back(3.0 + k);
  }
  const auto path = scratch("basis.bin").string();
  write_basis_archive(path, b, "cfg");
  const BasisArchive a = read_basis_archive(path, ops.mass);
  EXPECT_EQ(a.basis.modes, b.modes);
  EXPECT_EQ(a.basis.mass_modes, b.mass_modes);
  EXPECT_EQ(a.basis.mean, b.mean);
  EXPECT_EQ(a.basis.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.basis.grad_norms, b.grad_norms);
  EXPECT_EQ(a.basis.tail, b.tail);
  EXPECT_EQ(a.basis.snapshot_count, 7u);
  EXPECT_TRUE(a.basis.centered());

  const TaylorHoodSpace other(kh::mesh(3), kh::boundary());
  const std::string msg =
      expect_format_error([&] { read_basis_archive(path, assemble_linear_operators(other, 1.0).mass); });
  EXPECT_NE(msg.find("'n_dofs'"), std::string::npos) << msg;

  std::vector<char> bytes = read_bytes(path);
  bytes[16 + 24] = 9;  // centering flag
  write_bytes(path, bytes);
  EXPECT_NE(expect_format_error([&] { read_basis_archive(path, ops.mass); }).find("'centering'"), std::string::npos);
}

TEST(OperatorsArchive, RoundTrip) {
  RomOperators o;
  o.r = 2;
  o.form = NonlinearForm::rotational;
  o.nu = 0.25;
  o.centered = true;
  o.a = DenseMatrix(2, 2);
  o.a(0, 1) = 3.0;
  o.l1 = DenseMatrix(2, 2);
  o.l1(1, 0) = -1.0;
  o.l2 = DenseMatrix(2, 2);
  o.t = {1, 2, 3, 4, 5, 6, 7, 8};
  o.c = {0.5, -0.5};
  o.g = {0.0, 1e-300};
  const auto path = scratch("ops.bin").string();
  write_operators_archive(path, o, "cfg");
  const OperatorsArchive a = read_operators_archive(path);
  EXPECT_EQ(a.ops.r, 2u);
  EXPECT_EQ(a.ops.form, NonlinearForm::rotational);
  EXPECT_TRUE(a.ops.centered);
  EXPECT_EQ(a.ops.nu, 0.25);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(a.ops.a(i, j), o.a(i, j));
      EXPECT_EQ(a.ops.l1(i, j), o.l1(i, j));
    }
  EXPECT_EQ(a.ops.t, o.t);
  EXPECT_EQ(a.ops.c, o.c);
  EXPECT_EQ(a.ops.g, o.g);
  EXPECT_EQ(a.ops.tensor(1, 0, 1), 6.0);

  std::vector<char> bytes = read_bytes(path);
  bytes[24] = 11;  // form tag
  write_bytes(path, bytes);
  EXPECT_NE(expect_format_error([&] { read_operators_archive(path); }).find("'form'"), std::string::npos);
  write_operators_archive(path, o, "cfg");
  EXPECT_NE(expect_format_error([&] { read_snapshot_archive(path); }).find("'magic'"), std::string::npos);
}

TEST(Csv, RoundTripPreservesDoubles) {
  const Vector t{0.0, 0.1, 1.0 / 3.0};
  const Vector v{-1e-300, std::numeric_limits<double>::quiet_NaN(), 6.02214076e23};
  const auto path = scratch("table.csv").string();
  write_csv(path, make_table({"t", "value"}, {t, v}));
  const CsvTable back = read_csv(path);
  ASSERT_EQ(back.header, (std::vector<std::string>{"t", "value"}));
  EXPECT_EQ(back.column("t"), t);
  const Vector bv = back.column("value");
  EXPECT_EQ(bv[0], v[0]);
  EXPECT_TRUE(std::isnan(bv[1]));
  EXPECT_EQ(bv[2], v[2]);
  EXPECT_THROW(back.column("missing"), FormatError);
}

TEST(Csv, RaggedRowReportsLine) {
  const auto path = scratch("bad.csv");
  std::ofstream(path) << "a,b\n1,2\n3\n";
  try {
    read_csv(path.string());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::ofstream(path) << "a\nx1\n";
  EXPECT_THROW(read_csv(path.string()).column("a"), FormatError);
}

TEST(Vtk, WritesGridAndPointData) {
  const TaylorHoodSpace space(taylor_green::mesh(2), taylor_green::boundary());
  Vector u(space.velocity_dofs(), 0.0);
  u[0] = 2.5;
  const Vector p(space.pressure_dofs(), 1.0);
  const auto path = scratch("field.vtk");
  write_vtk(path.string(), space, u, p, "demo");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text.rfind("# vtk DataFile Version 3.0\ndemo\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 9 double\n", 0), 0u);
  EXPECT_NE(text.find("CELLS 8 32\n"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 9\nVECTORS velocity double\n2.5 0 0\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS pressure double 1\nLOOKUP_TABLE default\n1\n"), std::string::npos);
  EXPECT_THROW(write_vtk(path.string(), space, Vector(3, 0.0)), PreconditionError);
}
