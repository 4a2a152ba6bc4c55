#include "schubert/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "binary_io.hpp"
#include "schubert/error.hpp"

namespace schubert::model {

namespace {

void write_matrix(detail::LittleEndianWriter& w, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  }
}

void write_vector(detail::LittleEndianWriter& w, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
}

void read_matrix(detail::LittleEndianReader& r, Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64(what);
  }
}

void read_vector(detail::LittleEndianReader& r, Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.f64(what);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const GruParams& p) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageFailure("cannot write " + path.string());
  detail::LittleEndianWriter w(out);
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(p.dim_in()));
  w.u32(static_cast<std::uint32_t>(p.hidden()));
  for (const Matrix* m : {&p.w_z, &p.w_r, &p.w_h, &p.u_z, &p.u_r, &p.u_h}) write_matrix(w, *m);
  for (const Vector* v : {&p.b_z, &p.b_r, &p.b_h, &p.w_out}) write_vector(w, *v);
  w.f64(p.b_out);
  out.flush();
  if (!out) throw StorageFailure("failed writing " + path.string());
}

GruParams read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageFailure("cannot read " + path.string());
  detail::LittleEndianReader r(in, std::filesystem::file_size(path));

  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw FormatError("not an SCHP checkpoint (bad magic)", 0);
  }
  const auto version_at = r.offset();
  if (const auto version = r.u32("format version"); version != kCheckpointVersion) {
    throw FormatError("unsupported SCHP version " + std::to_string(version), version_at);
  }
  const auto dims_at = r.offset();
  const auto dim_in = r.u32("dim_in");
  const auto hidden = r.u32("hidden");
  if (dim_in == 0 || hidden == 0) throw FormatError("checkpoint has zero dimensions", dims_at);
  const std::uint64_t expected =
      8ULL * (3ULL * dim_in * hidden + 3ULL * hidden * hidden + 4ULL * hidden + 1);
  r.require(expected, "parameter tensors");

  GruParams p = GruParams::zeros(dim_in, hidden);
  read_matrix(r, p.w_z, "W_z");
  read_matrix(r, p.w_r, "W_r");
  read_matrix(r, p.w_h, "W_h");
  read_matrix(r, p.u_z, "U_z");
  read_matrix(r, p.u_r, "U_r");
  read_matrix(r, p.u_h, "U_h");
  read_vector(r, p.b_z, "b_z");
  read_vector(r, p.b_r, "b_r");
  read_vector(r, p.b_h, "b_h");
  read_vector(r, p.w_out, "w_out");
  p.b_out = r.f64("b_out");
  if (r.offset() != r.size()) throw FormatError("trailing bytes after parameters", r.offset());
  return p;
}

}  // namespace schubert::model
