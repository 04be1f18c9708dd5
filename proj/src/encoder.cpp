#include "och/encoder.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "och/errors.hpp"
#include "och/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

namespace och {

namespace {

void check_row_orthonormal(const Eigen::MatrixXd& m, double tol,
                           const char* what) {
  const Eigen::MatrixXd gram = m * m.transpose();
  const double err =
      (gram - Eigen::MatrixXd::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff();
  if (err > tol)
    throw ArgumentError(std::string(what) +
                        " does not have orthonormal rows (residual " +
                        std::to_string(err) + ")");
}

void write_u32(std::ofstream& file, std::uint32_t v) {
  file.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& file, const std::string& path) {
  std::uint32_t v = 0;
  file.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (file.gcount() != sizeof(v))
    throw FormatError("truncated file: " + path);
  return v;
}

void write_matrix(std::ofstream& file, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      file.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

Eigen::MatrixXd read_matrix(std::ifstream& file, Eigen::Index rows,
                            Eigen::Index cols, const std::string& path) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = 0.0;
      file.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (file.gcount() != sizeof(v))
        throw FormatError("truncated file: " + path);
      m(i, j) = v;
    }
  return m;
}

}  // namespace

HashModel build_och_model(const OrdinalProjection& projection,
                          const StiefelPoint& V, std::size_t r) {
  if (V.r() != r)
    throw ArgumentError("build_och_model: V has " + std::to_string(V.r()) +
                        " columns, expected r = " + std::to_string(r));
  if (V.d_svd() != projection.d_svd())
    throw ArgumentError("build_och_model: V rows do not match projection d_svd");
  check_row_orthonormal(V.V, 1e-6, "build_och_model: V");
  check_row_orthonormal(projection.Z, 1e-6, "build_och_model: Z");

  HashModel model;
  model.kind = ModelKind::Och;
  model.Z = projection.Z;
  model.eigenvalues = projection.eigenvalues;
  model.V = V.V;
  model.W = projection.Z.transpose() * V.V;
  model.d = projection.d();
  model.d_svd = projection.d_svd();
  model.r = r;
  return model;
}

HashModel build_lsh_model(std::size_t d, std::size_t r, std::uint64_t seed) {
  if (d < 1 || r < 1)
    throw ArgumentError("build_lsh_model: d and r must be >= 1");
  Rng rng(seed);
  HashModel model;
  model.kind = ModelKind::Lsh;
  model.d = d;
  model.d_svd = d;
  model.r = r;
  model.Z = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                      static_cast<Eigen::Index>(d));
  model.eigenvalues = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  model.V.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < model.V.rows(); ++i)
    for (Eigen::Index j = 0; j < model.V.cols(); ++j)
      model.V(i, j) = rng.gaussian();
  model.W = model.V;
  return model;
}

BinaryCodes encode(const HashModel& model, const DataMatrix& points) {
  if (points.d != model.d)
    throw ArgumentError("encode: points have dimension " +
                        std::to_string(points.d) + ", model expects " +
                        std::to_string(model.d));
  BinaryCodes codes;
  codes.n = points.n;
  codes.r = model.r;
  codes.words_per_code = (model.r + 63) / 64;
  codes.words.assign(codes.n * codes.words_per_code, 0u);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < points.n; ++i) {
    Eigen::Map<const Eigen::VectorXd> x(points.row(i),
                                        static_cast<Eigen::Index>(points.d));
    const Eigen::VectorXd proj = model.W.transpose() * x;
    std::uint64_t* row = codes.words.data() + i * codes.words_per_code;
    for (std::size_t k = 0; k < model.r; ++k)
      if (proj(static_cast<Eigen::Index>(k)) > 0.0)
        row[k / 64] |= std::uint64_t{1} << (k % 64);
  }
  return codes;
}

std::uint32_t hamming_rows(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t words) {
  std::uint32_t dist = 0;
  for (std::size_t w = 0; w < words; ++w)
    dist += static_cast<std::uint32_t>(std::popcount(a[w] ^ b[w]));
  return dist;
}

std::uint32_t hamming(const BinaryCodes& codes, std::size_t i, std::size_t j) {
  if (i >= codes.n || j >= codes.n)
    throw ArgumentError("hamming: row index out of range");
  return hamming_rows(codes.row(i), codes.row(j), codes.words_per_code);
}

void save_model(const std::string& path, const HashModel& model) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FormatError("save_model: cannot open " + path);
  file.write("OCH1", 4);
  write_u32(file, static_cast<std::uint32_t>(model.kind));
  write_u32(file, static_cast<std::uint32_t>(model.d));
  write_u32(file, static_cast<std::uint32_t>(model.d_svd));
  write_u32(file, static_cast<std::uint32_t>(model.r));
  write_matrix(file, model.Z);
  write_matrix(file, model.V);
  write_matrix(file, model.eigenvalues);
  if (!file) throw FormatError("save_model: write failed for " + path);
}

HashModel load_model(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("load_model: cannot open " + path);
  char magic[4] = {};
  file.read(magic, 4);
  if (file.gcount() != 4 || std::memcmp(magic, "OCH1", 4) != 0)
    throw FormatError("load_model: bad magic in " + path);

  HashModel model;
  const std::uint32_t kind = read_u32(file, path);
  if (kind > 1) throw FormatError("load_model: unknown model kind in " + path);
  model.kind = static_cast<ModelKind>(kind);
  model.d = read_u32(file, path);
  model.d_svd = read_u32(file, path);
  model.r = read_u32(file, path);
  if (model.d == 0 || model.d_svd == 0 || model.r == 0 || model.d_svd > model.d)
    throw FormatError("load_model: inconsistent header in " + path);

  const auto d = static_cast<Eigen::Index>(model.d);
  const auto d_svd = static_cast<Eigen::Index>(model.d_svd);
  const auto r = static_cast<Eigen::Index>(model.r);
  model.Z = read_matrix(file, d_svd, d, path);
  model.V = read_matrix(file, d_svd, r, path);
  model.eigenvalues = read_matrix(file, d_svd, 1, path);
  model.W = model.Z.transpose() * model.V;
  return model;
}

void write_codes(const std::string& path, const BinaryCodes& codes) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw FormatError("write_codes: cannot open " + path);
  write_u32(file, static_cast<std::uint32_t>(codes.n));
  write_u32(file, static_cast<std::uint32_t>(codes.r));
  file.write(reinterpret_cast<const char*>(codes.words.data()),
             static_cast<std::streamsize>(codes.words.size() * sizeof(std::uint64_t)));
  if (!file) throw FormatError("write_codes: write failed for " + path);
}

BinaryCodes load_codes(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("load_codes: cannot open " + path);
  BinaryCodes codes;
  codes.n = read_u32(file, path);
  codes.r = read_u32(file, path);
  if (codes.r == 0) throw FormatError("load_codes: zero code length in " + path);
  codes.words_per_code = (codes.r + 63) / 64;
  codes.words.resize(codes.n * codes.words_per_code);
  file.read(reinterpret_cast<char*>(codes.words.data()),
            static_cast<std::streamsize>(codes.words.size() * sizeof(std::uint64_t)));
  if (static_cast<std::size_t>(file.gcount()) !=
      codes.words.size() * sizeof(std::uint64_t))
    throw FormatError("load_codes: truncated file " + path);
  return codes;
}

}  // namespace och
