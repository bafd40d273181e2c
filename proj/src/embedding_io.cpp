#include "gpolab/embedding_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gpolab/error.hpp"

namespace gpolab::io {
namespace {

static_assert(std::endian::native == std::endian::little, "EMB1/LBL1 I/O assumes a little-endian host");

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  std::memcpy(b.data(), &v, 4);
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
  std::array<char, 4> b{};
  if (!in.read(b.data(), 4)) throw IoError("truncated header: " + path.string());
  std::uint32_t v = 0;
  std::memcpy(&v, b.data(), 4);
  return v;
}

void expect_magic(std::istream& in, const char* magic, const std::filesystem::path& path) {
  std::array<char, 4> b{};
  if (!in.read(b.data(), 4) || std::memcmp(b.data(), magic, 4) != 0) {
    throw IoError(std::string("bad magic (expected ") + magic + "): " + path.string());
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool has_magic(const std::filesystem::path& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::array<char, 4> b{};
  return in.read(b.data(), 4) && std::memcmp(b.data(), magic, 4) == 0;
}

std::int8_t parse_label(const std::string& field, const std::filesystem::path& path) {
  const std::string f = trim(field);
  if (f == "1" || f == "+1") return 1;
  if (f == "-1" || f == "0") return -1;
  throw IoError("label must be +1/-1 or 1/0, got '" + f + "' in " + path.string());
}

}  // namespace

void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  auto out = open_out(path);
  out.write("EMB1", 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  const RowMatrix<float> f = m.cast<float>();
  out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

EmbeddingMatrix read_emb1(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(in, "EMB1", path);
  const std::uint32_t rows = get_u32(in, path);
  const std::uint32_t dim = get_u32(in, path);
  RowMatrix<float> f(rows, dim);
  if (!in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)))) {
    throw IoError("truncated EMB1 payload: " + path.string());
  }
  return f.cast<double>();
}

void write_embedding_csv(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  auto out = open_out(path);
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

EmbeddingMatrix read_embedding_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw IoError("non-numeric CSV field '" + field + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged CSV rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty embedding CSV: " + path.string());
  EmbeddingMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return has_magic(path, "EMB1") ? read_emb1(path) : read_embedding_csv(path);
}

void write_lbl1(const std::filesystem::path& path, const SignVector& clean, const SignVector& noisy) {
  if (clean.size() != noisy.size()) throw std::invalid_argument("write_lbl1: label arrays differ in length");
  auto out = open_out(path);
  out.write("LBL1", 4);
  put_u32(out, static_cast<std::uint32_t>(clean.size()));
  out.write(reinterpret_cast<const char*>(clean.data()), clean.size());
  out.write(reinterpret_cast<const char*>(noisy.data()), noisy.size());
  if (!out) throw IoError("write failed: " + path.string());
}

std::pair<SignVector, SignVector> read_lbl1(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_magic(in, "LBL1", path);
  const std::uint32_t n = get_u32(in, path);
  SignVector clean(n), noisy(n);
  if (!in.read(reinterpret_cast<char*>(clean.data()), n) || !in.read(reinterpret_cast<char*>(noisy.data()), n)) {
    throw IoError("truncated LBL1 payload: " + path.string());
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    if ((clean[i] != 1 && clean[i] != -1) || (noisy[i] != 1 && noisy[i] != -1)) {
      throw IoError("LBL1 values must be +1 or -1: " + path.string());
    }
  }
  return {std::move(clean), std::move(noisy)};
}

SignVector read_labels(const std::filesystem::path& path) {
  if (has_magic(path, "LBL1")) return read_lbl1(path).first;
  auto in = open_in(path);
  std::vector<std::int8_t> labels;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    labels.push_back(parse_label(line.substr(0, line.find(',')), path));
  }
  SignVector out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<Eigen::Index>(i)] = labels[i];
  return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

KeyValues read_key_values(const std::filesystem::path& path) {
  auto in = open_in(path);
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("expected key=value, got '" + line + "' in " + path.string());
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace gpolab::io
