#include "hlpe/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hlpe/errors.hpp"

namespace hlpe {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

long header_value(std::istream& in, const std::string& key) {
  std::string line;
  if (!next_content_line(in, line)) throw ConfigError("density file ends before '" + key + "'");
  std::istringstream ss(line);
  std::string k;
  long v = 0;
  if (!(ss >> k >> v) || k != key) throw ConfigError("density file: expected '" + key + " <n>'");
  return v;
}

}  // namespace

void write_density_matrix(std::ostream& out, const QubitState& state) {
  const auto& rho = state.matrix();
  out << "hlpe-density-matrix " << kDensityFormatVersion << "\n";
  out << "qubits " << state.qubits() << "\n";
  out << "dimension " << state.dim() << "\n";
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      if (c) out << "  ";
      out << format_double(rho(r, c).real()) << ' ' << format_double(rho(r, c).imag());
    }
    out << "\n";
  }
}

void save_density_matrix(const std::filesystem::path& path, const QubitState& state) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_density_matrix(f, state);
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

LoadedDensityMatrix read_density_matrix(std::istream& in) {
  const long version = header_value(in, "hlpe-density-matrix");
  if (version != kDensityFormatVersion) {
    throw ConfigError("unsupported density file version " + std::to_string(version));
  }
  const long qubits = header_value(in, "qubits");
  const long dim = header_value(in, "dimension");
  if (qubits < 1 || qubits > 10 || dim != (1L << qubits)) {
    throw ConfigError("density file: dimension must equal 2^qubits");
  }
  Eigen::MatrixXcd rho(dim, dim);
  std::string line;
  for (long r = 0; r < dim; ++r) {
    if (!next_content_line(in, line)) throw ConfigError("density file: missing matrix rows");
    std::istringstream ss(line);
    for (long c = 0; c < dim; ++c) {
      double re = 0.0;
      double im = 0.0;
      if (!(ss >> re >> im)) throw ConfigError("density file: malformed row " + std::to_string(r));
      rho(r, c) = {re, im};
    }
    std::string extra;
    if (ss >> extra) throw ConfigError("density file: too many entries in row " + std::to_string(r));
  }
  if (next_content_line(in, line)) throw ConfigError("density file: trailing content");
  if (!rho.allFinite()) throw ConfigError("density file: non-finite entries");
  if (hermiticity_defect(rho) > 1e-6) throw ConfigError("density file: matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-6 || std::abs(rho.trace().imag()) > 1e-6) {
    throw ConfigError("density file: trace differs from 1");
  }

  std::vector<std::string> warnings;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd((rho + rho.adjoint()) / 2.0));
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-6) {
    throw ConfigError("density file: eigenvalue " + std::to_string(lo) + " below -1e-6");
  }
  if (lo < -1e-12) {
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    rho /= rho.trace().real();
    std::ostringstream msg;
    msg << "clipped negative eigenvalues (minimum " << std::setprecision(3) << lo
        << ") and renormalized";
    warnings.push_back(msg.str());
  }
  return {QubitState(rho, 1e-6), std::move(warnings)};
}

LoadedDensityMatrix load_density_matrix(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open density file '" + path.string() + "'");
  return read_density_matrix(f);
}

std::string config_hash(std::string_view canonical) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& columns,
                     std::string_view hash, std::uint64_t seed)
    : out_(out), columns_(columns.size()) {
  out_ << "# config_hash=" << hash << " seed=" << seed << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(std::int64_t v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (filled_ == columns_) throw ConfigError("CSV row has too many cells");
  out_ << (filled_ ? "," : "") << v;
  ++filled_;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw ConfigError("CSV row has too few cells");
  out_ << "\n";
  filled_ = 0;
}

}  // namespace hlpe
