#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hlpe/qubit_state.hpp"

namespace hlpe {

inline constexpr int kDensityFormatVersion = 1;

// Text format:
//   # comment lines
//   hlpe-density-matrix <version>
//   qubits <n>
//   dimension <d>
//   d lines of d "re im" pairs, row major, shortest round-trip decimal form
void write_density_matrix(std::ostream& out, const QubitState& state);
void save_density_matrix(const std::filesystem::path& path, const QubitState& state);

struct LoadedDensityMatrix {
  QubitState state;
  std::vector<std::string> warnings;
};

// Rejects Hermiticity or trace defects above 1e-6 and eigenvalues below -1e-6.
// Negative eigenvalues in [-1e-6, -1e-12) are clipped and the matrix is
// renormalized, with a warning.
LoadedDensityMatrix read_density_matrix(std::istream& in);
LoadedDensityMatrix load_density_matrix(const std::filesystem::path& path);

// FNV-1a of the canonical configuration text, as 16 hex digits.
std::string config_hash(std::string_view canonical);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& columns, std::string_view hash,
            std::uint64_t seed);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(const std::string& v);
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

}  // namespace hlpe
