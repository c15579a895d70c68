#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "relkin/coefficients.hpp"
#include "relkin/solvers.hpp"

namespace relkin {

struct IoError : std::runtime_error {
    IoError(const std::filesystem::path& p, const std::string& what)
        : std::runtime_error(p.string() + ": " + what), path(p) {}
    std::filesystem::path path;
};

enum class FieldFormat { csv, bin };
FieldFormat parse_format(const std::string& s);  // "csv" or "bin", ConfigError otherwise

// Binary layout, little-endian throughout:
//   0  char[7]  "RELKIN1"
//   7  u8       format version (1)
//   8  u32[3]   dims; snapshots n,n,n; coefficient fields rows,23,1
//   20 f64      extent (P for snapshots, 0 for fields)
//   28 f64      time
//   36 u64      value count, the product of dims
//   44 f64[]    values, row-major, last axis fastest
inline constexpr std::size_t kBinHeaderBytes = 44;
inline constexpr std::uint8_t kBinVersion = 1;
inline constexpr int kFieldColumns = 23;

// CSV: header row, '.' decimal, LF newlines, shortest round-trip doubles.
// Snapshot columns px,py,pz,f. Field columns px,py,pz,a11..a33,b1..b3,B1..B3,c,err_a,err_b,err_B,err_c.
void write_snapshot(const DistributionState& s, const std::filesystem::path& path, FieldFormat fmt);
void write_field(const CoefficientField& f, const std::filesystem::path& path, FieldFormat fmt);
// u on the (x, p) grid as columns x,p,u
void write_rfp_csv(const RfpState& s, const std::filesystem::path& path);

DistributionState read_snapshot_bin(const std::filesystem::path& path);
CoefficientField read_field_bin(const std::filesystem::path& path);

}  // namespace relkin
