#include "relkin/io.hpp"

#include <array>
#include <boost/endian/conversion.hpp>
#include <charconv>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <vector>

namespace relkin {

namespace {

constexpr char kMagic[7] = {'R', 'E', 'L', 'K', 'I', 'N', '1'};

void append(std::string& line, double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, r.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

void write_csv(const std::filesystem::path& path, const std::string& header, std::size_t rows, int cols,
               const std::function<double(std::size_t, int)>& cell) {
    auto out = open_out(path);
    out << header << '\n';
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        line.clear();
        for (int c = 0; c < cols; ++c) {
            if (c) line.push_back(',');
            append(line, cell(r, c));
        }
        line.push_back('\n');
        out.write(line.data(), std::streamsize(line.size()));
    }
    finish(out, path);
}

template <class T> void put(std::string& buf, T v) {
    v = boost::endian::native_to_little(v);
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf.append(b, sizeof(T));
}
void put(std::string& buf, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put(buf, u);
}

template <class T> T get(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return boost::endian::little_to_native(v);
}
double get_double(const char* p) {
    const std::uint64_t u = get<std::uint64_t>(p);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

void write_bin(const std::filesystem::path& path, std::array<std::uint32_t, 3> dims, double extent, double time,
               const std::function<double(std::size_t)>& value) {
    const std::uint64_t count = std::uint64_t(dims[0]) * dims[1] * dims[2];
    std::string buf;
    buf.reserve(kBinHeaderBytes + count * 8);
    buf.append(kMagic, 7);
    buf.push_back(char(kBinVersion));
    for (auto d : dims) put(buf, d);
    put(buf, extent);
    put(buf, time);
    put(buf, count);
    for (std::uint64_t i = 0; i < count; ++i) put(buf, value(i));
    auto out = open_out(path);
    out.write(buf.data(), std::streamsize(buf.size()));
    finish(out, path);
}

struct BinFile {
    std::array<std::uint32_t, 3> dims;
    double extent, time;
    std::vector<double> values;
};

BinFile read_bin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < kBinHeaderBytes || std::memcmp(data.data(), kMagic, 7) != 0)
        throw IoError(path, "not a RELKIN1 file");
    if (std::uint8_t(data[7]) != kBinVersion) throw IoError(path, "unsupported format version");
    const char* h = data.data();
    BinFile f;
    for (int i = 0; i < 3; ++i) f.dims[i] = get<std::uint32_t>(h + 8 + 4 * i);
    f.extent = get_double(h + 20);
    f.time = get_double(h + 28);
    const auto count = get<std::uint64_t>(h + 36);
    if (count != std::uint64_t(f.dims[0]) * f.dims[1] * f.dims[2]) throw IoError(path, "count does not match dims");
    if (data.size() != kBinHeaderBytes + count * 8) throw IoError(path, "truncated or oversized payload");
    f.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) f.values[i] = get_double(h + kBinHeaderBytes + 8 * i);
    return f;
}

double field_cell(const CoefficientField& f, std::size_t r, int c) {
    const CoefficientEval& e = f.values[r];
    if (c < 3) return f.points[r][c];
    if (c < 12) return e.a((c - 3) / 3, (c - 3) % 3);
    if (c < 15) return e.b[c - 12];
    if (c < 18) return e.B[c - 15];
    switch (c) {
    case 18: return e.c;
    case 19: return e.err_a;
    case 20: return e.err_b;
    case 21: return e.err_B;
    default: return e.err_c;
    }
}

}  // namespace

FieldFormat parse_format(const std::string& s) {
    if (s == "csv") return FieldFormat::csv;
    if (s == "bin") return FieldFormat::bin;
    throw ConfigError("unknown format '" + s + "', expected csv or bin");
}

void write_snapshot(const DistributionState& s, const std::filesystem::path& path, FieldFormat fmt) {
    if (std::size_t(s.values.size()) != s.grid.size()) throw IoError(path, "state does not match its grid");
    if (fmt == FieldFormat::csv) {
        write_csv(path, "px,py,pz,f", s.grid.size(), 4, [&](std::size_t r, int c) {
            return c < 3 ? s.grid.node(r)[c] : s.values[Eigen::Index(r)];
        });
        return;
    }
    const auto n = std::uint32_t(s.grid.n);
    write_bin(path, {n, n, n}, s.grid.extent, s.time, [&](std::size_t i) { return s.values[Eigen::Index(i)]; });
}

void write_field(const CoefficientField& f, const std::filesystem::path& path, FieldFormat fmt) {
    if (f.points.size() != f.values.size()) throw IoError(path, "field points and values differ in length");
    if (fmt == FieldFormat::csv) {
        write_csv(path,
                  "px,py,pz,a11,a12,a13,a21,a22,a23,a31,a32,a33,b1,b2,b3,B1,B2,B3,c,err_a,err_b,err_B,err_c",
                  f.size(), kFieldColumns, [&](std::size_t r, int c) { return field_cell(f, r, c); });
        return;
    }
    write_bin(path, {std::uint32_t(f.size()), kFieldColumns, 1}, 0.0, f.time,
              [&](std::size_t i) { return field_cell(f, i / kFieldColumns, int(i % kFieldColumns)); });
}

void write_rfp_csv(const RfpState& s, const std::filesystem::path& path) {
    const auto np = std::size_t(s.grid.np);
    write_csv(path, "x,p,u", std::size_t(s.grid.nx) * np, 3, [&](std::size_t r, int c) {
        const int i = int(r / np), j = int(r % np);
        return c == 0 ? s.grid.x(i) : c == 1 ? s.grid.p(j) : s.u(i, j);
    });
}

DistributionState read_snapshot_bin(const std::filesystem::path& path) {
    BinFile b = read_bin(path);
    if (b.dims[0] != b.dims[1] || b.dims[1] != b.dims[2]) throw IoError(path, "not a cubic snapshot");
    DistributionState s;
    try {
        s.grid = MomentumGrid3D(b.extent, int(b.dims[0]));
    } catch (const ConfigError& e) {
        throw IoError(path, e.what());
    }
    s.time = b.time;
    s.values = Eigen::Map<Eigen::VectorXd>(b.values.data(), Eigen::Index(b.values.size()));
    return s;
}

CoefficientField read_field_bin(const std::filesystem::path& path) {
    const BinFile b = read_bin(path);
    if (b.dims[1] != kFieldColumns || b.dims[2] != 1) throw IoError(path, "not a coefficient field");
    CoefficientField f;
    f.time = b.time;
    for (std::size_t r = 0; r < b.dims[0]; ++r) {
        const double* v = b.values.data() + r * kFieldColumns;
        f.points.emplace_back(v[0], v[1], v[2]);
        CoefficientEval e;
        for (int k = 0; k < 9; ++k) e.a(k / 3, k % 3) = v[3 + k];
        e.b = Vec3(v[12], v[13], v[14]);
        e.B = Vec3(v[15], v[16], v[17]);
        e.c = v[18];
        e.err_a = v[19];
        e.err_b = v[20];
        e.err_B = v[21];
        e.err_c = v[22];
        f.values.push_back(e);
    }
    return f;
}

}  // namespace relkin
