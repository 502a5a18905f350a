#include "qnls/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qnls/errors.hpp"

namespace qnls {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ValidationError("truncated checkpoint");
    return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const SpectralField& f, double time) {
    const Grid& g = f.grid();
    out.write("QNLS", 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.points(a)));
    for (int a = 0; a < g.dim(); ++a) put<double>(out, g.half_width(a));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.components()));
    put<double>(out, time);
    for (auto v : f.values()) {
        put<float>(out, static_cast<float>(v.real()));
        put<float>(out, static_cast<float>(v.imag()));
    }
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "QNLS", 4) != 0) throw ValidationError("checkpoint magic mismatch");
    auto version = take<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    auto d = static_cast<int>(take<std::uint32_t>(in));
    if (d < 1 || d > kMaxDim) throw ValidationError("checkpoint dimension out of range");
    std::array<int, kMaxDim> n{1, 1, 1};
    std::array<double, kMaxDim> R{1.0, 1.0, 1.0};
    for (int a = 0; a < d; ++a) n[a] = static_cast<int>(take<std::uint32_t>(in));
    for (int a = 0; a < d; ++a) R[a] = take<double>(in);
    auto m = static_cast<int>(take<std::uint32_t>(in));
    double time = take<double>(in);
    Grid grid(d, n, R);
    std::vector<cplx> values(grid.size() * m);
    for (auto& v : values) {
        float re = take<float>(in);
        float im = take<float>(in);
        v = cplx(re, im);
    }
    return {time, SpectralField(grid, std::move(values), m)};
}

void save_checkpoint(const std::filesystem::path& path, const SpectralField& f, double time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint " + path.string());
    write_checkpoint(out, f, time);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read checkpoint " + path.string());
    return read_checkpoint(in);
}

std::string encode_checkpoint(const SpectralField& f, double time) {
    std::ostringstream out(std::ios::binary);
    write_checkpoint(out, f, time);
    return out.str();
}

}  // namespace qnls
