#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "qnls/field.hpp"

namespace qnls {

constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    double time = 0.0;
    SpectralField field;
};

// Layout (little endian): "QNLS", u32 version, u32 d, u32 n[d], f64 R[d],
// u32 m, f64 time, then complex64 (f32 re, f32 im) pairs in row-major order,
// component blocks back to back.
void write_checkpoint(std::ostream& out, const SpectralField& f, double time);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const SpectralField& f, double time);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const SpectralField& f, double time);

}  // namespace qnls
