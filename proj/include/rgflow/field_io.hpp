#pragma once

#include "rgflow/field.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rgflow {

// Field container: a UTF-8 JSON manifest, one NUL byte, then raw
// little-endian binary64 payload with the listed components concatenated
// in manifest order, n*n values each.
//
//   {"components":["a_xx","a_xy","a_yy"],"dtype":"f64le","format_version":1,
//    "layout":"row-major","n":64}\0<payload>

inline constexpr int kFieldFormatVersion = 1;

struct FieldContainer {
    int n = 0;
    std::vector<std::string> components;
    std::vector<std::vector<double>> data;
};

void write_container(const std::filesystem::path& path, const FieldContainer& container);
FieldContainer read_container(const std::filesystem::path& path);

/// Writes a permeability field. Refuses invalid fields with InvariantError.
void write_field(const TensorField& field, const std::filesystem::path& path);
TensorField read_field(const std::filesystem::path& path);

void write_pressure(const PressureField& field, const std::filesystem::path& path);
PressureField read_pressure(const std::filesystem::path& path);

} // namespace rgflow
