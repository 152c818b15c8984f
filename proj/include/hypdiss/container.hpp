#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "hypdiss/paradiff.hpp"

namespace hypdiss {

enum class ContainerKind : std::uint32_t { Symbol = 0, GridFunction = 1, FieldState = 2 };

// Fixed-size little-endian header, followed by `count` complex64 values (float32 re, im)
// in row-major order. A JSON sidecar `<path>.json` repeats the header and holds metadata.
struct ContainerHeader {
  ContainerKind kind = ContainerKind::Symbol;
  std::int32_t dims = 1;
  std::int32_t n_per_axis = 0;
  double box_length = 0.0;
  std::int32_t components = 1;
  double order = 0.0;
  std::uint64_t count = 0;
};

struct Container {
  ContainerHeader header;
  std::vector<cplx> data;
  nlohmann::json metadata;
};

void write_container(const std::filesystem::path& path, const ContainerHeader& header, std::span<const cplx> data,
                     const nlohmann::json& metadata = nlohmann::json::object());
// Throws IoError on a truncated file, bad magic or count mismatch.
[[nodiscard]] Container read_container(const std::filesystem::path& path);

void save_symbol(const std::filesystem::path& path, const DiscreteSymbol& a);
[[nodiscard]] DiscreteSymbol load_symbol(const std::filesystem::path& path);

void save_grid_function(const std::filesystem::path& path, const GridFunction& f,
                        const nlohmann::json& metadata = nlohmann::json::object());
[[nodiscard]] GridFunction load_grid_function(const std::filesystem::path& path);

}  // namespace hypdiss
