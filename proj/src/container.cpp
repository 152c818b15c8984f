#include "hypdiss/container.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "hypdiss/error.hpp"
#include "hypdiss/io.hpp"

namespace hypdiss {

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'P', 'D', 'S', 'Y', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) fail(ErrorKind::IoError, "container is truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::string kind_name(ContainerKind k) {
  switch (k) {
    case ContainerKind::Symbol: return "symbol";
    case ContainerKind::GridFunction: return "grid_function";
    case ContainerKind::FieldState: return "field_state";
  }
  return "unknown";
}

std::string class_name(SymbolClass c) {
  switch (c) {
    case SymbolClass::GammaK: return "Gamma_k";
    case SymbolClass::S11: return "S_11";
    case SymbolClass::Smoothed: return "smoothed";
  }
  return "unknown";
}

SymbolClass class_from_name(const std::string& s) {
  if (s == "S_11") return SymbolClass::S11;
  if (s == "smoothed") return SymbolClass::Smoothed;
  return SymbolClass::GammaK;
}

}  // namespace

void write_container(const std::filesystem::path& path, const ContainerHeader& header, std::span<const cplx> data,
                     const nlohmann::json& metadata) {
  if (header.count != data.size()) fail(ErrorKind::IoError, "container count does not match payload");
  std::string out;
  out.reserve(64 + data.size() * 8);
  out.append(kMagic, sizeof kMagic);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(header.kind));
  put(out, header.dims);
  put(out, header.n_per_axis);
  put(out, header.box_length);
  put(out, header.components);
  put(out, header.order);
  put(out, header.count);
  for (const cplx& z : data) {
    put(out, static_cast<float>(z.real()));
    put(out, static_cast<float>(z.imag()));
  }
  write_file_atomic(path, out);

  nlohmann::json side = metadata;
  side["kind"] = kind_name(header.kind);
  side["version"] = kVersion;
  side["dims"] = header.dims;
  side["N"] = header.n_per_axis;
  side["L_box"] = header.box_length;
  side["n"] = header.components;
  side["order"] = header.order;
  side["count"] = header.count;
  side["payload"] = "complex64 little-endian row-major";
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  write_json_atomic(sidecar, side);
}

Container read_container(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0) {
    fail(ErrorKind::IoError, "not a container file: " + path.string());
  }
  std::size_t pos = sizeof kMagic;
  if (take<std::uint32_t>(in, pos) != kVersion) fail(ErrorKind::IoError, "unsupported container version");
  Container c;
  c.header.kind = static_cast<ContainerKind>(take<std::uint32_t>(in, pos));
  c.header.dims = take<std::int32_t>(in, pos);
  c.header.n_per_axis = take<std::int32_t>(in, pos);
  c.header.box_length = take<double>(in, pos);
  c.header.components = take<std::int32_t>(in, pos);
  c.header.order = take<double>(in, pos);
  c.header.count = take<std::uint64_t>(in, pos);
  if (in.size() - pos != c.header.count * 8) fail(ErrorKind::IoError, "container payload size mismatch");
  c.data.resize(c.header.count);
  for (auto& z : c.data) {
    const float re = take<float>(in, pos);
    const float im = take<float>(in, pos);
    z = cplx(re, im);
  }
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  if (std::filesystem::exists(sidecar)) c.metadata = nlohmann::json::parse(read_file(sidecar));
  return c;
}

void save_symbol(const std::filesystem::path& path, const DiscreteSymbol& a) {
  const Lattice& l = a.lattice();
  ContainerHeader h{ContainerKind::Symbol, l.d(), l.n_per_axis(), l.box_length(), a.n(), a.order(), a.data().size()};
  write_container(path, h, a.data(), {{"class_tag", class_name(a.tag())}});
}

DiscreteSymbol load_symbol(const std::filesystem::path& path) {
  Container c = read_container(path);
  if (c.header.kind != ContainerKind::Symbol) fail(ErrorKind::IoError, "container does not hold a symbol");
  const SymbolClass tag =
      c.metadata.contains("class_tag") ? class_from_name(c.metadata["class_tag"].get<std::string>()) : SymbolClass::GammaK;
  DiscreteSymbol a(Lattice(c.header.dims, c.header.n_per_axis, c.header.box_length), c.header.components, c.header.order,
                   tag);
  if (a.data().size() != c.data.size()) fail(ErrorKind::IoError, "symbol size does not match its header");
  a.data() = std::move(c.data);
  return a;
}

void save_grid_function(const std::filesystem::path& path, const GridFunction& f, const nlohmann::json& metadata) {
  const Lattice& l = f.lattice;
  const int n = f.components();
  std::vector<cplx> flat(static_cast<std::size_t>(l.size()) * n);
  for (int p = 0; p < l.size(); ++p) {
    for (int c = 0; c < n; ++c) flat[static_cast<std::size_t>(p) * n + c] = f.values(p, c);
  }
  ContainerHeader h{ContainerKind::GridFunction, l.d(), l.n_per_axis(), l.box_length(), n, 0.0, flat.size()};
  write_container(path, h, flat, metadata);
}

GridFunction load_grid_function(const std::filesystem::path& path) {
  const Container c = read_container(path);
  if (c.header.kind == ContainerKind::Symbol) fail(ErrorKind::IoError, "container holds a symbol, not a grid function");
  Lattice l(c.header.dims, c.header.n_per_axis, c.header.box_length);
  const int n = c.header.components;
  if (c.data.size() != static_cast<std::size_t>(l.size()) * n) fail(ErrorKind::IoError, "grid size mismatch");
  CMat values(l.size(), n);
  for (int p = 0; p < l.size(); ++p) {
    for (int k = 0; k < n; ++k) values(p, k) = c.data[static_cast<std::size_t>(p) * n + k];
  }
  return GridFunction(std::move(l), std::move(values));
}

}  // namespace hypdiss
