#include "arsjoint/parameters.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "arsjoint/errors.hpp"

namespace arsjoint {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'S', 'J', 'P', 'M', 'A', 'P'};

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes, sizeof(UInt));
}

template <typename UInt>
UInt get_le(std::istream& in) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw ValidationError("parameter file truncated");
  }
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

Parameter& ParameterMap::add(const std::string& path, Matrix value) {
  Matrix grad = Matrix::Zero(value.rows(), value.cols());
  auto [it, inserted] = entries_.emplace(path, Parameter{std::move(value), std::move(grad)});
  if (!inserted) throw ContractViolation("duplicate parameter path " + path);
  return it->second;
}

Parameter& ParameterMap::add_uniform(const std::string& path, Eigen::Index rows, Eigen::Index cols,
                                     Eigen::Index fan_in, std::mt19937_64& rng) {
  require(fan_in > 0, "fan_in must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix value(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) value(r, c) = dist(rng);
  }
  return add(path, std::move(value));
}

Parameter& ParameterMap::at(const std::string& path) {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw ContractViolation("unknown parameter " + path);
  return it->second;
}

const Parameter& ParameterMap::at(const std::string& path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw ContractViolation("unknown parameter " + path);
  return it->second;
}

void ParameterMap::zero_grad() {
  for (auto& [path, p] : entries_) p.grad.setZero();
}

std::size_t ParameterMap::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [path, p] : entries_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

bool ParameterMap::same_values(const ParameterMap& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    const auto& x = a->second.value;
    const auto& y = b->second.value;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) != 0) {
      return false;
    }
  }
  return true;
}

void write_parameters(std::ostream& out, const ParameterMap& params) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kParameterFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [path, p] : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.size()));
    out.write(path.data(), static_cast<std::streamsize>(path.size()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p.value(r, c)));
      }
    }
  }
  if (!out) throw ValidationError("failed writing parameters");
}

ParameterMap read_parameters(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("not a parameter file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kParameterFormatVersion) {
    throw ValidationError("unsupported parameter format version " + std::to_string(version));
  }
  const auto count = get_le<std::uint32_t>(in);
  ParameterMap params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto path_len = get_le<std::uint32_t>(in);
    std::string path(path_len, '\0');
    if (!in.read(path.data(), path_len)) throw ValidationError("parameter file truncated");
    const auto rows = static_cast<Eigen::Index>(get_le<std::uint64_t>(in));
    const auto cols = static_cast<Eigen::Index>(get_le<std::uint64_t>(in));
    Matrix value(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        value(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(in));
      }
    }
    params.add(path, std::move(value));
  }
  return params;
}

}  // namespace arsjoint
