#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>

#include <Eigen/Core>

namespace arsjoint {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  Matrix value;
  Matrix grad;  // same shape as value, accumulated by Tape::backward
};

// Named trainable tensors keyed by dotted path, e.g. "attn.ret.word.w1".
class ParameterMap {
 public:
  using Storage = std::map<std::string, Parameter>;

  Parameter& add(const std::string& path, Matrix value);
  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  Parameter& add_uniform(const std::string& path, Eigen::Index rows, Eigen::Index cols,
                         Eigen::Index fan_in, std::mt19937_64& rng);

  Parameter& at(const std::string& path);
  const Parameter& at(const std::string& path) const;
  bool contains(const std::string& path) const { return entries_.count(path) != 0; }

  void zero_grad();
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  Storage::iterator begin() { return entries_.begin(); }
  Storage::iterator end() { return entries_.end(); }
  Storage::const_iterator begin() const { return entries_.begin(); }
  Storage::const_iterator end() const { return entries_.end(); }

  // Same paths, shapes and bit-identical values.
  bool same_values(const ParameterMap& other) const;

 private:
  Storage entries_;
};

// Binary layout (all integers and doubles little-endian):
//   "ARSJPMAP" | u32 version | u32 count
//   count x { u32 path_len | path bytes | u64 rows | u64 cols | rows*cols f64, row-major }
inline constexpr std::uint32_t kParameterFormatVersion = 1;

void write_parameters(std::ostream& out, const ParameterMap& params);
ParameterMap read_parameters(std::istream& in);

}  // namespace arsjoint
