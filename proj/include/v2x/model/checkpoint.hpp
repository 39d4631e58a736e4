#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "v2x/errors.hpp"
#include "v2x/numerics/matrix.hpp"

namespace v2x {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// Layout: "V2XC" magic, u32 version, u32 tensor count, then per tensor
// u32 name length, name bytes, u64 rows, u64 cols; then all data as f64, all little-endian.
std::string encode_checkpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

template <class Owner>
std::vector<NamedTensor> collect_parameters(const Owner& owner, const std::string& prefix) {
  std::vector<NamedTensor> out;
  visit_parameters(owner, prefix, [&](const std::string& name, const Matrix& m) {
    out.push_back({name, m});
  });
  return out;
}

// Names and shapes must match exactly, in order.
template <class Owner>
void restore_parameters(Owner& owner, const std::string& prefix,
                        const std::vector<NamedTensor>& tensors) {
  std::size_t i = 0;
  visit_parameters(owner, prefix, [&](const std::string& name, Matrix& m) {
    if (i >= tensors.size()) throw ContractError("checkpoint missing tensor " + name);
    const NamedTensor& t = tensors[i++];
    if (t.name != name) throw ContractError("checkpoint tensor " + t.name + ", expected " + name);
    if (t.value.rows() != m.rows() || t.value.cols() != m.cols()) {
      throw ContractError("checkpoint tensor " + name + " has shape " + t.value.shape_string() +
                          ", expected " + m.shape_string());
    }
    m = t.value;
  });
  if (i != tensors.size()) throw ContractError("checkpoint has unused tensors");
}

}  // namespace v2x
