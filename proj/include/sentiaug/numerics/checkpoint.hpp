#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "sentiaug/numerics/optim.hpp"

namespace sentiaug::num {

// Flat parameter container:
//   "CATG" | u32 version
//   repeated: u64 name_len | name bytes | u64 rank | u64 dims[rank] | f64 data[numel]
// All integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_checkpoint(std::ostream& out, const ParameterList& params);
ParameterList read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params);
ParameterList load_checkpoint(const std::filesystem::path& path);

// Copies saved values into `params` by name. Every param must be present
// with the same shape.
void restore_parameters(const ParameterList& saved, const ParameterList& params);

}  // namespace sentiaug::num
