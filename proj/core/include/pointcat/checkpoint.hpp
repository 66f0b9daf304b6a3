#pragma once

#include <string>
#include <vector>

#include "pointcat/tensor.hpp"

namespace pointcat {

// Binary checkpoint format (little-endian throughout):
//   magic   "PCAT"
//   version u8 (currently 1)
//   count   u32
//   entry*  { name_len u16, name bytes (UTF-8), rank u8, dims u32*rank,
//             values f64 * prod(dims) }
// Doubles are stored as raw IEEE-754 bits, so a save/load round trip is
// bit-exact. Malformed or truncated files raise parse_error with the offset.

struct checkpoint_entry {
    std::string name;
    tensor value;
};

void save_checkpoint(const std::string& path, const std::vector<parameter*>& params);

std::vector<checkpoint_entry> load_checkpoint(const std::string& path);

// Loads and assigns into an existing parameter set. The checkpoint must
// contain exactly the model's parameter names with matching shapes; the first
// discrepancy is reported in the parse_error message.
void load_checkpoint_into(const std::string& path, const std::vector<parameter*>& params);

}  // namespace pointcat
