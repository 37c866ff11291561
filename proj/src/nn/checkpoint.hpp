#pragma once

#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace newsrank::nn {

// Binary checkpoint: format-version header, a JSON metadata blob, then
// ordered (name, shape, row-major float64) records. Round-trips bit-exactly.
struct Checkpoint {
    std::string metadata_json;            // config snapshot, selection info
    std::vector<ParamGroup> params;       // grads not serialized
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace newsrank::nn
