#pragma once

#include <string>
#include <vector>

#include "scrawl/matrix.hpp"

namespace scrawl {

// Dropout and its friends are active in Train mode only.
enum class Mode { Train, Eval };

// Named view into a model's trainable tensors. Models register their
// matrices once, in a stable order; the optimizer, checkpoint writer and
// gradient checks all address parameters through this registry.
struct ParamRef {
    std::string name;
    num::Matrix* value = nullptr;
};

using ParamSet = std::vector<ParamRef>;

inline std::size_t total_size(const ParamSet& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += static_cast<std::size_t>(p.value->size());
    return n;
}

inline std::vector<num::Matrix> zeros_like(const ParamSet& params) {
    std::vector<num::Matrix> out;
    out.reserve(params.size());
    for (const auto& p : params) out.emplace_back(p.value->rows(), p.value->cols());
    return out;
}

} // namespace scrawl
