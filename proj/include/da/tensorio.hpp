#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "da/common.hpp"
#include "da/tensor.hpp"

namespace da {

// "DAWT" tensor container: versioned header, a text metadata block of
// `key = value` lines, then named f32 tensors. Used for checkpoints and for
// the perceptual-feature asset.
struct TensorFile {
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Tensor>> tensors;  // insertion order preserved

    void set_meta(const std::string& key, const std::string& value) { meta[key] = value; }
    const std::string& meta_at(const std::string& key) const;
    bool has_meta(const std::string& key) const { return meta.count(key) != 0; }

    void add(const std::string& name, Tensor t) { tensors.emplace_back(name, std::move(t)); }
    const Tensor* find(const std::string& name) const;
    const Tensor& at(const std::string& name) const;

    void save(const std::string& path) const;
    static TensorFile load(const std::string& path);
};

}  // namespace da
