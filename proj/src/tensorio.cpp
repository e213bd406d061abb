#include "da/tensorio.hpp"

#include "da/binio.hpp"

namespace da {

const std::string& TensorFile::meta_at(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw CheckpointFormatError("missing metadata key: " + key);
    return it->second;
}

const Tensor* TensorFile::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

const Tensor& TensorFile::at(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw CheckpointFormatError("missing tensor: " + name);
    return *t;
}

void TensorFile::save(const std::string& path) const {
    auto os = open_out<CheckpointFormatError>(path);
    os.write("DAWT", 4);
    write_le<uint16_t>(os, 1);
    std::string block;
    for (const auto& [k, v] : meta) block += k + " = " + v + "\n";
    write_le<uint32_t>(os, static_cast<uint32_t>(block.size()));
    os.write(block.data(), static_cast<std::streamsize>(block.size()));
    write_le<uint32_t>(os, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        write_le<uint16_t>(os, static_cast<uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_le<uint8_t>(os, static_cast<uint8_t>(t.shape.size()));
        for (int d : t.shape) write_le<uint32_t>(os, static_cast<uint32_t>(d));
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    if (!os) throw CheckpointFormatError("write failed: " + path);
}

TensorFile TensorFile::load(const std::string& path) {
    using E = CheckpointFormatError;
    auto is = open_in<E>(path);
    expect_magic<E>(is, "DAWT", path);
    uint16_t version = read_le<uint16_t, E>(is, "version");
    if (version != 1) throw E("unsupported version " + std::to_string(version));

    TensorFile tf;
    uint32_t meta_len = read_le<uint32_t, E>(is, "metadata length");
    std::string block(meta_len, '\0');
    read_bytes<E>(is, block.data(), meta_len, "metadata block");
    size_t pos = 0;
    while (pos < block.size()) {
        size_t nl = block.find('\n', pos);
        if (nl == std::string::npos) nl = block.size();
        std::string line = block.substr(pos, nl - pos);
        pos = nl + 1;
        size_t sep = line.find(" = ");
        if (sep == std::string::npos) {
            if (!line.empty()) throw E("malformed metadata line: " + line);
            continue;
        }
        tf.meta[line.substr(0, sep)] = line.substr(sep + 3);
    }

    uint32_t count = read_le<uint32_t, E>(is, "tensor count");
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = read_le<uint16_t, E>(is, "tensor name length");
        std::string name(name_len, '\0');
        read_bytes<E>(is, name.data(), name_len, "tensor name");
        uint8_t rank = read_le<uint8_t, E>(is, "tensor rank");
        if (rank > 8) throw E("implausible tensor rank");
        std::vector<int> shape(rank);
        size_t numel = 1;
        for (auto& d : shape) {
            uint32_t dim = read_le<uint32_t, E>(is, "tensor dim");
            d = static_cast<int>(dim);
            numel *= dim;
        }
        Tensor t;
        t.shape = std::move(shape);
        t.v.resize(rank ? numel : 0);
        read_bytes<E>(is, t.v.data(), t.v.size() * sizeof(float), "tensor data");
        tf.tensors.emplace_back(std::move(name), std::move(t));
    }
    is.peek();
    if (!is.eof()) throw E("trailing bytes in " + path);
    return tf;
}

}  // namespace da
