#include "da/distance.hpp"

#include "da/rng.hpp"

namespace da {

void write_random_feature_asset(const std::string& path, const std::vector<int>& channels,
                                uint64_t seed) {
    if (channels.empty()) throw DistanceAssetError("need at least one feature layer");
    TensorFile tf;
    tf.set_meta("kind", "feature_stack");
    tf.set_meta("seed", std::to_string(seed));
    Pcg32 rng(mix_seed(seed, 0xFEA7));
    int in_c = 3;
    for (size_t i = 0; i < channels.size(); ++i) {
        const int out_c = channels[i];
        Tensor w({out_c, in_c, 3, 3});
        const float std = std::sqrt(2.0f / static_cast<float>(in_c * 9));
        for (auto& v : w.v) v = static_cast<float>(rng.next_gauss()) * std;
        Tensor b({out_c});
        tf.add("conv" + std::to_string(i) + ".weight", std::move(w));
        tf.add("conv" + std::to_string(i) + ".bias", std::move(b));
        in_c = out_c;
    }
    tf.save(path);
}

}  // namespace da
