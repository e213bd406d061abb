#pragma once

#include <cassert>
#include <cstddef>
#include <numeric>
#include <vector>

namespace da {

// Dense row-major tensor, rank <= 4 in practice. Plain storage + index
// helpers; all math lives in the layers.
template <class T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> v;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        v.assign(count(shape), T(0));
    }

    static size_t count(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) n *= static_cast<size_t>(d);
        return s.empty() ? 0 : n;
    }

    size_t numel() const { return v.size(); }
    bool empty() const { return v.empty(); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& operator[](size_t i) { return v[i]; }
    const T& operator[](size_t i) const { return v[i]; }

    // (n,c,h,w) indexing
    size_t off4(int n, int c, int h, int w) const {
        return ((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w;
    }
    T& at4(int n, int c, int h, int w) { return v[off4(n, c, h, w)]; }
    const T& at4(int n, int c, int h, int w) const { return v[off4(n, c, h, w)]; }

    // (r,c) indexing
    T& at2(int r, int c) { return v[static_cast<size_t>(r) * shape[1] + c]; }
    const T& at2(int r, int c) const { return v[static_cast<size_t>(r) * shape[1] + c]; }

    void zero() { std::fill(v.begin(), v.end(), T(0)); }
    void fill(T x) { std::fill(v.begin(), v.end(), x); }

    void reshape(std::vector<int> s) {
        assert(count(s) == v.size());
        shape = std::move(s);
    }

    template <class U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.v.resize(v.size());
        for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
        return out;
    }
};

using Tensor = TensorT<float>;

}  // namespace da
