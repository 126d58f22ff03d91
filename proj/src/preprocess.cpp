#include "camfuse/preprocess.hpp"

#include "camfuse/errors.hpp"
#include "camfuse/layers.hpp"

namespace camfuse {

namespace {

Tensor channel_slice(const Tensor& image, std::size_t c) {
    Tensor plane({image.extent(1), image.extent(2)});
    const std::size_t hw = plane.size();
    for (std::size_t p = 0; p < hw; ++p) plane[p] = image[c * hw + p];
    return plane;
}

}  // namespace

Tensor resize_raw(const Tensor& image_raw, std::size_t out_h, std::size_t out_w) {
    if (image_raw.rank() != 3 || image_raw.extent(0) != 3)
        throw ShapeError("resize_raw: expected [3, H, W] image, got " +
                         shape_to_string(image_raw.shape()));
    if (image_raw.extent(1) == out_h && image_raw.extent(2) == out_w) return image_raw;
    Tensor out({3, out_h, out_w});
    for (std::size_t c = 0; c < 3; ++c) {
        Tensor plane = bilinear_resize(channel_slice(image_raw, c), out_h, out_w);
        for (std::size_t p = 0; p < out_h * out_w; ++p) out[c * out_h * out_w + p] = plane[p];
    }
    return out;
}

Tensor preprocess(const Tensor& image_raw, const Preprocessing& prep) {
    Tensor resized = resize_raw(image_raw, prep.resize_h, prep.resize_w);
    const std::size_t hw = prep.resize_h * prep.resize_w;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t p = 0; p < hw; ++p)
            resized[c * hw + p] = (resized[c * hw + p] - prep.mean[c]) / prep.stddev[c];
    return resized;
}

Tensor black_input(const Preprocessing& prep) {
    Tensor zero({3, prep.resize_h, prep.resize_w});
    return preprocess(zero, prep);
}

}  // namespace camfuse
