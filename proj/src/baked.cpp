// Tier-2 weights: an exported myWeights.h compiled into the binary.
// Configure with -DTINYCNN_BAKED_WEIGHTS=/path/to/myWeights.h to enable.

#include <iterator>

#include "tinycnn/error.hpp"
#include "tinycnn/weightstore.hpp"

#if defined(USE_BAKED_WEIGHTS) && defined(TINYCNN_BAKED_HEADER)
namespace tinycnn::baked {
#include TINYCNN_BAKED_HEADER
}  // namespace tinycnn::baked
#endif

namespace tinycnn {

std::optional<WeightSet> baked_weights(const NetDims& d) {
#if defined(USE_BAKED_WEIGHTS) && defined(TINYCNN_BAKED_HEADER)
    WeightSet w;
    w.conv1_w.assign(std::begin(baked::myModel_conv1_w), std::end(baked::myModel_conv1_w));
    w.conv1_b.assign(std::begin(baked::myModel_conv1_b), std::end(baked::myModel_conv1_b));
    w.conv2_w.assign(std::begin(baked::myModel_conv2_w), std::end(baked::myModel_conv2_w));
    w.conv2_b.assign(std::begin(baked::myModel_conv2_b), std::end(baked::myModel_conv2_b));
    w.output_w.assign(std::begin(baked::myModel_output_w), std::end(baked::myModel_output_w));
    w.output_b.assign(std::begin(baked::myModel_output_b), std::end(baked::myModel_output_b));
    if (!w.matches(d)) throw ConfigError("embedded weights were exported for a different network shape");
    return w;
#else
    (void)d;
    return std::nullopt;
#endif
}

}  // namespace tinycnn
