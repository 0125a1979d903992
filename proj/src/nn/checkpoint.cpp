#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "xrdn/binio.hpp"
#include "xrdn/nn.hpp"

namespace xrdn::nn {

namespace {

constexpr char kMagic[4] = {'D', 'N', 'E', 'T'};
constexpr std::uint16_t kVersion = 1;

[[noreturn]] void bad_checkpoint(const std::string& what) {
    throw FrameError("checkpoint: " + what);
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     const ParamList<float>& params) {
    validate_spec(spec);
    if (params.size() != static_cast<std::size_t>(spec.depth))
        bad_checkpoint("parameter count does not match spec depth");

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    binio::put_u16(out, kVersion);
    binio::put_u8(out, spec.topology == Topology::vdsr ? 0 : 1);
    binio::put_u32(out, static_cast<std::uint32_t>(spec.depth));
    binio::put_u32(out, static_cast<std::uint32_t>(spec.filters));
    binio::put_u32(out, static_cast<std::uint32_t>(spec.kernel));
    binio::put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& layer : params) {
        const auto& w = layer.w;
        binio::put_u32(out, static_cast<std::uint32_t>(w.n));
        binio::put_u32(out, static_cast<std::uint32_t>(w.c));
        binio::put_u32(out, static_cast<std::uint32_t>(w.h));
        binio::put_u32(out, static_cast<std::uint32_t>(w.w));
        binio::put_u32(out, static_cast<std::uint32_t>(layer.b.size()));
        for (float v : w.v) binio::put_f32(out, v);
        for (float v : layer.b) binio::put_f32(out, v);
    }
    binio::write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::vector<std::uint8_t> raw = binio::read_file(path);
    binio::Reader r(raw, [](std::size_t) { bad_checkpoint("truncated file"); });

    if (raw.size() < 4 || raw[0] != 'D' || raw[1] != 'N' || raw[2] != 'E' ||
        raw[3] != 'T')
        bad_checkpoint("bad magic");
    r.skip(4);
    if (r.u16() != kVersion) bad_checkpoint("unsupported version");

    Checkpoint ck;
    const std::uint8_t topo = r.u8();
    if (topo > 1) bad_checkpoint("unknown topology tag");
    ck.spec.topology = topo == 0 ? Topology::vdsr : Topology::irunet;
    ck.spec.depth = static_cast<int>(r.u32());
    ck.spec.filters = static_cast<int>(r.u32());
    ck.spec.kernel = static_cast<int>(r.u32());
    validate_spec(ck.spec);

    const std::uint32_t layer_count = r.u32();
    if (layer_count != static_cast<std::uint32_t>(ck.spec.depth))
        bad_checkpoint("layer count does not match depth");

    ck.params.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const int oc = static_cast<int>(r.u32());
        const int ic = static_cast<int>(r.u32());
        const int kh = static_cast<int>(r.u32());
        const int kw = static_cast<int>(r.u32());
        const std::uint32_t bias_len = r.u32();
        if (oc <= 0 || ic <= 0 || kh != ck.spec.kernel || kw != ck.spec.kernel)
            bad_checkpoint("bad layer geometry");
        if (bias_len != static_cast<std::uint32_t>(oc))
            bad_checkpoint("bias length does not match output channels");
        ConvLayer<float> layer{Tensor4<float>(oc, ic, kh, kw),
                               std::vector<float>(bias_len, 0.0f)};
        for (auto& v : layer.w.v) v = r.f32();
        for (auto& v : layer.b) v = r.f32();
        ck.params.push_back(std::move(layer));
    }
    if (r.remaining() != 0) bad_checkpoint("trailing bytes");

    const auto plan = layer_plan(ck.spec);
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        const auto& w = ck.params[i].w;
        if (w.n != plan[i].second || w.c != plan[i].first)
            bad_checkpoint("layer " + std::to_string(i) +
                           " channels do not match topology");
    }
    return ck;
}

}  // namespace xrdn::nn
