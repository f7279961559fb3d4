#include "hgcf/binary_io.hpp"
#include "hgcf/prednet.hpp"

#include <algorithm>
#include <cmath>

namespace hgcf {

void save_checkpoint(std::ostream& out, const PredictiveParams& params) {
  io::Writer w(out);
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  for (const auto& t : tensors(params)) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    w.f64s(t.values);
  }
  if (!out) throw Error("save_checkpoint: stream write failed");
}

PredictiveParams load_checkpoint(std::istream& in, const NetworkConfig& cfg) {
  PredictiveParams params = init_params(cfg, 0);
  auto expected = tensors(params);

  io::Reader r(in);
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) throw FormatError("bad checkpoint magic", 0);
  auto version_at = r.offset();
  if (auto version = r.u32(); version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  std::vector<bool> filled(expected.size(), false);
  while (!r.at_end()) {
    auto name_at = r.offset();
    auto name_len = r.u32();
    if (name_len > 4096) throw FormatError("implausible tensor name length", name_at);
    std::string name = r.bytes(name_len);
    auto rank_at = r.offset();
    auto rank = r.u32();
    if (rank == 0 || rank > 2) throw FormatError("unsupported tensor rank " + std::to_string(rank), rank_at);
    std::vector<std::uint64_t> shape(rank);
    for (auto& d : shape) d = r.u64();

    auto it = std::find_if(expected.begin(), expected.end(), [&](const TensorRef& t) { return t.name == name; });
    if (it == expected.end()) throw Error("checkpoint tensor " + name + " is not part of this network");
    if (it->shape != shape) throw Error("checkpoint tensor " + name + " has a different shape");
    auto values_at = r.offset();
    r.f64s(it->values);
    for (std::size_t k = 0; k < it->values.size(); ++k) {
      if (!std::isfinite(it->values[k])) throw FormatError("non-finite value in " + name, values_at + 8 * k);
    }
    filled[static_cast<std::size_t>(it - expected.begin())] = true;
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!filled[i]) throw Error("checkpoint is missing tensor " + expected[i].name);
  }
  return params;
}

}  // namespace hgcf
