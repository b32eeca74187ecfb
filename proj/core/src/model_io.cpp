#include "hpnn/model_io.hpp"

#include "hpnn/errors.hpp"
#include "hpnn/io_util.hpp"

namespace hpnn {

namespace {

constexpr std::uint32_t kVersion = 1;

void write_spec(BinWriter& w, const ArchSpec& spec) {
  w.u32(static_cast<std::uint32_t>(spec.input_dim));
  w.u32(static_cast<std::uint32_t>(spec.hidden_sizes.size()));
  for (int h : spec.hidden_sizes) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(spec.output_dim));
  w.u8(static_cast<std::uint8_t>(spec.hidden_activation));
}

ArchSpec read_spec(BinReader& r) {
  ArchSpec spec;
  spec.input_dim = static_cast<int>(r.u32());
  const std::uint32_t nh = r.u32();
  if (nh > 1024) throw DataError("model file: implausible hidden layer count");
  spec.hidden_sizes.resize(nh);
  for (auto& h : spec.hidden_sizes) h = static_cast<int>(r.u32());
  spec.output_dim = static_cast<int>(r.u32());
  const std::uint8_t act = r.u8();
  if (act > 1) throw DataError("model file: unknown activation code");
  spec.hidden_activation = static_cast<Activation>(act);
  return spec;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  BinWriter w(path);
  w.tag("HPNN");
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(model.problem));
  w.u8(static_cast<std::uint8_t>(model.kind));
  write_spec(w, model.main_spec);
  if (model.is_hyper()) write_spec(w, model.hyper_spec);
  w.u64(model.params.values.size());
  w.f64_array(model.params.values);
  if (!w.good()) throw DataError("short write: " + path);
}

Model load_model(const std::string& path) {
  BinReader r(path);
  r.expect_tag("HPNN", "model");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw DataError("model file " + path + ": unsupported version " + std::to_string(version));
  Model m;
  const std::uint8_t prob = r.u8(), kind = r.u8();
  if (prob > 1) throw DataError("model file: unknown problem tag");
  if (kind > 2) throw DataError("model file: unknown model kind");
  m.problem = static_cast<Problem>(prob);
  m.kind = static_cast<ModelKind>(kind);
  m.main_spec = read_spec(r);
  const ArchSpec& owner = m.is_hyper() ? (m.hyper_spec = read_spec(r)) : m.main_spec;
  const std::uint64_t n = r.u64();
  if (n != param_count(owner))
    throw DataError("model file " + path + ": parameter count " + std::to_string(n) +
                    " does not match architecture (" + std::to_string(param_count(owner)) + ")");
  if (m.is_hyper() &&
      param_count(m.main_spec) != static_cast<std::size_t>(m.hyper_spec.output_dim))
    throw DataError("model file " + path + ": hypernet output does not cover main net");
  m.params.spec = owner;
  m.params.values.resize(n);
  r.f64_array(m.params.values);
  return m;
}

}  // namespace hpnn
