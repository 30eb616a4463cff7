#include "mambatrack/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace mambatrack {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw FormatError(std::string("checkpoint truncated while reading ") + what);
  }
  std::uint64_t uint(int width, const char* what) {
    std::array<unsigned char, 8> b{};
    bytes(reinterpret_cast<char*>(b.data()), static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(uint(4, what)); }
  std::uint64_t u64(const char* what) { return uint(8, what); }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const MtpModel& model, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  const MtpConfig& c = model.config;
  for (std::size_t v : {c.q, c.d_m, c.L, c.N, c.E, c.K, c.d_mlp, c.head_hidden})
    put_u32(out, static_cast<std::uint32_t>(v));

  std::uint32_t count = 0;
  model.visit([&count](const std::string&, const Tensor&) { ++count; });
  put_u32(out, count);
  model.visit([&out](const std::string& name, const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.dims()) put_u64(out, d);
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  });
}

void save_checkpoint(const MtpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  save_checkpoint(model, out);
  if (!out) throw Error("failed writing checkpoint " + path);
}

MtpModel load_checkpoint(std::istream& in) {
  Reader rd(in);
  char magic[8];
  rd.bytes(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw FormatError("not a motion predictor checkpoint (bad magic)");
  const std::uint32_t version = rd.u32("version");
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));

  MtpConfig cfg;
  for (std::size_t* field : {&cfg.q, &cfg.d_m, &cfg.L, &cfg.N, &cfg.E, &cfg.K, &cfg.d_mlp,
                             &cfg.head_hidden})
    *field = rd.u32("config");
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw FormatError(std::string("checkpoint config invalid: ") + e.what());
  }

  // A freshly initialized model fixes the expected names and shapes.
  MtpModel model = init_mtp_model(cfg, 0);
  std::map<std::string, Tensor*> expected;
  model.visit([&expected](const std::string& name, Tensor& t) { expected[name] = &t; });

  const std::uint32_t count = rd.u32("tensor count");
  if (count != expected.size())
    throw FormatError("checkpoint holds " + std::to_string(count) + " tensors, config implies " +
                      std::to_string(expected.size()));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = rd.u32("name length");
    if (name_len > 4096) throw FormatError("checkpoint tensor name too long");
    std::string name(name_len, '\0');
    rd.bytes(name.data(), name_len, "name");
    auto it = expected.find(name);
    if (it == expected.end()) throw FormatError("unexpected tensor '" + name + "' in checkpoint");
    Tensor& dst = *it->second;
    const std::uint32_t rank = rd.u32("rank");
    if (rank != dst.rank()) throw FormatError("tensor '" + name + "' has wrong rank");
    for (std::uint32_t k = 0; k < rank; ++k)
      if (rd.u64("dims") != dst.dim(k))
        throw FormatError("tensor '" + name + "' shape inconsistent with config, expected " +
                          dst.shape_string());
    for (double& v : dst.values()) v = std::bit_cast<double>(rd.u64("payload"));
    expected.erase(it);
  }
  if (!expected.empty()) throw FormatError("checkpoint misses tensor '" + expected.begin()->first + "'");
  return model;
}

MtpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  return load_checkpoint(in);
}

}  // namespace mambatrack
