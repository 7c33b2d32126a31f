#include "peq/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "peq/solver.hpp"

namespace peq {

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

template <typename T>
void put(std::vector<unsigned char>& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > end_) throw CheckpointError("unexpected end of file");
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, buf_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<unsigned char>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kHeaderBytes = 4 + 4 * 4 + 10 * 8;

}  // namespace

void write_checkpoint(const State& s, const Parameters& p, const std::filesystem::path& path) {
  const Shape& sh = s.shape();
  std::vector<unsigned char> buf{'P', 'E', 'Q', '1'};
  buf.reserve(kHeaderBytes + 3 * sh.cells() * 8 + 8);
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint32_t>(buf, std::uint32_t(sh.nx));
  put<std::uint32_t>(buf, std::uint32_t(sh.ny));
  put<std::uint32_t>(buf, std::uint32_t(sh.nz));
  for (double v : {p.re1, p.re2, p.rt1, p.rt2, p.alpha, p.h, p.lx, p.ly, p.f0, s.time}) put<double>(buf, v);
  for (const ScalarField* f : {&s.u, &s.v, &s.t})
    for (int i = 0; i < sh.nx; ++i)
      for (int j = 0; j < sh.ny; ++j)
        for (int k = 0; k < sh.nz; ++k) put<double>(buf, (*f)(i, j, k));
  put<std::uint64_t>(buf, fnv1a64(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const Parameters& p) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Reader head(buf, buf.size());
  char magic[4];
  for (char& c : magic) c = char(head.get<unsigned char>());
  if (std::memcmp(magic, "PEQ1", 4) != 0) throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = head.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  Shape sh;
  sh.nx = int(head.get<std::uint32_t>());
  sh.ny = int(head.get<std::uint32_t>());
  sh.nz = int(head.get<std::uint32_t>());
  if (sh.nx < 1 || sh.ny < 1 || sh.nz < 1 || sh.cells() > (std::size_t(1) << 32))
    throw CheckpointError("corrupt checkpoint header");
  const std::size_t payload = kHeaderBytes + 3 * sh.cells() * 8;
  if (buf.size() < payload + 8) throw CheckpointError("unexpected end of file");

  Reader r(buf, payload + 8);
  for (int n = 0; n < 20; ++n) r.get<unsigned char>();  // magic, version and sizes
  Checkpoint c;
  c.params = p;
  double* fields[] = {&c.params.re1, &c.params.re2, &c.params.rt1, &c.params.rt2, &c.params.alpha,
                      &c.params.h,   &c.params.lx,  &c.params.ly,  &c.params.f0};
  for (double* f : fields) *f = r.get<double>();
  const double time = r.get<double>();
  ScalarField data[3] = {ScalarField(sh), ScalarField(sh), ScalarField(sh)};
  for (ScalarField& f : data)
    for (int i = 0; i < sh.nx; ++i)
      for (int j = 0; j < sh.ny; ++j)
        for (int k = 0; k < sh.nz; ++k) f(i, j, k) = r.get<double>();
  const std::uint64_t stored = r.get<std::uint64_t>();
  if (stored != fnv1a64(buf.data(), payload)) throw CheckpointError("checksum mismatch");
  if (buf.size() != payload + 8) throw CheckpointError("trailing bytes after checksum");

  try {
    validate_parameters(c.params);
    const Grid g(c.params, sh.nx, sh.ny, sh.nz);
    c.state = make_state(c.params, g, std::move(data[0]), std::move(data[1]), std::move(data[2]), time);
  } catch (const ParameterError& e) {
    throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
  }
  return c;
}

}  // namespace peq
