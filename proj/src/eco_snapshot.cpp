#include "thermotrack/eco.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace thermotrack::eco {
namespace {

constexpr char kMagic[8] = {'T', 'T', 'M', 'O', 'D', 'E', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u32(std::uint32_t v) { raw(to_little(v)); }
  void i32(std::int32_t v) { raw(to_little(v)); }
  void f64(double v) { raw(to_little(std::bit_cast<std::uint64_t>(v))); }
  void real_matrix(const Eigen::MatrixXd& m) {
    i32(static_cast<std::int32_t>(m.rows()));
    i32(static_cast<std::int32_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) f64(m(r, c));
  }
  void complex_matrix(const Eigen::MatrixXcd& m) {
    i32(static_cast<std::int32_t>(m.rows()));
    i32(static_cast<std::int32_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        f64(m(r, c).real());
        f64(m(r, c).imag());
      }
  }
  void layers(const std::vector<LayerCoeffs>& ls) {
    u32(static_cast<std::uint32_t>(ls.size()));
    for (const auto& l : ls) {
      i32(l.K);
      u32(static_cast<std::uint32_t>(l.channels.size()));
      for (const auto& c : l.channels) complex_matrix(c);
    }
  }

 private:
  template <typename T>
  void raw(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t u32() { return to_little(raw<std::uint32_t>()); }
  std::int32_t i32() { return to_little(raw<std::int32_t>()); }
  double f64() { return std::bit_cast<double>(to_little(raw<std::uint64_t>())); }
  std::size_t count(std::uint32_t limit = 1u << 20) {
    const std::uint32_t n = u32();
    if (n > limit) fail("implausible element count");
    return n;
  }
  std::pair<int, int> dims() {
    const std::int32_t r = i32(), c = i32();
    if (r < 0 || c < 0 || r > 4096 || c > 4096) fail("implausible matrix size");
    return {r, c};
  }
  Eigen::MatrixXd real_matrix() {
    const auto [r, c] = dims();
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = f64();
    return m;
  }
  Eigen::MatrixXcd complex_matrix() {
    const auto [r, c] = dims();
    Eigen::MatrixXcd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) {
        const double re = f64();
        m(i, j) = {re, f64()};
      }
    return m;
  }
  std::vector<LayerCoeffs> layers() {
    std::vector<LayerCoeffs> ls(count());
    for (auto& l : ls) {
      l.K = i32();
      l.channels.resize(count());
      for (auto& c : l.channels) {
        c = complex_matrix();
        if (c.rows() != 2 * l.K + 1 || c.cols() != 2 * l.K + 1) fail("coefficient block does not match bandwidth");
      }
    }
    return ls;
  }
  [[noreturn]] void fail(const std::string& why) { throw Error(ErrorCategory::io, "model snapshot: " + why); }

 private:
  template <typename T>
  T raw() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) fail("unexpected end of data");
    return v;
  }
  std::istream& in_;
};

}  // namespace

void write_snapshot(std::ostream& out, const ModelSnapshot& s) {
  out.write(kMagic, sizeof(kMagic));
  Writer w(out);
  w.u32(kVersion);
  w.layers(s.filter);
  w.u32(static_cast<std::uint32_t>(s.projection.layers.size()));
  for (const auto& p : s.projection.layers) w.real_matrix(p);
  w.i32(s.memory.capacity());
  w.f64(s.memory.gamma());
  w.u32(static_cast<std::uint32_t>(s.memory.size()));
  for (std::size_t j = 0; j < s.memory.size(); ++j) {
    w.f64(s.memory.raw_weights()[j]);
    w.complex_matrix(s.memory.labels()[j]);
    w.layers(s.memory.samples()[j]);
  }
  if (!out) throw Error(ErrorCategory::io, "model snapshot: write failed");
}

ModelSnapshot read_snapshot(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  Reader r(in);
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) r.fail("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
  ContinuousFilter filter = r.layers();
  ProjectionMatrix projection;
  projection.layers.resize(r.count());
  for (auto& p : projection.layers) p = r.real_matrix();
  const int capacity = r.i32();
  const double gamma = r.f64();
  const std::size_t n = r.count();
  std::vector<Sample> samples(n);
  std::vector<Eigen::MatrixXcd> labels(n);
  std::vector<double> raw(n);
  for (std::size_t j = 0; j < n; ++j) {
    raw[j] = r.f64();
    labels[j] = r.complex_matrix();
    samples[j] = r.layers();
  }
  return ModelSnapshot{std::move(filter), std::move(projection),
                       SampleMemory::restore(capacity, gamma, std::move(samples), std::move(labels), std::move(raw))};
}

}  // namespace thermotrack::eco
