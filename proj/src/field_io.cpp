#include "wide/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace wide {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), os_(path, std::ios::binary) {
    if (!os_) throw ConfigError("cannot open " + path + " for writing");
  }
  void bytes(const void* p, std::size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void array(std::span<const double> v) { bytes(v.data(), v.size_bytes()); }
  void finish() {
    os_.flush();
    if (!os_) throw ConfigError("write to " + path_ + " failed");
  }

 private:
  std::string path_;
  std::ofstream os_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open " + path);
    buf_.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }
  std::size_t offset() const { return pos_; }
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw InputError(path_ + ": " + what + " at byte offset " + std::to_string(at));
  }
  void take(void* p, std::size_t n, const char* what) {
    if (pos_ + n > buf_.size()) fail(std::string("truncated ") + what, pos_);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    take(&v, sizeof v, what);
    return v;
  }
  double f64(const char* what) {
    double v;
    take(&v, sizeof v, what);
    return v;
  }
  void magic(const char* expected) {
    char m[4];
    const std::size_t at = pos_;
    take(m, 4, "magic");
    if (std::memcmp(m, expected, 4) != 0) fail(std::string("bad magic (expected ") + expected + ")", at);
  }
  void array(std::span<double> v, const char* what) { take(v.data(), v.size_bytes(), what); }
  void expect_end() const {
    if (pos_ != buf_.size()) fail("trailing bytes", pos_);
  }

 private:
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

GridSpec read_grid(Reader& r, double length) {
  GridSpec g;
  std::size_t at = r.offset();
  g.dim = static_cast<int>(r.u32("dim"));
  if (g.dim != 2 && g.dim != 3) r.fail("unsupported dim " + std::to_string(g.dim), at);
  at = r.offset();
  g.n = static_cast<int>(r.u32("n"));
  if (g.n < 8 || g.n % 2 != 0 || g.n > 4096) r.fail("invalid n " + std::to_string(g.n), at);
  g.domain_length = length;
  return g;
}

}  // namespace

void write_snapshot(const VelocityField& u, const std::string& path) {
  Writer w(path);
  w.bytes("WNSF", 4);
  w.u32(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(u.dim()));
  w.u32(static_cast<std::uint32_t>(u.grid().n));
  w.f64(u.grid().domain_length);
  w.array(u.data());
  w.finish();
}

VelocityField read_snapshot(const std::string& path) {
  Reader r(path);
  r.magic("WNSF");
  const std::size_t at = r.offset();
  const auto version = r.u32("version");
  if (version != kSnapshotVersion) r.fail("unsupported version " + std::to_string(version), at);
  GridSpec g = read_grid(r, 0.0);
  const std::size_t lat = r.offset();
  g.domain_length = r.f64("domain_length");
  if (!(g.domain_length > 0.0) || !std::isfinite(g.domain_length)) r.fail("invalid domain length", lat);
  VelocityField u(g);
  r.array(u.data(), "payload");
  r.expect_end();
  return u;
}

void write_checkpoint(const Trajectory& traj, const WideParams& params, const std::string& path) {
  traj.check_structure();
  Writer w(path);
  w.bytes("WNST", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(traj.grid.dim));
  w.u32(static_cast<std::uint32_t>(traj.grid.n));
  w.u32(static_cast<std::uint32_t>(traj.steps()));
  w.f64(traj.tau);
  w.f64(params.epsilon);
  w.f64(params.sigma);
  w.f64(params.nu);
  w.f64(params.horizon);
  w.u32((params.convection ? 1u : 0u) | (params.quadrature == QuadratureRule::interval ? 2u : 0u));
  w.f64(traj.grid.domain_length);
  w.f64(traj.grid.dealias);
  for (const auto& s : traj.slices) w.array(s.data());
  w.finish();
}

Checkpoint read_checkpoint(const std::string& path) {
  Reader r(path);
  r.magic("WNST");
  std::size_t at = r.offset();
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version), at);
  Checkpoint c;
  c.trajectory.grid = read_grid(r, GridSpec{}.domain_length);
  at = r.offset();
  const auto steps = r.u32("N");
  if (steps > 1000000) r.fail("implausible step count " + std::to_string(steps), at);
  at = r.offset();
  c.trajectory.tau = r.f64("tau");
  if (!(c.trajectory.tau > 0.0) || !std::isfinite(c.trajectory.tau)) r.fail("invalid tau", at);
  c.params.epsilon = r.f64("epsilon");
  c.params.sigma = r.f64("sigma");
  c.params.nu = r.f64("nu");
  c.params.horizon = r.f64("T");
  at = r.offset();
  const auto flags = r.u32("flags");
  if (flags > 3u) r.fail("unknown flags " + std::to_string(flags), at);
  c.params.convection = (flags & 1u) != 0;
  c.params.quadrature = (flags & 2u) != 0 ? QuadratureRule::interval : QuadratureRule::centred;
  at = r.offset();
  c.trajectory.grid.domain_length = r.f64("domain_length");
  c.trajectory.grid.dealias = r.f64("dealias");
  try {
    c.trajectory.grid.validate();
    c.params.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what(), at);
  }
  c.trajectory.slices.assign(steps + 1, VelocityField(c.trajectory.grid));
  for (auto& s : c.trajectory.slices) r.array(s.data(), "slice payload");
  r.expect_end();
  return c;
}

}  // namespace wide
