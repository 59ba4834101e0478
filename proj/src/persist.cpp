#include "ocdl/persist.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

#include "ocdl/image_io.hpp"

namespace ocdl {

namespace {

constexpr char kMagic[4] = {'O', 'C', 'D', 'L'};
constexpr char kPlaneMagic[4] = {'O', 'C', 'P', 'L'};
constexpr const char* kMetricsHeader =
    "sample_index,csc_iterations,dict_iterations,csc_objective,approx_fit_term,wall_time_seconds";

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }
  void bytes(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint is truncated");
  }
  bool magic(const char (&m)[4]) {
    need(4);
    const bool ok = std::memcmp(in_.data() + pos_, m, 4) == 0;
    pos_ += 4;
    return ok;
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace '" + path.string() + "'");
  }
}

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw InvalidArgument(std::string(what) + " does not fit the checkpoint header");
  return static_cast<std::uint32_t>(v);
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t checkpoint_size(std::size_t filters, std::size_t height, std::size_t width, std::size_t side) {
  return kCheckpointHeaderBytes + kRngStateBytes +
         8ull * filters * (side * side + 3ull * height * width);
}

std::vector<std::uint8_t> encode_checkpoint(const TrainerState& state) {
  const std::size_t k = state.dictionary.size();
  const std::size_t m = state.dictionary.side;
  const std::size_t h = state.height();
  const std::size_t w = state.width();
  if (k == 0 || m == 0 || h == 0 || w == 0) throw InvalidArgument("cannot checkpoint an empty state");
  if (state.history.filters() != k || state.history.beta.size() != k) {
    throw InvalidArgument("history filter count differs from dictionary");
  }

  Writer out(checkpoint_size(k, h, w, m));
  out.bytes(kMagic, 4);
  out.uint<std::uint32_t>(kCheckpointVersion);
  out.uint<std::uint8_t>(static_cast<std::uint8_t>(state.algorithm));
  out.uint(narrow_u32(k, "K"));
  out.uint(narrow_u32(h, "H"));
  out.uint(narrow_u32(w, "W"));
  out.uint(narrow_u32(m, "m"));
  out.uint<std::uint64_t>(state.history.sample_count);
  out.real(state.lambda);
  out.real(state.rho0);
  for (const auto& f : state.dictionary.filters) {
    if (f.side != m || f.values.size() != m * m) throw InvalidArgument("filter support size mismatch");
    for (double v : f.values) out.real(v);
  }
  for (const auto& a : state.history.alpha) {
    if (a.height() != h || a.width() != w) throw InvalidArgument("alpha lattice mismatch");
    for (double v : a.values()) out.real(v);
  }
  for (const auto& b : state.history.beta) {
    if (b.height() != h || b.width() != w) throw InvalidArgument("beta lattice mismatch");
    for (const Complex& v : b.values()) {
      out.real(v.real());
      out.real(v.imag());
    }
  }
  for (std::uint64_t word : state.rng) out.uint(word);
  return out.take();
}

TrainerState decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (!in.magic(kMagic)) throw FormatError("not a checkpoint (bad magic)");
  const auto version = in.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto algo = in.uint<std::uint8_t>();
  if (algo != 1 && algo != 2) throw FormatError("unknown algorithm id " + std::to_string(algo));
  const std::size_t k = in.uint<std::uint32_t>();
  const std::size_t h = in.uint<std::uint32_t>();
  const std::size_t w = in.uint<std::uint32_t>();
  const std::size_t m = in.uint<std::uint32_t>();
  if (k == 0 || h == 0 || w == 0 || m == 0 || m > std::min(h, w)) {
    throw FormatError("inconsistent checkpoint dimensions");
  }
  const std::uint64_t expected = checkpoint_size(k, h, w, m);
  if (bytes.size() < expected) throw FormatError("checkpoint is truncated");
  if (bytes.size() > expected) throw FormatError("checkpoint has trailing data (dimension mismatch)");

  TrainerState state;
  state.algorithm = static_cast<Algorithm>(algo);
  state.history.sample_count = in.uint<std::uint64_t>();
  state.lambda = in.real();
  state.rho0 = in.real();
  state.dictionary.side = m;
  state.dictionary.filters.assign(k, FilterSupport(m));
  for (auto& f : state.dictionary.filters) {
    for (double& v : f.values) v = in.real();
  }
  state.history.alpha.assign(k, ImagePlane(h, w));
  for (auto& a : state.history.alpha) {
    for (double& v : a.values()) v = in.real();
  }
  state.history.beta.assign(k, SpectrumPlane(h, w));
  for (auto& b : state.history.beta) {
    for (Complex& v : b.values()) {
      const double re = in.real();
      const double im = in.real();
      v = Complex(re, im);
    }
  }
  for (auto& word : state.rng) word = in.uint<std::uint64_t>();
  return state;
}

void save_checkpoint(const TrainerState& state, const std::filesystem::path& path) {
  write_atomic(path, encode_checkpoint(state));
}

TrainerState load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

TileLayout tile_layout(std::size_t filters, std::size_t side, std::size_t cols) {
  if (filters == 0) throw InvalidArgument("dictionary has no filters");
  if (cols == 0) throw InvalidArgument("tile columns must be positive");
  TileLayout t;
  t.cols = std::min(cols, filters);
  t.rows = (filters + t.cols - 1) / t.cols;
  t.height = t.rows * (side + 1) + 1;
  t.width = t.cols * (side + 1) + 1;
  return t;
}

std::vector<std::uint8_t> render_dictionary_tiles(const FilterBank& dictionary, std::size_t cols,
                                                  TileLayout* layout) {
  const std::size_t m = dictionary.side;
  const TileLayout t = tile_layout(dictionary.size(), m, cols);
  std::vector<std::uint8_t> pixels(t.height * t.width, 0);
  for (std::size_t k = 0; k < dictionary.size(); ++k) {
    const auto& vals = dictionary.filters[k].values;
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double range = *hi - *lo;
    const std::size_t top = (k / t.cols) * (m + 1) + 1;
    const std::size_t left = (k % t.cols) * (m + 1) + 1;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const double v = range > 0.0 ? 255.0 * (vals[r * m + c] - *lo) / range : 128.0;
        pixels[(top + r) * t.width + left + c] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  if (layout != nullptr) *layout = t;
  return pixels;
}

TileLayout export_dictionary_tiles(const FilterBank& dictionary, const std::filesystem::path& path,
                                   std::size_t cols) {
  TileLayout t;
  const auto pixels = render_dictionary_tiles(dictionary, cols, &t);
  write_png_gray8(path, t.width, t.height, pixels);
  return t;
}

void append_metrics(const MetricsRow& row, const std::filesystem::path& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to '" + path.string() + "'");
  if (fresh) out << kMetricsHeader << '\n';
  out << row.sample_index << ',' << row.csc_iterations << ',' << row.dict_iterations << ','
      << format_real(row.csc_objective) << ',' << format_real(row.approx_fit_term) << ','
      << format_real(row.wall_time_seconds) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw FormatError("'" + path.string() + "': missing metrics header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw FormatError("'" + path.string() + "': malformed metrics row");
    try {
      MetricsRow r;
      r.sample_index = std::stoull(cells[0]);
      r.csc_iterations = std::stoi(cells[1]);
      r.dict_iterations = std::stoi(cells[2]);
      r.csc_objective = std::stod(cells[3]);
      r.approx_fit_term = std::stod(cells[4]);
      r.wall_time_seconds = std::stod(cells[5]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw FormatError("'" + path.string() + "': unparseable metrics row");
    }
  }
  return rows;
}

void save_plane(const ImagePlane& plane, const std::filesystem::path& path) {
  Writer out(12 + 8 * plane.size());
  out.bytes(kPlaneMagic, 4);
  out.uint(narrow_u32(plane.height(), "height"));
  out.uint(narrow_u32(plane.width(), "width"));
  for (double v : plane.values()) out.real(v);
  write_atomic(path, out.take());
}

ImagePlane load_plane(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Reader in(bytes);
  try {
    if (!in.magic(kPlaneMagic)) throw FormatError("not a plane file");
    const std::size_t h = in.uint<std::uint32_t>();
    const std::size_t w = in.uint<std::uint32_t>();
    if (h == 0 || w == 0 || in.remaining() != 8 * h * w) throw FormatError("plane size mismatch");
    ImagePlane p(h, w);
    for (double& v : p.values()) v = in.real();
    return p;
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace ocdl
