#pragma once

// Writers and readers for the trajectory and sweep files. Numbers use 17
// significant digits with a '.' separator; lines end in LF.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "attstab/control.hpp"
#include "attstab/errors.hpp"
#include "attstab/stability.hpp"

namespace attstab {

/// File access or parse failure.
class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string format_g17(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Parses the whole of `text` as a double; throws IoError otherwise.
inline double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------- trajectory

inline constexpr std::string_view kTrajectoryHeader = "t,x1,x2,x3,x4,x5,x6,u1,u2,u3,V";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << kTrajectoryHeader << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << format_g17(tr.t[k]);
    for (double xi : tr.x[k]) os << ',' << format_g17(xi);
    for (double ui : tr.u[k]) os << ',' << format_g17(ui);
    os << ',' << format_g17(tr.v[k]) << '\n';
  }
}

inline Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryHeader) {
    throw IoError("trajectory CSV header mismatch");
  }
  Trajectory tr;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 11) throw IoError("trajectory row needs 11 fields");
    tr.t.push_back(parse_double(fields[0]));
    State x{};
    for (std::size_t i = 0; i < 6; ++i) x[i] = parse_double(fields[1 + i]);
    Control u{};
    for (std::size_t i = 0; i < 3; ++i) u[i] = parse_double(fields[7 + i]);
    tr.x.push_back(x);
    tr.u.push_back(u);
    tr.v.push_back(parse_double(fields[10]));
  }
  return tr;
}

// --------------------------------------------------------------------- sweep

struct SweepCell {
  double beta1 = 0.0;
  double beta2 = 0.0;
  StabilityClass cls;
};

/// Cells in image order: row 0 holds the largest beta2, columns run over
/// increasing beta1.
struct SweepResult {
  std::size_t n1 = 0;  // columns (beta1)
  std::size_t n2 = 0;  // rows (beta2)
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t row, std::size_t col) const { return cells[row * n1 + col]; }
};

inline std::uint8_t pgm_level(Verdict v) {
  switch (v) {
    case Verdict::Unstable: return 0;
    case Verdict::PolynomiallyStableOnly: return 128;
    case Verdict::LyapunovStable: return 255;
  }
  return 0;
}

inline void write_sweep_pgm(std::ostream& os, const SweepResult& r) {
  os << "P5\n" << r.n1 << ' ' << r.n2 << "\n255\n";
  std::string bytes(r.cells.size(), '\0');
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    bytes[k] = static_cast<char>(pgm_level(r.cells[k].cls.verdict));
  }
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 0;
  std::vector<std::uint8_t> pixels;
};

inline PgmImage read_pgm(std::istream& is) {
  std::string magic;
  PgmImage img;
  if (!(is >> magic) || magic != "P5") throw IoError("not a binary PGM");
  if (!(is >> img.width >> img.height >> img.maxval)) throw IoError("bad PGM header");
  if (img.maxval <= 0 || img.maxval > 255) throw IoError("unsupported PGM maxval");
  is.get();  // single whitespace before the raster
  img.pixels.resize(img.width * img.height);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(is.gcount()) != img.pixels.size()) {
    throw IoError("truncated PGM raster");
  }
  return img;
}

inline constexpr std::string_view kSweepHeader = "beta1,beta2,class,boundary";

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << kSweepHeader << '\n';
  for (const SweepCell& c : r.cells) {
    os << format_g17(c.beta1) << ',' << format_g17(c.beta2) << ',' << to_string(c.cls.verdict)
       << ',' << (c.cls.boundary ? "true" : "false") << '\n';
  }
}

inline std::vector<SweepCell> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepHeader) throw IoError("sweep CSV header mismatch");
  std::vector<SweepCell> cells;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw IoError("sweep row needs 4 fields");
    SweepCell c;
    c.beta1 = parse_double(f[0]);
    c.beta2 = parse_double(f[1]);
    try {
      c.cls.verdict = verdict_from_string(f[2]);
    } catch (const DomainError& e) {
      throw IoError(e.what());
    }
    if (f[3] != "true" && f[3] != "false") throw IoError("boundary must be true or false");
    c.cls.boundary = f[3] == "true";
    cells.push_back(c);
  }
  return cells;
}

// -------------------------------------------------------------------- files

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  writer(os);
  os.flush();
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace attstab
