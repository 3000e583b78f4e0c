#include "vidprnu/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "vidprnu/error.hpp"
#include "vidprnu/io.hpp"

namespace vidprnu {

namespace {

constexpr const char* kModule = "similarity";

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.remove_prefix(1);
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\r')) c.remove_suffix(1);
  }
  return cells;
}

}  // namespace

double correlation(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::Shape, kModule,
                "vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  if (a.size() < 2) throw Error(ErrorKind::Shape, kModule, "need at least two elements");
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / static_cast<double>(a.size());
  const double mb = sb / static_cast<double>(b.size());
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    ab += da * db;
    aa += da * da;
    bb += db * db;
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorKind::Degenerate, kModule, "constant input has zero norm");
  return clamp_unit(ab / (std::sqrt(aa) * std::sqrt(bb)));
}

double correlation(const Fingerprint& a, const Fingerprint& b) {
  if (!a.values.same_shape(b.values))
    throw Error(ErrorKind::Shape, kModule,
                "fingerprints '" + a.meta.video_id + "' and '" + b.meta.video_id + "' differ in size");
  try {
    return correlation(a.values.values(), b.values.values());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    throw Error(ErrorKind::Degenerate, kModule,
                "fingerprint '" + a.meta.video_id + "' or '" + b.meta.video_id + "' is constant");
  }
}

SimilarityMatrix build_matrix(std::span<const Fingerprint> fps, kernels::Backend backend) {
  if (fps.size() < 2) throw Error(ErrorKind::TooFewItems, kModule, "need at least two fingerprints");
  const std::size_t n = fps.size();
  const std::size_t length = fps[0].values.size();
  for (const auto& fp : fps)
    if (!fp.values.same_shape(fps[0].values))
      throw Error(ErrorKind::Shape, kModule,
                  "fingerprint '" + fp.meta.video_id + "' is " + std::to_string(fp.width()) + "x" +
                      std::to_string(fp.height()) + ", expected " + std::to_string(fps[0].width()) + "x" +
                      std::to_string(fps[0].height()));
  if (length < 2) throw Error(ErrorKind::Shape, kModule, "need at least two elements");

  std::vector<float> centered(n * length);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<float> out(centered.data() + i * length, length);
    norms[i] = backend == kernels::Backend::Serial ? kernels::serial::center(fps[i].values.values(), out)
                                                   : kernels::omp::center(fps[i].values.values(), out);
    if (norms[i] == 0.0)
      throw Error(ErrorKind::Degenerate, kModule, "fingerprint '" + fps[i].meta.video_id + "' is constant");
  }

  SimilarityMatrix sim;
  sim.ids.reserve(n);
  for (const auto& fp : fps) sim.ids.push_back(fp.meta.video_id);
  sim.values.assign(n * n, 0.0);
  if (backend == kernels::Backend::Serial)
    kernels::serial::gram_upper(centered, n, length, sim.values);
  else
    kernels::omp::gram_upper(centered, n, length, sim.values);
  for (std::size_t i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      sim(i, j) = clamp_unit(sim(i, j) / (norms[i] * norms[j]));
      sim(j, i) = sim(i, j);
    }
  }
  return sim;
}

void check_symmetric(const SimilarityMatrix& sim) {
  const std::size_t n = sim.size();
  if (sim.values.size() != n * n)
    throw Error(ErrorKind::Matrix, kModule,
                std::to_string(sim.values.size()) + " values for " + std::to_string(n) + " ids");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(sim(i, j)))
        throw Error(ErrorKind::Matrix, kModule, "non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (sim(i, j) != sim(j, i))
        throw Error(ErrorKind::Matrix, kModule,
                    "not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
}

std::string matrix_to_csv(const SimilarityMatrix& sim) {
  std::string out;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    if (i) out += ',';
    out += sim.ids[i];
  }
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < sim.size(); ++i) {
    for (std::size_t j = 0; j < sim.size(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.9g", sim(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

SimilarityMatrix matrix_from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw Error(ErrorKind::Matrix, kModule, "empty matrix file");

  SimilarityMatrix sim;
  for (auto id : split_csv_line(lines[0])) {
    if (id.empty()) throw Error(ErrorKind::Matrix, kModule, "empty id in header");
    sim.ids.emplace_back(id);
  }
  const std::size_t n = sim.ids.size();
  if (lines.size() != n + 1)
    throw Error(ErrorKind::Matrix, kModule,
                std::to_string(n) + " ids but " + std::to_string(lines.size() - 1) + " rows");
  sim.values.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    auto cells = split_csv_line(lines[r + 1]);
    if (cells.size() != n)
      throw Error(ErrorKind::Matrix, kModule,
                  "row " + std::to_string(r) + " has " + std::to_string(cells.size()) + " values, expected " +
                      std::to_string(n));
    for (auto cell : cells) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size())
        throw Error(ErrorKind::Matrix, kModule, "row " + std::to_string(r) + ": bad number '" + std::string(cell) + "'");
      sim.values.push_back(v);
    }
  }
  return sim;
}

void write_matrix(const std::filesystem::path& path, const SimilarityMatrix& sim) {
  write_file_atomic(path, matrix_to_csv(sim), kModule);
}

SimilarityMatrix read_matrix(const std::filesystem::path& path) { return matrix_from_csv(read_file(path, kModule)); }

}  // namespace vidprnu
