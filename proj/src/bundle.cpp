#include "gw/bundle.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& file, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(file, mode);
  if (!in) {
    throw Error("missing file: " + file.string());
  }
  return in;
}

std::ofstream open_out(const fs::path& file, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(file, mode | std::ios::trunc);
  if (!out) {
    throw Error("cannot write file: " + file.string());
  }
  return out;
}

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

std::vector<Edge> read_edges(const fs::path& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("edges.csv is empty; header line `src,dst` is required");
  }
  std::vector<Edge> edges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    long long src = 0;
    long long dst = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld", &src, &dst) != 2) {
      throw Error("edges.csv line " + std::to_string(line_no) + ": expected `src,dst`");
    }
    if (src < 0 || dst < 0 || src > INT32_MAX || dst > INT32_MAX) {
      throw Error("edges.csv line " + std::to_string(line_no) + ": index out of range");
    }
    edges.push_back({static_cast<node_t>(src), static_cast<node_t>(dst)});
  }
  return edges;
}

Masks read_splits(const fs::path& file, node_t n) {
  auto in = open_in(file);
  json j;
  in >> j;
  Masks m;
  m.train.assign(n, 0);
  m.val.assign(n, 0);
  m.test.assign(n, 0);
  auto fill = [&](const char* key, std::vector<std::uint8_t>& mask) {
    if (!j.contains(key)) {
      return;
    }
    for (const auto& v : j.at(key)) {
      const auto idx = v.get<long long>();
      if (idx < 0 || idx >= n) {
        throw Error(std::string("splits.json ") + key + ": index out of range");
      }
      mask[idx] = 1;
    }
  };
  fill("train", m.train);
  fill("val", m.val);
  fill("test", m.test);
  return m;
}

} // namespace

std::string to_string(FeatureEncoding enc) {
  return enc == FeatureEncoding::kBinary ? "bin-f64-le" : "csv";
}

FeatureEncoding feature_encoding_from_string(const std::string& s) {
  if (s == "bin-f64-le") {
    return FeatureEncoding::kBinary;
  }
  if (s == "csv") {
    return FeatureEncoding::kCsv;
  }
  throw Error("unknown feature encoding: " + s);
}

BundleMeta read_meta(const fs::path& dir) {
  auto in = open_in(dir / "meta.json");
  json j;
  in >> j;
  BundleMeta meta;
  meta.n = j.at("n").get<node_t>();
  meta.d = j.at("d").get<int>();
  meta.num_classes = j.value("num_classes", 0);
  meta.directed_flag = j.value("directed_flag", true);
  meta.feature_encoding =
      feature_encoding_from_string(j.value("feature_encoding", std::string("bin-f64-le")));
  meta.format_version = j.value("format_version", kBundleFormatVersion);
  if (meta.format_version != kBundleFormatVersion) {
    throw Error("unsupported bundle format_version " + std::to_string(meta.format_version));
  }
  return meta;
}

Matrix read_features_bin(const fs::path& file) {
  auto in = open_in(file, std::ios::binary);
  char magic[8];
  std::uint64_t header[2];
  if (!in.read(magic, 8) || std::memcmp(magic, kFeatureMagic, 8) != 0) {
    throw Error("features.bin: bad magic");
  }
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw Error("features.bin: truncated header");
  }
  const auto n = static_cast<Eigen::Index>(to_little_endian(header[0]));
  const auto d = static_cast<Eigen::Index>(to_little_endian(header[1]));
  Matrix x(n, d);
  if (!in.read(reinterpret_cast<char*>(x.data()),
               static_cast<std::streamsize>(sizeof(double) * n * d))) {
    throw Error("features.bin: truncated payload");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x.data()[i] = to_little_endian(x.data()[i]);
    }
  }
  return x;
}

void write_features_bin(const Matrix& x, const fs::path& file) {
  auto out = open_out(file, std::ios::binary);
  out.write(kFeatureMagic, 8);
  const std::uint64_t header[2] = {to_little_endian(static_cast<std::uint64_t>(x.rows())),
                                   to_little_endian(static_cast<std::uint64_t>(x.cols()))};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(x.data()),
              static_cast<std::streamsize>(sizeof(double) * x.size()));
  } else {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = to_little_endian(x.data()[i]);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) {
    throw Error("write failed: " + file.string());
  }
}

Matrix read_features_csv(const fs::path& file, node_t n, int d) {
  auto in = open_in(file);
  Matrix x(n, d);
  std::string line;
  node_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    if (row >= n) {
      throw Error("features.csv: more rows than n=" + std::to_string(n));
    }
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= d) {
        throw Error("features.csv: row " + std::to_string(row) + " has more than d columns");
      }
      x(row, col++) = std::stod(cell);
    }
    if (col != d) {
      throw Error("features.csv: row " + std::to_string(row) + " has " + std::to_string(col) +
                  " columns, expected " + std::to_string(d));
    }
    ++row;
  }
  if (row != n) {
    throw Error("features.csv: feature row count " + std::to_string(row) +
                " does not match n=" + std::to_string(n));
  }
  return x;
}

void write_features_csv(const Matrix& x, const fs::path& file) {
  auto out = open_out(file);
  char buf[32];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

std::vector<int> read_int_lines(const fs::path& file) {
  auto in = open_in(file);
  std::vector<int> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    values.push_back(std::stoi(line));
  }
  return values;
}

void write_int_lines(const std::vector<int>& values, const fs::path& file) {
  auto out = open_out(file);
  for (int v : values) {
    out << v << '\n';
  }
}

Graph load_bundle(const fs::path& dir, const LoadOptions& opts) {
  const BundleMeta meta = read_meta(dir);
  Matrix x;
  if (meta.feature_encoding == FeatureEncoding::kBinary) {
    x = read_features_bin(dir / "features.bin");
    if (x.rows() != meta.n) {
      throw Error("feature row count " + std::to_string(x.rows()) +
                  " does not match n=" + std::to_string(meta.n));
    }
    if (x.cols() != meta.d) {
      throw Error("feature column count does not match d");
    }
  } else {
    x = read_features_csv(dir / "features.csv", meta.n, meta.d);
  }

  Graph g = Graph::from_edges(meta.n, read_edges(dir / "edges.csv"), std::move(x),
                              meta.directed_flag);

  if (fs::exists(dir / "labels.csv")) {
    auto labels = read_int_lines(dir / "labels.csv");
    if (static_cast<node_t>(labels.size()) != meta.n) {
      throw Error("labels.csv has " + std::to_string(labels.size()) +
                  " rows, expected n=" + std::to_string(meta.n));
    }
    g = g.with_labels(std::move(labels), meta.num_classes);
    if (fs::exists(dir / "splits.json")) {
      g = g.with_masks(read_splits(dir / "splits.json", meta.n));
    } else {
      g = g.with_masks(random_class_split(g.labels(), g.num_classes(), opts.train_per_class,
                                          opts.val_per_class, opts.split_seed));
    }
  }
  g.validate();
  return g;
}

void save_bundle(const Graph& graph, const fs::path& dir, FeatureEncoding enc) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create directory " + dir.string() + ": " + ec.message());
  }
  json meta = {{"format_version", kBundleFormatVersion},
               {"n", graph.num_nodes()},
               {"d", graph.feature_dim()},
               {"num_classes", graph.num_classes()},
               {"directed_flag", graph.directed()},
               {"feature_encoding", to_string(enc)}};
  open_out(dir / "meta.json") << meta.dump(2) << '\n';

  {
    auto out = open_out(dir / "edges.csv");
    out << "src,dst\n";
    for (node_t v = 0; v < graph.num_nodes(); ++v) {
      for (node_t u : graph.neighbors(v)) {
        out << v << ',' << u << '\n';
      }
    }
  }

  if (enc == FeatureEncoding::kBinary) {
    write_features_bin(graph.features(), dir / "features.bin");
    fs::remove(dir / "features.csv", ec);
  } else {
    write_features_csv(graph.features(), dir / "features.csv");
    fs::remove(dir / "features.bin", ec);
  }

  if (graph.has_labels()) {
    write_int_lines(graph.labels(), dir / "labels.csv");
  } else {
    fs::remove(dir / "labels.csv", ec);
  }
  if (graph.has_masks()) {
    const Masks& m = graph.masks();
    json splits = {{"train", mask_indices(m.train)},
                   {"val", mask_indices(m.val)},
                   {"test", mask_indices(m.test)}};
    open_out(dir / "splits.json") << splits.dump() << '\n';
  } else {
    fs::remove(dir / "splits.json", ec);
  }
}

} // namespace gw
