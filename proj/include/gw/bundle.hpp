#pragma once

#include "gw/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace gw {

enum class FeatureEncoding { kBinary, kCsv };

std::string to_string(FeatureEncoding enc);
FeatureEncoding feature_encoding_from_string(const std::string& s);

/// Contents of meta.json.
struct BundleMeta {
  node_t n = 0;
  int d = 0;
  int num_classes = 0;
  bool directed_flag = true;
  FeatureEncoding feature_encoding = FeatureEncoding::kBinary;
  int format_version = 1;
};

inline constexpr int kBundleFormatVersion = 1;
/// Leading bytes of features.bin, followed by little-endian u64 n and u64 d.
inline constexpr char kFeatureMagic[8] = {'G', 'W', 'F', 'E', 'A', 'T', '0', '1'};

struct LoadOptions {
  /// Seed of the Planetoid-style split generated when splits.json is absent.
  std::uint64_t split_seed = 0;
  int train_per_class = 20;
  int val_per_class = 30;
};

/// Reads a bundle directory:
///   meta.json, edges.csv (header `src,dst`), features.bin | features.csv,
///   optional labels.csv (one integer per line, -1 = unlabeled) and
///   optional splits.json ({"train":[...],"val":[...],"test":[...]}).
Graph load_bundle(const std::filesystem::path& dir, const LoadOptions& opts = {});

void save_bundle(const Graph& graph, const std::filesystem::path& dir,
                 FeatureEncoding enc = FeatureEncoding::kBinary);

BundleMeta read_meta(const std::filesystem::path& dir);

// Exposed for tests and for sidecar files written by other subcommands.
Matrix read_features_bin(const std::filesystem::path& file);
void write_features_bin(const Matrix& x, const std::filesystem::path& file);
Matrix read_features_csv(const std::filesystem::path& file, node_t n, int d);
void write_features_csv(const Matrix& x, const std::filesystem::path& file);
std::vector<int> read_int_lines(const std::filesystem::path& file);
void write_int_lines(const std::vector<int>& values, const std::filesystem::path& file);

} // namespace gw
