#include "mhpl/feature_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mhpl {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'X', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(const std::string& field, Index row) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw DimensionMismatch(row, "unparseable field '" + field + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

FeatureSet load_binary(const std::string& path) {
  const std::string buf = read_all(path);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 17 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw MalformedHeader("missing FMX1 magic in " + path);
  const Index n = get_u32(p + 4);
  const Index d = get_u32(p + 8);
  const int k = static_cast<int>(get_u32(p + 12));
  const std::uint8_t flags = p[16];
  const bool has_labels = flags & 0x1;
  const bool has_tags = flags & 0x2;

  std::size_t need = 17 + static_cast<std::size_t>(n) * static_cast<std::size_t>(d) * 4;
  if (has_labels) need += static_cast<std::size_t>(n) * 4;
  if (has_tags) need += static_cast<std::size_t>(n);
  if (buf.size() < need) throw MalformedFile("truncated FMX1 file " + path);

  FeatureSet fs;
  fs.n = n;
  fs.d = d;
  fs.k = k;
  fs.features.resize(n, d);
  std::size_t off = 17;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      fs.features(i, j) = static_cast<double>(get_f32(p + off));
      off += 4;
    }
  }
  if (has_labels) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = static_cast<int>(get_u32(p + off));
      off += 4;
    }
    fs.labels = std::move(labels);
  }
  if (has_tags) {
    std::vector<DomainTag> tags(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      tags[static_cast<std::size_t>(i)] = static_cast<DomainTag>(p[off]);
      ++off;
    }
    fs.tags = std::move(tags);
  }
  validate(fs);
  return fs;
}

FeatureSet load_csv(const std::string& path, std::optional<int> k_override) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw MalformedHeader("empty file " + path);

  const auto header = split_csv_line(line);
  bool has_label = !header.empty() && header.back() == "label";
  const Index d = static_cast<Index>(header.size()) - (has_label ? 1 : 0);
  if (d < 1) throw MalformedHeader("no feature columns in " + path);
  for (Index j = 0; j < d; ++j) {
    if (header[static_cast<std::size_t>(j)] != "f" + std::to_string(j))
      throw MalformedHeader("expected column f" + std::to_string(j) + ", found '" +
                            header[static_cast<std::size_t>(j)] + "'");
  }

  std::vector<double> values;
  std::vector<int> labels;
  Index n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Index>(fields.size()) != d + (has_label ? 1 : 0))
      throw DimensionMismatch(n, "expected " + std::to_string(d + (has_label ? 1 : 0)) +
                                     " fields, found " + std::to_string(fields.size()));
    for (Index j = 0; j < d; ++j)
      values.push_back(parse_double(fields[static_cast<std::size_t>(j)], n));
    if (has_label) {
      const double lv = parse_double(fields.back(), n);
      const int li = static_cast<int>(lv);
      if (lv != static_cast<double>(li) || li < 0)
        throw DimensionMismatch(n, "label '" + fields.back() + "' is not a nonnegative integer");
      labels.push_back(li);
    }
    ++n;
  }
  if (n == 0) throw EmptySet();

  FeatureSet fs;
  fs.n = n;
  fs.d = d;
  fs.features.resize(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      fs.features(i, j) = values[static_cast<std::size_t>(i * d + j)];
  if (has_label) fs.labels = std::move(labels);

  if (k_override) {
    fs.k = *k_override;
  } else if (has_label) {
    int max_label = 0;
    for (int l : *fs.labels) max_label = std::max(max_label, l);
    fs.k = std::max(2, max_label + 1);
  } else {
    throw MissingClassCount();
  }
  validate(fs);
  return fs;
}

}  // namespace

void validate(const FeatureSet& fs) {
  if (fs.n < 1) throw EmptySet();
  if (fs.d < 1) throw MalformedHeader("d must be >= 1");
  if (fs.k < 2) throw MalformedHeader("K must be >= 2");
  if (fs.features.rows() != fs.n || fs.features.cols() != fs.d)
    throw DimensionMismatch(0, "feature matrix shape does not match header");
  for (Index i = 0; i < fs.n; ++i)
    for (Index j = 0; j < fs.d; ++j)
      if (!std::isfinite(fs.features(i, j))) throw NonFiniteEntry(i);
  if (fs.labels) {
    if (static_cast<Index>(fs.labels->size()) != fs.n)
      throw DimensionMismatch(0, "label vector length does not match n");
    for (Index i = 0; i < fs.n; ++i) {
      const int l = (*fs.labels)[static_cast<std::size_t>(i)];
      if (l < 0 || l >= fs.k) throw LabelOutOfRange(i, l, fs.k);
    }
  }
  if (fs.tags && static_cast<Index>(fs.tags->size()) != fs.n)
    throw DimensionMismatch(0, "tag vector length does not match n");
}

FeatureSet load_feature_set(const std::string& path, FileFormat format,
                            std::optional<int> k_override) {
  return format == FileFormat::Binary ? load_binary(path) : load_csv(path, k_override);
}

void save_feature_set(const FeatureSet& fs, const std::string& path) {
  validate(fs);
  std::string out;
  out.reserve(17 + static_cast<std::size_t>(fs.n) * static_cast<std::size_t>(fs.d) * 4);
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(fs.n));
  put_u32(out, static_cast<std::uint32_t>(fs.d));
  put_u32(out, static_cast<std::uint32_t>(fs.k));
  std::uint8_t flags = 0;
  if (fs.labels) flags |= 0x1;
  if (fs.tags) flags |= 0x2;
  out.push_back(static_cast<char>(flags));
  for (Index i = 0; i < fs.n; ++i)
    for (Index j = 0; j < fs.d; ++j)
      put_f32(out, static_cast<float>(fs.features(i, j)));
  if (fs.labels)
    for (int l : *fs.labels) put_u32(out, static_cast<std::uint32_t>(l));
  if (fs.tags)
    for (DomainTag t : *fs.tags) out.push_back(static_cast<char>(t));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UnwritablePath(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw UnwritablePath(path);
}

void save_feature_set_csv(const FeatureSet& fs, const std::string& path) {
  validate(fs);
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw UnwritablePath(path);
  for (Index j = 0; j < fs.d; ++j) f << (j ? ",f" : "f") << j;
  if (fs.labels) f << ",label";
  f << "\n";
  char buf[64];
  for (Index i = 0; i < fs.n; ++i) {
    for (Index j = 0; j < fs.d; ++j) {
      // round-trips the f32 value the binary format would store
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(static_cast<float>(fs.features(i, j))));
      if (j) f << ',';
      f << buf;
    }
    if (fs.labels) f << ',' << (*fs.labels)[static_cast<std::size_t>(i)];
    f << "\n";
  }
  if (!f) throw UnwritablePath(path);
}

NormalizeResult normalize_rows(const FeatureSet& fs) {
  validate(fs);
  NormalizeResult res;
  res.fs = fs;
  for (Index i = 0; i < fs.n; ++i) {
    double sq = 0.0;
    for (Index j = 0; j < fs.d; ++j) sq += fs.features(i, j) * fs.features(i, j);
    if (sq == 0.0) {
      res.zero_rows.push_back(i);
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (Index j = 0; j < fs.d; ++j) res.fs.features(i, j) = fs.features(i, j) * inv;
  }
  return res;
}

SplitAssignment make_split(Index n, const std::vector<Index>& labeled_idx) {
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (Index i : labeled_idx) {
    if (i < 0 || i >= n) throw IndexOutOfRange(i, n);
    if (taken[static_cast<std::size_t>(i)])
      throw Error("duplicate labeled index " + std::to_string(i));
    taken[static_cast<std::size_t>(i)] = 1;
  }
  SplitAssignment split;
  split.labeled_idx = labeled_idx;
  split.budget = static_cast<Index>(labeled_idx.size());
  split.unlabeled_idx.reserve(static_cast<std::size_t>(n) - labeled_idx.size());
  for (Index i = 0; i < n; ++i)
    if (!taken[static_cast<std::size_t>(i)]) split.unlabeled_idx.push_back(i);
  return split;
}

}  // namespace mhpl
