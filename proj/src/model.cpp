#include "mhpl/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mhpl/rng.hpp"

namespace mhpl {

namespace {

// Views into the flat parameter vector.
struct LinearView {
  Eigen::Map<const Mat> w;
  Eigen::Map<const Vec> b;
};
struct ResidualView {
  Eigen::Map<const Mat> w1;
  Eigen::Map<const Vec> b1;
  Eigen::Map<const Mat> w2;
  Eigen::Map<const Vec> b2;
};

LinearView linear_view(const AdaptModel& m) {
  const Index d = m.shape.d;
  return {Eigen::Map<const Mat>(m.adapter.data(), d, d),
          Eigen::Map<const Vec>(m.adapter.data() + d * d, d)};
}

ResidualView residual_view(const AdaptModel& m) {
  const Index d = m.shape.d;
  const Index h = m.shape.hidden;
  const double* p = m.adapter.data();
  return {Eigen::Map<const Mat>(p, h, d), Eigen::Map<const Vec>(p + h * d, h),
          Eigen::Map<const Mat>(p + h * d + h, d, h), Eigen::Map<const Vec>(p + 2 * h * d + h, d)};
}

}  // namespace

Mat AdaptModel::adapt(const Mat& x) const {
  if (shape.hidden == 0) {
    const auto v = linear_view(*this);
    return (x * v.w.transpose()).rowwise() + v.b.transpose();
  }
  const auto v = residual_view(*this);
  Mat h1 = (x * v.w1.transpose()).rowwise() + v.b1.transpose();
  Mat z = h1.unaryExpr([](double u) { return u > 0.0 ? u : kLeakySlope * u; });
  return x + ((z * v.w2.transpose()).rowwise() + v.b2.transpose());
}

Mat AdaptModel::logits(const Mat& x) const {
  return (adapt(x) * head_w.transpose()).rowwise() + head_b.transpose();
}

Mat AdaptModel::probs(const Mat& x) const {
  Mat l = logits(x);
  for (Index i = 0; i < l.rows(); ++i) {
    const double mx = l.row(i).maxCoeff();
    l.row(i) = (l.row(i).array() - mx).exp();
    l.row(i) /= l.row(i).sum();
  }
  return l;
}

std::vector<int> AdaptModel::predict(const Mat& x) const {
  const Mat l = logits(x);
  std::vector<int> out(static_cast<std::size_t>(l.rows()));
  for (Index i = 0; i < l.rows(); ++i) {
    double best = l(i, 0);
    int best_k = 0;
    for (int c = 1; c < l.cols(); ++c)
      if (l(i, c) > best) {
        best = l(i, c);
        best_k = c;
      }
    out[static_cast<std::size_t>(i)] = best_k;
  }
  return out;
}

AdaptModel make_identity_model(Mat head_w, Vec head_b, int hidden, std::uint64_t seed) {
  AdaptModel m;
  m.shape.d = head_w.cols();
  m.shape.hidden = hidden;
  m.head_w = std::move(head_w);
  m.head_b = std::move(head_b);
  m.adapter.assign(adapter_param_count(m.shape), 0.0);
  const Index d = m.shape.d;
  if (hidden == 0) {
    for (Index i = 0; i < d; ++i) m.adapter[static_cast<std::size_t>(i * d + i)] = 1.0;
  } else {
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (Index i = 0; i < hidden * d; ++i)
      m.adapter[static_cast<std::size_t>(i)] = scale * rng.normal();
    // b1, W2, b2 stay zero: the residual branch contributes nothing at init.
  }
  return m;
}

double accuracy(const AdaptModel& model, const FeatureSet& fs) {
  if (!fs.labels) throw MissingLabel(0);
  const auto pred = model.predict(fs.features);
  Index correct = 0;
  for (Index i = 0; i < fs.n; ++i)
    if (pred[static_cast<std::size_t>(i)] == (*fs.labels)[static_cast<std::size_t>(i)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(fs.n);
}

namespace {

constexpr char kCkptMagic[4] = {'M', 'H', 'C', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const AdaptModel& model, const std::string& path) {
  std::string out;
  out.append(kCkptMagic, 4);
  put_u32(out, 1);  // format version
  put_u32(out, static_cast<std::uint32_t>(model.shape.d));
  put_u32(out, static_cast<std::uint32_t>(model.k()));
  put_u32(out, static_cast<std::uint32_t>(model.shape.hidden));
  for (double v : model.adapter) put_f64(out, v);
  for (Index i = 0; i < model.head_w.rows(); ++i)
    for (Index j = 0; j < model.head_w.cols(); ++j) put_f64(out, model.head_w(i, j));
  for (Index i = 0; i < model.head_b.size(); ++i) put_f64(out, model.head_b(i));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UnwritablePath(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw UnwritablePath(path);
}

AdaptModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 20 || std::memcmp(buf.data(), kCkptMagic, 4) != 0)
    throw MalformedHeader("missing MHC1 magic in " + path);
  if (get_u32(p + 4) != 1) throw MalformedHeader("unsupported checkpoint version");
  AdaptModel m;
  m.shape.d = get_u32(p + 8);
  const Index k = get_u32(p + 12);
  m.shape.hidden = static_cast<int>(get_u32(p + 16));
  const std::size_t n_adapter = adapter_param_count(m.shape);
  const std::size_t need =
      20 + 8 * (n_adapter + static_cast<std::size_t>(k * m.shape.d) + static_cast<std::size_t>(k));
  if (buf.size() < need) throw MalformedFile("truncated checkpoint " + path);
  std::size_t off = 20;
  m.adapter.resize(n_adapter);
  for (auto& v : m.adapter) {
    v = get_f64(p + off);
    off += 8;
  }
  m.head_w.resize(k, m.shape.d);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < m.shape.d; ++j) {
      m.head_w(i, j) = get_f64(p + off);
      off += 8;
    }
  m.head_b.resize(k);
  for (Index i = 0; i < k; ++i) {
    m.head_b(i) = get_f64(p + off);
    off += 8;
  }
  return m;
}

}  // namespace mhpl
