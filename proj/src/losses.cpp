#include "mhpl/losses.hpp"

#include <cmath>

namespace mhpl {

namespace {

struct Forward {
  Mat adapted;   // B x d
  Mat h1;        // B x h (residual adapter only)
  Mat z;         // lrelu(h1)
  Mat logp;      // B x K log-softmax
  Mat probs;     // B x K
};

Forward forward_pass(const AdaptModel& m, const Mat& x) {
  Forward f;
  const Index d = m.shape.d;
  const Index h = m.shape.hidden;
  if (h == 0) {
    Eigen::Map<const Mat> w(m.adapter.data(), d, d);
    Eigen::Map<const Vec> b(m.adapter.data() + d * d, d);
    f.adapted = (x * w.transpose()).rowwise() + b.transpose();
  } else {
    const double* p = m.adapter.data();
    Eigen::Map<const Mat> w1(p, h, d);
    Eigen::Map<const Vec> b1(p + h * d, h);
    Eigen::Map<const Mat> w2(p + h * d + h, d, h);
    Eigen::Map<const Vec> b2(p + 2 * h * d + h, d);
    f.h1 = (x * w1.transpose()).rowwise() + b1.transpose();
    f.z = f.h1.unaryExpr([](double u) { return u > 0.0 ? u : kLeakySlope * u; });
    f.adapted = x + ((f.z * w2.transpose()).rowwise() + b2.transpose());
  }
  Mat logits = (f.adapted * m.head_w.transpose()).rowwise() + m.head_b.transpose();
  f.logp.resize(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    f.logp.row(i) = logits.row(i).array() - lse;
  }
  f.probs = f.logp.array().exp();
  return f;
}

// Backpropagates d(loss)/d(logits) through the frozen head and the adapter.
Grad backward_pass(const AdaptModel& m, const Mat& x, const Forward& f, const Mat& dlogits) {
  Grad grad(m.adapter.size(), 0.0);
  const Index d = m.shape.d;
  const Index h = m.shape.hidden;
  const Mat dadapted = dlogits * m.head_w;  // B x d
  if (h == 0) {
    Eigen::Map<Mat> dw(grad.data(), d, d);
    Eigen::Map<Vec> db(grad.data() + d * d, d);
    dw = dadapted.transpose() * x;
    db = dadapted.colwise().sum();
  } else {
    const double* p = m.adapter.data();
    Eigen::Map<const Mat> w2(p + h * d + h, d, h);
    Eigen::Map<Mat> dw1(grad.data(), h, d);
    Eigen::Map<Vec> db1(grad.data() + h * d, h);
    Eigen::Map<Mat> dw2(grad.data() + h * d + h, d, h);
    Eigen::Map<Vec> db2(grad.data() + 2 * h * d + h, d);
    dw2 = dadapted.transpose() * f.z;
    db2 = dadapted.colwise().sum();
    Mat dz = dadapted * w2;  // B x h
    Mat dh1 = dz.array() * f.h1.unaryExpr([](double u) { return u > 0.0 ? 1.0 : kLeakySlope; }).array();
    dw1 = dh1.transpose() * x;
    db1 = dh1.colwise().sum();
  }
  return grad;
}

LossValue zero_loss(const AdaptModel& m) {
  return LossValue{0.0, Grad(m.adapter.size(), 0.0)};
}

}  // namespace

LossValue nf_loss_labeled(const AdaptModel& model, const LabeledBatch& batch, double alpha) {
  const Index b = batch.x.rows();
  if (b == 0) return zero_loss(model);
  if (static_cast<Index>(batch.y.size()) != b || static_cast<Index>(batch.np.size()) != b)
    throw MissingLabel(static_cast<Index>(std::min(batch.y.size(), batch.np.size())));
  const Forward f = forward_pass(model, batch.x);
  double value = 0.0;
  Mat dlogits = Mat::Zero(b, model.k());
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Index i = 0; i < b; ++i) {
    const int y = batch.y[static_cast<std::size_t>(i)];
    if (y < 0 || y >= model.k()) throw LabelOutOfRange(i, y, model.k());
    const double w = alpha * batch.np[static_cast<std::size_t>(i)];
    value += w * (-f.logp(i, y)) * inv_b;
    for (int c = 0; c < model.k(); ++c)
      dlogits(i, c) = w * inv_b * (f.probs(i, c) - (c == y ? 1.0 : 0.0));
  }
  return {value, backward_pass(model, batch.x, f, dlogits)};
}

LossValue nf_loss_unlabeled(const AdaptModel& model, const UnlabeledBatch& batch, double beta) {
  const Index b = batch.x.rows();
  if (b == 0) return zero_loss(model);
  if (static_cast<Index>(batch.pseudo.size()) != b) throw MissingLabel(b);
  const Forward f = forward_pass(model, batch.x);
  double value = 0.0;
  Mat dlogits = Mat::Zero(b, model.k());
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Index i = 0; i < b; ++i) {
    const int y = batch.pseudo[static_cast<std::size_t>(i)];
    if (y < 0 || y >= model.k()) throw LabelOutOfRange(i, y, model.k());
    value += beta * (-f.logp(i, y)) * inv_b;
    for (int c = 0; c < model.k(); ++c)
      dlogits(i, c) = beta * inv_b * (f.probs(i, c) - (c == y ? 1.0 : 0.0));
  }
  return {value, backward_pass(model, batch.x, f, dlogits)};
}

LossValue entropy_loss(const AdaptModel& model, const Mat& x) {
  const Index b = x.rows();
  if (b == 0) return zero_loss(model);
  const Forward f = forward_pass(model, x);
  double value = 0.0;
  Mat dlogits(b, model.k());
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Index i = 0; i < b; ++i) {
    double h = 0.0;
    for (int c = 0; c < model.k(); ++c) h -= f.probs(i, c) * f.logp(i, c);
    value += h * inv_b;
    for (int c = 0; c < model.k(); ++c)
      dlogits(i, c) = -inv_b * f.probs(i, c) * (f.logp(i, c) + h);
  }
  return {value, backward_pass(model, x, f, dlogits)};
}

LossValue div_loss(const AdaptModel& model, const Mat& x) {
  const Index b = x.rows();
  if (b == 0) return zero_loss(model);
  const Forward f = forward_pass(model, x);
  const int k = model.k();
  Vec mean = f.probs.colwise().mean();
  // KL(mean || uniform) = sum_k mean_k * log(K * mean_k); softmax keeps
  // mean_k strictly positive.
  double value = 0.0;
  Vec logkm(k);
  for (int c = 0; c < k; ++c) {
    logkm(c) = std::log(static_cast<double>(k) * mean(c));
    value += mean(c) * logkm(c);
  }
  Mat dlogits(b, k);
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Index i = 0; i < b; ++i) {
    double row_dot = 0.0;
    for (int c = 0; c < k; ++c) row_dot += f.probs(i, c) * logkm(c);
    for (int c = 0; c < k; ++c)
      dlogits(i, c) = inv_b * f.probs(i, c) * (logkm(c) - row_dot);
  }
  return {value, backward_pass(model, x, f, dlogits)};
}

TotalLoss total_loss(const AdaptModel& model, const LabeledBatch& labeled,
                     const UnlabeledBatch& unlabeled, double alpha, double beta) {
  Mat all(labeled.x.rows() + unlabeled.x.rows(), model.shape.d);
  if (labeled.x.rows() > 0) all.topRows(labeled.x.rows()) = labeled.x;
  if (unlabeled.x.rows() > 0) all.bottomRows(unlabeled.x.rows()) = unlabeled.x;

  const LossValue lf = nf_loss_labeled(model, labeled, alpha);
  const LossValue lu = nf_loss_unlabeled(model, unlabeled, beta);
  const LossValue le = entropy_loss(model, all);
  const LossValue ld = div_loss(model, all);

  TotalLoss out;
  out.parts.nf_labeled = lf.value;
  out.parts.nf_unlabeled = lu.value;
  out.parts.ent = le.value;
  out.parts.div = ld.value;
  out.parts.total = lf.value + lu.value + le.value + ld.value;
  out.grad.assign(model.adapter.size(), 0.0);
  for (std::size_t i = 0; i < out.grad.size(); ++i)
    out.grad[i] = lf.grad[i] + lu.grad[i] + le.grad[i] + ld.grad[i];
  return out;
}

}  // namespace mhpl
