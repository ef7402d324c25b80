#include "raysamp/optim.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace raysamp {

MseResult mse_loss(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size()) throw std::invalid_argument("mse_loss: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mse_loss: empty batch");
  const double n = static_cast<double>(pred.size());
  MseResult r;
  r.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 d = pred[i] - gt[i];
    r.loss += dot(d, d);
    r.grad[i] = d * (2.0 / n);
  }
  r.loss /= n;
  return r;
}

PatchLossResult patch_mean_l1_loss(std::span<const PixelSample> batch, std::span<const Vec3> pred,
                                   std::span<const Vec3> gt, int width, int height) {
  if (batch.size() != pred.size() || pred.size() != gt.size())
    throw std::invalid_argument("patch_mean_l1_loss: length mismatch");
  std::map<std::pair<int, int>, std::vector<std::size_t>> patches;
  for (std::size_t i = 0; i < batch.size(); ++i)
    patches[{batch[i].image, region_of(batch[i].u, batch[i].v, width, height)}].push_back(i);

  PatchLossResult r;
  r.grad.assign(batch.size(), Vec3{});
  r.patches = patches.size();
  if (patches.empty()) return r;
  const double np = static_cast<double>(patches.size());
  for (const auto& [key, members] : patches) {
    Vec3 diff;
    for (auto i : members) diff += pred[i] - gt[i];
    diff = diff / static_cast<double>(members.size());
    r.loss += std::abs(diff.x) + std::abs(diff.y) + std::abs(diff.z);
    auto sgn = [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); };
    const Vec3 g = Vec3{sgn(diff.x), sgn(diff.y), sgn(diff.z)} / (np * static_cast<double>(members.size()));
    for (auto i : members) r.grad[i] = g;
  }
  r.loss /= np;
  return r;
}

Adam::Adam(std::size_t size, AdamOptions options) : opt_(options), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("Adam::step: shape mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw std::domain_error("non-finite gradient at parameter index " + std::to_string(i));
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + opt_.epsilon);
  }
}

double learning_rate(std::int64_t iteration, double lr0, std::int64_t cut) {
  return iteration < cut ? lr0 : lr0 / 2.0;
}

}  // namespace raysamp
