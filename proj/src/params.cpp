#include "kgi/params.hpp"

#include <cmath>

#include "kgi/error.hpp"

namespace kgi {

std::size_t ParamStore::add(std::string name, std::size_t rows,
                            std::size_t cols) {
  if (find(name)) {
    throw Error(ErrorCode::kConfiguration, "duplicate parameter " + name);
  }
  const std::size_t offset = size();
  blocks_.push_back({std::move(name), offset, rows, cols});
  const auto n = static_cast<Eigen::Index>(offset + rows * cols);
  values_.conservativeResize(n);
  grads_.conservativeResize(n);
  values_.tail(n - static_cast<Eigen::Index>(offset)).setZero();
  grads_.tail(n - static_cast<Eigen::Index>(offset)).setZero();
  return blocks_.size() - 1;
}

ParamStore::MatrixMap ParamStore::value(std::size_t block) {
  const auto& b = blocks_.at(block);
  return MatrixMap(values_.data() + b.offset, static_cast<Eigen::Index>(b.rows),
                   static_cast<Eigen::Index>(b.cols));
}

ParamStore::ConstMatrixMap ParamStore::value(std::size_t block) const {
  const auto& b = blocks_.at(block);
  return ConstMatrixMap(values_.data() + b.offset,
                        static_cast<Eigen::Index>(b.rows),
                        static_cast<Eigen::Index>(b.cols));
}

ParamStore::MatrixMap ParamStore::grad(std::size_t block) {
  const auto& b = blocks_.at(block);
  return MatrixMap(grads_.data() + b.offset, static_cast<Eigen::Index>(b.rows),
                   static_cast<Eigen::Index>(b.cols));
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  return std::nullopt;
}

void ParamStore::init_uniform(std::size_t block, double bound, Rng& rng) {
  std::uniform_real_distribution<double> d(-bound, bound);
  auto m = value(block);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
}

void ParamStore::write(BinaryWriter& w) const {
  w.u32(static_cast<std::uint32_t>(blocks_.size()));
  for (const auto& b : blocks_) {
    w.str(b.name);
    w.u32(static_cast<std::uint32_t>(b.rows));
    w.u32(static_cast<std::uint32_t>(b.cols));
  }
  w.vector(values_);
}

void ParamStore::read(BinaryReader& r) {
  const auto count = r.u32();
  if (count != blocks_.size()) {
    throw Error(ErrorCode::kParse, "parameter layout mismatch: block count");
  }
  for (const auto& b : blocks_) {
    const auto name = r.str();
    const auto rows = r.u32();
    const auto cols = r.u32();
    if (name != b.name || rows != b.rows || cols != b.cols) {
      throw Error(ErrorCode::kParse,
                  "parameter layout mismatch at block " + b.name);
    }
  }
  auto v = r.vector();
  if (v.size() != values_.size()) {
    throw Error(ErrorCode::kParse, "parameter layout mismatch: size");
  }
  values_ = std::move(v);
  grads_.setZero();
}

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in,
               std::size_t out)
    : w_(store.add(name + ".weight", out, in)),
      b_(store.add(name + ".bias", out, 1)),
      in_(in),
      out_(out) {}

void Linear::init(ParamStore& store, Rng& rng) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  store.init_uniform(w_, bound, rng);
  store.init_uniform(b_, bound, rng);
}

Eigen::VectorXd Linear::forward(const ParamStore& store,
                                const Eigen::VectorXd& x) const {
  return store.value(w_) * x + store.value(b_).col(0);
}

Eigen::VectorXd Linear::backward(ParamStore& store, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& dy) const {
  store.grad(w_).noalias() += dy * x.transpose();
  store.grad(b_).col(0) += dy;
  return store.value(w_).transpose() * dy;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return kgi::sigmoid(v); });
}

}  // namespace kgi
