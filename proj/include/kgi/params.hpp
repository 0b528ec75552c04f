#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kgi/binary_io.hpp"
#include "kgi/link_predictor.hpp"

namespace kgi {

/// Trainable parameters of a network kept in one flat vector, with a
/// gradient vector of the same size. Named blocks are viewed as
/// column-major matrices; views must be re-fetched after add().
class ParamStore {
 public:
  struct Block {
    std::string name;
    std::size_t offset;
    std::size_t rows;
    std::size_t cols;
  };

  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

  /// Appends a zero block. Throws Error(kConfiguration) on duplicate names.
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  MatrixMap value(std::size_t block);
  ConstMatrixMap value(std::size_t block) const;
  MatrixMap grad(std::size_t block);

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& grads() { return grads_; }
  const Eigen::VectorXd& grads() const { return grads_; }

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::optional<std::size_t> find(std::string_view name) const;

  void zero_grad() { grads_.setZero(); }
  void init_uniform(std::size_t block, double bound, Rng& rng);
  bool all_finite() const { return values_.allFinite(); }

  /// Writes the block layout and values. read() requires an identical
  /// layout and throws Error(kParse) otherwise.
  void write(BinaryWriter& w) const;
  void read(BinaryReader& r);

 private:
  std::vector<Block> blocks_;
  Eigen::VectorXd values_;
  Eigen::VectorXd grads_;
};

/// y = W x + b with W stored out x in.
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in,
         std::size_t out);

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and bias.
  void init(ParamStore& store, Rng& rng) const;

  Eigen::VectorXd forward(const ParamStore& store,
                          const Eigen::VectorXd& x) const;
  /// Accumulates dW += dy x^T and db += dy; returns W^T dy.
  Eigen::VectorXd backward(ParamStore& store, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& dy) const;

 private:
  std::size_t w_ = 0;
  std::size_t b_ = 0;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
};

/// Elementwise logistic.
Eigen::VectorXd sigmoid(const Eigen::VectorXd& x);

}  // namespace kgi
