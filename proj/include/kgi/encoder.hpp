#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kgi/embeddings.hpp"
#include "kgi/intent.hpp"
#include "kgi/params.hpp"

namespace kgi {

struct TaggedToken {
  std::string word;
  PosTag tag;
};

std::vector<TaggedToken> tag_tokens(const std::vector<std::string>& words,
                                    const PosTagger& tagger);

/// emb(w) = [word vector ; POS embedding]. Word vectors are frozen; the POS
/// table is trainable.
class TokenEmbedder {
 public:
  TokenEmbedder() = default;
  TokenEmbedder(ParamStore& store, const std::string& name,
                std::shared_ptr<const WordVectors> words, std::size_t pos_dim);

  void init(ParamStore& store, Rng& rng) const;

  std::size_t word_dim() const { return words_->dim(); }
  std::size_t pos_dim() const { return pos_dim_; }
  std::size_t dim() const { return word_dim() + pos_dim_; }
  const WordVectors& words() const { return *words_; }

  /// Throws Error(kTagVocabulary) for a tag outside the tag set.
  Eigen::VectorXd embed(const ParamStore& store,
                        const TaggedToken& token) const;
  /// Adds the POS part of d_emb to the tag's row gradient.
  void backward(ParamStore& store, const TaggedToken& token,
                const Eigen::VectorXd& d_emb) const;

 private:
  std::shared_ptr<const WordVectors> words_;
  std::size_t pos_dim_ = 0;
  std::size_t table_ = 0;
};

/// Stacked bidirectional LSTM. Layer l > 0 reads [fw_t ; bw_t] of layer
/// l - 1. The encoding is [fw state after the last token ; bw state after
/// the first token] of the top layer, length 2 * hidden.
///
/// Gate layout in every 4H block: input, forget, output, candidate.
class BiLstm {
 public:
  struct Step {
    Eigen::VectorXd i, f, o, g, c, h;
  };
  struct Cache {
    /// inputs[layer][t]
    std::vector<std::vector<Eigen::VectorXd>> inputs;
    /// steps[layer][direction][t], direction 0 = forward, 1 = backward
    std::vector<std::array<std::vector<Step>, 2>> steps;
  };

  BiLstm() = default;
  BiLstm(ParamStore& store, const std::string& name, std::size_t input_dim,
         std::size_t hidden, std::size_t layers);

  /// Weights uniform(-0.08, 0.08), biases zero except the forget gate at 1.
  void init(ParamStore& store, Rng& rng) const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t layers() const { return layers_; }
  std::size_t output_dim() const { return 2 * hidden_; }

  /// Block ids of (layer, direction): input weights, recurrent weights, bias.
  std::size_t input_weights(std::size_t layer, std::size_t dir) const {
    return blocks_[3 * (2 * layer + dir)];
  }
  std::size_t recurrent_weights(std::size_t layer, std::size_t dir) const {
    return blocks_[3 * (2 * layer + dir) + 1];
  }
  std::size_t bias(std::size_t layer, std::size_t dir) const {
    return blocks_[3 * (2 * layer + dir) + 2];
  }

  Eigen::VectorXd forward(const ParamStore& store,
                          const std::vector<Eigen::VectorXd>& inputs,
                          Cache* cache) const;
  /// Returns d(loss)/d(inputs[t]) and accumulates parameter gradients.
  std::vector<Eigen::VectorXd> backward(ParamStore& store, const Cache& cache,
                                        const Eigen::VectorXd& d_out) const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  std::size_t layers_ = 0;
  std::vector<std::size_t> blocks_;
};

struct EncoderConfig {
  std::size_t pos_dim = 16;
  /// Per direction; the encoding has 2 * hidden entries.
  std::size_t hidden = 32;
  std::size_t layers = 2;
};

/// Token embedder followed by a BiLstm.
class SequenceEncoder {
 public:
  struct Cache {
    std::vector<TaggedToken> tokens;
    BiLstm::Cache lstm;
  };

  SequenceEncoder() = default;
  SequenceEncoder(ParamStore& store, const std::string& name,
                  std::shared_ptr<const WordVectors> words,
                  const EncoderConfig& cfg);

  void init(ParamStore& store, Rng& rng) const;
  std::size_t output_dim() const { return lstm_.output_dim(); }
  const TokenEmbedder& embedder() const { return embedder_; }
  const BiLstm& lstm() const { return lstm_; }

  /// Throws Error(kEmptyUtterance) for an empty sequence.
  Eigen::VectorXd encode(const ParamStore& store,
                         const std::vector<TaggedToken>& tokens,
                         Cache* cache = nullptr) const;
  void backward(ParamStore& store, const Cache& cache,
                const Eigen::VectorXd& d_out) const;

 private:
  TokenEmbedder embedder_;
  BiLstm lstm_;
};

/// Label tokens of the intent ("FindHotel" -> find, hotel) with POS tags.
std::vector<TaggedToken> intent_tokens(const Intent& intent,
                                       const PosTagger& tagger);

/// Tokenized, tagged utterance. Throws Error(kEmptyUtterance) when the text
/// has no tokens.
std::vector<TaggedToken> utterance_tokens(std::string_view utterance,
                                          const PosTagger& tagger);

}  // namespace kgi
