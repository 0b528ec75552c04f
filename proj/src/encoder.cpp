#include "kgi/encoder.hpp"

#include <cmath>

#include "kgi/error.hpp"
#include "kgi/text.hpp"

namespace kgi {
namespace {

Eigen::VectorXd logistic(const Eigen::VectorXd& x) { return sigmoid(x); }

}  // namespace

std::vector<TaggedToken> tag_tokens(const std::vector<std::string>& words,
                                    const PosTagger& tagger) {
  std::vector<TaggedToken> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back({w, tagger.tag(w)});
  return out;
}

std::vector<TaggedToken> intent_tokens(const Intent& intent,
                                       const PosTagger& tagger) {
  std::vector<std::string> words;
  for (const auto& seg : intent.label_tokens()) words.push_back(to_lower(seg));
  return tag_tokens(words, tagger);
}

std::vector<TaggedToken> utterance_tokens(std::string_view utterance,
                                          const PosTagger& tagger) {
  auto words = tokenize(utterance);
  if (words.empty()) {
    throw Error(ErrorCode::kEmptyUtterance,
                "utterance '" + std::string(utterance) + "' has no tokens");
  }
  return tag_tokens(words, tagger);
}

TokenEmbedder::TokenEmbedder(ParamStore& store, const std::string& name,
                             std::shared_ptr<const WordVectors> words,
                             std::size_t pos_dim)
    : words_(std::move(words)),
      pos_dim_(pos_dim),
      table_(store.add(name + ".pos", pos_dim, kPosTagCount)) {}

void TokenEmbedder::init(ParamStore& store, Rng& rng) const {
  store.init_uniform(table_, 0.08, rng);
}

Eigen::VectorXd TokenEmbedder::embed(const ParamStore& store,
                                     const TaggedToken& token) const {
  const auto tag = static_cast<std::size_t>(token.tag);
  if (tag >= kPosTagCount) {
    throw Error(ErrorCode::kTagVocabulary,
                "POS tag id " + std::to_string(tag) + " is out of range");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim()));
  out.head(static_cast<Eigen::Index>(word_dim())) = words_->lookup(token.word);
  out.tail(static_cast<Eigen::Index>(pos_dim_)) =
      store.value(table_).col(static_cast<Eigen::Index>(tag));
  return out;
}

void TokenEmbedder::backward(ParamStore& store, const TaggedToken& token,
                             const Eigen::VectorXd& d_emb) const {
  store.grad(table_).col(static_cast<Eigen::Index>(token.tag)) +=
      d_emb.tail(static_cast<Eigen::Index>(pos_dim_));
}

BiLstm::BiLstm(ParamStore& store, const std::string& name,
               std::size_t input_dim, std::size_t hidden, std::size_t layers)
    : input_dim_(input_dim), hidden_(hidden), layers_(layers) {
  if (hidden == 0 || layers == 0 || input_dim == 0) {
    throw Error(ErrorCode::kConfiguration,
                "LSTM dimensions and layer count must be positive");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? input_dim : 2 * hidden;
    for (const char* dir : {"fw", "bw"}) {
      const auto prefix = name + ".l" + std::to_string(l) + "." + dir;
      blocks_.push_back(store.add(prefix + ".w_in", 4 * hidden, in));
      blocks_.push_back(store.add(prefix + ".w_rec", 4 * hidden, hidden));
      blocks_.push_back(store.add(prefix + ".bias", 4 * hidden, 1));
    }
  }
}

void BiLstm::init(ParamStore& store, Rng& rng) const {
  const auto h = static_cast<Eigen::Index>(hidden_);
  for (std::size_t l = 0; l < layers_; ++l) {
    for (std::size_t d = 0; d < 2; ++d) {
      store.init_uniform(input_weights(l, d), 0.08, rng);
      store.init_uniform(recurrent_weights(l, d), 0.08, rng);
      auto b = store.value(bias(l, d));
      b.setZero();
      b.col(0).segment(h, h).setOnes();
    }
  }
}

Eigen::VectorXd BiLstm::forward(const ParamStore& store,
                                const std::vector<Eigen::VectorXd>& inputs,
                                Cache* cache) const {
  const std::size_t T = inputs.size();
  const auto H = static_cast<Eigen::Index>(hidden_);
  if (T == 0) throw Error(ErrorCode::kEmptyUtterance, "empty sequence");
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.inputs.assign(layers_, {});
  c.steps.assign(layers_, {});
  c.inputs[0] = inputs;
  for (std::size_t l = 0; l < layers_; ++l) {
    for (std::size_t d = 0; d < 2; ++d) {
      const auto W = store.value(input_weights(l, d));
      const auto U = store.value(recurrent_weights(l, d));
      const auto b = store.value(bias(l, d)).col(0);
      auto& steps = c.steps[l][d];
      steps.assign(T, {});
      Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
      Eigen::VectorXd cell = Eigen::VectorXd::Zero(H);
      for (std::size_t k = 0; k < T; ++k) {
        const std::size_t t = d == 0 ? k : T - 1 - k;
        const Eigen::VectorXd z = W * c.inputs[l][t] + U * h + b;
        Step& s = steps[t];
        s.i = logistic(z.segment(0, H));
        s.f = logistic(z.segment(H, H));
        s.o = logistic(z.segment(2 * H, H));
        s.g = z.segment(3 * H, H).array().tanh();
        cell = s.f.cwiseProduct(cell) + s.i.cwiseProduct(s.g);
        s.c = cell;
        h = s.o.array() * cell.array().tanh();
        s.h = h;
      }
    }
    if (l + 1 < layers_) {
      auto& next = c.inputs[l + 1];
      next.resize(T);
      for (std::size_t t = 0; t < T; ++t) {
        next[t].resize(2 * H);
        next[t] << c.steps[l][0][t].h, c.steps[l][1][t].h;
      }
    }
  }
  const auto& top = c.steps[layers_ - 1];
  Eigen::VectorXd out(2 * H);
  out << top[0][T - 1].h, top[1][0].h;
  return out;
}

std::vector<Eigen::VectorXd> BiLstm::backward(
    ParamStore& store, const Cache& cache, const Eigen::VectorXd& d_out) const {
  const std::size_t T = cache.inputs[0].size();
  const auto H = static_cast<Eigen::Index>(hidden_);
  // d_h[t] for the current layer, stacked [fw ; bw].
  std::vector<Eigen::VectorXd> d_layer_out(T, Eigen::VectorXd::Zero(2 * H));
  d_layer_out[T - 1].head(H) += d_out.head(H);
  d_layer_out[0].tail(H) += d_out.tail(H);

  std::vector<Eigen::VectorXd> d_inputs;
  for (std::size_t l = layers_; l-- > 0;) {
    const auto& xs = cache.inputs[l];
    d_inputs.assign(T, Eigen::VectorXd::Zero(xs[0].size()));
    for (std::size_t d = 0; d < 2; ++d) {
      const auto W = store.value(input_weights(l, d));
      const auto U = store.value(recurrent_weights(l, d));
      auto dW = store.grad(input_weights(l, d));
      auto dU = store.grad(recurrent_weights(l, d));
      auto db = store.grad(bias(l, d)).col(0);
      const auto& steps = cache.steps[l][d];
      Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
      Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
      // Walk the direction's time order in reverse.
      for (std::size_t k = T; k-- > 0;) {
        const std::size_t t = d == 0 ? k : T - 1 - k;
        const bool first = k == 0;
        const std::size_t prev_t = d == 0 ? t - 1 : t + 1;
        const Step& s = steps[t];
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(H);
        const Eigen::VectorXd& h_prev = first ? zero : steps[prev_t].h;
        const Eigen::VectorXd& c_prev = first ? zero : steps[prev_t].c;

        const Eigen::VectorXd dh =
            dh_next + d_layer_out[t].segment(d == 0 ? 0 : H, H);
        const Eigen::ArrayXd tanh_c = s.c.array().tanh();
        const Eigen::ArrayXd dc =
            dc_next.array() + dh.array() * s.o.array() * (1.0 - tanh_c.square());
        Eigen::VectorXd dz(4 * H);
        dz.segment(0, H) =
            dc * s.g.array() * s.i.array() * (1.0 - s.i.array());
        dz.segment(H, H) =
            dc * c_prev.array() * s.f.array() * (1.0 - s.f.array());
        dz.segment(2 * H, H) =
            dh.array() * tanh_c * s.o.array() * (1.0 - s.o.array());
        dz.segment(3 * H, H) = dc * s.i.array() * (1.0 - s.g.array().square());

        dW.noalias() += dz * xs[t].transpose();
        dU.noalias() += dz * h_prev.transpose();
        db += dz;
        d_inputs[t].noalias() += W.transpose() * dz;
        dh_next.noalias() = U.transpose() * dz;
        dc_next = dc * s.f.array();
      }
    }
    if (l > 0) d_layer_out = d_inputs;
  }
  return d_inputs;
}

SequenceEncoder::SequenceEncoder(ParamStore& store, const std::string& name,
                                 std::shared_ptr<const WordVectors> words,
                                 const EncoderConfig& cfg)
    : embedder_(store, name, std::move(words), cfg.pos_dim),
      lstm_(store, name + ".lstm", embedder_.dim(), cfg.hidden, cfg.layers) {}

void SequenceEncoder::init(ParamStore& store, Rng& rng) const {
  embedder_.init(store, rng);
  lstm_.init(store, rng);
}

Eigen::VectorXd SequenceEncoder::encode(const ParamStore& store,
                                        const std::vector<TaggedToken>& tokens,
                                        Cache* cache) const {
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyUtterance, "cannot encode an empty sequence");
  }
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(tokens.size());
  for (const auto& tok : tokens) inputs.push_back(embedder_.embed(store, tok));
  if (cache != nullptr) {
    cache->tokens = tokens;
    return lstm_.forward(store, inputs, &cache->lstm);
  }
  return lstm_.forward(store, inputs, nullptr);
}

void SequenceEncoder::backward(ParamStore& store, const Cache& cache,
                               const Eigen::VectorXd& d_out) const {
  const auto d_inputs = lstm_.backward(store, cache.lstm, d_out);
  for (std::size_t t = 0; t < cache.tokens.size(); ++t) {
    embedder_.backward(store, cache.tokens[t], d_inputs[t]);
  }
}

}  // namespace kgi
