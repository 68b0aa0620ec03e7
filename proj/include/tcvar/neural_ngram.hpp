#ifndef TCVAR_NEURAL_NGRAM_HPP
#define TCVAR_NEURAL_NGRAM_HPP

#include "tcvar/language_model.hpp"

#include <cmath>
#include <random>

namespace tcvar {

struct NeuralNGramConfig {
  int vocab_size = 0;
  int context = 4;
  int embedding = 32;
  int hidden = 64;
  std::uint64_t seed = 0;
  double init_scale = 0.05;
};

/// Feed-forward n-gram model:
///   h = tanh(W1 [e(x_{t-n}) ... e(x_{t-1})] + b1),  p(. | ctx) = softmax(W2 h + b2).
/// Contexts reaching before the sentence start use an extra BOS embedding row.
/// All weights live in one flat vector; the accessors below are views into it.
template <typename Scalar_ = double>
class NeuralNGram {
public:
  using Scalar = Scalar_;
  using Mat = Matrix<Scalar>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;
  using VecMap = Eigen::Map<Vector<Scalar>>;
  using ConstVecMap = Eigen::Map<const Vector<Scalar>>;

  struct Cache {
    std::vector<double> sentence_nll;
    std::vector<std::size_t> row_sentence;  // owning sentence of each position
    std::vector<TokenId> targets;
    std::vector<TokenId> context_ids;       // rows x context, row-major
    Mat inputs;                             // rows x (context * embedding)
    Mat hidden;                             // rows x hidden, post-tanh
    Mat probs;                              // rows x V
  };

  explicit NeuralNGram(const NeuralNGramConfig& config) : cfg_(config) {
    if (cfg_.vocab_size < 2 || cfg_.context < 1 || cfg_.embedding < 1 || cfg_.hidden < 1) {
      throw Error("invalid neural n-gram dimensions");
    }
    const Eigen::Index v = cfg_.vocab_size;
    const Eigen::Index d = cfg_.embedding;
    const Eigen::Index h = cfg_.hidden;
    const Eigen::Index in = d * cfg_.context;
    off_w1_ = (v + 1) * d;
    off_b1_ = off_w1_ + h * in;
    off_w2_ = off_b1_ + h;
    off_b2_ = off_w2_ + v * h;
    theta_.resize(off_b2_ + v);
    std::mt19937_64 rng(cfg_.seed);
    for (Eigen::Index i = 0; i < theta_.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      theta_(i) = static_cast<Scalar>((2.0 * u - 1.0) * cfg_.init_scale);
    }
  }

  const NeuralNGramConfig& config() const { return cfg_; }
  int vocab_size() const { return cfg_.vocab_size; }
  TokenId bos() const { return cfg_.vocab_size; }
  Eigen::Index input_width() const { return static_cast<Eigen::Index>(cfg_.context) * cfg_.embedding; }

  ConstMatMap embeddings() const { return {theta_.data(), cfg_.vocab_size + 1, cfg_.embedding}; }
  ConstMatMap w1() const { return {theta_.data() + off_w1_, cfg_.hidden, input_width()}; }
  ConstVecMap b1() const { return {theta_.data() + off_b1_, cfg_.hidden}; }
  ConstMatMap w2() const { return {theta_.data() + off_w2_, cfg_.vocab_size, cfg_.hidden}; }
  ConstVecMap b2() const { return {theta_.data() + off_b2_, cfg_.vocab_size}; }
  MatMap w2() { return {theta_.data() + off_w2_, cfg_.vocab_size, cfg_.hidden}; }
  VecMap b2() { return {theta_.data() + off_b2_, cfg_.vocab_size}; }

  Cache forward(std::span<const EncodedSentence> batch) const {
    Cache c;
    const int n = cfg_.context;
    std::size_t rows = 0;
    for (const auto& x : batch) {
      rows += x.ids.size();
    }
    c.row_sentence.reserve(rows);
    c.targets.reserve(rows);
    c.context_ids.reserve(rows * static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const auto& ids = batch[s].ids;
      for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < 0 || ids[t] >= cfg_.vocab_size) {
          throw Error("token id " + std::to_string(ids[t]) + " outside model vocabulary");
        }
        for (int j = n; j >= 1; --j) {
          const auto back = static_cast<std::ptrdiff_t>(t) - j;
          c.context_ids.push_back(back < 0 ? bos() : ids[static_cast<std::size_t>(back)]);
        }
        c.targets.push_back(ids[t]);
        c.row_sentence.push_back(s);
      }
    }
    const auto R = static_cast<Eigen::Index>(rows);
    const auto d = cfg_.embedding;
    const auto E = embeddings();
    c.inputs.resize(R, input_width());
    for (Eigen::Index r = 0; r < R; ++r) {
      for (int j = 0; j < n; ++j) {
        c.inputs.row(r).segment(static_cast<Eigen::Index>(j) * d, d) =
            E.row(c.context_ids[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]);
      }
    }
    c.hidden.noalias() = c.inputs * w1().transpose();
    c.hidden.rowwise() += b1().transpose();
    c.hidden = c.hidden.array().tanh().matrix();
    c.probs.noalias() = c.hidden * w2().transpose();
    c.probs.rowwise() += b2().transpose();

    c.sentence_nll.assign(batch.size(), 0.0);
    for (Eigen::Index r = 0; r < R; ++r) {
      auto row = c.probs.row(r);
      const Scalar m = row.maxCoeff();
      row.array() -= m;
      const Scalar target_logit = row(c.targets[static_cast<std::size_t>(r)]);
      row = row.array().exp().matrix();
      const Scalar z = row.sum();
      row /= z;
      c.sentence_nll[c.row_sentence[static_cast<std::size_t>(r)]] +=
          std::log(static_cast<double>(z)) - static_cast<double>(target_logit);
    }
    return c;
  }

  double nll(const EncodedSentence& x) const { return forward(std::span<const EncodedSentence>(&x, 1)).sentence_nll[0]; }

  void accumulate_gradient(const Cache& c, std::span<const double> scales, Vector<Scalar>& grad) const {
    const auto R = c.probs.rows();
    // d nll / d logits = (softmax - onehot), scaled per owning sentence
    Mat g = c.probs;
    for (Eigen::Index r = 0; r < R; ++r) {
      const auto s = static_cast<Scalar>(scales[c.row_sentence[static_cast<std::size_t>(r)]]);
      g(r, c.targets[static_cast<std::size_t>(r)]) -= Scalar(1);
      g.row(r) *= s;
    }
    const Eigen::Index v = cfg_.vocab_size;
    const Eigen::Index h = cfg_.hidden;
    MatMap gE(grad.data(), v + 1, cfg_.embedding);
    MatMap gW1(grad.data() + off_w1_, h, input_width());
    VecMap gb1(grad.data() + off_b1_, h);
    MatMap gW2(grad.data() + off_w2_, v, h);
    VecMap gb2(grad.data() + off_b2_, v);

    gW2.noalias() += g.transpose() * c.hidden;
    gb2 += g.colwise().sum().transpose();
    Mat dpre = g * w2();
    dpre.array() *= (Scalar(1) - c.hidden.array().square());
    gW1.noalias() += dpre.transpose() * c.inputs;
    gb1 += dpre.colwise().sum().transpose();
    const Mat dinputs = dpre * w1();
    const int n = cfg_.context;
    const auto d = cfg_.embedding;
    for (Eigen::Index r = 0; r < R; ++r) {
      for (int j = 0; j < n; ++j) {
        const TokenId id = c.context_ids[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
        gE.row(id) += dinputs.row(r).segment(static_cast<Eigen::Index>(j) * d, d);
      }
    }
  }

  const Vector<Scalar>& params() const { return theta_; }
  Vector<Scalar>& params() { return theta_; }

  static constexpr std::string_view kind() { return "neural-ngram"; }

private:
  NeuralNGramConfig cfg_;
  Eigen::Index off_w1_ = 0;
  Eigen::Index off_b1_ = 0;
  Eigen::Index off_w2_ = 0;
  Eigen::Index off_b2_ = 0;
  Vector<Scalar> theta_;
};

} // namespace tcvar

#endif
