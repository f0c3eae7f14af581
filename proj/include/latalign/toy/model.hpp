#ifndef LATALIGN_TOY_MODEL_HPP
#define LATALIGN_TOY_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latalign/rng.hpp"
#include "latalign/types.hpp"

namespace latalign::toy {

// Minimal teacher-forced decoder:
//
//   ctx    = W_sum * mean_k E_src[x_k] + b_sum
//   h_j    = tanh(W_h * [ctx; E_tgt[prev_j]] + b_h)
//   logits = W_o * h_j + b_o + E_tgt * E_tgt[prev_j]
//   row_j  = log_softmax(logits)
//
// prev_j is <bos> for j = 1 and the gold y_{j-1} afterwards, so row j reads
// exactly the source and y_{j-1}. The last term ties the input embedding to
// the output logits the way shared decoder embeddings do in full-scale
// translation models; it is what lets a gradient along a shifted alignment
// find the copy solution at all.
struct ModelDims {
  int vocab = 0;
  int embed = 16;
  int hidden = 64;

  int param_count() const {
    return 2 * vocab * embed + embed * embed + embed + hidden * 2 * embed + hidden +
           vocab * hidden + vocab;
  }
};

struct ToyModel {
  ModelDims dims;
  TokenId bos_id = -1;
  TokenId blank_id = -1;
  TokenId eos_id = -1;
  std::vector<double> theta;  // all parameters, flat

  // block offsets into theta
  int off_src_embed() const { return 0; }
  int off_tgt_embed() const { return dims.vocab * dims.embed; }
  int off_w_sum() const { return off_tgt_embed() + dims.vocab * dims.embed; }
  int off_b_sum() const { return off_w_sum() + dims.embed * dims.embed; }
  int off_w_h() const { return off_b_sum() + dims.embed; }
  int off_b_h() const { return off_w_h() + dims.hidden * 2 * dims.embed; }
  int off_w_o() const { return off_b_h() + dims.hidden; }
  int off_b_o() const { return off_w_o() + dims.vocab * dims.hidden; }

  std::span<const double> src_embed(TokenId v) const {
    return {theta.data() + off_src_embed() + v * dims.embed, static_cast<std::size_t>(dims.embed)};
  }
  std::span<const double> tgt_embed(TokenId v) const {
    return {theta.data() + off_tgt_embed() + v * dims.embed, static_cast<std::size_t>(dims.embed)};
  }
};

ToyModel init_model(const ModelDims& dims, TokenId bos_id, TokenId blank_id, TokenId eos_id, Rng& rng);

// Hand-set parameters realizing the copy shortcut: <bos> maps to the blank
// token, the sentence-final token splits evenly between itself and <eos>,
// and every other token reproduces itself.
ToyModel copy_solution_model(const Vocab& vocab, TokenId bos_id, TokenId dot_id);

// Everything backward() needs from a forward pass.
struct ForwardCache {
  std::vector<TokenId> source;
  std::vector<TokenId> inputs;    // decoder input per position
  std::vector<double> ctx_pool;   // mean source embedding
  std::vector<double> ctx;
  std::vector<double> hidden;     // m x hidden
  LogProbMatrix logprobs;         // m x vocab
};

// decoder inputs under teacher forcing: [<bos>, y_1, .., y_{n-1}]
std::vector<TokenId> teacher_inputs(const ToyModel& model, const TargetSeq& y);
// doubled scheme: every input fed twice, m = 2n
std::vector<TokenId> doubled_inputs(const ToyModel& model, const TargetSeq& y);

ForwardCache forward_cached(const ToyModel& model, const std::vector<TokenId>& source,
                            const std::vector<TokenId>& inputs);

LogProbMatrix forward_teacher_forced(const ToyModel& model, const std::vector<TokenId>& source,
                                     const TargetSeq& y);
LogProbMatrix forward_doubled(const ToyModel& model, const std::vector<TokenId>& source,
                              const TargetSeq& y);

// Chain rule from d loss / d logprob rows back to all parameters (flat,
// same layout as theta). Applies the log-softmax Jacobian internally.
std::vector<double> backward(const ToyModel& model, const ForwardCache& cache,
                             const std::vector<double>& dlogp);

enum class DecodeMode { Greedy, Beam };

// Autoregressive decoding feeding back the model's own argmax (or beam)
// token; stops at <eos> or max_len. Returned sequence includes the final
// <eos> when one was emitted.
std::vector<TokenId> decode(const ToyModel& model, const std::vector<TokenId>& source,
                            DecodeMode mode, int beam_width, int max_len);

std::vector<TokenId> strip_blanks(const std::vector<TokenId>& tokens, TokenId blank_id);

std::string model_to_json(const ToyModel& model);
ToyModel model_from_json(const std::string& text);
void save_model_file(const ToyModel& model, const std::string& path);
ToyModel load_model_file(const std::string& path);

}  // namespace latalign::toy

#endif
