#include "latalign/toy/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "latalign/numeric.hpp"

namespace latalign::toy {

namespace {

// y = M x + y for row-major M (rows x cols)
void gemv_acc(const double* m, int rows, int cols, const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = m + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// x += M^T y
void gemv_t_acc(const double* m, int rows, int cols, const double* y, double* x) {
  for (int r = 0; r < rows; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    const double* row = m + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) x[c] += row[c] * yr;
  }
}

// M += a y x^T
void outer_acc(double* m, int rows, int cols, const double* y, const double* x, double a = 1.0) {
  for (int r = 0; r < rows; ++r) {
    const double yr = a * y[r];
    if (yr == 0.0) continue;
    double* row = m + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += yr * x[c];
  }
}

}  // namespace

ToyModel init_model(const ModelDims& dims, TokenId bos_id, TokenId blank_id, TokenId eos_id, Rng& rng) {
  ToyModel model;
  model.dims = dims;
  model.bos_id = bos_id;
  model.blank_id = blank_id;
  model.eos_id = eos_id;
  model.theta.assign(static_cast<std::size_t>(dims.param_count()), 0.0);

  const double emb_scale = 1.0 / std::sqrt(static_cast<double>(dims.embed));
  for (int k = 0; k < 2 * dims.vocab * dims.embed; ++k) model.theta[static_cast<std::size_t>(k)] = emb_scale * rng.normal();
  const double sum_scale = 1.0 / std::sqrt(static_cast<double>(dims.embed));
  for (int k = model.off_w_sum(); k < model.off_b_sum(); ++k) model.theta[static_cast<std::size_t>(k)] = sum_scale * rng.normal();
  const double h_scale = 1.0 / std::sqrt(static_cast<double>(2 * dims.embed));
  for (int k = model.off_w_h(); k < model.off_b_h(); ++k) model.theta[static_cast<std::size_t>(k)] = h_scale * rng.normal();
  const double o_scale = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  for (int k = model.off_w_o(); k < model.off_b_o(); ++k) model.theta[static_cast<std::size_t>(k)] = o_scale * rng.normal();
  return model;
}

ToyModel copy_solution_model(const Vocab& vocab, TokenId bos_id, TokenId dot_id) {
  const int V = vocab.size();
  ModelDims dims;
  dims.vocab = V;
  dims.embed = V;
  dims.hidden = V;

  ToyModel model;
  model.dims = dims;
  model.bos_id = bos_id;
  model.blank_id = vocab.blank_id;
  model.eos_id = vocab.eos_id;
  model.theta.assign(static_cast<std::size_t>(dims.param_count()), 0.0);

  const double a = 3.0;         // embedding scale; residual self-logit is a^2
  const double gate = 10.0;     // pre-tanh activation for the previous token
  const double g = 40.0;        // output logit for the copied token

  double* tgt = model.theta.data() + model.off_tgt_embed();
  for (int v = 0; v < V; ++v) tgt[static_cast<std::ptrdiff_t>(v) * V + v] = a;

  // hidden unit v fires exactly when the previous token is v
  double* wh = model.theta.data() + model.off_w_h();
  for (int v = 0; v < V; ++v) wh[static_cast<std::ptrdiff_t>(v) * 2 * V + V + v] = gate / a;

  double* wo = model.theta.data() + model.off_w_o();
  auto set = [&](TokenId out, TokenId in, double w) { wo[static_cast<std::ptrdiff_t>(out) * V + in] = w; };
  for (TokenId v = 0; v < V; ++v) {
    if (v == bos_id) {
      set(vocab.blank_id, v, g);  // first position emits the blank token
    } else if (v == dot_id) {
      // split the final prediction between "." and <eos>; cancel the
      // residual self-logit so both land at the same height
      set(dot_id, v, g - a * a);
      set(vocab.eos_id, v, g);
    } else if (v != vocab.eos_id) {
      set(v, v, g);  // plain copy
    }
  }
  return model;
}

std::vector<TokenId> teacher_inputs(const ToyModel& model, const TargetSeq& y) {
  std::vector<TokenId> in;
  in.push_back(model.bos_id);
  for (int i = 1; i < y.length(); ++i) in.push_back(y.at(i));
  return in;
}

std::vector<TokenId> doubled_inputs(const ToyModel& model, const TargetSeq& y) {
  std::vector<TokenId> in;
  in.push_back(model.bos_id);
  in.push_back(model.bos_id);
  for (int i = 1; i < y.length(); ++i) {
    in.push_back(y.at(i));
    in.push_back(y.at(i));
  }
  return in;
}

namespace {

void check_tokens(const ToyModel& model, const std::vector<TokenId>& toks) {
  for (TokenId t : toks) {
    if (t < 0 || t >= model.dims.vocab) throw std::invalid_argument("token out of vocabulary");
  }
}

std::vector<double> context_of(const ToyModel& model, const std::vector<TokenId>& source,
                               std::vector<double>* pool_out) {
  const int d = model.dims.embed;
  std::vector<double> pool(static_cast<std::size_t>(d), 0.0);
  for (TokenId s : source) {
    const auto e = model.src_embed(s);
    for (int k = 0; k < d; ++k) pool[static_cast<std::size_t>(k)] += e[static_cast<std::size_t>(k)];
  }
  for (auto& v : pool) v /= static_cast<double>(source.size());

  std::vector<double> ctx(model.theta.begin() + model.off_b_sum(),
                          model.theta.begin() + model.off_b_sum() + d);
  gemv_acc(model.theta.data() + model.off_w_sum(), d, d, pool.data(), ctx.data());
  if (pool_out) *pool_out = std::move(pool);
  return ctx;
}

// one decoder step: fills logprobs (size V); hidden_out may be null
void decoder_row(const ToyModel& model, const std::vector<double>& ctx, TokenId prev,
                 double* logprobs, double* hidden_out) {
  const int d = model.dims.embed;
  const int h = model.dims.hidden;
  const int V = model.dims.vocab;

  std::vector<double> hin(static_cast<std::size_t>(2 * d));
  std::copy(ctx.begin(), ctx.end(), hin.begin());
  const auto e = model.tgt_embed(prev);
  std::copy(e.begin(), e.end(), hin.begin() + d);

  std::vector<double> act(model.theta.begin() + model.off_b_h(),
                          model.theta.begin() + model.off_b_h() + h);
  gemv_acc(model.theta.data() + model.off_w_h(), h, 2 * d, hin.data(), act.data());
  for (auto& v : act) v = std::tanh(v);

  std::vector<double> logits(model.theta.begin() + model.off_b_o(),
                             model.theta.begin() + model.off_b_o() + V);
  gemv_acc(model.theta.data() + model.off_w_o(), V, h, act.data(), logits.data());
  // tied-embedding residual: similarity of each token to the input token
  gemv_acc(model.theta.data() + model.off_tgt_embed(), V, d, e.data(), logits.data());

  const double lse = log_sum_exp(logits);
  for (int v = 0; v < V; ++v) logprobs[v] = logits[static_cast<std::size_t>(v)] - lse;
  if (hidden_out) std::copy(act.begin(), act.end(), hidden_out);
}

}  // namespace

ForwardCache forward_cached(const ToyModel& model, const std::vector<TokenId>& source,
                            const std::vector<TokenId>& inputs) {
  if (source.empty() || inputs.empty()) throw std::invalid_argument("empty source or decoder input");
  check_tokens(model, source);
  check_tokens(model, inputs);

  ForwardCache cache;
  cache.source = source;
  cache.inputs = inputs;
  cache.ctx = context_of(model, source, &cache.ctx_pool);

  const int m = static_cast<int>(inputs.size());
  cache.hidden.assign(static_cast<std::size_t>(m) * model.dims.hidden, 0.0);
  cache.logprobs = LogProbMatrix::zeros(m, model.dims.vocab);
  for (int j = 1; j <= m; ++j) {
    decoder_row(model, cache.ctx, inputs[static_cast<std::size_t>(j - 1)],
                cache.logprobs.row(j),
                cache.hidden.data() + static_cast<std::size_t>(j - 1) * model.dims.hidden);
  }
  return cache;
}

LogProbMatrix forward_teacher_forced(const ToyModel& model, const std::vector<TokenId>& source,
                                     const TargetSeq& y) {
  return forward_cached(model, source, teacher_inputs(model, y)).logprobs;
}

LogProbMatrix forward_doubled(const ToyModel& model, const std::vector<TokenId>& source,
                              const TargetSeq& y) {
  return forward_cached(model, source, doubled_inputs(model, y)).logprobs;
}

std::vector<double> backward(const ToyModel& model, const ForwardCache& cache,
                             const std::vector<double>& dlogp) {
  const int d = model.dims.embed;
  const int h = model.dims.hidden;
  const int V = model.dims.vocab;
  const int m = static_cast<int>(cache.inputs.size());
  if (dlogp.size() != static_cast<std::size_t>(m) * V) {
    throw std::invalid_argument("loss gradient shape mismatch");
  }

  std::vector<double> grad(model.theta.size(), 0.0);
  double* g_src = grad.data() + model.off_src_embed();
  double* g_tgt = grad.data() + model.off_tgt_embed();
  double* g_wsum = grad.data() + model.off_w_sum();
  double* g_bsum = grad.data() + model.off_b_sum();
  double* g_wh = grad.data() + model.off_w_h();
  double* g_bh = grad.data() + model.off_b_h();
  double* g_wo = grad.data() + model.off_w_o();
  double* g_bo = grad.data() + model.off_b_o();

  std::vector<double> dctx(static_cast<std::size_t>(d), 0.0);
  std::vector<double> dlogits(static_cast<std::size_t>(V));
  std::vector<double> dh(static_cast<std::size_t>(h));
  std::vector<double> dhin(static_cast<std::size_t>(2 * d));
  std::vector<double> hin(static_cast<std::size_t>(2 * d));

  for (int j = 1; j <= m; ++j) {
    const double* drow = dlogp.data() + static_cast<std::size_t>(j - 1) * V;
    const double* lprow = cache.logprobs.row(j);
    double dsum = 0.0;
    for (int v = 0; v < V; ++v) dsum += drow[v];
    // log-softmax Jacobian: dlogits = dlogp - softmax * sum(dlogp)
    for (int v = 0; v < V; ++v) dlogits[static_cast<std::size_t>(v)] = drow[v] - std::exp(lprow[v]) * dsum;

    const TokenId prev = cache.inputs[static_cast<std::size_t>(j - 1)];
    const auto e = model.tgt_embed(prev);
    const double* act = cache.hidden.data() + static_cast<std::size_t>(j - 1) * h;

    for (int v = 0; v < V; ++v) g_bo[v] += dlogits[static_cast<std::size_t>(v)];
    outer_acc(g_wo, V, h, dlogits.data(), act);
    std::fill(dh.begin(), dh.end(), 0.0);
    gemv_t_acc(model.theta.data() + model.off_w_o(), V, h, dlogits.data(), dh.data());

    // residual term: logits += E_tgt e  (E_tgt as dictionary and as input)
    outer_acc(g_tgt, V, d, dlogits.data(), e.data());
    std::vector<double> de(static_cast<std::size_t>(d), 0.0);
    gemv_t_acc(model.theta.data() + model.off_tgt_embed(), V, d, dlogits.data(), de.data());

    // through the tanh hidden layer
    for (int k = 0; k < h; ++k) dh[static_cast<std::size_t>(k)] *= 1.0 - act[k] * act[k];
    for (int k = 0; k < h; ++k) g_bh[k] += dh[static_cast<std::size_t>(k)];
    std::copy(cache.ctx.begin(), cache.ctx.end(), hin.begin());
    std::copy(e.begin(), e.end(), hin.begin() + d);
    outer_acc(g_wh, h, 2 * d, dh.data(), hin.data());
    std::fill(dhin.begin(), dhin.end(), 0.0);
    gemv_t_acc(model.theta.data() + model.off_w_h(), h, 2 * d, dh.data(), dhin.data());

    for (int k = 0; k < d; ++k) dctx[static_cast<std::size_t>(k)] += dhin[static_cast<std::size_t>(k)];
    for (int k = 0; k < d; ++k) de[static_cast<std::size_t>(k)] += dhin[static_cast<std::size_t>(d + k)];
    double* g_e = g_tgt + static_cast<std::ptrdiff_t>(prev) * d;
    for (int k = 0; k < d; ++k) g_e[k] += de[static_cast<std::size_t>(k)];
  }

  // source summary projection and the pooled embedding
  for (int k = 0; k < d; ++k) g_bsum[k] += dctx[static_cast<std::size_t>(k)];
  outer_acc(g_wsum, d, d, dctx.data(), cache.ctx_pool.data());
  std::vector<double> dpool(static_cast<std::size_t>(d), 0.0);
  gemv_t_acc(model.theta.data() + model.off_w_sum(), d, d, dctx.data(), dpool.data());
  const double inv = 1.0 / static_cast<double>(cache.source.size());
  for (TokenId s : cache.source) {
    double* g_s = g_src + static_cast<std::ptrdiff_t>(s) * d;
    for (int k = 0; k < d; ++k) g_s[k] += inv * dpool[static_cast<std::size_t>(k)];
  }
  return grad;
}

std::vector<TokenId> decode(const ToyModel& model, const std::vector<TokenId>& source,
                            DecodeMode mode, int beam_width, int max_len) {
  check_tokens(model, source);
  const std::vector<double> ctx = context_of(model, source, nullptr);
  const int V = model.dims.vocab;
  std::vector<double> row(static_cast<std::size_t>(V));

  if (mode == DecodeMode::Greedy || beam_width <= 1) {
    std::vector<TokenId> out;
    TokenId prev = model.bos_id;
    for (int step = 0; step < max_len; ++step) {
      decoder_row(model, ctx, prev, row.data(), nullptr);
      TokenId best = 0;
      for (int v = 1; v < V; ++v) {
        if (row[static_cast<std::size_t>(v)] > row[static_cast<std::size_t>(best)]) best = v;
      }
      out.push_back(best);
      if (best == model.eos_id) break;
      prev = best;
    }
    return out;
  }

  struct Hyp {
    std::vector<TokenId> tokens;
    double score = 0.0;
    bool done = false;
  };
  std::vector<Hyp> beam{{{}, 0.0, false}};
  for (int step = 0; step < max_len; ++step) {
    std::vector<Hyp> cand;
    bool any_live = false;
    for (const Hyp& hyp : beam) {
      if (hyp.done) {
        cand.push_back(hyp);
        continue;
      }
      any_live = true;
      const TokenId prev = hyp.tokens.empty() ? model.bos_id : hyp.tokens.back();
      decoder_row(model, ctx, prev, row.data(), nullptr);
      for (TokenId v = 0; v < V; ++v) {
        Hyp next = hyp;
        next.tokens.push_back(v);
        next.score += row[static_cast<std::size_t>(v)];
        next.done = (v == model.eos_id);
        cand.push_back(std::move(next));
      }
    }
    if (!any_live) break;
    std::stable_sort(cand.begin(), cand.end(),
                     [](const Hyp& a, const Hyp& b) { return a.score > b.score; });
    if (static_cast<int>(cand.size()) > beam_width) cand.resize(static_cast<std::size_t>(beam_width));
    beam = std::move(cand);
  }
  const Hyp* best = nullptr;
  for (const Hyp& hyp : beam) {
    if (hyp.done && (!best || hyp.score > best->score)) best = &hyp;
  }
  if (!best) best = &beam.front();
  return best->tokens;
}

std::vector<TokenId> strip_blanks(const std::vector<TokenId>& tokens, TokenId blank_id) {
  std::vector<TokenId> out;
  for (TokenId t : tokens) {
    if (t != blank_id) out.push_back(t);
  }
  return out;
}

std::string model_to_json(const ToyModel& model) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["vocab"] = model.dims.vocab;
  j["embed"] = model.dims.embed;
  j["hidden"] = model.dims.hidden;
  j["bos_id"] = model.bos_id;
  j["blank_id"] = model.blank_id;
  j["eos_id"] = model.eos_id;
  j["theta"] = model.theta;
  return j.dump();
}

ToyModel model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw std::runtime_error("unsupported model format version");
  }
  ToyModel model;
  model.dims.vocab = j.at("vocab").get<int>();
  model.dims.embed = j.at("embed").get<int>();
  model.dims.hidden = j.at("hidden").get<int>();
  model.bos_id = j.at("bos_id").get<TokenId>();
  model.blank_id = j.at("blank_id").get<TokenId>();
  model.eos_id = j.at("eos_id").get<TokenId>();
  model.theta = j.at("theta").get<std::vector<double>>();
  if (model.theta.size() != static_cast<std::size_t>(model.dims.param_count())) {
    throw std::runtime_error("model parameter count does not match dims");
  }
  return model;
}

void save_model_file(const ToyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(model) << "\n";
}

ToyModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace latalign::toy
