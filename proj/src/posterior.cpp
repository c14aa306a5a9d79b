#include "bvsglm/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace bvsglm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& X, const ModelIndicator& gamma) {
  Eigen::MatrixXd Xg(X.rows(), gamma.size());
  for (int i = 0; i < gamma.size(); ++i) Xg.col(i) = X.col(gamma.included[i]);
  return Xg;
}

double log_likelihood(const Dataset& data, const ModelIndicator& gamma,
                      const Eigen::VectorXd& beta, std::optional<double> phi) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(data.n());
  for (int i = 0; i < gamma.size(); ++i) h += beta(i) * data.X.col(gamma.included[i]);
  double ll = 0.0;
  for (int i = 0; i < data.n(); ++i) ll += log_density(data.family, data.y(i), h(i), phi);
  return ll;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  double s = 0.0;
  for (int i = 0; i < llt.matrixLLT().rows(); ++i) s += 2.0 * std::log(llt.matrixL()(i, i));
  return s;
}

struct NormalSuffStats {
  Eigen::MatrixXd A;      // X'X + V^{-1} (unknown var) or phi X'X + V^{-1} (known var)
  Eigen::VectorXd b;      // X'y (unknown) or phi X'y (known)
  double log_det_V = 0.0;
  double yty = 0.0;
};

NormalSuffStats normal_stats(const Dataset& data, const PriorSpec& spec,
                             const ModelIndicator& gamma, double like_scale) {
  // like_scale = phi for known-variance, 1 for unknown-variance (phi factored out)
  NormalSuffStats s;
  int p = gamma.size();
  s.yty = data.y.squaredNorm();
  if (p == 0) {
    s.A.resize(0, 0);
    s.b.resize(0);
    return s;
  }
  Eigen::MatrixXd Xg = gather_columns(data.X, gamma);
  Eigen::MatrixXd V = slab_covariance(spec.v_policy, p);
  Eigen::LLT<Eigen::MatrixXd> lltV(V);
  if (lltV.info() != Eigen::Success) throw std::runtime_error("slab covariance not SPD");
  s.log_det_V = log_det_from_llt(lltV);
  Eigen::MatrixXd Vinv = lltV.solve(Eigen::MatrixXd::Identity(p, p));
  s.A = like_scale * (Xg.transpose() * Xg) + Vinv;
  s.b = like_scale * (Xg.transpose() * data.y);
  return s;
}

}  // namespace

void Dataset::validate() const {
  if (n() < 0 || y.size() != n()) throw std::invalid_argument("X/y size mismatch");
  if (X.size() > 0 && X.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
    throw std::invalid_argument("design entries must satisfy |x| <= 1");
}

void McmcConfig::validate() const {
  if (iterations <= 0 || burn_in < 0 || burn_in >= iterations || thin < 1)
    throw std::invalid_argument("mcmc config: need 0 <= burn_in < iterations, thin >= 1");
  double s = p_add + p_delete + p_swap;
  if (p_add < 0 || p_delete < 0 || p_swap < 0 || std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument("move probabilities must be nonnegative and sum to 1");
  if (!(rw_step > 0)) throw std::invalid_argument("rw_step must be positive");
}

std::optional<double> log_unnormalized_posterior(const Dataset& data, const PriorSpec& spec,
                                                 const ModelIndicator& gamma,
                                                 const Eigen::VectorXd& beta,
                                                 std::optional<double> phi) {
  auto lpm = log_prior_model(spec, gamma);
  if (!lpm) return std::nullopt;
  double out = *lpm + log_prior_coeffs(spec, gamma, beta, phi);
  out += log_likelihood(data, gamma, beta, phi);
  return out;
}

double conjugate_log_marginal(const Dataset& data, const PriorSpec& spec,
                              const ModelIndicator& gamma) {
  const GlmFamily& fam = data.family;
  if (!fam.is_normal())
    throw std::invalid_argument("conjugate marginal requires a normal family, got " +
                                family_name(fam.kind));
  int n = data.n(), p = gamma.size();
  if (fam.kind == FamilyKind::NormalKnownVar) {
    double phi = fam.dispersion;
    NormalSuffStats s = normal_stats(data, spec, gamma, phi);
    double quad = 0.0, log_det_A = 0.0;
    if (p > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(s.A);
      log_det_A = log_det_from_llt(llt);
      quad = s.b.dot(llt.solve(s.b));
    }
    return 0.5 * n * (std::log(phi) - kLog2Pi) - 0.5 * s.log_det_V - 0.5 * log_det_A -
           0.5 * phi * s.yty + 0.5 * quad;
  }
  if (!spec.dispersion)
    throw std::invalid_argument("NormalUnknownVar marginal requires a dispersion prior");
  double kappa = spec.dispersion->kappa, rate = spec.dispersion->rate;
  NormalSuffStats s = normal_stats(data, spec, gamma, 1.0);
  double S = s.yty, log_det_A = 0.0;
  if (p > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(s.A);
    log_det_A = log_det_from_llt(llt);
    S -= s.b.dot(llt.solve(s.b));
  }
  S = std::max(S, 0.0);
  return -0.5 * n * kLog2Pi - 0.5 * s.log_det_V - 0.5 * log_det_A + kappa * std::log(rate) -
         std::lgamma(kappa) + std::lgamma(kappa + 0.5 * n) -
         (kappa + 0.5 * n) * std::log(rate + 0.5 * S);
}

std::pair<Eigen::VectorXd, std::optional<double>> sample_conditional_coeffs(
    const Dataset& data, const PriorSpec& spec, const ModelIndicator& gamma, Rng& rng) {
  const GlmFamily& fam = data.family;
  int n = data.n(), p = gamma.size();
  std::normal_distribution<double> z(0.0, 1.0);
  if (fam.kind == FamilyKind::NormalKnownVar) {
    double phi = fam.dispersion;
    NormalSuffStats s = normal_stats(data, spec, gamma, phi);
    Eigen::VectorXd beta(p);
    if (p > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(s.A);
      Eigen::VectorXd m = llt.solve(s.b);
      Eigen::VectorXd zz(p);
      for (int i = 0; i < p; ++i) zz(i) = z(rng);
      // A = L L'; draw = m + L^{-T} z
      beta = m + llt.matrixU().solve(zz);
    }
    return {beta, std::nullopt};
  }
  if (fam.kind != FamilyKind::NormalUnknownVar || !spec.dispersion)
    throw std::invalid_argument("conditional coefficient draw requires a normal family");
  double kappa = spec.dispersion->kappa, rate = spec.dispersion->rate;
  NormalSuffStats s = normal_stats(data, spec, gamma, 1.0);
  double S = s.yty;
  Eigen::VectorXd m;
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (p > 0) {
    llt.compute(s.A);
    m = llt.solve(s.b);
    S -= s.b.dot(m);
  }
  S = std::max(S, 0.0);
  std::gamma_distribution<double> g(kappa + 0.5 * n, 1.0 / (rate + 0.5 * S));
  double phi = g(rng);
  Eigen::VectorXd beta(p);
  if (p > 0) {
    Eigen::VectorXd zz(p);
    for (int i = 0; i < p; ++i) zz(i) = z(rng);
    beta = m + llt.matrixU().solve(zz) / std::sqrt(phi);
  }
  return {beta, phi};
}

namespace {

// Reversible-jump sampler state for non-conjugate families.
struct RjState {
  ModelIndicator gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd h;  // cached X_gamma beta
  double ll;          // cached log likelihood
};

double state_ll(const Dataset& data, const Eigen::VectorXd& h) {
  double ll = 0.0;
  for (int i = 0; i < data.n(); ++i) ll += log_density(data.family, data.y(i), h(i));
  return ll;
}

bool mh_accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::log(u(rng)) < log_ratio;
}

}  // namespace

Chain mcmc_run(const Dataset& data, const PriorSpec& spec, const McmcConfig& config) {
  data.validate();
  config.validate();
  spec.validate(data.K());
  const int K = data.K();
  const bool conjugate = data.family.is_normal();
  if (data.family.kind == FamilyKind::NormalUnknownVar && !spec.dispersion)
    throw std::invalid_argument("NormalUnknownVar sampling requires a dispersion prior");
  if (!conjugate && spec.dispersion)
    throw std::invalid_argument("dispersion prior is only supported for normal families");

  Rng rng(splitmix64(config.seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);

  Chain chain;
  chain.config = config;
  chain.draws.reserve((config.iterations - config.burn_in) / config.thin + 1);

  auto lpm = [&](const ModelIndicator& g) {
    auto v = log_prior_model(spec, g);
    return v ? *v : -std::numeric_limits<double>::infinity();
  };

  // ---- marginalized sampler over gamma for normal families ----
  if (conjugate) {
    ModelIndicator gamma({}, K);
    double lm = conjugate_log_marginal(data, spec, gamma);
    for (long iter = 0; iter < config.iterations; ++iter) {
      double mv = unif(rng);
      int sz = gamma.size(), n_excl = K - sz;
      auto try_model = [&](const ModelIndicator& cand, double log_prop_ratio, MoveStats& st) {
        ++st.proposed;
        double lm_cand = conjugate_log_marginal(data, spec, cand);
        double lr = lm_cand + lpm(cand) - lm - lpm(gamma) + log_prop_ratio;
        if (mh_accept(lr, rng)) {
          gamma = cand;
          lm = lm_cand;
          ++st.accepted;
        }
      };
      if (mv < config.p_add) {
        if (sz < spec.r_max && n_excl > 0) {
          int pick = std::uniform_int_distribution<int>(0, n_excl - 1)(rng);
          int j = -1;
          for (int c = 0, seen = 0; c < K; ++c)
            if (!gamma.contains(c) && seen++ == pick) { j = c; break; }
          std::vector<int> idx = gamma.included;
          idx.push_back(j);
          ModelIndicator cand(idx, K);
          // q(del)/q(add) = [p_del/(sz+1)] / [p_add/n_excl]
          double lpr = std::log(config.p_delete / (sz + 1)) - std::log(config.p_add / n_excl);
          try_model(cand, lpr, chain.add);
        } else {
          ++chain.add.proposed;  // auto-reject at the size cap
        }
      } else if (mv < config.p_add + config.p_delete) {
        if (sz > 0) {
          int pick = std::uniform_int_distribution<int>(0, sz - 1)(rng);
          std::vector<int> idx = gamma.included;
          idx.erase(idx.begin() + pick);
          ModelIndicator cand(idx, K);
          double lpr = std::log(config.p_add / (n_excl + 1)) - std::log(config.p_delete / sz);
          try_model(cand, lpr, chain.del);
        } else {
          ++chain.del.proposed;
        }
      } else {
        if (sz > 0 && n_excl > 0) {
          int drop = std::uniform_int_distribution<int>(0, sz - 1)(rng);
          int pick = std::uniform_int_distribution<int>(0, n_excl - 1)(rng);
          int j = -1;
          for (int c = 0, seen = 0; c < K; ++c)
            if (!gamma.contains(c) && seen++ == pick) { j = c; break; }
          std::vector<int> idx = gamma.included;
          idx.erase(idx.begin() + drop);
          idx.push_back(j);
          ModelIndicator cand(idx, K);
          try_model(cand, 0.0, chain.swap);
        } else {
          ++chain.swap.proposed;
        }
      }
      if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
        auto [beta, phi] = sample_conditional_coeffs(data, spec, gamma, rng);
        PosteriorDraw d{gamma, beta, phi, 0.0};
        d.log_post = *log_unnormalized_posterior(data, spec, gamma, beta, phi);
        chain.draws.push_back(std::move(d));
      }
    }
    return chain;
  }

  // ---- reversible-jump sampler for non-conjugate families ----
  RjState st;
  st.gamma = ModelIndicator({}, K);
  st.beta = Eigen::VectorXd::Zero(0);
  st.h = Eigen::VectorXd::Zero(data.n());
  st.ll = state_ll(data, st.h);

  auto slab_logpdf = [&](const ModelIndicator& g, const Eigen::VectorXd& b) {
    return log_prior_coeffs(spec, g, b, std::nullopt);
  };
  auto log_normal_pdf = [](double x, double m, double v) {
    double r = x - m;
    return -0.5 * r * r / v - 0.5 * std::log(v) - 0.5 * kLog2Pi;
  };
  // conditional slab of a coordinate (position `pos` in a size-`size` model)
  // given the remaining coefficients
  auto cond = [&](int size, int pos, const Eigen::VectorXd& others) {
    return conditional_slab(spec.v_policy, size, pos, others);
  };
  auto drop_coord = [](const Eigen::VectorXd& b, int pos) {
    Eigen::VectorXd out(b.size() - 1);
    int k = 0;
    for (int i = 0; i < b.size(); ++i)
      if (i != pos) out(k++) = b(i);
    return out;
  };
  auto insert_coord = [](const Eigen::VectorXd& b, int pos, double val) {
    Eigen::VectorXd out(b.size() + 1);
    for (int i = 0; i < pos; ++i) out(i) = b(i);
    out(pos) = val;
    for (int i = pos; i < b.size(); ++i) out(i + 1) = b(i);
    return out;
  };

  for (long iter = 0; iter < config.iterations; ++iter) {
    double mv = unif(rng);
    int sz = st.gamma.size(), n_excl = K - sz;
    if (mv < config.p_add) {
      ++chain.add.proposed;
      if (sz < spec.r_max && n_excl > 0) {
        int pick = std::uniform_int_distribution<int>(0, n_excl - 1)(rng);
        int j = -1;
        for (int c = 0, seen = 0; c < K; ++c)
          if (!st.gamma.contains(c) && seen++ == pick) { j = c; break; }
        std::vector<int> idx = st.gamma.included;
        idx.push_back(j);
        ModelIndicator cand(idx, K);
        int pos = int(std::lower_bound(st.gamma.included.begin(), st.gamma.included.end(), j) -
                      st.gamma.included.begin());
        ConditionalSlab cs = cond(sz + 1, pos, st.beta);
        double bnew = cs.mean + std::sqrt(cs.var) * norm(rng);
        Eigen::VectorXd beta_cand = insert_coord(st.beta, pos, bnew);
        Eigen::VectorXd h_cand = st.h + bnew * data.X.col(j);
        double ll_cand = state_ll(data, h_cand);
        double lr = ll_cand - st.ll + lpm(cand) - lpm(st.gamma) +
                    slab_logpdf(cand, beta_cand) - slab_logpdf(st.gamma, st.beta) +
                    std::log(config.p_delete / (sz + 1)) -
                    (std::log(config.p_add / n_excl) + log_normal_pdf(bnew, cs.mean, cs.var));
        if (mh_accept(lr, rng)) {
          st.gamma = cand;
          st.beta = beta_cand;
          st.h = h_cand;
          st.ll = ll_cand;
          ++chain.add.accepted;
        }
      }
    } else if (mv < config.p_add + config.p_delete) {
      ++chain.del.proposed;
      if (sz > 0) {
        int pos = std::uniform_int_distribution<int>(0, sz - 1)(rng);
        int j = st.gamma.included[pos];
        std::vector<int> idx = st.gamma.included;
        idx.erase(idx.begin() + pos);
        ModelIndicator cand(idx, K);
        double bold = st.beta(pos);
        Eigen::VectorXd beta_cand = drop_coord(st.beta, pos);
        Eigen::VectorXd h_cand = st.h - bold * data.X.col(j);
        double ll_cand = state_ll(data, h_cand);
        ConditionalSlab cs = cond(sz, pos, beta_cand);  // reverse ADD proposal
        double lr = ll_cand - st.ll + lpm(cand) - lpm(st.gamma) +
                    slab_logpdf(cand, beta_cand) - slab_logpdf(st.gamma, st.beta) +
                    std::log(config.p_add / (n_excl + 1)) + log_normal_pdf(bold, cs.mean, cs.var) -
                    std::log(config.p_delete / sz);
        if (mh_accept(lr, rng)) {
          st.gamma = cand;
          st.beta = beta_cand;
          st.h = h_cand;
          st.ll = ll_cand;
          ++chain.del.accepted;
        }
      }
    } else {
      ++chain.swap.proposed;
      if (sz > 0 && n_excl > 0) {
        int drop = std::uniform_int_distribution<int>(0, sz - 1)(rng);
        int jd = st.gamma.included[drop];
        int pick = std::uniform_int_distribution<int>(0, n_excl - 1)(rng);
        int ja = -1;
        for (int c = 0, seen = 0; c < K; ++c)
          if (!st.gamma.contains(c) && seen++ == pick) { ja = c; break; }
        std::vector<int> idx = st.gamma.included;
        idx.erase(idx.begin() + drop);
        double bdrop = st.beta(drop);
        Eigen::VectorXd beta_mid = drop_coord(st.beta, drop);
        std::vector<int> idx2 = idx;
        idx2.push_back(ja);
        ModelIndicator cand(idx2, K);
        int pos = 0;
        while (pos < int(idx.size()) && idx[pos] < ja) ++pos;
        ConditionalSlab cs_fwd = cond(sz, pos, beta_mid);
        double bnew = cs_fwd.mean + std::sqrt(cs_fwd.var) * norm(rng);
        Eigen::VectorXd beta_cand = insert_coord(beta_mid, pos, bnew);
        Eigen::VectorXd h_cand = st.h - bdrop * data.X.col(jd) + bnew * data.X.col(ja);
        double ll_cand = state_ll(data, h_cand);
        ConditionalSlab cs_rev = cond(sz, drop, beta_mid);
        double lr = ll_cand - st.ll + lpm(cand) - lpm(st.gamma) +
                    slab_logpdf(cand, beta_cand) - slab_logpdf(st.gamma, st.beta) +
                    log_normal_pdf(bdrop, cs_rev.mean, cs_rev.var) -
                    log_normal_pdf(bnew, cs_fwd.mean, cs_fwd.var);
        if (mh_accept(lr, rng)) {
          st.gamma = cand;
          st.beta = beta_cand;
          st.h = h_cand;
          st.ll = ll_cand;
          ++chain.swap.accepted;
        }
      }
    }

    // within-model random-walk refreshment
    if (st.gamma.size() > 0) {
      ++chain.walk.proposed;
      Eigen::VectorXd beta_cand = st.beta;
      for (int i = 0; i < beta_cand.size(); ++i) beta_cand(i) += config.rw_step * norm(rng);
      Eigen::VectorXd h_cand = Eigen::VectorXd::Zero(data.n());
      for (int i = 0; i < st.gamma.size(); ++i)
        h_cand += beta_cand(i) * data.X.col(st.gamma.included[i]);
      double ll_cand = state_ll(data, h_cand);
      double lr = ll_cand - st.ll + slab_logpdf(st.gamma, beta_cand) - slab_logpdf(st.gamma, st.beta);
      if (mh_accept(lr, rng)) {
        st.beta = beta_cand;
        st.h = h_cand;
        st.ll = ll_cand;
        ++chain.walk.accepted;
      }
    }

    if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      PosteriorDraw d{st.gamma, st.beta, std::nullopt, 0.0};
      d.log_post = *log_unnormalized_posterior(data, spec, st.gamma, st.beta, std::nullopt);
      chain.draws.push_back(std::move(d));
    }
  }
  return chain;
}

namespace {

void all_subsets(int K, int max_size, std::vector<std::vector<int>>& out) {
  std::vector<int> cur;
  // iterative DFS over sorted subsets
  std::function<void(int)> rec = [&](int start) {
    out.push_back(cur);
    if (int(cur.size()) == max_size) return;
    for (int j = start; j < K; ++j) {
      cur.push_back(j);
      rec(j + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

}  // namespace

EnumeratedPosterior enumerate_posterior(const Dataset& data, const PriorSpec& spec,
                                        const EnumerationOptions& opts) {
  data.validate();
  spec.validate(data.K());
  const int K = data.K();
  if (K > 15) throw std::invalid_argument("enumerate_posterior: K > 15");
  const bool conjugate = data.family.is_normal();
  if (!conjugate && spec.r_max > 3)
    throw std::invalid_argument("enumerate_posterior: non-conjugate guard requires r_max <= 3");

  std::vector<std::vector<int>> subsets;
  all_subsets(K, spec.r_max, subsets);

  Rng rng(splitmix64(opts.seed));
  EnumeratedPosterior out;
  std::vector<std::pair<ModelIndicator, double>> logw;
  double mx = -std::numeric_limits<double>::infinity();
  for (auto& s : subsets) {
    ModelIndicator g(s, K);
    double lm, se = 0.0;
    if (conjugate) {
      lm = conjugate_log_marginal(data, spec, g);
    } else {
      // prior Monte Carlo: log mean of exp(loglik) over slab draws
      long M = opts.mc_draws;
      std::vector<double> lls(M);
      double c = -std::numeric_limits<double>::infinity();
      std::normal_distribution<double> z(0.0, 1.0);
      Eigen::MatrixXd L;
      if (g.size() > 0) L = Eigen::LLT<Eigen::MatrixXd>(slab_covariance(spec.v_policy, g.size())).matrixL();
      for (long m = 0; m < M; ++m) {
        Eigen::VectorXd zz(g.size());
        for (int i = 0; i < g.size(); ++i) zz(i) = z(rng);
        Eigen::VectorXd beta = g.size() > 0 ? Eigen::VectorXd(L * zz) : Eigen::VectorXd(0);
        lls[m] = log_likelihood(data, g, beta, std::nullopt);
        c = std::max(c, lls[m]);
      }
      double sum = 0.0, sumsq = 0.0;
      for (double v : lls) {
        double w = std::exp(v - c);
        sum += w;
        sumsq += w * w;
      }
      double meanw = sum / M;
      double sdw = std::sqrt(std::max(sumsq / M - meanw * meanw, 0.0));
      lm = c + std::log(meanw);
      se = sdw / (std::sqrt(double(M)) * meanw);
    }
    auto lpm = log_prior_model(spec, g);
    double lw = lm + *lpm;
    logw.emplace_back(g, lw);
    out.log_marginal_se[g] = se;
    mx = std::max(mx, lw);
  }
  double Z = 0.0;
  for (auto& [g, lw] : logw) Z += std::exp(lw - mx);
  for (auto& [g, lw] : logw) out.prob[g] = std::exp(lw - mx) / Z;
  return out;
}

Eigen::VectorXd inclusion_probabilities(const Chain& chain, int K) {
  if (chain.draws.empty()) throw std::invalid_argument("empty chain");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  for (const auto& d : chain.draws)
    for (int j : d.gamma.included) p(j) += 1.0;
  return p / double(chain.draws.size());
}

std::map<ModelIndicator, double> model_frequencies(const Chain& chain) {
  std::map<ModelIndicator, double> f;
  for (const auto& d : chain.draws) f[d.gamma] += 1.0;
  for (auto& [g, v] : f) v /= double(chain.draws.size());
  return f;
}

double total_variation(const std::map<ModelIndicator, double>& a,
                       const std::map<ModelIndicator, double>& b) {
  double tv = 0.0;
  for (const auto& [g, p] : a) {
    auto it = b.find(g);
    tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [g, q] : b)
    if (!a.count(g)) tv += q;
  return 0.5 * tv;
}

}  // namespace bvsglm
