#include "ecogvoice/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ecogvoice/csv.hpp"
#include "ecogvoice/error.hpp"

namespace ecogvoice::stats {

namespace {

constexpr double kVanish = 1e-12;

double t_two_sided(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

Eigen::VectorXd ranked(std::span<const double> v) {
  const auto r = average_ranks(v);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

Eigen::VectorXd residual(const Eigen::MatrixXd& design, const Eigen::VectorXd& v) {
  if (design.cols() == 0) return v;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  return v - design * qr.solve(v);
}

std::optional<double> pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double den = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (!(den > 0.0)) return std::nullopt;
  return std::clamp(ca.dot(cb) / den, -1.0, 1.0);
}

bool constant(const Eigen::VectorXd& v) { return v.size() == 0 || v.maxCoeff() == v.minCoeff(); }

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i + 1;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) r[idx[k]] = avg;
    i = j;
  }
  return r;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  return partial_spearman(x, y, Eigen::MatrixXd(static_cast<Eigen::Index>(x.size()), 0));
}

Correlation partial_spearman(std::span<const double> x, std::span<const double> y,
                             const Eigen::MatrixXd& covariates) {
  if (x.size() != y.size() || static_cast<std::size_t>(covariates.rows()) != x.size())
    throw std::invalid_argument("partial_spearman: length mismatch");
  const auto k = static_cast<std::size_t>(covariates.cols());
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < x.size(); ++i) {
    bool ok = std::isfinite(x[i]) && std::isfinite(y[i]);
    for (std::size_t c = 0; ok && c < k; ++c) ok = std::isfinite(covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    if (ok) keep.push_back(i);
  }
  const std::size_t n = keep.size();
  if (n < k + 3) throw DataError("partial_spearman: " + std::to_string(n) + " complete rows, need at least " + std::to_string(k + 3));

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[keep[i]];
    ys[i] = y[keep[i]];
  }
  Correlation out;
  out.n = n;
  const Eigen::VectorXd rx = ranked(xs), ry = ranked(ys);
  if (constant(rx) || constant(ry)) return out;

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k + 1));
  design.col(0).setOnes();
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = covariates(static_cast<Eigen::Index>(keep[i]), static_cast<Eigen::Index>(c));
    design.col(static_cast<Eigen::Index>(c + 1)) = ranked(col);
  }
  const Eigen::VectorXd ex = residual(design, rx), ey = residual(design, ry);
  const double sx = (rx.array() - rx.mean()).square().sum(), sy = (ry.array() - ry.mean()).square().sum();
  if (ex.squaredNorm() <= kVanish * sx || ey.squaredNorm() <= kVanish * sy) {
    out.rho = 0.0;
    out.p = 1.0;
    return out;
  }
  const auto r = pearson(ex, ey);
  if (!r) return out;
  out.rho = *r;
  const double df = static_cast<double>(n) - static_cast<double>(k) - 2.0;
  const double denom = 1.0 - (*r) * (*r);
  out.p = denom <= 0.0 ? 0.0 : t_two_sided(*r * std::sqrt(df / denom), df);
  return out;
}

EtaResult ancova_eta(std::span<const double> y, std::span<const int> group, const Eigen::MatrixXd& covariates,
                     const std::vector<std::string>& covariate_names) {
  if (y.size() != group.size() || static_cast<std::size_t>(covariates.rows()) != y.size())
    throw std::invalid_argument("ancova_eta: length mismatch");
  const auto k = static_cast<std::size_t>(covariates.cols());
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < y.size(); ++i) {
    bool ok = std::isfinite(y[i]);
    for (std::size_t c = 0; ok && c < k; ++c) ok = std::isfinite(covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    if (ok) keep.push_back(i);
  }
  const std::size_t n = keep.size();
  if (n < k + 4) throw DataError("ancova_eta: " + std::to_string(n) + " complete rows, need at least " + std::to_string(k + 4));

  const auto cols = static_cast<Eigen::Index>(k + 2);
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), cols);
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
  std::size_t highs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    for (std::size_t c = 0; c < k; ++c) design(r, static_cast<Eigen::Index>(c + 1)) = covariates(static_cast<Eigen::Index>(keep[i]), static_cast<Eigen::Index>(c));
    design(r, cols - 1) = group[keep[i]] != 0 ? 1.0 : 0.0;
    highs += group[keep[i]] != 0;
    yv(r) = y[keep[i]];
  }
  if (highs == 0 || highs == n) throw DataError("ancova_eta: both groups must be represented");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    auto name = [&](Eigen::Index c) -> std::string {
      if (c == 0) return "intercept";
      if (c == cols - 1) return "group";
      const auto ci = static_cast<std::size_t>(c - 1);
      return ci < covariate_names.size() ? covariate_names[ci] : "covariate " + std::to_string(ci);
    };
    // columns with weight in the null space of the column-normalized design
    const Eigen::VectorXd norms = design.colwise().norm().transpose();
    Eigen::MatrixXd scaled = design;
    for (Eigen::Index c = 0; c < cols; ++c)
      if (norms(c) > 0.0) scaled.col(c) /= norms(c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullV);
    const Eigen::MatrixXd null = svd.matrixV().rightCols(cols - qr.rank());
    std::string msg = "ancova_eta: rank-deficient design; collinear columns:";
    for (Eigen::Index c = 0; c < cols; ++c)
      if (null.row(c).norm() > 1e-6) msg += " " + name(c);
    throw DataError(msg);
  }
  const double ss_full = (yv - design * qr.solve(yv)).squaredNorm();
  const Eigen::MatrixXd reduced = design.leftCols(cols - 1);
  const double ss_reduced = residual(reduced, yv).squaredNorm();
  const double ss_group = std::max(0.0, ss_reduced - ss_full);

  EtaResult out;
  out.n = n;
  const double df2 = static_cast<double>(n) - static_cast<double>(k) - 2.0;
  if (ss_full <= kVanish * ss_reduced) {
    out.eta_sq = ss_group > 0.0 ? 1.0 : 0.0;
    out.f = ss_group > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    out.p = ss_group > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.eta_sq = ss_group / (ss_group + ss_full);
  out.f = ss_group / (ss_full / df2);
  boost::math::fisher_f dist(1.0, df2);
  out.p = boost::math::cdf(boost::math::complement(dist, out.f));
  return out;
}

std::vector<double> bh_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t j = m; j-- > 0;) {
    running = std::min(running, static_cast<double>(m) * p[idx[j]] / static_cast<double>(j + 1));
    out[idx[j]] = std::min(1.0, std::max(p[idx[j]], running));  // m * p / m can round below p
  }
  return out;
}

TTest paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t: length mismatch");
  if (a.size() < 3) throw DataError("paired_t: need at least 3 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = sd_of(d);
  if (!(sd > 0.0)) throw DataError("paired_t: differences have zero variance");
  TTest out;
  out.df = static_cast<double>(d.size() - 1);
  out.t = mean_of(d) / (sd / std::sqrt(static_cast<double>(d.size())));
  out.p = t_two_sided(out.t, out.df);
  return out;
}

Correlation agreement(std::span<const double> a, std::span<const double> b) { return spearman(a, b); }

std::string_view stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string_view to_string(Unit u) { return u == Unit::response ? "response" : "participant"; }

Unit parse_unit(std::string_view s) {
  if (s == "response") return Unit::response;
  if (s == "participant") return Unit::participant;
  throw std::invalid_argument("unknown unit '" + std::string(s) + "' (response|participant)");
}

const FeatureStats* StatsReport::find(std::string_view feature, std::string_view condition) const {
  for (const auto& r : rows)
    if (r.feature == feature && r.condition == condition) return &r;
  return nullptr;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); }

struct Sample {
  std::vector<std::vector<double>> values;  // per feature
  std::vector<double> ecog;
  std::vector<int> group;
  Eigen::MatrixXd covariates;
};

Sample collect(std::span<const features::FeatureVector> rows, corpus::Condition cond,
               const std::vector<std::size_t>& cols, Unit unit) {
  static const std::vector<std::string> demo = {"age", "sex", "education"};
  std::vector<const features::FeatureVector*> sel;
  for (const auto& r : rows)
    if (r.condition == cond) sel.push_back(&r);

  Sample s;
  s.values.resize(cols.size());
  std::vector<std::array<double, 3>> cov;
  auto value = [](const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); };
  auto demo_of = [&](const features::FeatureVector& r) {
    std::array<double, 3> d{};
    for (std::size_t i = 0; i < 3; ++i) d[i] = value(r.get(demo[i]));
    return d;
  };

  if (unit == Unit::response) {
    for (const auto* r : sel) {
      for (std::size_t c = 0; c < cols.size(); ++c) s.values[c].push_back(value(r->values[cols[c]]));
      s.ecog.push_back(r->ecog);
      s.group.push_back(r->group == corpus::GroupLabel::high ? 1 : 0);
      cov.push_back(demo_of(*r));
    }
  } else {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const features::FeatureVector*>> by;
    for (const auto* r : sel) {
      if (!by.count(r->participant_id)) order.push_back(r->participant_id);
      by[r->participant_id].push_back(r);
    }
    for (const auto& pid : order) {
      const auto& rs = by[pid];
      for (std::size_t c = 0; c < cols.size(); ++c) {
        double sum = 0.0;
        int cnt = 0;
        for (const auto* r : rs)
          if (r->values[cols[c]]) {
            sum += *r->values[cols[c]];
            ++cnt;
          }
        s.values[c].push_back(cnt > 0 ? sum / cnt : std::numeric_limits<double>::quiet_NaN());
      }
      s.ecog.push_back(rs.front()->ecog);
      s.group.push_back(rs.front()->group == corpus::GroupLabel::high ? 1 : 0);
      cov.push_back(demo_of(*rs.front()));
    }
  }
  s.covariates.resize(static_cast<Eigen::Index>(cov.size()), 3);
  for (std::size_t i = 0; i < cov.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) s.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov[i][j];
  return s;
}

}  // namespace

nlohmann::json StatsReport::to_json() const {
  nlohmann::json j;
  j["unit"] = std::string(to_string(unit));
  j["conditions"] = conditions;
  j["features"] = features;
  auto& rs = j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"feature", r.feature},
                  {"condition", r.condition},
                  {"n", r.n},
                  {"rho", opt(r.rho)},
                  {"rho_p", opt(r.rho_p)},
                  {"rho_p_adj", opt(r.rho_p_adj)},
                  {"eta_sq", opt(r.eta_sq)},
                  {"eta_p", opt(r.eta_p)},
                  {"eta_p_adj", opt(r.eta_p_adj)}});
  auto& cs = j["comparisons"] = nlohmann::json::array();
  for (const auto& c : comparisons) {
    nlohmann::json e = {{"statistic", c.statistic},
                        {"condition_a", c.condition_a},
                        {"condition_b", c.condition_b},
                        {"n_features", c.n_features},
                        {"mean_a", c.mean_a},
                        {"sd_a", c.sd_a},
                        {"mean_b", c.mean_b},
                        {"sd_b", c.sd_b},
                        {"agreement_rho", opt(c.agreement.rho)},
                        {"agreement_p", opt(c.agreement.p)}};
    if (c.paired) {
      e["paired_t"] = c.paired->t;
      e["paired_df"] = c.paired->df;
      e["paired_p"] = c.paired->p;
    } else {
      e["paired_t"] = nullptr;
      e["paired_df"] = nullptr;
      e["paired_p"] = nullptr;
    }
    cs.push_back(std::move(e));
  }
  return j;
}

void StatsReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "feature,condition,n,rho,rho_p,rho_p_adj,rho_sig,eta_sq,eta_p,eta_p_adj,eta_sig\n";
  for (const auto& r : rows) {
    out << csv::join({r.feature, r.condition, std::to_string(r.n), cell(r.rho), cell(r.rho_p), cell(r.rho_p_adj),
                      r.rho_p_adj ? std::string(stars(*r.rho_p_adj)) : std::string(), cell(r.eta_sq), cell(r.eta_p),
                      cell(r.eta_p_adj), r.eta_p_adj ? std::string(stars(*r.eta_p_adj)) : std::string()})
        << '\n';
  }
}

StatsReport run_stats(std::span<const features::FeatureVector> rows, const StatsConfig& config) {
  StatsReport rep;
  rep.unit = config.unit;
  if (config.features.empty()) {
    const auto a = features::acoustic_names();
    rep.features.assign(a.begin(), a.end());
  } else {
    rep.features = config.features;
  }
  std::vector<std::size_t> cols;
  for (const auto& f : rep.features) {
    const auto idx = features::feature_index(f);
    if (!idx) throw DataError("unknown feature '" + f + "'");
    cols.push_back(*idx);
  }
  static const std::vector<std::string> cov_names = {"age", "sex", "education"};

  for (auto cond : {corpus::Condition::cognitive, corpus::Condition::daily}) {
    const auto s = collect(rows, cond, cols, config.unit);
    if (s.ecog.empty()) continue;
    const std::string cname(corpus::to_string(cond));
    rep.conditions.push_back(cname);
    std::vector<FeatureStats> block(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto& fs = block[c];
      fs.feature = rep.features[c];
      fs.condition = cname;
      const auto ps = partial_spearman(s.values[c], s.ecog, s.covariates);
      fs.n = ps.n;
      fs.rho = ps.rho;
      fs.rho_p = ps.p;
      try {
        const auto eta = ancova_eta(s.values[c], s.group, s.covariates, cov_names);
        fs.eta_sq = eta.eta_sq;
        fs.eta_p = eta.p;
      } catch (const DataError& e) {
        throw DataError(cname + " / " + fs.feature + ": " + e.what());
      }
    }
    // BH within this condition, per statistic, over the defined p-values.
    auto adjust = [&](auto raw_of, auto adj_of) {
      std::vector<double> p;
      std::vector<std::size_t> at;
      for (std::size_t c = 0; c < block.size(); ++c)
        if (const auto& v = raw_of(block[c])) {
          p.push_back(*v);
          at.push_back(c);
        }
      const auto adj = bh_adjust(p);
      for (std::size_t i = 0; i < at.size(); ++i) adj_of(block[at[i]]) = adj[i];
    };
    adjust([](const FeatureStats& f) -> const std::optional<double>& { return f.rho_p; },
           [](FeatureStats& f) -> std::optional<double>& { return f.rho_p_adj; });
    adjust([](const FeatureStats& f) -> const std::optional<double>& { return f.eta_p; },
           [](FeatureStats& f) -> std::optional<double>& { return f.eta_p_adj; });
    rep.rows.insert(rep.rows.end(), block.begin(), block.end());
  }

  if (rep.conditions.size() == 2) {
    const auto& ca = rep.conditions[0];
    const auto& cb = rep.conditions[1];
    for (const std::string stat : {"abs_rho", "eta_sq"}) {
      ConditionComparison cmp;
      cmp.statistic = stat;
      cmp.condition_a = ca;
      cmp.condition_b = cb;
      std::vector<double> a, b, sa, sb;
      for (const auto& f : rep.features) {
        const auto* ra = rep.find(f, ca);
        const auto* rb = rep.find(f, cb);
        const auto& va = stat == "abs_rho" ? ra->rho : ra->eta_sq;
        const auto& vb = stat == "abs_rho" ? rb->rho : rb->eta_sq;
        if (!va || !vb) continue;
        a.push_back(stat == "abs_rho" ? std::abs(*va) : *va);
        b.push_back(stat == "abs_rho" ? std::abs(*vb) : *vb);
        sa.push_back(*va);
        sb.push_back(*vb);
      }
      cmp.n_features = a.size();
      if (!a.empty()) {
        cmp.mean_a = mean_of(a);
        cmp.sd_a = sd_of(a);
        cmp.mean_b = mean_of(b);
        cmp.sd_b = sd_of(b);
      }
      try {
        cmp.paired = paired_t(a, b);
      } catch (const DataError&) {
        cmp.paired.reset();
      }
      if (sa.size() >= 3) cmp.agreement = agreement(sa, sb);
      rep.comparisons.push_back(cmp);
    }
  }
  return rep;
}

}  // namespace ecogvoice::stats
