#include "longmat/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "longmat/errors.hpp"
#include "longmat/format.hpp"
#include "longmat/mc_engine.hpp"
#include "longmat/parallel.hpp"
#include "longmat/rng.hpp"

namespace longmat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_strike(double k, const char* what) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw ConfigError(std::string(what) + ": strike must be finite and > 0");
  }
}

void require_offsets(const std::vector<double>& offsets, const char* what) {
  if (offsets.empty()) throw ConfigError(std::string(what) + ": at least one offset is required");
  for (double o : offsets) {
    if (!(o >= 0.0) || !std::isfinite(o)) {
      throw ConfigError(std::string(what) + ": offsets must be finite and >= 0");
    }
  }
  if (!std::is_sorted(offsets.begin(), offsets.end())) {
    throw ConfigError(std::string(what) + ": offsets must be nondecreasing");
  }
}

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void validate_payoff(const Payoff& payoff) {
  std::visit(overloaded{
                 [](const DiscreteAsian& p) {
                   require_offsets(p.offsets, "discrete Asian");
                   require_strike(p.strike, "discrete Asian");
                 },
                 [](const IntegralAsian& p) { require_strike(p.strike, "integral Asian"); },
                 [](const DiscreteLookback& p) {
                   require_offsets(p.offsets, "discrete lookback");
                   require_strike(p.strike, "discrete lookback");
                 },
                 [](const PartialBarrier& p) {
                   require_strike(p.strike, "partial barrier");
                   if (!(p.barrier > p.strike) || !std::isfinite(p.barrier)) {
                     throw ConfigError("partial barrier: barrier L must be finite and > K");
                   }
                 },
             },
             payoff);
}

ConditionMeta default_meta(const Payoff& payoff, const Approximation& approx) {
  return std::visit(
      overloaded{
          [](const VanillaBasket& a) {
            const auto [lo, hi] = std::minmax_element(a.strikes.begin(), a.strikes.end());
            return ConditionMeta{*lo, *hi, 0.0};
          },
          [&](const StrikeProfileBasket& a) {
            if (a.strikes.empty()) {
              const double k = payoff_strike(payoff);
              return ConditionMeta{k, k, 0.0};
            }
            const auto [lo, hi] = std::minmax_element(a.strikes.begin(), a.strikes.end());
            return ConditionMeta{*lo, *hi, 0.0};
          },
          [](const GapCall& a) { return ConditionMeta{a.strike, a.barrier, 0.0}; },
          [](const auto&) { return ConditionMeta{}; },
      },
      approx);
}

void append_list(std::ostringstream& os, const std::vector<double>& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_g17(v[i]);
  os << ']';
}

}  // namespace

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

std::vector<double> uniform_grid(double tau, int steps) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("uniform_grid: tau must be > 0");
  if (steps < 1) throw DomainError("uniform_grid: steps must be >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[static_cast<std::size_t>(k)] = tau * k / steps;
  t.back() = tau;
  return t;
}

int default_window_steps(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("default_window_steps: tau must be > 0");
  return std::max(16, static_cast<int>(std::lround(252.0 * tau)));
}

PathWindow::PathWindow(double tau, std::vector<double> times, std::vector<double> values)
    : tau_(tau), times_(std::move(times)), values_(std::move(values)) {
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw DomainError("PathWindow: tau must be > 0");
  if (times_.size() < 2 || times_.size() != values_.size()) {
    throw DomainError("PathWindow: need matching times and values with at least two points");
  }
  if (times_.front() != 0.0 || times_.back() != tau_) {
    throw DomainError("PathWindow: grid must start at 0 and end at tau");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw DomainError("PathWindow: times must be strictly increasing");
  }
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("PathWindow: values must be finite and > 0");
  }
}

PathWindow PathWindow::uniform(double tau, std::vector<double> values) {
  if (values.size() < 2) throw DomainError("PathWindow: need at least two values");
  auto times = uniform_grid(tau, static_cast<int>(values.size() - 1));
  return PathWindow(tau, std::move(times), std::move(values));
}

double PathWindow::inf() const { return *std::min_element(values_.begin(), values_.end()); }
double PathWindow::sup() const { return *std::max_element(values_.begin(), values_.end()); }

PathWindow PathWindow::scaled(double a) const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("PathWindow::scaled: factor must be > 0");
  std::vector<double> v(values_);
  for (double& x : v) x *= a;
  return PathWindow(tau_, times_, std::move(v));
}

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------

bool has_h(const Payoff& payoff) { return !std::holds_alternative<PartialBarrier>(payoff); }

double payoff_strike(const Payoff& payoff) {
  return std::visit([](const auto& p) { return p.strike; }, payoff);
}

PayoffPair::PayoffPair(Payoff payoff, Approximation approximation, std::optional<ConditionMeta> meta)
    : payoff_(std::move(payoff)), approximation_(std::move(approximation)) {
  validate_payoff(payoff_);
  const double k = payoff_strike(payoff_);
  std::visit(
      overloaded{
          [&](const ScaledVanilla& a) {
            if (!has_h(payoff_)) throw ConfigError("scaled vanilla needs an Asian or lookback payoff");
            if (!(a.c_h > 0.0) || !std::isfinite(a.c_h)) throw ConfigError("scaled vanilla: C_h must be > 0");
            if (a.strike != k) throw ConfigError("scaled vanilla: strike must equal the payoff strike");
          },
          [&](const VanillaBasket& a) {
            const auto* asian = std::get_if<DiscreteAsian>(&payoff_);
            if (!asian) throw ConfigError("vanilla basket pairs with a discrete Asian payoff");
            if (a.strikes.size() != asian->offsets.size()) {
              throw ConfigError("vanilla basket: one strike per sampling offset is required");
            }
            for (double ki : a.strikes) require_strike(ki, "vanilla basket");
            if (!close_rel(mean_of(a.strikes), k, 1e-12)) {
              throw ConfigError("vanilla basket: mean of the strikes must equal K");
            }
          },
          [&](const StrikeProfileBasket& a) {
            if (!std::holds_alternative<IntegralAsian>(payoff_)) {
              throw ConfigError("strike-profile basket pairs with an integral Asian payoff");
            }
            for (double ki : a.strikes) require_strike(ki, "strike profile");
            if (!a.strikes.empty() && !close_rel(mean_of(a.strikes), k, 1e-12)) {
              throw ConfigError("strike profile: mean of the segment strikes must equal K");
            }
          },
          [&](const GapCall& a) {
            const auto* barrier = std::get_if<PartialBarrier>(&payoff_);
            if (!barrier) throw ConfigError("gap call pairs with a partial barrier payoff");
            if (a.strike != barrier->strike || a.barrier != barrier->barrier) {
              throw ConfigError("gap call: strike and barrier must equal the payoff's");
            }
          },
          [](const ExactCopy&) {},
      },
      approximation_);

  if (is_scaled_vanilla_pair()) {
    if (meta) throw ConfigError("scaled vanilla pairs take no localization thresholds");
    return;
  }
  meta_ = meta ? *meta : default_meta(payoff_, approximation_);
  if (!(meta_->m_lower >= 0.0) || !(meta_->m_upper > 0.0) || !(meta_->slack >= 0.0) ||
      std::isnan(meta_->m_upper)) {
    throw ConfigError("localization thresholds must satisfy M_L >= 0, M_U > 0, M >= 0");
  }
}

bool PayoffPair::is_scaled_vanilla_pair() const noexcept {
  return std::holds_alternative<ScaledVanilla>(approximation_);
}

bool PayoffPair::is_exact_copy() const noexcept { return std::holds_alternative<ExactCopy>(approximation_); }

std::string PayoffPair::fingerprint() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const DiscreteAsian& p) {
                   os << "discrete_asian{offsets=";
                   append_list(os, p.offsets);
                   os << ",strike=" << format_g17(p.strike) << '}';
                 },
                 [&](const IntegralAsian& p) { os << "integral_asian{strike=" << format_g17(p.strike) << '}'; },
                 [&](const DiscreteLookback& p) {
                   os << "discrete_lookback{offsets=";
                   append_list(os, p.offsets);
                   os << ",strike=" << format_g17(p.strike) << '}';
                 },
                 [&](const PartialBarrier& p) {
                   os << "partial_barrier{strike=" << format_g17(p.strike)
                      << ",barrier=" << format_g17(p.barrier) << '}';
                 },
             },
             payoff_);
  os << '/';
  std::visit(overloaded{
                 [&](const ScaledVanilla& a) {
                   os << "scaled_vanilla{c_h=" << format_g17(a.c_h) << ",strike=" << format_g17(a.strike) << '}';
                 },
                 [&](const VanillaBasket& a) {
                   os << "vanilla_basket{strikes=";
                   append_list(os, a.strikes);
                   os << '}';
                 },
                 [&](const StrikeProfileBasket& a) {
                   os << "strike_profile{strikes=";
                   append_list(os, a.strikes);
                   os << '}';
                 },
                 [&](const GapCall& a) {
                   os << "gap_call{strike=" << format_g17(a.strike) << ",barrier=" << format_g17(a.barrier) << '}';
                 },
                 [&](const ExactCopy&) { os << "exact_copy{}"; },
             },
             approximation_);
  if (meta_) {
    os << "/meta{m_upper=" << format_g17(meta_->m_upper) << ",m_lower=" << format_g17(meta_->m_lower)
       << ",slack=" << format_g17(meta_->slack) << '}';
  }
  return os.str();
}

PayoffPair with_c_h(const PayoffPair& pair, double c_h) {
  const auto* sv = std::get_if<ScaledVanilla>(&pair.approximation());
  if (!sv) throw ConfigError("with_c_h: pair is not a scaled-vanilla pair");
  return PayoffPair(pair.payoff(), ScaledVanilla{c_h, sv->strike});
}

// ---------------------------------------------------------------------------
// PreparedPair
// ---------------------------------------------------------------------------

PreparedPair::PreparedPair(const PayoffPair& pair, std::span<const double> times)
    : pair_(pair), n_(times.size()) {
  if (n_ < 2 || times.front() != 0.0) throw DomainError("PreparedPair: grid must start at 0 with >= 2 points");
  for (std::size_t i = 1; i < n_; ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("PreparedPair: grid must be strictly increasing");
  }
  const double tau = times.back();

  const std::vector<double>* offsets = nullptr;
  if (const auto* a = std::get_if<DiscreteAsian>(&pair_.payoff())) offsets = &a->offsets;
  if (const auto* l = std::get_if<DiscreteLookback>(&pair_.payoff())) offsets = &l->offsets;
  if (offsets) {
    sample_idx_.reserve(offsets->size());
    for (std::size_t i = 0; i < offsets->size(); ++i) {
      const double o = (*offsets)[i];
      if (o > tau * (1.0 + 1e-12)) {
        throw ConfigError("sampling offset " + format_g17(o) + " lies outside the window of length " +
                          format_g17(tau));
      }
      const double pos = std::max(0.0, tau - o);
      auto it = std::lower_bound(times.begin(), times.end(), pos);
      std::size_t idx = static_cast<std::size_t>(it - times.begin());
      if (idx == n_) {
        idx = n_ - 1;
      } else if (idx > 0 && pos - times[idx - 1] <= times[idx] - pos) {
        idx -= 1;
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (sample_idx_[j] == idx && (*offsets)[j] != o) {
          throw ConfigError("window grid too coarse: offsets " + format_g17((*offsets)[j]) + " and " +
                            format_g17(o) + " snap to the same grid time");
        }
      }
      sample_idx_.push_back(idx);
    }
  }

  const bool needs_weights = std::holds_alternative<IntegralAsian>(pair_.payoff());
  if (needs_weights) {
    weights_.assign(n_, 0.0);
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      const double half = 0.5 * (times[i + 1] - times[i]);
      weights_[i] += half;
      weights_[i + 1] += half;
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (double& w : weights_) w /= total;
  }

  if (const auto* sp = std::get_if<StrikeProfileBasket>(&pair_.approximation())) {
    const double k = payoff_strike(pair_.payoff());
    grid_strikes_.assign(n_, k);
    if (!sp->strikes.empty()) {
      const std::size_t segs = sp->strikes.size();
      for (std::size_t i = 0; i < n_; ++i) {
        auto seg = static_cast<std::size_t>(std::floor(times[i] / tau * static_cast<double>(segs)));
        grid_strikes_[i] = sp->strikes[std::min(seg, segs - 1)];
      }
      double mean = 0.0;
      for (std::size_t i = 0; i < n_; ++i) mean += weights_[i] * grid_strikes_[i];
      const double factor = k / mean;
      for (double& s : grid_strikes_) s *= factor;
    }
  }
}

std::optional<ConditionMeta> PreparedPair::effective_meta() const {
  auto meta = pair_.condition_meta();
  if (meta && std::holds_alternative<StrikeProfileBasket>(pair_.approximation())) {
    const auto [lo, hi] = std::minmax_element(grid_strikes_.begin(), grid_strikes_.end());
    meta->m_upper = std::min(meta->m_upper, *lo);
    meta->m_lower = std::max(meta->m_lower, *hi);
  }
  return meta;
}

std::vector<double> PreparedPair::start_price_kinks() const {
  std::vector<double> kinks;
  std::visit(overloaded{
                 [&](const ScaledVanilla& a) { kinks.push_back(a.strike / a.c_h); },
                 [&](const VanillaBasket& a) {
                   for (std::size_t i = 0; i < sample_idx_.size(); ++i) {
                     if (sample_idx_[i] == 0) kinks.push_back(a.strikes[i]);
                   }
                 },
                 [&](const StrikeProfileBasket&) { kinks.push_back(grid_strikes_.front()); },
                 [](const auto&) {},
             },
             pair_.approximation());
  if (const auto* b = std::get_if<PartialBarrier>(&pair_.payoff())) kinks.push_back(b->barrier);
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  return kinks;
}

double PreparedPair::clamp_h(double hv, std::span<const double> values) const {
  // Averages may drift an ulp outside [min, max] of the averaged values.
  double lo;
  double hi;
  if (!sample_idx_.empty()) {
    lo = hi = values[sample_idx_[0]];
    for (std::size_t idx : sample_idx_) {
      lo = std::min(lo, values[idx]);
      hi = std::max(hi, values[idx]);
    }
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  return std::clamp(hv, lo, hi);
}

double PreparedPair::h(std::span<const double> values) const {
  if (values.size() != n_) throw DomainError("PreparedPair: path length does not match the grid");
  return std::visit(
      overloaded{
          [&](const DiscreteAsian&) {
            double s = 0.0;
            for (std::size_t idx : sample_idx_) s += values[idx];
            return clamp_h(s / static_cast<double>(sample_idx_.size()), values);
          },
          [&](const IntegralAsian&) {
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i) s += weights_[i] * values[i];
            return clamp_h(s, values);
          },
          [&](const DiscreteLookback&) {
            double m = values[sample_idx_[0]];
            for (std::size_t idx : sample_idx_) m = std::max(m, values[idx]);
            return m;
          },
          [](const PartialBarrier&) -> double { throw UnsupportedError("h is not defined for the partial barrier"); },
      },
      pair_.payoff());
}

double PreparedPair::g_from_h(double hv) const { return std::max(hv - payoff_strike(pair_.payoff()), 0.0); }

double PreparedPair::g(std::span<const double> values) const {
  if (const auto* b = std::get_if<PartialBarrier>(&pair_.payoff())) {
    if (values.size() != n_) throw DomainError("PreparedPair: path length does not match the grid");
    const double lo = *std::min_element(values.begin(), values.end());
    return lo >= b->barrier ? std::max(values.back() - b->strike, 0.0) : 0.0;
  }
  return g_from_h(h(values));
}

double PreparedPair::g_tilde(std::span<const double> values) const {
  if (values.size() != n_) throw DomainError("PreparedPair: path length does not match the grid");
  return std::visit(
      overloaded{
          [&](const ScaledVanilla& a) { return std::max(a.c_h * values.front() - a.strike, 0.0); },
          [&](const VanillaBasket& a) {
            double s = 0.0;
            for (std::size_t i = 0; i < sample_idx_.size(); ++i) {
              s += std::max(values[sample_idx_[i]] - a.strikes[i], 0.0);
            }
            return s / static_cast<double>(sample_idx_.size());
          },
          [&](const StrikeProfileBasket&) {
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i) s += weights_[i] * std::max(values[i] - grid_strikes_[i], 0.0);
            return s;
          },
          [&](const GapCall& a) { return values.back() >= a.barrier ? values.back() - a.strike : 0.0; },
          [&](const ExactCopy&) { return g(values); },
      },
      pair_.approximation());
}

void PreparedPair::summarize(std::span<const double> unit_values, ScaledPath& out) const {
  if (unit_values.size() != n_) throw DomainError("PreparedPair: path length does not match the grid");
  const auto [mn, mx] = std::minmax_element(unit_values.begin(), unit_values.end());
  out.inf = *mn;
  out.sup = *mx;
  out.first = unit_values.front();
  out.last = unit_values.back();
  if (has_h(pair_.payoff())) out.h = h(unit_values);
  if (std::holds_alternative<VanillaBasket>(pair_.approximation())) {
    out.samples.resize(sample_idx_.size());
    for (std::size_t i = 0; i < sample_idx_.size(); ++i) out.samples[i] = unit_values[sample_idx_[i]];
  }
  if (std::holds_alternative<StrikeProfileBasket>(pair_.approximation())) {
    out.order.resize(n_);
    out.ratios.resize(n_);
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_; ++i) out.ratios[i] = unit_values[i] / grid_strikes_[i];
    std::sort(out.order.begin(), out.order.end(),
              [&](std::size_t a, std::size_t b) { return out.ratios[a] < out.ratios[b]; });
    std::vector<double>& r = out.ratios;
    out.suffix_u.assign(n_ + 1, 0.0);
    out.suffix_k.assign(n_ + 1, 0.0);
    for (std::size_t rank = n_; rank-- > 0;) {
      const std::size_t j = out.order[rank];
      out.suffix_u[rank] = out.suffix_u[rank + 1] + weights_[j] * unit_values[j];
      out.suffix_k[rank] = out.suffix_k[rank + 1] + weights_[j] * grid_strikes_[j];
    }
    std::vector<double> sorted(n_);
    for (std::size_t rank = 0; rank < n_; ++rank) sorted[rank] = r[out.order[rank]];
    r.swap(sorted);
  }
}

PreparedPair::Values PreparedPair::evaluate_scaled(const ScaledPath& path, double x) const {
  double g;
  if (const auto* b = std::get_if<PartialBarrier>(&pair_.payoff())) {
    g = x * path.inf >= b->barrier ? std::max(x * path.last - b->strike, 0.0) : 0.0;
  } else {
    g = g_from_h(x * path.h);
  }
  const double gt = std::visit(
      overloaded{
          [&](const ScaledVanilla& a) { return std::max(a.c_h * (x * path.first) - a.strike, 0.0); },
          [&](const VanillaBasket& a) {
            double s = 0.0;
            for (std::size_t i = 0; i < path.samples.size(); ++i) s += std::max(x * path.samples[i] - a.strikes[i], 0.0);
            return s / static_cast<double>(path.samples.size());
          },
          [&](const StrikeProfileBasket&) {
            const auto it = std::upper_bound(path.ratios.begin(), path.ratios.end(), 1.0 / x);
            const auto r = static_cast<std::size_t>(it - path.ratios.begin());
            return std::max(x * path.suffix_u[r] - path.suffix_k[r], 0.0);
          },
          [&](const GapCall& a) {
            const double last = x * path.last;
            return last >= a.barrier ? last - a.strike : 0.0;
          },
          [&](const ExactCopy&) { return g; },
      },
      pair_.approximation());
  return {g, gt};
}

double eval_h(const Payoff& payoff, const PathWindow& window) {
  if (!has_h(payoff)) throw UnsupportedError("h is not defined for the partial barrier");
  return PreparedPair(PayoffPair(payoff, ExactCopy{}), window.times()).h(window.values());
}

double eval_g(const PayoffPair& pair, const PathWindow& window) {
  return PreparedPair(pair, window.times()).g(window.values());
}

double eval_g_tilde(const PayoffPair& pair, const PathWindow& window) {
  return PreparedPair(pair, window.times()).g_tilde(window.values());
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

ConditionReport check_pair_conditions(const PayoffPair& pair, std::span<const PathWindow> samples) {
  if (samples.size() < 1000) throw DomainError("check_pair_conditions: at least 1000 sample windows are required");
  ConditionReport report;
  std::optional<PreparedPair> prepared;
  std::vector<double> grid;
  std::vector<double> scaled;
  auto fail = [](std::size_t i, const std::string& what) {
    throw ValidationFailure("sample " + std::to_string(i) + ": " + what);
  };

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PathWindow& w = samples[i];
    if (!prepared || !std::equal(grid.begin(), grid.end(), w.times().begin(), w.times().end())) {
      grid.assign(w.times().begin(), w.times().end());
      prepared.emplace(pair, grid);
    }
    const auto values = w.values();
    const double inf = w.inf();
    const double sup = w.sup();
    ++report.samples;

    if (pair.is_scaled_vanilla_pair()) {
      const double hv = prepared->h(values);
      if (!(hv >= inf && hv <= sup)) fail(i, "h(w) outside [inf w, sup w]");
      for (double a : {0.5, 2.0, 10.0}) {
        scaled.resize(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) scaled[k] = a * values[k];
        const double ha = prepared->h(scaled);
        if (std::abs(ha - a * hv) > 1e-12 * a * hv) {
          fail(i, "homogeneity h(aw) = a h(w) violated at a = " + format_g17(a));
        }
        ++report.homogeneity_checks;
      }
      continue;
    }

    const ConditionMeta meta = *prepared->effective_meta();
    const double g = prepared->g(values);
    const double gt = prepared->g_tilde(values);
    const double gap = std::abs(g - gt);
    // Equal in exact arithmetic; basket sums may differ by rounding.
    const double tol = 1e-12 * (sup + payoff_strike(pair.payoff()));
    if (gap > tol) ++report.discrepancies;
    if (inf > meta.m_lower) {
      ++report.lower_applicable;
      if (gap > tol) fail(i, "inf w > M_L but g != g~ (|g - g~| = " + format_g17(gap) + ")");
    }
    if (sup < meta.m_upper) {
      ++report.upper_applicable;
      if (gap > tol) fail(i, "sup w < M_U but g != g~ (|g - g~| = " + format_g17(gap) + ")");
    }
    if (gap > sup + meta.slack + tol) fail(i, "|g - g~| exceeds sup w + M");
    report.max_gap_ratio = std::max(report.max_gap_ratio, gap / (sup + meta.slack));
  }
  return report;
}

// ---------------------------------------------------------------------------
// C_h
// ---------------------------------------------------------------------------

ChEstimate estimate_c_h(const ModelParams& model, const Payoff& payoff, double tau, std::size_t n_paths,
                        std::uint64_t seed, int window_steps, unsigned workers) {
  if (!has_h(payoff)) throw UnsupportedError("estimate_c_h: the partial barrier has no h");
  if (n_paths < 10000) throw ConfigError("estimate_c_h: n_paths must be >= 10000");
  const int steps = window_steps > 0 ? window_steps : default_window_steps(tau);
  const auto times = uniform_grid(tau, steps);
  const PreparedPair prepared(PayoffPair(payoff, ExactCopy{}), times);

  auto chunks = run_chunks(n_paths, kDefaultChunk, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    RunningStats acc;
    std::vector<double> logs(times.size());
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(seed, p, StreamDomain::window);
      sample_window_log(model, 0.0, times, rng, logs);
      for (double& v : logs) v = std::exp(v);
      acc.add(prepared.h(logs));
    }
    return acc;
  });
  RunningStats total;
  for (const auto& c : chunks) total.merge(c);
  return {total.mean, total.stderr()};
}

}  // namespace longmat
