#ifndef UNIFOLD_MIXTURE_HPP
#define UNIFOLD_MIXTURE_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "unifold/error.hpp"
#include "unifold/gaussian_mixture.hpp"
#include "unifold/random.hpp"
#include "unifold/weighted_sample.hpp"

namespace unifold {

struct DiracPart {
  double weight;
  double location;
};

struct GaussianPart {
  double weight;
  double mean;
  double variance;
};

struct UniformPart {
  double weight;
  double lo;
  double hi;
};

using MixturePart = std::variant<DiracPart, GaussianPart, UniformPart>;

inline double part_weight(const MixturePart& p) {
  return std::visit([](const auto& c) { return c.weight; }, p);
}

/*
 * Mixture of Dirac, Gaussian and uniform components, as used by the
 * simulation registry and the command line. Weights are normalized to one.
 *
 * Text form (no spaces):
 *   mixture := group ('+' group)*
 *   group   := 'dirac:' w '@' m (',' w '@' m)*
 *            | 'gauss:' w '@' m ':' v (',' w '@' m ':' v)*
 *            | 'unif:'  w '@' lo ':' hi (',' w '@' lo ':' hi)*
 * where v is a variance. Example: gauss:0.6@0:0.25+unif:0.4@4:8
 */
class Mixture {
 public:
  Mixture() = default;
  explicit Mixture(std::vector<MixturePart> parts) : parts_(std::move(parts)) {
    double total = 0.0;
    for (const auto& p : parts_) {
      const double w = part_weight(p);
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw InvalidWeight("mixture weights must be positive");
      }
      total += w;
      if (const auto* u = std::get_if<UniformPart>(&p); u && !(u->hi > u->lo)) {
        throw InvalidParameter("uniform component needs lo < hi");
      }
      if (const auto* g = std::get_if<GaussianPart>(&p); g && !(g->variance >= 0.0)) {
        throw InvalidParameter("gaussian component needs variance >= 0");
      }
    }
    if (parts_.empty()) {
      throw InvalidParameter("empty mixture");
    }
    for (auto& p : parts_) {
      std::visit([total](auto& c) { c.weight /= total; }, p);
    }
  }

  const std::vector<MixturePart>& parts() const noexcept { return parts_; }

  bool all_dirac() const {
    for (const auto& p : parts_) {
      if (!std::holds_alternative<DiracPart>(p)) return false;
    }
    return true;
  }

  /// True when every part is Dirac or Gaussian.
  bool gaussian_family() const {
    for (const auto& p : parts_) {
      if (std::holds_alternative<UniformPart>(p)) return false;
    }
    return true;
  }

  WeightedSample to_weighted_sample() const {
    if (!all_dirac()) {
      throw InvalidParameter("mixture has non-Dirac components");
    }
    std::vector<PointMass> points;
    for (const auto& p : parts_) {
      const auto& d = std::get<DiracPart>(p);
      points.push_back({d.location, d.weight});
    }
    return WeightedSample::from_points(std::move(points));
  }

  GaussianMixture to_gaussian_mixture() const {
    if (!gaussian_family()) {
      throw InvalidParameter("mixture has uniform components");
    }
    std::vector<GaussianComponent> comps;
    for (const auto& p : parts_) {
      if (const auto* d = std::get_if<DiracPart>(&p)) {
        comps.push_back({d->weight, d->location, 0.0});
      } else {
        const auto& g = std::get<GaussianPart>(p);
        comps.push_back({g.weight, g.mean, g.variance});
      }
    }
    return GaussianMixture(std::move(comps));
  }

  /// Canonical text form, parseable by parse_mixture().
  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) os << '+';
      std::visit(
          [&os](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, DiracPart>) {
              os << "dirac:" << c.weight << '@' << c.location;
            } else if constexpr (std::is_same_v<T, GaussianPart>) {
              os << "gauss:" << c.weight << '@' << c.mean << ':' << c.variance;
            } else {
              os << "unif:" << c.weight << '@' << c.lo << ':' << c.hi;
            }
          },
          parts_[i]);
    }
    return os.str();
  }

 private:
  std::vector<MixturePart> parts_;
};

namespace detail {

class MixtureParser {
 public:
  explicit MixtureParser(std::string_view text) : text_(text) {}

  Mixture parse() {
    std::vector<MixturePart> parts;
    do {
      parse_group(parts);
    } while (accept('+'));
    if (pos_ != text_.size()) {
      fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    }
    try {
      return Mixture(std::move(parts));
    } catch (const Error& e) {
      throw ParseError(e.what(), 0);
    }
  }

 private:
  void parse_group(std::vector<MixturePart>& parts) {
    const std::size_t start = pos_;
    const std::size_t colon = text_.find(':', pos_);
    if (colon == std::string_view::npos) {
      fail("expected 'dirac:', 'gauss:' or 'unif:'");
    }
    const std::string_view kind = text_.substr(pos_, colon - pos_);
    pos_ = colon + 1;
    do {
      const double w = number();
      expect('@');
      if (kind == "dirac") {
        parts.emplace_back(DiracPart{w, number()});
      } else if (kind == "gauss") {
        const double m = number();
        expect(':');
        parts.emplace_back(GaussianPart{w, m, number()});
      } else if (kind == "unif") {
        const double lo = number();
        expect(':');
        parts.emplace_back(UniformPart{w, lo, number()});
      } else {
        pos_ = start;
        fail("unknown component kind '" + std::string(kind) + "'");
      }
    } while (accept(','));
  }

  double number() {
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || !std::isfinite(value)) {
      fail("expected a number");
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Mixture parse_mixture(std::string_view text) {
  return detail::MixtureParser(text).parse();
}

/// Number of draws per component: round(n * w_i).
inline std::vector<std::size_t> stratified_counts(const Mixture& m, std::size_t n) {
  std::vector<std::size_t> counts;
  for (const auto& p : m.parts()) {
    counts.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(n) * part_weight(p))));
  }
  return counts;
}

/*
 * Stratified draw: exactly round(n * w_i) points from component i, in
 * component order. Dirac components repeat their location exactly.
 */
inline std::vector<double> sample(const Mixture& m, std::size_t n, Rng& rng) {
  if (n < 2) {
    throw InvalidParameter("sample size must be at least 2");
  }
  const auto counts = stratified_counts(m, n);
  std::vector<double> out;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& part = m.parts()[i];
    for (std::size_t j = 0; j < counts[i]; ++j) {
      if (const auto* d = std::get_if<DiracPart>(&part)) {
        out.push_back(d->location);
      } else if (const auto* g = std::get_if<GaussianPart>(&part)) {
        out.push_back(g->mean + std::sqrt(g->variance) * normal(rng));
      } else {
        const auto& u = std::get<UniformPart>(part);
        out.push_back(u.lo + (u.hi - u.lo) * unit(rng));
      }
    }
  }
  return out;
}

inline std::vector<double> sample(const GaussianMixture& m, std::size_t n, Rng& rng) {
  std::vector<MixturePart> parts;
  for (const auto& c : m.components()) {
    parts.emplace_back(GaussianPart{c.weight, c.mean, c.variance});
  }
  return sample(Mixture(std::move(parts)), n, rng);
}

inline std::vector<double> sample(const WeightedSample& m, std::size_t n, Rng& rng) {
  std::vector<MixturePart> parts;
  for (std::size_t i = 0; i < m.size(); ++i) {
    parts.emplace_back(DiracPart{m.weight(i), m.location(i)});
  }
  return sample(Mixture(std::move(parts)), n, rng);
}

}  // namespace unifold

#endif  // UNIFOLD_MIXTURE_HPP
